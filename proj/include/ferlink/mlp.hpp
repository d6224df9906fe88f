#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "ferlink/rng.hpp"

namespace ferlink {

// Fully connected ReLU stack with one dropout slot and log-softmax output.
// Scalar-templated: float for training, double for the gradient-check
// shadow path.
template <typename Scalar>
struct MlpT {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    std::vector<Matrix> weights;  // out x in
    std::vector<Vector> biases;
    int dropout_after_layer = 4;  // 1-based; <= 0 disables
    double dropout_p = 0.05;
    // Optional per-feature standardization applied before layer 1.
    bool standardize = false;
    Vector feature_mean;
    Vector feature_scale;  // 1 / std

    int num_layers() const { return static_cast<int>(weights.size()); }
    int input_dim() const { return static_cast<int>(weights.front().cols()); }
    int output_dim() const { return static_cast<int>(weights.back().rows()); }

    std::int64_t num_parameters() const {
        std::int64_t n = 0;
        for (int l = 0; l < num_layers(); ++l) n += weights[l].size() + biases[l].size();
        return n;
    }
};

using Mlp = MlpT<float>;

// The six-layer architecture: 16400 -> 2048 -> 1024 -> 1024 -> 512 ->
// 128 -> 4, dropout p = 0.05 after the fourth ReLU.
std::vector<int> default_layer_dims();

template <typename Scalar>
MlpT<Scalar> make_mlp(const std::vector<int>& dims, std::uint64_t seed);

inline Mlp make_default_model(std::uint64_t seed) {
    return make_mlp<float>(default_layer_dims(), seed);
}

// Saved activations for the backward pass.
template <typename Scalar>
struct ForwardCache {
    std::vector<typename MlpT<Scalar>::Matrix> activations;  // per layer input, batch x dim
    typename MlpT<Scalar>::Matrix dropout_mask;
    typename MlpT<Scalar>::Matrix log_probs;  // batch x classes
};

// Batch forward pass; rows of x are samples. Dropout (inverted scaling)
// only when train_mode.
template <typename Scalar>
typename MlpT<Scalar>::Matrix forward(const MlpT<Scalar>& model,
                                      const typename MlpT<Scalar>::Matrix& x, bool train_mode,
                                      std::uint64_t dropout_seed,
                                      ForwardCache<Scalar>* cache = nullptr);

// Mean negative log-likelihood of the true classes (1-based labels).
template <typename Scalar>
Scalar nll_loss(const typename MlpT<Scalar>::Matrix& log_probs,
                const std::vector<int>& true_classes);

template <typename Scalar>
struct Gradients {
    std::vector<typename MlpT<Scalar>::Matrix> weights;
    std::vector<typename MlpT<Scalar>::Vector> biases;
};

// Exact gradients of the mean batch loss.
template <typename Scalar>
Gradients<Scalar> backward(const MlpT<Scalar>& model, const ForwardCache<Scalar>& cache,
                           const std::vector<int>& true_classes);

struct TrainConfig {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    int epochs = 100;
    int batch_size = 64;
    std::uint64_t seed = 1;
    double early_stop_delta = 1e-4;  // marginal-decrease threshold
    int early_stop_patience = 5;
};

template <typename Scalar>
struct AdamState {
    std::vector<typename MlpT<Scalar>::Matrix> m_w, v_w;
    std::vector<typename MlpT<Scalar>::Vector> m_b, v_b;
    std::int64_t step = 0;
};

template <typename Scalar>
AdamState<Scalar> make_adam_state(const MlpT<Scalar>& model);

template <typename Scalar>
void adam_step(MlpT<Scalar>& model, const Gradients<Scalar>& grads, AdamState<Scalar>& state,
               const TrainConfig& config);

struct TrainResult {
    std::vector<double> epoch_loss;
    int epochs_run = 0;
    bool early_stopped = false;
};

// Mini-batch training with per-epoch seeded shuffling and the
// marginal-decrease early stop.
TrainResult train(Mlp& model, const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic,
                                                  Eigen::RowMajor>& x,
                  const std::vector<int>& labels, const TrainConfig& config);

// Argmax of the log-probabilities, ties toward the lower class index.
int predict_class(const Mlp& model, const Eigen::VectorXf& x);

struct ConfusionMatrix {
    std::array<std::array<std::int64_t, 4>, 4> counts{};  // [true-1][pred-1]

    std::int64_t total() const;
    double overall_accuracy() const;
    double per_class_accuracy(int true_class) const;  // 1-based
};

ConfusionMatrix evaluate(const Mlp& model,
                         const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic,
                                             Eigen::RowMajor>& x,
                         const std::vector<int>& labels);

// Checkpoint I/O: magic "FERM", version, layer shapes, row-major 32-bit
// little-endian parameter blobs, optional standardization vectors.
void save_model(const Mlp& model, const std::string& path);
Mlp load_model(const std::string& path);

}  // namespace ferlink
