#include "ferlink/mlp.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace ferlink {

std::vector<int> default_layer_dims() { return {16400, 2048, 1024, 1024, 512, 128, 4}; }

template <typename Scalar>
MlpT<Scalar> make_mlp(const std::vector<int>& dims, std::uint64_t seed) {
    if (dims.size() < 2) throw std::invalid_argument("need at least one layer");
    using Matrix = typename MlpT<Scalar>::Matrix;
    using Vector = typename MlpT<Scalar>::Vector;
    MlpT<Scalar> model;
    Rng rng(mix_seed(seed));
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const int fan_in = dims[l];
        const int fan_out = dims[l + 1];
        // He-style uniform fan-in scaling
        const double bound = std::sqrt(6.0 / fan_in);
        Matrix w(fan_out, fan_in);
        for (int r = 0; r < fan_out; ++r)
            for (int c = 0; c < fan_in; ++c)
                w(r, c) = static_cast<Scalar>(rng.uniform(-bound, bound));
        model.weights.push_back(std::move(w));
        model.biases.push_back(Vector::Zero(fan_out));
    }
    return model;
}

template <typename Scalar>
typename MlpT<Scalar>::Matrix forward(const MlpT<Scalar>& model,
                                      const typename MlpT<Scalar>::Matrix& x, bool train_mode,
                                      std::uint64_t dropout_seed, ForwardCache<Scalar>* cache) {
    using Matrix = typename MlpT<Scalar>::Matrix;
    if (!x.allFinite()) throw std::invalid_argument("non-finite input");
    if (x.cols() != model.input_dim()) throw std::invalid_argument("input dimension mismatch");

    Matrix h = x;
    if (model.standardize)
        for (Eigen::Index r = 0; r < h.rows(); ++r)
            h.row(r) = (h.row(r) - model.feature_mean.transpose())
                           .cwiseProduct(model.feature_scale.transpose());

    const int n_layers = model.num_layers();
    if (cache) {
        cache->activations.clear();
        cache->activations.reserve(n_layers);
    }
    for (int l = 0; l < n_layers; ++l) {
        if (cache) cache->activations.push_back(h);
        Matrix y = h * model.weights[l].transpose();
        y.rowwise() += model.biases[l].transpose();
        if (l + 1 < n_layers) {
            y = y.cwiseMax(Scalar(0));  // ReLU, subgradient 0 at 0
            if (l + 1 == model.dropout_after_layer && train_mode && model.dropout_p > 0.0) {
                Rng rng(mix_seed(dropout_seed));
                const Scalar keep = Scalar(1) - static_cast<Scalar>(model.dropout_p);
                Matrix mask(y.rows(), y.cols());
                for (Eigen::Index r = 0; r < y.rows(); ++r)
                    for (Eigen::Index c = 0; c < y.cols(); ++c)
                        mask(r, c) = rng.uniform() < model.dropout_p ? Scalar(0)
                                                                     : Scalar(1) / keep;
                y = y.cwiseProduct(mask);
                if (cache) cache->dropout_mask = mask;
            }
        }
        h = std::move(y);
    }

    // log-softmax with max subtraction
    for (Eigen::Index r = 0; r < h.rows(); ++r) {
        const Scalar mx = h.row(r).maxCoeff();
        const Scalar lse =
            mx + std::log((h.row(r).array() - mx).exp().sum());
        h.row(r).array() -= lse;
    }
    if (cache) cache->log_probs = h;
    return h;
}

template <typename Scalar>
Scalar nll_loss(const typename MlpT<Scalar>::Matrix& log_probs,
                const std::vector<int>& true_classes) {
    if (static_cast<std::size_t>(log_probs.rows()) != true_classes.size())
        throw std::invalid_argument("label count mismatch");
    Scalar total = 0;
    for (std::size_t i = 0; i < true_classes.size(); ++i) {
        const int c = true_classes[i];
        if (c < 1 || c > static_cast<int>(log_probs.cols()))
            throw std::invalid_argument("class label out of range");
        total -= log_probs(static_cast<Eigen::Index>(i), c - 1);
    }
    return total / static_cast<Scalar>(true_classes.size());
}

template <typename Scalar>
Gradients<Scalar> backward(const MlpT<Scalar>& model, const ForwardCache<Scalar>& cache,
                           const std::vector<int>& true_classes) {
    using Matrix = typename MlpT<Scalar>::Matrix;
    const Eigen::Index batch = cache.log_probs.rows();
    if (batch == 0) throw std::invalid_argument("empty batch");
    const int n_layers = model.num_layers();

    // d(mean NLL)/d(logits) = (softmax - onehot) / batch
    Matrix delta = cache.log_probs.array().exp();
    for (Eigen::Index i = 0; i < batch; ++i) delta(i, true_classes[i] - 1) -= Scalar(1);
    delta /= static_cast<Scalar>(batch);

    Gradients<Scalar> grads;
    grads.weights.resize(n_layers);
    grads.biases.resize(n_layers);
    for (int l = n_layers - 1; l >= 0; --l) {
        grads.weights[l] = delta.transpose() * cache.activations[l];
        grads.biases[l] = delta.colwise().sum();
        if (l == 0) break;
        Matrix upstream = delta * model.weights[l];
        // through dropout, then ReLU of the previous layer
        if (l == model.dropout_after_layer && cache.dropout_mask.size() > 0)
            upstream = upstream.cwiseProduct(cache.dropout_mask);
        delta = upstream.cwiseProduct(
            (cache.activations[l].array() > Scalar(0)).template cast<Scalar>().matrix());
    }
    return grads;
}

template <typename Scalar>
AdamState<Scalar> make_adam_state(const MlpT<Scalar>& model) {
    using Matrix = typename MlpT<Scalar>::Matrix;
    using Vector = typename MlpT<Scalar>::Vector;
    AdamState<Scalar> state;
    for (int l = 0; l < model.num_layers(); ++l) {
        state.m_w.push_back(Matrix::Zero(model.weights[l].rows(), model.weights[l].cols()));
        state.v_w.push_back(Matrix::Zero(model.weights[l].rows(), model.weights[l].cols()));
        state.m_b.push_back(Vector::Zero(model.biases[l].size()));
        state.v_b.push_back(Vector::Zero(model.biases[l].size()));
    }
    return state;
}

template <typename Scalar>
void adam_step(MlpT<Scalar>& model, const Gradients<Scalar>& grads, AdamState<Scalar>& state,
               const TrainConfig& config) {
    if (state.m_w.size() != model.weights.size())
        throw std::invalid_argument("optimizer state does not match the model");
    ++state.step;
    const Scalar b1 = static_cast<Scalar>(config.beta1);
    const Scalar b2 = static_cast<Scalar>(config.beta2);
    const Scalar eps = static_cast<Scalar>(config.epsilon);
    const Scalar bc1 = Scalar(1) - std::pow(b1, static_cast<Scalar>(state.step));
    const Scalar bc2 = Scalar(1) - std::pow(b2, static_cast<Scalar>(state.step));
    const Scalar lr = static_cast<Scalar>(config.learning_rate);

    for (int l = 0; l < model.num_layers(); ++l) {
        state.m_w[l] = b1 * state.m_w[l] + (Scalar(1) - b1) * grads.weights[l];
        state.v_w[l] = b2 * state.v_w[l] +
                       (Scalar(1) - b2) * grads.weights[l].cwiseProduct(grads.weights[l]);
        model.weights[l].array() -=
            lr * (state.m_w[l].array() / bc1) /
            ((state.v_w[l].array() / bc2).sqrt() + eps);
        state.m_b[l] = b1 * state.m_b[l] + (Scalar(1) - b1) * grads.biases[l];
        state.v_b[l] = b2 * state.v_b[l] +
                       (Scalar(1) - b2) * grads.biases[l].cwiseProduct(grads.biases[l]);
        model.biases[l].array() -=
            lr * (state.m_b[l].array() / bc1) /
            ((state.v_b[l].array() / bc2).sqrt() + eps);
    }
}

TrainResult train(Mlp& model,
                  const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>& x,
                  const std::vector<int>& labels, const TrainConfig& config) {
    if (x.rows() == 0) throw std::invalid_argument("empty training set");
    if (static_cast<std::size_t>(x.rows()) != labels.size())
        throw std::invalid_argument("label count mismatch");

    auto state = make_adam_state(model);
    TrainResult result;
    std::vector<std::size_t> order(static_cast<std::size_t>(x.rows()));
    std::iota(order.begin(), order.end(), 0);

    int stall = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        Rng shuffle_rng(mix_seed(config.seed, 0x5F1E, static_cast<std::uint64_t>(epoch)));
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.uniform_int(i)]);

        double loss_sum = 0.0;
        std::int64_t seen = 0;
        const std::size_t n = order.size();
        int step = 0;
        for (std::size_t start = 0; start < n; start += config.batch_size, ++step) {
            const std::size_t count = std::min<std::size_t>(config.batch_size, n - start);
            Mlp::Matrix batch(count, x.cols());
            std::vector<int> batch_labels(count);
            for (std::size_t i = 0; i < count; ++i) {
                batch.row(static_cast<Eigen::Index>(i)) =
                    x.row(static_cast<Eigen::Index>(order[start + i]));
                batch_labels[i] = labels[order[start + i]];
            }
            ForwardCache<float> cache;
            const std::uint64_t drop_seed = mix_seed(config.seed, 0xd407,
                                                     static_cast<std::uint64_t>(epoch),
                                                     static_cast<std::uint64_t>(step));
            const auto log_probs = forward(model, batch, true, drop_seed, &cache);
            loss_sum += static_cast<double>(nll_loss<float>(log_probs, batch_labels)) *
                        static_cast<double>(count);
            seen += count;
            const auto grads = backward(model, cache, batch_labels);
            adam_step(model, grads, state, config);
        }
        const double epoch_loss = loss_sum / static_cast<double>(seen);
        result.epoch_loss.push_back(epoch_loss);
        result.epochs_run = epoch + 1;

        if (result.epoch_loss.size() >= 2) {
            const double improvement =
                result.epoch_loss[result.epoch_loss.size() - 2] - epoch_loss;
            stall = improvement < config.early_stop_delta ? stall + 1 : 0;
            if (stall >= config.early_stop_patience) {
                result.early_stopped = true;
                break;
            }
        }
    }
    return result;
}

int predict_class(const Mlp& model, const Eigen::VectorXf& x) {
    Mlp::Matrix row(1, x.size());
    row.row(0) = x.transpose();
    const auto log_probs = forward<float>(model, row, false, 0);
    int best = 0;
    for (int c = 1; c < log_probs.cols(); ++c)
        if (log_probs(0, c) > log_probs(0, best)) best = c;  // ties keep the lower index
    return best + 1;
}

std::int64_t ConfusionMatrix::total() const {
    std::int64_t n = 0;
    for (const auto& row : counts)
        for (const auto v : row) n += v;
    return n;
}

double ConfusionMatrix::overall_accuracy() const {
    std::int64_t diag = 0;
    for (int i = 0; i < 4; ++i) diag += counts[i][i];
    return static_cast<double>(diag) / static_cast<double>(total());
}

double ConfusionMatrix::per_class_accuracy(int true_class) const {
    std::int64_t row = 0;
    for (const auto v : counts[true_class - 1]) row += v;
    if (row == 0) return 0.0;
    return static_cast<double>(counts[true_class - 1][true_class - 1]) /
           static_cast<double>(row);
}

ConfusionMatrix evaluate(const Mlp& model,
                         const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic,
                                             Eigen::RowMajor>& x,
                         const std::vector<int>& labels) {
    if (x.rows() == 0) throw std::invalid_argument("empty evaluation set");
    ConfusionMatrix cm;
    const auto log_probs = forward<float>(model, x, false, 0);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        int best = 0;
        for (int c = 1; c < log_probs.cols(); ++c)
            if (log_probs(i, c) > log_probs(i, best)) best = c;
        cm.counts[labels[static_cast<std::size_t>(i)] - 1][best]++;
    }
    return cm;
}

// ---------------------------------------------------------------------------
// Checkpoint I/O

namespace {

constexpr std::uint32_t kModelMagic = 0x4D524546;  // "FERM"
constexpr std::uint32_t kModelVersion = 1;

template <typename T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw std::runtime_error("truncated model file");
    return v;
}

}  // namespace

void save_model(const Mlp& model, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open model file for writing: " + path);
    write_pod(os, kModelMagic);
    write_pod(os, kModelVersion);
    write_pod(os, static_cast<std::uint32_t>(model.num_layers()));
    for (int l = 0; l < model.num_layers(); ++l) {
        write_pod(os, static_cast<std::uint32_t>(model.weights[l].cols()));
        write_pod(os, static_cast<std::uint32_t>(model.weights[l].rows()));
    }
    write_pod(os, static_cast<std::int32_t>(model.dropout_after_layer));
    write_pod(os, model.dropout_p);
    write_pod(os, static_cast<std::uint8_t>(model.standardize ? 1 : 0));
    if (model.standardize) {
        os.write(reinterpret_cast<const char*>(model.feature_mean.data()),
                 model.feature_mean.size() * sizeof(float));
        os.write(reinterpret_cast<const char*>(model.feature_scale.data()),
                 model.feature_scale.size() * sizeof(float));
    }
    for (int l = 0; l < model.num_layers(); ++l) {
        os.write(reinterpret_cast<const char*>(model.weights[l].data()),
                 static_cast<std::streamsize>(model.weights[l].size() * sizeof(float)));
        os.write(reinterpret_cast<const char*>(model.biases[l].data()),
                 static_cast<std::streamsize>(model.biases[l].size() * sizeof(float)));
    }
    if (!os) throw std::runtime_error("failed writing model file: " + path);
}

Mlp load_model(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open model file: " + path);
    if (read_pod<std::uint32_t>(is) != kModelMagic)
        throw std::runtime_error("not a model file (bad magic): " + path);
    if (read_pod<std::uint32_t>(is) != kModelVersion)
        throw std::runtime_error("unsupported model version: " + path);
    const auto n_layers = read_pod<std::uint32_t>(is);
    if (n_layers == 0 || n_layers > 64) throw std::runtime_error("invalid layer count");
    std::vector<std::pair<std::uint32_t, std::uint32_t>> shapes(n_layers);
    for (auto& [in, out] : shapes) {
        in = read_pod<std::uint32_t>(is);
        out = read_pod<std::uint32_t>(is);
    }
    Mlp model;
    model.dropout_after_layer = read_pod<std::int32_t>(is);
    model.dropout_p = read_pod<double>(is);
    model.standardize = read_pod<std::uint8_t>(is) != 0;
    if (model.standardize) {
        model.feature_mean.resize(shapes[0].first);
        model.feature_scale.resize(shapes[0].first);
        is.read(reinterpret_cast<char*>(model.feature_mean.data()),
                model.feature_mean.size() * sizeof(float));
        is.read(reinterpret_cast<char*>(model.feature_scale.data()),
                model.feature_scale.size() * sizeof(float));
    }
    for (const auto& [in, out] : shapes) {
        Mlp::Matrix w(out, in);
        is.read(reinterpret_cast<char*>(w.data()),
                static_cast<std::streamsize>(w.size() * sizeof(float)));
        Mlp::Vector b(out);
        is.read(reinterpret_cast<char*>(b.data()),
                static_cast<std::streamsize>(b.size() * sizeof(float)));
        model.weights.push_back(std::move(w));
        model.biases.push_back(std::move(b));
    }
    if (!is) throw std::runtime_error("truncated model file: " + path);
    return model;
}

// explicit instantiations
template MlpT<float> make_mlp<float>(const std::vector<int>&, std::uint64_t);
template MlpT<double> make_mlp<double>(const std::vector<int>&, std::uint64_t);
template MlpT<float>::Matrix forward<float>(const MlpT<float>&, const MlpT<float>::Matrix&,
                                            bool, std::uint64_t, ForwardCache<float>*);
template MlpT<double>::Matrix forward<double>(const MlpT<double>&, const MlpT<double>::Matrix&,
                                              bool, std::uint64_t, ForwardCache<double>*);
template float nll_loss<float>(const MlpT<float>::Matrix&, const std::vector<int>&);
template double nll_loss<double>(const MlpT<double>::Matrix&, const std::vector<int>&);
template Gradients<float> backward<float>(const MlpT<float>&, const ForwardCache<float>&,
                                          const std::vector<int>&);
template Gradients<double> backward<double>(const MlpT<double>&, const ForwardCache<double>&,
                                            const std::vector<int>&);
template AdamState<float> make_adam_state<float>(const MlpT<float>&);
template AdamState<double> make_adam_state<double>(const MlpT<double>&);
template void adam_step<float>(MlpT<float>&, const Gradients<float>&, AdamState<float>&,
                               const TrainConfig&);
template void adam_step<double>(MlpT<double>&, const Gradients<double>&, AdamState<double>&,
                                const TrainConfig&);

}  // namespace ferlink
