// ferlink: FER-labeled vehicular channel dataset pipeline and classifier.
//
// Verbs: generate, label, kmeans-classes, train, eval, predict.

#include <CLI11.hpp>
#include <atomic>
#include <cmath>
#include <functional>
#include <numeric>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "ferlink/config.hpp"
#include "ferlink/container.hpp"
#include "ferlink/dataset.hpp"
#include "ferlink/gscm.hpp"
#include "ferlink/mlp.hpp"
#include "ferlink/phy.hpp"
#include "ferlink/rng.hpp"
#include "ferlink/tdl.hpp"

namespace {

using namespace ferlink;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

RunConfig load_config_or_default(const std::string& path) {
    try {
        if (path.empty()) return default_run_config();
        return load_run_config(path);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
}

// Index-deterministic parallel loop: results depend only on the index, so
// the schedule does not matter.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    jobs = std::max(1, jobs);
    if (jobs == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int t = 0; t < jobs; ++t) {
        workers.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& w : workers) w.join();
    if (error) std::rethrow_exception(error);
}

std::string format_id(const char* fmt, auto... args) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), fmt, args...);
    return buf;
}

// --------------------------------------------------------------------------

int cmd_generate(const std::string& kind, const std::string& config_path, int count,
                 std::uint64_t seed, const std::string& out) {
    const RunConfig cfg = load_config_or_default(config_path);
    if (count < 1) throw ConfigError("--count must be >= 1");

    RegionContainer container;
    container.spec = cfg.grid;
    container.master_seed = seed;
    container.config_hash = cfg.config_hash();

    if (kind == "gscm") {
        int run = 0;
        while (static_cast<int>(container.regions.size()) < count) {
            const auto regions = generate_v2i_run(
                cfg.scenario, cfg.grid, cfg.gscm_regions_per_run,
                mix_seed(seed, static_cast<std::uint64_t>(run)), run);
            for (const auto& r : regions) {
                if (static_cast<int>(container.regions.size()) >= count) break;
                RegionRecord rec;
                rec.process = r.process;
                rec.source = SampleSource::Gscm;
                rec.seed = r.seed;
                rec.region_id = format_id("gscm/run%04d/rx%02d/wp%04d", r.run_index,
                                          r.rx_index, r.waypoint_index);
                container.regions.push_back(std::move(rec));
            }
            ++run;
        }
    } else if (kind == "tdl") {
        const auto configs = sample_dataset_configs(cfg.tdl, count, mix_seed(seed, 0x7D1));
        for (int i = 0; i < count; ++i) {
            RegionRecord rec;
            rec.seed = mix_seed(seed, 0x7D1, static_cast<std::uint64_t>(i));
            rec.process = sample_tdl_process(configs[i], cfg.grid, rec.seed);
            rec.source = SampleSource::Tdl;
            rec.region_id = format_id("tdl/%06d", i);
            container.regions.push_back(std::move(rec));
        }
    } else {
        throw ConfigError("--kind must be gscm or tdl");
    }

    write_region_container(container, out);
    std::cout << "wrote " << container.regions.size() << " regions to " << out << "\n";
    return kExitOk;
}

int cmd_label(const std::string& in, const std::string& config_path, const std::string& out,
              int frames_override, int jobs) {
    const RunConfig cfg = load_config_or_default(config_path);
    PhyConfig phy = cfg.phy;
    if (frames_override > 0) phy.frames_per_region = frames_override;
    try {
        phy.validate();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }

    const RegionContainer regions = read_region_container(in);
    if (regions.regions.empty()) throw DataError("region container is empty");

    LabeledDataset dataset;
    dataset.spec = regions.spec;
    dataset.spec.num_subcarriers = 41;
    dataset.master_seed = regions.master_seed;
    dataset.config_hash = cfg.config_hash();
    dataset.phy_config_hash = cfg.phy_config_hash();
    dataset.scheme = cfg.classes;

    struct Slot {
        LabeledSample sample;
        bool skipped = false;
        std::string error;
    };
    std::vector<Slot> slots(regions.regions.size());

    parallel_for(regions.regions.size(), jobs, [&](std::size_t i) {
        const auto& rec = regions.regions[i];
        Slot& slot = slots[i];
        try {
            FrameSimulator sim(rec.process, phy);
            const auto fer = measure_fer(rec.process, phy, rec.seed, rec.region_id);
            auto grid = evaluate_ctf(rec.process, 0, rec.process.spec.num_snapshots);
            if (grid.spec.num_subcarriers == 601) grid = resample_ctf(grid);
            slot.sample.features = to_feature_block(grid);
            slot.sample.fer = fer.fer;
            slot.sample.class_label = cfg.classes.classify(fer.fer);
            slot.sample.source = rec.source;
            slot.sample.region_id = rec.region_id;
            slot.sample.seed = rec.seed;
            slot.sample.cp_exceeded = sim.cp_exceeded();
        } catch (const std::domain_error& e) {
            slot.skipped = true;
            slot.error = e.what();
        }
    });

    std::size_t skipped = 0;
    for (auto& slot : slots) {
        if (slot.skipped) {
            ++skipped;
            std::cerr << "skipping region: " << slot.error << "\n";
            continue;
        }
        dataset.samples.push_back(std::move(slot.sample));
    }
    if (dataset.samples.empty()) throw DataError("all regions were skipped");

    write_labeled_dataset(dataset, out);
    std::cout << "labeled " << dataset.samples.size() << " regions (" << skipped
              << " skipped) with F=" << phy.frames_per_region << ", wrote " << out << "\n";
    return kExitOk;
}

int cmd_kmeans(const std::string& in, int k, std::uint64_t seed, const std::string& out,
               int frames) {
    const LabeledDataset dataset = read_labeled_dataset(in);
    std::vector<double> fers;
    fers.reserve(dataset.samples.size());
    for (const auto& s : dataset.samples) fers.push_back(s.fer);
    const double clamp = 1.0 / (2.0 * frames);
    const auto scheme = kmeans_boundaries(fers, k, seed, clamp);
    std::printf("class boundaries: %.6g %.6g %.6g\n", scheme.boundaries[0],
                scheme.boundaries[1], scheme.boundaries[2]);
    if (!out.empty()) {
        std::ofstream os(out);
        os << "{\n  \"classes\": [" << scheme.boundaries[0] << ", " << scheme.boundaries[1]
           << ", " << scheme.boundaries[2] << "]\n}\n";
        if (!os) throw DataError("cannot write scheme to " + out);
    }
    return kExitOk;
}

// Loads features into a row-major matrix plus labels/sources.
struct LoadedDataset {
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> x;
    std::vector<int> labels;
    std::vector<SampleSource> sources;
    std::vector<std::string> ids;
};

LoadedDataset to_matrix(const LabeledDataset& dataset) {
    LoadedDataset loaded;
    loaded.x.resize(static_cast<Eigen::Index>(dataset.samples.size()), 16400);
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
        const auto& s = dataset.samples[i];
        for (int f = 0; f < 16400; ++f)
            loaded.x(static_cast<Eigen::Index>(i), f) = s.features[static_cast<std::size_t>(f)];
        loaded.labels.push_back(s.class_label);
        loaded.sources.push_back(s.source);
        loaded.ids.push_back(s.region_id);
    }
    return loaded;
}

void write_confusion_csv(const ConfusionMatrix& cm, const std::string& path) {
    std::ofstream os(path);
    os << "true_class,pred_1,pred_2,pred_3,pred_4,per_class_accuracy\r\n";
    for (int t = 0; t < 4; ++t) {
        os << (t + 1);
        for (int p = 0; p < 4; ++p) os << "," << cm.counts[t][p];
        os << "," << cm.per_class_accuracy(t + 1) << "\r\n";
    }
    os << "overall,,,,," << cm.overall_accuracy() << "\r\n";
    if (!os) throw DataError("cannot write " + path);
}

int cmd_train(const std::string& in, const std::string& config_path,
              const std::string& model_out, std::uint64_t split_seed) {
    const RunConfig cfg = load_config_or_default(config_path);
    const LabeledDataset dataset = read_labeled_dataset(in);
    if (dataset.samples.size() < 2) throw DataError("dataset too small to split");
    auto loaded = to_matrix(dataset);

    const std::uint64_t seed = split_seed ? split_seed : dataset.master_seed;
    const auto split = split_dataset(loaded.sources, 0.3, seed);

    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> x_train(
        static_cast<Eigen::Index>(split.train.size()), 16400);
    std::vector<int> y_train;
    for (std::size_t i = 0; i < split.train.size(); ++i) {
        x_train.row(static_cast<Eigen::Index>(i)) =
            loaded.x.row(static_cast<Eigen::Index>(split.train[i]));
        y_train.push_back(loaded.labels[split.train[i]]);
    }

    Mlp model = make_default_model(cfg.train.seed);
    if (cfg.train_standardize) {
        model.standardize = true;
        model.feature_mean.resize(16400);
        model.feature_scale.resize(16400);
        for (int f = 0; f < 16400; ++f) {
            const double mean = x_train.col(f).cast<double>().mean();
            const double var =
                (x_train.col(f).cast<double>().array() - mean).square().mean();
            model.feature_mean(f) = static_cast<float>(mean);
            model.feature_scale(f) = static_cast<float>(1.0 / std::sqrt(var + 1e-12));
        }
    }

    const auto result = train(model, x_train, y_train, cfg.train);
    save_model(model, model_out);

    const std::string loss_path = model_out + ".loss.csv";
    std::ofstream os(loss_path);
    os << "epoch,loss\r\n";
    for (std::size_t e = 0; e < result.epoch_loss.size(); ++e)
        os << (e + 1) << "," << result.epoch_loss[e] << "\r\n";
    if (!os) throw DataError("cannot write " + loss_path);

    std::cout << "trained " << result.epochs_run << " epochs ("
              << (result.early_stopped ? "early stop" : "epoch limit")
              << "), final loss " << result.epoch_loss.back() << ", wrote " << model_out
              << " and " << loss_path << "\n";
    return kExitOk;
}

int cmd_merge(const std::vector<std::string>& ins, const std::string& out) {
    if (ins.size() < 2) throw ConfigError("merge needs at least two --in datasets");
    LabeledDataset merged = read_labeled_dataset(ins[0]);
    for (std::size_t i = 1; i < ins.size(); ++i) {
        LabeledDataset next = read_labeled_dataset(ins[i]);
        if (next.spec.num_subcarriers != merged.spec.num_subcarriers ||
            next.spec.num_snapshots != merged.spec.num_snapshots)
            throw DataError("datasets have incompatible grids: " + ins[i]);
        if (next.scheme.boundaries != merged.scheme.boundaries)
            throw DataError("datasets have different class schemes: " + ins[i]);
        if (next.phy_config_hash != merged.phy_config_hash)
            throw DataError("datasets were labeled under different PHY configs: " + ins[i]);
        for (auto& s : next.samples) merged.samples.push_back(std::move(s));
    }
    write_labeled_dataset(merged, out);
    std::cout << "merged " << ins.size() << " datasets (" << merged.samples.size()
              << " samples) into " << out << "\n";
    return kExitOk;
}

int cmd_eval(const std::string& model_path, const std::string& in,
             const std::string& out_prefix, std::uint64_t split_seed,
             const std::string& subset) {
    const Mlp model = load_model(model_path);
    const LabeledDataset dataset = read_labeled_dataset(in);
    auto loaded = to_matrix(dataset);

    std::vector<std::size_t> indices;
    if (subset == "all") {
        indices.resize(dataset.samples.size());
        std::iota(indices.begin(), indices.end(), 0);
    } else {
        const std::uint64_t seed = split_seed ? split_seed : dataset.master_seed;
        const auto split = split_dataset(loaded.sources, 0.3, seed);
        indices = subset == "train" ? split.train : split.test;
    }
    if (indices.empty()) throw DataError("selected subset is empty");

    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> x(
        static_cast<Eigen::Index>(indices.size()), 16400);
    std::vector<int> y;
    for (std::size_t i = 0; i < indices.size(); ++i) {
        x.row(static_cast<Eigen::Index>(i)) =
            loaded.x.row(static_cast<Eigen::Index>(indices[i]));
        y.push_back(loaded.labels[indices[i]]);
    }

    const auto cm = evaluate(model, x, y);
    write_confusion_csv(cm, out_prefix + ".confusion.csv");
    std::printf("%s accuracy: %.4f (n=%zu)\n", subset.c_str(), cm.overall_accuracy(),
                indices.size());
    for (int c = 1; c <= 4; ++c)
        std::printf("class %d accuracy: %.4f\n", c, cm.per_class_accuracy(c));
    return kExitOk;
}

int cmd_predict(const std::string& model_path, const std::string& in,
                const std::string& out) {
    const Mlp model = load_model(model_path);
    const CtfImportContainer container = read_ctf_import(in);
    if (container.records.empty()) throw DataError("import container is empty");

    std::ofstream os(out);
    os << "region_id,class,logp_1,logp_2,logp_3,logp_4\r\n";
    for (const auto& rec : container.records) {
        CtfGrid grid = rec.grid;
        if (grid.spec.num_subcarriers == 601) grid = resample_ctf(grid);
        const auto features = to_feature_block(grid);
        Mlp::Matrix x(1, 16400);
        for (int f = 0; f < 16400; ++f) x(0, f) = features[static_cast<std::size_t>(f)];
        const auto log_probs = forward<float>(model, x, false, 0);
        int best = 0;
        for (int c = 1; c < 4; ++c)
            if (log_probs(0, c) > log_probs(0, best)) best = c;
        os << rec.region_id << "," << (best + 1);
        for (int c = 0; c < 4; ++c) os << "," << log_probs(0, c);
        os << "\r\n";
    }
    if (!os) throw DataError("cannot write " + out);
    std::cout << "predicted " << container.records.size() << " regions, wrote " << out << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"FER-labeled vehicular channel dataset pipeline"};
    app.require_subcommand(1);

    std::string kind, config_path, in, out, model_path, out_prefix, subset = "test";
    std::uint64_t seed = 1, split_seed = 0;
    int count = 10, frames = 0, kmeans_frames = 20000, jobs = 1, k = 4;

    auto* generate = app.add_subcommand("generate", "generate unlabeled CTF regions");
    generate->add_option("--kind", kind, "gscm or tdl")->required();
    generate->add_option("--config", config_path, "run config JSON");
    generate->add_option("--count", count, "number of regions")->envname("FERLINK_COUNT");
    generate->add_option("--seed", seed, "master seed")->envname("FERLINK_SEED");
    generate->add_option("--out", out, "output container directory")->required();

    auto* label = app.add_subcommand("label", "attach FER labels via the PHY oracle");
    label->add_option("--in", in, "region container")->required();
    label->add_option("--config", config_path, "run config JSON");
    label->add_option("--frames", frames, "override frames per region (F)")
        ->envname("FERLINK_FRAMES");
    label->add_option("--jobs", jobs, "worker threads")->envname("FERLINK_JOBS");
    label->add_option("--out", out, "output dataset directory")->required();

    auto* kmeans = app.add_subcommand("kmeans-classes", "derive class boundaries by k-means");
    kmeans->add_option("--in", in, "labeled dataset")->required();
    kmeans->add_option("--k", k, "number of classes");
    kmeans->add_option("--seed", seed, "seed")->envname("FERLINK_SEED");
    kmeans->add_option("--frames", kmeans_frames, "F used for the zero-FER clamp 1/(2F)");
    kmeans->add_option("--out", out, "write the scheme as JSON");

    std::vector<std::string> merge_ins;
    auto* merge_cmd = app.add_subcommand("merge", "concatenate labeled datasets");
    merge_cmd->add_option("--in", merge_ins, "labeled dataset (repeatable)")->required();
    merge_cmd->add_option("--out", out, "output dataset directory")->required();

    auto* train_cmd = app.add_subcommand("train", "train the classifier");
    train_cmd->add_option("--in", in, "labeled dataset")->required();
    train_cmd->add_option("--config", config_path, "run config JSON");
    train_cmd->add_option("--out", out, "model checkpoint path")->required();
    train_cmd->add_option("--split-seed", split_seed,
                          "split seed (0: dataset master seed)");

    auto* eval_cmd = app.add_subcommand("eval", "evaluate a model");
    eval_cmd->add_option("--model", model_path, "model checkpoint")->required();
    eval_cmd->add_option("--in", in, "labeled dataset")->required();
    eval_cmd->add_option("--out-prefix", out_prefix, "output file prefix")->required();
    eval_cmd->add_option("--split-seed", split_seed, "split seed (0: dataset master seed)");
    eval_cmd->add_option("--subset", subset, "test, train or all");

    auto* predict = app.add_subcommand("predict", "predict classes for imported CTFs");
    predict->add_option("--model", model_path, "model checkpoint")->required();
    predict->add_option("--in", in, "CTF import container")->required();
    predict->add_option("--out", out, "predictions CSV")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (generate->parsed()) return cmd_generate(kind, config_path, count, seed, out);
        if (label->parsed()) return cmd_label(in, config_path, out, frames, jobs);
        if (kmeans->parsed()) return cmd_kmeans(in, k, seed, out, kmeans_frames);
        if (merge_cmd->parsed()) return cmd_merge(merge_ins, out);
        if (train_cmd->parsed()) return cmd_train(in, config_path, out, split_seed);
        if (eval_cmd->parsed()) return cmd_eval(model_path, in, out_prefix, split_seed, subset);
        if (predict->parsed()) return cmd_predict(model_path, in, out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::domain_error& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitOk;
}
