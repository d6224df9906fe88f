#include "ferlink/config.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <stdexcept>

#include "ferlink/container.hpp"

namespace ferlink {

using nlohmann::json;

namespace {

// Reads known keys from a section and rejects everything else.
class Section {
  public:
    Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
        if (!j_.is_object()) throw std::runtime_error("config section " + name_ + " must be an object");
    }
    ~Section() = default;

    template <typename T>
    void get(const char* key, T& target) {
        seen_.insert(key);
        if (j_.contains(key)) target = j_.at(key).get<T>();
    }

    void known(const char* key) { seen_.insert(key); }

    void finish() const {
        for (const auto& [key, value] : j_.items())
            if (!seen_.contains(key))
                throw std::runtime_error("unknown key \"" + key + "\" in config section " + name_);
    }

  private:
    const json& j_;
    std::string name_;
    std::set<std::string> seen_;
};

void parse_grid(const json& j, GridSpec& g) {
    Section s(j, "grid");
    s.get("carrier_frequency", g.carrier_frequency);
    s.get("subcarrier_spacing", g.subcarrier_spacing);
    s.get("num_subcarriers", g.num_subcarriers);
    s.get("snapshot_period", g.snapshot_period);
    s.get("num_snapshots", g.num_snapshots);
    s.get("stationarity_time", g.stationarity_time);
    s.finish();
    g.validate();
}

void parse_scenario(const json& j, CanyonScenario& c) {
    Section s(j, "scenario");
    s.get("canyon_length", c.canyon_length);
    s.get("canyon_width", c.canyon_width);
    if (j.contains("tx_trajectory")) {
        c.tx_trajectory.clear();
        for (const auto& pt : j.at("tx_trajectory"))
            c.tx_trajectory.push_back({pt.at(0).get<double>(), pt.at(1).get<double>()});
    }
    s.known("tx_trajectory");
    s.get("tx_speed", c.tx_speed);
    if (j.contains("rx_positions")) {
        c.rx_positions.clear();
        for (const auto& pt : j.at("rx_positions"))
            c.rx_positions.push_back({pt.at(0).get<double>(), pt.at(1).get<double>()});
    }
    s.known("rx_positions");
    s.get("rx_spacing", c.rx_spacing);
    s.get("num_rx", c.num_rx);
    s.get("diffuse_density", c.diffuse_density);
    s.get("num_static_discrete", c.num_static_discrete);
    s.get("num_mobile_discrete", c.num_mobile_discrete);
    s.get("mobile_speed_min", c.mobile_speed_min);
    s.get("mobile_speed_max", c.mobile_speed_max);
    s.get("los_blockage_probability", c.los_blockage_probability);
    s.get("diffuse_gain_db_min", c.diffuse_gain_db_min);
    s.get("diffuse_gain_db_max", c.diffuse_gain_db_max);
    s.get("discrete_gain_db_min", c.discrete_gain_db_min);
    s.get("discrete_gain_db_max", c.discrete_gain_db_max);
    s.finish();
    c.validate();
}

void parse_tdl(const json& j, TdlRanges& t) {
    Section s(j, "tdl");
    s.get("snr_db_min", t.snr_db_min);
    s.get("snr_db_max", t.snr_db_max);
    s.get("rician_k_db_min", t.rician_k_db_min);
    s.get("rician_k_db_max", t.rician_k_db_max);
    s.get("los_probability", t.los_probability);
    s.get("max_doppler_min", t.max_doppler_min);
    s.get("max_doppler_max", t.max_doppler_max);
    s.get("pdp_decay_min", t.pdp_decay_min);
    s.get("pdp_decay_max", t.pdp_decay_max);
    s.get("tap_spacing", t.tap_spacing);
    s.get("num_taps", t.num_taps);
    s.get("paths_per_tap", t.paths_per_tap);
    s.finish();
    t.validate();
}

void parse_phy(const json& j, PhyConfig& p) {
    Section s(j, "phy");
    s.get("frame_payload_bytes", p.frame_payload_bytes);
    s.get("frames_per_region", p.frames_per_region);
    s.get("frame_rate", p.frame_rate);
    s.get("tx_power_dbm", p.tx_power_dbm);
    s.get("noise_floor_dbm", p.noise_floor_dbm);
    s.get("noise_enabled", p.noise_enabled);
    s.finish();
    p.validate();
}

void parse_train(const json& j, TrainConfig& t, bool& standardize) {
    Section s(j, "train");
    s.get("learning_rate", t.learning_rate);
    s.get("beta1", t.beta1);
    s.get("beta2", t.beta2);
    s.get("epsilon", t.epsilon);
    s.get("epochs", t.epochs);
    s.get("batch_size", t.batch_size);
    s.get("seed", t.seed);
    s.get("early_stop_delta", t.early_stop_delta);
    s.get("early_stop_patience", t.early_stop_patience);
    s.get("standardize", standardize);
    s.finish();
    if (!(t.learning_rate > 0.0)) throw std::runtime_error("learning_rate must be > 0");
    if (t.epochs < 1) throw std::runtime_error("epochs must be >= 1");
}

json canonical_json(const RunConfig& cfg) {
    json j;
    j["master_seed"] = cfg.master_seed;
    j["gscm_regions_per_run"] = cfg.gscm_regions_per_run;
    j["grid"] = {{"carrier_frequency", cfg.grid.carrier_frequency},
                 {"subcarrier_spacing", cfg.grid.subcarrier_spacing},
                 {"num_subcarriers", cfg.grid.num_subcarriers},
                 {"snapshot_period", cfg.grid.snapshot_period},
                 {"num_snapshots", cfg.grid.num_snapshots},
                 {"stationarity_time", cfg.grid.stationarity_time}};
    json traj = json::array();
    for (const auto& p : cfg.scenario.tx_trajectory) traj.push_back({p.x, p.y});
    json rx = json::array();
    for (const auto& p : cfg.scenario.rx_positions) rx.push_back({p.x, p.y});
    j["scenario"] = {{"canyon_length", cfg.scenario.canyon_length},
                     {"canyon_width", cfg.scenario.canyon_width},
                     {"tx_trajectory", traj},
                     {"tx_speed", cfg.scenario.tx_speed},
                     {"rx_positions", rx},
                     {"rx_spacing", cfg.scenario.rx_spacing},
                     {"num_rx", cfg.scenario.num_rx},
                     {"diffuse_density", cfg.scenario.diffuse_density},
                     {"num_static_discrete", cfg.scenario.num_static_discrete},
                     {"num_mobile_discrete", cfg.scenario.num_mobile_discrete},
                     {"mobile_speed_min", cfg.scenario.mobile_speed_min},
                     {"mobile_speed_max", cfg.scenario.mobile_speed_max},
                     {"los_blockage_probability", cfg.scenario.los_blockage_probability},
                     {"diffuse_gain_db_min", cfg.scenario.diffuse_gain_db_min},
                     {"diffuse_gain_db_max", cfg.scenario.diffuse_gain_db_max},
                     {"discrete_gain_db_min", cfg.scenario.discrete_gain_db_min},
                     {"discrete_gain_db_max", cfg.scenario.discrete_gain_db_max}};
    j["tdl"] = {{"snr_db_min", cfg.tdl.snr_db_min},
                {"snr_db_max", cfg.tdl.snr_db_max},
                {"rician_k_db_min", cfg.tdl.rician_k_db_min},
                {"rician_k_db_max", cfg.tdl.rician_k_db_max},
                {"los_probability", cfg.tdl.los_probability},
                {"max_doppler_min", cfg.tdl.max_doppler_min},
                {"max_doppler_max", cfg.tdl.max_doppler_max},
                {"pdp_decay_min", cfg.tdl.pdp_decay_min},
                {"pdp_decay_max", cfg.tdl.pdp_decay_max},
                {"tap_spacing", cfg.tdl.tap_spacing},
                {"num_taps", cfg.tdl.num_taps},
                {"paths_per_tap", cfg.tdl.paths_per_tap},
                {"unit_gain_snr_db", cfg.tdl.unit_gain_snr_db}};
    j["phy"] = {{"frame_payload_bytes", cfg.phy.frame_payload_bytes},
                {"frames_per_region", cfg.phy.frames_per_region},
                {"frame_rate", cfg.phy.frame_rate},
                {"tx_power_dbm", cfg.phy.tx_power_dbm},
                {"noise_floor_dbm", cfg.phy.noise_floor_dbm},
                {"noise_enabled", cfg.phy.noise_enabled}};
    j["train"] = {{"learning_rate", cfg.train.learning_rate},
                  {"beta1", cfg.train.beta1},
                  {"beta2", cfg.train.beta2},
                  {"epsilon", cfg.train.epsilon},
                  {"epochs", cfg.train.epochs},
                  {"batch_size", cfg.train.batch_size},
                  {"seed", cfg.train.seed},
                  {"early_stop_delta", cfg.train.early_stop_delta},
                  {"early_stop_patience", cfg.train.early_stop_patience},
                  {"standardize", cfg.train_standardize}};
    j["classes"] = {cfg.classes.boundaries[0], cfg.classes.boundaries[1],
                    cfg.classes.boundaries[2]};
    return j;
}

}  // namespace

std::string RunConfig::config_hash() const { return hash_hex(canonical_text); }

std::string RunConfig::phy_config_hash() const {
    return hash_hex(canonical_json(*this).at("phy").dump() + "|" +
                    json(canonical_json(*this).at("classes")).dump());
}

RunConfig default_run_config() {
    RunConfig cfg;
    cfg.tdl.unit_gain_snr_db = cfg.phy.unit_gain_snr_db();
    cfg.canonical_text = canonical_json(cfg).dump();
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config file: " + path.string());
    json j;
    try {
        j = json::parse(is);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("config parse error in " + path.string() + ": " + e.what());
    }

    RunConfig cfg;
    Section top(j, "(top level)");
    top.get("master_seed", cfg.master_seed);
    top.get("gscm_regions_per_run", cfg.gscm_regions_per_run);
    for (const char* key : {"grid", "scenario", "tdl", "phy", "train", "classes"})
        top.known(key);
    top.finish();

    if (j.contains("grid")) parse_grid(j.at("grid"), cfg.grid);
    if (j.contains("scenario")) parse_scenario(j.at("scenario"), cfg.scenario);
    if (j.contains("tdl")) parse_tdl(j.at("tdl"), cfg.tdl);
    if (j.contains("phy")) parse_phy(j.at("phy"), cfg.phy);
    if (j.contains("train")) parse_train(j.at("train"), cfg.train, cfg.train_standardize);
    if (j.contains("classes")) {
        const auto& c = j.at("classes");
        if (!c.is_array() || c.size() != 3)
            throw std::runtime_error("classes must be an array of 3 boundaries");
        for (int i = 0; i < 3; ++i) cfg.classes.boundaries[i] = c.at(i).get<double>();
        cfg.classes.validate();
    }
    if (cfg.gscm_regions_per_run < 1)
        throw std::runtime_error("gscm_regions_per_run must be >= 1");

    // TDL power draws track the configured PHY link budget.
    cfg.tdl.unit_gain_snr_db = cfg.phy.unit_gain_snr_db();
    cfg.canonical_text = canonical_json(cfg).dump();
    return cfg;
}

}  // namespace ferlink
