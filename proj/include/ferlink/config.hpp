#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "ferlink/channel.hpp"
#include "ferlink/dataset.hpp"
#include "ferlink/gscm.hpp"
#include "ferlink/mlp.hpp"
#include "ferlink/phy.hpp"
#include "ferlink/tdl.hpp"

namespace ferlink {

// Top-level run configuration, read from a JSON file with sections
// "grid", "scenario", "tdl", "phy", "train", "classes" plus "master_seed".
// Unknown keys anywhere are rejected.
struct RunConfig {
    GridSpec grid;
    CanyonScenario scenario;
    TdlRanges tdl;
    PhyConfig phy;
    TrainConfig train;
    FerClassScheme classes;
    bool train_standardize = false;
    int gscm_regions_per_run = 10;
    std::uint64_t master_seed = 1;
    std::string canonical_text;  // normalized dump, input to the config hash

    std::string config_hash() const;
    std::string phy_config_hash() const;
};

RunConfig load_run_config(const std::filesystem::path& path);
RunConfig default_run_config();

}  // namespace ferlink
