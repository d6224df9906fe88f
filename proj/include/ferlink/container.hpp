#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ferlink/channel.hpp"
#include "ferlink/dataset.hpp"

namespace ferlink {

// FNV-1a over a canonical string; used for config provenance hashes.
std::string hash_hex(const std::string& text);

std::string source_name(SampleSource source);
SampleSource source_from_name(const std::string& name);

// --------------------------------------------------------------------------
// Unlabeled stationarity regions (path parameter sets).

struct RegionRecord {
    StationaryProcess process;
    SampleSource source = SampleSource::Gscm;
    std::string region_id;
    std::uint64_t seed = 0;
};

struct RegionContainer {
    GridSpec spec;
    std::uint64_t master_seed = 0;
    std::string config_hash;
    std::vector<RegionRecord> regions;
};

void write_region_container(const RegionContainer& container,
                            const std::filesystem::path& dir);
RegionContainer read_region_container(const std::filesystem::path& dir);

// --------------------------------------------------------------------------
// Labeled feature datasets ("FERD" blobs).

struct LabeledDataset {
    GridSpec spec;
    std::uint64_t master_seed = 0;
    std::string config_hash;
    std::string phy_config_hash;
    FerClassScheme scheme;
    std::vector<LabeledSample> samples;
};

void write_labeled_dataset(const LabeledDataset& dataset, const std::filesystem::path& dir);
LabeledDataset read_labeled_dataset(const std::filesystem::path& dir);

// --------------------------------------------------------------------------
// Measured-CTF import ("FERC" blobs): complex rows x cols grids, resampled
// by the dataset pipeline when they arrive at 601 bins.

struct CtfImportRecord {
    CtfGrid grid;
    std::string region_id;
};

struct CtfImportContainer {
    GridSpec spec;
    std::vector<CtfImportRecord> records;
};

void write_ctf_import(const CtfImportContainer& container, const std::filesystem::path& dir);
CtfImportContainer read_ctf_import(const std::filesystem::path& dir);

}  // namespace ferlink
