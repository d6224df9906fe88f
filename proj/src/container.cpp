#include "ferlink/container.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <stdexcept>

namespace ferlink {

using nlohmann::json;

namespace {

constexpr char kRegionMagic[4] = {'F', 'E', 'R', 'R'};
constexpr char kFeatureMagic[4] = {'F', 'E', 'R', 'D'};
constexpr char kCtfMagic[4] = {'F', 'E', 'R', 'C'};

template <typename T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw std::runtime_error("truncated blob");
    return v;
}

json grid_to_json(const GridSpec& spec) {
    return json{{"carrier_frequency", spec.carrier_frequency},
                {"subcarrier_spacing", spec.subcarrier_spacing},
                {"num_subcarriers", spec.num_subcarriers},
                {"snapshot_period", spec.snapshot_period},
                {"num_snapshots", spec.num_snapshots},
                {"stationarity_time", spec.stationarity_time}};
}

GridSpec grid_from_json(const json& j) {
    GridSpec spec;
    spec.carrier_frequency = j.at("carrier_frequency").get<double>();
    spec.subcarrier_spacing = j.at("subcarrier_spacing").get<double>();
    spec.num_subcarriers = j.at("num_subcarriers").get<int>();
    spec.snapshot_period = j.at("snapshot_period").get<double>();
    spec.num_snapshots = j.at("num_snapshots").get<int>();
    spec.stationarity_time = j.at("stationarity_time").get<double>();
    return spec;
}

std::string blob_name(std::size_t index, const char* ext) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%06zu.%s", index, ext);
    return buf;
}

void write_manifest(const json& manifest, const std::filesystem::path& dir) {
    std::ofstream os(dir / "manifest.json");
    if (!os) throw std::runtime_error("cannot write manifest in " + dir.string());
    os << manifest.dump(2) << "\n";
    if (!os) throw std::runtime_error("failed writing manifest in " + dir.string());
}

json read_manifest(const std::filesystem::path& dir, const char* expected_kind) {
    std::ifstream is(dir / "manifest.json");
    if (!is) throw std::runtime_error("cannot open manifest in " + dir.string());
    json manifest = json::parse(is);
    if (manifest.at("kind").get<std::string>() != expected_kind)
        throw std::runtime_error("container " + dir.string() + " is not of kind " +
                                 expected_kind);
    return manifest;
}

}  // namespace

std::string hash_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string source_name(SampleSource source) {
    switch (source) {
        case SampleSource::Gscm: return "gscm";
        case SampleSource::Tdl: return "tdl";
        case SampleSource::Measured: return "measured";
    }
    throw std::logic_error("unknown source");
}

SampleSource source_from_name(const std::string& name) {
    if (name == "gscm") return SampleSource::Gscm;
    if (name == "tdl") return SampleSource::Tdl;
    if (name == "measured") return SampleSource::Measured;
    throw std::invalid_argument("unknown sample source: " + name);
}

// --------------------------------------------------------------------------

void write_region_container(const RegionContainer& container,
                            const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir / "blobs");
    json samples = json::array();
    for (std::size_t i = 0; i < container.regions.size(); ++i) {
        const auto& rec = container.regions[i];
        const std::string name = blob_name(i, "ferr");
        std::ofstream os(dir / "blobs" / name, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write blob " + name);
        os.write(kRegionMagic, 4);
        write_pod(os, std::uint8_t{1});
        write_pod(os, static_cast<std::uint8_t>(rec.process.delay_drift ? 1 : 0));
        write_pod(os, static_cast<std::uint32_t>(rec.process.paths.size()));
        for (const auto& p : rec.process.paths) {
            write_pod(os, p.amplitude);
            write_pod(os, p.phase);
            write_pod(os, p.delay_at_origin);
            write_pod(os, p.relative_velocity);
            write_pod(os, static_cast<std::uint8_t>(p.kind));
        }
        if (!os) throw std::runtime_error("failed writing blob " + name);
        samples.push_back(json{{"region_id", rec.region_id},
                               {"source", source_name(rec.source)},
                               {"seed", rec.seed},
                               {"blob", "blobs/" + name}});
    }
    write_manifest(json{{"format_version", 1},
                        {"kind", "regions"},
                        {"grid_spec", grid_to_json(container.spec)},
                        {"master_seed", container.master_seed},
                        {"config_hash", container.config_hash},
                        {"samples", samples}},
                   dir);
}

RegionContainer read_region_container(const std::filesystem::path& dir) {
    const json manifest = read_manifest(dir, "regions");
    RegionContainer container;
    container.spec = grid_from_json(manifest.at("grid_spec"));
    container.master_seed = manifest.at("master_seed").get<std::uint64_t>();
    container.config_hash = manifest.at("config_hash").get<std::string>();
    for (const auto& entry : manifest.at("samples")) {
        RegionRecord rec;
        rec.region_id = entry.at("region_id").get<std::string>();
        rec.source = source_from_name(entry.at("source").get<std::string>());
        rec.seed = entry.at("seed").get<std::uint64_t>();
        std::ifstream is(dir / entry.at("blob").get<std::string>(), std::ios::binary);
        if (!is) throw std::runtime_error("missing blob for region " + rec.region_id);
        char magic[4];
        is.read(magic, 4);
        if (!is || std::memcmp(magic, kRegionMagic, 4) != 0)
            throw std::runtime_error("bad region blob magic for " + rec.region_id);
        if (read_pod<std::uint8_t>(is) != 1)
            throw std::runtime_error("unsupported region blob version");
        rec.process.delay_drift = read_pod<std::uint8_t>(is) != 0;
        rec.process.spec = container.spec;
        const auto n = read_pod<std::uint32_t>(is);
        rec.process.paths.resize(n);
        for (auto& p : rec.process.paths) {
            p.amplitude = read_pod<double>(is);
            p.phase = read_pod<double>(is);
            p.delay_at_origin = read_pod<double>(is);
            p.relative_velocity = read_pod<double>(is);
            p.kind = static_cast<PathKind>(read_pod<std::uint8_t>(is));
        }
        container.regions.push_back(std::move(rec));
    }
    return container;
}

// --------------------------------------------------------------------------

void write_labeled_dataset(const LabeledDataset& dataset, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir / "blobs");
    json samples = json::array();
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
        const auto& s = dataset.samples[i];
        if (s.features.size() != 16400)
            throw std::runtime_error("feature block must have 16400 entries");
        const std::string name = blob_name(i, "ferd");
        std::ofstream os(dir / "blobs" / name, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write blob " + name);
        os.write(kFeatureMagic, 4);
        write_pod(os, std::uint8_t{1});
        os.write(reinterpret_cast<const char*>(s.features.data()),
                 static_cast<std::streamsize>(s.features.size() * sizeof(float)));
        if (!os) throw std::runtime_error("failed writing blob " + name);
        samples.push_back(json{{"region_id", s.region_id},
                               {"source", source_name(s.source)},
                               {"seed", s.seed},
                               {"fer", s.fer},
                               {"class", s.class_label},
                               {"cp_exceeded", s.cp_exceeded},
                               {"blob", "blobs/" + name}});
    }
    write_manifest(
        json{{"format_version", 1},
             {"kind", "labeled"},
             {"grid_spec", grid_to_json(dataset.spec)},
             {"master_seed", dataset.master_seed},
             {"config_hash", dataset.config_hash},
             {"phy_config_hash", dataset.phy_config_hash},
             {"class_scheme", {dataset.scheme.boundaries[0], dataset.scheme.boundaries[1],
                               dataset.scheme.boundaries[2]}},
             {"samples", samples}},
        dir);
}

LabeledDataset read_labeled_dataset(const std::filesystem::path& dir) {
    const json manifest = read_manifest(dir, "labeled");
    LabeledDataset dataset;
    dataset.spec = grid_from_json(manifest.at("grid_spec"));
    dataset.master_seed = manifest.at("master_seed").get<std::uint64_t>();
    dataset.config_hash = manifest.at("config_hash").get<std::string>();
    dataset.phy_config_hash = manifest.at("phy_config_hash").get<std::string>();
    const auto& scheme = manifest.at("class_scheme");
    for (int i = 0; i < 3; ++i) dataset.scheme.boundaries[i] = scheme.at(i).get<double>();
    for (const auto& entry : manifest.at("samples")) {
        LabeledSample s;
        s.region_id = entry.at("region_id").get<std::string>();
        s.source = source_from_name(entry.at("source").get<std::string>());
        s.seed = entry.at("seed").get<std::uint64_t>();
        s.fer = entry.at("fer").get<double>();
        s.class_label = entry.at("class").get<int>();
        s.cp_exceeded = entry.at("cp_exceeded").get<bool>();
        std::ifstream is(dir / entry.at("blob").get<std::string>(), std::ios::binary);
        if (!is) throw std::runtime_error("missing blob for sample " + s.region_id);
        char magic[4];
        is.read(magic, 4);
        if (!is || std::memcmp(magic, kFeatureMagic, 4) != 0)
            throw std::runtime_error("bad feature blob magic for " + s.region_id);
        if (read_pod<std::uint8_t>(is) != 1)
            throw std::runtime_error("unsupported feature blob version");
        s.features.resize(16400);
        is.read(reinterpret_cast<char*>(s.features.data()),
                static_cast<std::streamsize>(s.features.size() * sizeof(float)));
        if (!is) throw std::runtime_error("truncated feature blob for " + s.region_id);
        for (const float v : s.features)
            if (!std::isfinite(v))
                throw std::runtime_error("non-finite feature value in " + s.region_id);
        dataset.samples.push_back(std::move(s));
    }
    return dataset;
}

// --------------------------------------------------------------------------

void write_ctf_import(const CtfImportContainer& container, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir / "blobs");
    json samples = json::array();
    for (std::size_t i = 0; i < container.records.size(); ++i) {
        const auto& rec = container.records[i];
        const std::string name = blob_name(i, "ferc");
        std::ofstream os(dir / "blobs" / name, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write blob " + name);
        os.write(kCtfMagic, 4);
        write_pod(os, std::uint8_t{1});
        write_pod(os, static_cast<std::uint32_t>(rec.grid.num_rows));
        write_pod(os, static_cast<std::uint32_t>(rec.grid.spec.num_subcarriers));
        for (const auto& v : rec.grid.values) {
            write_pod(os, static_cast<float>(v.real()));
            write_pod(os, static_cast<float>(v.imag()));
        }
        if (!os) throw std::runtime_error("failed writing blob " + name);
        samples.push_back(json{{"region_id", rec.region_id}, {"blob", "blobs/" + name}});
    }
    write_manifest(json{{"format_version", 1},
                        {"kind", "ctf_import"},
                        {"grid_spec", grid_to_json(container.spec)},
                        {"samples", samples}},
                   dir);
}

CtfImportContainer read_ctf_import(const std::filesystem::path& dir) {
    const json manifest = read_manifest(dir, "ctf_import");
    CtfImportContainer container;
    container.spec = grid_from_json(manifest.at("grid_spec"));
    for (const auto& entry : manifest.at("samples")) {
        CtfImportRecord rec;
        rec.region_id = entry.at("region_id").get<std::string>();
        std::ifstream is(dir / entry.at("blob").get<std::string>(), std::ios::binary);
        if (!is) throw std::runtime_error("missing blob for region " + rec.region_id);
        char magic[4];
        is.read(magic, 4);
        if (!is || std::memcmp(magic, kCtfMagic, 4) != 0)
            throw std::runtime_error("bad CTF blob magic for " + rec.region_id);
        if (read_pod<std::uint8_t>(is) != 1) throw std::runtime_error("unsupported CTF blob");
        const auto rows = read_pod<std::uint32_t>(is);
        const auto cols = read_pod<std::uint32_t>(is);
        rec.grid.spec = container.spec;
        rec.grid.spec.num_subcarriers = static_cast<int>(cols);
        rec.grid.num_rows = static_cast<int>(rows);
        rec.grid.values.resize(static_cast<std::size_t>(rows) * cols);
        for (auto& v : rec.grid.values) {
            const float re = read_pod<float>(is);
            const float im = read_pod<float>(is);
            v = cplx(re, im);
        }
        container.records.push_back(std::move(rec));
    }
    return container;
}

}  // namespace ferlink
