#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ferlink/channel.hpp"

namespace ferlink {

// Four FER classes as half-open intervals (b0, b1], (b1, b2], (b2, b3],
// (b3, 1] with b0 = 0.
struct FerClassScheme {
    std::array<double, 3> boundaries = {5e-4, 1e-1, 5e-1};

    void validate() const;
    // fer = 0 maps to class 1 (zero failures: best observable case).
    int classify(double fer) const;
};

enum class SampleSource : std::uint8_t { Gscm = 0, Tdl = 1, Measured = 2 };

struct LabeledSample {
    std::vector<float> features;  // 2 x 200 x 41, plane-major
    double fer = 0.0;
    int class_label = 1;
    SampleSource source = SampleSource::Gscm;
    std::string region_id;
    std::uint64_t seed = 0;
    bool cp_exceeded = false;
};

struct DatasetSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// Select the 41 center bins (k in [-20, 20], a 10 MHz span at 250 kHz
// spacing) out of a 601-bin grid. No interpolation.
CtfGrid resample_ctf(const CtfGrid& grid);

// Split into a real and an imaginary plane. Flattening order is
// plane-major, then time, then frequency: length 2*200*41 = 16400.
std::vector<float> to_feature_block(const CtfGrid& grid);

int classify_fer(double fer, const FerClassScheme& scheme);

// 1-D k-means (Lloyd's, k-means++ init, 50 restarts) on
// log10(max(fer, zero_clamp)); boundaries are midpoints between sorted
// adjacent cluster means mapped back from the log domain.
FerClassScheme kmeans_boundaries(std::span<const double> fers, int k, std::uint64_t seed,
                                 double zero_clamp = 2.5e-5, int restarts = 50);

// Seeded shuffle stratified by source; `fraction` of each source goes to
// the test set (largest-remainder rounding so |test| = round(fraction*n)).
DatasetSplit split_dataset(std::span<const SampleSource> sources, double fraction,
                           std::uint64_t seed);

}  // namespace ferlink
