#include "ferlink/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ferlink/rng.hpp"

namespace ferlink {

void FerClassScheme::validate() const {
    if (!(boundaries[0] > 0.0 && boundaries[0] < boundaries[1] &&
          boundaries[1] < boundaries[2] && boundaries[2] < 1.0))
        throw std::invalid_argument("class boundaries must be strictly ascending in (0,1)");
}

int FerClassScheme::classify(double fer) const {
    if (!(fer >= 0.0 && fer <= 1.0)) throw std::invalid_argument("fer must be in [0,1]");
    if (fer <= boundaries[0]) return 1;
    if (fer <= boundaries[1]) return 2;
    if (fer <= boundaries[2]) return 3;
    return 4;
}

int classify_fer(double fer, const FerClassScheme& scheme) { return scheme.classify(fer); }

CtfGrid resample_ctf(const CtfGrid& grid) {
    if (grid.spec.num_subcarriers != 601)
        throw std::invalid_argument("resample_ctf expects a 601-bin grid");

    CtfGrid out;
    out.spec = grid.spec;
    out.spec.num_subcarriers = 41;
    out.num_rows = grid.num_rows;
    out.values.resize(static_cast<std::size_t>(out.num_rows) * 41);
    const int center = 300;  // column of k = 0 in the 601-bin grid
    for (int m = 0; m < grid.num_rows; ++m)
        for (int i = 0; i < 41; ++i)
            out.at(m, i) = grid.at(m, center - 20 + i);
    return out;
}

std::vector<float> to_feature_block(const CtfGrid& grid) {
    if (grid.num_rows != 200 || grid.spec.num_subcarriers != 41)
        throw std::invalid_argument("to_feature_block expects a 200 x 41 grid");
    const std::size_t plane = 200 * 41;
    std::vector<float> features(2 * plane);
    for (std::size_t i = 0; i < plane; ++i) {
        features[i] = static_cast<float>(grid.values[i].real());
        features[plane + i] = static_cast<float>(grid.values[i].imag());
    }
    return features;
}

namespace {

// One Lloyd run from given initial centers; returns inertia.
double lloyd_1d(const std::vector<double>& x, std::vector<double>& centers) {
    const int k = static_cast<int>(centers.size());
    std::vector<int> assign(x.size());
    for (int iter = 0; iter < 300; ++iter) {
        bool changed = iter == 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            int best = 0;
            double bd = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double d = std::abs(x[i] - centers[c]);
                if (d < bd) {
                    bd = d;
                    best = c;
                }
            }
            if (assign[i] != best || iter == 0) {
                assign[i] = best;
                changed = true;
            }
        }
        if (!changed) break;
        std::vector<double> sum(k, 0.0);
        std::vector<int> cnt(k, 0);
        for (std::size_t i = 0; i < x.size(); ++i) {
            sum[assign[i]] += x[i];
            ++cnt[assign[i]];
        }
        for (int c = 0; c < k; ++c)
            if (cnt[c] > 0) centers[c] = sum[c] / cnt[c];
    }
    double inertia = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - centers[assign[i]];
        inertia += d * d;
    }
    return inertia;
}

}  // namespace

FerClassScheme kmeans_boundaries(std::span<const double> fers, int k, std::uint64_t seed,
                                 double zero_clamp, int restarts) {
    if (k != 4) throw std::invalid_argument("the class scheme has exactly 4 classes");

    std::vector<double> x;
    x.reserve(fers.size());
    for (const double f : fers) {
        if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument("fer must be in [0,1]");
        x.push_back(std::log10(std::max(f, zero_clamp)));
    }
    std::vector<double> distinct(x);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (static_cast<int>(distinct.size()) < k)
        throw std::invalid_argument("need at least k distinct FER values");

    std::vector<double> best_centers;
    double best_inertia = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(r)));
        // k-means++ seeding
        std::vector<double> centers;
        centers.push_back(x[rng.uniform_int(x.size())]);
        std::vector<double> d2(x.size());
        while (static_cast<int>(centers.size()) < k) {
            double total = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                double bd = std::numeric_limits<double>::infinity();
                for (const double c : centers) bd = std::min(bd, (x[i] - c) * (x[i] - c));
                d2[i] = bd;
                total += bd;
            }
            double target = rng.uniform() * total;
            std::size_t pick = 0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                target -= d2[i];
                if (target <= 0.0) {
                    pick = i;
                    break;
                }
            }
            centers.push_back(x[pick]);
        }
        const double inertia = lloyd_1d(x, centers);
        if (inertia < best_inertia) {
            best_inertia = inertia;
            best_centers = centers;
        }
    }

    std::sort(best_centers.begin(), best_centers.end());
    FerClassScheme scheme;
    for (int i = 0; i < 3; ++i)
        scheme.boundaries[i] = std::pow(10.0, 0.5 * (best_centers[i] + best_centers[i + 1]));
    scheme.validate();
    return scheme;
}

DatasetSplit split_dataset(std::span<const SampleSource> sources, double fraction,
                           std::uint64_t seed) {
    if (sources.size() < 2) throw std::invalid_argument("need at least 2 samples");
    if (fraction < 0.0 || fraction > 1.0)
        throw std::invalid_argument("fraction must be in [0,1]");

    // Group indices per source, shuffle each group with its own stream.
    std::vector<std::vector<std::size_t>> groups(3);
    for (std::size_t i = 0; i < sources.size(); ++i)
        groups[static_cast<int>(sources[i])].push_back(i);
    for (int g = 0; g < 3; ++g) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(g)));
        auto& idx = groups[g];
        for (std::size_t i = idx.size(); i > 1; --i)
            std::swap(idx[i - 1], idx[rng.uniform_int(i)]);
    }

    // Largest-remainder allocation so the total test count is
    // round(fraction * n) while every source stays within one sample of
    // its proportional share.
    const std::size_t total_test =
        static_cast<std::size_t>(std::llround(fraction * static_cast<double>(sources.size())));
    std::array<std::size_t, 3> take{};
    std::array<double, 3> remainder{};
    std::size_t assigned = 0;
    for (int g = 0; g < 3; ++g) {
        const double exact = fraction * static_cast<double>(groups[g].size());
        take[g] = static_cast<std::size_t>(std::floor(exact));
        remainder[g] = exact - static_cast<double>(take[g]);
        assigned += take[g];
    }
    while (assigned < total_test) {
        int best = -1;
        for (int g = 0; g < 3; ++g) {
            if (take[g] >= groups[g].size()) continue;
            if (best < 0 || remainder[g] > remainder[best]) best = g;
        }
        if (best < 0) break;
        ++take[best];
        remainder[best] = -1.0;
        ++assigned;
    }

    DatasetSplit split;
    for (int g = 0; g < 3; ++g) {
        const auto& idx = groups[g];
        split.test.insert(split.test.end(), idx.begin(), idx.begin() + take[g]);
        split.train.insert(split.train.end(), idx.begin() + take[g], idx.end());
    }
    std::sort(split.test.begin(), split.test.end());
    std::sort(split.train.begin(), split.train.end());
    return split;
}

}  // namespace ferlink
