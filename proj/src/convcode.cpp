#include "ferlink/convcode.hpp"

#include <bit>
#include <limits>
#include <stdexcept>

namespace ferlink {

namespace {

// Tap masks with the newest bit at position 0: 0x6D <-> 133 octal,
// 0x4F <-> 171 octal.
constexpr std::uint32_t kPolyA = 0x6D;
constexpr std::uint32_t kPolyB = 0x4F;
constexpr int kNumStates = 64;

inline std::uint8_t parity(std::uint32_t x) {
    return static_cast<std::uint8_t>(std::popcount(x) & 1);
}

}  // namespace

std::vector<std::uint8_t> conv_encode(std::span<const std::uint8_t> bits) {
    std::vector<std::uint8_t> out;
    out.reserve(bits.size() * 2);
    std::uint32_t reg = 0;  // bit k = input delayed by k
    for (const std::uint8_t b : bits) {
        reg = ((reg << 1) | (b & 1u)) & 0x7Fu;
        out.push_back(parity(reg & kPolyA));
        out.push_back(parity(reg & kPolyB));
    }
    return out;
}

std::vector<std::uint8_t> viterbi_decode(std::span<const double> llrs) {
    if (llrs.size() % 2 != 0) throw std::invalid_argument("LLR count must be even");
    const std::size_t steps = llrs.size() / 2;

    // Branch outputs per (state, input bit).
    static const auto branch = [] {
        std::array<std::array<std::uint8_t, 2>, kNumStates * 2> table{};
        for (int s = 0; s < kNumStates; ++s) {
            for (int b = 0; b < 2; ++b) {
                const std::uint32_t reg = (static_cast<std::uint32_t>(s) << 1) | b;
                table[s * 2 + b] = {parity(reg & kPolyA), parity(reg & kPolyB)};
            }
        }
        return table;
    }();

    constexpr double kImpossible = -std::numeric_limits<double>::infinity();
    std::vector<double> metric(kNumStates, kImpossible);
    std::vector<double> next(kNumStates);
    metric[0] = 0.0;  // zero initial state

    // decision bit per state per step
    std::vector<std::uint64_t> decisions(steps, 0);

    for (std::size_t t = 0; t < steps; ++t) {
        const double la = llrs[2 * t];
        const double lb = llrs[2 * t + 1];
        std::uint64_t dec = 0;
        for (int ns = 0; ns < kNumStates; ++ns) {
            // predecessors of ns: reg = (prev << 1) | b, ns = reg & 0x3F
            // => prev in { ns >> 1, (ns >> 1) | 32 }, b = ns & 1
            const int b = ns & 1;
            const int p0 = ns >> 1;
            const int p1 = p0 | 32;
            double best = kImpossible;
            int choice = 0;
            for (int which = 0; which < 2; ++which) {
                const int prev = which == 0 ? p0 : p1;
                if (metric[prev] == kImpossible) continue;
                const auto& outs = branch[prev * 2 + b];
                // positive LLR favors coded bit 0
                const double m = metric[prev] + (outs[0] ? -la : la) + (outs[1] ? -lb : lb);
                if (m > best) {
                    best = m;
                    choice = which;
                }
            }
            next[ns] = best;
            if (choice) dec |= (1ULL << ns);
        }
        decisions[t] = dec;
        metric.swap(next);
    }

    // Traceback from state 0 (terminated trellis).
    std::vector<std::uint8_t> bits(steps);
    int state = 0;
    for (std::size_t t = steps; t-- > 0;) {
        bits[t] = static_cast<std::uint8_t>(state & 1);
        const int which = (decisions[t] >> state) & 1;
        state = (state >> 1) | (which ? 32 : 0);
    }
    return bits;
}

}  // namespace ferlink
