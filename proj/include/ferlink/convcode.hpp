#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ferlink {

// Rate-1/2 convolutional code, constraint length 7, generators 133/171
// (octal), zero initial state. Input is expected to end in at least six
// zero tail bits so the trellis terminates in state 0.
std::vector<std::uint8_t> conv_encode(std::span<const std::uint8_t> bits);

// Soft-input Viterbi decoder over the 64-state trellis with traceback to
// the zero state. LLR convention: positive favors bit 0. Returns
// llrs.size()/2 decoded bits (tail included).
std::vector<std::uint8_t> viterbi_decode(std::span<const double> llrs);

}  // namespace ferlink
