#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sono/types.hpp"

namespace sono {

enum class ConstellationKind { QPSK, PSK8, QAM16, QAM64 };

// Unit-average-energy constellation. points[i] is the point whose bit label is
// i (MSB-first), so the label table is implicit in the ordering.
//
// Square QAM (QPSK/16/64): the label splits into two halves; the high half
// Gray-selects the Q level and the low half Gray-selects the I level, levels
// running from most positive (Gray index 0) to most negative. 8PSK uses a
// Gray-coded angular walk with label 000 at angle 0.
struct Constellation {
  ConstellationKind kind;
  int bits_per_symbol;
  std::vector<Complex> points;
};

Constellation make_constellation(ConstellationKind kind);
ConstellationKind constellation_from_name(const std::string& name);  // "QPSK", "8PSK", ...
std::string constellation_name(ConstellationKind kind);

// Nearest point by Euclidean distance; ties break to the lowest point index.
int slice_index(const Constellation& c, Complex y);

// bits.size() must be a multiple of bits_per_symbol; MSB-first within a label.
std::vector<Complex> map_bits(std::span<const std::uint8_t> bits, const Constellation& c);
std::vector<std::uint8_t> demap_symbols(std::span<const Complex> symbols, const Constellation& c);

}  // namespace sono
