#include "sono/constellation.hpp"

#include <cmath>

namespace sono {

namespace {

// Inverse of the reflected Gray code g = i ^ (i >> 1).
unsigned gray_decode(unsigned g) {
  unsigned i = g;
  for (unsigned shift = 1; shift < 16; shift <<= 1) i ^= i >> shift;
  return i;
}

// Level for Gray index idx on one axis of a 2^m-level grid, most positive
// first: m=1 -> {+1,-1}; m=2 -> {+3,+1,-1,-3}; m=3 -> {+7,...,-7}.
double axis_level(unsigned idx, int m) {
  const int n_levels = 1 << m;
  return static_cast<double>(n_levels - 1 - 2 * static_cast<int>(idx));
}

Constellation make_square_qam(ConstellationKind kind, int k) {
  const int m = k / 2;
  const int n = 1 << k;
  // Normalize to unit average energy: E = 2 * mean(level^2).
  double e = 0.0;
  for (int i = 0; i < (1 << m); ++i) {
    const double v = axis_level(static_cast<unsigned>(i), m);
    e += v * v;
  }
  const double norm = std::sqrt(2.0 * e / (1 << m));

  Constellation c{kind, k, std::vector<Complex>(n)};
  for (int label = 0; label < n; ++label) {
    const unsigned q_bits = static_cast<unsigned>(label) >> m;
    const unsigned i_bits = static_cast<unsigned>(label) & ((1u << m) - 1u);
    const double q = axis_level(gray_decode(q_bits), m);
    const double i = axis_level(gray_decode(i_bits), m);
    c.points[label] = Complex(i, q) / norm;
  }
  return c;
}

Constellation make_8psk() {
  Constellation c{ConstellationKind::PSK8, 3, std::vector<Complex>(8)};
  for (int label = 0; label < 8; ++label) {
    const unsigned pos = gray_decode(static_cast<unsigned>(label));
    const double ang = kTwoPi * pos / 8.0;
    c.points[label] = Complex(std::cos(ang), std::sin(ang));
  }
  return c;
}

}  // namespace

Constellation make_constellation(ConstellationKind kind) {
  switch (kind) {
    case ConstellationKind::QPSK: return make_square_qam(kind, 2);
    case ConstellationKind::PSK8: return make_8psk();
    case ConstellationKind::QAM16: return make_square_qam(kind, 4);
    case ConstellationKind::QAM64: return make_square_qam(kind, 6);
  }
  throw ConfigError("make_constellation: unknown kind");
}

ConstellationKind constellation_from_name(const std::string& name) {
  if (name == "QPSK") return ConstellationKind::QPSK;
  if (name == "8PSK") return ConstellationKind::PSK8;
  if (name == "16QAM") return ConstellationKind::QAM16;
  if (name == "64QAM") return ConstellationKind::QAM64;
  throw ConfigError("unknown constellation format: " + name);
}

std::string constellation_name(ConstellationKind kind) {
  switch (kind) {
    case ConstellationKind::QPSK: return "QPSK";
    case ConstellationKind::PSK8: return "8PSK";
    case ConstellationKind::QAM16: return "16QAM";
    case ConstellationKind::QAM64: return "64QAM";
  }
  return "?";
}

int slice_index(const Constellation& c, Complex y) {
  int best = 0;
  double best_d2 = std::norm(y - c.points[0]);
  for (int i = 1; i < static_cast<int>(c.points.size()); ++i) {
    const double d2 = std::norm(y - c.points[i]);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return best;
}

std::vector<Complex> map_bits(std::span<const std::uint8_t> bits, const Constellation& c) {
  const int k = c.bits_per_symbol;
  if (bits.size() % static_cast<std::size_t>(k) != 0)
    throw ConfigError("map_bits: bit count not a multiple of bits_per_symbol");
  std::vector<Complex> out(bits.size() / k);
  for (std::size_t s = 0; s < out.size(); ++s) {
    unsigned label = 0;
    for (int b = 0; b < k; ++b) label = (label << 1) | (bits[s * k + b] & 1u);
    out[s] = c.points[label];
  }
  return out;
}

std::vector<std::uint8_t> demap_symbols(std::span<const Complex> symbols, const Constellation& c) {
  const int k = c.bits_per_symbol;
  std::vector<std::uint8_t> bits(symbols.size() * k);
  for (std::size_t s = 0; s < symbols.size(); ++s) {
    const unsigned label = static_cast<unsigned>(slice_index(c, symbols[s]));
    for (int b = 0; b < k; ++b)
      bits[s * k + b] = static_cast<std::uint8_t>((label >> (k - 1 - b)) & 1u);
  }
  return bits;
}

}  // namespace sono
