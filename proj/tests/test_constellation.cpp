#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "support/test_util.hpp"

#include "sono/constellation.hpp"
#include "sono/types.hpp"

using namespace sono;

TEST_SUITE("constellation") {

TEST_CASE("all formats have unit average energy") {
  for (ConstellationKind kind : {ConstellationKind::QPSK, ConstellationKind::PSK8,
                                 ConstellationKind::QAM16, ConstellationKind::QAM64}) {
    const Constellation c = make_constellation(kind);
    REQUIRE(static_cast<int>(c.points.size()) == (1 << c.bits_per_symbol));
    double e = 0.0;
    for (const Complex& p : c.points) e += std::norm(p);
    e /= static_cast<double>(c.points.size());
    CHECK(std::abs(e - 1.0) < 1e-12);
  }
}

TEST_CASE("QPSK Gray labels land on the expected quadrants") {
  const Constellation c = make_constellation(ConstellationKind::QPSK);
  const double s = 1.0 / std::sqrt(2.0);
  CHECK(c.points[0b00].real() == doctest::Approx(s).epsilon(1e-15));   // 00 -> (+1+j)/sqrt2
  CHECK(c.points[0b00].imag() == doctest::Approx(s).epsilon(1e-15));
  CHECK(c.points[0b01].real() == doctest::Approx(-s).epsilon(1e-15));  // 01 -> (-1+j)/sqrt2
  CHECK(c.points[0b01].imag() == doctest::Approx(s).epsilon(1e-15));
  CHECK(c.points[0b11].real() == doctest::Approx(-s).epsilon(1e-15));  // 11 -> (-1-j)/sqrt2
  CHECK(c.points[0b11].imag() == doctest::Approx(-s).epsilon(1e-15));
  CHECK(c.points[0b10].real() == doctest::Approx(s).epsilon(1e-15));   // 10 -> (+1-j)/sqrt2
  CHECK(c.points[0b10].imag() == doctest::Approx(-s).epsilon(1e-15));
}

TEST_CASE("square QAM corner labels") {
  const Constellation q16 = make_constellation(ConstellationKind::QAM16);
  // Label 0000: both Gray half-labels decode to index 0 = most positive level.
  CHECK(q16.points[0b0000].real() == doctest::Approx(3.0 / std::sqrt(10.0)).epsilon(1e-15));
  CHECK(q16.points[0b0000].imag() == doctest::Approx(3.0 / std::sqrt(10.0)).epsilon(1e-15));
  const Constellation q64 = make_constellation(ConstellationKind::QAM64);
  CHECK(q64.points[0b000000].real() == doctest::Approx(7.0 / std::sqrt(42.0)).epsilon(1e-15));
  CHECK(q64.points[0b000000].imag() == doctest::Approx(7.0 / std::sqrt(42.0)).epsilon(1e-15));
}

TEST_CASE("8PSK points sit on the unit circle with Gray-ordered angles") {
  const Constellation c = make_constellation(ConstellationKind::PSK8);
  for (const Complex& p : c.points) CHECK(std::abs(std::abs(p) - 1.0) < 1e-12);
  CHECK(c.points[0b000].real() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(c.points[0b000].imag() == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
  // 001 decodes to position 1: angle 45 degrees.
  CHECK(std::arg(c.points[0b001]) == doctest::Approx(kPi / 4.0).epsilon(1e-12));
}

TEST_CASE("Gray property: nearest neighbors differ in exactly one bit") {
  for (ConstellationKind kind : {ConstellationKind::QPSK, ConstellationKind::PSK8,
                                 ConstellationKind::QAM16, ConstellationKind::QAM64}) {
    const Constellation c = make_constellation(kind);
    const int n = static_cast<int>(c.points.size());
    // Minimum pairwise distance, then every pair at that distance.
    double dmin = 1e30;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        dmin = std::min(dmin, std::abs(c.points[a] - c.points[b]));
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        if (std::abs(c.points[a] - c.points[b]) < dmin * 1.001)
          CHECK(testutil::popcount_u(static_cast<unsigned>(a) ^ static_cast<unsigned>(b)) == 1);
  }
}

TEST_CASE("slice_index recovers clean points and breaks ties low") {
  const Constellation c = make_constellation(ConstellationKind::QPSK);
  for (int i = 0; i < 4; ++i) CHECK(slice_index(c, c.points[i]) == i);
  CHECK(slice_index(c, Complex(0.9, 0.9) / std::sqrt(2.0)) == 0b00);
  // On the boundary between labels 00 and 01 the lower index wins.
  CHECK(slice_index(c, Complex(0.0, 0.5)) == 0b00);
  const Constellation q16 = make_constellation(ConstellationKind::QAM16);
  for (int i = 0; i < 16; ++i) CHECK(slice_index(q16, q16.points[i]) == i);
}

TEST_CASE("map_bits / demap_symbols round trip on random bits") {
  std::mt19937_64 rng(7);
  for (ConstellationKind kind : {ConstellationKind::QPSK, ConstellationKind::PSK8,
                                 ConstellationKind::QAM16, ConstellationKind::QAM64}) {
    const Constellation c = make_constellation(kind);
    std::vector<std::uint8_t> bits(600 * c.bits_per_symbol);
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1u);
    const std::vector<Complex> sym = map_bits(bits, c);
    REQUIRE(sym.size() == 600);
    const std::vector<std::uint8_t> back = demap_symbols(sym, c);
    REQUIRE(back.size() == bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) REQUIRE(back[i] == bits[i]);
  }
}

TEST_CASE("demap survives noise well inside the decision regions") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 0.02);
  const Constellation c = make_constellation(ConstellationKind::QAM64);
  std::vector<std::uint8_t> bits(2000 * 6);
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1u);
  std::vector<Complex> sym = map_bits(bits, c);
  for (Complex& s : sym) s += Complex(g(rng), g(rng));
  const std::vector<std::uint8_t> back = demap_symbols(sym, c);
  int errors = 0;
  for (std::size_t i = 0; i < bits.size(); ++i) errors += back[i] != bits[i];
  CHECK(errors == 0);
}

TEST_CASE("map_bits rejects a ragged bit count") {
  const Constellation c = make_constellation(ConstellationKind::PSK8);
  const std::vector<std::uint8_t> bits(7, 0);
  CHECK_THROWS_AS((void)map_bits(bits, c), ConfigError);
}

TEST_CASE("name round trips and rejects unknown formats") {
  for (const char* n : {"QPSK", "8PSK", "16QAM", "64QAM"})
    CHECK(constellation_name(constellation_from_name(n)) == n);
  CHECK_THROWS_AS((void)constellation_from_name("32APSK"), ConfigError);
}

}  // TEST_SUITE
