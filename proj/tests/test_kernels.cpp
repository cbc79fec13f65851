#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "sono/kernels.hpp"
#include "sono/types.hpp"

using namespace sono;
using kernels::Exec;

namespace {

std::vector<double> random_real(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = g(rng);
  return v;
}

std::vector<Complex> random_cplx(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Complex> v(n);
  for (Complex& x : v) x = Complex(g(rng), g(rng));
  return v;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("fir_centered real: identity tap passes input through") {
  std::mt19937_64 rng(1);
  const std::vector<double> x = random_real(rng, 300);
  // Unit tap at the center of an odd filter = exact identity.
  std::vector<double> h(9, 0.0);
  h[4] = 1.0;
  const std::vector<double> y = kernels::fir_centered(x, h, Exec::Serial);
  REQUIRE(y.size() == x.size());
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == x[i]);
}

TEST_CASE("fir_centered matches a direct centered convolution") {
  std::mt19937_64 rng(2);
  const std::vector<double> x = random_real(rng, 64);
  const std::vector<double> h = random_real(rng, 11);
  const int c = 5;
  const std::vector<double> y = kernels::fir_centered(x, h, Exec::Serial);
  for (int n = 0; n < static_cast<int>(x.size()); ++n) {
    double ref = 0.0;
    for (int m = 0; m < 11; ++m) {
      const int idx = n + c - m;
      if (idx >= 0 && idx < static_cast<int>(x.size())) ref += h[m] * x[idx];
    }
    CHECK(y[n] == doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("serial and parallel variants are bit-identical") {
  std::mt19937_64 rng(3);
  const std::vector<double> xr = random_real(rng, 5000);
  const std::vector<Complex> xc = random_cplx(rng, 5000);
  const std::vector<double> h = random_real(rng, 57);
  const std::vector<Complex> t = random_cplx(rng, 301);

  SUBCASE("fir_centered real") {
    const auto a = kernels::fir_centered(xr, h, Exec::Serial);
    const auto b = kernels::fir_centered(xr, h, Exec::Parallel);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a[i] == b[i]);
  }
  SUBCASE("fir_centered complex") {
    const auto a = kernels::fir_centered(xc, h, Exec::Serial);
    const auto b = kernels::fir_centered(xc, h, Exec::Parallel);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a[i] == b[i]);
  }
  SUBCASE("convolve_full") {
    const auto a = kernels::convolve_full(xc, h, Exec::Serial);
    const auto b = kernels::convolve_full(xc, h, Exec::Parallel);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a[i] == b[i]);
  }
  SUBCASE("xcorr") {
    const auto a = kernels::xcorr(xc, t, Exec::Serial);
    const auto b = kernels::xcorr(xc, t, Exec::Parallel);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a[i] == b[i]);
  }
  SUBCASE("resample") {
    const auto a = kernels::resample(xr, 1.0003, Exec::Serial);
    const auto b = kernels::resample(xr, 1.0003, Exec::Parallel);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a[i] == b[i]);
  }
  SUBCASE("mix_down / mix_up_real") {
    const auto a = kernels::mix_down(xr, 0.21, 17, Exec::Serial);
    const auto b = kernels::mix_down(xr, 0.21, 17, Exec::Parallel);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a[i] == b[i]);
    const auto c = kernels::mix_up_real(xc, 0.21, -5, Exec::Serial);
    const auto d = kernels::mix_up_real(xc, 0.21, -5, Exec::Parallel);
    REQUIRE(c.size() == d.size());
    for (std::size_t i = 0; i < c.size(); ++i) REQUIRE(c[i] == d[i]);
  }
}

TEST_CASE("convolve_full computes the textbook convolution") {
  const std::vector<Complex> x{{1.0, 0.0}, {2.0, 0.0}, {3.0, 0.0}};
  const std::vector<double> h{1.0, 1.0};
  const auto y = kernels::convolve_full(x, h, Exec::Serial);
  REQUIRE(y.size() == 4);
  CHECK(y[0].real() == doctest::Approx(1.0));
  CHECK(y[1].real() == doctest::Approx(3.0));
  CHECK(y[2].real() == doctest::Approx(5.0));
  CHECK(y[3].real() == doctest::Approx(3.0));
}

TEST_CASE("xcorr peaks at the embedded template offset") {
  std::mt19937_64 rng(4);
  const std::vector<Complex> t = random_cplx(rng, 40);
  std::vector<Complex> r(200, Complex{});
  for (std::size_t i = 0; i < t.size(); ++i) r[77 + i] = t[i];
  const auto c = kernels::xcorr(r, t, Exec::Serial);
  REQUIRE(c.size() == r.size() - t.size() + 1);
  std::size_t best = 0;
  for (std::size_t i = 1; i < c.size(); ++i)
    if (std::abs(c[i]) > std::abs(c[best])) best = i;
  CHECK(best == 77);
  // Peak value is the template energy (conj(t) . t).
  double e = 0.0;
  for (const Complex& v : t) e += std::norm(v);
  CHECK(std::abs(c[77]) == doctest::Approx(e).epsilon(1e-12));
}

TEST_CASE("xcorr rejects a template longer than the signal") {
  const std::vector<Complex> r(5, Complex{1.0, 0.0});
  const std::vector<Complex> t(9, Complex{1.0, 0.0});
  CHECK_THROWS_AS((void)kernels::xcorr(r, t, Exec::Serial), ConfigError);
}

TEST_CASE("resample with step 1 is the identity") {
  std::mt19937_64 rng(5);
  const std::vector<double> x = random_real(rng, 400);
  const auto y = kernels::resample(x, 1.0, Exec::Serial);
  REQUIRE(y.size() == x.size());
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == doctest::Approx(x[i]).epsilon(1e-12));
}

TEST_CASE("resample round trip recovers a bandlimited signal") {
  // Smooth tone well inside the interpolator band.
  const std::size_t n = 4000;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = std::sin(2.0 * kPi * 0.03 * static_cast<double>(i)) +
           0.5 * std::cos(2.0 * kPi * 0.07 * static_cast<double>(i));
  const double a = 1.0004;
  const auto mid = kernels::resample(x, a, Exec::Serial);
  const auto back = kernels::resample(mid, 1.0 / a, Exec::Serial);
  // Compare away from the edges where the sinc window is truncated.
  double max_err = 0.0;
  for (std::size_t i = 64; i + 64 < std::min(x.size(), back.size()); ++i)
    max_err = std::max(max_err, std::abs(back[i] - x[i]));
  CHECK(max_err < 1e-3);
}

TEST_CASE("resample scales tone frequency by the step") {
  const std::size_t n = 8000;
  const double f0 = 0.05;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::cos(2.0 * kPi * f0 * static_cast<double>(i));
  const double step = 1.001;
  const auto y = kernels::resample(x, step, Exec::Serial);
  // out[n] = cos(2 pi f0 step n): correlate against the expected tone.
  double num = 0.0, den = 0.0;
  for (std::size_t i = 64; i + 64 < y.size(); ++i) {
    const double ref = std::cos(2.0 * kPi * f0 * step * static_cast<double>(i));
    num += y[i] * ref;
    den += ref * ref;
  }
  CHECK(num / den == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("cis_turns reduces the argument exactly") {
  const Complex a = kernels::cis_turns(0.25);
  CHECK(a.real() == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
  CHECK(a.imag() == doctest::Approx(1.0).epsilon(1e-15));
  // Integer turns drop out exactly, so a shifted argument gives the same value.
  const Complex b = kernels::cis_turns(1048576.25);
  CHECK(b.real() == a.real());
  CHECK(b.imag() == a.imag());
  const Complex c = kernels::cis_turns(-0.5);
  CHECK(c.real() == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("mix_up_real at fs/4 walks the quadrature pattern") {
  const std::vector<Complex> one(8, Complex{1.0, 0.0});
  const auto y = kernels::mix_up_real(one, 0.25, 0, Exec::Serial);
  const double expect[8] = {1.0, 0.0, -1.0, 0.0, 1.0, 0.0, -1.0, 0.0};
  for (int i = 0; i < 8; ++i) CHECK(y[i] == doctest::Approx(expect[i]).scale(1.0).epsilon(1e-12));
}

TEST_CASE("mix_down honors the phase reference") {
  std::vector<double> x(32, 1.0);
  const auto y0 = kernels::mix_down(x, 0.1, 0, Exec::Serial);
  const auto y7 = kernels::mix_down(x, 0.1, 7, Exec::Serial);
  // Same signal, phase referenced to n = 7: y7[7] must be exactly 1.
  CHECK(y7[7].real() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(y7[7].imag() == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
  // And the two outputs differ by the constant rotation e^{+j 2 pi 0.1 * 7}.
  const Complex rot = kernels::cis_turns(0.1 * 7.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(y7[i].real() == doctest::Approx((y0[i] * rot).real()).scale(1.0).epsilon(1e-12));
    CHECK(y7[i].imag() == doctest::Approx((y0[i] * rot).imag()).scale(1.0).epsilon(1e-12));
  }
}

TEST_CASE("mix_down then conjugate mixing recovers a real tone") {
  // Downconvert a pure carrier: the result is DC with unit amplitude * 1/2
  // twice (positive and negative images); verify the DC term directly.
  const double cps = 0.125;
  std::vector<double> x(256);
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = std::cos(2.0 * kPi * cps * static_cast<double>(i));
  const auto y = kernels::mix_down(x, cps, 0, Exec::Serial);
  Complex mean{};
  for (const Complex& v : y) mean += v;
  mean /= static_cast<double>(y.size());
  // cos = (e^{+} + e^{-})/2; after mixing the stationary part has mean 1/2.
  CHECK(mean.real() == doctest::Approx(0.5).epsilon(1e-2));
  CHECK(std::abs(mean.imag()) < 1e-2);
}

}  // TEST_SUITE
