#include "sono/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sono::kernels {

namespace {

using std::ptrdiff_t;

// Work sizes below this stay serial under Exec::Auto; the OpenMP fork/join
// overhead is not worth it.
constexpr ptrdiff_t kAutoThreshold = 1 << 15;

bool use_parallel(Exec exec, ptrdiff_t work) {
  if (!parallel_available()) return false;
  switch (exec) {
    case Exec::Serial: return false;
    case Exec::Parallel: return true;
    case Exec::Auto: return work >= kAutoThreshold;
  }
  return false;
}

// One output sample of the centered FIR. Identical arithmetic for both
// execution variants: the reduction always runs m = lo..hi in order.
template <typename T>
inline T fir_dot(std::span<const T> x, std::span<const double> h, ptrdiff_t n, ptrdiff_t c) {
  const ptrdiff_t nx = static_cast<ptrdiff_t>(x.size());
  const ptrdiff_t nh = static_cast<ptrdiff_t>(h.size());
  const ptrdiff_t k = n + c;
  const ptrdiff_t lo = std::max<ptrdiff_t>(0, k - (nx - 1));
  const ptrdiff_t hi = std::min<ptrdiff_t>(nh - 1, k);
  T acc{};
  for (ptrdiff_t m = lo; m <= hi; ++m) acc += h[m] * x[k - m];
  return acc;
}

template <typename T>
std::vector<T> fir_centered_impl(std::span<const T> x, std::span<const double> h, Exec exec) {
  const ptrdiff_t nx = static_cast<ptrdiff_t>(x.size());
  const ptrdiff_t c = (static_cast<ptrdiff_t>(h.size()) - 1) / 2;
  std::vector<T> y(x.size());
  if (use_parallel(exec, nx * static_cast<ptrdiff_t>(h.size()))) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (ptrdiff_t n = 0; n < nx; ++n) y[n] = fir_dot(x, h, n, c);
  } else {
    for (ptrdiff_t n = 0; n < nx; ++n) y[n] = fir_dot(x, h, n, c);
  }
  return y;
}

inline Complex conv_dot(std::span<const Complex> x, std::span<const double> h, ptrdiff_t n) {
  const ptrdiff_t nx = static_cast<ptrdiff_t>(x.size());
  const ptrdiff_t nh = static_cast<ptrdiff_t>(h.size());
  const ptrdiff_t lo = std::max<ptrdiff_t>(0, n - (nx - 1));
  const ptrdiff_t hi = std::min<ptrdiff_t>(nh - 1, n);
  Complex acc{};
  for (ptrdiff_t m = lo; m <= hi; ++m) acc += h[m] * x[n - m];
  return acc;
}

inline Complex xcorr_dot(std::span<const Complex> r, std::span<const Complex> t, ptrdiff_t n) {
  const ptrdiff_t nt = static_cast<ptrdiff_t>(t.size());
  Complex acc{};
  for (ptrdiff_t m = 0; m < nt; ++m) acc += std::conj(t[m]) * r[n + m];
  return acc;
}

constexpr ptrdiff_t kInterpHalfWidth = 32;

inline double interp_kernel(double d) {
  // Blackman-windowed sinc, support |d| < kInterpHalfWidth.
  const double u = d / static_cast<double>(kInterpHalfWidth);
  const double w = 0.42 + 0.5 * std::cos(kPi * u) + 0.08 * std::cos(kTwoPi * u);
  if (d == 0.0) return w;
  return w * std::sin(kPi * d) / (kPi * d);
}

inline double interp_at(std::span<const double> x, double t) {
  const ptrdiff_t nx = static_cast<ptrdiff_t>(x.size());
  const ptrdiff_t base = static_cast<ptrdiff_t>(std::floor(t));
  const ptrdiff_t lo = std::max<ptrdiff_t>(0, base - kInterpHalfWidth + 1);
  const ptrdiff_t hi = std::min<ptrdiff_t>(nx - 1, base + kInterpHalfWidth);
  double acc = 0.0;
  for (ptrdiff_t m = lo; m <= hi; ++m) acc += x[m] * interp_kernel(t - static_cast<double>(m));
  return acc;
}

}  // namespace

bool parallel_available() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

std::vector<double> fir_centered(std::span<const double> x, std::span<const double> h, Exec exec) {
  return fir_centered_impl(x, h, exec);
}

std::vector<Complex> fir_centered(std::span<const Complex> x, std::span<const double> h, Exec exec) {
  return fir_centered_impl(x, h, exec);
}

std::vector<Complex> convolve_full(std::span<const Complex> x, std::span<const double> h, Exec exec) {
  if (x.empty() || h.empty()) return {};
  const ptrdiff_t ny = static_cast<ptrdiff_t>(x.size() + h.size()) - 1;
  std::vector<Complex> y(ny);
  if (use_parallel(exec, ny * static_cast<ptrdiff_t>(h.size()))) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (ptrdiff_t n = 0; n < ny; ++n) y[n] = conv_dot(x, h, n);
  } else {
    for (ptrdiff_t n = 0; n < ny; ++n) y[n] = conv_dot(x, h, n);
  }
  return y;
}

std::vector<Complex> xcorr(std::span<const Complex> r, std::span<const Complex> t, Exec exec) {
  if (t.empty() || r.size() < t.size()) throw ConfigError("xcorr: template longer than signal");
  const ptrdiff_t nc = static_cast<ptrdiff_t>(r.size() - t.size()) + 1;
  std::vector<Complex> c(nc);
  if (use_parallel(exec, nc * static_cast<ptrdiff_t>(t.size()))) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (ptrdiff_t n = 0; n < nc; ++n) c[n] = xcorr_dot(r, t, n);
  } else {
    for (ptrdiff_t n = 0; n < nc; ++n) c[n] = xcorr_dot(r, t, n);
  }
  return c;
}

std::vector<double> resample(std::span<const double> x, double step, Exec exec) {
  if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError("resample: step must be positive");
  if (x.empty()) return {};
  const ptrdiff_t ny =
      static_cast<ptrdiff_t>(std::floor(static_cast<double>(x.size() - 1) / step)) + 1;
  std::vector<double> y(ny);
  if (use_parallel(exec, ny * 2 * kInterpHalfWidth)) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (ptrdiff_t n = 0; n < ny; ++n) y[n] = interp_at(x, step * static_cast<double>(n));
  } else {
    for (ptrdiff_t n = 0; n < ny; ++n) y[n] = interp_at(x, step * static_cast<double>(n));
  }
  return y;
}

Complex cis_turns(double turns) {
  const double ph = kTwoPi * (turns - std::nearbyint(turns));
  return {std::cos(ph), std::sin(ph)};
}

std::vector<Complex> mix_down(std::span<const double> x, double cps, std::int64_t n_ref, Exec exec) {
  const ptrdiff_t nx = static_cast<ptrdiff_t>(x.size());
  std::vector<Complex> y(x.size());
  if (use_parallel(exec, nx * 8)) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (ptrdiff_t n = 0; n < nx; ++n)
      y[n] = x[n] * cis_turns(-cps * static_cast<double>(n - n_ref));
  } else {
    for (ptrdiff_t n = 0; n < nx; ++n)
      y[n] = x[n] * cis_turns(-cps * static_cast<double>(n - n_ref));
  }
  return y;
}

std::vector<double> mix_up_real(std::span<const Complex> x, double cps, std::int64_t n_ref,
                                Exec exec) {
  const ptrdiff_t nx = static_cast<ptrdiff_t>(x.size());
  std::vector<double> y(x.size());
  if (use_parallel(exec, nx * 8)) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (ptrdiff_t n = 0; n < nx; ++n)
      y[n] = (x[n] * cis_turns(cps * static_cast<double>(n - n_ref))).real();
  } else {
    for (ptrdiff_t n = 0; n < nx; ++n)
      y[n] = (x[n] * cis_turns(cps * static_cast<double>(n - n_ref))).real();
  }
  return y;
}

}  // namespace sono::kernels
