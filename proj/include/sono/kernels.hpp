#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sono/types.hpp"

// Data-parallel inner loops used throughout the signal chain. Every kernel
// ships in two variants: a serial reference and an OpenMP version that
// parallelizes over *output* samples only, with the per-sample reduction kept
// in the same order. The two variants are therefore bit-identical, which the
// unit tests assert and the bench_kernels tool measures.
namespace sono::kernels {

enum class Exec {
  Serial,    // reference implementation
  Parallel,  // OpenMP over output samples (falls back to serial if no OpenMP)
  Auto,      // Parallel for large jobs, Serial for small ones
};

bool parallel_available();
int max_threads();

// Centered FIR: y[n] = sum_m h[m] * x[n + (M-1)/2 - m], zero-padded edges.
// Output length equals input length; linear-phase group delay is compensated.
std::vector<double> fir_centered(std::span<const double> x, std::span<const double> h,
                                 Exec exec = Exec::Auto);
std::vector<Complex> fir_centered(std::span<const Complex> x, std::span<const double> h,
                                  Exec exec = Exec::Auto);

// Full convolution: y[n] = sum_m h[m] * x[n - m], length x + h - 1.
std::vector<Complex> convolve_full(std::span<const Complex> x, std::span<const double> h,
                                   Exec exec = Exec::Auto);

// Sliding cross-correlation: c[n] = sum_m conj(t[m]) * r[n + m],
// for n in [0, r.size() - t.size()]. Requires r.size() >= t.size().
std::vector<Complex> xcorr(std::span<const Complex> r, std::span<const Complex> t,
                           Exec exec = Exec::Auto);

// Band-limited fractional resampling: out[n] = x(step * n), evaluated with a
// Blackman-windowed sinc interpolator (half-width 32 samples, zero-padded).
// Output length floor((x.size()-1)/step) + 1.
std::vector<double> resample(std::span<const double> x, double step, Exec exec = Exec::Auto);

// e^{j 2*pi*turns} with the argument reduced to [-0.5, 0.5] turns first, so the
// result for a given n is independent of how the loop is scheduled.
Complex cis_turns(double turns);

// Quadrature downconversion without filtering:
//   y[n] = x[n] * e^{-j 2*pi*cps*(n - n_ref)},   cps = cycles per sample.
std::vector<Complex> mix_down(std::span<const double> x, double cps, std::int64_t n_ref,
                              Exec exec = Exec::Auto);

// Real passband synthesis: y[n] = Re{ x[n] * e^{+j 2*pi*cps*(n - n_ref)} }.
std::vector<double> mix_up_real(std::span<const Complex> x, double cps, std::int64_t n_ref,
                                Exec exec = Exec::Auto);

}  // namespace sono::kernels
