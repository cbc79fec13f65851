#include "sono/filters.hpp"

#include <cmath>
#include <cstddef>

namespace sono {

namespace {

double sinc(double x) {
  if (x == 0.0) return 1.0;
  return std::sin(kPi * x) / (kPi * x);
}

}  // namespace

std::vector<double> design_rc_filter(double fb_hz, double rolloff, double fs_hz,
                                     int span_symbols) {
  if (!(fb_hz > 0.0) || !(fs_hz > 0.0)) throw ConfigError("design_rc_filter: rates must be positive");
  const double ratio = fs_hz / fb_hz;
  const int sps = static_cast<int>(std::lround(ratio));
  if (std::abs(ratio - sps) > 1e-9 || sps < 1)
    throw ConfigError("design_rc_filter: fs must be an integer multiple of fb");
  if (rolloff < 0.0 || rolloff > 1.0) throw ConfigError("design_rc_filter: rolloff outside [0, 1]");
  if (span_symbols < 8 || span_symbols % 2 != 0)
    throw ConfigError("design_rc_filter: span_symbols must be even and >= 8");

  const int n = span_symbols * sps + 1;
  const int c = span_symbols * sps / 2;
  std::vector<double> h(n);
  for (int i = 0; i < n; ++i) {
    const double x = static_cast<double>(i - c) / sps;  // time in symbol periods
    const double bx = 2.0 * rolloff * x;
    const double denom = 1.0 - bx * bx;
    if (std::abs(denom) < 1e-9) {
      h[i] = (kPi / 4.0) * sinc(1.0 / (2.0 * rolloff));
    } else {
      h[i] = sinc(x) * std::cos(kPi * rolloff * x) / denom;
    }
  }
  return h;
}

double bessel_i0(double x) {
  // Series expansion; converges quickly for the beta range used here.
  double sum = 1.0, term = 1.0;
  const double q = x * x / 4.0;
  for (int k = 1; k < 64; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

std::vector<double> kaiser_lowpass(double fs_hz, double f_pass_hz, double f_stop_hz,
                                   double atten_db) {
  if (!(fs_hz > 0.0) || !(f_pass_hz > 0.0) || !(f_stop_hz > f_pass_hz) ||
      f_stop_hz >= fs_hz / 2.0)
    throw ConfigError("kaiser_lowpass: need 0 < f_pass < f_stop < fs/2");

  const double delta_w = kTwoPi * (f_stop_hz - f_pass_hz) / fs_hz;
  double beta = 0.0;
  if (atten_db > 50.0)
    beta = 0.1102 * (atten_db - 8.7);
  else if (atten_db >= 21.0)
    beta = 0.5842 * std::pow(atten_db - 21.0, 0.4) + 0.07886 * (atten_db - 21.0);

  int n = static_cast<int>(std::ceil((atten_db - 7.95) / (2.285 * delta_w))) + 1;
  if (n % 2 == 0) ++n;
  if (n < 11) n = 11;

  const double fc = 0.5 * (f_pass_hz + f_stop_hz) / fs_hz;  // normalized cutoff
  const int c = (n - 1) / 2;
  const double i0b = bessel_i0(beta);
  std::vector<double> h(n);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double m = static_cast<double>(i - c);
    const double u = m / static_cast<double>(c);
    const double w = bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - u * u))) / i0b;
    h[i] = 2.0 * fc * sinc(2.0 * fc * m) * w;
    sum += h[i];
  }
  for (double& v : h) v /= sum;  // unity DC gain
  return h;
}

std::vector<double> fir_from_magnitude(const std::function<double(double)>& mag, int n_taps,
                                       double fs_hz) {
  if (n_taps < 3 || n_taps % 2 == 0)
    throw ConfigError("fir_from_magnitude: n_taps must be odd and >= 3");
  const int n = n_taps;
  const int c = (n - 1) / 2;
  std::vector<double> h(n);
  // Inverse DFT of the sampled magnitude with zero phase about the center tap.
  for (int i = 0; i < n; ++i) {
    double acc = mag(0.0);
    for (int k = 1; k <= (n - 1) / 2; ++k) {
      const double f = static_cast<double>(k) * fs_hz / n;
      acc += 2.0 * mag(f) * std::cos(kTwoPi * k * (i - c) / n);
    }
    h[i] = acc / n;
  }
  return h;
}

std::vector<double> hilbert_fir(int n_taps) {
  if (n_taps < 3 || n_taps % 2 == 0)
    throw ConfigError("hilbert_fir: n_taps must be odd and >= 3");
  const int c = (n_taps - 1) / 2;
  std::vector<double> h(n_taps, 0.0);
  for (int i = 0; i < n_taps; ++i) {
    const int m = i - c;
    if (m % 2 == 0) continue;
    const double u = static_cast<double>(m) / (c + 1);
    const double w = 0.42 + 0.5 * std::cos(kPi * u) + 0.08 * std::cos(kTwoPi * u);
    h[i] = w * 2.0 / (kPi * m);
  }
  return h;
}

}  // namespace sono
