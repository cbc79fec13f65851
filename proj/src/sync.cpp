#include "sono/sync.hpp"

#include <algorithm>
#include <cmath>

#include "sono/filters.hpp"
#include "sono/kernels.hpp"

namespace sono {

namespace {

// Complex envelope for correlation: quadrature mix at f0 plus a Kaiser lowpass
// wide enough for the template band. Gain is irrelevant downstream (the
// detector normalizes), so no envelope scale factor is applied.
std::vector<Complex> envelope(std::span<const double> x, double f0_hz, double halfwidth_hz,
                              double fs_hz) {
  const std::vector<double> h =
      kaiser_lowpass(fs_hz, halfwidth_hz * 1.05, halfwidth_hz * 1.45, 60.0);
  return kernels::fir_centered(kernels::mix_down(x, f0_hz / fs_hz, 0), h);
}

struct Peak {
  std::int64_t index = -1;   // integer argmax
  double refined = -1.0;     // parabolic sub-sample position
  double metric = 0.0;       // normalized |c| at the peak
};

// Correlate env_r against env_t and find the best normalized peak.
Peak correlate_peak(const std::vector<Complex>& env_r, const std::vector<Complex>& env_t) {
  const std::size_t nt = env_t.size();
  if (env_r.size() < nt) throw SyncNotFoundError("search window shorter than template");

  const std::vector<Complex> c = kernels::xcorr(env_r, env_t);

  double t_energy = 0.0;
  for (const Complex& v : env_t) t_energy += std::norm(v);
  const double t_norm = std::sqrt(t_energy);

  // Running window energy of the received envelope.
  std::vector<double> prefix(env_r.size() + 1, 0.0);
  for (std::size_t i = 0; i < env_r.size(); ++i) prefix[i + 1] = prefix[i] + std::norm(env_r[i]);

  // Near-empty windows (e.g. guard zeros holding only a filter skirt) can
  // score spuriously high normalized correlations, so windows far below the
  // strongest one are ruled out before normalizing.
  double e_max = 0.0;
  for (std::size_t n = 0; n < c.size(); ++n)
    e_max = std::max(e_max, prefix[n + nt] - prefix[n]);
  if (!(e_max > 0.0)) throw SyncNotFoundError("search window holds no signal energy");
  const double e_floor = 1e-4 * e_max;

  Peak best;
  std::vector<double> mags(c.size());
  for (std::size_t n = 0; n < c.size(); ++n) {
    const double e_win = std::max(0.0, prefix[n + nt] - prefix[n]);
    const double m =
        e_win < e_floor ? 0.0 : std::abs(c[n]) / (t_norm * std::sqrt(e_win) + 1e-300);
    mags[n] = m;
    if (m > best.metric) {
      best.metric = m;
      best.index = static_cast<std::int64_t>(n);
    }
  }
  if (best.index < 0) throw SyncNotFoundError("no usable correlation window");

  best.metric = std::min(best.metric, 1.0);
  best.refined = static_cast<double>(best.index);
  const std::size_t i = static_cast<std::size_t>(best.index);
  if (i > 0 && i + 1 < mags.size()) {
    const double a = mags[i - 1], b = mags[i], d = mags[i + 1];
    const double den = a - 2.0 * b + d;
    if (std::abs(den) > 1e-300) {
      double delta = 0.5 * (a - d) / den;
      delta = std::clamp(delta, -0.5, 0.5);
      best.refined += delta;
    }
  }
  return best;
}

// Clamp a search window to the usable template-start range.
std::pair<std::int64_t, std::int64_t> clamp_window(SearchWindow w, std::size_t rx_len,
                                                   std::size_t tmpl_len) {
  const std::int64_t max_start = static_cast<std::int64_t>(rx_len) - static_cast<std::int64_t>(tmpl_len);
  std::int64_t lo = std::max<std::int64_t>(0, w.lo);
  std::int64_t hi = w.hi < 0 ? max_start + 1 : std::min<std::int64_t>(w.hi, max_start + 1);
  if (max_start < 0 || lo > max_start || lo >= hi)
    throw SyncNotFoundError("search window does not fit the template");
  return {lo, hi};
}

}  // namespace

PreambleSpec preamble_spec_for(const PacketConfig& cfg) {
  PreambleSpec s;
  s.kind = cfg.preamble;
  s.fc_hz = cfg.fc_hz;
  s.fb_hz = cfg.fb_hz;
  s.rolloff = cfg.rolloff;
  s.span_symbols = cfg.span_symbols;
  switch (cfg.preamble) {
    case PreambleKind::Barker13:
      break;
    case PreambleKind::QuadraticChirp:
      s.duration_s = 10e-6;
      s.f_lo_hz = cfg.fc_hz - 0.5 * cfg.fb_hz;
      s.f_hi_hz = cfg.fc_hz + 0.5 * cfg.fb_hz;
      break;
    case PreambleKind::HyperbolicUpDown:
      s.duration_s = 100e-6;
      s.f_lo_hz = std::max(0.1 * cfg.fc_hz, cfg.fc_hz - 0.5 * cfg.fb_hz);
      s.f_hi_hz = cfg.fc_hz + 0.5 * cfg.fb_hz;
      break;
  }
  return s;
}

std::array<int, 13> barker13() {
  return {1, -1, 1, -1, 1, 1, -1, -1, 1, 1, 1, 1, 1};
}

Waveform gen_barker(const PreambleSpec& spec, double fs_hz) {
  if (!(spec.fb_hz > 0.0) || !(spec.fc_hz > 0.0))
    throw ConfigError("gen_barker: fc and fb must be positive");
  const auto chips = barker13();
  std::vector<Complex> sym(chips.size());
  for (std::size_t i = 0; i < chips.size(); ++i) sym[i] = Complex(chips[i], 0.0);

  PacketConfig shaping;
  shaping.fb_hz = spec.fb_hz;
  shaping.fc_hz = spec.fc_hz;
  shaping.fs_hz = fs_hz;
  shaping.rolloff = spec.rolloff;
  shaping.span_symbols = spec.span_symbols;
  return upconvert(pulse_shape(sym, shaping), spec.fc_hz,
                   spec.fb_hz * (1.0 + spec.rolloff));
}

Waveform gen_quadratic_chirp(const PreambleSpec& spec, double fs_hz) {
  if (!(spec.duration_s > 0.0)) throw ConfigError("gen_quadratic_chirp: duration must be positive");
  if (spec.f_lo_hz < 0.0 || spec.f_hi_hz <= spec.f_lo_hz)
    throw ConfigError("gen_quadratic_chirp: need 0 <= f_lo < f_hi");
  const double T = spec.duration_s;
  const double df = spec.f_hi_hz - spec.f_lo_hz;
  const std::size_t n = static_cast<std::size_t>(std::llround(T * fs_hz));
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs_hz;
    // f(t) = f_lo + df (t/T)^2  ->  phase = 2 pi (f_lo t + df t^3 / (3 T^2))
    const double phase = kTwoPi * (spec.f_lo_hz * t + df * t * t * t / (3.0 * T * T));
    x[i] = std::cos(phase);
  }
  return make_passband(std::move(x), fs_hz);
}

Waveform gen_hyperbolic_single(const PreambleSpec& spec, double fs_hz, bool up) {
  if (!(spec.duration_s > 0.0)) throw ConfigError("gen_hyperbolic: duration must be positive");
  if (!(spec.f_lo_hz > 0.0) || spec.f_hi_hz <= spec.f_lo_hz)
    throw ConfigError("gen_hyperbolic: need 0 < f_lo < f_hi");
  const double T = spec.duration_s;
  const double c0 = 1.0 / spec.f_lo_hz;
  const double k = (1.0 / spec.f_lo_hz - 1.0 / spec.f_hi_hz) / T;
  const std::size_t n = static_cast<std::size_t>(std::llround(T * fs_hz));
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    // f(t) = 1 / (c0 - k t) sweeps f_lo -> f_hi; phase = (2 pi / k) ln(c0 / (c0 - k t)).
    const double t = static_cast<double>(i) / fs_hz;
    const double phase = (kTwoPi / k) * std::log(c0 / (c0 - k * t));
    x[i] = std::cos(phase);
  }
  if (!up) std::reverse(x.begin(), x.end());
  return make_passband(std::move(x), fs_hz);
}

Waveform gen_hyperbolic_pair(const PreambleSpec& spec, double fs_hz) {
  Waveform upw = gen_hyperbolic_single(spec, fs_hz, true);
  const Waveform dn = gen_hyperbolic_single(spec, fs_hz, false);
  for (std::size_t i = 0; i < upw.real.size(); ++i)
    upw.real[i] = 0.5 * (upw.real[i] + dn.real[i]);
  return upw;
}

Waveform gen_preamble(const PreambleSpec& spec, double fs_hz) {
  switch (spec.kind) {
    case PreambleKind::Barker13: return gen_barker(spec, fs_hz);
    case PreambleKind::QuadraticChirp: return gen_quadratic_chirp(spec, fs_hz);
    case PreambleKind::HyperbolicUpDown: return gen_hyperbolic_pair(spec, fs_hz);
  }
  throw ConfigError("gen_preamble: unknown kind");
}

DetectParams detect_params_for(const PacketConfig& cfg, const PreambleSpec& spec,
                               std::size_t preamble_len) {
  DetectParams p;
  switch (spec.kind) {
    case PreambleKind::Barker13:
      p.band_center_hz = spec.fc_hz;
      p.band_halfwidth_hz = spec.fb_hz * (1.0 + spec.rolloff) * 0.5;
      break;
    case PreambleKind::QuadraticChirp:
    case PreambleKind::HyperbolicUpDown:
      p.band_center_hz = 0.5 * (spec.f_lo_hz + spec.f_hi_hz);
      p.band_halfwidth_hz = 0.5 * (spec.f_hi_hz - spec.f_lo_hz);
      break;
  }
  p.first_symbol_offset = packet_data_offset(cfg, preamble_len);
  return p;
}

SyncResult detect_preamble(const Waveform& rx, const Waveform& tmpl, SearchWindow window,
                           const DetectParams& params) {
  if (rx.kind != WaveformKind::PassbandReal || tmpl.kind != WaveformKind::PassbandReal)
    throw ConfigError("detect_preamble: passband real inputs required");
  if (rx.fs_hz != tmpl.fs_hz) throw ConfigError("detect_preamble: sample rate mismatch");

  const auto [lo, hi] = clamp_window(window, rx.real.size(), tmpl.real.size());
  // Envelope of the slice that can contain the template at any start in
  // [lo, hi); edge transients sit outside the correlation support.
  const std::size_t slice_end =
      std::min(rx.real.size(), static_cast<std::size_t>(hi) + tmpl.real.size());
  std::span<const double> slice(rx.real.data() + lo, slice_end - static_cast<std::size_t>(lo));

  const std::vector<Complex> env_r =
      envelope(slice, params.band_center_hz, params.band_halfwidth_hz, rx.fs_hz);
  const std::vector<Complex> env_t =
      envelope(tmpl.real, params.band_center_hz, params.band_halfwidth_hz, rx.fs_hz);

  const Peak peak = correlate_peak(env_r, env_t);
  if (peak.metric < params.threshold)
    throw SyncNotFoundError("no preamble found: best correlation " + std::to_string(peak.metric) +
                            " below threshold " + std::to_string(params.threshold));

  SyncResult r;
  r.start_sample = lo + peak.index + params.first_symbol_offset;
  r.peak_metric = peak.metric;
  return r;
}

double hyperbolic_t_eff(const PreambleSpec& spec) {
  return spec.duration_s * (spec.f_lo_hz + spec.f_hi_hz) / (spec.f_hi_hz - spec.f_lo_hz);
}

double estimate_doppler(const Waveform& rx, const PreambleSpec& spec, SearchWindow window) {
  if (spec.kind != PreambleKind::HyperbolicUpDown)
    throw ConfigError("estimate_doppler: hyperbolic pair preamble required");
  if (rx.kind != WaveformKind::PassbandReal)
    throw ConfigError("estimate_doppler: passband real input required");

  const Waveform up = gen_hyperbolic_single(spec, rx.fs_hz, true);
  const Waveform dn = gen_hyperbolic_single(spec, rx.fs_hz, false);

  const auto [lo, hi] = clamp_window(window, rx.real.size(), up.real.size());
  const std::size_t slice_end =
      std::min(rx.real.size(), static_cast<std::size_t>(hi) + up.real.size());

  // When the pair sits at the very start of the capture, Doppler can push one
  // sweep's correlation peak to a negative template start. Pad the front so
  // such peaks stay on the grid; the pad cancels in the up/down difference.
  constexpr std::size_t kPad = 256;
  std::vector<double> padded(kPad, 0.0);
  padded.insert(padded.end(), rx.real.begin() + lo, rx.real.begin() + static_cast<std::int64_t>(slice_end));

  const double f0 = 0.5 * (spec.f_lo_hz + spec.f_hi_hz);
  const double hw = 0.5 * (spec.f_hi_hz - spec.f_lo_hz);
  const std::vector<Complex> env_r = envelope(padded, f0, hw, rx.fs_hz);
  const std::vector<Complex> env_up = envelope(up.real, f0, hw, rx.fs_hz);
  const std::vector<Complex> env_dn = envelope(dn.real, f0, hw, rx.fs_hz);

  const Peak pu = correlate_peak(env_r, env_up);
  const Peak pd = correlate_peak(env_r, env_dn);
  // The pair is transmitted superimposed at half amplitude, so each sweep
  // correlates at roughly half the combined peak.
  if (pu.metric < 0.2 || pd.metric < 0.2)
    throw SyncNotFoundError("doppler estimate failed: sweep correlation too weak");

  const double dtau_s = (pd.refined - pu.refined) / rx.fs_hz;
  return 1.0 + dtau_s / hyperbolic_t_eff(spec);
}

}  // namespace sono
