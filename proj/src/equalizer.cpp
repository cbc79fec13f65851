#include "sono/equalizer.hpp"

#include <cmath>
#include <cstdio>

#include "sono/filters.hpp"
#include "sono/kernels.hpp"

namespace sono {

namespace {

constexpr int kLeadHalfSymbols = 40;    // baseband samples kept before symbol 0
constexpr int kDivergenceWindow = 500;  // trailing |e| window
constexpr double kDivergenceFactor = 2.0;

}  // namespace

void EqualizerConfig::validate() const {
  if (n_ff < 2 || n_ff > 40) throw ConfigError("equalizer: n_ff must be in [2, 40]");
  if (n_fb < 0 || n_fb > 40) throw ConfigError("equalizer: n_fb must be in [0, 40]");
  if (!(lambda > 0.9 && lambda <= 1.0))
    throw ConfigError("equalizer: lambda must be in (0.9, 1]");
  if (!(delta > 0.0)) throw ConfigError("equalizer: delta must be positive");
  if (sps != 2) throw ConfigError("equalizer: only sps = 2 is supported");
  if (pll_den[0] != 1.0) throw ConfigError("equalizer: pll_den[0] must be 1");
}

EqualizerState make_equalizer_state(const EqualizerConfig& cfg) {
  cfg.validate();
  EqualizerState st;
  st.n_ff = cfg.n_ff;
  st.n_fb = cfg.n_fb;
  st.w.assign(static_cast<std::size_t>(st.n()), Complex{0.0, 0.0});
  st.w[static_cast<std::size_t>(cfg.n_ff / 2)] = Complex{1.0, 0.0};
  st.P.assign(static_cast<std::size_t>(st.n()) * st.n(), Complex{0.0, 0.0});
  for (int i = 0; i < st.n(); ++i) st.P[static_cast<std::size_t>(i) * st.n() + i] = 1.0 / cfg.delta;
  st.pll_num = cfg.pll_num;
  st.pll_den = cfg.pll_den;
  return st;
}

void rls_step(EqualizerState& st, std::span<const Complex> u, Complex err, double lambda) {
  const int n = st.n();
  if (static_cast<int>(u.size()) != n) throw ConfigError("rls_step: regressor size mismatch");

  // pi = P u; denom = lambda + u^H P u (real for Hermitian P).
  static thread_local std::vector<Complex> pi;
  pi.assign(static_cast<std::size_t>(n), Complex{0.0, 0.0});
  for (int i = 0; i < n; ++i) {
    Complex acc{0.0, 0.0};
    const Complex* row = st.P.data() + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) acc += row[j] * u[j];
    pi[static_cast<std::size_t>(i)] = acc;
  }
  double denom = lambda;
  for (int i = 0; i < n; ++i)
    denom += (std::conj(u[i]) * pi[static_cast<std::size_t>(i)]).real();
  if (!(denom > 0.0) || !std::isfinite(denom))
    throw NumericalError("rls_step: update denominator is not positive");

  for (int i = 0; i < n; ++i) {
    const Complex g = pi[static_cast<std::size_t>(i)] / denom;
    st.w[static_cast<std::size_t>(i)] += g * std::conj(err);
    Complex* row = st.P.data() + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) row[j] = (row[j] - g * std::conj(pi[static_cast<std::size_t>(j)])) / lambda;
  }
  // Re-impose Hermitian symmetry so roundoff cannot accumulate.
  for (int i = 0; i < n; ++i) {
    Complex* rowi = st.P.data() + static_cast<std::size_t>(i) * n;
    rowi[i] = Complex{rowi[i].real(), 0.0};
    for (int j = i + 1; j < n; ++j) {
      Complex* rowj = st.P.data() + static_cast<std::size_t>(j) * n;
      const Complex avg = 0.5 * (rowi[j] + std::conj(rowj[i]));
      rowi[j] = avg;
      rowj[i] = std::conj(avg);
    }
  }
}

double pll_step(EqualizerState& st, double phase_err) {
  const auto& b = st.pll_num;
  const auto& a = st.pll_den;
  const double out = b[0] * phase_err + b[1] * st.phi_hist[0] + b[2] * st.phi_hist[1] -
                     a[1] * st.theta_hist[0] - a[2] * st.theta_hist[1];
  st.phi_hist[1] = st.phi_hist[0];
  st.phi_hist[0] = phase_err;
  st.theta_hist[1] = st.theta_hist[0];
  st.theta_hist[0] = out;
  st.theta = out;
  return out;
}

Waveform front_end(const Waveform& rx, const PacketConfig& cfg, const SyncResult& sync) {
  cfg.validate();
  if (rx.kind != WaveformKind::PassbandReal)
    throw ConfigError("front_end: passband real input required");
  const double fs = cfg.fs_hz > 0.0 ? cfg.fs_hz : 8.0 * cfg.fb_hz;
  const int L = cfg.sps();
  if (L % 2 != 0) throw ConfigError("front_end: fs/fb must be even for 2 sps output");
  const int half = L / 2;

  // Undo Doppler first; sync indices live on the received grid, so map them.
  const double a = sync.doppler_factor;
  std::vector<double> x;
  std::int64_t start = sync.start_sample;
  if (a != 1.0) {
    x = kernels::resample(rx.real, 1.0 / a);
    start = std::llround(static_cast<double>(sync.start_sample) * a);
  } else {
    x = rx.real;
  }
  if (start < 0 || start >= static_cast<std::int64_t>(x.size()))
    throw SyncNotFoundError("front_end: sync start lies outside the waveform");

  const int lead =
      static_cast<int>(std::min<std::int64_t>(kLeadHalfSymbols, start / half));
  const std::int64_t g0 = start - static_cast<std::int64_t>(lead) * half;

  // Mixer phase is zero at the data-segment origin (span*L/2 before symbol 0),
  // matching the transmit upconverter's reference.
  const std::int64_t data_origin = start - static_cast<std::int64_t>(cfg.span_symbols) * L / 2;
  std::vector<double> seg(x.begin() + g0, x.end());
  std::vector<Complex> bb = kernels::mix_down(seg, cfg.fc_hz / fs, data_origin - g0);

  // Complex-envelope gain 2 folded into the taps; stopband is set by the
  // post-decimation image at 2 fb - passband edge.
  const double f_pass = cfg.fb_hz * (1.0 + cfg.rolloff) / 2.0;
  const double f_stop = cfg.fb_hz * (3.0 - cfg.rolloff) / 2.0;
  std::vector<double> lpf = kaiser_lowpass(fs, f_pass, f_stop, 80.0);
  for (double& h : lpf) h *= 2.0;
  const std::vector<Complex> filt = kernels::fir_centered(bb, lpf);

  std::vector<Complex> out;
  out.reserve(filt.size() / static_cast<std::size_t>(half) + 1);
  for (std::size_t i = 0; i < filt.size(); i += static_cast<std::size_t>(half))
    out.push_back(filt[i]);

  Waveform w = make_baseband(std::move(out), 2.0 * cfg.fb_hz);
  w.first_symbol_index = lead;
  return w;
}

EqualizeResult equalize_packet(const Waveform& bb2, const SymbolFrame& frame,
                               const Constellation& cons, const EqualizerConfig& ecfg) {
  ecfg.validate();
  if (bb2.kind != WaveformKind::BasebandComplex)
    throw ConfigError("equalize_packet: baseband complex input required");
  if (!bb2.first_symbol_index)
    throw ConfigError("equalize_packet: baseband lacks first_symbol_index");

  const std::vector<Complex>& x = bb2.cplx;
  const std::int64_t fsi = *bb2.first_symbol_index;
  const int n_ff = ecfg.n_ff;
  const int n_fb = ecfg.n_fb;
  const int n = n_ff + n_fb;
  const std::int64_t n_train = static_cast<std::int64_t>(frame.train.size());
  const std::int64_t n_total = n_train + static_cast<std::int64_t>(frame.payload.size());
  if (n_total == 0) throw ConfigError("equalize_packet: empty frame");

  const std::int64_t first_tap = fsi + n_ff / 2 - (n_ff - 1);
  const std::int64_t last_tap = fsi + 2 * (n_total - 1) + n_ff / 2;
  if (first_tap < 0 || last_tap >= static_cast<std::int64_t>(x.size()))
    throw ConfigError("equalize_packet: baseband too short for the frame");

  double rms = 0.0;
  for (const Complex& p : cons.points) rms += std::norm(p);
  rms = std::sqrt(rms / static_cast<double>(cons.points.size()));

  EqualizeResult res;
  res.n_train = static_cast<int>(n_train);
  res.records.reserve(static_cast<std::size_t>(n_total));
  res.state = make_equalizer_state(ecfg);
  EqualizerState& st = res.state;

  std::vector<Complex> u(static_cast<std::size_t>(n));
  std::vector<Complex> fb(static_cast<std::size_t>(n_fb), Complex{0.0, 0.0});
  std::vector<double> ring(kDivergenceWindow, 0.0);
  double ring_sum = 0.0;
  int ring_count = 0;
  int ring_pos = 0;

  for (std::int64_t k = 0; k < n_total; ++k) {
    const std::int64_t base = fsi + 2 * k + n_ff / 2;
    const Complex rot = std::polar(1.0, -st.theta);
    for (int i = 0; i < n_ff; ++i)
      u[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(base - i)] * rot;
    for (int j = 0; j < n_fb; ++j) u[static_cast<std::size_t>(n_ff + j)] = fb[static_cast<std::size_t>(j)];

    Complex y{0.0, 0.0};
    for (int i = 0; i < n; ++i) y += std::conj(st.w[static_cast<std::size_t>(i)]) * u[static_cast<std::size_t>(i)];

    const bool training = k < n_train;
    const Complex d = training ? frame.train[static_cast<std::size_t>(k)]
                               : cons.points[static_cast<std::size_t>(slice_index(cons, y))];
    const Complex e = d - y;
    const double theta_used = st.theta;

    rls_step(st, u, e, ecfg.lambda);
    pll_step(st, std::arg(y * std::conj(d)));

    for (int j = n_fb - 1; j > 0; --j) fb[static_cast<std::size_t>(j)] = fb[static_cast<std::size_t>(j - 1)];
    if (n_fb > 0) fb[0] = d;

    res.records.push_back({k, y, d, e, theta_used, training ? 'T' : 'D'});

    const double ae = std::abs(e);
    if (!std::isfinite(ae)) throw NumericalError("equalize_packet: non-finite error");
    if (ring_count == kDivergenceWindow)
      ring_sum -= ring[static_cast<std::size_t>(ring_pos)];
    else
      ++ring_count;
    ring[static_cast<std::size_t>(ring_pos)] = ae;
    ring_sum += ae;
    ring_pos = (ring_pos + 1) % kDivergenceWindow;
    if (ring_count == kDivergenceWindow &&
        ring_sum / kDivergenceWindow > kDivergenceFactor * rms) {
      char msg[128];
      std::snprintf(msg, sizeof msg,
                    "equalizer diverged at symbol %lld (trailing mean |e| = %.3f)",
                    static_cast<long long>(k), ring_sum / kDivergenceWindow);
      throw DivergenceError(msg);
    }
  }

  std::vector<Complex> payload_d;
  payload_d.reserve(static_cast<std::size_t>(n_total - n_train));
  for (std::int64_t k = n_train; k < n_total; ++k)
    payload_d.push_back(res.records[static_cast<std::size_t>(k)].d);
  res.payload_bits = demap_symbols(payload_d, cons);
  return res;
}

}  // namespace sono
