#pragma once

#include <array>
#include <cstdint>

#include "sono/packet.hpp"
#include "sono/types.hpp"

namespace sono {

// Generation parameters for one preamble waveform.
struct PreambleSpec {
  PreambleKind kind = PreambleKind::Barker13;
  double duration_s = 0.0;   // chirp duration; ignored for Barker
  double f_lo_hz = 0.0;      // chirp band
  double f_hi_hz = 0.0;
  double fc_hz = 0.0;        // Barker carrier
  double fb_hz = 0.0;        // Barker chip rate
  double rolloff = 0.8;      // Barker chip shaping
  int span_symbols = 16;
};

// Defaults derived from a packet config: Barker at (fc, fb); quadratic chirp
// of 10 us sweeping fc -/+ fb/2; hyperbolic pair of 100 us over
// [max(0.1 fc, fc - fb/2), fc + fb/2].
PreambleSpec preamble_spec_for(const PacketConfig& cfg);

// The 13-chip Barker sequence used for the short preamble.
std::array<int, 13> barker13();

Waveform gen_barker(const PreambleSpec& spec, double fs_hz);
Waveform gen_quadratic_chirp(const PreambleSpec& spec, double fs_hz);
// One hyperbolic chirp; up=false gives the time-reversed (descending) sweep.
Waveform gen_hyperbolic_single(const PreambleSpec& spec, double fs_hz, bool up);
// Superimposed pair (up + down) / 2; peak amplitude <= 1.
Waveform gen_hyperbolic_pair(const PreambleSpec& spec, double fs_hz);
Waveform gen_preamble(const PreambleSpec& spec, double fs_hz);

struct SyncResult {
  std::int64_t start_sample = 0;  // first data-symbol instant in the rx stream
  double doppler_factor = 1.0;
  double peak_metric = 0.0;       // normalized correlation in [0, 1]
  bool doppler_out_of_range = false;
};

struct SearchWindow {
  std::int64_t lo = 0;
  std::int64_t hi = -1;  // exclusive template-start bound; < 0 means "to the end"
};

struct DetectParams {
  double band_center_hz = 0.0;     // quadrature mix frequency for the envelopes
  double band_halfwidth_hz = 0.0;  // envelope lowpass edge
  std::int64_t first_symbol_offset = 0;  // template start -> first symbol instant
  double threshold = 0.4;
};

DetectParams detect_params_for(const PacketConfig& cfg, const PreambleSpec& spec,
                               std::size_t preamble_len);

// Normalized complex-envelope correlation against the template. Amplitude
// invariant; throws SyncNotFoundError when the best metric is below threshold.
SyncResult detect_preamble(const Waveform& rx, const Waveform& tmpl, SearchWindow window,
                           const DetectParams& params);

// Differential delay between the up and down hyperbolic sweeps, converted to a
// resampling factor via factor = 1 + dtau / t_eff with
// t_eff = T (f_lo + f_hi) / (f_hi - f_lo) (200 us for the default pair).
double hyperbolic_t_eff(const PreambleSpec& spec);
double estimate_doppler(const Waveform& rx, const PreambleSpec& spec, SearchWindow window);

}  // namespace sono
