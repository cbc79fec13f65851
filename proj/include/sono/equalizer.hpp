#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "sono/constellation.hpp"
#include "sono/packet.hpp"
#include "sono/sync.hpp"
#include "sono/types.hpp"

namespace sono {

// Fractionally spaced decision-feedback equalizer: n_ff feedforward taps on the
// 2-samples-per-symbol baseband, n_fb feedback taps on past decisions, RLS
// adaptation, and a second-order phase-locked loop wrapped around the carrier
// phase that de-rotates the feedforward regressor.
struct EqualizerConfig {
  int n_ff = 24;
  int n_fb = 12;
  double lambda = 0.995;  // RLS forgetting factor
  double delta = 0.01;    // inverse-correlation init: P = (1/delta) I
  std::array<double, 3> pll_num{0.0011, -0.001, 0.0};
  std::array<double, 3> pll_den{1.0, -2.0, 1.0};
  int sps = 2;  // only 2 is supported

  void validate() const;  // throws ConfigError
};

struct EqualizerState {
  int n_ff = 0;
  int n_fb = 0;
  std::vector<Complex> w;  // n_ff + n_fb weights; output is y = w^H u
  std::vector<Complex> P;  // (n_ff+n_fb)^2 row-major inverse correlation
  double theta = 0.0;      // applied carrier phase, unwrapped
  std::array<double, 2> phi_hist{0.0, 0.0};    // phase error, one/two symbols back
  std::array<double, 2> theta_hist{0.0, 0.0};  // loop output, one/two symbols back
  std::array<double, 3> pll_num{};
  std::array<double, 3> pll_den{};

  int n() const { return n_ff + n_fb; }
};

// Center-spike feedforward init (w[n_ff/2] = 1), P = (1/delta) I.
EqualizerState make_equalizer_state(const EqualizerConfig& cfg);

// One exponentially weighted RLS update for y = w^H u with a-priori error
// err = d - y. Throws NumericalError if the update denominator collapses.
void rls_step(EqualizerState& st, std::span<const Complex> u, Complex err, double lambda);

// One second-order loop update driven by the phase error; returns (and stores)
// the new applied phase.
double pll_step(EqualizerState& st, double phase_err);

// Resample the received passband by 1/doppler_factor, quadrature-downconvert
// with the mixer phase referenced to the data-segment origin, lowpass, and
// decimate to 2 samples per symbol. first_symbol_index points at the first
// training-symbol instant within the returned baseband.
Waveform front_end(const Waveform& rx, const PacketConfig& cfg, const SyncResult& sync);

struct SymbolDecisionRecord {
  std::int64_t k = 0;  // symbol index, training first
  Complex y;           // equalizer soft output
  Complex d;           // decision (known symbol during training)
  Complex e;           // a-priori error d - y
  double theta = 0.0;  // phase applied to this symbol's regressor
  char mode = 'T';     // 'T' training, 'D' decision-directed
};

struct EqualizeResult {
  std::vector<SymbolDecisionRecord> records;  // one per symbol, training first
  std::vector<std::uint8_t> payload_bits;     // demapped payload decisions
  int n_train = 0;
  EqualizerState state;  // final adapted state
};

// Run training-directed then decision-directed equalization over one packet.
// Throws DivergenceError if the trailing mean |e| exceeds twice the
// constellation RMS once 500 symbols of history exist.
EqualizeResult equalize_packet(const Waveform& bb2, const SymbolFrame& frame,
                               const Constellation& cons, const EqualizerConfig& ecfg);

}  // namespace sono
