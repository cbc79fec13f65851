#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sono/constellation.hpp"
#include "sono/types.hpp"

namespace sono {

enum class PreambleKind { Barker13, QuadraticChirp, HyperbolicUpDown };

PreambleKind preamble_from_name(const std::string& name);  // "barker", "qchirp", "hchirp"
std::string preamble_name(PreambleKind kind);

// Everything needed to generate (and later decode) one packet.
struct PacketConfig {
  double fc_hz = 5e6;
  double fb_hz = 5e6;
  ConstellationKind format = ConstellationKind::QPSK;
  PreambleKind preamble = PreambleKind::Barker13;
  int n_train = 1000;
  int n_payload = 4000;
  double guard_s = 1e-3;
  double rolloff = 0.8;
  double fs_hz = 0.0;  // 0 -> defaults to 8 * fb
  int span_symbols = 16;
  std::uint64_t seed = 1;

  void validate() const;          // throws ConfigError; warns on a low band edge
  int sps() const;                // fs / fb (validated integer)
  int bits_per_symbol() const;
  double occupied_bw_hz() const { return fb_hz * (1.0 + rolloff); }
};

// Known symbols plus the bits they came from, training first.
struct SymbolFrame {
  std::vector<Complex> train;
  std::vector<Complex> payload;
  std::vector<std::uint8_t> train_bits;
  std::vector<std::uint8_t> payload_bits;
};

// Deterministic frame from cfg.seed via the splitmix64 bit source.
SymbolFrame make_frame(const PacketConfig& cfg);

// Zero-stuff to fs and shape with the raised cosine. Output is baseband
// complex with first_symbol_index = span*sps/2 (the filter group delay);
// symbol k sits at first_symbol_index + k*sps.
Waveform pulse_shape(std::span<const Complex> symbols, const PacketConfig& cfg);

// Real passband: y[n] = Re{ bb[n] e^{j 2 pi fc n / fs} }, phase referenced to
// n = 0 of bb. bandwidth_hz (total occupied width) drives the aliasing check.
Waveform upconvert(const Waveform& bb, double fc_hz, double bandwidth_hz = 0.0);

// Quadrature downconversion with gain 2 and a Kaiser lowpass (group delay
// compensated), so downconvert(upconvert(bb)) recovers bb. phase_ref picks the
// sample index at which the mixer phase is zero.
Waveform downconvert(const Waveform& pb, double fc_hz, double f_pass_hz, double f_stop_hz,
                     std::int64_t phase_ref = 0);

// [preamble | guard zeros | passband data | guard zeros]. The preamble must be
// passband real at cfg.fs_hz. first_symbol_index covers the whole packet.
Waveform assemble_packet(const SymbolFrame& frame, const PacketConfig& cfg,
                         const Waveform& preamble);

// Offset from the start of the preamble to the first data-symbol instant.
std::int64_t packet_data_offset(const PacketConfig& cfg, std::size_t preamble_len);

// Stable 64-bit digest of the canonical config serialization (hex string).
std::string config_digest(const PacketConfig& cfg);

}  // namespace sono
