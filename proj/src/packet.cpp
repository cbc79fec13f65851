#include "sono/packet.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>

#include "sono/filters.hpp"
#include "sono/kernels.hpp"

namespace sono {

PreambleKind preamble_from_name(const std::string& name) {
  if (name == "barker") return PreambleKind::Barker13;
  if (name == "qchirp") return PreambleKind::QuadraticChirp;
  if (name == "hchirp") return PreambleKind::HyperbolicUpDown;
  throw ConfigError("unknown preamble kind: " + name + " (expected barker|qchirp|hchirp)");
}

std::string preamble_name(PreambleKind kind) {
  switch (kind) {
    case PreambleKind::Barker13: return "barker";
    case PreambleKind::QuadraticChirp: return "qchirp";
    case PreambleKind::HyperbolicUpDown: return "hchirp";
  }
  return "?";
}

void PacketConfig::validate() const {
  if (!(fb_hz > 0.0)) throw ConfigError("fb_hz must be positive");
  if (!(fc_hz > 0.0)) throw ConfigError("fc_hz must be positive");
  const double fs = fs_hz > 0.0 ? fs_hz : 8.0 * fb_hz;
  const double ratio = fs / fb_hz;
  const int isps = static_cast<int>(std::lround(ratio));
  if (std::abs(ratio - isps) > 1e-9 || isps < 2)
    throw ConfigError("fs_hz must be an integer multiple of fb_hz");
  if (rolloff < 0.0 || rolloff > 1.0) throw ConfigError("rolloff outside [0, 1]");
  if (n_train < 0 || n_payload < 0) throw ConfigError("n_train/n_payload must be >= 0");
  if (guard_s < 0.0) throw ConfigError("guard_s must be >= 0");
  if (span_symbols < 8 || span_symbols % 2 != 0)
    throw ConfigError("span_symbols must be even and >= 8");
  const double half_bw = 0.5 * occupied_bw_hz();
  if (fs <= 2.0 * (fc_hz + half_bw))
    throw ConfigError("fs_hz too low: must exceed 2*(fc_hz + fb_hz*(1+rolloff)/2)");
  if (fc_hz - half_bw < 0.0)
    std::cerr << "warning: band edge fc - fb*(1+rolloff)/2 is below 0 Hz; "
                 "spectrum folds at DC\n";
}

int PacketConfig::sps() const {
  const double fs = fs_hz > 0.0 ? fs_hz : 8.0 * fb_hz;
  return static_cast<int>(std::lround(fs / fb_hz));
}

int PacketConfig::bits_per_symbol() const {
  switch (format) {
    case ConstellationKind::QPSK: return 2;
    case ConstellationKind::PSK8: return 3;
    case ConstellationKind::QAM16: return 4;
    case ConstellationKind::QAM64: return 6;
  }
  return 0;
}

SymbolFrame make_frame(const PacketConfig& cfg) {
  const Constellation c = make_constellation(cfg.format);
  const int k = c.bits_per_symbol;
  BitSource src(cfg.seed);
  std::vector<std::uint8_t> bits =
      src.take(static_cast<std::size_t>(cfg.n_train + cfg.n_payload) * k);

  SymbolFrame f;
  f.train_bits.assign(bits.begin(), bits.begin() + static_cast<std::ptrdiff_t>(cfg.n_train) * k);
  f.payload_bits.assign(bits.begin() + static_cast<std::ptrdiff_t>(cfg.n_train) * k, bits.end());
  f.train = map_bits(f.train_bits, c);
  f.payload = map_bits(f.payload_bits, c);
  return f;
}

Waveform pulse_shape(std::span<const Complex> symbols, const PacketConfig& cfg) {
  const double fs = cfg.fs_hz > 0.0 ? cfg.fs_hz : 8.0 * cfg.fb_hz;
  const int L = cfg.sps();
  const std::vector<double> h = design_rc_filter(cfg.fb_hz, cfg.rolloff, fs, cfg.span_symbols);

  std::vector<Complex> up(symbols.size() * static_cast<std::size_t>(L), Complex{});
  for (std::size_t k = 0; k < symbols.size(); ++k) up[k * L] = symbols[k];

  Waveform bb = make_baseband(kernels::convolve_full(up, h), fs);
  bb.first_symbol_index = static_cast<std::int64_t>(cfg.span_symbols) * L / 2;
  return bb;
}

Waveform upconvert(const Waveform& bb, double fc_hz, double bandwidth_hz) {
  if (bb.kind != WaveformKind::BasebandComplex)
    throw ConfigError("upconvert: input must be baseband complex");
  if (!(bb.fs_hz > 0.0)) throw ConfigError("upconvert: fs not set");
  if (bb.fs_hz <= 2.0 * (fc_hz + 0.5 * bandwidth_hz))
    throw ConfigError("upconvert: aliasing, fs must exceed 2*(fc + bandwidth/2)");
  if (fc_hz - 0.5 * bandwidth_hz < 0.0)
    std::cerr << "warning: upconvert band extends below 0 Hz; spectrum folds at DC\n";

  Waveform pb = make_passband(kernels::mix_up_real(bb.cplx, fc_hz / bb.fs_hz, 0), bb.fs_hz);
  pb.first_symbol_index = bb.first_symbol_index;
  return pb;
}

Waveform downconvert(const Waveform& pb, double fc_hz, double f_pass_hz, double f_stop_hz,
                     std::int64_t phase_ref) {
  if (pb.kind != WaveformKind::PassbandReal)
    throw ConfigError("downconvert: input must be passband real");
  std::vector<double> h = kaiser_lowpass(pb.fs_hz, f_pass_hz, f_stop_hz, 80.0);
  for (double& v : h) v *= 2.0;  // complex-envelope convention
  Waveform bb = make_baseband(
      kernels::fir_centered(kernels::mix_down(pb.real, fc_hz / pb.fs_hz, phase_ref), h),
      pb.fs_hz);
  bb.first_symbol_index = pb.first_symbol_index;
  return bb;
}

std::int64_t packet_data_offset(const PacketConfig& cfg, std::size_t preamble_len) {
  const double fs = cfg.fs_hz > 0.0 ? cfg.fs_hz : 8.0 * cfg.fb_hz;
  const std::int64_t guard = std::llround(cfg.guard_s * fs);
  return static_cast<std::int64_t>(preamble_len) + guard +
         static_cast<std::int64_t>(cfg.span_symbols) * cfg.sps() / 2;
}

std::string config_digest(const PacketConfig& cfg) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "fb=%.17g|fc=%.17g|format=%s|fs=%.17g|guard=%.17g|npay=%d|ntrain=%d|"
                "preamble=%s|rolloff=%.17g|seed=%llu|span=%d",
                cfg.fb_hz, cfg.fc_hz, constellation_name(cfg.format).c_str(),
                cfg.fs_hz > 0.0 ? cfg.fs_hz : 8.0 * cfg.fb_hz, cfg.guard_s, cfg.n_payload,
                cfg.n_train, preamble_name(cfg.preamble).c_str(), cfg.rolloff,
                static_cast<unsigned long long>(cfg.seed), cfg.span_symbols);
  // FNV-1a 64-bit
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char* p = buf; *p; ++p) {
    h ^= static_cast<unsigned char>(*p);
    h *= 0x100000001b3ULL;
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

Waveform assemble_packet(const SymbolFrame& frame, const PacketConfig& cfg,
                         const Waveform& preamble) {
  cfg.validate();
  const double fs = cfg.fs_hz > 0.0 ? cfg.fs_hz : 8.0 * cfg.fb_hz;
  if (preamble.kind != WaveformKind::PassbandReal || preamble.fs_hz != fs)
    throw ConfigError("assemble_packet: preamble must be passband real at the packet rate");

  std::vector<Complex> symbols;
  symbols.reserve(frame.train.size() + frame.payload.size());
  symbols.insert(symbols.end(), frame.train.begin(), frame.train.end());
  symbols.insert(symbols.end(), frame.payload.begin(), frame.payload.end());

  const Waveform data_pb = upconvert(pulse_shape(symbols, cfg), cfg.fc_hz, cfg.occupied_bw_hz());

  const std::size_t guard = static_cast<std::size_t>(std::llround(cfg.guard_s * fs));
  std::vector<double> out;
  out.reserve(preamble.real.size() + 2 * guard + data_pb.real.size());
  out.insert(out.end(), preamble.real.begin(), preamble.real.end());
  out.insert(out.end(), guard, 0.0);
  out.insert(out.end(), data_pb.real.begin(), data_pb.real.end());
  out.insert(out.end(), guard, 0.0);

  Waveform pkt = make_passband(std::move(out), fs);
  pkt.first_symbol_index = packet_data_offset(cfg, preamble.real.size());
  return pkt;
}

}  // namespace sono
