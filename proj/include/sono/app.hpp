#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sono/channel.hpp"
#include "sono/equalizer.hpp"
#include "sono/metrics.hpp"
#include "sono/packet.hpp"
#include "sono/sync.hpp"
#include "sono/types.hpp"

namespace sono {

// Strict parse: every key must be known and well-typed; errors name the key.
PacketConfig packet_config_from_json(const nlohmann::json& j);
PacketConfig load_packet_config(const std::string& path);

struct PacketOverrides {
  std::optional<std::uint64_t> seed;
  std::string preamble;      // empty keeps the config's choice
  bool paper_scale = false;  // 10000 training / 40000 payload symbols
};
void apply_overrides(PacketConfig& cfg, const PacketOverrides& o);

// Builtin preset name, else a channel-model JSON file path.
ChannelModel resolve_channel(const std::string& name_or_path);

// Full transmit chain for one packet: frame, preamble, shaping, upconversion.
Waveform build_packet(const PacketConfig& cfg);

struct DecodeOutput {
  SyncResult sync;
  EqualizeResult eq;
  BerResult ber;
  double evm_percent = 0.0;
  std::vector<double> mse_db;
  nlohmann::json report;  // everything above, serialized (no timestamps)
};

// Sync, front end, equalize, score against the frame regenerated from cfg.
// Throws the module errors (SyncNotFoundError, DivergenceError, ...).
DecodeOutput decode_packet(const Waveform& rx, const PacketConfig& cfg,
                           const EqualizerConfig& ecfg);

struct GenArgs {
  std::string config_path;
  std::string out_path;
  PacketOverrides over;
};

struct ChanArgs {
  std::string in_path;
  std::string out_path;
  std::string channel;  // preset name or file
  std::optional<double> snr_db;
  std::optional<double> doppler;
  std::optional<std::uint64_t> seed;
};

struct RxArgs {
  std::string in_path;
  std::string config_path;
  std::string out_dir;
  PacketOverrides over;
  EqualizerConfig eq;
};

struct ExperimentArgs {
  std::string spec_path;
  std::string out_dir;
  int threads = 0;  // 0 keeps the OpenMP default
};

int cmd_gen(const GenArgs& args);
int cmd_chan(const ChanArgs& args);
int cmd_rx(const RxArgs& args);
int cmd_experiment(const ExperimentArgs& args);
int cmd_presets_list();

// Parse argv (program name already stripped), dispatch, and map errors to
// exit codes: 0 ok, 2 config, 3 sync, 4 divergence/numerical, 5 I/O.
int run_cli(std::vector<std::string> args);

}  // namespace sono
