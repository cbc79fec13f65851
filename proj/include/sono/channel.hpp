#pragma once

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sono/types.hpp"

namespace sono {

struct ChannelTap {
  double delay_s = 0.0;
  Complex gain{1.0, 0.0};
};

// Transducer passband: Gaussian magnitude with -10 dB points at
// center +- bw10/2, realized as a linear-phase FIR.
struct Transducer {
  double center_hz = 0.0;
  double bw10_hz = 0.0;
};

// Parametric propagation model. Stages apply in order: transducer bandpass,
// frequency-dependent attenuation (atten * path_cm * (f/1MHz)^exponent dB),
// multipath tap sum, Doppler resampling, then AWGN scaled to hit snr_db
// measured inside [band_lo, band_hi] (defaulting to the transducer -10 dB
// band). Stages that are exactly identity are skipped, so the identity model
// passes the input through untouched.
struct ChannelModel {
  std::string name = "custom";
  std::vector<ChannelTap> taps{{0.0, {1.0, 0.0}}};
  double atten_db_per_cm_mhz = 0.0;
  double atten_exponent = 1.0;
  double path_cm = 0.0;
  double doppler_factor = 1.0;
  double snr_db = std::numeric_limits<double>::infinity();
  std::optional<Transducer> transducer;
  double band_lo_hz = 0.0;  // SNR measurement band; both 0 -> derive
  double band_hi_hz = 0.0;
  std::uint64_t seed = 1;

  void validate() const;
};

Waveform apply_channel(const Waveform& tx, const ChannelModel& ch);

// In-band power through the same quadrature-mix + lowpass operator the noise
// scaling uses, so measured SNR matches the requested one by construction.
double band_power(std::span<const double> x, double f_lo_hz, double f_hi_hz, double fs_hz);

std::vector<std::string> preset_names();
ChannelModel preset(const std::string& name);

nlohmann::json channel_to_json(const ChannelModel& ch);
ChannelModel channel_from_json(const nlohmann::json& j);
ChannelModel load_channel_file(const std::string& path);

}  // namespace sono
