#include "sono/channel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "sono/filters.hpp"
#include "sono/kernels.hpp"

namespace sono {

namespace {

constexpr int kAttenTaps = 255;
constexpr int kTransducerTaps = 255;
constexpr int kHilbertTaps = 201;

std::vector<double> transducer_fir(const Transducer& t, double fs) {
  const double half = 0.5 * t.bw10_hz;
  return fir_from_magnitude(
      [&](double f) {
        const double u = (f - t.center_hz) / half;
        return std::pow(10.0, -0.5 * u * u);  // -10 dB at u = +-1
      },
      kTransducerTaps, fs);
}

std::vector<double> atten_fir(const ChannelModel& ch, double fs) {
  return fir_from_magnitude(
      [&](double f) {
        const double db =
            ch.atten_db_per_cm_mhz * ch.path_cm * std::pow(f / 1e6, ch.atten_exponent);
        return std::pow(10.0, -db / 20.0);
      },
      kAttenTaps, fs);
}

bool taps_are_identity(const std::vector<ChannelTap>& taps) {
  return taps.size() == 1 && taps[0].delay_s == 0.0 && taps[0].gain == Complex{1.0, 0.0};
}

std::vector<double> multipath(const std::vector<double>& x, const std::vector<ChannelTap>& taps,
                              double fs) {
  std::int64_t max_d = 0;
  bool need_hilbert = false;
  for (const ChannelTap& t : taps) {
    max_d = std::max<std::int64_t>(max_d, std::llround(t.delay_s * fs));
    if (std::abs(t.gain.imag()) > 1e-12) need_hilbert = true;
  }
  std::vector<double> xh;
  if (need_hilbert) xh = kernels::fir_centered(x, hilbert_fir(kHilbertTaps));

  std::vector<double> y(x.size() + static_cast<std::size_t>(max_d), 0.0);
  for (const ChannelTap& t : taps) {
    const std::int64_t d = std::llround(t.delay_s * fs);
    const double gr = t.gain.real();
    const double gi = t.gain.imag();
    // Re{g * analytic(x)} = Re(g) x - Im(g) H{x}, delayed by d samples.
    if (need_hilbert) {
      for (std::size_t n = 0; n < x.size(); ++n) y[n + d] += gr * x[n] - gi * xh[n];
    } else {
      for (std::size_t n = 0; n < x.size(); ++n) y[n + d] += gr * x[n];
    }
  }
  return y;
}

std::pair<double, double> resolve_band(const ChannelModel& ch, double fs) {
  double lo = ch.band_lo_hz, hi = ch.band_hi_hz;
  if (lo == 0.0 && hi == 0.0) {
    if (!ch.transducer)
      throw ConfigError("channel: snr_db set but no measurement band (band_lo_hz/band_hi_hz "
                        "or transducer required)");
    lo = ch.transducer->center_hz - 0.5 * ch.transducer->bw10_hz;
    hi = ch.transducer->center_hz + 0.5 * ch.transducer->bw10_hz;
  }
  lo = std::max(lo, 0.0);
  hi = std::min(hi, 0.49 * fs);
  if (!(hi > lo)) throw ConfigError("channel: empty SNR measurement band");
  return {lo, hi};
}

}  // namespace

double band_power(std::span<const double> x, double f_lo_hz, double f_hi_hz, double fs_hz) {
  const double f0 = 0.5 * (f_lo_hz + f_hi_hz);
  const double hw = 0.5 * (f_hi_hz - f_lo_hz);
  const std::vector<double> h = kaiser_lowpass(fs_hz, hw, std::min(hw * 1.25, 0.499 * fs_hz), 60.0);
  const std::vector<Complex> env = kernels::fir_centered(kernels::mix_down(x, f0 / fs_hz, 0), h);
  // Trim the filter transient at both ends when there is room.
  std::size_t margin = h.size() / 2;
  if (env.size() <= 3 * margin) margin = 0;
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t i = margin; i < env.size() - margin; ++i, ++n) acc += std::norm(env[i]);
  return n > 0 ? acc / static_cast<double>(n) : 0.0;
}

void ChannelModel::validate() const {
  if (taps.empty()) throw ConfigError("channel: taps must not be empty");
  for (const ChannelTap& t : taps)
    if (t.delay_s < 0.0) throw ConfigError("channel: tap delay_s must be >= 0");
  if (atten_db_per_cm_mhz < 0.0 || path_cm < 0.0)
    throw ConfigError("channel: attenuation parameters must be >= 0");
  if (!(doppler_factor > 0.95 && doppler_factor < 1.05))
    throw ConfigError("channel: doppler_factor outside (0.95, 1.05)");
  if (transducer && !(transducer->center_hz > 0.0 && transducer->bw10_hz > 0.0))
    throw ConfigError("channel: transducer center_hz and bw10_hz must be positive");
}

Waveform apply_channel(const Waveform& tx, const ChannelModel& ch) {
  ch.validate();
  if (tx.kind != WaveformKind::PassbandReal)
    throw ConfigError("apply_channel: passband real input required");
  if (!(tx.fs_hz > 0.0)) throw ConfigError("apply_channel: fs not set");
  const double fs = tx.fs_hz;

  std::vector<double> x = tx.real;
  if (ch.transducer) x = kernels::fir_centered(x, transducer_fir(*ch.transducer, fs));
  if (ch.atten_db_per_cm_mhz > 0.0 && ch.path_cm > 0.0)
    x = kernels::fir_centered(x, atten_fir(ch, fs));
  if (!taps_are_identity(ch.taps)) x = multipath(x, ch.taps, fs);
  if (ch.doppler_factor != 1.0) x = kernels::resample(x, ch.doppler_factor);

  if (std::isfinite(ch.snr_db)) {
    const auto [lo, hi] = resolve_band(ch, fs);
    const double p_sig = band_power(x, lo, hi, fs);
    if (!(p_sig > 0.0)) throw ConfigError("channel: cannot set SNR on an all-zero signal");
    GaussianSource gauss(ch.seed);
    std::vector<double> noise(x.size());
    for (double& v : noise) v = gauss.next();
    const double p_noise = band_power(noise, lo, hi, fs);
    const double sigma = std::sqrt(p_sig / (p_noise * std::pow(10.0, ch.snr_db / 10.0)));
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += sigma * noise[i];
  }

  Waveform out = make_passband(std::move(x), fs);
  // Group delays are compensated and the direct path keeps its position, so
  // symbol instants survive everything except resampling.
  if (ch.doppler_factor == 1.0) out.first_symbol_index = tx.first_symbol_index;
  return out;
}

std::vector<std::string> preset_names() {
  return {"ideal", "water_120m", "pork_loin", "beef_liver"};
}

ChannelModel preset(const std::string& name) {
  ChannelModel ch;
  ch.name = name;
  if (name == "ideal") {
    ch.seed = 1;
    return ch;
  }
  if (name == "water_120m") {
    // Water tank path: wideband transducer pair around 20 MHz, weak tank
    // reverberation, quadratic absorption over a 1.9 cm standoff.
    ch.transducer = Transducer{20e6, 20e6};
    ch.atten_db_per_cm_mhz = 0.0022;
    ch.atten_exponent = 2.0;
    ch.path_cm = 1.9;
    ch.taps = {{0.0, {1.0, 0.0}},
               {1.1e-6, {0.029, -0.0746}},
               {2.4e-6, {0.0186, 0.0235}}};
    ch.snr_db = 28.0;
    ch.seed = 2;
    return ch;
  }
  if (name == "pork_loin") {
    // 5 MHz immersion transducers; effective tissue path is the transducer
    // separation less the coupling standoff.
    ch.transducer = Transducer{5e6, 5e6};
    ch.atten_db_per_cm_mhz = 0.6;
    ch.atten_exponent = 1.05;
    ch.path_cm = 4.5;
    ch.taps = {{0.0, {1.0, 0.0}},
               {0.4e-6, {0.0765, 0.0644}},
               {0.9e-6, {-0.0252, -0.0432}},
               {1.6e-6, {0.0067, 0.0241}}};
    ch.snr_db = 30.0;
    ch.seed = 3;
    return ch;
  }
  if (name == "beef_liver") {
    ch.transducer = Transducer{5e6, 5e6};
    ch.atten_db_per_cm_mhz = 0.5;
    ch.atten_exponent = 1.1;
    ch.path_cm = 4.8;
    ch.taps = {{0.0, {1.0, 0.0}},
               {0.3e-6, {0.1053, -0.0575}},
               {0.7e-6, {-0.0533, 0.0597}},
               {1.2e-6, {0.0249, 0.0313}},
               {1.9e-6, {-0.0045, -0.0195}}};
    ch.snr_db = 30.0;
    ch.seed = 4;
    return ch;
  }
  throw ConfigError("unknown channel preset: " + name);
}

nlohmann::json channel_to_json(const ChannelModel& ch) {
  nlohmann::json j;
  j["name"] = ch.name;
  j["taps"] = nlohmann::json::array();
  for (const ChannelTap& t : ch.taps)
    j["taps"].push_back({{"delay_s", t.delay_s}, {"gain_re", t.gain.real()}, {"gain_im", t.gain.imag()}});
  j["atten_db_per_cm_mhz"] = ch.atten_db_per_cm_mhz;
  j["atten_exponent"] = ch.atten_exponent;
  j["path_cm"] = ch.path_cm;
  j["doppler_factor"] = ch.doppler_factor;
  if (std::isfinite(ch.snr_db))
    j["snr_db"] = ch.snr_db;
  else
    j["snr_db"] = nullptr;
  if (ch.transducer)
    j["transducer"] = {{"center_hz", ch.transducer->center_hz}, {"bw10_hz", ch.transducer->bw10_hz}};
  else
    j["transducer"] = nullptr;
  if (ch.band_lo_hz != 0.0 || ch.band_hi_hz != 0.0) {
    j["band_lo_hz"] = ch.band_lo_hz;
    j["band_hi_hz"] = ch.band_hi_hz;
  }
  j["seed"] = ch.seed;
  return j;
}

ChannelModel channel_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("channel model: JSON object required");
  ChannelModel ch;
  try {
    if (j.contains("name")) ch.name = j["name"].get<std::string>();
    if (j.contains("taps")) {
      ch.taps.clear();
      for (const auto& t : j["taps"])
        ch.taps.push_back({t.at("delay_s").get<double>(),
                           Complex(t.at("gain_re").get<double>(),
                                   t.value("gain_im", 0.0))});
    }
    if (j.contains("atten_db_per_cm_mhz"))
      ch.atten_db_per_cm_mhz = j["atten_db_per_cm_mhz"].get<double>();
    if (j.contains("atten_exponent")) ch.atten_exponent = j["atten_exponent"].get<double>();
    if (j.contains("path_cm")) ch.path_cm = j["path_cm"].get<double>();
    if (j.contains("doppler_factor")) ch.doppler_factor = j["doppler_factor"].get<double>();
    if (j.contains("snr_db") && !j["snr_db"].is_null()) ch.snr_db = j["snr_db"].get<double>();
    if (j.contains("transducer") && !j["transducer"].is_null())
      ch.transducer = Transducer{j["transducer"].at("center_hz").get<double>(),
                                 j["transducer"].at("bw10_hz").get<double>()};
    if (j.contains("band_lo_hz")) ch.band_lo_hz = j["band_lo_hz"].get<double>();
    if (j.contains("band_hi_hz")) ch.band_hi_hz = j["band_hi_hz"].get<double>();
    if (j.contains("seed")) ch.seed = j["seed"].get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed channel model: ") + e.what());
  }
  ch.validate();
  return ch;
}

ChannelModel load_channel_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open channel file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed channel file " + path + ": " + e.what());
  }
  return channel_from_json(j);
}

}  // namespace sono
