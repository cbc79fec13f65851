#include "sono/app.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sono/waveform_io.hpp"

namespace fs = std::filesystem;

namespace sono {

namespace {

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    nlohmann::json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed JSON in " + path + ": " + e.what());
  }
}

void make_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

double resolved_fs(const PacketConfig& cfg) {
  return cfg.fs_hz > 0.0 ? cfg.fs_hz : 8.0 * cfg.fb_hz;
}

}  // namespace

PacketConfig packet_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("packet config: JSON object required");
  static const std::set<std::string> known = {"fc_hz",   "fb_hz",    "format", "preamble",
                                              "n_train", "n_payload", "guard_s", "rolloff",
                                              "fs_hz",   "span_symbols", "seed"};
  for (const auto& item : j.items())
    if (!known.count(item.key()))
      throw ConfigError("packet config: unknown key '" + item.key() + "'");

  PacketConfig cfg;
  auto num = [&](const char* key, double& dst) {
    if (!j.contains(key)) return;
    if (!j.at(key).is_number())
      throw ConfigError(std::string("packet config: key '") + key + "' must be a number");
    dst = j.at(key).get<double>();
  };
  auto integer = [&](const char* key, int& dst) {
    if (!j.contains(key)) return;
    if (!j.at(key).is_number_integer())
      throw ConfigError(std::string("packet config: key '") + key + "' must be an integer");
    dst = j.at(key).get<int>();
  };
  num("fc_hz", cfg.fc_hz);
  num("fb_hz", cfg.fb_hz);
  num("guard_s", cfg.guard_s);
  num("rolloff", cfg.rolloff);
  num("fs_hz", cfg.fs_hz);
  integer("n_train", cfg.n_train);
  integer("n_payload", cfg.n_payload);
  integer("span_symbols", cfg.span_symbols);
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer())
      throw ConfigError("packet config: key 'seed' must be an integer");
    cfg.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("format")) {
    if (!j.at("format").is_string())
      throw ConfigError("packet config: key 'format' must be a string");
    cfg.format = constellation_from_name(j.at("format").get<std::string>());
  }
  if (j.contains("preamble")) {
    if (!j.at("preamble").is_string())
      throw ConfigError("packet config: key 'preamble' must be a string");
    cfg.preamble = preamble_from_name(j.at("preamble").get<std::string>());
  }
  cfg.validate();
  return cfg;
}

PacketConfig load_packet_config(const std::string& path) {
  return packet_config_from_json(load_json_file(path));
}

void apply_overrides(PacketConfig& cfg, const PacketOverrides& o) {
  if (o.seed) cfg.seed = *o.seed;
  if (!o.preamble.empty()) cfg.preamble = preamble_from_name(o.preamble);
  if (o.paper_scale) {
    cfg.n_train = 10000;
    cfg.n_payload = 40000;
  }
}

ChannelModel resolve_channel(const std::string& name_or_path) {
  const std::vector<std::string> names = preset_names();
  if (std::find(names.begin(), names.end(), name_or_path) != names.end())
    return preset(name_or_path);
  if (!fs::exists(name_or_path))
    throw ConfigError("unknown channel preset and no such file: " + name_or_path);
  return load_channel_file(name_or_path);
}

Waveform build_packet(const PacketConfig& cfg) {
  cfg.validate();
  const SymbolFrame frame = make_frame(cfg);
  const PreambleSpec spec = preamble_spec_for(cfg);
  const Waveform preamble = gen_preamble(spec, resolved_fs(cfg));
  return assemble_packet(frame, cfg, preamble);
}

DecodeOutput decode_packet(const Waveform& rx, const PacketConfig& cfg,
                           const EqualizerConfig& ecfg) {
  cfg.validate();
  ecfg.validate();
  if (rx.kind != WaveformKind::PassbandReal)
    throw ConfigError("decode_packet: passband real input required");
  const double fs = resolved_fs(cfg);
  if (rx.fs_hz != fs)
    throw ConfigError("decode_packet: waveform sample rate does not match the config");

  const SymbolFrame frame = make_frame(cfg);
  const PreambleSpec spec = preamble_spec_for(cfg);
  const Waveform tmpl = gen_preamble(spec, fs);
  const DetectParams dp = detect_params_for(cfg, spec, tmpl.size());

  // The packet head (preamble + guard) plus a generous slack bounds the search.
  const std::int64_t guard_n = std::llround(cfg.guard_s * fs);
  SearchWindow win;
  win.lo = 0;
  win.hi = std::min<std::int64_t>(static_cast<std::int64_t>(rx.size()),
                                  static_cast<std::int64_t>(tmpl.size()) + guard_n + 200000);

  DecodeOutput out;
  out.sync = detect_preamble(rx, tmpl, win, dp);
  if (cfg.preamble == PreambleKind::HyperbolicUpDown) {
    const double a = estimate_doppler(rx, spec, win);
    if (a > 0.95 && a < 1.05) {
      out.sync.doppler_factor = a;
      // The data offset was added in transmit-grid samples; re-express it on
      // the received (resampled) grid so the front end can map it back exactly.
      out.sync.start_sample +=
          std::llround(static_cast<double>(dp.first_symbol_offset) / a) - dp.first_symbol_offset;
    } else {
      out.sync.doppler_out_of_range = true;
    }
  }

  const Waveform bb2 = front_end(rx, cfg, out.sync);
  const Constellation cons = make_constellation(cfg.format);
  out.eq = equalize_packet(bb2, frame, cons, ecfg);
  out.ber = compute_ber(frame.payload_bits, out.eq.payload_bits);
  out.evm_percent = evm_percent(out.eq.records, out.eq.n_train);
  out.mse_db = mse_trace_db(out.eq.records);

  nlohmann::json& rep = out.report;
  rep["config_digest"] = config_digest(cfg);
  rep["format"] = constellation_name(cfg.format);
  rep["fc_hz"] = cfg.fc_hz;
  rep["fb_hz"] = cfg.fb_hz;
  rep["fs_hz"] = fs;
  rep["data_rate_bps"] = data_rate_bps(cfg);
  rep["n_train"] = cfg.n_train;
  rep["n_payload"] = cfg.n_payload;
  rep["preamble"] = preamble_name(cfg.preamble);
  rep["seed"] = cfg.seed;
  rep["sync"] = {{"start_sample", out.sync.start_sample},
                 {"peak_metric", out.sync.peak_metric},
                 {"doppler_factor", out.sync.doppler_factor},
                 {"doppler_out_of_range", out.sync.doppler_out_of_range}};
  rep["equalizer"] = {{"n_ff", ecfg.n_ff},
                      {"n_fb", ecfg.n_fb},
                      {"lambda", ecfg.lambda},
                      {"delta", ecfg.delta}};
  rep["ber"] = {{"errors", out.ber.errors}, {"bits", out.ber.bits},
                {"value", out.ber.value},   {"upper_bound", out.ber.upper_bound},
                {"exact", out.ber.exact},   {"display", out.ber.display}};
  rep["evm_percent"] = out.evm_percent;
  rep["mse_final_db"] = out.mse_db.back();
  rep["status"] = "ok";
  return out;
}

int cmd_gen(const GenArgs& args) {
  PacketConfig cfg = load_packet_config(args.config_path);
  apply_overrides(cfg, args.over);
  const Waveform pkt = build_packet(cfg);
  nlohmann::json extra;
  extra["tx"] = {{"format", constellation_name(cfg.format)},
                 {"fc_hz", cfg.fc_hz},
                 {"fb_hz", cfg.fb_hz},
                 {"rolloff", cfg.rolloff},
                 {"n_train", cfg.n_train},
                 {"n_payload", cfg.n_payload},
                 {"preamble", preamble_name(cfg.preamble)},
                 {"seed", cfg.seed},
                 {"data_rate_bps", data_rate_bps(cfg)}};
  save_waveform_pair(args.out_path, pkt, config_digest(cfg), extra);
  std::printf("wrote %s: %zu samples @ %.6g MHz, %s, %d+%d symbols, %.6g Mb/s\n",
              args.out_path.c_str(), pkt.size(), resolved_fs(cfg) / 1e6,
              constellation_name(cfg.format).c_str(), cfg.n_train, cfg.n_payload,
              data_rate_bps(cfg) / 1e6);
  return 0;
}

int cmd_chan(const ChanArgs& args) {
  const LoadedWaveform lw = load_waveform_pair(args.in_path);
  if (lw.wave.kind != WaveformKind::PassbandReal)
    throw ConfigError("chan: input must be a passband_real waveform");
  ChannelModel ch = resolve_channel(args.channel);
  if (args.snr_db) ch.snr_db = *args.snr_db;
  if (args.doppler) ch.doppler_factor = *args.doppler;
  if (args.seed) ch.seed = *args.seed;
  // A band-less model (e.g. the ideal preset) can still add calibrated noise:
  // fall back to the occupied band recorded by the transmitter.
  if (std::isfinite(ch.snr_db) && ch.band_lo_hz == 0.0 && ch.band_hi_hz == 0.0 &&
      !ch.transducer && lw.sidecar.contains("tx")) {
    const nlohmann::json& tx = lw.sidecar["tx"];
    if (tx.contains("fc_hz") && tx.contains("fb_hz")) {
      const double hw =
          0.5 * tx["fb_hz"].get<double>() * (1.0 + tx.value("rolloff", 0.8));
      ch.band_lo_hz = std::max(0.0, tx["fc_hz"].get<double>() - hw);
      ch.band_hi_hz = tx["fc_hz"].get<double>() + hw;
    }
  }
  const Waveform rx = apply_channel(lw.wave, ch);
  nlohmann::json extra;
  if (lw.sidecar.contains("tx")) extra["tx"] = lw.sidecar["tx"];
  extra["channel"] = channel_to_json(ch);
  save_waveform_pair(args.out_path, rx, lw.sidecar.at("config_digest").get<std::string>(),
                     extra);
  std::printf("wrote %s: %zu samples through '%s'", args.out_path.c_str(), rx.size(),
              ch.name.c_str());
  if (std::isfinite(ch.snr_db))
    std::printf(" at %.6g dB in-band SNR\n", ch.snr_db);
  else
    std::printf(" (noiseless)\n");
  return 0;
}

int cmd_rx(const RxArgs& args) {
  PacketConfig cfg = load_packet_config(args.config_path);
  apply_overrides(cfg, args.over);
  const LoadedWaveform lw = load_waveform_pair(args.in_path);
  const std::string want = config_digest(cfg);
  const std::string got = lw.sidecar.at("config_digest").get<std::string>();
  if (!got.empty() && got != want)
    std::fprintf(stderr,
                 "warning: waveform config digest %s does not match config %s; decoding anyway\n",
                 got.c_str(), want.c_str());

  const DecodeOutput dec = decode_packet(lw.wave, cfg, args.eq);

  make_out_dir(args.out_dir);
  const fs::path dir(args.out_dir);
  write_text_atomic(dir / "report.json", dec.report.dump(2) + "\n");
  write_mse_csv((dir / "mse_trace.csv").string(), dec.mse_db, kMseWindowSymbols);
  write_constellation_csv((dir / "constellation.csv").string(), dec.eq.records, dec.eq.n_train);

  std::printf("sync: start=%lld metric=%.4f doppler=%.8f\n",
              static_cast<long long>(dec.sync.start_sample), dec.sync.peak_metric,
              dec.sync.doppler_factor);
  std::printf("ber: %s (%lld/%lld)  evm: %.3f%%  mse_final: %.2f dB\n", dec.ber.display.c_str(),
              static_cast<long long>(dec.ber.errors), static_cast<long long>(dec.ber.bits),
              dec.evm_percent, dec.mse_db.back());
  std::printf("wrote %s/report.json, mse_trace.csv, constellation.csv\n", args.out_dir.c_str());
  return 0;
}

namespace {

struct RowPlan {
  std::string label;
  std::string channel_name;
  std::string note;
  PacketConfig cfg;
  ChannelModel ch;
};

RowPlan parse_row(const nlohmann::json& row, std::size_t index, const fs::path& spec_dir,
                  const std::string& scale) {
  if (!row.is_object()) throw ConfigError("experiment: each row must be a JSON object");
  static const std::set<std::string> known = {"label",   "format",      "fc_hz",
                                              "fb_hz",   "fs_hz",       "preamble",
                                              "seed",    "channel",     "channel_file",
                                              "snr_db",  "doppler_factor", "channel_seed",
                                              "note"};
  for (const auto& item : row.items())
    if (!known.count(item.key()))
      throw ConfigError("experiment row " + std::to_string(index) + ": unknown key '" +
                        item.key() + "'");

  RowPlan plan;
  try {
    plan.label = row.value("label", "row" + std::to_string(index));
    plan.note = row.value("note", "");
    plan.cfg.format = constellation_from_name(row.at("format").get<std::string>());
    plan.cfg.fc_hz = row.at("fc_hz").get<double>();
    plan.cfg.fb_hz = row.at("fb_hz").get<double>();
    if (row.contains("fs_hz")) plan.cfg.fs_hz = row.at("fs_hz").get<double>();
    if (row.contains("preamble"))
      plan.cfg.preamble = preamble_from_name(row.at("preamble").get<std::string>());
    if (row.contains("seed")) plan.cfg.seed = row.at("seed").get<std::uint64_t>();
    if (scale == "paper") {
      plan.cfg.n_train = 10000;
      plan.cfg.n_payload = 40000;
    }

    if (row.contains("channel") == row.contains("channel_file"))
      throw ConfigError("experiment row '" + plan.label +
                        "': exactly one of 'channel' or 'channel_file' is required");
    if (row.contains("channel")) {
      plan.ch = preset(row.at("channel").get<std::string>());
    } else {
      fs::path p = row.at("channel_file").get<std::string>();
      if (p.is_relative()) p = spec_dir / p;
      plan.ch = load_channel_file(p.string());
    }
    plan.channel_name = plan.ch.name;
    if (row.contains("snr_db")) {
      if (row.at("snr_db").is_null())
        plan.ch.snr_db = std::numeric_limits<double>::infinity();
      else
        plan.ch.snr_db = row.at("snr_db").get<double>();
    }
    if (row.contains("doppler_factor"))
      plan.ch.doppler_factor = row.at("doppler_factor").get<double>();
    plan.ch.seed = row.contains("channel_seed") ? row.at("channel_seed").get<std::uint64_t>()
                                                : plan.cfg.seed + 1;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("experiment row " + std::to_string(index) + ": " + e.what());
  }
  plan.cfg.validate();
  plan.ch.validate();
  return plan;
}

nlohmann::json run_row(const RowPlan& plan, const EqualizerConfig& ecfg) {
  nlohmann::json r;
  r["label"] = plan.label;
  r["format"] = constellation_name(plan.cfg.format);
  r["fc_hz"] = plan.cfg.fc_hz;
  r["fb_hz"] = plan.cfg.fb_hz;
  r["fs_hz"] = resolved_fs(plan.cfg);
  r["data_rate_bps"] = data_rate_bps(plan.cfg);
  r["channel"] = plan.channel_name;
  if (std::isfinite(plan.ch.snr_db))
    r["snr_db"] = plan.ch.snr_db;
  else
    r["snr_db"] = nullptr;
  r["preamble"] = preamble_name(plan.cfg.preamble);
  r["seed"] = plan.cfg.seed;
  if (!plan.note.empty()) r["note"] = plan.note;
  try {
    const Waveform tx = build_packet(plan.cfg);
    const Waveform rx = apply_channel(tx, plan.ch);
    const DecodeOutput dec = decode_packet(rx, plan.cfg, ecfg);
    r["status"] = "ok";
    r["ber"] = dec.report["ber"];
    r["evm_percent"] = dec.evm_percent;
    r["sync"] = dec.report["sync"];
    r["mse_final_db"] = dec.mse_db.back();
  } catch (const SyncNotFoundError& e) {
    r["status"] = "sync_not_found";
    r["error"] = e.what();
  } catch (const DivergenceError& e) {
    r["status"] = "diverged";
    r["error"] = e.what();
  } catch (const NumericalError& e) {
    r["status"] = "numerical_error";
    r["error"] = e.what();
  } catch (const ConfigError& e) {
    r["status"] = "config_error";
    r["error"] = e.what();
  } catch (const IoError& e) {
    r["status"] = "io_error";
    r["error"] = e.what();
  } catch (const std::exception& e) {
    r["status"] = "error";
    r["error"] = e.what();
  }
  return r;
}

std::string results_csv(const std::vector<nlohmann::json>& rows) {
  std::string out =
      "label,format,fc_hz,fb_hz,data_rate_bps,channel,snr_db,preamble,seed,status,errors,bits,"
      "ber,evm_percent,peak_metric,doppler_factor\n";
  char buf[512];
  for (const nlohmann::json& r : rows) {
    const bool ok = r.at("status") == "ok";
    std::snprintf(buf, sizeof buf, "%s,%s,%.10g,%.10g,%.10g,%s,",
                  r.at("label").get<std::string>().c_str(),
                  r.at("format").get<std::string>().c_str(), r.at("fc_hz").get<double>(),
                  r.at("fb_hz").get<double>(), r.at("data_rate_bps").get<double>(),
                  r.at("channel").get<std::string>().c_str());
    out += buf;
    if (r.at("snr_db").is_null())
      out += "inf";
    else {
      std::snprintf(buf, sizeof buf, "%.10g", r.at("snr_db").get<double>());
      out += buf;
    }
    std::snprintf(buf, sizeof buf, ",%s,%llu,%s,", r.at("preamble").get<std::string>().c_str(),
                  static_cast<unsigned long long>(r.at("seed").get<std::uint64_t>()),
                  r.at("status").get<std::string>().c_str());
    out += buf;
    if (ok) {
      const nlohmann::json& ber = r.at("ber");
      const nlohmann::json& sync = r.at("sync");
      std::snprintf(buf, sizeof buf, "%lld,%lld,%s,%.6g,%.6g,%.10g\n",
                    static_cast<long long>(ber.at("errors").get<std::int64_t>()),
                    static_cast<long long>(ber.at("bits").get<std::int64_t>()),
                    ber.at("display").get<std::string>().c_str(),
                    r.at("evm_percent").get<double>(), sync.at("peak_metric").get<double>(),
                    sync.at("doppler_factor").get<double>());
      out += buf;
    } else {
      out += ",,,,,\n";
    }
  }
  return out;
}

}  // namespace

int cmd_experiment(const ExperimentArgs& args) {
#ifdef _OPENMP
  if (args.threads > 0) omp_set_num_threads(args.threads);
#endif
  const nlohmann::json spec = load_json_file(args.spec_path);
  if (!spec.is_object()) throw ConfigError("experiment spec: JSON object required");
  static const std::set<std::string> known = {"scale", "equalizer", "rows"};
  for (const auto& item : spec.items())
    if (!known.count(item.key()))
      throw ConfigError("experiment spec: unknown key '" + item.key() + "'");

  const std::string scale = spec.value("scale", "desk");
  if (scale != "desk" && scale != "paper")
    throw ConfigError("experiment spec: scale must be 'desk' or 'paper'");

  EqualizerConfig ecfg;
  if (spec.contains("equalizer")) {
    const nlohmann::json& e = spec.at("equalizer");
    static const std::set<std::string> eknown = {"n_ff", "n_fb", "lambda", "delta"};
    for (const auto& item : e.items())
      if (!eknown.count(item.key()))
        throw ConfigError("experiment equalizer: unknown key '" + item.key() + "'");
    try {
      ecfg.n_ff = e.value("n_ff", ecfg.n_ff);
      ecfg.n_fb = e.value("n_fb", ecfg.n_fb);
      ecfg.lambda = e.value("lambda", ecfg.lambda);
      ecfg.delta = e.value("delta", ecfg.delta);
    } catch (const nlohmann::json::exception& ex) {
      throw ConfigError(std::string("experiment equalizer: ") + ex.what());
    }
  }
  ecfg.validate();

  std::vector<RowPlan> plans;
  if (spec.contains("rows")) {
    if (!spec.at("rows").is_array())
      throw ConfigError("experiment spec: 'rows' must be an array");
    const fs::path spec_dir = fs::path(args.spec_path).parent_path();
    for (std::size_t i = 0; i < spec.at("rows").size(); ++i)
      plans.push_back(parse_row(spec.at("rows")[i], i, spec_dir, scale));
  }

  std::vector<nlohmann::json> rows(plans.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(plans.size()); ++i)
    rows[static_cast<std::size_t>(i)] = run_row(plans[static_cast<std::size_t>(i)], ecfg);

  make_out_dir(args.out_dir);
  nlohmann::json result;
  result["scale"] = scale;
  result["equalizer"] = {{"n_ff", ecfg.n_ff},
                         {"n_fb", ecfg.n_fb},
                         {"lambda", ecfg.lambda},
                         {"delta", ecfg.delta}};
  result["rows"] = rows;
  const fs::path dir(args.out_dir);
  write_text_atomic(dir / "results.json", result.dump(2) + "\n");
  write_text_atomic(dir / "results.csv", results_csv(rows));

  for (const nlohmann::json& r : rows) {
    if (r.at("status") == "ok")
      std::printf("  %-28s ok    ber=%-10s evm=%.3f%%\n", r.at("label").get<std::string>().c_str(),
                  r.at("ber").at("display").get<std::string>().c_str(),
                  r.at("evm_percent").get<double>());
    else
      std::printf("  %-28s %s\n", r.at("label").get<std::string>().c_str(),
                  r.at("status").get<std::string>().c_str());
  }
  std::printf("wrote %s/results.json and results.csv (%zu rows)\n", args.out_dir.c_str(),
              rows.size());
  return 0;
}

int cmd_presets_list() {
  for (const std::string& n : preset_names()) std::printf("%s\n", n.c_str());
  return 0;
}

int run_cli(std::vector<std::string> args) {
  CLI::App app{"software-defined acoustic modem for through-tissue links"};
  app.require_subcommand(1);

  GenArgs gen_args;
  std::uint64_t gen_seed = 0;
  CLI::App* gen = app.add_subcommand("gen", "generate a transmit packet (.f32 + .json sidecar)");
  gen->add_option("--config", gen_args.config_path, "packet config JSON")->required();
  gen->add_option("--out", gen_args.out_path, "output .f32 path")->required();
  CLI::Option* gen_seed_opt = gen->add_option("--seed", gen_seed, "override the config seed");
  gen->add_option("--preamble", gen_args.over.preamble, "barker | qchirp | hchirp");
  gen->add_flag("--paper-scale", gen_args.over.paper_scale,
                "full-length frame (10000 training + 40000 payload symbols)");

  ChanArgs chan_args;
  double chan_snr = 0.0, chan_dop = 1.0;
  std::uint64_t chan_seed = 0;
  CLI::App* chan = app.add_subcommand("chan", "run a waveform through a channel model");
  chan->add_option("--in", chan_args.in_path, "input .f32 path")->required();
  chan->add_option("--out", chan_args.out_path, "output .f32 path")->required();
  chan->add_option("--channel", chan_args.channel, "preset name or channel JSON file")->required();
  CLI::Option* snr_opt = chan->add_option("--snr-db", chan_snr, "override in-band SNR (dB)");
  CLI::Option* dop_opt = chan->add_option("--doppler", chan_dop, "override Doppler factor");
  CLI::Option* cseed_opt = chan->add_option("--seed", chan_seed, "override the noise seed");

  RxArgs rx_args;
  std::uint64_t rx_seed = 0;
  CLI::App* rx = app.add_subcommand("rx", "synchronize, equalize, and score a received packet");
  rx->add_option("--in", rx_args.in_path, "received .f32 path")->required();
  rx->add_option("--config", rx_args.config_path, "packet config JSON")->required();
  rx->add_option("--out-dir", rx_args.out_dir, "directory for report.json and CSVs")->required();
  CLI::Option* rx_seed_opt = rx->add_option("--seed", rx_seed, "override the config seed");
  rx->add_option("--preamble", rx_args.over.preamble, "barker | qchirp | hchirp");
  rx->add_flag("--paper-scale", rx_args.over.paper_scale,
               "full-length frame (10000 training + 40000 payload symbols)");
  rx->add_option("--n-ff", rx_args.eq.n_ff, "feedforward taps");
  rx->add_option("--n-fb", rx_args.eq.n_fb, "feedback taps");
  rx->add_option("--lambda", rx_args.eq.lambda, "RLS forgetting factor");

  ExperimentArgs exp_args;
  CLI::App* exp = app.add_subcommand("experiment", "run an experiment table");
  exp->add_option("--spec", exp_args.spec_path, "experiment spec JSON")->required();
  exp->add_option("--out-dir", exp_args.out_dir, "directory for results.json/csv")->required();
  exp->add_option("--threads", exp_args.threads, "worker threads (0 = OpenMP default)");

  CLI::App* presets = app.add_subcommand("presets", "channel preset utilities");
  presets->require_subcommand(1);
  CLI::App* plist = presets->add_subcommand("list", "list builtin channel presets");

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) {
      if (gen_seed_opt->count()) gen_args.over.seed = gen_seed;
      return cmd_gen(gen_args);
    }
    if (*chan) {
      if (snr_opt->count()) chan_args.snr_db = chan_snr;
      if (dop_opt->count()) chan_args.doppler = chan_dop;
      if (cseed_opt->count()) chan_args.seed = chan_seed;
      return cmd_chan(chan_args);
    }
    if (*rx) {
      if (rx_seed_opt->count()) rx_args.over.seed = rx_seed;
      return cmd_rx(rx_args);
    }
    if (*exp) return cmd_experiment(exp_args);
    if (*plist) return cmd_presets_list();
    std::fprintf(stderr, "no subcommand selected\n");
    return 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const SyncNotFoundError& e) {
    std::fprintf(stderr, "sync error: %s\n", e.what());
    return 3;
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "equalizer error: %s\n", e.what());
    return 4;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 4;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 5;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return 1;
  }
}

}  // namespace sono
