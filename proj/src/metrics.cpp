#include "sono/metrics.hpp"

#include <cmath>
#include <cstdio>

#include "sono/waveform_io.hpp"

namespace sono {

BerResult compute_ber(std::span<const std::uint8_t> ref, std::span<const std::uint8_t> got) {
  if (ref.size() != got.size()) throw ConfigError("compute_ber: bit-vector length mismatch");
  if (ref.empty()) throw ConfigError("compute_ber: empty bit vectors");
  BerResult r;
  r.bits = static_cast<std::int64_t>(ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i)
    if ((ref[i] != 0) != (got[i] != 0)) ++r.errors;
  r.value = static_cast<double>(r.errors) / static_cast<double>(r.bits);
  char buf[48];
  if (r.errors == 0) {
    r.exact = false;
    r.upper_bound = 1.0 / static_cast<double>(r.bits);
    std::snprintf(buf, sizeof buf, "<%.3e", r.upper_bound);
  } else {
    r.exact = true;
    r.upper_bound = r.value;
    std::snprintf(buf, sizeof buf, "%.3e", r.value);
  }
  r.display = buf;
  return r;
}

std::vector<double> mse_trace_db(const std::vector<SymbolDecisionRecord>& records, int window) {
  if (window <= 0) throw ConfigError("mse_trace_db: window must be positive");
  std::vector<double> out;
  out.reserve(records.size());
  std::vector<double> ring(static_cast<std::size_t>(window), 0.0);
  double sum = 0.0;
  int count = 0;
  int pos = 0;
  for (const SymbolDecisionRecord& r : records) {
    const double e2 = std::norm(r.e);
    if (count == window)
      sum -= ring[static_cast<std::size_t>(pos)];
    else
      ++count;
    ring[static_cast<std::size_t>(pos)] = e2;
    sum += e2;
    pos = (pos + 1) % window;
    const double mse = std::max(sum / count, 0.0);
    out.push_back(std::max(10.0 * std::log10(mse + 1e-300), kMseFloorDb));
  }
  return out;
}

double evm_percent(const std::vector<SymbolDecisionRecord>& records, int n_train) {
  double err = 0.0, ref = 0.0;
  for (std::size_t i = static_cast<std::size_t>(n_train); i < records.size(); ++i) {
    err += std::norm(records[i].e);
    ref += std::norm(records[i].d);
  }
  if (ref <= 0.0) return 0.0;
  return 100.0 * std::sqrt(err / ref);
}

double data_rate_bps(const PacketConfig& cfg) {
  return static_cast<double>(cfg.bits_per_symbol()) * cfg.fb_hz;
}

void write_mse_csv(const std::string& path, std::span<const double> trace_db, int window) {
  std::string out;
  out.reserve(trace_db.size() * 16 + 64);
  char line[64];
  std::snprintf(line, sizeof line, "# mse_window_symbols=%d\n", window);
  out += line;
  out += "symbol_index,mse_db\n";
  for (std::size_t i = 0; i < trace_db.size(); ++i) {
    std::snprintf(line, sizeof line, "%zu,%.4f\n", i, trace_db[i]);
    out += line;
  }
  write_text_atomic(path, out);
}

void write_constellation_csv(const std::string& path,
                             const std::vector<SymbolDecisionRecord>& records, int n_train) {
  std::string out;
  out.reserve((records.size() > static_cast<std::size_t>(n_train)
                   ? records.size() - static_cast<std::size_t>(n_train)
                   : 0) * 48 + 32);
  out += "symbol_index,re,im,mode\n";
  char line[96];
  for (std::size_t i = static_cast<std::size_t>(n_train); i < records.size(); ++i) {
    const SymbolDecisionRecord& r = records[i];
    std::snprintf(line, sizeof line, "%lld,%.10g,%.10g,%c\n", static_cast<long long>(r.k),
                  r.y.real(), r.y.imag(), r.mode);
    out += line;
  }
  write_text_atomic(path, out);
}

}  // namespace sono
