#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sono/equalizer.hpp"
#include "sono/packet.hpp"
#include "sono/types.hpp"

namespace sono {

struct BerResult {
  std::int64_t errors = 0;
  std::int64_t bits = 0;
  double value = 0.0;        // point estimate errors / bits
  double upper_bound = 0.0;  // 1 / bits when error-free, else the point estimate
  bool exact = true;         // false when value is only the error-free bound
  std::string display;       // "3.125e-04" or "<2.500e-05"
};

BerResult compute_ber(std::span<const std::uint8_t> ref, std::span<const std::uint8_t> got);

constexpr int kMseWindowSymbols = 200;
constexpr double kMseFloorDb = -100.0;

// Trailing-window mean |e|^2 in dB for every symbol, floored at -100 dB.
std::vector<double> mse_trace_db(const std::vector<SymbolDecisionRecord>& records,
                                 int window = kMseWindowSymbols);

// Payload-only error-vector magnitude as a percentage of the reference RMS.
double evm_percent(const std::vector<SymbolDecisionRecord>& records, int n_train);

double data_rate_bps(const PacketConfig& cfg);

void write_mse_csv(const std::string& path, std::span<const double> trace_db, int window);

// Payload soft outputs for scatter plots: symbol_index,re,im,mode.
void write_constellation_csv(const std::string& path,
                             const std::vector<SymbolDecisionRecord>& records, int n_train);

}  // namespace sono
