#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sono {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

// Error taxonomy. The CLI maps these onto distinct process exit codes.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SyncNotFoundError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class WaveformKind { PassbandReal, BasebandComplex };

// A sampled signal plus the metadata that travels with it on disk.
// Exactly one of `real` / `cplx` is populated, selected by `kind`.
struct Waveform {
  WaveformKind kind = WaveformKind::PassbandReal;
  double fs_hz = 0.0;
  std::vector<double> real;   // PassbandReal payload
  std::vector<Complex> cplx;  // BasebandComplex payload
  // Sample index of the first data-symbol instant, when known.
  std::optional<std::int64_t> first_symbol_index;

  std::size_t size() const {
    return kind == WaveformKind::PassbandReal ? real.size() : cplx.size();
  }
};

inline Waveform make_passband(std::vector<double> s, double fs) {
  Waveform w;
  w.kind = WaveformKind::PassbandReal;
  w.fs_hz = fs;
  w.real = std::move(s);
  return w;
}

inline Waveform make_baseband(std::vector<Complex> s, double fs) {
  Waveform w;
  w.kind = WaveformKind::BasebandComplex;
  w.fs_hz = fs;
  w.cplx = std::move(s);
  return w;
}

// splitmix64 stream. Bits are consumed MSB-first out of each 64-bit word so
// the bit sequence for a given seed is identical on every platform.
class BitSource {
 public:
  explicit BitSource(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  int next_bit() {
    if (bits_left_ == 0) {
      word_ = next_u64();
      bits_left_ = 64;
    }
    --bits_left_;
    return static_cast<int>((word_ >> bits_left_) & 1u);
  }

  std::vector<std::uint8_t> take(std::size_t n) {
    std::vector<std::uint8_t> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<std::uint8_t>(next_bit());
    return out;
  }

  // Uniform double in (0, 1], 53-bit resolution.
  double next_unit() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
  std::uint64_t word_ = 0;
  int bits_left_ = 0;
};

// Deterministic N(0,1) stream: splitmix64 uniforms through Box-Muller.
// Unlike std::normal_distribution this is bit-reproducible across platforms.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : src_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = src_.next_unit();
    const double u2 = src_.next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(kTwoPi * u2);
    have_spare_ = true;
    return r * std::cos(kTwoPi * u2);
  }

 private:
  BitSource src_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace sono
