#include "sono/waveform_io.hpp"

#include <atomic>
#include <bit>
#include <cstdint>
#include <fstream>

namespace sono {

namespace {

std::atomic<std::uint64_t> g_tmp_counter{0};

void put_f32_le(std::string& buf, float v) {
  const std::uint32_t u = std::bit_cast<std::uint32_t>(v);
  buf.push_back(static_cast<char>(u & 0xff));
  buf.push_back(static_cast<char>((u >> 8) & 0xff));
  buf.push_back(static_cast<char>((u >> 16) & 0xff));
  buf.push_back(static_cast<char>((u >> 24) & 0xff));
}

float get_f32_le(const char* p) {
  const std::uint32_t u = static_cast<std::uint8_t>(p[0]) |
                          (static_cast<std::uint32_t>(static_cast<std::uint8_t>(p[1])) << 8) |
                          (static_cast<std::uint32_t>(static_cast<std::uint8_t>(p[2])) << 16) |
                          (static_cast<std::uint32_t>(static_cast<std::uint8_t>(p[3])) << 24);
  return std::bit_cast<float>(u);
}

void write_bytes_atomic(const std::filesystem::path& path, const std::string& bytes) {
  const std::uint64_t id = g_tmp_counter.fetch_add(1);
  std::filesystem::path tmp = path;
  tmp += ".tmp" + std::to_string(id);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for write: " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename failed: " + path.string() + ": " + ec.message());
}

std::filesystem::path sidecar_path(const std::filesystem::path& f32_path) {
  std::filesystem::path p = f32_path;
  p.replace_extension(".json");
  return p;
}

}  // namespace

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  write_bytes_atomic(path, content);
}

void save_waveform_pair(const std::filesystem::path& f32_path, const Waveform& w,
                        const std::string& config_digest_hex, const nlohmann::json& extra) {
  std::string bytes;
  if (w.kind == WaveformKind::PassbandReal) {
    bytes.reserve(w.real.size() * 4);
    for (double v : w.real) put_f32_le(bytes, static_cast<float>(v));
  } else {
    bytes.reserve(w.cplx.size() * 8);
    for (const Complex& v : w.cplx) {
      put_f32_le(bytes, static_cast<float>(v.real()));
      put_f32_le(bytes, static_cast<float>(v.imag()));
    }
  }
  write_bytes_atomic(f32_path, bytes);

  nlohmann::json side;
  side["fs_hz"] = w.fs_hz;
  side["kind"] = w.kind == WaveformKind::PassbandReal ? "passband_real" : "baseband_complex";
  if (w.first_symbol_index)
    side["first_symbol_index"] = *w.first_symbol_index;
  else
    side["first_symbol_index"] = nullptr;
  side["config_digest"] = config_digest_hex;
  for (auto it = extra.begin(); it != extra.end(); ++it) side[it.key()] = it.value();
  write_bytes_atomic(sidecar_path(f32_path), side.dump(2) + "\n");
}

LoadedWaveform load_waveform_pair(const std::filesystem::path& f32_path) {
  std::ifstream in(f32_path, std::ios::binary);
  if (!in) throw IoError("cannot open waveform: " + f32_path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  std::ifstream side_in(sidecar_path(f32_path));
  if (!side_in) throw IoError("missing sidecar: " + sidecar_path(f32_path).string());
  nlohmann::json side;
  try {
    side_in >> side;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed sidecar " + sidecar_path(f32_path).string() + ": " + e.what());
  }

  for (const char* key : {"fs_hz", "kind", "first_symbol_index", "config_digest"})
    if (!side.contains(key))
      throw ConfigError("sidecar " + sidecar_path(f32_path).string() + ": missing key '" + key +
                        "'");

  LoadedWaveform lw;
  lw.sidecar = side;
  lw.wave.fs_hz = side["fs_hz"].get<double>();
  const std::string kind = side["kind"].get<std::string>();
  if (kind == "passband_real") {
    lw.wave.kind = WaveformKind::PassbandReal;
    if (bytes.size() % 4 != 0) throw IoError("waveform size not a multiple of 4 bytes");
    lw.wave.real.resize(bytes.size() / 4);
    for (std::size_t i = 0; i < lw.wave.real.size(); ++i)
      lw.wave.real[i] = get_f32_le(bytes.data() + 4 * i);
  } else if (kind == "baseband_complex") {
    lw.wave.kind = WaveformKind::BasebandComplex;
    if (bytes.size() % 8 != 0) throw IoError("waveform size not a multiple of 8 bytes");
    lw.wave.cplx.resize(bytes.size() / 8);
    for (std::size_t i = 0; i < lw.wave.cplx.size(); ++i)
      lw.wave.cplx[i] = Complex(get_f32_le(bytes.data() + 8 * i), get_f32_le(bytes.data() + 8 * i + 4));
  } else {
    throw ConfigError("sidecar key 'kind' must be passband_real or baseband_complex");
  }
  if (!side["first_symbol_index"].is_null())
    lw.wave.first_symbol_index = side["first_symbol_index"].get<std::int64_t>();
  return lw;
}

}  // namespace sono
