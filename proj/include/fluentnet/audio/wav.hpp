#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "fluentnet/audio/waveform.hpp"
#include "fluentnet/core/error.hpp"

namespace fluentnet::audio {

namespace detail {

inline std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

inline void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

}  // namespace detail

/// Decodes a RIFF/WAVE PCM16 byte buffer. Multichannel input keeps the first
/// channel only.
inline Waveform decode_wav(const std::vector<unsigned char>& bytes, const std::string& name = "<memory>") {
  if (bytes.empty()) throw DataError(name + ": empty file");
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw DataError(name + ": not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = detail::read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t available = bytes.size() - body;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || available < 16) throw DataError(name + ": truncated fmt chunk");
      format = detail::read_u16(chunk + 8);
      channels = detail::read_u16(chunk + 10);
      rate = detail::read_u32(chunk + 12);
      bits = detail::read_u16(chunk + 22);
      if (format == 0xFFFE && size >= 40 && available >= 26) format = detail::read_u16(chunk + 8 + 24);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = std::min<std::size_t>(size, available);
      break;
    }
    pos = body + size + (size & 1u);
  }

  if (!have_fmt) throw DataError(name + ": missing fmt chunk");
  if (format != 1) throw DataError(name + ": unsupported encoding (only integer PCM)");
  if (bits != 16) throw DataError(name + ": unsupported bit depth " + std::to_string(bits));
  if (channels == 0 || rate == 0) throw DataError(name + ": malformed fmt chunk");
  if (data == nullptr) throw DataError(name + ": missing data chunk");

  const std::size_t frame_bytes = 2u * channels;
  const std::size_t frames = data_size / frame_bytes;
  Waveform w({}, static_cast<int>(rate));
  w.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    const auto v = static_cast<std::int16_t>(detail::read_u16(data + i * frame_bytes));
    w.samples[i] = static_cast<double>(v) / 32768.0;
  }
  return w;
}

inline Waveform load_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open WAV file: " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_wav(bytes, path);
}

/// PCM16 quantization: x * 32768 rounded to nearest, clamped to the int16 range.
inline std::int16_t quantize_pcm16(double x) {
  const double scaled = std::nearbyint(x * 32768.0);
  if (scaled > 32767.0) return 32767;
  if (scaled < -32768.0) return -32768;
  return static_cast<std::int16_t>(scaled);
}

inline std::vector<unsigned char> encode_wav(const Waveform& w) {
  require(w.sample_rate > 0, "encode_wav: sample rate must be positive");
  const std::uint32_t data_size = static_cast<std::uint32_t>(w.samples.size() * 2);
  std::vector<unsigned char> out;
  out.reserve(44 + data_size);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  detail::put_u32(out, 36 + data_size);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  detail::put_u32(out, 16);
  detail::put_u16(out, 1);
  detail::put_u16(out, 1);
  detail::put_u32(out, static_cast<std::uint32_t>(w.sample_rate));
  detail::put_u32(out, static_cast<std::uint32_t>(w.sample_rate) * 2);
  detail::put_u16(out, 2);
  detail::put_u16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  detail::put_u32(out, data_size);
  for (double s : w.samples) {
    if (std::isnan(s)) throw NumericalError("save_wav: NaN sample");
    detail::put_u16(out, static_cast<std::uint16_t>(quantize_pcm16(s)));
  }
  return out;
}

inline void save_wav(const Waveform& w, const std::string& path) {
  const auto bytes = encode_wav(w);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write WAV file: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("I/O failure writing WAV file: " + path);
}

}  // namespace fluentnet::audio
