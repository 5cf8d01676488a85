#include "gapfill/dsp/audio.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>

#include "gapfill/util/errors.hpp"
#include "gapfill/util/fileio.hpp"

namespace gapfill::dsp {

namespace {

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i)
    out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

std::vector<unsigned char> encode_wav(const AudioClip& clip) {
  if (clip.sample_rate <= 0)
    throw DataError("encode_wav: sample_rate must be positive");
  const std::uint32_t n = static_cast<std::uint32_t>(clip.samples.size());
  const std::uint32_t data_bytes = n * 2;
  std::vector<unsigned char> out;
  out.reserve(44 + data_bytes);

  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E'});
  out.insert(out.end(), {'f', 'm', 't', ' '});
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate) * 2);
  put_u16(out, 2);   // block align
  put_u16(out, 16);  // bits per sample
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(out, data_bytes);

  for (double x : clip.samples) {
    double scaled = x * 32768.0;
    long v = std::lround(scaled);
    if (v > 32767) v = 32767;
    if (v < -32768) v = -32768;
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
  }
  return out;
}

AudioClip decode_wav(const unsigned char* data, std::size_t size) {
  if (size < 44 || std::memcmp(data, "RIFF", 4) != 0 ||
      std::memcmp(data + 8, "WAVE", 4) != 0)
    throw DataError("decode_wav: not a RIFF/WAVE file");

  // Walk chunks; accept only PCM16 mono.
  std::size_t pos = 12;
  int sample_rate = 0;
  bool have_fmt = false;
  const unsigned char* pcm = nullptr;
  std::uint32_t pcm_bytes = 0;
  while (pos + 8 <= size) {
    const unsigned char* hdr = data + pos;
    std::uint32_t chunk_size = get_u32(hdr + 4);
    std::size_t body = pos + 8;
    if (body + chunk_size > size)
      throw DataError("decode_wav: truncated chunk");
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (chunk_size < 16) throw DataError("decode_wav: short fmt chunk");
      std::uint16_t format = get_u16(data + body);
      std::uint16_t channels = get_u16(data + body + 2);
      sample_rate = static_cast<int>(get_u32(data + body + 4));
      std::uint16_t bits = get_u16(data + body + 14);
      if (format != 1 || channels != 1 || bits != 16)
        throw DataError("decode_wav: only PCM16 mono is supported");
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      pcm = data + body;
      pcm_bytes = chunk_size;
    }
    pos = body + chunk_size + (chunk_size & 1);  // chunks are word-aligned
  }
  if (!have_fmt || pcm == nullptr)
    throw DataError("decode_wav: missing fmt or data chunk");

  AudioClip clip;
  clip.sample_rate = sample_rate;
  clip.samples.resize(pcm_bytes / 2);
  for (std::size_t i = 0; i < clip.samples.size(); ++i) {
    std::int16_t v = static_cast<std::int16_t>(get_u16(pcm + 2 * i));
    clip.samples[i] = static_cast<double>(v) / 32768.0;
  }
  return clip;
}

AudioClip read_wav(const std::string& path) {
  auto bytes = read_file_bytes(path);
  return decode_wav(bytes.data(), bytes.size());
}

void write_wav(const std::string& path, const AudioClip& clip) {
  auto bytes = encode_wav(clip);
  write_file_bytes(path, bytes.data(), bytes.size());
}

}  // namespace gapfill::dsp
