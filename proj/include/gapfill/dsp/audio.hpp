#pragma once

#include <string>
#include <vector>

namespace gapfill::dsp {

// Mono audio in [-1, 1] doubles. WAV I/O is PCM 16-bit signed little-endian;
// samples are divided by 32768 on read and clamped on write.
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = 0;

  std::size_t length() const { return samples.size(); }
  double seconds() const {
    return sample_rate > 0
               ? static_cast<double>(samples.size()) / sample_rate
               : 0.0;
  }
};

AudioClip read_wav(const std::string& path);
void write_wav(const std::string& path, const AudioClip& clip);

// In-memory forms of the same codec, for tests and hashing.
std::vector<unsigned char> encode_wav(const AudioClip& clip);
AudioClip decode_wav(const unsigned char* data, std::size_t size);

}  // namespace gapfill::dsp
