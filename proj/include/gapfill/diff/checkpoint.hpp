#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gapfill/diff/tensor.hpp"

namespace gapfill::diff {

struct TensorData {
  std::vector<std::int64_t> shape;
  std::vector<double> values;
};

// Binary weight checkpoint, little-endian throughout:
//   magic "GFW1" | u32 version (=1) | u32 tensor count |
//   per tensor: u32 ndim | u64 dims[ndim] | f64 values (row-major)
// Round trips are bit-exact: values are stored as raw IEEE-754 bits.
std::vector<std::uint8_t> encode_checkpoint(
    const std::vector<TensorData>& tensors);
std::vector<TensorData> decode_checkpoint(const std::uint8_t* data,
                                          std::size_t size);

void save_checkpoint(const std::string& path,
                     const std::vector<Tensor>& params);
// Loads into existing parameters; shapes must match exactly.
void load_checkpoint(const std::string& path, std::vector<Tensor>& params);
std::vector<TensorData> load_checkpoint_raw(const std::string& path);

}  // namespace gapfill::diff
