#include "gapfill/diff/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "gapfill/util/errors.hpp"
#include "gapfill/util/fileio.hpp"

namespace gapfill::diff {

namespace {

const char kMagic[4] = {'G', 'F', 'W', '1'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i)
    out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i)
    out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

struct Reader {
  const std::uint8_t* p;
  std::size_t left;

  void need(std::size_t n) {
    if (left < n) throw DataError("checkpoint: truncated");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    p += 4;
    left -= 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    p += 8;
    left -= 8;
    return v;
  }
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(
    const std::vector<TensorData>& tensors) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    put_u32(out, static_cast<std::uint32_t>(t.shape.size()));
    std::size_t n = 1;
    for (auto d : t.shape) {
      if (d <= 0) throw DataError("checkpoint: non-positive dimension");
      put_u64(out, static_cast<std::uint64_t>(d));
      n *= static_cast<std::size_t>(d);
    }
    if (n != t.values.size())
      throw DataError("checkpoint: value count does not match shape");
    for (double v : t.values) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

std::vector<TensorData> decode_checkpoint(const std::uint8_t* data,
                                          std::size_t size) {
  Reader r{data, size};
  r.need(4);
  if (std::memcmp(r.p, kMagic, 4) != 0)
    throw DataError("checkpoint: bad magic");
  r.p += 4;
  r.left -= 4;
  if (r.u32() != kVersion) throw DataError("checkpoint: unsupported version");
  const std::uint32_t count = r.u32();
  std::vector<TensorData> tensors(count);
  for (auto& t : tensors) {
    const std::uint32_t ndim = r.u32();
    if (ndim == 0 || ndim > 8) throw DataError("checkpoint: bad rank");
    std::size_t n = 1;
    t.shape.resize(ndim);
    for (auto& d : t.shape) {
      d = static_cast<std::int64_t>(r.u64());
      if (d <= 0 || n > (1ull << 40) / static_cast<std::size_t>(d))
        throw DataError("checkpoint: bad dimension");
      n *= static_cast<std::size_t>(d);
    }
    t.values.resize(n);
    for (auto& v : t.values) v = std::bit_cast<double>(r.u64());
  }
  if (r.left != 0) throw DataError("checkpoint: trailing bytes");
  return tensors;
}

void save_checkpoint(const std::string& path,
                     const std::vector<Tensor>& params) {
  std::vector<TensorData> tensors;
  tensors.reserve(params.size());
  for (const auto& p : params)
    tensors.push_back({p.shape(), p.values()});
  auto bytes = encode_checkpoint(tensors);
  write_file_bytes(path, bytes.data(), bytes.size());
}

std::vector<TensorData> load_checkpoint_raw(const std::string& path) {
  auto bytes = read_file_bytes(path);
  return decode_checkpoint(bytes.data(), bytes.size());
}

void load_checkpoint(const std::string& path, std::vector<Tensor>& params) {
  auto tensors = load_checkpoint_raw(path);
  if (tensors.size() != params.size())
    throw DataError("checkpoint: tensor count mismatch for " + path);
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (tensors[i].shape != params[i].shape())
      throw DataError("checkpoint: shape mismatch at tensor " +
                      std::to_string(i) + " in " + path);
    params[i].values() = std::move(tensors[i].values);
  }
}

}  // namespace gapfill::diff
