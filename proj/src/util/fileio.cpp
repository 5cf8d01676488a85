#include "gapfill/util/fileio.hpp"

#include <cstdio>
#include <fstream>

#include "gapfill/util/errors.hpp"

namespace gapfill {

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open file: " + path);
  f.seekg(0, std::ios::end);
  std::streamoff n = f.tellg();
  f.seekg(0, std::ios::beg);
  std::vector<std::uint8_t> buf(static_cast<std::size_t>(n));
  if (n > 0) f.read(reinterpret_cast<char*>(buf.data()), n);
  if (!f) throw DataError("short read: " + path);
  return buf;
}

std::string read_file_text(const std::string& path) {
  auto bytes = read_file_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

void write_file_bytes(const std::string& path, const std::uint8_t* data,
                      std::size_t size) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot open file for writing: " + path);
  if (size > 0)
    f.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(size));
  f.flush();
  if (!f) throw DataError("short write: " + path);
}

void write_file_text(const std::string& path, const std::string& text) {
  write_file_bytes(path,
                   reinterpret_cast<const std::uint8_t*>(text.data()),
                   text.size());
}

std::uint64_t fnv1a(const std::uint8_t* data, std::size_t size) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a(const std::string& s) {
  return fnv1a(reinterpret_cast<const std::uint8_t*>(s.data()), s.size());
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(v));
  return std::string(buf);
}

std::string format_double(double v) {
  // %.17g always round-trips; trim to the shortest representation that
  // still does so (keeps reports compact and deterministic).
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v || (v != v && back != back)) return std::string(buf);
  }
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

}  // namespace gapfill
