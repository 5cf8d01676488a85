#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gapfill {

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
std::string read_file_text(const std::string& path);
void write_file_bytes(const std::string& path, const std::uint8_t* data,
                      std::size_t size);
void write_file_text(const std::string& path, const std::string& text);

// FNV-1a over raw bytes; used for config/corpus fingerprints in reports.
std::uint64_t fnv1a(const std::uint8_t* data, std::size_t size);
std::uint64_t fnv1a(const std::string& s);
std::string hex64(std::uint64_t v);

// Shortest decimal that round-trips a double; keeps CSV/JSON byte-stable.
std::string format_double(double v);

}  // namespace gapfill
