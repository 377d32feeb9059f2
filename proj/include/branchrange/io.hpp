#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "branchrange/core.hpp"

namespace branchrange::io {

using Bytes = std::vector<std::uint8_t>;

Bytes read_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);

/// Writes via a sibling temporary file and rename, so readers never observe
/// a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

/// Collects encoded outputs in memory and writes them together. Nothing
/// touches the filesystem before `commit`.
class OutputBatch {
 public:
  void add(std::filesystem::path path, Bytes bytes);
  void add(std::filesystem::path path, const std::string& text);
  const std::vector<std::pair<std::filesystem::path, Bytes>>& entries() const noexcept { return entries_; }
  void commit() const;

 private:
  std::vector<std::pair<std::filesystem::path, Bytes>> entries_;
};

/// 8-bit grayscale PNG. Color or 16-bit inputs are converted to 8-bit gray.
ImageGray decode_png(std::span<const std::uint8_t> bytes);
ImageGray read_png(const std::filesystem::path& path);
Bytes encode_png(const ImageGray& image);

/// Single-channel PFM ("Pf"), little-endian (negative scale), rows stored
/// bottom to top. Reading also accepts big-endian files.
struct FloatPlane {
  int width = 0;
  int height = 0;
  std::vector<float> data;
};
FloatPlane decode_pfm(std::span<const std::uint8_t> bytes);
Bytes encode_pfm(int width, int height, std::span<const float> data);

template <class Tag>
Grid<float, Tag> read_pfm(const std::filesystem::path& path) {
  FloatPlane plane = decode_pfm(read_file(path));
  return Grid<float, Tag>(plane.width, plane.height, std::move(plane.data));
}

template <class Tag>
Bytes encode_pfm(const Grid<float, Tag>& grid) {
  return encode_pfm(grid.width(), grid.height(), grid.data());
}

std::string sha256_hex(std::span<const std::uint8_t> bytes);

}  // namespace branchrange::io
