#include "branchrange/io.hpp"

#include <openssl/evp.h>
#include <png.h>

#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>
#include <system_error>

namespace branchrange::io {

namespace fs = std::filesystem;

Bytes read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::IoError, "cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::string read_text_file(const fs::path& path) {
  const Bytes bytes = read_file(path);
  return std::string(bytes.begin(), bytes.end());
}

void write_file_atomic(const fs::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorKind::IoError, "cannot create " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      fail(ErrorKind::IoError, "write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fail(ErrorKind::IoError, "cannot rename onto " + path.string());
  }
}

void OutputBatch::add(fs::path path, Bytes bytes) { entries_.emplace_back(std::move(path), std::move(bytes)); }

void OutputBatch::add(fs::path path, const std::string& text) { add(std::move(path), Bytes(text.begin(), text.end())); }

void OutputBatch::commit() const {
  for (const auto& [path, bytes] : entries_) write_file_atomic(path, bytes);
}

ImageGray decode_png(std::span<const std::uint8_t> bytes) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    fail(ErrorKind::ParseError, std::string("PNG decode: ") + image.message);
  }
  image.format = PNG_FORMAT_GRAY;
  const auto width = static_cast<int>(image.width);
  const auto height = static_cast<int>(image.height);
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
    png_image_free(&image);
    fail(ErrorKind::ParseError, std::string("PNG decode: ") + image.message);
  }
  return ImageGray(width, height, std::move(pixels));
}

ImageGray read_png(const fs::path& path) { return decode_png(read_file(path)); }

Bytes encode_png(const ImageGray& img) {
  require(img.width() > 0 && img.height() > 0, ErrorKind::InvalidParams, "cannot encode an empty image");
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, img.data().data(), 0, nullptr)) {
    fail(ErrorKind::IoError, std::string("PNG encode: ") + image.message);
  }
  Bytes out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, img.data().data(), 0, nullptr)) {
    fail(ErrorKind::IoError, std::string("PNG encode: ") + image.message);
  }
  out.resize(size);
  return out;
}

namespace {

// Reads one whitespace-delimited header token starting at `pos`.
std::string next_token(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
  std::string token;
  while (pos < bytes.size() && !std::isspace(bytes[pos])) token.push_back(static_cast<char>(bytes[pos++]));
  require(!token.empty(), ErrorKind::ParseError, "PFM header truncated");
  return token;
}

std::uint32_t byteswap32(std::uint32_t v) {
  return (v >> 24) | ((v >> 8) & 0xff00u) | ((v << 8) & 0xff0000u) | (v << 24);
}

}  // namespace

FloatPlane decode_pfm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  const std::string magic = next_token(bytes, pos);
  if (magic == "PF") fail(ErrorKind::ParseError, "color PFM is not supported; expected single-channel Pf");
  require(magic == "Pf", ErrorKind::ParseError, "not a PFM file");
  FloatPlane plane;
  double scale = 0.0;
  try {
    plane.width = std::stoi(next_token(bytes, pos));
    plane.height = std::stoi(next_token(bytes, pos));
    scale = std::stod(next_token(bytes, pos));
  } catch (const std::logic_error&) {
    fail(ErrorKind::ParseError, "malformed PFM header");
  }
  require(plane.width > 0 && plane.height > 0, ErrorKind::ParseError, "PFM dimensions must be positive");
  require(scale != 0.0 && std::isfinite(scale), ErrorKind::ParseError, "PFM scale must be nonzero");
  // Exactly one whitespace byte separates the header from the raster.
  require(pos < bytes.size() && std::isspace(bytes[pos]), ErrorKind::ParseError, "PFM header not terminated");
  ++pos;
  const std::size_t count = static_cast<std::size_t>(plane.width) * static_cast<std::size_t>(plane.height);
  require(bytes.size() - pos >= count * 4, ErrorKind::ParseError, "PFM raster truncated");

  const bool file_little = scale < 0.0;
  const bool host_little = std::endian::native == std::endian::little;
  plane.data.resize(count);
  for (int row = 0; row < plane.height; ++row) {
    // Raster rows run bottom to top.
    const int y = plane.height - 1 - row;
    for (int x = 0; x < plane.width; ++x) {
      std::uint32_t raw = 0;
      std::memcpy(&raw, bytes.data() + pos, 4);
      pos += 4;
      if (file_little != host_little) raw = byteswap32(raw);
      plane.data[static_cast<std::size_t>(y) * plane.width + x] = std::bit_cast<float>(raw);
    }
  }
  return plane;
}

Bytes encode_pfm(int width, int height, std::span<const float> data) {
  require(width > 0 && height > 0, ErrorKind::InvalidParams, "cannot encode an empty PFM");
  require(data.size() == static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
          ErrorKind::DimensionMismatch, "PFM data length does not equal width*height");
  const std::string header = "Pf\n" + std::to_string(width) + " " + std::to_string(height) + "\n-1\n";
  Bytes out(header.begin(), header.end());
  out.reserve(out.size() + data.size() * 4);
  for (int row = 0; row < height; ++row) {
    const int y = height - 1 - row;
    for (int x = 0; x < width; ++x) {
      const auto raw = std::bit_cast<std::uint32_t>(data[static_cast<std::size_t>(y) * width + x]);
      for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(raw >> (8 * b)));
    }
  }
  return out;
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    fail(ErrorKind::IoError, "sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0x0f]);
  }
  return hex;
}

}  // namespace branchrange::io
