#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <random>

#include "branchrange/io.hpp"

using namespace branchrange;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const char* name) {
  const fs::path dir = fs::temp_directory_path() / "branchrange_io_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::SpecInvalid;
}

}  // namespace

TEST_CASE("PNG round trip") {
  std::mt19937 rng(1);
  std::uniform_int_distribution<int> u(0, 255);
  ImageGray img(37, 21);
  for (auto& v : img.data()) v = static_cast<std::uint8_t>(u(rng));
  CHECK(io::decode_png(io::encode_png(img)) == img);
  const io::Bytes junk{1, 2, 3, 4, 5};
  CHECK(kind_of([&] { io::decode_png(junk); }) == ErrorKind::ParseError);
}

TEST_CASE("PFM round trip and layout") {
  DisparityMap d(5, 3);
  for (int y = 0; y < 3; ++y) {
    for (int x = 0; x < 5; ++x) d.at(x, y) = static_cast<float>(10 * y + x) + 0.25f;
  }
  d.at(0, 0) = kInvalidDisparity;
  const io::Bytes bytes = io::encode_pfm(d);
  const std::string header(bytes.begin(), bytes.begin() + 10);
  CHECK(header == "Pf\n5 3\n-1\n");
  CHECK(bytes.size() == 10 + 5 * 3 * 4);
  // First stored row is the bottom image row.
  float first = 0.0f;
  std::memcpy(&first, bytes.data() + 10, 4);
  if constexpr (std::endian::native == std::endian::little) CHECK(first == d.at(0, 2));

  const io::FloatPlane plane = io::decode_pfm(bytes);
  CHECK(plane.width == 5);
  CHECK(plane.height == 3);
  CHECK(plane.data == d.data());
}

TEST_CASE("PFM reads big-endian files and rejects malformed input") {
  const std::string header = "Pf\n2 1\n1.0\n";
  io::Bytes be(header.begin(), header.end());
  for (float v : {1.5f, -2.0f}) {
    std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
    for (int s = 24; s >= 0; s -= 8) be.push_back(static_cast<std::uint8_t>(bits >> s));
  }
  const io::FloatPlane plane = io::decode_pfm(be);
  CHECK(plane.data == std::vector<float>{1.5f, -2.0f});

  const std::string color = "PF\n1 1\n-1.0\n";
  CHECK(kind_of([&] { io::decode_pfm(io::Bytes(color.begin(), color.end())); }) == ErrorKind::ParseError);
  io::Bytes truncated = io::encode_pfm(DisparityMap(4, 4, 1.0f));
  truncated.pop_back();
  CHECK(kind_of([&] { io::decode_pfm(truncated); }) == ErrorKind::ParseError);
}

TEST_CASE("file helpers") {
  const fs::path dir = scratch_dir("files");
  const DepthMap z(6, 4, 1.75f);
  io::write_file_atomic(dir / "z.pfm", io::encode_pfm(z));
  CHECK(io::read_pfm<DepthTag>(dir / "z.pfm") == z);
  CHECK_FALSE(fs::exists(dir / "z.pfm.tmp"));
  CHECK(kind_of([&] { io::read_file(dir / "missing.bin"); }) == ErrorKind::IoError);

  io::OutputBatch batch;
  batch.add(dir / "sub" / "a.txt", std::string("hello"));
  batch.add(dir / "b.txt", std::string("world"));
  CHECK_FALSE(fs::exists(dir / "b.txt"));
  batch.commit();
  CHECK(io::read_text_file(dir / "sub" / "a.txt") == "hello");
  CHECK(io::read_text_file(dir / "b.txt") == "world");
}

TEST_CASE("sha256 of known vectors") {
  CHECK(io::sha256_hex({}) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  const std::string abc = "abc";
  const io::Bytes bytes(abc.begin(), abc.end());
  CHECK(io::sha256_hex(bytes) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
