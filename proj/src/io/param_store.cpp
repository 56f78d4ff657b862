// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#include "ssmtrack/io/param_store.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace ssmtrack::io {
namespace {

static_assert(std::endian::native == std::endian::little, "param container assumes a little-endian host");

template <typename U>
void put(std::ofstream& os, U v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(U));
}

template <typename U>
U get(std::ifstream& is, const std::filesystem::path& path) {
  U v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(U))) throw IoError("truncated parameter file: " + path.string());
  return v;
}

}  // namespace

void write_arrays(const std::filesystem::path& path, const std::vector<NamedArray>& arrays) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  os.write(kParamMagic, 4);
  put<std::uint32_t>(os, kParamVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(arrays.size()));
  for (const auto& a : arrays) {
    require(a.values.size() == a.rows * a.cols, "write_arrays: value count mismatch for " + a.name);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(a.name.size()));
    os.write(a.name.data(), static_cast<std::streamsize>(a.name.size()));
    put<std::uint8_t>(os, static_cast<std::uint8_t>(a.dtype));
    put<std::uint32_t>(os, 2);
    put<std::uint64_t>(os, a.rows);
    put<std::uint64_t>(os, a.cols);
    for (double v : a.values) {
      if (a.dtype == DType::kFloat32) {
        put<float>(os, static_cast<float>(v));
      } else {
        put<double>(os, v);
      }
    }
  }
  if (!os) throw IoError("write failed: " + path.string());
}

std::vector<NamedArray> read_arrays(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open for reading: " + path.string());
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kParamMagic, 4) != 0) {
    throw IoError("not a parameter container: " + path.string());
  }
  const auto version = get<std::uint32_t>(is, path);
  if (version != kParamVersion) throw IoError("unsupported parameter container version " + std::to_string(version));
  const auto count = get<std::uint32_t>(is, path);
  std::vector<NamedArray> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedArray a;
    const auto name_len = get<std::uint32_t>(is, path);
    a.name.resize(name_len);
    if (!is.read(a.name.data(), name_len)) throw IoError("truncated parameter file: " + path.string());
    const auto dtype = get<std::uint8_t>(is, path);
    if (dtype != 1 && dtype != 2) throw IoError("unknown dtype in parameter file: " + path.string());
    a.dtype = static_cast<DType>(dtype);
    const auto rank = get<std::uint32_t>(is, path);
    if (rank != 2) throw IoError("unsupported rank in parameter file: " + path.string());
    a.rows = get<std::uint64_t>(is, path);
    a.cols = get<std::uint64_t>(is, path);
    a.values.resize(a.rows * a.cols);
    for (auto& v : a.values) v = a.dtype == DType::kFloat32 ? get<float>(is, path) : get<double>(is, path);
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace ssmtrack::io
