// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#pragma once

// Flat, versioned container of named arrays. Byte layout (little-endian) is
// documented in docs/formats.md.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ssmtrack/core/params.hpp"

namespace ssmtrack::io {

inline constexpr char kParamMagic[4] = {'S', 'S', 'M', 'P'};
inline constexpr std::uint32_t kParamVersion = 1;

enum class DType : std::uint8_t { kFloat32 = 1, kFloat64 = 2 };

struct NamedArray {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  DType dtype = DType::kFloat32;
  std::vector<double> values;  // widened for transport; written back in dtype

  bool operator==(const NamedArray&) const = default;
};

void write_arrays(const std::filesystem::path& path, const std::vector<NamedArray>& arrays);
std::vector<NamedArray> read_arrays(const std::filesystem::path& path);

template <class P>
std::vector<NamedArray> to_named_arrays(const P& params) {
  using T = param_scalar_t<P>;
  std::vector<NamedArray> out;
  for (const auto& [name, m] : array_list(params)) {
    NamedArray a{name, m->rows(), m->cols(), sizeof(T) == 4 ? DType::kFloat32 : DType::kFloat64, {}};
    a.values.assign(m->data(), m->data() + m->size());
    out.push_back(std::move(a));
  }
  return out;
}

template <class P>
void save_params(const std::filesystem::path& path, const P& params) {
  write_arrays(path, to_named_arrays(params));
}

// Every array of `params` must be present in the file with the same shape.
template <class P>
void load_params(const std::filesystem::path& path, P& params) {
  using T = param_scalar_t<P>;
  std::map<std::string, NamedArray> by_name;
  for (auto& a : read_arrays(path)) by_name.emplace(a.name, std::move(a));
  for (auto& [name, m] : array_list(params)) {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw IoError("load_params: missing array '" + name + "' in " + path.string());
    const NamedArray& a = it->second;
    if (a.rows != m->rows() || a.cols != m->cols()) {
      throw IoError("load_params: shape mismatch for '" + name + "'");
    }
    for (std::size_t i = 0; i < m->size(); ++i) (*m)[i] = static_cast<T>(a.values[i]);
  }
}

}  // namespace ssmtrack::io
