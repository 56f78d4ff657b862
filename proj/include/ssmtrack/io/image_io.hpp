// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#pragma once

// Raw planar image files and directory-of-frames video manifests. Byte layouts
// are documented in docs/formats.md.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ssmtrack/core/box.hpp"
#include "ssmtrack/core/image.hpp"

namespace ssmtrack::io {

inline constexpr char kImageMagic[4] = {'S', 'S', 'M', 'I'};
inline constexpr std::uint32_t kImageVersion = 1;

enum class PixelType : std::uint8_t { kUint8 = 1, kFloat32 = 2 };

// kUint8 stores round(clamp(v, 0, 1) * 255); values read back are divided by 255.
void write_image(const std::filesystem::path& path, const Image& img, PixelType type = PixelType::kUint8);
Image read_image(const std::filesystem::path& path);

struct FramePair {
  std::filesystem::path rgb;
  std::filesystem::path tir;
};

struct VideoManifest {
  std::vector<FramePair> frames;  // relative paths are resolved against the manifest directory
  Box init_box;
};

void write_manifest(const std::filesystem::path& path, const VideoManifest& m);
VideoManifest read_manifest(const std::filesystem::path& path);

struct LoadedVideo {
  std::vector<Image> rgb;
  std::vector<Image> tir;
  Box init_box;
};

// Accepts either a manifest file or a directory containing manifest.txt.
LoadedVideo load_video(const std::filesystem::path& path);

// Per-frame boxes as `frame_index,x_min,y_min,x_max,y_max[,confidence]` rows after a header line.
struct BoxRow {
  std::size_t frame_index = 0;
  Box box;
  double confidence = 1.0;
};

void write_box_csv(const std::filesystem::path& path, const std::vector<BoxRow>& rows, bool with_confidence);
std::string format_box_csv(const std::vector<BoxRow>& rows, bool with_confidence);
std::vector<BoxRow> read_box_csv(const std::filesystem::path& path);

// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

}  // namespace ssmtrack::io
