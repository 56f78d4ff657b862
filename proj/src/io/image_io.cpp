// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#include "ssmtrack/io/image_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace ssmtrack::io {
namespace {

static_assert(std::endian::native == std::endian::little, "image files assume a little-endian host");

constexpr char kManifestHeader[] = "ssmtrack-video 1";
constexpr std::uint32_t kMaxImageSide = 1u << 16;

template <typename U>
void put(std::ofstream& os, U v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(U));
}

template <typename U>
U get(std::ifstream& is, const std::filesystem::path& path) {
  U v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(U))) throw IoError("truncated image file: " + path.string());
  return v;
}

double parse_double(const std::string& s, const std::string& context) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw IoError(context + ": bad number '" + s + "'");
  return v;
}

std::size_t parse_index(const std::string& s, const std::string& context) {
  std::size_t v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw IoError(context + ": bad index '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string strip(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  return s.substr(i);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_image(const std::filesystem::path& path, const Image& img, PixelType type) {
  require(img.data.size() == img.height * img.width * img.channels, "write_image: data size does not match shape");
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  os.write(kImageMagic, 4);
  put<std::uint32_t>(os, kImageVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(img.height));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(img.width));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(img.channels));
  put<std::uint8_t>(os, static_cast<std::uint8_t>(type));
  if (type == PixelType::kUint8) {
    std::vector<std::uint8_t> bytes(img.data.size());
    for (std::size_t i = 0; i < bytes.size(); ++i) {
      bytes[i] = static_cast<std::uint8_t>(std::lround(std::clamp(img.data[i], 0.0f, 1.0f) * 255.0f));
    }
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  } else {
    os.write(reinterpret_cast<const char*>(img.data.data()), static_cast<std::streamsize>(img.data.size() * 4));
  }
  if (!os) throw IoError("write failed: " + path.string());
}

Image read_image(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open for reading: " + path.string());
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kImageMagic, 4) != 0) throw IoError("not an image file: " + path.string());
  const auto version = get<std::uint32_t>(is, path);
  if (version != kImageVersion) throw IoError("unsupported image file version " + std::to_string(version));
  const auto h = get<std::uint32_t>(is, path);
  const auto w = get<std::uint32_t>(is, path);
  const auto c = get<std::uint32_t>(is, path);
  const auto type = get<std::uint8_t>(is, path);
  if (h == 0 || w == 0 || c == 0 || h > kMaxImageSide || w > kMaxImageSide || c > 16) {
    throw IoError("image header out of range in " + path.string());
  }
  Image img(h, w, c);
  if (type == static_cast<std::uint8_t>(PixelType::kUint8)) {
    std::vector<std::uint8_t> bytes(img.data.size());
    if (!is.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()))) {
      throw IoError("truncated image file: " + path.string());
    }
    for (std::size_t i = 0; i < bytes.size(); ++i) img.data[i] = static_cast<float>(bytes[i]) / 255.0f;
  } else if (type == static_cast<std::uint8_t>(PixelType::kFloat32)) {
    if (!is.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.data.size() * 4))) {
      throw IoError("truncated image file: " + path.string());
    }
  } else {
    throw IoError("unknown pixel type " + std::to_string(type) + " in " + path.string());
  }
  return img;
}

void write_manifest(const std::filesystem::path& path, const VideoManifest& m) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  const Box& b = m.init_box;
  os << kManifestHeader << '\n'
     << "init " << format_double(b.x_min) << ' ' << format_double(b.y_min) << ' ' << format_double(b.x_max) << ' '
     << format_double(b.y_max) << '\n';
  for (const auto& f : m.frames) os << "frame " << f.rgb.generic_string() << ' ' << f.tir.generic_string() << '\n';
  if (!os) throw IoError("write failed: " + path.string());
}

VideoManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open for reading: " + path.string());
  std::string line;
  if (!std::getline(is, line) || strip(line) != kManifestHeader) throw IoError("not a video manifest: " + path.string());
  VideoManifest m;
  bool have_init = false;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    line = strip(line);
    if (line.empty() || line.front() == '#') continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "init") {
      std::string v[4];
      if (!(ls >> v[0] >> v[1] >> v[2] >> v[3])) throw IoError(where + ": init needs four numbers");
      m.init_box = {parse_double(v[0], where), parse_double(v[1], where), parse_double(v[2], where),
                    parse_double(v[3], where)};
      have_init = true;
    } else if (key == "frame") {
      std::string rgb, tir;
      if (!(ls >> rgb >> tir)) throw IoError(where + ": frame needs an rgb and a tir path");
      m.frames.push_back({rgb, tir});
    } else {
      throw IoError(where + ": unknown manifest key '" + key + "'");
    }
  }
  if (!have_init) throw IoError("manifest has no init box: " + path.string());
  if (m.frames.empty()) throw IoError("manifest lists no frames: " + path.string());
  return m;
}

LoadedVideo load_video(const std::filesystem::path& path) {
  const auto manifest_path = std::filesystem::is_directory(path) ? path / "manifest.txt" : path;
  const VideoManifest m = read_manifest(manifest_path);
  const auto base = manifest_path.parent_path();
  auto resolve = [&](const std::filesystem::path& p) { return p.is_absolute() ? p : base / p; };
  LoadedVideo v;
  v.init_box = m.init_box;
  for (const auto& f : m.frames) {
    v.rgb.push_back(read_image(resolve(f.rgb)));
    v.tir.push_back(read_image(resolve(f.tir)));
    const Image& a = v.rgb.back();
    const Image& b = v.tir.back();
    if (a.height != b.height || a.width != b.width) throw IoError("rgb/tir frame size mismatch in " + f.rgb.string());
    if (a.height != v.rgb.front().height || a.width != v.rgb.front().width) {
      throw IoError("frame size changes within the video at " + f.rgb.string());
    }
  }
  return v;
}

std::string format_box_csv(const std::vector<BoxRow>& rows, bool with_confidence) {
  std::string out = with_confidence ? "frame_index,x_min,y_min,x_max,y_max,confidence\n"
                                    : "frame_index,x_min,y_min,x_max,y_max\n";
  for (const auto& r : rows) {
    out += std::to_string(r.frame_index);
    for (double v : {r.box.x_min, r.box.y_min, r.box.x_max, r.box.y_max}) out += "," + format_double(v);
    if (with_confidence) out += "," + format_double(r.confidence);
    out += '\n';
  }
  return out;
}

void write_box_csv(const std::filesystem::path& path, const std::vector<BoxRow>& rows, bool with_confidence) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  os << format_box_csv(rows, with_confidence);
  if (!os) throw IoError("write failed: " + path.string());
}

std::vector<BoxRow> read_box_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open for reading: " + path.string());
  std::string line;
  if (!std::getline(is, line) || strip(line).rfind("frame_index,", 0) != 0) {
    throw IoError("missing box CSV header in " + path.string());
  }
  std::vector<BoxRow> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    line = strip(line);
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    const auto f = split(line, ',');
    if (f.size() != 5 && f.size() != 6) throw IoError(where + ": expected 5 or 6 fields");
    BoxRow r;
    r.frame_index = parse_index(f[0], where);
    r.box = {parse_double(f[1], where), parse_double(f[2], where), parse_double(f[3], where),
             parse_double(f[4], where)};
    if (f.size() == 6) r.confidence = parse_double(f[5], where);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace ssmtrack::io
