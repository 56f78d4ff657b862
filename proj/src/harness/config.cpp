// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#include "ssmtrack/harness/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace ssmtrack::harness {

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <typename N>
N parse_number(const std::string& key, const std::string& value) {
  N out{};
  const char* end = value.data() + value.size();
  const auto res = std::from_chars(value.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end) throw ContractError("config: bad value '" + value + "' for " + key);
  return out;
}

// Uniform accessors for every key, in serialization order.
struct Field {
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

template <typename N>
Field number_field(N RunConfig::*member, const char* key) {
  return {[member](const RunConfig& c) {
            if constexpr (std::is_floating_point_v<N>) {
              return format_double(c.*member);
            } else {
              return std::to_string(c.*member);
            }
          },
          [member, key](RunConfig& c, const std::string& v) { c.*member = parse_number<N>(key, v); }};
}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> f = [] {
    std::vector<std::pair<std::string, Field>> v;
    auto add = [&v](const char* key, Field fld) { v.emplace_back(key, std::move(fld)); };
    add("dim", number_field(&RunConfig::dim, "dim"));
    add("state", number_field(&RunConfig::state, "state"));
    add("layers", number_field(&RunConfig::layers, "layers"));
    add("expansion", number_field(&RunConfig::expansion, "expansion"));
    add("conv_width", number_field(&RunConfig::conv_width, "conv_width"));
    add("patch", number_field(&RunConfig::patch, "patch"));
    add("template_size", number_field(&RunConfig::template_size, "template_size"));
    add("search_size", number_field(&RunConfig::search_size, "search_size"));
    add("head_channels", number_field(&RunConfig::head_channels, "head_channels"));
    add("templates", number_field(&RunConfig::templates, "templates"));
    add("trajectory", number_field(&RunConfig::trajectory, "trajectory"));
    add("nbins", number_field(&RunConfig::nbins, "nbins"));
    add("alpha", number_field(&RunConfig::alpha, "alpha"));
    add("concat_mode", {[](const RunConfig& c) { return embed::to_string(c.concat_mode); },
                        [](RunConfig& c, const std::string& v) { c.concat_mode = embed::parse_concat_mode(v); }});
    add("scan_order", {[](const RunConfig& c) { return embed::to_string(c.scan_order); },
                       [](RunConfig& c, const std::string& v) { c.scan_order = embed::parse_scan_order(v); }});
    add("vocab_init",
        {[](const RunConfig& c) { return std::string(c.vocab_init == embed::VocabInit::kZero ? "zero" : "sinusoidal"); },
         [](RunConfig& c, const std::string& v) {
           if (v == "zero") {
             c.vocab_init = embed::VocabInit::kZero;
           } else if (v == "sinusoidal") {
             c.vocab_init = embed::VocabInit::kSinusoidal;
           } else {
             throw ContractError("config: vocab_init must be zero or sinusoidal");
           }
         }});
    add("sample_mode", {[](const RunConfig& c) { return to_string(c.sample_mode); },
                        [](RunConfig& c, const std::string& v) { c.sample_mode = parse_sample_mode(v); }});
    add("max_interval", number_field(&RunConfig::max_interval, "max_interval"));
    add("train_videos", number_field(&RunConfig::train_videos, "train_videos"));
    add("video_length", number_field(&RunConfig::video_length, "video_length"));
    add("frame_size", number_field(&RunConfig::frame_size, "frame_size"));
    add("occluded_fraction", number_field(&RunConfig::occluded_fraction, "occluded_fraction"));
    add("jitter_shift", number_field(&RunConfig::jitter_shift, "jitter_shift"));
    add("jitter_scale", number_field(&RunConfig::jitter_scale, "jitter_scale"));
    add("prompt_noise", number_field(&RunConfig::prompt_noise, "prompt_noise"));
    add("data_seed", number_field(&RunConfig::data_seed, "data_seed"));
    add("seed", number_field(&RunConfig::seed, "seed"));
    add("stage", number_field(&RunConfig::stage, "stage"));
    add("batch", number_field(&RunConfig::batch, "batch"));
    add("steps_stage1", number_field(&RunConfig::steps_stage1, "steps_stage1"));
    add("steps_stage2", number_field(&RunConfig::steps_stage2, "steps_stage2"));
    add("lr_stage1", number_field(&RunConfig::lr_stage1, "lr_stage1"));
    add("lr_stage2", number_field(&RunConfig::lr_stage2, "lr_stage2"));
    add("clip_norm", number_field(&RunConfig::clip_norm, "clip_norm"));
    add("query_weight", number_field(&RunConfig::query_weight, "query_weight"));
    add("l1_weight", number_field(&RunConfig::l1_weight, "l1_weight"));
    add("sigma_cells", number_field(&RunConfig::sigma_cells, "sigma_cells"));
    return v;
  }();
  return f;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

SampleMode parse_sample_mode(const std::string& s) {
  if (s == "random") return SampleMode::kRandom;
  if (s == "uniform") return SampleMode::kUniform;
  throw ContractError("unknown sample mode '" + s + "' (expected random or uniform)");
}

std::string to_string(SampleMode m) { return m == SampleMode::kRandom ? "random" : "uniform"; }

track::ModelConfig RunConfig::model_config() const {
  track::ModelConfig m;
  m.encoder = encoder::EncoderDims::with_expansion(dim, state, layers, expansion, conv_width);
  m.patch = patch;
  m.template_size = template_size;
  m.search_size = search_size;
  m.head_channels = head_channels;
  m.templates = templates;
  m.trajectory = trajectory;
  m.nbins = nbins;
  m.alpha = alpha;
  m.mode = concat_mode;
  m.order = scan_order;
  m.vocab_init = vocab_init;
  return m;
}

track::TrackerOptions RunConfig::tracker_options() const {
  track::TrackerOptions o;
  o.templates = templates;
  o.trajectory = trajectory;
  o.template_size = template_size;
  o.search_size = search_size;
  return o;
}

void RunConfig::validate() const {
  model_config().validate();
  require(dim % 2 == 0, "config: dim must be even");
  require(conv_width >= 1 && expansion >= 1, "config: conv_width and expansion must be >= 1");
  require(stage == 1 || stage == 2, "config: stage must be 1 or 2");
  require(batch >= 1, "config: batch must be >= 1");
  require(train_videos >= 1, "config: train_videos must be >= 1");
  require(video_length >= templates + trajectory + 1, "config: video_length must be >= templates + trajectory + 1");
  require(max_interval >= templates, "config: max_interval must be >= templates");
  require(frame_size >= 32, "config: frame_size must be >= 32");
  require(occluded_fraction >= 0.0 && occluded_fraction <= 1.0, "config: occluded_fraction must be in [0, 1]");
  require(jitter_shift >= 0.0 && jitter_shift < 0.5, "config: jitter_shift must be in [0, 0.5)");
  require(jitter_scale >= 0.0 && jitter_scale < 1.0, "config: jitter_scale must be in [0, 1)");
  require(prompt_noise >= 0.0, "config: prompt_noise must be >= 0");
  require(lr_stage1 >= 0.0 && lr_stage2 >= 0.0, "config: learning rates must be >= 0");
  require(clip_norm > 0.0, "config: clip_norm must be > 0");
  require(query_weight >= 0.0 && l1_weight >= 0.0 && sigma_cells > 0.0, "config: loss weights out of range");
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream os;
  for (const auto& [key, field] : fields()) os << key << '=' << field.get(c) << '\n';
  return os.str();
}

RunConfig parse_config(const std::string& text) {
  static const std::map<std::string, const Field*> by_key = [] {
    std::map<std::string, const Field*> m;
    for (const auto& [key, field] : fields()) m.emplace(key, &field);
    return m;
  }();
  RunConfig c;
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ContractError("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    const auto it = by_key.find(key);
    if (it == by_key.end()) throw ContractError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    it->second->set(c, value);
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void save_config(const std::filesystem::path& path, const RunConfig& c) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write config " + path.string());
  out << serialize_config(c);
  if (!out) throw IoError("failed writing config " + path.string());
}

}  // namespace ssmtrack::harness
