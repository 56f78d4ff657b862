// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
// Command-line front end: selftest, bench, gen, track, train, eval.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ssmtrack/bench/complexity.hpp"
#include "ssmtrack/harness/checks.hpp"
#include "ssmtrack/harness/config.hpp"
#include "ssmtrack/harness/evaluate.hpp"
#include "ssmtrack/harness/metrics.hpp"
#include "ssmtrack/harness/synthetic.hpp"
#include "ssmtrack/harness/training.hpp"
#include "ssmtrack/io/image_io.hpp"
#include "ssmtrack/io/param_store.hpp"
#include "ssmtrack/simd/kernels.hpp"
#include "ssmtrack/track/tracker.hpp"

namespace fs = std::filesystem;
using namespace ssmtrack;

namespace {

constexpr int kUsageError = 2;

int cmd_selftest(std::uint64_t seed) {
  using namespace harness;
  const CheckResult results[] = {
      check_scan_oracle(200, seed + 1),
      check_gradients(10, seed + 2),
      check_zoh_semigroup(2000, seed + 3),
      check_template_selection(),
      check_coordinate_vocabulary(200000, seed + 4),
      check_sequence_assembly(seed + 5),
      check_simd_equivalence(seed + 6),
      check_oracle_tracking(seed + 7),
      check_config_roundtrip(200, seed + 8),
  };
  int failed = 0;
  for (const auto& r : results) {
    std::cout << format_check(r) << '\n';
    failed += r.passed ? 0 : 1;
  }
  std::cout << (failed == 0 ? "selftest: all checks passed" : "selftest: " + std::to_string(failed) + " failed")
            << '\n';
  return failed == 0 ? 0 : 1;
}

std::vector<std::uint64_t> parse_lengths(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const auto v = std::stoull(item, &used);
    if (used != item.size() || v == 0) throw ContractError("bad length '" + item + "'");
    out.push_back(v);
  }
  return out;
}

int cmd_bench(const std::string& lengths, std::uint64_t dim, std::uint64_t state, std::size_t repeats,
              std::uint64_t seed, const std::string& kernels, const std::string& out) {
  bench::BenchOptions opt;
  opt.lengths = parse_lengths(lengths);
  opt.dim = dim;
  opt.state = state;
  opt.repeats = repeats;
  opt.seed = seed;
  opt.kernels.clear();
  std::stringstream ss(kernels);
  std::string k;
  while (std::getline(ss, k, ',')) opt.kernels.push_back(bench::parse_kernel(k));
  const auto records = bench::run_scaling_benchmark(opt);
  if (out.empty()) {
    std::cout << bench::format_records(records);
  } else {
    bench::emit_records(records, out);
  }
  for (auto kernel : opt.kernels) {
    std::size_t ok = 0;
    for (const auto& r : records) ok += (r.kernel == kernel && !r.truncated) ? 1 : 0;
    if (ok >= 2) {
      std::fprintf(stderr, "%s log-log slope %.3f\n", bench::to_string(kernel).c_str(),
                   bench::loglog_slope(records, kernel));
    }
  }
  return 0;
}

int cmd_gen(std::uint64_t seed, std::size_t len, const std::string& profile, std::size_t size,
            std::size_t distractors, const fs::path& out) {
  harness::VideoSpec spec;
  spec.seed = seed;
  spec.length = len;
  spec.profile = harness::parse_profile(profile);
  spec.width = spec.height = size;
  spec.distractors = distractors;
  const auto video = harness::generate_synthetic_video(spec);
  fs::create_directories(out);
  io::VideoManifest manifest;
  manifest.init_box = video.gt.front();
  std::vector<io::BoxRow> gt;
  for (std::size_t f = 0; f < video.length(); ++f) {
    char rgb[32], tir[32];
    std::snprintf(rgb, sizeof(rgb), "frame_%05zu_rgb.img", f);
    std::snprintf(tir, sizeof(tir), "frame_%05zu_tir.img", f);
    io::write_image(out / rgb, video.rgb[f]);
    io::write_image(out / tir, video.tir[f]);
    manifest.frames.push_back({rgb, tir});
    gt.push_back({f, video.gt[f], 1.0});
  }
  io::write_manifest(out / "manifest.txt", manifest);
  io::write_box_csv(out / "gt.csv", gt, false);
  std::cout << "wrote " << video.length() << " frames (" << harness::to_string(spec.profile) << ") to "
            << out.string() << '\n';
  return 0;
}

harness::TrainParams load_or_init(const harness::RunConfig& cfg, const std::string& params) {
  auto p = track::init_tracker_params<harness::TrainScalar>(cfg.model_config(), cfg.seed);
  if (!params.empty()) io::load_params(params, p);
  return p;
}

int cmd_track(const fs::path& config, const fs::path& video_path, const fs::path& out, const std::string& params) {
  const auto cfg = harness::load_config(config);
  const auto p = load_or_init(cfg, params);
  const auto video = io::load_video(video_path);
  track::NetworkPredictor<harness::TrainScalar> predictor(p, cfg.model_config());
  const auto recs = track::track_sequence(video.rgb, video.tir, video.init_box, predictor, cfg.tracker_options());
  std::vector<io::BoxRow> rows;
  for (const auto& r : recs) rows.push_back({r.frame_index, r.box, r.confidence});
  io::write_box_csv(out, rows, true);
  std::cout << "tracked " << rows.size() << " frames -> " << out.string() << '\n';
  return 0;
}

void write_trace(const fs::path& path, const std::vector<harness::StepLog>& trace) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  os << "step,head,query,total,grad_norm\n";
  for (const auto& l : trace) {
    os << l.step << ',' << io::format_double(l.head) << ',' << io::format_double(l.query) << ','
       << io::format_double(l.total()) << ',' << io::format_double(l.grad_norm) << '\n';
  }
  if (!os) throw IoError("write failed: " + path.string());
}

int cmd_train(const fs::path& config, int stage, const fs::path& out, std::string init) {
  auto cfg = harness::load_config(config);
  cfg.stage = stage;
  fs::create_directories(out);
  if (stage == 2 && init.empty()) init = (out / "stage1.bin").string();
  auto params = load_or_init(cfg, stage == 2 ? init : "");
  const auto pool = harness::make_training_pool(cfg);
  if (stage == 2) {
    // Checkpoint fidelity: the loaded weights on the stage-1 final batch.
    const auto last = harness::training_batch(pool, cfg, 1, cfg.steps_stage1 - 1);
    std::cout << "handoff head loss on stage-1 final batch: "
              << io::format_double(harness::evaluate_batch(params, cfg, last).head) << '\n';
  }
  const std::size_t steps = stage == 1 ? cfg.steps_stage1 : cfg.steps_stage2;
  const auto result = harness::train_stage(params, cfg, stage, pool, [&](const harness::StepLog& l) {
    if (l.step % 100 == 0 || l.step + 1 == steps) {
      std::printf("stage %d step %zu head %.6f query %.6f\n", stage, l.step, l.head, l.query);
      std::fflush(stdout);
    }
  });
  const std::string tag = "stage" + std::to_string(stage);
  io::save_params(out / (tag + ".bin"), params);
  write_trace(out / ("loss_" + tag + ".csv"), result.trace);
  std::cout << tag << " final head loss " << io::format_double(result.final_head_loss) << ", prompt box reads "
            << result.data.prompt_box_reads << '\n';
  return 0;
}

int cmd_eval(const fs::path& pred_path, const fs::path& gt_path) {
  const auto pred = io::read_box_csv(pred_path);
  const auto gt = io::read_box_csv(gt_path);
  if (pred.size() != gt.size()) {
    throw ContractError("eval: " + std::to_string(pred.size()) + " predicted rows vs " + std::to_string(gt.size()) +
                        " ground-truth rows");
  }
  std::vector<Box> a, b;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i].frame_index != gt[i].frame_index) throw ContractError("eval: frame indices are not aligned");
    a.push_back(pred[i].box);
    b.push_back(gt[i].box);
  }
  const auto m = harness::compute_metrics(a, b);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "PR=%.4f SR=%.4f", m.precision, m.success);
  std::cout << buf << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ssmtrack: selective-scan RGB-T tracker toolkit"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  auto* selftest = app.add_subcommand("selftest", "Run the invariant suites; nonzero exit on failure");
  selftest->add_option("--seed", seed, "Seed for the randomized checks");

  std::string lengths = "4096,8192,16384,32768", kernels = "attention,scan", bench_out;
  std::uint64_t dim = 64, state = 16;
  std::size_t repeats = 5;
  auto* bench_cmd = app.add_subcommand("bench", "Scan vs attention scaling benchmark (CSV)");
  bench_cmd->add_option("--lengths", lengths, "Comma-separated ascending sequence lengths");
  bench_cmd->add_option("--dim", dim, "Channel dimension D");
  bench_cmd->add_option("--state", state, "Scan state size N");
  bench_cmd->add_option("--repeats", repeats, "Timed repeats (>= 5)");
  bench_cmd->add_option("--seed", seed, "Input seed");
  bench_cmd->add_option("--kernels", kernels, "Comma-separated subset of attention,scan");
  bench_cmd->add_option("--out", bench_out, "Output CSV (default: stdout)");

  std::size_t len = 48, size = 128, distractors = 2;
  std::string profile = "linear";
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic RGB-T video");
  gen->add_option("--seed", seed, "Video seed")->required();
  gen->add_option("--len", len, "Frame count")->required();
  gen->add_option("--profile", profile, "linear | sinusoidal | occluded-segment")->required();
  gen->add_option("--size", size, "Frame side in pixels");
  gen->add_option("--distractors", distractors, "Distractor count");
  gen->add_option("--out", gen_out, "Output directory")->required();

  std::string config, video, track_out, params;
  auto* track_cmd = app.add_subcommand("track", "Track a video and write per-frame boxes");
  track_cmd->add_option("--config", config, "Run configuration file")->required()->check(CLI::ExistingFile);
  track_cmd->add_option("--video", video, "Video manifest or directory")->required();
  track_cmd->add_option("--out", track_out, "Output CSV")->required();
  track_cmd->add_option("--params", params, "Parameter checkpoint (default: seeded initialization)");

  int stage = 1;
  std::string train_out = ".", init;
  auto* train = app.add_subcommand("train", "Run one training stage on synthetic data");
  train->add_option("--config", config, "Run configuration file")->required()->check(CLI::ExistingFile);
  train->add_option("--stage", stage, "Stage 1 or 2")->required()->check(CLI::IsMember({1, 2}));
  train->add_option("--out", train_out, "Output directory for checkpoint and loss trace");
  train->add_option("--init", init, "Stage-2 starting checkpoint (default: <out>/stage1.bin)");

  std::string pred, gt;
  auto* eval = app.add_subcommand("eval", "Compute PR and SR from prediction and ground-truth CSVs");
  eval->add_option("--pred", pred, "Predicted boxes CSV")->required();
  eval->add_option("--gt", gt, "Ground-truth boxes CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*selftest) return cmd_selftest(seed);
    if (*bench_cmd) return cmd_bench(lengths, dim, state, repeats, seed, kernels, bench_out);
    if (*gen) return cmd_gen(seed, len, profile, size, distractors, gen_out);
    if (*track_cmd) return cmd_track(config, video, track_out, params);
    if (*train) return cmd_train(config, stage, train_out, init);
    if (*eval) return cmd_eval(pred, gt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kUsageError;
}
