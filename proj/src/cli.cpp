#include "branchrange/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <iostream>
#include <optional>

#include "branchrange/config.hpp"
#include "branchrange/eval.hpp"
#include "branchrange/io.hpp"

namespace branchrange::cli {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptyMask: return kExitEmptyMask;
    case ErrorKind::NoValidDepths: return kExitNoValidDepths;
    default: return kExitInput;
  }
}

namespace {

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

RunConfig effective_config(const GlobalOptions& g) {
  RunConfig config = g.config_path.empty() ? RunConfig{} : load_config(g.config_path);
  if (g.seed) config.synth.seed = *g.seed;
  if (g.threads) config.eval.threads = *g.threads;
  config.validate();
  return config;
}

int cmd_depth(const RunConfig& config, const std::string& left_path, const std::string& right_path,
              const fs::path& out_dir, std::ostream& out) {
  set_thread_count(config.eval.threads);
  const ImageGray left = io::read_png(left_path);
  const ImageGray right = io::read_png(right_path);
  const DepthResult result = compute_depth(left, right, config);

  io::OutputBatch batch;
  batch.add(out_dir / config.io.disparity, io::encode_pfm(result.disparity));
  batch.add(out_dir / config.io.depth, io::encode_pfm(result.depth));
  batch.add(out_dir / config.io.visualization, io::encode_png(visualize_disparity(result.disparity)));
  batch.commit();

  std::size_t valid = 0;
  for (float d : result.disparity.data()) valid += is_valid_disparity(d) ? 1 : 0;
  json summary = {{"disparity", (out_dir / config.io.disparity).string()},
                  {"depth", (out_dir / config.io.depth).string()},
                  {"visualization", (out_dir / config.io.visualization).string()},
                  {"valid_fraction", static_cast<double>(valid) / static_cast<double>(result.disparity.size())}};
  out << summary.dump(2) << "\n";
  return kExitOk;
}

int cmd_range(const RunConfig& config, const std::string& depth_path, const std::string& mask_path,
              const std::string& mask_format, std::ostream& out) {
  const DepthMap depth = io::read_pfm<DepthTag>(depth_path);
  MaskFormat format = mask_format_for(mask_path);
  if (mask_format == "png") format = MaskFormat::PngBitmask;
  if (mask_format == "json") format = MaskFormat::PolygonJson;
  const SegMask mask = load_mask(mask_path, format);
  const RangeEstimate estimate = estimate_distance(mask, depth, config.ranger);
  out << range_estimate_to_json(estimate).dump(2) << "\n";
  return kExitOk;
}

int cmd_synth(const RunConfig& config, const fs::path& out_dir, const std::string& spec_path, std::ostream& out) {
  std::vector<SceneSpec> specs;
  if (spec_path.empty()) {
    specs = paper_protocol_specs(config.rig, config.synth.seed, config.match.d_max);
    for (SceneSpec& s : specs) s.noise_sigma = config.synth.noise_sigma;
  } else {
    json doc;
    try {
      doc = json::parse(io::read_text_file(spec_path));
    } catch (const json::parse_error& e) {
      fail(ErrorKind::ParseError, spec_path + ": " + e.what());
    }
    // Either one scene object or {"scenes": [...]}.
    if (doc.is_object() && doc.contains("scenes")) {
      require(doc.size() == 1 && doc["scenes"].is_array(), ErrorKind::ParseError,
              "scene file must hold only a scenes array");
      for (const json& item : doc["scenes"]) specs.push_back(scene_spec_from_json(item));
    } else {
      specs.push_back(scene_spec_from_json(doc));
    }
  }
  std::vector<SceneBundle> bundles;
  for (const SceneSpec& spec : specs) bundles.push_back(generate_scene(spec));
  const json manifest = write_scene_set(out_dir, bundles, config.synth.seed);
  out << "wrote " << bundles.size() << " scene(s) and " << manifest["files"].size() << " files to "
      << out_dir.string() << "\n";
  return kExitOk;
}

int cmd_eval(const RunConfig& config, const fs::path& scenes_dir, const fs::path& out_path, bool use_gt_depth,
             std::string csv_path, bool with_timings, std::ostream& out, std::ostream& err) {
  EvalOptions options;
  options.use_gt_depth = use_gt_depth;
  options.threads = config.eval.threads;
  const EvalReport report = evaluate_scenes(scenes_dir, config, options);

  if (csv_path.empty()) {
    fs::path p = out_path;
    p.replace_extension();
    csv_path = p.string() + "_histogram.csv";
  }
  io::OutputBatch batch;
  batch.add(out_path, report_to_json(report, with_timings).dump(2) + "\n");
  batch.add(csv_path, histogram_csv(report.histogram));
  batch.commit();

  for (const SceneResult& s : report.scenes) {
    if (s.ok) {
      out << s.scene_id << ": true " << s.true_depth_m << " m, estimated " << s.estimate.distance_m
          << " m, rel error " << s.rel_error << "\n";
    } else {
      err << s.scene_id << ": failed: " << s.error_message << "\n";
    }
  }
  out << "mean rel error " << report.mean_rel_error << ", max rel error " << report.max_rel_error << "\n";
  if (report.n_ok == 0) {
    err << "all scenes failed\n";
    return kExitAllScenesFailed;
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stereo depth and branch distance estimation", "branchrange"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--config", g.config_path, "JSON config file (keys override defaults)")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Seed for scene generation");
  app.add_option("--threads", g.threads, "Worker threads (0 = hardware default)")->check(CLI::NonNegativeNumber);

  std::string left_path, right_path, out_dir;
  auto* depth = app.add_subcommand("depth", "Compute disparity and depth maps from a rectified pair");
  depth->add_option("left", left_path, "Left image (8-bit PNG)")->required();
  depth->add_option("right", right_path, "Right image (8-bit PNG)")->required();
  depth->add_option("out_dir", out_dir, "Output directory")->required();

  std::string depth_path, mask_path, mask_format = "auto";
  auto* range = app.add_subcommand("range", "Estimate branch distance from a depth map and a mask");
  range->add_option("depth", depth_path, "Depth map (PFM)")->required();
  range->add_option("mask", mask_path, "Mask (PNG bitmask or polygon JSON)")->required();
  range->add_option("--mask-format", mask_format, "auto, png or json")
      ->check(CLI::IsMember({"auto", "png", "json"}));

  std::string synth_out, spec_path;
  auto* synth = app.add_subcommand("synth", "Write synthetic ground-truth scenes");
  synth->add_option("out_dir", synth_out, "Output directory")->required();
  synth->add_option("--spec", spec_path, "Scene spec JSON instead of the 1/1.5/2 m protocol")
      ->check(CLI::ExistingFile);

  std::string scenes_dir, report_path, csv_path;
  bool use_gt_depth = false;
  bool with_timings = false;
  auto* eval = app.add_subcommand("eval", "Run the pipeline over a scene set and write a report");
  eval->add_option("scenes_dir", scenes_dir, "Directory written by synth")->required();
  eval->add_option("out_path", report_path, "Report JSON path")->required();
  eval->add_flag("--use-gt-depth", use_gt_depth, "Range on ground-truth depth instead of matching");
  eval->add_option("--histogram-csv", csv_path, "Histogram CSV path (default: <report>_histogram.csv)");
  eval->add_flag("--with-timings", with_timings, "Include per-stage runtimes in the report");

  auto* config_cmd = app.add_subcommand("config", "Print the effective configuration as JSON");

  for (auto* sub : {depth, range, synth, eval, config_cmd}) sub->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    const RunConfig config = effective_config(g);
    if (*depth) return cmd_depth(config, left_path, right_path, out_dir, out);
    if (*range) return cmd_range(config, depth_path, mask_path, mask_format, out);
    if (*synth) return cmd_synth(config, synth_out, spec_path, out);
    if (*eval) {
      return cmd_eval(config, scenes_dir, report_path, use_gt_depth, csv_path, with_timings, out, err);
    }
    if (*config_cmd) {
      out << config_to_json(config).dump(2) << "\n";
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInput;
}

}  // namespace branchrange::cli
