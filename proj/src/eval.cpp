#include "branchrange/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "branchrange/io.hpp"

namespace branchrange {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

ImageGray mask_to_image(const SegMask& mask) {
  ImageGray img(mask.width(), mask.height(), 0);
  for (std::size_t i = 0; i < img.size(); ++i) img.data()[i] = mask.bitmap.data()[i] ? 255 : 0;
  return img;
}

json bin_to_json(const HistogramBin& b) { return {{"lo", b.lo}, {"hi", b.hi}, {"count", b.count}}; }

SceneResult evaluate_one(const fs::path& scenes_dir, const json& entry, const json& files, const RunConfig& config,
                         bool use_gt_depth) {
  SceneResult result;
  result.scene_id = entry.value("id", std::string{});
  try {
    require(entry.contains("dir") && entry["dir"].is_string(), ErrorKind::ParseError, "scene entry lacks dir");
    const std::string dir_name = entry["dir"].get<std::string>();
    const fs::path dir = scenes_dir / dir_name;

    // Integrity check against the manifest before trusting any input.
    for (const json& f : files) {
      const std::string path = f.at("path").get<std::string>();
      if (path.rfind(dir_name + "/", 0) != 0) continue;
      const io::Bytes bytes = io::read_file(scenes_dir / path);
      require(io::sha256_hex(bytes) == f.at("sha256").get<std::string>(), ErrorKind::ParseError,
              "checksum mismatch for " + path);
    }

    const SceneSpec spec = scene_spec_from_json(json::parse(io::read_text_file(dir / "scene.json")));
    require(!spec.cylinders.empty(), ErrorKind::SpecInvalid, "scene has no branch");
    result.true_depth_m = spec.cylinders.front().depth_m;
    result.background_depth_m = spec.background_depth_m;

    const SegMask mask = load_mask(dir / "mask.png", MaskFormat::PngBitmask);
    DepthMap depth;
    if (use_gt_depth) {
      depth = io::read_pfm<DepthTag>(dir / "gt_depth.pfm");
    } else {
      RunConfig scene_config = config;
      scene_config.rig = spec.rig;
      DepthResult computed =
          compute_depth(io::read_png(dir / "left.png"), io::read_png(dir / "right.png"), scene_config);
      depth = std::move(computed.depth);
      result.timings = computed.timings;
    }

    const auto t0 = Clock::now();
    result.estimate = estimate_distance(mask, depth, config.ranger);
    result.timings.ranging_ms = elapsed_ms(t0);
    result.abs_error_m = std::fabs(result.estimate.distance_m - result.true_depth_m);
    result.rel_error = result.abs_error_m / result.true_depth_m;
    result.ok = true;
  } catch (const Error& e) {
    result.error_kind = std::string(to_string(e.kind()));
    result.error_message = e.what();
  } catch (const std::exception& e) {
    result.error_kind = "ParseError";
    result.error_message = e.what();
  }
  return result;
}

}  // namespace

void set_thread_count(int threads) {
#ifdef _OPENMP
  omp_set_num_threads(threads > 0 ? threads : omp_get_num_procs());
#else
  (void)threads;
#endif
}

DepthResult compute_depth(const ImageGray& left, const ImageGray& right, const RunConfig& config) {
  config.validate();
  require(left.same_shape(right), ErrorKind::DimensionMismatch, "left and right images differ in size");
  require(left.same_shape(config.rig.width_px, config.rig.height_px), ErrorKind::DimensionMismatch,
          "image size differs from the configured rig size");
  DepthResult result;
  auto t0 = Clock::now();
  result.disparity = sgbm(left, right, config.match);
  result.timings.matching_ms = elapsed_ms(t0);
  if (config.wls_enabled) {
    t0 = Clock::now();
    result.disparity = wls_refine(result.disparity, left, config.wls);
    result.timings.refine_ms = elapsed_ms(t0);
  }
  t0 = Clock::now();
  result.depth = depth_map_from_disparity(result.disparity, config.rig);
  result.timings.depth_ms = elapsed_ms(t0);
  return result;
}

ImageGray visualize_disparity(const DisparityMap& disparity) {
  ImageGray img(disparity.width(), disparity.height(), 0);
  float lo = 0.0f;
  float hi = 0.0f;
  bool any = false;
  for (float d : disparity.data()) {
    if (!is_valid_disparity(d)) continue;
    lo = any ? std::min(lo, d) : d;
    hi = any ? std::max(hi, d) : d;
    any = true;
  }
  if (!any || hi <= lo) return img;
  const double scale = 255.0 / (static_cast<double>(hi) - lo);
  for (std::size_t i = 0; i < img.size(); ++i) {
    const float d = disparity.data()[i];
    if (is_valid_disparity(d)) img.data()[i] = static_cast<std::uint8_t>(std::lround((d - lo) * scale));
  }
  return img;
}

std::size_t histogram_bin_index(double value, double bin_width) {
  if (!(value > 0.0)) return 0;
  auto idx = static_cast<std::size_t>(std::floor(value / bin_width));
  if (static_cast<double>(idx + 1) * bin_width <= value) ++idx;
  if (idx > 0 && static_cast<double>(idx) * bin_width > value) --idx;
  return idx;
}

std::vector<HistogramBin> make_histogram(const std::vector<double>& values, double bin_width, double range_hi) {
  require(bin_width > 0.0, ErrorKind::InvalidParams, "bin width must be positive");
  double top = std::max(range_hi, 0.0);
  for (double v : values) top = std::max(top, v);
  const std::size_t n = histogram_bin_index(top, bin_width) + 1;
  std::vector<HistogramBin> bins(n);
  for (std::size_t i = 0; i < n; ++i) {
    bins[i].lo = static_cast<double>(i) * bin_width;
    bins[i].hi = static_cast<double>(i + 1) * bin_width;
  }
  for (double v : values) ++bins[histogram_bin_index(v, bin_width)].count;
  return bins;
}

EvalReport evaluate_scenes(const fs::path& scenes_dir, const RunConfig& config, const EvalOptions& options) {
  config.validate();
  json manifest;
  try {
    manifest = json::parse(io::read_text_file(scenes_dir / "manifest.json"));
  } catch (const json::parse_error& e) {
    fail(ErrorKind::ParseError, std::string("manifest.json: ") + e.what());
  }
  require(manifest.is_object() && manifest.contains("scenes") && manifest["scenes"].is_array(),
          ErrorKind::ParseError, "manifest.json lacks a scenes array");
  const json& entries = manifest["scenes"];
  const json files = manifest.value("files", json::array());

  EvalReport report;
  report.use_gt_depth = options.use_gt_depth;
  report.bin_width_m = config.eval.histogram_bin_width_m;
  report.scenes.resize(entries.size());

  const int threads = options.threads > 0 ? options.threads
                                          : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  set_thread_count(threads);
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), entries.size());
  std::atomic<std::size_t> next{0};
  const int inner_threads = std::max(1, threads / static_cast<int>(std::max<std::size_t>(workers, 1)));
  const auto work = [&] {
    set_thread_count(inner_threads);
    for (std::size_t i = next++; i < entries.size(); i = next++) {
      report.scenes[i] = evaluate_one(scenes_dir, entries[i], files, config, options.use_gt_depth);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
  }

  // Ordered reduction.
  double range_hi = 0.0;
  std::vector<double> all_retained;
  double rel_sum = 0.0;
  for (const SceneResult& s : report.scenes) {
    range_hi = std::max(range_hi, s.background_depth_m);
    if (!s.ok) continue;
    ++report.n_ok;
    rel_sum += s.rel_error;
    report.max_rel_error = std::max(report.max_rel_error, s.rel_error);
    all_retained.insert(all_retained.end(), s.estimate.retained_values.begin(), s.estimate.retained_values.end());
  }
  if (report.n_ok > 0) report.mean_rel_error = rel_sum / static_cast<double>(report.n_ok);
  for (double v : all_retained) range_hi = std::max(range_hi, v);
  report.histogram = make_histogram(all_retained, report.bin_width_m, range_hi);
  for (SceneResult& s : report.scenes) {
    if (s.ok) s.histogram = make_histogram(s.estimate.retained_values, report.bin_width_m, range_hi);
  }
  return report;
}

json report_to_json(const EvalReport& report, bool with_timings) {
  json scenes = json::array();
  for (const SceneResult& s : report.scenes) {
    json entry = {{"scene_id", s.scene_id}, {"ok", s.ok}};
    if (!s.ok) {
      entry["error"] = {{"kind", s.error_kind}, {"message", s.error_message}};
      scenes.push_back(entry);
      continue;
    }
    entry["true_depth_m"] = s.true_depth_m;
    entry["estimated_m"] = s.estimate.distance_m;
    entry["abs_error_m"] = s.abs_error_m;
    entry["rel_error"] = s.rel_error;
    entry["n_retained"] = s.estimate.n_retained;
    entry["n_rejected"] = s.estimate.rejected_values.size();
    entry["estimate"] = range_estimate_to_json(s.estimate);
    json counts = json::array();
    std::size_t mode = 0;
    for (std::size_t i = 0; i < s.histogram.size(); ++i) {
      counts.push_back(s.histogram[i].count);
      if (s.histogram[i].count > s.histogram[mode].count) mode = i;
    }
    entry["histogram_counts"] = counts;
    if (!s.histogram.empty()) entry["modal_bin"] = bin_to_json(s.histogram[mode]);
    if (with_timings) {
      entry["runtime_ms"] = {{"matching", s.timings.matching_ms},
                             {"refine", s.timings.refine_ms},
                             {"depth", s.timings.depth_ms},
                             {"ranging", s.timings.ranging_ms}};
    }
    scenes.push_back(entry);
  }
  json bins = json::array();
  for (const HistogramBin& b : report.histogram) bins.push_back(bin_to_json(b));
  return {{"use_gt_depth", report.use_gt_depth},
          {"scenes", scenes},
          {"aggregate",
           {{"n_scenes", report.scenes.size()},
            {"n_ok", report.n_ok},
            {"mean_rel_error", report.mean_rel_error},
            {"max_rel_error", report.max_rel_error}}},
          {"histogram", {{"bin_width_m", report.bin_width_m}, {"bins", bins}}}};
}

std::string histogram_csv(const std::vector<HistogramBin>& bins) {
  std::string out = "lo,hi,count\n";
  char line[96];
  for (const HistogramBin& b : bins) {
    std::snprintf(line, sizeof(line), "%.10g,%.10g,%zu\n", b.lo, b.hi, b.count);
    out += line;
  }
  return out;
}

json write_scene_set(const fs::path& out_dir, const std::vector<SceneBundle>& bundles, std::uint64_t seed) {
  io::OutputBatch batch;
  json scenes = json::array();
  json files = json::array();
  const auto add = [&](const std::string& rel, io::Bytes bytes) {
    files.push_back({{"path", rel}, {"bytes", bytes.size()}, {"sha256", io::sha256_hex(bytes)}});
    batch.add(out_dir / rel, std::move(bytes));
  };
  for (std::size_t i = 0; i < bundles.size(); ++i) {
    const SceneBundle& b = bundles[i];
    char name[32];
    std::snprintf(name, sizeof(name), "scene_%03zu", i);
    const std::string dir = name;
    add(dir + "/left.png", io::encode_png(b.left));
    add(dir + "/right.png", io::encode_png(b.right));
    add(dir + "/mask.png", io::encode_png(mask_to_image(b.mask)));
    add(dir + "/gt_disparity.pfm", io::encode_pfm(b.gt_disparity));
    add(dir + "/gt_depth.pfm", io::encode_pfm(b.gt_depth));
    const std::string spec_text = scene_spec_to_json(b.spec).dump(2) + "\n";
    add(dir + "/scene.json", io::Bytes(spec_text.begin(), spec_text.end()));
    json entry = {{"id", dir}, {"dir", dir}, {"background_depth_m", b.spec.background_depth_m}};
    entry["true_depth_m"] = b.spec.cylinders.empty() ? json(nullptr) : json(b.spec.cylinders.front().depth_m);
    scenes.push_back(entry);
  }
  json manifest = {{"format", "branchrange-scenes"}, {"version", 1}, {"seed", seed}, {"scenes", scenes},
                   {"files", files}};
  batch.add(out_dir / "manifest.json", manifest.dump(2) + "\n");
  batch.commit();
  return manifest;
}

}  // namespace branchrange
