#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "branchrange/config.hpp"

namespace branchrange {

struct StageTimings {
  double matching_ms = 0.0;
  double refine_ms = 0.0;
  double depth_ms = 0.0;
  double ranging_ms = 0.0;
};

struct DepthResult {
  DisparityMap disparity;
  DepthMap depth;
  StageTimings timings;
};

/// sgbm, then WLS refinement when enabled, then triangulation.
DepthResult compute_depth(const ImageGray& left, const ImageGray& right, const RunConfig& config);

/// 8-bit rendering of a disparity map: valid min -> 0, valid max -> 255,
/// invalid pixels 0. A constant map renders as all zeros.
ImageGray visualize_disparity(const DisparityMap& disparity);

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
};

/// Equal-width bins covering [0, upper) with upper = n * bin_width the
/// smallest multiple of bin_width above both `range_hi` and every value.
/// Every value lands in exactly one bin; negative values go to the first.
std::vector<HistogramBin> make_histogram(const std::vector<double>& values, double bin_width, double range_hi);

/// Index of the bin holding `value`, robust to rounding in value / bin_width.
std::size_t histogram_bin_index(double value, double bin_width);

struct SceneResult {
  std::string scene_id;
  double true_depth_m = 0.0;
  double background_depth_m = 0.0;
  bool ok = false;
  std::string error_kind;
  std::string error_message;
  RangeEstimate estimate;
  double abs_error_m = 0.0;
  double rel_error = 0.0;
  StageTimings timings;
  std::vector<HistogramBin> histogram;
};

struct EvalReport {
  std::vector<SceneResult> scenes;
  std::size_t n_ok = 0;
  double mean_rel_error = 0.0;
  double max_rel_error = 0.0;
  double bin_width_m = 0.05;
  std::vector<HistogramBin> histogram;
  bool use_gt_depth = false;
};

struct EvalOptions {
  bool use_gt_depth = false;
  int threads = 0;
};

/// Ranges every scene listed in `scenes_dir/manifest.json`. Scenes run
/// concurrently; results are assembled in manifest order. A failing scene is
/// recorded in the report rather than thrown.
EvalReport evaluate_scenes(const std::filesystem::path& scenes_dir, const RunConfig& config,
                           const EvalOptions& options);

nlohmann::json report_to_json(const EvalReport& report, bool with_timings);
std::string histogram_csv(const std::vector<HistogramBin>& bins);

/// Writes scene bundles plus manifest.json (with a sha256 per file) into
/// `out_dir`. Returns the manifest.
nlohmann::json write_scene_set(const std::filesystem::path& out_dir, const std::vector<SceneBundle>& bundles,
                               std::uint64_t seed);

/// Sets the worker count used by internal parallel loops; 0 restores the default.
void set_thread_count(int threads);

}  // namespace branchrange
