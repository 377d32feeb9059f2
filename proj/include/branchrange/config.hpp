#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "branchrange/core.hpp"
#include "branchrange/ranger.hpp"
#include "branchrange/refine.hpp"
#include "branchrange/stereo.hpp"
#include "branchrange/synth.hpp"

namespace branchrange {

struct OutputNames {
  std::string disparity = "disparity.pfm";
  std::string depth = "depth.pfm";
  std::string visualization = "disparity.png";
  friend bool operator==(const OutputNames&, const OutputNames&) = default;
};

struct EvalSettings {
  double histogram_bin_width_m = 0.05;
  /// Worker threads for scene-level and inner loops; 0 means hardware default.
  int threads = 0;
  friend bool operator==(const EvalSettings&, const EvalSettings&) = default;
};

struct SynthSettings {
  std::uint64_t seed = 7;
  double noise_sigma = 2.0;
  friend bool operator==(const SynthSettings&, const SynthSettings&) = default;
};

/// Everything a CLI run can be configured with. Every field has a default;
/// a config file only needs the keys it overrides.
struct RunConfig {
  CameraRig rig;
  MatchParams match;
  WlsParams wls;
  bool wls_enabled = true;
  RangerParams ranger;
  OutputNames io;
  EvalSettings eval;
  SynthSettings synth;

  void validate() const;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

nlohmann::json config_to_json(const RunConfig& config);

/// Overlays `doc` onto the defaults. Unknown keys and wrongly typed values
/// throw ParseError; out-of-range values throw InvalidParams.
RunConfig config_from_json(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);

std::string to_string(CostMetric metric);
std::string to_string(BandOrientation orientation);

nlohmann::json rig_to_json(const CameraRig& rig);
CameraRig rig_from_json(const nlohmann::json& doc);
nlohmann::json scene_spec_to_json(const SceneSpec& spec);
SceneSpec scene_spec_from_json(const nlohmann::json& doc);
nlohmann::json range_estimate_to_json(const RangeEstimate& estimate);

}  // namespace branchrange
