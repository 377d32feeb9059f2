#include "branchrange/config.hpp"

#include <set>

#include "branchrange/io.hpp"

namespace branchrange {

using nlohmann::json;

namespace {

// Reads optional keys from one JSON object and rejects anything it was not
// asked about.
class Section {
 public:
  Section(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
    require(doc.is_object(), ErrorKind::ParseError, "'" + path_ + "' must be an object");
  }

  void read(const char* key, int& out) {
    if (const json* v = find(key)) {
      require(v->is_number_integer(), ErrorKind::ParseError, where(key) + " must be an integer");
      out = v->get<int>();
    }
  }
  void read(const char* key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      require(v->is_number_unsigned() || (v->is_number_integer() && v->get<std::int64_t>() >= 0),
              ErrorKind::ParseError, where(key) + " must be a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }
  void read(const char* key, double& out) {
    if (const json* v = find(key)) {
      require(v->is_number(), ErrorKind::ParseError, where(key) + " must be a number");
      out = v->get<double>();
    }
  }
  void read(const char* key, float& out) {
    double tmp = out;
    read(key, tmp);
    out = static_cast<float>(tmp);
  }
  void read(const char* key, bool& out) {
    if (const json* v = find(key)) {
      require(v->is_boolean(), ErrorKind::ParseError, where(key) + " must be a boolean");
      out = v->get<bool>();
    }
  }
  void read(const char* key, std::string& out) {
    if (const json* v = find(key)) {
      require(v->is_string(), ErrorKind::ParseError, where(key) + " must be a string");
      out = v->get<std::string>();
    }
  }
  const json* section(const char* key) { return find(key); }

  void finish() const {
    for (const auto& item : doc_.items()) {
      require(seen_.count(item.key()) > 0, ErrorKind::ParseError, "unknown key " + where(item.key().c_str()));
    }
  }

 private:
  const json* find(const char* key) {
    seen_.insert(key);
    auto it = doc_.find(key);
    return it == doc_.end() ? nullptr : &*it;
  }
  std::string where(const char* key) const { return "'" + (path_.empty() ? "" : path_ + ".") + key + "'"; }

  const json& doc_;
  std::string path_;
  std::set<std::string> seen_;
};

CostMetric metric_from_string(const std::string& s) {
  if (s == "census") return CostMetric::Census;
  if (s == "sad") return CostMetric::SAD;
  fail(ErrorKind::ParseError, "metric must be \"census\" or \"sad\", got \"" + s + "\"");
}

BandOrientation orientation_from_string(const std::string& s) {
  if (s == "vertical") return BandOrientation::Vertical;
  if (s == "horizontal") return BandOrientation::Horizontal;
  if (s == "angled") return BandOrientation::Angled;
  fail(ErrorKind::ParseError, "orientation must be vertical, horizontal or angled");
}

void read_rig(Section& s, CameraRig& rig) {
  s.read("focal_px", rig.focal_px);
  s.read("baseline_m", rig.baseline_m);
  s.read("cx_px", rig.cx_px);
  s.read("cy_px", rig.cy_px);
  s.read("width_px", rig.width_px);
  s.read("height_px", rig.height_px);
  s.finish();
}

}  // namespace

std::string to_string(CostMetric metric) { return metric == CostMetric::Census ? "census" : "sad"; }

std::string to_string(BandOrientation orientation) {
  switch (orientation) {
    case BandOrientation::Vertical: return "vertical";
    case BandOrientation::Horizontal: return "horizontal";
    case BandOrientation::Angled: return "angled";
  }
  return "vertical";
}

void RunConfig::validate() const {
  rig.validate();
  match.validate();
  wls.validate();
  ranger.validate();
  require(eval.histogram_bin_width_m > 0.0, ErrorKind::InvalidParams, "histogram_bin_width_m must be > 0");
  require(eval.threads >= 0, ErrorKind::InvalidParams, "threads must be >= 0");
  require(synth.noise_sigma >= 0.0, ErrorKind::InvalidParams, "synth.noise_sigma must be >= 0");
  for (const std::string* name : {&io.disparity, &io.depth, &io.visualization}) {
    require(!name->empty() && name->find('/') == std::string::npos, ErrorKind::InvalidParams,
            "output names must be plain file names");
  }
}

json rig_to_json(const CameraRig& rig) {
  return {{"focal_px", rig.focal_px}, {"baseline_m", rig.baseline_m}, {"cx_px", rig.cx_px},
          {"cy_px", rig.cy_px},       {"width_px", rig.width_px},     {"height_px", rig.height_px}};
}

CameraRig rig_from_json(const json& doc) {
  CameraRig rig;
  Section s(doc, "rig");
  read_rig(s, rig);
  return rig;
}

json config_to_json(const RunConfig& c) {
  json doc;
  doc["rig"] = rig_to_json(c.rig);
  doc["match"] = {{"d_max", c.match.d_max},
                  {"window_radius", c.match.window_radius},
                  {"metric", to_string(c.match.metric)},
                  {"p1", c.match.p1},
                  {"p2", c.match.p2},
                  {"paths", c.match.paths},
                  {"lr_tol", c.match.lr_tol},
                  {"speckle_max_size", c.match.speckle_max_size},
                  {"speckle_diff", c.match.speckle_diff},
                  {"subpixel", c.match.subpixel},
                  {"uniqueness_ratio", c.match.uniqueness_ratio}};
  doc["wls"] = {{"enabled", c.wls_enabled},
                {"lambda", c.wls.lambda},
                {"sigma_color", c.wls.sigma_color},
                {"iterations", c.wls.iterations},
                {"fill_invalid", c.wls.fill_invalid}};
  doc["ranger"] = {{"m", c.ranger.m},
                   {"expand_radius_px", c.ranger.expand_radius_px},
                   {"k_mad", c.ranger.k_mad},
                   {"stride", c.ranger.stride}};
  doc["io"] = {{"disparity_file", c.io.disparity}, {"depth_file", c.io.depth},
               {"visualization_file", c.io.visualization}};
  doc["eval"] = {{"histogram_bin_width_m", c.eval.histogram_bin_width_m}, {"threads", c.eval.threads}};
  doc["synth"] = {{"seed", c.synth.seed}, {"noise_sigma", c.synth.noise_sigma}};
  return doc;
}

RunConfig config_from_json(const json& doc) {
  RunConfig c;
  Section top(doc, "");
  if (const json* j = top.section("rig")) {
    Section s(*j, "rig");
    read_rig(s, c.rig);
  }
  if (const json* j = top.section("match")) {
    Section s(*j, "match");
    s.read("d_max", c.match.d_max);
    s.read("window_radius", c.match.window_radius);
    std::string metric = to_string(c.match.metric);
    s.read("metric", metric);
    c.match.metric = metric_from_string(metric);
    s.read("p1", c.match.p1);
    s.read("p2", c.match.p2);
    s.read("paths", c.match.paths);
    s.read("lr_tol", c.match.lr_tol);
    s.read("speckle_max_size", c.match.speckle_max_size);
    s.read("speckle_diff", c.match.speckle_diff);
    s.read("subpixel", c.match.subpixel);
    s.read("uniqueness_ratio", c.match.uniqueness_ratio);
    s.finish();
  }
  if (const json* j = top.section("wls")) {
    Section s(*j, "wls");
    s.read("enabled", c.wls_enabled);
    s.read("lambda", c.wls.lambda);
    s.read("sigma_color", c.wls.sigma_color);
    s.read("iterations", c.wls.iterations);
    s.read("fill_invalid", c.wls.fill_invalid);
    s.finish();
  }
  if (const json* j = top.section("ranger")) {
    Section s(*j, "ranger");
    s.read("m", c.ranger.m);
    s.read("expand_radius_px", c.ranger.expand_radius_px);
    s.read("k_mad", c.ranger.k_mad);
    s.read("stride", c.ranger.stride);
    s.finish();
  }
  if (const json* j = top.section("io")) {
    Section s(*j, "io");
    s.read("disparity_file", c.io.disparity);
    s.read("depth_file", c.io.depth);
    s.read("visualization_file", c.io.visualization);
    s.finish();
  }
  if (const json* j = top.section("eval")) {
    Section s(*j, "eval");
    s.read("histogram_bin_width_m", c.eval.histogram_bin_width_m);
    s.read("threads", c.eval.threads);
    s.finish();
  }
  if (const json* j = top.section("synth")) {
    Section s(*j, "synth");
    s.read("seed", c.synth.seed);
    s.read("noise_sigma", c.synth.noise_sigma);
    s.finish();
  }
  top.finish();
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(io::read_text_file(path));
  } catch (const json::parse_error& e) {
    fail(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
  return config_from_json(doc);
}

json scene_spec_to_json(const SceneSpec& spec) {
  json cylinders = json::array();
  for (const Cylinder& c : spec.cylinders) {
    json entry = {{"center_px", {c.center_px.x, c.center_px.y}},
                  {"radius_px", c.radius_px},
                  {"depth_m", c.depth_m},
                  {"orientation", to_string(c.orientation)}};
    if (c.orientation == BandOrientation::Angled) entry["angle_deg"] = c.angle_deg;
    cylinders.push_back(entry);
  }
  return {{"rig", rig_to_json(spec.rig)},
          {"background_depth_m", spec.background_depth_m},
          {"cylinders", cylinders},
          {"texture_seed", spec.texture_seed},
          {"noise_sigma", spec.noise_sigma},
          {"d_max", spec.d_max}};
}

SceneSpec scene_spec_from_json(const json& doc) {
  SceneSpec spec;
  Section s(doc, "scene");
  if (const json* j = s.section("rig")) spec.rig = rig_from_json(*j);
  s.read("background_depth_m", spec.background_depth_m);
  s.read("texture_seed", spec.texture_seed);
  s.read("noise_sigma", spec.noise_sigma);
  s.read("d_max", spec.d_max);
  if (const json* j = s.section("cylinders")) {
    require(j->is_array(), ErrorKind::ParseError, "'scene.cylinders' must be an array");
    for (const json& item : *j) {
      Section cs(item, "scene.cylinders[]");
      Cylinder c;
      if (const json* center = cs.section("center_px")) {
        require(center->is_array() && center->size() == 2 && (*center)[0].is_number() && (*center)[1].is_number(),
                ErrorKind::ParseError, "center_px must be [x, y]");
        c.center_px = {(*center)[0].get<double>(), (*center)[1].get<double>()};
      } else {
        fail(ErrorKind::ParseError, "cylinder needs center_px");
      }
      cs.read("radius_px", c.radius_px);
      cs.read("depth_m", c.depth_m);
      std::string orientation = to_string(c.orientation);
      cs.read("orientation", orientation);
      c.orientation = orientation_from_string(orientation);
      cs.read("angle_deg", c.angle_deg);
      cs.finish();
      spec.cylinders.push_back(c);
    }
  }
  s.finish();
  return spec;
}

json range_estimate_to_json(const RangeEstimate& e) {
  return {{"distance_m", e.distance_m},
          {"median_m", e.median_m},
          {"mad_m", e.mad_m},
          {"n_points", e.n_points},
          {"n_centroids", e.n_centroids},
          {"n_total", e.n_total},
          {"n_valid_depths", e.n_valid_depths},
          {"n_retained", e.n_retained},
          {"n_rejected", e.rejected_values.size()},
          {"retained_values", e.retained_values},
          {"rejected_values", e.rejected_values}};
}

}  // namespace branchrange
