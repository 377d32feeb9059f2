// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "branchrange/cli.hpp"
#include "branchrange/config.hpp"
#include "branchrange/eval.hpp"
#include "branchrange/io.hpp"
#include "oracles.hpp"

using namespace branchrange;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Shared state: the protocol scene set and the report produced from it.
struct Workspace {
  fs::path root;
  fs::path scenes;
  fs::path report;
  fs::path csv;
  bool eval_ok = false;
  double eval_seconds = 0.0;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  if (out_text) *out_text = out.str();
  if (code != 0) std::cerr << err.str();
  return code;
}

Outcome protocol(Workspace& ws) {
  Outcome o;
  if (run_cli({"--seed", "7", "synth", ws.scenes.string()}) != 0) return {false, "synth failed"};

  const auto t0 = std::chrono::steady_clock::now();
  const int code = run_cli({"eval", ws.scenes.string(), ws.report.string(), "--histogram-csv", ws.csv.string()});
  ws.eval_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (code != 0) return {false, "eval failed"};
  ws.eval_ok = true;

  const json doc = json::parse(io::read_text_file(ws.report));
  std::string errors;
  for (const json& s : doc["scenes"]) {
    const double rel = s.value("rel_error", 1.0);
    o.pass = o.pass && s["ok"].get<bool>() && rel <= 0.05;
    errors += fmt("%.1fm:%.4f ", s.value("true_depth_m", 0.0), rel);
  }

  const fs::path gt_report = ws.root / "gt_report.json";
  if (run_cli({"eval", ws.scenes.string(), gt_report.string(), "--use-gt-depth"}) != 0) return {false, "gt eval failed"};
  double gt_max = 0.0;
  for (const json& s : json::parse(io::read_text_file(gt_report))["scenes"]) {
    gt_max = std::max(gt_max, s.value("rel_error", 1.0));
  }
  o.pass = o.pass && gt_max <= 1e-6 && ws.eval_seconds <= 60.0 && doc["scenes"].size() == 3;
  o.detail = fmt("rel errors %sgt-depth max %.2e, pipeline %.2f s at 640x360 d_max=64", errors.c_str(), gt_max,
                 ws.eval_seconds);
  return o;
}

Outcome sgm_oracle() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> dim(1, 16);
  std::uniform_int_distribution<int> dmax(1, 7);
  std::uniform_int_distribution<int> pen(1, 60);
  int argmin_ok = 0;
  for (int t = 0; t < 50; ++t) {
    const CostVolume c = oracle::random_volume(dim(rng), dim(rng), dmax(rng), 8000, rng, 0.05);
    MatchParams p;
    p.d_max = c.d_max();
    p.p1 = 0;
    p.p2 = 0;
    p.paths = t % 2 == 0 ? 8 : 4;
    argmin_ok += oracle::argmin(sgm_aggregate(c, p)) == oracle::argmin(c) ? 1 : 0;
  }
  int exact_ok = 0;
  for (int t = 0; t < 20; ++t) {
    const CostVolume c = oracle::random_volume(8, 8, 7, t < 10 ? 64 : 2000, rng, 0.05);
    MatchParams p;
    p.d_max = 7;
    p.p1 = pen(rng);
    p.p2 = p.p1 + pen(rng);
    p.paths = t % 2 == 0 ? 8 : 4;
    exact_ok += sgm_aggregate(c, p) == oracle::sgm(c, p.p1, p.p2, p.paths) ? 1 : 0;
  }
  return {argmin_ok == 50 && exact_ok == 20,
          fmt("argmin preserved %d/50 (p1=p2=0), bit-exact vs path recursion %d/20 (8x8x8)", argmin_ok, exact_ok)};
}

Outcome shift_recovery() {
  MatchParams p;
  p.d_max = 16;
  const int w = 64;
  const int h = 64;
  const int margin = p.window_radius + 1;
  double worst = 1.0;
  double worst_valid = 1.0;
  bool pass = true;
  for (int k : {2, 4, 8}) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto [left, right] = oracle::shifted_pair(w, h, k, seed * 1000 + k);
      const DisparityMap d = sgbm(left, right, p);
      int interior = 0;
      int valid = 0;
      int good = 0;
      for (int y = margin; y < h - margin; ++y) {
        for (int x = k + margin; x < w - margin; ++x) {
          ++interior;
          const float v = d.at(x, y);
          if (!is_valid_disparity(v)) continue;
          ++valid;
          good += std::abs(v - static_cast<float>(k)) <= 0.5f ? 1 : 0;
        }
      }
      const double frac = valid > 0 ? static_cast<double>(good) / valid : 0.0;
      worst = std::min(worst, frac);
      worst_valid = std::min(worst_valid, static_cast<double>(valid) / interior);
      pass = pass && valid > 0 && frac >= 0.95;
    }
  }
  return {pass, fmt("k in {2,4,8} x 10 seeds at 64x64: worst within-0.5px fraction %.4f (min valid coverage %.3f)",
                    worst, worst_valid)};
}

Outcome estimator() {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> size(1, 200);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> scale(0.1, 10.0);
  std::uniform_real_distribution<double> shift(-0.5, 5.0);
  int exact = 0;
  int scale_ok = 0;
  int shift_ok = 0;
  int mad_zero = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = static_cast<std::size_t>(size(rng));
    const double center = 0.5 + 3.0 * unit(rng);
    const bool quantized = t % 5 == 0;
    std::vector<double> v(n);
    for (double& x : v) {
      x = center + 0.05 * noise(rng);
      if (unit(rng) < 0.15) x += 5.0 * unit(rng) - 1.0;
      if (quantized) x = std::round(x * 4.0) / 4.0;
    }
    const double k = t % 3 == 0 ? 3.0 : 1.0 + 4.0 * unit(rng);
    const MadSplit s = mad_filter(v, k);
    const oracle::MadResult r = oracle::mad_mean(v, k);
    std::vector<std::size_t> rejected_index;
    for (std::size_t i = 0, j = 0; i < n; ++i) {
      if (j < s.retained_index.size() && s.retained_index[j] == i) {
        ++j;
      } else {
        rejected_index.push_back(i);
      }
    }
    const bool same = s.median == r.median && s.mad == r.mad && s.retained_index == r.kept &&
                      rejected_index == r.dropped && !s.retained.empty() && clamped_mean(s.retained) == r.mean;
    exact += same ? 1 : 0;
    mad_zero += s.mad == 0.0 ? 1 : 0;
    if (quantized) {
      // Grid-valued sets can sit exactly on the band edge; equivariance is
      // checked on the continuous sets.
      ++scale_ok;
      ++shift_ok;
      continue;
    }

    const double f = scale(rng);
    std::vector<double> scaled = v;
    for (double& x : scaled) x *= f;
    const MadSplit ss = mad_filter(scaled, k);
    const double base = clamped_mean(s.retained);
    scale_ok += ss.retained_index == s.retained_index &&
                        std::abs(clamped_mean(ss.retained) - f * base) <= 1e-9 * std::abs(f * base)
                    ? 1
                    : 0;

    const double c = shift(rng);
    std::vector<double> moved = v;
    for (double& x : moved) x += c;
    const MadSplit ms = mad_filter(moved, k);
    shift_ok += ms.retained_index == s.retained_index &&
                        std::abs(clamped_mean(ms.retained) - (base + c)) <= 1e-9 * std::abs(base + c)
                    ? 1
                    : 0;
  }
  return {exact == 1000 && scale_ok == 1000 && shift_ok == 1000,
          fmt("oracle-exact %d/1000 (%d with MAD=0), scale-equivariant %d/1000, shift-equivariant %d/1000", exact,
              mad_zero, scale_ok, shift_ok)};
}

// Piecewise-smooth instance: two plateaus split by a random straight edge,
// shared by guide and disparity, with a gentle gradient, noise and holes.
struct WlsInstance {
  DisparityMap disparity{8, 8};
  ImageGray guide{8, 8};
  WlsParams params;
};

WlsInstance wls_instance(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  WlsInstance inst;
  const double angle = 2.0 * std::numbers::pi * unit(rng);
  const double nx = std::cos(angle);
  const double ny = std::sin(angle);
  const double offset = (unit(rng) - 0.5) * 4.0;
  const double g0 = 40.0 + 60.0 * unit(rng);
  const double g1 = g0 + (unit(rng) < 0.5 ? -1.0 : 1.0) * (30.0 + 80.0 * unit(rng));
  const double d0 = 5.0 + 25.0 * unit(rng);
  const double d1 = d0 + 5.0 + 25.0 * unit(rng);
  const double gx = 4.0 * (unit(rng) - 0.5);
  const double gy = 4.0 * (unit(rng) - 0.5);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      const bool side = (x - 3.5) * nx + (y - 3.5) * ny > offset;
      const double g = (side ? g1 : g0) + gx * x + gy * y + 12.0 * (unit(rng) - 0.5);
      inst.guide.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(g), 0L, 255L));
      const double d = (side ? d1 : d0) + 4.0 * (unit(rng) - 0.5);
      inst.disparity.at(x, y) = unit(rng) < 0.15 ? kInvalidDisparity : static_cast<float>(d);
    }
  }
  inst.disparity.at(0, 0) = static_cast<float>(d0);
  inst.params.lambda = 0.05 + 1.95 * unit(rng);
  inst.params.sigma_color = 4.0 + 12.0 * unit(rng);
  return inst;
}

Outcome wls() {
  std::mt19937_64 rng(5150);
  double worst = 0.0;
  bool monotone = true;
  for (int t = 0; t < 10; ++t) {
    const WlsInstance inst = wls_instance(rng);
    std::vector<double> energies;
    const DisparityMap out = wls_refine_traced(inst.disparity, inst.guide, inst.params, energies);
    const std::vector<double> ref =
        oracle::wls_dense(inst.disparity, inst.guide, inst.params.lambda, inst.params.sigma_color);
    for (std::size_t i = 0; i < ref.size(); ++i) {
      if (is_valid_disparity(inst.disparity.data()[i])) worst = std::max(worst, std::abs(out.data()[i] - ref[i]));
    }
    // Allow summation round-off in the energy evaluation.
    for (std::size_t i = 1; i < energies.size(); ++i) {
      monotone = monotone && energies[i] <= energies[i - 1] * (1.0 + 1e-12);
    }
  }
  return {worst <= 1e-3 && monotone,
          fmt("max |GS - dense| = %.2e over 10 instances, energy non-increasing per sweep: %s", worst,
              monotone ? "yes" : "no")};
}

Outcome triangulation() {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> logf(std::log(50.0), std::log(5000.0));
  std::uniform_real_distribution<double> logb(std::log(0.01), std::log(2.0));
  std::uniform_real_distribution<double> logz(std::log(0.05), std::log(200.0));
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    CameraRig rig;
    rig.focal_px = std::exp(logf(rng));
    rig.baseline_m = std::exp(logb(rng));
    const double z = std::exp(logz(rng));
    const double d = rig.focal_px * rig.baseline_m / z;
    worst = std::max(worst, std::abs(disparity_to_depth(d, rig) - z) / z);
    worst = std::max(worst, std::abs(disparity_to_depth(depth_to_disparity(z, rig), rig) - z) / z);
  }
  return {worst <= 1e-9, fmt("max relative round-trip error %.2e over 1000 (f, B, Z)", worst)};
}

Outcome determinism(const Workspace& ws) {
  if (!ws.eval_ok) return {false, "protocol eval unavailable"};
  const fs::path a = ws.root / "det_a.json";
  const fs::path b = ws.root / "det_b.json";
  const fs::path c = ws.root / "det_c.json";
  bool ok = run_cli({"--threads", "1", "eval", ws.scenes.string(), a.string()}) == 0;
  ok = ok && run_cli({"--threads", "1", "eval", ws.scenes.string(), b.string()}) == 0;
  ok = ok && run_cli({"--threads", "4", "eval", ws.scenes.string(), c.string()}) == 0;
  if (!ok) return {false, "eval failed"};
  const io::Bytes ra = io::read_file(a);
  const bool same_runs = ra == io::read_file(b);
  const bool same_threads = ra == io::read_file(c) && ra == io::read_file(ws.report);
  const bool same_csv = io::read_file(ws.root / "det_a_histogram.csv") == io::read_file(ws.root / "det_c_histogram.csv");
  return {same_runs && same_threads && same_csv,
          fmt("repeat run identical: %s, 1 vs 4 vs default threads identical: %s, CSV identical: %s (%zu bytes)",
              same_runs ? "yes" : "no", same_threads ? "yes" : "no", same_csv ? "yes" : "no", ra.size())};
}

Outcome histogram(const Workspace& ws) {
  if (!ws.eval_ok) return {false, "protocol eval unavailable"};
  const json doc = json::parse(io::read_text_file(ws.report));
  std::size_t retained = 0;
  bool per_scene = true;
  bool modal = false;
  double modal_lo = 0.0;
  double modal_hi = 0.0;
  for (const json& s : doc["scenes"]) {
    const std::size_t n = s["n_retained"].get<std::size_t>();
    retained += n;
    std::size_t sum = 0;
    for (const json& c : s["histogram_counts"]) sum += c.get<std::size_t>();
    per_scene = per_scene && sum == n && s["estimate"]["retained_values"].size() == n;
    if (s["true_depth_m"].get<double>() == 1.0) {
      modal_lo = s["modal_bin"]["lo"].get<double>();
      modal_hi = s["modal_bin"]["hi"].get<double>();
      modal = modal_lo <= 1.0 && 1.0 < modal_hi;
    }
  }
  std::size_t binned = 0;
  for (const json& b : doc["histogram"]["bins"]) binned += b["count"].get<std::size_t>();

  std::size_t csv_total = 0;
  std::istringstream csv(io::read_text_file(ws.csv));
  std::string line;
  std::getline(csv, line);
  while (std::getline(csv, line)) csv_total += std::stoull(line.substr(line.rfind(',') + 1));

  return {binned == retained && csv_total == retained && per_scene && modal,
          fmt("bins sum %zu, CSV sum %zu, retained %zu, per-scene sums match: %s, 1 m modal bin [%.2f, %.2f)", binned,
              csv_total, retained, per_scene ? "yes" : "no", modal_lo, modal_hi)};
}

}  // namespace

int main() {
  Workspace ws;
  ws.root = fs::temp_directory_path() / "branchrange_acceptance";
  fs::remove_all(ws.root);
  fs::create_directories(ws.root);
  ws.scenes = ws.root / "scenes";
  ws.report = ws.root / "report.json";
  ws.csv = ws.root / "report_histogram.csv";

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 protocol reproduction", [&] { return protocol(ws); }},
      {"2 SGM oracle equivalence", sgm_oracle},
      {"3 shift recovery", shift_recovery},
      {"4 estimator exactness and equivariance", estimator},
      {"5 WLS vs dense solve", wls},
      {"6 triangulation round trip", triangulation},
      {"7 determinism", [&] { return determinism(ws); }},
      {"8 histogram integrity", [&] { return histogram(ws); }},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << ": " << o.detail << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : fmt("%d criteria failed", failures)) << std::endl;
  return failures == 0 ? 0 : 1;
}
