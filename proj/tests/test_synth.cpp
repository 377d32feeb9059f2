#include <doctest.h>

#include "branchrange/ranger.hpp"
#include "branchrange/synth.hpp"

using namespace branchrange;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::InvalidParams;
}

CameraRig small_rig() {
  CameraRig rig;
  rig.width_px = 160;
  rig.height_px = 100;
  rig.cx_px = 80;
  rig.cy_px = 50;
  return rig;
}

// Fraction of non-occluded left pixels whose right-view correspondence has
// the same intensity. Occlusion is decided by a right-view z-buffer built
// from the ground-truth disparities.
double warp_consistency(const SceneBundle& b) {
  const int w = b.left.width();
  const int h = b.left.height();
  std::size_t checked = 0;
  std::size_t equal = 0;
  for (int y = 0; y < h; ++y) {
    std::vector<float> zbuf(static_cast<std::size_t>(w), -1.0f);
    for (int x = 0; x < w; ++x) {
      const float d = b.gt_disparity.at(x, y);
      const int xr = x - static_cast<int>(d);
      if (xr >= 0) zbuf[xr] = std::max(zbuf[xr], d);
    }
    for (int x = 0; x < w; ++x) {
      const float d = b.gt_disparity.at(x, y);
      const int xr = x - static_cast<int>(d);
      if (xr < 0 || zbuf[xr] != d) continue;
      ++checked;
      equal += b.right.at(xr, y) == b.left.at(x, y) ? 1 : 0;
    }
  }
  return checked == 0 ? 0.0 : static_cast<double>(equal) / static_cast<double>(checked);
}

}  // namespace

TEST_CASE("ground truth disparities") {
  SceneSpec plane;
  plane.rig = small_rig();
  plane.background_depth_m = 2.0;
  const SceneBundle a = generate_scene(plane);
  for (float d : a.gt_disparity.data()) CHECK(d == 25.0f);
  CHECK(a.mask.pixel_count() == 0);

  SceneSpec spec;
  spec.rig = small_rig();
  spec.cylinders.push_back({{80, 50}, 10, 1.0, BandOrientation::Vertical, 0.0});
  const SceneBundle b = generate_scene(spec);
  CHECK(b.gt_disparity.at(80, 10) == 50.0f);
  CHECK(b.gt_disparity.at(5, 10) == 12.5f);
  CHECK(b.gt_depth == depth_map_from_disparity(b.gt_disparity, spec.rig));
  for (int y = 0; y < 100; ++y) {
    for (int x = 0; x < 160; ++x) {
      CHECK(b.mask.contains(x, y) == (std::abs(x - 80) <= 10));
      if (b.mask.contains(x, y)) CHECK(b.gt_depth.at(x, y) == 1.0f);
    }
  }
}

TEST_CASE("rendered pair is consistent with the ground truth") {
  SceneSpec spec;
  spec.rig = small_rig();
  spec.background_depth_m = 2.5;
  spec.noise_sigma = 0.0;
  spec.cylinders.push_back({{70, 50}, 9, 1.0, BandOrientation::Vertical, 0.0});
  spec.cylinders.push_back({{0, 30}, 6, 1.25, BandOrientation::Horizontal, 0.0});
  CHECK(warp_consistency(generate_scene(spec)) == 1.0);

  spec.cylinders.push_back({{100, 40}, 5, 2.0, BandOrientation::Angled, 60.0});
  CHECK(warp_consistency(generate_scene(spec)) >= 0.99);
}

TEST_CASE("generation is deterministic") {
  const auto a = paper_protocol_scenes(small_rig(), 5);
  const auto b = paper_protocol_scenes(small_rig(), 5);
  REQUIRE(a.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a[i].left == b[i].left);
    CHECK(a[i].right == b[i].right);
    CHECK(a[i].gt_disparity == b[i].gt_disparity);
  }
  const auto c = paper_protocol_scenes(small_rig(), 6);
  CHECK_FALSE(a[0].left == c[0].left);
}

TEST_CASE("protocol scenes") {
  CHECK(protocol_radius_px(500, 1.0) == 10.0);
  CHECK(protocol_radius_px(500, 2.0) == 5.0);
  CHECK(protocol_radius_px(100, 2.0) == 4.0);
  const CameraRig rig;
  const auto specs = paper_protocol_specs(rig, 1);
  REQUIRE(specs.size() == 3);
  CHECK(specs[0].cylinders[0].depth_m == 1.0);
  CHECK(specs[1].cylinders[0].depth_m == 1.5);
  CHECK(specs[2].cylinders[0].depth_m == 2.0);
  for (const SceneSpec& s : specs) {
    CHECK(s.background_depth_m == 4.0);
    CHECK(s.cylinders.size() == 1);
  }
  for (const SceneBundle& b : paper_protocol_scenes(small_rig(), 2)) {
    const double z = b.spec.cylinders[0].depth_m;
    for (std::size_t i = 0; i < b.gt_depth.size(); ++i) {
      if (b.mask.bitmap.data()[i]) CHECK(b.gt_depth.data()[i] == static_cast<float>(z));
    }
    CHECK(estimate_distance(b.mask, b.gt_depth, RangerParams{}).distance_m == doctest::Approx(z).epsilon(1e-6));
  }
}

TEST_CASE("scene parameter validation") {
  SceneSpec spec;
  spec.rig = small_rig();
  spec.cylinders.push_back({{80, 50}, 10, 5.0, BandOrientation::Vertical, 0.0});
  CHECK(kind_of([&] { generate_scene(spec); }) == ErrorKind::SpecInvalid);
  spec.cylinders[0].depth_m = 0.5;  // disparity 100 > d_max 64
  CHECK(kind_of([&] { generate_scene(spec); }) == ErrorKind::SpecInvalid);
  spec.cylinders[0].depth_m = -1.0;
  CHECK(kind_of([&] { generate_scene(spec); }) == ErrorKind::SpecInvalid);
  spec.cylinders.clear();
  spec.background_depth_m = 0.0;
  CHECK(kind_of([&] { generate_scene(spec); }) == ErrorKind::SpecInvalid);
}
