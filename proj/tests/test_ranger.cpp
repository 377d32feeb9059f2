#include <doctest.h>

#include <random>

#include "branchrange/ranger.hpp"
#include "oracles.hpp"

using namespace branchrange;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::SpecInvalid;
}

SegMask band_mask(int w, int h, int x0, int x1) {
  SegMask m;
  m.bitmap = MaskBitmap(w, h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = x0; x <= x1; ++x) m.bitmap.at(x, y) = 1;
  }
  return m;
}

}  // namespace

TEST_CASE("triplet centroids") {
  CHECK(centroids_of_triplets({{0, 0}, {3, 0}, {0, 3}}) == std::vector<Point2>{{1, 1}});
  std::vector<Point2> seven(7, Point2{2, 5});
  seven[6] = {100, 100};
  const auto c = centroids_of_triplets(seven);
  CHECK(c.size() == 2);
  CHECK(c[0] == Point2{2, 5});
  CHECK(kind_of([] { centroids_of_triplets({{0, 0}, {1, 1}}); }) == ErrorKind::TooFewPoints);
  for (std::size_t n = 3; n < 40; ++n) CHECK(centroids_of_triplets(std::vector<Point2>(n)).size() == n / 3);
}

TEST_CASE("centroid expansion") {
  RangerParams p;
  p.m = 4;
  p.expand_radius_px = 1;
  const std::vector<Point2> e = expand_centroids({{5, 5}}, p, 20, 20);
  CHECK(e == std::vector<Point2>{{6, 5}, {5, 4}, {4, 5}, {5, 6}});

  p.m = 0;
  CHECK(expand_centroids({{5, 5}}, p, 20, 20).empty());

  p.m = 8;
  p.expand_radius_px = 2;
  for (const Point2& q : expand_centroids({{0, 0}}, p, 10, 10)) {
    CHECK(q.x >= 0);
    CHECK(q.y >= 0);
    CHECK(q.x <= 9);
    CHECK(q.y <= 9);
  }
}

TEST_CASE("total point set") {
  RangerParams p;
  const std::vector<Point2> cents{{3, 3}, {8, 8}};
  const auto expanded = expand_centroids(cents, p, 20, 20);
  const auto all = total_point_set(cents, expanded);
  CHECK(all.size() == 10);
  CHECK(all[8] == cents[0]);
  CHECK(all[9] == cents[1]);
  CHECK(total_point_set(cents, {}) == cents);
}

TEST_CASE("depth collection") {
  DepthMap z(6, 4, 1.5f);
  const std::vector<Point2> pts{{0, 0}, {5.4, 3.4}, {2.6, 1.2}, {3, 3}};
  CHECK(collect_depths(pts, z) == std::vector<double>(4, 1.5));

  z.at(0, 0) = kInvalidDepth;
  z.at(3, 1) = kInvalidDepth;
  CHECK(collect_depths(pts, z).size() == 2);

  DepthMap mixed(6, 4);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 6; ++x) mixed.at(x, y) = 0.5f + 0.25f * x + y;
  }
  std::vector<double> expected;
  for (const Point2& q : pts) expected.push_back(mixed.at(static_cast<int>(std::lround(q.x)), static_cast<int>(std::lround(q.y))));
  CHECK(collect_depths(pts, mixed) == expected);

  CHECK(kind_of([] { collect_depths({{1, 1}}, DepthMap(3, 3, 0.0f)); }) == ErrorKind::NoValidDepths);
}

TEST_CASE("MAD filter") {
  const MadSplit s = mad_filter({1, 1, 2, 2, 4, 100}, 3.0);
  CHECK(s.median == 2.0);
  CHECK(s.mad == 1.0);
  CHECK(s.retained == std::vector<double>{1, 1, 2, 2, 4});
  CHECK(s.rejected == std::vector<double>{100});
  CHECK(s.retained_index == std::vector<std::size_t>{0, 1, 2, 3, 4});

  const MadSplit c = mad_filter(std::vector<double>(9, 1.25), 3.0);
  CHECK(c.mad == 0.0);
  CHECK(c.retained.size() == 9);

  const MadSplit one = mad_filter({7.5}, 3.0);
  CHECK(one.retained == std::vector<double>{7.5});

  CHECK(kind_of([] { mad_filter({}, 3.0); }) == ErrorKind::EmptyInput);
  CHECK(kind_of([] { clamped_mean({}); }) == ErrorKind::EmptyInput);
}

TEST_CASE("MAD filter properties") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> size(1, 60);
  std::normal_distribution<double> value(2.0, 0.3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(static_cast<std::size_t>(size(rng)));
    for (double& x : v) x = value(rng);
    const MadSplit s = mad_filter(v, 3.0);
    const oracle::MadResult r = oracle::mad_mean(v, 3.0);
    CHECK(s.median == r.median);
    CHECK(s.mad == r.mad);
    CHECK(s.retained_index == r.kept);
    CHECK(clamped_mean(s.retained) == r.mean);
    CHECK(s.retained.size() + s.rejected.size() == v.size());

    std::vector<double> shuffled = v;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    std::vector<double> a = mad_filter(shuffled, 3.0).retained;
    std::vector<double> b = s.retained;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
  }
}

TEST_CASE("MAD filter robustness") {
  std::vector<double> v(40, 1.5);
  for (int i = 0; i < 9; ++i) v[static_cast<std::size_t>(4 * i)] = 10.0 + i;
  const MadSplit s = mad_filter(v, 3.0);
  CHECK(clamped_mean(s.retained) == 1.5);
  CHECK(s.rejected.size() == 9);
}

TEST_CASE("distance estimate") {
  SUBCASE("uniform depth") {
    const DepthMap z(60, 40, 1.5f);
    const RangeEstimate e = estimate_distance(band_mask(60, 40, 20, 30), z, RangerParams{});
    CHECK(e.distance_m == 1.5);
    CHECK(e.rejected_values.empty());
    CHECK(e.n_total == e.n_centroids * 5);
    CHECK(e.n_valid_depths == e.n_total);
    CHECK(e.n_retained == e.retained_values.size());
  }
  SUBCASE("two-level map with mask on the branch") {
    DepthMap z(80, 60, 5.0f);
    for (int y = 0; y < 60; ++y) {
      for (int x = 30; x <= 49; ++x) z.at(x, y) = 1.0f;
    }
    RangerParams p;
    p.expand_radius_px = 1;
    const RangeEstimate e = estimate_distance(band_mask(80, 60, 30, 49), z, p);
    CHECK(e.distance_m == 1.0);
  }
  SUBCASE("invalid depth everywhere") {
    CHECK(kind_of([] { estimate_distance(band_mask(20, 20, 5, 10), DepthMap(20, 20, 0.0f), RangerParams{}); }) ==
          ErrorKind::NoValidDepths);
  }
  SUBCASE("size mismatch") {
    CHECK(kind_of([] { estimate_distance(band_mask(20, 20, 5, 10), DepthMap(21, 20, 1.0f), RangerParams{}); }) ==
          ErrorKind::DimensionMismatch);
  }
  SUBCASE("parameter validation") {
    RangerParams p;
    p.k_mad = 0.0;
    CHECK(kind_of([&] { p.validate(); }) == ErrorKind::InvalidParams);
    p = RangerParams{};
    p.m = -1;
    CHECK(kind_of([&] { p.validate(); }) == ErrorKind::InvalidParams);
  }
}
