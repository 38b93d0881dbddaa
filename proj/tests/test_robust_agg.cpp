#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "fedrep/robust_agg.hpp"

using namespace fedrep;

namespace {

// independent 1-D oracle: dense grid search of sum_i |x - v_i|
double geomed_1d_grid(const std::vector<double>& xs) {
  const auto [lo_it, hi_it] = std::minmax_element(xs.begin(), xs.end());
  const double lo = *lo_it, hi = *hi_it;
  double best_x = lo, best_f = 1e300;
  const int grid = 2000000;
  for (int i = 0; i <= grid; ++i) {
    const double x = lo + (hi - lo) * i / grid;
    double f = 0.0;
    for (double v : xs) f += std::fabs(x - v);
    if (f < best_f) {
      best_f = f;
      best_x = x;
    }
  }
  return best_x;
}

// independent per-coordinate sort-trim-average oracle
std::vector<double> tmean_oracle(const std::vector<std::vector<double>>& vs,
                                 double fraction) {
  const std::size_t n = vs.size();
  const auto trim =
      static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
  std::vector<double> out(vs.front().size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    std::vector<double> col;
    for (const auto& v : vs) col.push_back(v[j]);
    std::sort(col.begin(), col.end());
    double s = 0.0;
    for (std::size_t i = trim; i < n - trim; ++i) s += col[i];
    out[j] = s / static_cast<double>(n - 2 * trim);
  }
  return out;
}

std::vector<ValueArray> random_arrays(RngStream& rng, std::size_t n,
                                      std::size_t dim) {
  std::vector<ValueArray> vs(n, ValueArray(dim));
  for (auto& v : vs) {
    for (auto& x : v) x = rng.next_gaussian();
  }
  return vs;
}

double l2_dist(const ValueArray& a, const ValueArray& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("geomed basics") {
  // single point is a fixed point
  CHECK(geomed({{2.0, -3.0}}, 5) == ValueArray{2.0, -3.0});

  // symmetric cross has its median at the origin
  const std::vector<ValueArray> cross = {
      {1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}};
  const auto out = geomed(cross, 50);
  CHECK(std::fabs(out[0]) < 1e-9);
  CHECK(std::fabs(out[1]) < 1e-9);

  CHECK_THROWS_AS(geomed({}, 5), std::invalid_argument);
}

TEST_CASE("geomed matches the 1-D grid-search oracle") {
  const std::vector<double> xs = {1.0, 2.0, 10.0};
  const double oracle = geomed_1d_grid(xs);
  std::vector<ValueArray> vs;
  for (double x : xs) vs.push_back({x});
  const auto got = geomed(vs, 60);
  CHECK(std::fabs(got[0] - oracle) < 1e-3);
  CHECK(oracle == doctest::Approx(2.0).epsilon(1e-3));  // 1-D median
}

TEST_CASE("tmean basics and oracle") {
  RngStream rng = derive_stream(21, 0, "tmean");

  // fraction 0 is the plain mean, exactly
  const auto vs = random_arrays(rng, 7, 5);
  CHECK(tmean(vs, 0.0) == mean_values(vs));

  // 1-D [1, 2, 100] with one trimmed per tail leaves the median
  CHECK(tmean({{1.0}, {2.0}, {100.0}}, 1.0 / 3.0) == ValueArray{2.0});

  // random 2-D instance with n=16 and 7/16 trimming: brute-force equal
  const auto wide = random_arrays(rng, 16, 2);
  CHECK(tmean(wide, 7.0 / 16.0) == tmean_oracle(wide, 7.0 / 16.0));

  // floor(0.49 * 2) = 0: nothing trimmed, still well-defined
  CHECK(tmean({{1.0}, {2.0}}, 0.49) == ValueArray{1.5});
  // fraction >= 1/2 is rejected outright
  CHECK_THROWS_AS(tmean({{1.0}, {2.0}}, 0.5), std::invalid_argument);
}

TEST_CASE("cclip hand cases") {
  // all points inside the radius, one iteration from the mean: the mean
  const std::vector<ValueArray> close = {{0.1}, {0.2}, {-0.1}};
  const auto m = mean_values(close);
  CHECK(l2_dist(cclip(close, 10.0, 1, m), m) < 1e-12);

  // 1-D [0,0,0,10], radius 1, init 0, 1 iter: clipped deviations are
  // 0,0,0,1 so the step is 0.25
  const std::vector<ValueArray> spiked = {{0.0}, {0.0}, {0.0}, {10.0}};
  const auto one = cclip(spiked, 1.0, 1, ValueArray{0.0});
  CHECK(one[0] == doctest::Approx(0.25).epsilon(1e-12));

  // n copies of v: fixed point after one iteration for any radius
  const std::vector<ValueArray> copies(5, ValueArray{3.0, -1.0});
  const auto fp = cclip(copies, 0.01, 1, ValueArray{3.0, -1.0});
  CHECK(fp == ValueArray{3.0, -1.0});
}

TEST_CASE("cclip default init is the coordinate-wise median") {
  const std::vector<ValueArray> vs = {{0.0}, {1.0}, {2.0}, {100.0}};
  // median of {0,1,2,100} = 1.5; clipped deviations at radius 0.5 are
  // -0.5, -0.5, +0.5, +0.5 and cancel
  const auto out = cclip(vs, 0.5, 1);
  CHECK(out[0] == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("permutation invariance of the aggregators") {
  RngStream rng = derive_stream(22, 0, "perm");
  auto vs = random_arrays(rng, 9, 4);
  auto shuffled = vs;
  const auto perm = rng.permutation(9);
  for (std::size_t i = 0; i < 9; ++i) shuffled[i] = vs[perm[i]];

  CHECK(l2_dist(geomed(vs, 10), geomed(shuffled, 10)) < 1e-12);
  CHECK(l2_dist(tmean(vs, 0.25), tmean(shuffled, 0.25)) < 1e-12);
  CHECK(l2_dist(cclip(vs, 0.5, 5), cclip(shuffled, 0.5, 5)) < 1e-12);
  CHECK(l2_dist(mean_values(vs), mean_values(shuffled)) < 1e-12);
}

TEST_CASE("translation equivariance of the aggregators") {
  RngStream rng = derive_stream(23, 0, "trans");
  const auto vs = random_arrays(rng, 8, 3);
  ValueArray t = {2.5, -1.0, 0.75};
  auto moved = vs;
  for (auto& v : moved) {
    for (std::size_t j = 0; j < 3; ++j) v[j] += t[j];
  }
  const auto add_t = [&t](ValueArray v) {
    for (std::size_t j = 0; j < 3; ++j) v[j] += t[j];
    return v;
  };
  CHECK(l2_dist(geomed(moved, 20), add_t(geomed(vs, 20))) < 1e-9);
  CHECK(l2_dist(tmean(moved, 0.25), add_t(tmean(vs, 0.25))) < 1e-9);
  CHECK(l2_dist(cclip(moved, 0.5, 5), add_t(cclip(vs, 0.5, 5))) < 1e-9);
  CHECK(l2_dist(mean_values(moved), add_t(mean_values(vs))) < 1e-9);
}

TEST_CASE("geomed output lies in the per-coordinate hull of the inputs") {
  RngStream rng = derive_stream(24, 0, "hull");
  for (int trial = 0; trial < 50; ++trial) {
    const auto vs = random_arrays(rng, 6, 3);
    const auto out = geomed(vs, 15);
    for (std::size_t j = 0; j < 3; ++j) {
      double lo = 1e300, hi = -1e300;
      for (const auto& v : vs) {
        lo = std::min(lo, v[j]);
        hi = std::max(hi, v[j]);
      }
      CHECK(out[j] >= lo - 1e-9);
      CHECK(out[j] <= hi + 1e-9);
    }
  }
}

TEST_CASE("buffered_aggregate degeneracies") {
  RngStream rng = derive_stream(25, 0, "buffer");
  const auto coords = CoordinateSet::from_sorted({0, 3, 4});
  std::vector<SparseUpdate> updates;
  for (int k = 0; k < 6; ++k) {
    ValueArray v(3);
    for (auto& x : v) x = rng.next_gaussian();
    updates.emplace_back(coords, v);
  }
  AggregatorSpec gm;
  gm.kind = AggregatorKind::kGeoMed;

  // s = 1: buffers are singletons, equal to the aggregator applied
  // directly (geomed is permutation invariant)
  RngStream r1 = derive_stream(25, 1, "a");
  const auto direct = buffered_aggregate(updates, 1, gm, r1);
  std::vector<ValueArray> raw;
  for (const auto& u : updates) raw.push_back(u.values);
  CHECK(l2_dist(direct.values, geomed(raw, gm.geomed_iters)) < 1e-12);

  // s = m: one buffer, result is the plain mean regardless of spec
  RngStream r2 = derive_stream(25, 2, "b");
  const auto single = buffered_aggregate(updates, 6, gm, r2);
  CHECK(l2_dist(single.values, mean_values(raw)) < 1e-12);

  // fixed seed: identical across repeated runs
  RngStream r3a = derive_stream(25, 3, "c");
  RngStream r3b = derive_stream(25, 3, "c");
  const auto a = buffered_aggregate(updates, 2, gm, r3a);
  const auto b = buffered_aggregate(updates, 2, gm, r3b);
  CHECK(a.values == b.values);

  // mismatched coordinate sets are rejected
  auto bad = updates;
  bad[2] = SparseUpdate(CoordinateSet::from_sorted({0, 3, 5}), bad[2].values);
  RngStream r4 = derive_stream(25, 4, "d");
  CHECK_THROWS_AS(buffered_aggregate(bad, 2, gm, r4), std::invalid_argument);
  // m not divisible by s
  RngStream r5 = derive_stream(25, 5, "e");
  CHECK_THROWS_AS(buffered_aggregate(updates, 4, gm, r5),
                  std::invalid_argument);
}

TEST_CASE("buffered mean of honest clients equals the plain mean") {
  RngStream rng = derive_stream(26, 0, "meanbuf");
  const auto coords = CoordinateSet::from_sorted({1, 2});
  std::vector<SparseUpdate> updates;
  std::vector<ValueArray> raw;
  for (int k = 0; k < 8; ++k) {
    ValueArray v = {rng.next_gaussian(), rng.next_gaussian()};
    raw.push_back(v);
    updates.emplace_back(coords, v);
  }
  AggregatorSpec mean_spec;
  mean_spec.kind = AggregatorKind::kMean;
  RngStream r = derive_stream(26, 1, "x");
  const auto out = buffered_aggregate(updates, 2, mean_spec, r);
  CHECK(l2_dist(out.values, mean_values(raw)) < 1e-12);
}

TEST_CASE("certify_robustness behavior") {
  AggregatorSpec mean_spec;
  mean_spec.kind = AggregatorKind::kMean;
  AggregatorSpec gm;
  gm.kind = AggregatorKind::kGeoMed;
  // Weiszfeld starts at the contaminated mean, so rejecting a huge
  // outlier needs the iteration to actually converge
  gm.geomed_iters = 400;

  CertifyParams one_d;
  one_d.m = 16;
  one_d.dim = 1;
  one_d.sigma = 1.0;

  // delta = 0, honest mean: the reported numerator is exactly zero
  RngStream r0 = derive_stream(27, 0, "c0");
  CHECK(certify_robustness(mean_spec, 0.0, 200, r0, one_d) < 1e-20);

  // mean under a large-offset adversary: the estimate grows with the
  // attacker magnitude (closed form: the mean shifts by
  // delta*(attacker - honest mean))
  CertifyParams small = one_d;
  small.shift_magnitudes = {1e3};
  CertifyParams large = one_d;
  large.shift_magnitudes = {1e6};
  RngStream r1 = derive_stream(27, 1, "c1");
  RngStream r2 = derive_stream(27, 1, "c1");
  const double c_small = certify_robustness(mean_spec, 0.4375, 200, r1, small);
  const double c_large = certify_robustness(mean_spec, 0.4375, 200, r2, large);
  CHECK(c_large > 1e3 * c_small);

  // geomed stays bounded past a magnitude threshold
  RngStream r3 = derive_stream(27, 2, "c2");
  RngStream r4 = derive_stream(27, 2, "c2");
  const double g_small = certify_robustness(gm, 0.4375, 200, r3, small);
  const double g_large = certify_robustness(gm, 0.4375, 200, r4, large);
  CHECK(g_large < 10.0 * (g_small + 1.0));
  CHECK(g_large < c_large / 1e3);
}
