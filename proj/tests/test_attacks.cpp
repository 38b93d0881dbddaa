#include <cmath>

#include "doctest.h"
#include "fedrep/attacks.hpp"
#include "oracles.hpp"

using namespace fedrep;

TEST_CASE("bit_flip") {
  CHECK(bit_flip({1.0, -2.0}) == std::vector<double>{-1.0, 2.0});
  CHECK(bit_flip({0.0, 0.0}) == std::vector<double>{-0.0, -0.0});

  RngStream rng = derive_stream(61, 0, "flip");
  std::vector<double> g(16);
  for (auto& x : g) x = rng.next_gaussian();
  const auto original = g;
  const auto flipped = bit_flip(g);
  CHECK(g == original);  // input untouched
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(flipped[i] + g[i] == 0.0);  // exact negation
  }
}

TEST_CASE("inverse normal CDF against a bisection oracle") {
  for (double p : {0.001, 0.01, 0.1, 0.25, 0.5, 0.6, 0.9, 0.999}) {
    CHECK(std::fabs(inv_normal_cdf(p) - oracles::inv_normal_cdf_bisect(p)) <
          1e-10);
  }
}

TEST_CASE("alie quantile rule and degenerate cases") {
  // n=32, f=7: s* = 17 - 7 = 10, z* = InvPhi(1 - 10/25) = InvPhi(0.6)
  CHECK(alie_default_z(32, 7) ==
        doctest::Approx(oracles::inv_normal_cdf_bisect(0.6)).epsilon(1e-9));
  CHECK(alie_default_z(32, 7) == doctest::Approx(0.2533).epsilon(1e-3));

  // identical honest updates: sigma = 0, output is the mean
  const std::vector<std::vector<double>> same(5, {1.0, -2.0});
  CHECK(alie(same, 8, 3, std::nullopt) == std::vector<double>{1.0, -2.0});

  // z_override = 0 returns the coordinate-wise honest mean
  const std::vector<std::vector<double>> two = {{0.0, 4.0}, {2.0, 0.0}};
  CHECK(alie(two, 8, 3, 0.0) == std::vector<double>{1.0, 2.0});

  CHECK_THROWS_AS(alie_default_z(8, 4), std::invalid_argument);
}

TEST_CASE("foe") {
  const std::vector<std::vector<double>> honest = {{2.0, -4.0}, {2.0, -4.0}};
  CHECK(foe(honest, 0.0) == std::vector<double>{-0.0, 0.0});
  CHECK(foe(honest, 1.0) == std::vector<double>{-2.0, 4.0});
  CHECK(foe(honest, 0.5) == std::vector<double>{-1.0, 2.0});
}

TEST_CASE("attack_coords") {
  ConSparParams p;
  p.d = 4;
  p.k_total = 2;
  p.m = 1;
  p.alpha = 0.0;

  RngStream rng = derive_stream(62, 0, "coords");
  const DenseVector g({3.0, -5.0, 1.0, 0.1});

  // the two smallest magnitudes are at 3 (0.1) and 2 (1.0)
  const auto min_set = attack_coords(CoordAttack::kMin, g, p, {}, 0, rng);
  CHECK(min_set.indices() == std::vector<std::uint32_t>{2, 3});

  // sameAtk copies the target exactly
  const auto target = CoordinateSet::from_sorted({0, 3});
  const auto same = attack_coords(CoordAttack::kSame, g, p, {target}, 0, rng);
  CHECK(same == target);
  CHECK_THROWS_AS(attack_coords(CoordAttack::kSame, g, p, {target}, 5, rng),
                  std::invalid_argument);
}

TEST_CASE("coord_rand hits every index uniformly") {
  ConSparParams p;
  p.d = 10;
  p.k_total = 3;
  p.m = 1;
  p.alpha = 0.0;
  RngStream rng = derive_stream(62, 1, "rand");
  const DenseVector g(std::vector<double>(10, 1.0));

  const int trials = 100000;
  std::vector<int> counts(10, 0);
  for (int t = 0; t < trials; ++t) {
    const auto s = attack_coords(CoordAttack::kRand, g, p, {}, 0, rng);
    REQUIRE(s.size() == 3);
    for (std::size_t i = 0; i < s.size(); ++i) counts[s[i]]++;
  }
  const double se = std::sqrt(0.3 * 0.7 / trials);
  for (int c : counts) {
    CHECK(std::fabs(static_cast<double>(c) / trials - 0.3) <= 3.0 * se);
  }
}
