#include <random>

#include "doctest.h"
#include "ims/lattice.hpp"
#include "ims/model_io.hpp"

using namespace ims;

TEST_CASE("one-dimensional rings and segments") {
  const auto ring = build_lattice(1, {8}, Boundary::Periodic, Kernel::nearest_neighbor());
  CHECK(ring.sites() == 8);
  CHECK(ring.ordered_pair_count() == 16);
  CHECK(ring.max_mass() == 2.0);
  CHECK(ring.weight(0, 7) == 1.0);
  CHECK(ring.weight(0, 2) == 0.0);
  CHECK(ring.weight(3, 3) == 0.0);

  const auto seg = build_lattice(1, {8}, Boundary::Free, Kernel::nearest_neighbor());
  CHECK(seg.ordered_pair_count() == 14);
  CHECK(seg.neighbors(0).size() == 1);
  CHECK(seg.weight(0, 7) == 0.0);

  // Offsets +1 and -1 land on the same site of a two-site ring.
  const auto two = build_lattice(1, {2}, Boundary::Periodic, Kernel::nearest_neighbor());
  CHECK(two.weight(0, 1) == 2.0);
  CHECK(two.max_mass() == 2.0);
  const auto one = build_lattice(1, {1}, Boundary::Periodic, Kernel::nearest_neighbor());
  CHECK(one.ordered_pair_count() == 0);
}

TEST_CASE("kernels") {
  const auto box = build_lattice(1, {10}, Boundary::Periodic, Kernel::box(2, 0.5));
  CHECK(box.neighbors(0).size() == 4);
  CHECK(box.max_mass() == doctest::Approx(2.0));
  CHECK(box.max_weight() == 0.5);

  const auto complete = build_lattice(1, {5}, Boundary::Free, Kernel::complete());
  for (std::size_t x = 0; x < 5; ++x) CHECK(complete.neighbors(x).size() == 4);

  const auto grid = build_lattice(2, {4, 4}, Boundary::Periodic, Kernel::nearest_neighbor());
  CHECK(grid.sites() == 16);
  CHECK(grid.ordered_pair_count() == 64);
  const auto c = grid.coordinates(6);
  CHECK(grid.site_at(c) == 6);
  const auto free_grid = build_lattice(2, {3, 3}, Boundary::Free, Kernel::nearest_neighbor());
  CHECK(free_grid.neighbors(free_grid.site_at({1, 1})).size() == 4);
  CHECK(free_grid.neighbors(free_grid.site_at({0, 0})).size() == 2);

  const auto custom = build_lattice(1, {6}, Boundary::Periodic, Kernel::offsets({{1, 0, 2.0}}));
  CHECK(custom.weight(0, 1) == 2.0);
  CHECK(custom.weight(1, 0) == 0.0);

  CHECK_THROWS_AS(Kernel::box(0), DomainError);
  CHECK_THROWS_AS(Kernel::offsets({{0, 0, 1.0}}), DomainError);
  CHECK_THROWS_AS(build_lattice(3, {2, 2, 2}, Boundary::Free, Kernel::nearest_neighbor()), DomainError);
  CHECK_THROWS_AS(build_lattice(1, {0}, Boundary::Free, Kernel::nearest_neighbor()), DomainError);
}

TEST_CASE("configuration text round trip") {
  const Configuration c(std::vector<ParticleType>{0, 2, 1, 2});
  CHECK(format_configuration(c) == "0 2 1 2");
  CHECK(parse_configuration("0 2 1 2", 2, 4) == c);
  CHECK(parse_configuration("  0  2 1 2 \n", 2, 4) == c);
  CHECK_THROWS_AS(parse_configuration("0 3 1 2", 2, 4), DomainError);
  CHECK_THROWS_AS(parse_configuration("0 2 1", 2, 4), DomainError);
  CHECK_THROWS_AS(parse_configuration("0 x 1 2", 2, 4), DomainError);
}

TEST_CASE("componentwise order") {
  const Configuration a(std::vector<ParticleType>{2, 2});
  const Configuration b(std::vector<ParticleType>{1, 2});
  const Configuration c(std::vector<ParticleType>{0, 2});
  const Configuration d(std::vector<ParticleType>{2, 1});
  CHECK(compare_configs(a, b) == OrderRelation::GreaterOrEqual);
  CHECK(compare_configs(c, b) == OrderRelation::LessOrEqual);
  CHECK(compare_configs(b, b) == OrderRelation::Equal);
  CHECK(compare_configs(b, d) == OrderRelation::Incomparable);
  CHECK_THROWS_AS(compare_configs(a, Configuration(3, 0)), DomainError);

  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> t(0, 2);
  auto draw = [&] {
    Configuration x(3, 0);
    for (std::size_t i = 0; i < 3; ++i) x.set(i, t(rng));
    return x;
  };
  for (int i = 0; i < 2000; ++i) {
    const auto x = draw(), y = draw(), z = draw();
    CHECK(compare_configs(x, x) == OrderRelation::Equal);
    if (config_leq(x, y) && config_leq(y, x)) CHECK(x == y);
    if (config_leq(x, y) && config_leq(y, z)) CHECK(config_leq(x, z));
  }
}

TEST_CASE("extremal configurations bound everything") {
  const auto lat = build_lattice(1, {5}, Boundary::Periodic, Kernel::nearest_neighbor());
  const auto m = builtin_model("gbt", builtin_defaults("gbt"), lat.max_mass());
  const auto [lo, hi] = extremal(m, lat);
  CHECK(lo == Configuration(5, 0));
  CHECK(hi == Configuration(5, 2));
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> t(0, 2);
  for (int i = 0; i < 200; ++i) {
    Configuration x(5, 0);
    for (std::size_t s = 0; s < 5; ++s) x.set(s, t(rng));
    CHECK(config_leq(lo, x));
    CHECK(config_leq(x, hi));
  }
}

TEST_CASE("pair rates") {
  const auto lat = build_lattice(1, {4}, Boundary::Periodic, Kernel::nearest_neighbor());
  const double b1 = 2.0, b2 = 1.5, d1 = 1.0, d2 = 0.7;
  const auto gbt = builtin_model("gbt", {{"beta1", b1}, {"beta2", b2}, {"delta1", d1}, {"delta2", d2}}, 2.0);
  Configuration eta(std::vector<ParticleType>{1, 2, 0, 1});
  // Grass next to a tree: nothing in the base layer, tree birth in the second.
  auto r = pair_rates(gbt, lat, eta, 0, 1);
  REQUIRE(r.size() == 2);
  CHECK(r[0] == PairRate{0.0, 0.0});
  CHECK(r[1] == PairRate{b2, 0.0});
  // Grass next to bushes: bush birth is a down move in the reordered labels.
  r = pair_rates(gbt, lat, eta, 3, 2);
  CHECK(r[0] == PairRate{0.0, b1});
  // A tree dies at delta2 spread over its two neighbors.
  r = pair_rates(gbt, lat, eta, 1, 0);
  CHECK(r[0] == PairRate{0.0, d2 / 2});
  CHECK(site_exit_rate(gbt, lat, eta, 1) == doctest::Approx(d2));
  // Non-neighbors carry no rate.
  r = pair_rates(gbt, lat, eta, 0, 2);
  CHECK(r[0] == PairRate{});

  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> t(0, 2);
  const double c = rate_bound(gbt, lat);
  for (int i = 0; i < 300; ++i) {
    for (std::size_t s = 0; s < 4; ++s) eta.set(s, t(rng));
    for (std::size_t x = 0; x < 4; ++x)
      for (const auto& nb : lat.neighbors(x))
        for (const auto& pr : pair_rates(gbt, lat, eta, x, nb.site)) {
          CHECK(pr.up * pr.down == 0.0);
          CHECK(pr.up <= c);
          CHECK(pr.down <= c);
        }
  }
}
