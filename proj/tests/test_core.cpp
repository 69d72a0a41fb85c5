#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "ims/core.hpp"
#include "ims/model_io.hpp"
#include "support/reference.hpp"

using namespace ims;

namespace {

bool has_violation(const AttractivenessVerdict& v, Condition c, TypePair first, TypePair second) {
  return std::any_of(v.violations.begin(), v.violations.end(), [&](const Violation& x) {
    return x.condition == c && x.first == first && x.second == second;
  });
}

ModelSpec single(const InteractionMap& m, const RateTable& r) { return ModelSpec(m.n(), {{m, r}}); }

}  // namespace

TEST_CASE("classification of contact map pairs") {
  const auto j = reference_map("contact");
  CHECK(classify_pair(j, 0, 1) == InteractionClass::Up);
  CHECK(classify_pair(j, 0, 0) == InteractionClass::Null);
  CHECK(classify_pair(j, 1, 1) == InteractionClass::Down);
  CHECK(classify_pair(j, 1, 0) == InteractionClass::Down);
}

TEST_CASE("map construction validates entries and shape") {
  CHECK_THROWS_AS(InteractionMap(1, {0, 0, 2, 0}), DomainError);
  CHECK_THROWS_AS(InteractionMap(2, {0, 0, 0}), DomainError);
  CHECK_THROWS_AS(RateTable(1, {0.0, -1.0, 0.0, 0.0}), DomainError);
  CHECK_THROWS_AS(InteractionMap::from_rows({{0, 0}, {1}}), DomainError);
  const auto j = InteractionMap::from_rows({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}});
  CHECK(j(0, 2) == 2);
  CHECK(j(0, 1) == 1);
  CHECK(j(2, 1) == 0);
  CHECK(j.with(1, 2, 1)(1, 2) == 1);
}

TEST_CASE("literature maps: verdicts") {
  for (const char* name : {"contact", "voter", "two_type_modified_b", "two_type_modified_c", "two_type_reordered",
                           "gbt_base", "gbt_tree_birth"}) {
    CAPTURE(name);
    const auto v = check_map_attractive(reference_map(name));
    CHECK(v.attractive);
    CHECK(v.violations.empty());
  }
  const auto basic = check_map_attractive(reference_map("two_type"));
  CHECK_FALSE(basic.attractive);
  CHECK(has_violation(basic, Condition::C, {0, 2}, {1, 2}));
}

TEST_CASE("first modified two-type map keeps the jump over the null pair (1,2)") {
  // J(0,2) = 2 is an up move past a2 = 1 while (1,2) is null, which the
  // order conditions forbid; see the decisions ledger.
  const auto j = reference_map("two_type_modified_a");
  CHECK(j.classify(1, 2) == InteractionClass::Null);
  const auto v = check_map_attractive(j);
  CHECK_FALSE(v.attractive);
  CHECK(has_violation(v, Condition::C, {0, 2}, {1, 2}));
  CHECK(v.attractive == reference::map_attractive(j));
}

TEST_CASE("map checker agrees with the reference on every map with n = 1 and n = 2") {
  for (int n : {1, 2}) {
    std::size_t count = 0, attractive = 0;
    reference::for_each_map(n, [&](const InteractionMap& j) {
      const bool got = check_map_attractive(j).attractive;
      const bool want = reference::map_attractive(j);
      if (got != want) {
        FAIL_CHECK("disagreement on map table of size " << j.table().size());
        return false;
      }
      ++count;
      attractive += got;
      return true;
    });
    CHECK(count == static_cast<std::size_t>(std::pow(n + 1, (n + 1) * (n + 1))));
    CHECK(attractive > 0);
  }
}

TEST_CASE("structural property of attractive maps") {
  // Nondecreasing in b everywhere; nondecreasing in a except at an up pair
  // directly left of a down pair, where J(a,b) = a+1 and J(a+1,b) = a.
  reference::for_each_map(2, [](const InteractionMap& j) {
    if (!check_map_attractive(j).attractive) return true;
    for (int a = 0; a <= 2; ++a)
      for (int b = 0; b < 2; ++b) CHECK(j(a, b) <= j(a, b + 1));
    for (int b = 0; b <= 2; ++b)
      for (int a = 0; a < 2; ++a) {
        if (j(a, b) <= j(a + 1, b)) continue;
        CHECK(j.classify(a, b) == InteractionClass::Up);
        CHECK(j.classify(a + 1, b) == InteractionClass::Down);
        CHECK(j(a, b) == a + 1);
        CHECK(j(a + 1, b) == a);
      }
    return true;
  });
}

TEST_CASE("rate restrictions") {
  SUBCASE("reordered two-type map accepts rates that depend on the site's own type only") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    for (int i = 0; i < 200; ++i) {
      const double own[3] = {u(rng), u(rng), u(rng)};
      std::vector<double> table(9);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) table[static_cast<std::size_t>(a * 3 + b)] = own[a];
      CHECK(check_rate_restrictions(reference_map("two_type_reordered"), RateTable(2, table)).attractive);
    }
    // Species 1 (type 0 here) dying faster next to type 0 than next to type 2 breaks the order.
    const auto r = RateTable::constant(2, 1.0).with(0, 0, 2.0);
    const auto v = check_rate_restrictions(reference_map("two_type_reordered"), r);
    CHECK_FALSE(v.attractive);
    CHECK(has_violation(v, Condition::RateUp, {0, 0}, {0, 1}));
  }
  SUBCASE("jump over an up pair needs the lower rate to be the smaller") {
    const auto j = reference_map("two_type_modified_b");
    auto r = RateTable::constant(2, 1.0).with(0, 2, 1.0).with(1, 2, 2.0);
    CHECK(check_rate_restrictions(j, r).attractive);
    r = r.with(0, 2, 3.0);
    const auto v = check_rate_restrictions(j, r);
    CHECK_FALSE(v.attractive);
    CHECK(has_violation(v, Condition::RateUp, {0, 2}, {1, 2}));
  }
  SUBCASE("jump under a down pair needs the upper rate to be the smaller") {
    // Two-stage births/deaths layer: young (1) and adult (2) both die to 0.
    const auto j = InteractionMap::from_rows({{0, 0, 0}, {0, 0, 0}, {1, 0, 0}});
    auto r = RateTable::constant(2, 1.0).with(1, 0, 1.5).with(1, 1, 1.5).with(1, 2, 1.5);
    CHECK(check_rate_restrictions(j, r).attractive);
    r = r.with(2, 2, 2.0);
    const auto v = check_rate_restrictions(j, r);
    CHECK_FALSE(v.attractive);
    CHECK(has_violation(v, Condition::RateDown, {1, 2}, {2, 2}));
  }
  SUBCASE("non-attractive map is a precondition error") {
    CHECK_THROWS_AS(check_rate_restrictions(reference_map("two_type"), RateTable::constant(2, 1.0)),
                    PreconditionError);
  }
}

TEST_CASE("system checker agrees with single-event order preservation on every n = 2 map") {
  std::mt19937_64 rng(2024);
  const std::vector<double> values{0.0, 0.5, 1.0, 2.0};
  std::size_t checked = 0, attractive = 0;
  reference::for_each_map(2, [&](const InteractionMap& j) {
    for (int rep = 0; rep < 3; ++rep) {
      const auto r = reference::random_rates(2, rng, values);
      const bool got = check_ims_attractive(single(j, r)).attractive;
      const bool want = reference::events_preserve_order(j, r);
      if (got != want) {
        FAIL_CHECK("system verdict " << got << " but single events give " << want);
        return false;
      }
      ++checked;
      attractive += got;
    }
    return true;
  });
  CHECK(checked == 3 * 19683);
  CHECK(attractive > 0);
}

TEST_CASE("canonicalization") {
  const auto j = reference_map("two_type");
  const auto r = RateTable::constant(2, 1.0).with(0, 1, 0.0).with(0, 2, 0.0);
  const auto c = canonicalize(single(j, r));
  CHECK(c.layer(0).map(0, 1) == 0);
  CHECK(c.layer(0).map(0, 2) == 0);
  CHECK(c.layer(0).rates(0, 0) == 0.0);  // null pair
  CHECK(c.layer(0).rates(1, 0) == 1.0);
  // With both birth channels silenced only deaths remain, which is attractive.
  CHECK(check_ims_attractive(single(j, r)).attractive);
  // Silencing one birth channel is not enough: the other still jumps over.
  CHECK_FALSE(check_ims_attractive(single(j, RateTable::constant(2, 1.0).with(0, 2, 0.0))).attractive);
  CHECK_FALSE(check_ims_attractive(single(j, RateTable::constant(2, 1.0))).attractive);
}

TEST_CASE("catalog systems") {
  const std::map<std::string, bool> expected{{"contact", true},   {"voter", true},         {"two_type", false},
                                             {"two_type_reordered", true}, {"two_stage", true}, {"gbt", true},
                                             {"noisy_contact", true}};
  for (const auto& name : builtin_names()) {
    CAPTURE(name);
    const auto m = builtin_model(name, builtin_defaults(name), 2.0);
    CHECK(check_ims_attractive(m).attractive == expected.at(name));
  }
  const auto basic = check_ims_attractive(builtin_model("two_type", builtin_defaults("two_type"), 2.0));
  CHECK(basic.violations.front().layer == 0);
}

TEST_CASE("two_stage is attractive for any rates with delta >= 0") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> d(0.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    const auto m = builtin_model("two_stage", {{"lambda", d(rng)}, {"gamma", d(rng)}, {"delta", d(rng)}}, 2.0);
    CHECK(check_ims_attractive(m).attractive);
  }
}

TEST_CASE("gbt is attractive for any rates") {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> d(0.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    const auto m =
        builtin_model("gbt", {{"beta1", d(rng)}, {"beta2", d(rng)}, {"delta1", d(rng)}, {"delta2", d(rng)}}, 2.0);
    CHECK(check_ims_attractive(m).attractive);
  }
}

TEST_CASE("permutations") {
  const auto p = Permutation({2, 0, 1});
  CHECK(compose(p, p.inverse()) == Permutation::identity(2));
  CHECK(Permutation::swap(2, 0, 1).image() == std::vector<int>{1, 0, 2});
  CHECK_THROWS_AS(Permutation({0, 0, 1}), DomainError);
  CHECK_THROWS_AS(Permutation({0, 3, 1}), DomainError);
}

TEST_CASE("reordering the basic two-type model gives the reordered table") {
  const double l1 = 1.3, l2 = 2.1, d1 = 0.4, d2 = 0.9;
  const auto m = builtin_model("two_type", {{"lambda1", l1}, {"lambda2", l2}, {"delta1", d1}, {"delta2", d2}}, 1.0);
  const auto r = apply_permutation(m, Permutation::swap(2, 0, 1));
  CHECK(r.layer(0).map == reference_map("two_type_reordered"));
  // Species 0 dies at d1, empty (1) is colonized by 0 at l1 and by 2 at l2,
  // species 2 dies at d2.
  const auto want = RateTable::from_rows({{d1, l1, d2}, {d1, 0.0, d2}, {d1, l2, d2}});
  CHECK(r.layer(0).rates == want);
  CHECK(r.labels() == std::vector<std::string>{"species1", "empty", "species2"});
  CHECK(check_ims_attractive(r).attractive);

  const auto orders = search_orderings(m);
  CHECK(std::find(orders.begin(), orders.end(), Permutation::swap(2, 0, 1)) != orders.end());
  for (const auto& pi : orders) CHECK(check_ims_attractive(apply_permutation(m, pi)).attractive);
}

TEST_CASE("permutation action is a group action") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 3;
    const auto m = single(reference::random_map(n, rng), reference::random_rates(n, rng, {0.5, 1.0, 2.0}));
    std::vector<int> a{0, 1, 2, 3}, b{0, 1, 2, 3};
    std::shuffle(a.begin(), a.end(), rng);
    std::shuffle(b.begin(), b.end(), rng);
    const Permutation sigma(a), tau(b);
    CHECK(apply_permutation(apply_permutation(m, sigma), tau) == apply_permutation(m, compose(tau, sigma)));
    CHECK(apply_permutation(apply_permutation(m, sigma), sigma.inverse()) == m);
    CHECK(apply_permutation(m, Permutation::identity(n)) == m);
  }
}

TEST_CASE("search_orderings is exhaustive and bounded") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const auto m = single(reference::random_map(2, rng), RateTable::constant(2, 1.0));
    const auto found = search_orderings(m);
    std::vector<int> img{0, 1, 2};
    std::size_t expected = 0;
    do {
      expected += check_ims_attractive(apply_permutation(m, Permutation(img))).attractive;
    } while (std::next_permutation(img.begin(), img.end()));
    CHECK(found.size() == expected);
  }
  const auto big = single(InteractionMap::null_map(8), RateTable::zeros(8));
  CHECK_THROWS_AS(search_orderings(big), CapacityError);
}
