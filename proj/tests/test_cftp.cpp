#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "ims/cftp.hpp"
#include "ims/model_io.hpp"
#include "ims/oracle.hpp"
#include "ims/simulator.hpp"

using namespace ims;

namespace {

Lattice ring(int l) { return build_lattice(1, {l}, Boundary::Periodic, Kernel::nearest_neighbor()); }
Lattice segment(int l) { return build_lattice(1, {l}, Boundary::Free, Kernel::nearest_neighbor()); }

ModelSpec builtin(const std::string& name, const Lattice& lat, std::map<std::string, double> over = {}) {
  auto p = builtin_defaults(name);
  for (const auto& [k, v] : over) p[k] = v;
  return builtin_model(name, p, lat.max_mass());
}

}  // namespace

TEST_CASE("contact process on a finite ring: the stationary law is the empty configuration") {
  const auto lat = ring(8);
  const auto m = builtin("contact", lat);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto r = cftp_sample(m, lat, seed);
    CHECK(r.sample == Configuration(8, 0));
    CHECK(r.events_consumed > 0);
  }
}

TEST_CASE("voter model does not coalesce") {
  const auto lat = ring(4);
  const auto m = builtin("voter", lat);
  try {
    cftp_sample(m, lat, 1, {0.0, 12});
    FAIL("expected NoCoalescence");
  } catch (const NoCoalescence& e) {
    CHECK(e.lower() == Configuration(4, 0));
    CHECK(e.upper() == Configuration(4, 1));
    CHECK(e.epochs() == 12);
  }
}

TEST_CASE("non-attractive model is rejected") {
  const auto lat = ring(4);
  CHECK_THROWS_AS(cftp_sample(builtin("two_type", lat), lat, 1), PreconditionError);
  CHECK_THROWS_AS(cftp_batch(builtin("two_type", lat), lat, 1, 3), PreconditionError);
}

TEST_CASE("epochs reuse randomness: the extremal chains close in monotonically") {
  const auto lat = ring(6);
  const auto m = builtin("noisy_contact", lat, {{"lambda", 2.5}, {"epsilon", 0.05}});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::vector<std::pair<Configuration, Configuration>> seen;
    const auto r = cftp_sample_traced(m, lat, seed, {}, [&](int epoch, double start, const Configuration& lo,
                                                             const Configuration& hi) {
      CHECK(epoch == static_cast<int>(seen.size()));
      CHECK(start == doctest::Approx(-std::ldexp(default_base_window(m, lat), epoch)));
      CHECK(config_leq(lo, hi));
      if (!seen.empty()) {
        CHECK(config_leq(seen.back().first, lo));
        CHECK(config_leq(hi, seen.back().second));
      }
      seen.emplace_back(lo, hi);
    });
    CHECK(r.epochs_used + 1 == static_cast<int>(seen.size()));
    CHECK(seen.back().first == seen.back().second);

    // The sample is what a forward run of the same window produces from
    // either extremal state.
    const double start = -std::ldexp(default_base_window(m, lat), r.epochs_used);
    const EventStream s(m, lat, start, 0.0, seed);
    const auto [bottom, top] = extremal(m, lat);
    CHECK(evolve(bottom, s, m, lat).final == r.sample);
    CHECK(evolve(top, s, m, lat).final == r.sample);
    CHECK(cftp_sample(m, lat, seed) == r);
  }
}

TEST_CASE("samples follow the stationary law of a small noisy contact process") {
  const auto lat = segment(3);
  const auto m = builtin("noisy_contact", lat);
  const auto g = build_generator(m, lat);
  const auto pi = stationary(g).distribution;
  const std::size_t k = 3000;
  const auto batch = cftp_batch(m, lat, 1000, k, {}, 4);
  REQUIRE(batch.samples.size() == k);
  CHECK_FALSE(batch.by_counts);
  std::vector<double> freq(g.index.size(), 0.0);
  for (const auto& s : batch.samples) freq[g.index.encode(s.sample)] += 1.0 / static_cast<double>(k);
  double tv = 0.0;
  for (std::size_t i = 0; i < freq.size(); ++i) tv += std::abs(freq[i] - pi(static_cast<Eigen::Index>(i)));
  tv /= 2;
  MESSAGE("TV = " << tv);
  CHECK(tv < 0.06);
}

TEST_CASE("batches are independent of thread count") {
  const auto lat = ring(5);
  const auto m = builtin("gbt", lat);
  const auto one = cftp_batch(m, lat, 77, 24, {}, 1);
  const auto many = cftp_batch(m, lat, 77, 24, {}, 6);
  CHECK(one.histogram == many.histogram);
  for (std::size_t i = 0; i < 24; ++i) {
    CHECK(one.samples[i] == many.samples[i]);
    CHECK(one.samples[i] == cftp_sample(m, lat, 77 + i));
  }
  std::size_t total = 0;
  for (const auto& [key, count] : one.histogram) total += count;
  CHECK(total == 24);

  const auto big = ring(9);
  const auto b = cftp_batch(builtin("gbt", big), big, 1, 4);
  CHECK(b.by_counts);
  for (const auto& [key, count] : b.histogram) CHECK(std::count(key.begin(), key.end(), ' ') == 2);
}

TEST_CASE("batch failures are collected") {
  const auto lat = ring(4);
  try {
    cftp_batch(builtin("voter", lat), lat, 1, 3, {0.0, 4}, 2);
    FAIL("expected CftpBatchError");
  } catch (const CftpBatchError& e) {
    CHECK(e.failures().size() == 3);
    CHECK(e.failures()[0].index == 0);
  }
}
