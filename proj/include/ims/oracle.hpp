#pragma once

// Brute-force verification on tiny lattices: the explicit generator over the
// whole configuration space, up-set monotonicity tests, exact transient and
// stationary laws, and the basic coupling of two systems.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ims/core.hpp"
#include "ims/lattice.hpp"

namespace ims {

inline constexpr std::size_t kMaxOracleStates = 10000;
inline constexpr std::size_t kMaxUpSetStates = 512;

/// Configurations <-> [0, (n+1)^sites), base n+1 with site 0 as the most
/// significant digit.
class StateSpaceIndex {
 public:
  StateSpaceIndex(std::size_t sites, int n, std::size_t capacity = kMaxOracleStates);

  std::size_t sites() const noexcept { return sites_; }
  int n() const noexcept { return n_; }
  std::size_t size() const noexcept { return size_; }

  std::size_t encode(const Configuration& c) const;
  Configuration decode(std::size_t index) const;

  int digit(std::size_t index, std::size_t site) const {
    return digits_[index * sites_ + site];
  }
  /// Sitewise eta <= xi on encoded states.
  bool leq(std::size_t eta, std::size_t xi) const;

 private:
  std::size_t sites_;
  int n_;
  std::size_t size_;
  std::vector<ParticleType> digits_;
};

struct GeneratorMatrix {
  StateSpaceIndex index;
  Eigen::MatrixXd q;
};

GeneratorMatrix build_generator(const ModelSpec& model, const Lattice& lattice,
                                std::size_t capacity = kMaxOracleStates);

/// Upward-closed set of encoded states.
struct UpSet {
  std::vector<char> members;

  bool contains(std::size_t s) const { return members[s] != 0; }
  std::size_t size() const;
};

/// Every up-set of the sitewise order. Throws CapacityError when the state
/// space exceeds `state_limit` or the family exceeds `family_limit`.
std::vector<UpSet> enumerate_upsets(const StateSpaceIndex& index, std::size_t state_limit = kMaxUpSetStates,
                                    std::size_t family_limit = 2000000);

bool is_upward_closed(const StateSpaceIndex& index, const UpSet& set);

struct MonotonicityViolation {
  std::size_t eta;
  std::size_t xi;
  std::size_t upset;  // index into the up-set list
  bool inside;        // both states inside the up-set (exit-rate inequality)
  double lhs;         // rate for eta
  double rhs;         // rate for xi
  double t = 0.0;     // semigroup checks only
};

struct MonotonicityReport {
  bool monotone = true;
  std::vector<MonotonicityViolation> violations;  // capped

  std::string describe(const StateSpaceIndex& index, const std::vector<UpSet>& upsets, std::size_t limit = 5) const;
  bool has_counterexample(std::size_t eta, std::size_t xi) const;
};

/// For eta <= xi both outside G: rate(eta -> G) <= rate(xi -> G); both inside:
/// rate(eta leaves G) >= rate(xi leaves G).
MonotonicityReport generator_monotone(const GeneratorMatrix& g, const std::vector<UpSet>& upsets,
                                      std::size_t max_reported = 256);

/// P(t) = exp(tQ) by uniformization, truncated once the Poisson tail is below `tail`.
Eigen::MatrixXd transition_matrix(const GeneratorMatrix& g, double t, double tail = 1e-12);

/// P(t) applied to a column vector.
Eigen::VectorXd transition_apply(const GeneratorMatrix& g, double t, const Eigen::VectorXd& v, double tail = 1e-12);

/// P_eta(t)(G) <= P_xi(t)(G) + tol for all listed t, up-sets G and eta <= xi.
MonotonicityReport semigroup_monotone(const GeneratorMatrix& g, const std::vector<UpSet>& upsets,
                                      const std::vector<double>& times, double tol,
                                      std::size_t max_reported = 256);

struct StationaryResult {
  Eigen::VectorXd distribution;
  bool unique = false;
  std::size_t closed_classes = 0;
};

/// Solves pi Q = 0 on each closed communicating class. With several classes
/// the result is their equal-weight mixture and `unique` is false.
StationaryResult stationary(const GeneratorMatrix& g);

/// Generator of the basic coupling, indexed by eta * N + xi.
struct CoupledGenerator {
  StateSpaceIndex index;
  Eigen::MatrixXd q;

  std::size_t pair(std::size_t eta, std::size_t xi) const { return eta * index.size() + xi; }
};

CoupledGenerator build_coupled_generator(const ModelSpec& first, const ModelSpec& second, const Lattice& lattice,
                                         std::size_t capacity = kMaxOracleStates);

struct CouplingEscape {
  std::size_t eta;
  std::size_t xi;
  std::size_t eta_next;
  std::size_t xi_next;
  double rate;
};

struct CouplingReport {
  bool preserved = true;
  std::vector<CouplingEscape> escapes;

  std::string describe(const StateSpaceIndex& index, std::size_t limit = 5) const;
  bool has_escape_from(std::size_t eta, std::size_t xi) const;
};

/// The ordered region {eta <= xi} is closed under the coupled dynamics.
CouplingReport coupled_order_preserved(const CoupledGenerator& g);

// ---------------------------------------------------------------- equivalence study

/// Random single-map systems compared three ways: the pairwise checker, the
/// generator up-set inequalities and the semigroup up-set inequalities.
struct EquivalenceOptions {
  std::size_t trials = 200;
  std::uint64_t seed = 1;
  int n = 2;
  int sites = 2;  // free-boundary segment
  double rate_low = 0.5;
  double rate_high = 2.0;
  std::vector<double> times{0.1, 1.0, 10.0};
  double tol = 1e-9;
};

struct EquivalenceTrial {
  std::size_t index;
  ModelSpec model;
  bool checker;
  bool generator;
  bool semigroup;
};

/// Map entries uniform on {0..n}, rates uniform on [rate_low, rate_high],
/// drawn from the counter stream (seed, trial).
ModelSpec random_single_map_model(int n, std::uint64_t seed, std::size_t trial, double rate_low, double rate_high);

std::vector<EquivalenceTrial> equivalence_study(const EquivalenceOptions& options);

}  // namespace ims
