#pragma once

// Finite lattices, neighborhood kernels, configurations and pointwise rates.

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ims/core.hpp"

namespace ims {

enum class Boundary { Periodic, Free };

std::string_view to_string(Boundary b);

enum class KernelKind { NearestNeighbor, Box, Complete, Offsets };

std::string_view to_string(KernelKind k);

struct KernelOffset {
  int dx = 0;
  int dy = 0;
  double weight = 1.0;

  friend bool operator==(const KernelOffset&, const KernelOffset&) = default;
};

/// Translation-invariant neighborhood phi(x, y) with phi(x, x) = 0.
class Kernel {
 public:
  static Kernel nearest_neighbor(double weight = 1.0);
  /// Every nonzero offset with max-norm <= range.
  static Kernel box(int range, double weight = 1.0);
  /// Every other site, regardless of geometry.
  static Kernel complete(double weight = 1.0);
  static Kernel offsets(std::vector<KernelOffset> offsets);

  KernelKind kind() const noexcept { return kind_; }
  int range() const noexcept { return range_; }
  double weight() const noexcept { return weight_; }
  const std::vector<KernelOffset>& explicit_offsets() const noexcept { return offsets_; }

  /// Offsets for a `dim`-dimensional lattice. Not meaningful for Complete.
  std::vector<KernelOffset> offsets_for(int dim) const;

  std::string describe() const;

  friend bool operator==(const Kernel&, const Kernel&) = default;

 private:
  Kernel(KernelKind kind, int range, double weight, std::vector<KernelOffset> offsets);

  KernelKind kind_;
  int range_;
  double weight_;
  std::vector<KernelOffset> offsets_;
};

struct Neighbor {
  std::size_t site;
  double weight;
};

/// Geometry of a finite lattice: row-major sites, precomputed neighbor lists.
struct LatticeSpec {
  std::vector<int> sides;
  Boundary boundary = Boundary::Periodic;
  Kernel kernel = Kernel::nearest_neighbor();

  std::string describe() const;
  friend bool operator==(const LatticeSpec&, const LatticeSpec&) = default;
};

class Lattice {
 public:
  explicit Lattice(LatticeSpec spec);

  const LatticeSpec& spec() const noexcept { return spec_; }
  int dimension() const noexcept { return static_cast<int>(spec_.sides.size()); }
  const std::vector<int>& sides() const noexcept { return spec_.sides; }
  Boundary boundary() const noexcept { return spec_.boundary; }
  const Kernel& kernel() const noexcept { return spec_.kernel; }

  std::size_t sites() const noexcept { return neighbors_.size(); }

  /// Neighbors y of x with phi(x, y) > 0, sorted by site index.
  std::span<const Neighbor> neighbors(std::size_t x) const { return neighbors_.at(x); }

  /// phi(x, y); zero when y is not a neighbor of x.
  double weight(std::size_t x, std::size_t y) const;

  double max_weight() const noexcept { return max_weight_; }

  /// max over x of sum_y phi(x, y). Equals the kernel mass on periodic lattices.
  double max_mass() const noexcept { return max_mass_; }

  std::size_t ordered_pair_count() const noexcept { return pair_count_; }

  /// Row-major coordinates of a site.
  std::array<int, 2> coordinates(std::size_t x) const;
  std::size_t site_at(std::array<int, 2> coords) const;

  friend bool operator==(const Lattice& l, const Lattice& r) { return l.spec_ == r.spec_; }

 private:
  LatticeSpec spec_;
  std::vector<std::vector<Neighbor>> neighbors_;
  double max_weight_ = 0.0;
  double max_mass_ = 0.0;
  std::size_t pair_count_ = 0;
};

Lattice build_lattice(int dimension, std::vector<int> sides, Boundary boundary, Kernel kernel);

/// Site -> particle type assignment.
class Configuration {
 public:
  Configuration() = default;
  explicit Configuration(std::vector<ParticleType> values) : values_(std::move(values)) {}
  Configuration(std::size_t sites, int fill) : values_(sites, static_cast<ParticleType>(fill)) {}

  std::size_t size() const noexcept { return values_.size(); }
  int operator[](std::size_t x) const { return values_[x]; }
  void set(std::size_t x, int v) { values_[x] = static_cast<ParticleType>(v); }
  const std::vector<ParticleType>& values() const noexcept { return values_; }

  /// Largest type present (0 for an empty configuration).
  int max_type() const noexcept;

  friend bool operator==(const Configuration&, const Configuration&) = default;
  friend auto operator<=>(const Configuration&, const Configuration&) = default;

 private:
  std::vector<ParticleType> values_;
};

/// Space-separated types in site-index order.
std::string format_configuration(const Configuration& c);

/// Inverse of format_configuration; validates site count and range [0, n].
Configuration parse_configuration(std::string_view line, int n, std::size_t sites);

enum class OrderRelation { LessOrEqual, GreaterOrEqual, Equal, Incomparable };

std::string_view to_string(OrderRelation r);

OrderRelation compare_configs(const Configuration& eta, const Configuration& xi);

/// eta <= xi sitewise (Equal included).
bool config_leq(const Configuration& eta, const Configuration& xi);

/// (all-0, all-n).
std::pair<Configuration, Configuration> extremal(const ModelSpec& model, const Lattice& lattice);

struct PairRate {
  double up = 0.0;
  double down = 0.0;

  friend bool operator==(const PairRate&, const PairRate&) = default;
};

/// Per-layer (r_u, r_d) at which the particle at y influences the one at x.
std::vector<PairRate> pair_rates(const ModelSpec& model, const Lattice& lattice, const Configuration& eta,
                                 std::size_t x, std::size_t y);

/// Total rate at which site x changes.
double site_exit_rate(const ModelSpec& model, const Lattice& lattice, const Configuration& eta, std::size_t x);

/// c = max lambda * max phi over non-null pairs: bounds every pair rate.
double rate_bound(const ModelSpec& model, const Lattice& lattice);

/// eta^{xy} for one layer: x replaced by J(eta(x), eta(y)).
int influenced_type(const ModelSpec& model, std::size_t layer, const Configuration& eta, std::size_t x,
                    std::size_t y);

}  // namespace ims
