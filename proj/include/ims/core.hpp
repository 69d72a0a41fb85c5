#pragma once

// Interaction-map algebra: maps J(a,b), rate tables, multi-layer models,
// attractiveness certification and particle reordering.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ims/errors.hpp"

namespace ims {

/// A particle type in S = {0, 1, ..., n}. Types are totally ordered by value.
using ParticleType = std::uint8_t;

/// Largest supported n (so that n + 1 types fit in a ParticleType).
inline constexpr int kMaxN = 254;

enum class InteractionClass { Up, Null, Down };

std::string_view to_string(InteractionClass c);

/// An ordered pair (a, b): particle a influenced by neighbor type b.
struct TypePair {
  int a = 0;
  int b = 0;

  friend bool operator==(const TypePair&, const TypePair&) = default;
};

/// Total map J : S x S -> S. Entry (a, b) is the type that replaces a after
/// an interaction with a neighbor of type b.
class InteractionMap {
 public:
  /// `table` is indexed [a * (n + 1) + b]; every entry must be <= n.
  InteractionMap(int n, std::vector<ParticleType> table);

  /// All-null map, J(a, b) = a.
  static InteractionMap null_map(int n);

  /// Builds from rows indexed by neighbor b and columns by affected type a,
  /// i.e. rows[b][a] = J(a, b). This is the layout the usual printed tables use.
  static InteractionMap from_rows(const std::vector<std::vector<int>>& rows);

  int n() const noexcept { return n_; }
  int types() const noexcept { return n_ + 1; }

  int operator()(int a, int b) const {
    return table_[static_cast<std::size_t>(a * (n_ + 1) + b)];
  }
  int at(int a, int b) const;

  InteractionMap with(int a, int b, int value) const;

  InteractionClass classify(int a, int b) const;

  const std::vector<ParticleType>& table() const noexcept { return table_; }

  friend bool operator==(const InteractionMap&, const InteractionMap&) = default;

 private:
  int n_;
  std::vector<ParticleType> table_;
};

/// Nonnegative per-pair rates lambda_{ab}. Entries at null pairs are ignored.
class RateTable {
 public:
  RateTable(int n, std::vector<double> table);

  static RateTable zeros(int n);
  static RateTable constant(int n, double rate);
  /// rows[b][a] = lambda_{ab}, same orientation as InteractionMap::from_rows.
  static RateTable from_rows(const std::vector<std::vector<double>>& rows);

  int n() const noexcept { return n_; }

  double operator()(int a, int b) const {
    return table_[static_cast<std::size_t>(a * (n_ + 1) + b)];
  }
  double at(int a, int b) const;

  RateTable with(int a, int b, double value) const;

  double max() const noexcept;

  const std::vector<double>& table() const noexcept { return table_; }

  friend bool operator==(const RateTable&, const RateTable&) = default;

 private:
  int n_;
  std::vector<double> table_;
};

struct Layer {
  InteractionMap map;
  RateTable rates;

  friend bool operator==(const Layer&, const Layer&) = default;
};

/// An interaction map system: one or more (map, rates) layers over the same
/// particle set. Each layer owns its own up and down event channels.
class ModelSpec {
 public:
  ModelSpec(int n, std::vector<Layer> layers, std::vector<std::string> labels = {});

  int n() const noexcept { return n_; }
  int types() const noexcept { return n_ + 1; }
  const std::vector<Layer>& layers() const noexcept { return layers_; }
  const Layer& layer(std::size_t i) const { return layers_.at(i); }
  std::size_t layer_count() const noexcept { return layers_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  /// Largest rate over all layers and pairs, null pairs excluded.
  double max_rate() const noexcept;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;

 private:
  int n_;
  std::vector<Layer> layers_;
  std::vector<std::string> labels_;
};

/// Bijection on {0..n}. `image[a]` is pi(a).
class Permutation {
 public:
  explicit Permutation(std::vector<int> image);

  static Permutation identity(int n);
  /// Exchanges types `i` and `j`.
  static Permutation swap(int n, int i, int j);

  int n() const noexcept { return static_cast<int>(image_.size()) - 1; }
  int operator()(int a) const { return image_[static_cast<std::size_t>(a)]; }
  Permutation inverse() const;
  const std::vector<int>& image() const noexcept { return image_; }

  std::string to_string() const;

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  std::vector<int> image_;
};

/// outer o inner, i.e. a -> outer(inner(a)).
Permutation compose(const Permutation& outer, const Permutation& inner);

enum class Condition { A, B, C, D, RateUp, RateDown };

std::string_view to_string(Condition c);

struct Violation {
  Condition condition;
  TypePair first;   // (a1, b1), the smaller pair
  TypePair second;  // (a2, b2)
  int layer = -1;   // -1 when the check was on a bare map
  std::string detail;
};

struct AttractivenessVerdict {
  bool attractive = true;
  std::vector<Violation> violations;

  void add(Violation v);
  void merge(const AttractivenessVerdict& other, int layer);
  std::string to_string() const;
};

InteractionClass classify_pair(const InteractionMap& map, int a, int b);

/// Rewrites zero-rate channels to null and zeroes rates at null pairs.
ModelSpec canonicalize(const ModelSpec& model);

/// Conditions (a)-(d) over all componentwise-ordered pairs of pairs.
/// Every offending ordered pair is reported.
AttractivenessVerdict check_map_attractive(const InteractionMap& map);

/// Pairwise rate inequalities that make an attractive map an attractive
/// system. Throws PreconditionError if `map` itself is not attractive.
AttractivenessVerdict check_rate_restrictions(const InteractionMap& map, const RateTable& rates);

/// Map and rate checks on every layer of the canonical form of `model`.
AttractivenessVerdict check_ims_attractive(const ModelSpec& model);

/// J'(a,b) = pi(J(pi^-1 a, pi^-1 b)), lambda'_{ab} = lambda_{pi^-1 a, pi^-1 b},
/// labels moved with their types.
ModelSpec apply_permutation(const ModelSpec& model, const Permutation& pi);

inline constexpr int kMaxSearchN = 7;

/// All reorderings (lexicographic by image) under which the model is attractive.
std::vector<Permutation> search_orderings(const ModelSpec& model);

}  // namespace ims
