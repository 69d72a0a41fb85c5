#include "ims/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace ims {

namespace {

void check_n(int n) {
  if (n < 1 || n > kMaxN) {
    throw DomainError("number of particle types n+1 must satisfy 1 <= n <= " +
                      std::to_string(kMaxN) + ", got n=" + std::to_string(n));
  }
}

void check_type(int n, int a, const char* what) {
  if (a < 0 || a > n) {
    throw DomainError(std::string(what) + "=" + std::to_string(a) + " outside [0, " +
                      std::to_string(n) + "]");
  }
}

std::size_t square(int n) {
  return static_cast<std::size_t>((n + 1) * (n + 1));
}

std::string pair_str(TypePair p) {
  return "(" + std::to_string(p.a) + "," + std::to_string(p.b) + ")";
}

}  // namespace

std::string_view to_string(InteractionClass c) {
  switch (c) {
    case InteractionClass::Up: return "up";
    case InteractionClass::Null: return "null";
    case InteractionClass::Down: return "down";
  }
  return "?";
}

std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::A: return "a";
    case Condition::B: return "b";
    case Condition::C: return "c";
    case Condition::D: return "d";
    case Condition::RateUp: return "rate-up";
    case Condition::RateDown: return "rate-down";
  }
  return "?";
}

// ---------------------------------------------------------------- InteractionMap

InteractionMap::InteractionMap(int n, std::vector<ParticleType> table) : n_(n), table_(std::move(table)) {
  check_n(n);
  if (table_.size() != square(n)) {
    throw DomainError("interaction map needs " + std::to_string(square(n)) + " entries, got " +
                      std::to_string(table_.size()));
  }
  for (std::size_t i = 0; i < table_.size(); ++i) {
    if (table_[i] > n) {
      const int a = static_cast<int>(i) / (n + 1);
      const int b = static_cast<int>(i) % (n + 1);
      throw DomainError("interaction map entry J(" + std::to_string(a) + "," + std::to_string(b) +
                        ")=" + std::to_string(table_[i]) + " exceeds n=" + std::to_string(n));
    }
  }
}

InteractionMap InteractionMap::null_map(int n) {
  check_n(n);
  std::vector<ParticleType> t(square(n));
  for (int a = 0; a <= n; ++a) {
    for (int b = 0; b <= n; ++b) t[static_cast<std::size_t>(a * (n + 1) + b)] = static_cast<ParticleType>(a);
  }
  return InteractionMap(n, std::move(t));
}

InteractionMap InteractionMap::from_rows(const std::vector<std::vector<int>>& rows) {
  const int n = static_cast<int>(rows.size()) - 1;
  check_n(n);
  std::vector<ParticleType> t(square(n));
  for (int b = 0; b <= n; ++b) {
    const auto& row = rows[static_cast<std::size_t>(b)];
    if (static_cast<int>(row.size()) != n + 1) {
      throw DomainError("interaction map row " + std::to_string(b) + " has " +
                        std::to_string(row.size()) + " columns, expected " + std::to_string(n + 1));
    }
    for (int a = 0; a <= n; ++a) {
      const int v = row[static_cast<std::size_t>(a)];
      if (v < 0 || v > n) {
        throw DomainError("interaction map row " + std::to_string(b) + " column " + std::to_string(a) +
                          ": entry " + std::to_string(v) + " outside [0, " + std::to_string(n) + "]");
      }
      t[static_cast<std::size_t>(a * (n + 1) + b)] = static_cast<ParticleType>(v);
    }
  }
  return InteractionMap(n, std::move(t));
}

int InteractionMap::at(int a, int b) const {
  check_type(n_, a, "a");
  check_type(n_, b, "b");
  return (*this)(a, b);
}

InteractionMap InteractionMap::with(int a, int b, int value) const {
  check_type(n_, a, "a");
  check_type(n_, b, "b");
  check_type(n_, value, "J(a,b)");
  auto t = table_;
  t[static_cast<std::size_t>(a * (n_ + 1) + b)] = static_cast<ParticleType>(value);
  return InteractionMap(n_, std::move(t));
}

InteractionClass InteractionMap::classify(int a, int b) const {
  const int j = at(a, b);
  if (j > a) return InteractionClass::Up;
  if (j < a) return InteractionClass::Down;
  return InteractionClass::Null;
}

// ---------------------------------------------------------------- RateTable

RateTable::RateTable(int n, std::vector<double> table) : n_(n), table_(std::move(table)) {
  check_n(n);
  if (table_.size() != square(n)) {
    throw DomainError("rate table needs " + std::to_string(square(n)) + " entries, got " +
                      std::to_string(table_.size()));
  }
  for (std::size_t i = 0; i < table_.size(); ++i) {
    if (!(table_[i] >= 0.0) || !std::isfinite(table_[i])) {
      const int a = static_cast<int>(i) / (n + 1);
      const int b = static_cast<int>(i) % (n + 1);
      throw DomainError("rate lambda(" + std::to_string(a) + "," + std::to_string(b) +
                        ") must be finite and >= 0");
    }
  }
}

RateTable RateTable::zeros(int n) {
  check_n(n);
  return RateTable(n, std::vector<double>(square(n), 0.0));
}

RateTable RateTable::constant(int n, double rate) {
  check_n(n);
  return RateTable(n, std::vector<double>(square(n), rate));
}

RateTable RateTable::from_rows(const std::vector<std::vector<double>>& rows) {
  const int n = static_cast<int>(rows.size()) - 1;
  check_n(n);
  std::vector<double> t(square(n));
  for (int b = 0; b <= n; ++b) {
    const auto& row = rows[static_cast<std::size_t>(b)];
    if (static_cast<int>(row.size()) != n + 1) {
      throw DomainError("rate row " + std::to_string(b) + " has " + std::to_string(row.size()) +
                        " columns, expected " + std::to_string(n + 1));
    }
    for (int a = 0; a <= n; ++a) t[static_cast<std::size_t>(a * (n + 1) + b)] = row[static_cast<std::size_t>(a)];
  }
  return RateTable(n, std::move(t));
}

double RateTable::at(int a, int b) const {
  check_type(n_, a, "a");
  check_type(n_, b, "b");
  return (*this)(a, b);
}

RateTable RateTable::with(int a, int b, double value) const {
  check_type(n_, a, "a");
  check_type(n_, b, "b");
  auto t = table_;
  t[static_cast<std::size_t>(a * (n_ + 1) + b)] = value;
  return RateTable(n_, std::move(t));
}

double RateTable::max() const noexcept {
  return table_.empty() ? 0.0 : *std::max_element(table_.begin(), table_.end());
}

// ---------------------------------------------------------------- ModelSpec

ModelSpec::ModelSpec(int n, std::vector<Layer> layers, std::vector<std::string> labels)
    : n_(n), layers_(std::move(layers)), labels_(std::move(labels)) {
  check_n(n);
  if (layers_.empty()) throw DomainError("a model needs at least one layer");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].map.n() != n || layers_[i].rates.n() != n) {
      throw DomainError("layer " + std::to_string(i) + " does not have n=" + std::to_string(n));
    }
  }
  if (labels_.empty()) {
    for (int a = 0; a <= n; ++a) labels_.push_back(std::to_string(a));
  } else if (static_cast<int>(labels_.size()) != n + 1) {
    throw DomainError("expected " + std::to_string(n + 1) + " labels, got " + std::to_string(labels_.size()));
  }
}

double ModelSpec::max_rate() const noexcept {
  double c = 0.0;
  for (const auto& layer : layers_) {
    for (int a = 0; a <= n_; ++a) {
      for (int b = 0; b <= n_; ++b) {
        if (layer.map(a, b) != a) c = std::max(c, layer.rates(a, b));
      }
    }
  }
  return c;
}

// ---------------------------------------------------------------- Permutation

Permutation::Permutation(std::vector<int> image) : image_(std::move(image)) {
  if (image_.empty()) throw DomainError("permutation must act on at least one type");
  std::vector<bool> seen(image_.size(), false);
  for (int v : image_) {
    if (v < 0 || v >= static_cast<int>(image_.size()) || seen[static_cast<std::size_t>(v)]) {
      throw DomainError("not a bijection on [0, " + std::to_string(image_.size() - 1) + "]: " +
                        Permutation::to_string());
    }
    seen[static_cast<std::size_t>(v)] = true;
  }
}

Permutation Permutation::identity(int n) {
  std::vector<int> img(static_cast<std::size_t>(n + 1));
  std::iota(img.begin(), img.end(), 0);
  return Permutation(std::move(img));
}

Permutation Permutation::swap(int n, int i, int j) {
  std::vector<int> img(static_cast<std::size_t>(n + 1));
  std::iota(img.begin(), img.end(), 0);
  if (i < 0 || j < 0 || i > n || j > n) throw DomainError("swap index outside [0, n]");
  std::swap(img[static_cast<std::size_t>(i)], img[static_cast<std::size_t>(j)]);
  return Permutation(std::move(img));
}

Permutation Permutation::inverse() const {
  std::vector<int> inv(image_.size());
  for (std::size_t a = 0; a < image_.size(); ++a) inv[static_cast<std::size_t>(image_[a])] = static_cast<int>(a);
  return Permutation(std::move(inv));
}

std::string Permutation::to_string() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t a = 0; a < image_.size(); ++a) {
    if (a) os << ", ";
    os << a << "->" << image_[a];
  }
  os << ')';
  return os.str();
}

Permutation compose(const Permutation& outer, const Permutation& inner) {
  if (outer.n() != inner.n()) throw DomainError("cannot compose permutations of different sizes");
  std::vector<int> img(inner.image().size());
  for (std::size_t a = 0; a < img.size(); ++a) img[a] = outer(inner(static_cast<int>(a)));
  return Permutation(std::move(img));
}

// ---------------------------------------------------------------- verdicts

void AttractivenessVerdict::add(Violation v) {
  attractive = false;
  violations.push_back(std::move(v));
}

void AttractivenessVerdict::merge(const AttractivenessVerdict& other, int layer) {
  for (auto v : other.violations) {
    v.layer = layer;
    add(std::move(v));
  }
}

std::string AttractivenessVerdict::to_string() const {
  std::ostringstream os;
  os << (attractive ? "attractive" : "not attractive");
  if (!violations.empty()) os << " (" << violations.size() << " violations)";
  os << '\n';
  for (const auto& v : violations) {
    os << "  ";
    if (v.layer >= 0) os << "layer " << v.layer << ": ";
    os << "condition (" << ims::to_string(v.condition) << ") " << pair_str(v.first) << " <= "
       << pair_str(v.second) << ": " << v.detail << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------- checks

InteractionClass classify_pair(const InteractionMap& map, int a, int b) {
  return map.classify(a, b);
}

ModelSpec canonicalize(const ModelSpec& model) {
  std::vector<Layer> layers;
  layers.reserve(model.layer_count());
  const int n = model.n();
  for (const auto& layer : model.layers()) {
    auto map = layer.map.table();
    auto rates = layer.rates.table();
    for (int a = 0; a <= n; ++a) {
      for (int b = 0; b <= n; ++b) {
        const auto i = static_cast<std::size_t>(a * (n + 1) + b);
        if (rates[i] == 0.0) map[i] = static_cast<ParticleType>(a);
        if (map[i] == a) rates[i] = 0.0;
      }
    }
    layers.push_back({InteractionMap(n, std::move(map)), RateTable(n, std::move(rates))});
  }
  return ModelSpec(n, std::move(layers), model.labels());
}

AttractivenessVerdict check_map_attractive(const InteractionMap& map) {
  AttractivenessVerdict verdict;
  const int n = map.n();
  for (int a1 = 0; a1 <= n; ++a1) {
    for (int b1 = 0; b1 <= n; ++b1) {
      const int j1 = map(a1, b1);
      const bool up1 = j1 > a1;
      const bool down1 = j1 < a1;
      for (int a2 = a1; a2 <= n; ++a2) {
        for (int b2 = b1; b2 <= n; ++b2) {
          const int j2 = map(a2, b2);
          const bool up2 = j2 > a2;
          const bool down2 = j2 < a2;
          const TypePair p1{a1, b1};
          const TypePair p2{a2, b2};
          auto detail = [&](const std::string& lhs, int l, const std::string& rhs, int r) {
            return lhs + "=" + std::to_string(l) + " > " + rhs + "=" + std::to_string(r);
          };
          const std::string jn1 = "J" + pair_str(p1);
          const std::string jn2 = "J" + pair_str(p2);
          if (up1 && up2 && j1 > j2) {
            verdict.add({Condition::A, p1, p2, -1, detail(jn1, j1, jn2, j2) + " with both pairs up"});
          }
          if (down1 && down2 && j1 > j2) {
            verdict.add({Condition::B, p1, p2, -1, detail(jn1, j1, jn2, j2) + " with both pairs down"});
          }
          if (up1 && !up2 && j1 > a2) {
            verdict.add({Condition::C, p1, p2, -1, detail(jn1, j1, "a2", a2) + ": up move jumps over"});
          }
          if (!down1 && down2 && a1 > j2) {
            verdict.add({Condition::D, p1, p2, -1, detail("a1", a1, jn2, j2) + ": down move drops under"});
          }
        }
      }
    }
  }
  return verdict;
}

AttractivenessVerdict check_rate_restrictions(const InteractionMap& map, const RateTable& rates) {
  if (map.n() != rates.n()) throw DomainError("map and rate table sizes differ");
  if (const auto mv = check_map_attractive(map); !mv.attractive) {
    const auto& v = mv.violations.front();
    throw PreconditionError("rate restrictions need an attractive map; condition (" +
                            std::string(to_string(v.condition)) + ") fails at " + pair_str(v.first) +
                            " <= " + pair_str(v.second) + ": " + v.detail);
  }
  AttractivenessVerdict verdict;
  const int n = map.n();
  for (int a1 = 0; a1 <= n; ++a1) {
    for (int b1 = 0; b1 <= n; ++b1) {
      const int j1 = map(a1, b1);
      for (int a2 = a1; a2 <= n; ++a2) {
        for (int b2 = b1; b2 <= n; ++b2) {
          const int j2 = map(a2, b2);
          const double l1 = rates(a1, b1);
          const double l2 = rates(a2, b2);
          const TypePair p1{a1, b1};
          const TypePair p2{a2, b2};
          std::ostringstream os;
          if (j1 > a1 && j2 > a2 && j1 > a2 && l1 > l2) {
            os << "lower pair jumps past a2=" << a2 << " but lambda" << pair_str(p1) << "=" << l1
               << " > lambda" << pair_str(p2) << "=" << l2;
            verdict.add({Condition::RateUp, p1, p2, -1, os.str()});
          }
          if (j1 < a1 && j2 < a2 && j2 < a1 && l1 < l2) {
            os << "upper pair drops below a1=" << a1 << " but lambda" << pair_str(p1) << "=" << l1
               << " < lambda" << pair_str(p2) << "=" << l2;
            verdict.add({Condition::RateDown, p1, p2, -1, os.str()});
          }
        }
      }
    }
  }
  return verdict;
}

AttractivenessVerdict check_ims_attractive(const ModelSpec& model) {
  const auto canonical = canonicalize(model);
  AttractivenessVerdict verdict;
  for (std::size_t i = 0; i < canonical.layer_count(); ++i) {
    const auto& layer = canonical.layer(i);
    const auto mv = check_map_attractive(layer.map);
    if (!mv.attractive) {
      verdict.merge(mv, static_cast<int>(i));
      continue;
    }
    verdict.merge(check_rate_restrictions(layer.map, layer.rates), static_cast<int>(i));
  }
  return verdict;
}

ModelSpec apply_permutation(const ModelSpec& model, const Permutation& pi) {
  const int n = model.n();
  if (pi.n() != n) {
    throw DomainError("permutation acts on " + std::to_string(pi.n() + 1) + " types, model has " +
                      std::to_string(n + 1));
  }
  const auto inv = pi.inverse();
  std::vector<Layer> layers;
  for (const auto& layer : model.layers()) {
    std::vector<ParticleType> map(square(n));
    std::vector<double> rates(square(n));
    for (int a = 0; a <= n; ++a) {
      for (int b = 0; b <= n; ++b) {
        const auto i = static_cast<std::size_t>(a * (n + 1) + b);
        map[i] = static_cast<ParticleType>(pi(layer.map(inv(a), inv(b))));
        rates[i] = layer.rates(inv(a), inv(b));
      }
    }
    layers.push_back({InteractionMap(n, std::move(map)), RateTable(n, std::move(rates))});
  }
  std::vector<std::string> labels(static_cast<std::size_t>(n + 1));
  for (int a = 0; a <= n; ++a) labels[static_cast<std::size_t>(pi(a))] = model.labels()[static_cast<std::size_t>(a)];
  return ModelSpec(n, std::move(layers), std::move(labels));
}

std::vector<Permutation> search_orderings(const ModelSpec& model) {
  if (model.n() > kMaxSearchN) {
    throw CapacityError("reordering search is limited to n <= " + std::to_string(kMaxSearchN) +
                        ", got n=" + std::to_string(model.n()));
  }
  std::vector<Permutation> found;
  std::vector<int> img(static_cast<std::size_t>(model.n() + 1));
  std::iota(img.begin(), img.end(), 0);
  do {
    Permutation pi(img);
    if (check_ims_attractive(apply_permutation(model, pi)).attractive) found.push_back(std::move(pi));
  } while (std::next_permutation(img.begin(), img.end()));
  return found;
}

}  // namespace ims
