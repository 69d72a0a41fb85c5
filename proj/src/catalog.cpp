#include <cmath>

#include "ims/model_io.hpp"

namespace ims {

namespace {

struct Entry {
  const char* name;
  std::map<std::string, double> defaults;
};

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      {"contact", {{"lambda", 2.0}, {"death", 1.0}}},
      {"voter", {{"rate", 1.0}}},
      {"two_type", {{"lambda1", 2.0}, {"lambda2", 2.0}, {"delta1", 1.0}, {"delta2", 1.0}}},
      {"two_type_reordered", {{"lambda1", 2.0}, {"lambda2", 2.0}, {"delta1", 1.0}, {"delta2", 1.0}}},
      {"two_stage", {{"lambda", 3.0}, {"gamma", 1.0}, {"delta", 0.5}}},
      {"gbt", {{"beta1", 2.0}, {"beta2", 1.5}, {"delta1", 1.0}, {"delta2", 1.0}}},
      {"noisy_contact", {{"lambda", 1.5}, {"death", 1.0}, {"epsilon", 0.2}}},
  };
  return table;
}

const Entry& entry(const std::string& name) {
  for (const auto& e : entries()) {
    if (name == e.name) return e;
  }
  std::string known;
  for (const auto& e : entries()) known += (known.empty() ? "" : ", ") + std::string(e.name);
  throw DomainError("unknown built-in model '" + name + "' (known: " + known + ")");
}

using Rows = std::vector<std::vector<int>>;
using RateRows = std::vector<std::vector<double>>;

Layer layer(const Rows& map, const RateRows& rates) {
  return {InteractionMap::from_rows(map), RateTable::from_rows(rates)};
}

ModelSpec two_type(const std::map<std::string, double>& p, double w) {
  const double l1 = p.at("lambda1"), l2 = p.at("lambda2");
  const double d1 = p.at("delta1") / w, d2 = p.at("delta2") / w;
  return ModelSpec(2, {layer({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}},  //
                             {{0, d1, d2}, {l1, d1, d2}, {l2, d1, d2}})},
                   {"empty", "species1", "species2"});
}

}  // namespace

std::vector<std::string> builtin_names() {
  std::vector<std::string> out;
  for (const auto& e : entries()) out.emplace_back(e.name);
  return out;
}

std::map<std::string, double> builtin_defaults(const std::string& name) { return entry(name).defaults; }

ModelSpec builtin_model(const std::string& name, const std::map<std::string, double>& params, double w) {
  const auto& e = entry(name);
  for (const auto& [k, v] : e.defaults) {
    const auto it = params.find(k);
    if (it == params.end()) throw DomainError("model '" + name + "' is missing parameter '" + k + "'");
    if (!(it->second >= 0.0) || !std::isfinite(it->second)) {
      throw DomainError("model '" + name + "': parameter '" + k + "' must be a finite nonnegative number");
    }
  }
  for (const auto& [k, v] : params) {
    if (!e.defaults.count(k)) throw DomainError("model '" + name + "' has no parameter '" + k + "'");
  }
  if (!(w > 0.0)) throw DomainError("kernel mass must be positive");
  const auto& p = params;

  if (name == "contact") {
    const double l = p.at("lambda"), d = p.at("death") / w;
    return ModelSpec(1, {layer({{0, 0}, {1, 0}}, {{0, d}, {l, d}})}, {"empty", "occupied"});
  }
  if (name == "voter") {
    const double r = p.at("rate");
    return ModelSpec(1, {layer({{0, 0}, {1, 1}}, {{0, r}, {r, 0}})}, {"0", "1"});
  }
  if (name == "two_type") return two_type(p, w);
  if (name == "two_type_reordered") {
    return apply_permutation(two_type(p, w), Permutation::swap(2, 0, 1));
  }
  if (name == "two_stage") {
    const double l = p.at("lambda"), g = p.at("gamma") / w;
    const double young = (1.0 + p.at("delta")) / w, adult = 1.0 / w;
    return ModelSpec(2,
                     {layer({{0, 0, 0}, {0, 0, 0}, {1, 0, 0}},  //
                            {{0, young, adult}, {0, young, adult}, {l, young, adult}}),
                      layer({{0, 2, 2}, {0, 2, 2}, {0, 2, 2}},  //
                            {{0, g, 0}, {0, g, 0}, {0, g, 0}})},
                     {"empty", "young", "adult"});
  }
  if (name == "gbt") {
    const double b1 = p.at("beta1"), b2 = p.at("beta2");
    const double d1 = p.at("delta1") / w, d2 = p.at("delta2") / w;
    return ModelSpec(2,
                     {layer({{1, 0, 1}, {1, 1, 1}, {1, 1, 1}},  //
                            {{d1, b1, d2}, {d1, 0, d2}, {d1, 0, d2}}),
                      layer({{0, 1, 2}, {0, 1, 2}, {2, 2, 2}},  //
                            {{0, 0, 0}, {0, 0, 0}, {b2, b2, 0}})},
                     {"bushes", "grass", "trees"});
  }
  if (name == "noisy_contact") {
    const double l = p.at("lambda"), d = p.at("death") / w, eps = p.at("epsilon") / w;
    return ModelSpec(1,
                     {layer({{0, 0}, {1, 0}}, {{0, d}, {l, d}}),  //
                      layer({{1, 1}, {1, 1}}, {{eps, 0}, {eps, 0}})},
                     {"empty", "occupied"});
  }
  throw DomainError("unknown built-in model '" + name + "'");
}

ModelDocument builtin_document(const std::string& name, const std::map<std::string, double>& overrides,
                               const LatticeSpec& lattice) {
  auto params = builtin_defaults(name);
  for (const auto& [k, v] : overrides) {
    if (!params.count(k)) throw DomainError("model '" + name + "' has no parameter '" + k + "'");
    params[k] = v;
  }
  const double w = Lattice(lattice).max_mass();
  return ModelDocument{name, builtin_model(name, params, w), lattice, params};
}

std::vector<std::string> reference_map_names() {
  return {"contact",          "voter",           "two_type",           "two_type_modified_a", "two_type_modified_b",
          "two_type_modified_c", "two_type_reordered", "gbt_base", "gbt_tree_birth"};
}

InteractionMap reference_map(const std::string& name) {
  if (name == "contact") return InteractionMap::from_rows({{0, 0}, {1, 0}});
  if (name == "voter") return InteractionMap::from_rows({{0, 0}, {1, 1}});
  if (name == "two_type") return InteractionMap::from_rows({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}});
  if (name == "two_type_modified_a") return InteractionMap::from_rows({{0, 0, 0}, {1, 0, 0}, {2, 1, 1}});
  if (name == "two_type_modified_b") return InteractionMap::from_rows({{0, 0, 0}, {1, 0, 0}, {2, 2, 1}});
  if (name == "two_type_modified_c") return InteractionMap::from_rows({{0, 0, 0}, {1, 0, 0}, {2, 2, 2}});
  if (name == "two_type_reordered") return InteractionMap::from_rows({{1, 0, 1}, {1, 1, 1}, {1, 2, 1}});
  if (name == "gbt_base") return InteractionMap::from_rows({{1, 0, 1}, {1, 1, 1}, {1, 1, 1}});
  if (name == "gbt_tree_birth") return InteractionMap::from_rows({{0, 1, 2}, {0, 1, 2}, {2, 2, 2}});
  throw DomainError("unknown reference map '" + name + "'");
}

}  // namespace ims
