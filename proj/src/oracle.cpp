#include "ims/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "ims/random.hpp"

namespace ims {

namespace {

std::size_t checked_power(std::size_t base, std::size_t exp, std::size_t capacity, const char* what) {
  std::size_t v = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (v > capacity / base) {
      throw CapacityError(std::string(what) + ": " + std::to_string(base) + "^" + std::to_string(exp) +
                          " exceeds the limit of " + std::to_string(capacity));
    }
    v *= base;
  }
  if (v > capacity) {
    throw CapacityError(std::string(what) + ": " + std::to_string(v) + " states exceed the limit of " +
                        std::to_string(capacity));
  }
  return v;
}

// place value of each site (site 0 most significant)
std::vector<std::size_t> place_values(const StateSpaceIndex& idx) {
  std::vector<std::size_t> p(idx.sites());
  std::size_t v = 1;
  for (std::size_t s = idx.sites(); s-- > 0;) {
    p[s] = v;
    v *= static_cast<std::size_t>(idx.n() + 1);
  }
  return p;
}

struct OrderedPairs {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // eta < xi strictly
};

OrderedPairs ordered_pairs(const StateSpaceIndex& idx) {
  OrderedPairs out;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (std::size_t j = 0; j < idx.size(); ++j) {
      if (i != j && idx.leq(i, j)) out.pairs.emplace_back(i, j);
    }
  }
  return out;
}

std::string state_str(const StateSpaceIndex& idx, std::size_t s) {
  return "(" + format_configuration(idx.decode(s)) + ")";
}

void poisson_weights(double x, double tail, const std::function<void(std::size_t, double)>& visit) {
  // w_k = exp(-x) x^k / k!, evaluated in log space to survive large x
  double cumulative = 0.0;
  const auto kmax = static_cast<std::size_t>(x + 50.0 * std::sqrt(x) + 200.0);
  for (std::size_t k = 0; k <= kmax; ++k) {
    const double logw = -x + (k == 0 ? 0.0 : static_cast<double>(k) * std::log(x)) - std::lgamma(static_cast<double>(k) + 1.0);
    const double w = std::exp(logw);
    cumulative += w;
    visit(k, w);
    if (static_cast<double>(k) >= x && 1.0 - cumulative < tail) return;
  }
}

}  // namespace

// ---------------------------------------------------------------- StateSpaceIndex

StateSpaceIndex::StateSpaceIndex(std::size_t sites, int n, std::size_t capacity)
    : sites_(sites), n_(n), size_(checked_power(static_cast<std::size_t>(n + 1), sites, capacity, "state space")) {
  digits_.resize(size_ * sites_);
  for (std::size_t s = 0; s < size_; ++s) {
    std::size_t v = s;
    for (std::size_t site = sites_; site-- > 0;) {
      digits_[s * sites_ + site] = static_cast<ParticleType>(v % static_cast<std::size_t>(n_ + 1));
      v /= static_cast<std::size_t>(n_ + 1);
    }
  }
}

std::size_t StateSpaceIndex::encode(const Configuration& c) const {
  if (c.size() != sites_) throw DomainError("configuration size does not match the state space");
  std::size_t v = 0;
  for (std::size_t x = 0; x < sites_; ++x) {
    if (c[x] > n_) throw DomainError("configuration type above n");
    v = v * static_cast<std::size_t>(n_ + 1) + static_cast<std::size_t>(c[x]);
  }
  return v;
}

Configuration StateSpaceIndex::decode(std::size_t index) const {
  if (index >= size_) throw DomainError("state index out of range");
  return Configuration(std::vector<ParticleType>(digits_.begin() + static_cast<std::ptrdiff_t>(index * sites_),
                                                 digits_.begin() + static_cast<std::ptrdiff_t>((index + 1) * sites_)));
}

bool StateSpaceIndex::leq(std::size_t eta, std::size_t xi) const {
  for (std::size_t x = 0; x < sites_; ++x) {
    if (digits_[eta * sites_ + x] > digits_[xi * sites_ + x]) return false;
  }
  return true;
}

// ---------------------------------------------------------------- generator

GeneratorMatrix build_generator(const ModelSpec& model, const Lattice& lattice, std::size_t capacity) {
  StateSpaceIndex idx(lattice.sites(), model.n(), capacity);
  const auto place = place_values(idx);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t s = 0; s < idx.size(); ++s) {
    for (std::size_t x = 0; x < lattice.sites(); ++x) {
      const int a = idx.digit(s, x);
      for (const auto& nb : lattice.neighbors(x)) {
        const int b = idx.digit(s, nb.site);
        for (const auto& layer : model.layers()) {
          const int j = layer.map(a, b);
          if (j == a) continue;
          const double r = layer.rates(a, b) * nb.weight;
          if (r == 0.0) continue;
          const auto target = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(s) +
                                                       static_cast<std::ptrdiff_t>(j - a) * static_cast<std::ptrdiff_t>(place[x]));
          q(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(target)) += r;
        }
      }
    }
    const auto row = static_cast<Eigen::Index>(s);
    q(row, row) = 0.0;
    q(row, row) = -q.row(row).sum();
  }
  return {std::move(idx), std::move(q)};
}

// ---------------------------------------------------------------- up-sets

std::size_t UpSet::size() const {
  return static_cast<std::size_t>(std::count(members.begin(), members.end(), char{1}));
}

bool is_upward_closed(const StateSpaceIndex& index, const UpSet& set) {
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (!set.contains(i)) continue;
    for (std::size_t j = 0; j < index.size(); ++j) {
      if (index.leq(i, j) && !set.contains(j)) return false;
    }
  }
  return true;
}

std::vector<UpSet> enumerate_upsets(const StateSpaceIndex& index, std::size_t state_limit, std::size_t family_limit) {
  if (index.size() > state_limit) {
    throw CapacityError("up-set enumeration is limited to " + std::to_string(state_limit) + " states, got " +
                        std::to_string(index.size()));
  }
  const std::size_t n_states = index.size();
  const auto place = place_values(index);
  // Decide states from the top down: a state may join only if all of its
  // upper covers already did.
  std::vector<std::size_t> order(n_states);
  std::vector<int> rank(n_states, 0);
  for (std::size_t s = 0; s < n_states; ++s) {
    order[s] = s;
    for (std::size_t x = 0; x < index.sites(); ++x) rank[s] += index.digit(s, x);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return rank[l] > rank[r]; });
  std::vector<std::vector<std::size_t>> covers(n_states);
  for (std::size_t s = 0; s < n_states; ++s) {
    for (std::size_t x = 0; x < index.sites(); ++x) {
      if (index.digit(s, x) < index.n()) covers[s].push_back(s + place[x]);
    }
  }

  std::vector<UpSet> out;
  UpSet current{std::vector<char>(n_states, 0)};
  std::function<void(std::size_t)> descend = [&](std::size_t pos) {
    if (pos == n_states) {
      if (out.size() >= family_limit) {
        throw CapacityError("more than " + std::to_string(family_limit) + " up-sets");
      }
      out.push_back(current);
      return;
    }
    const std::size_t s = order[pos];
    descend(pos + 1);
    const bool allowed = std::all_of(covers[s].begin(), covers[s].end(), [&](std::size_t c) { return current.contains(c); });
    if (allowed) {
      current.members[s] = 1;
      descend(pos + 1);
      current.members[s] = 0;
    }
  };
  descend(0);
  return out;
}

// ---------------------------------------------------------------- monotonicity

std::string MonotonicityReport::describe(const StateSpaceIndex& index, const std::vector<UpSet>& upsets,
                                         std::size_t limit) const {
  std::ostringstream os;
  os << (monotone ? "monotone" : "NOT monotone") << '\n';
  for (std::size_t i = 0; i < std::min(limit, violations.size()); ++i) {
    const auto& v = violations[i];
    os << "  eta=" << state_str(index, v.eta) << " <= xi=" << state_str(index, v.xi) << ", up-set #" << v.upset
       << " {";
    bool first = true;
    for (std::size_t s = 0; s < index.size(); ++s) {
      if (!upsets[v.upset].contains(s)) continue;
      os << (first ? "" : " ") << state_str(index, s);
      first = false;
    }
    os << "}";
    if (v.t > 0.0) os << " at t=" << v.t << ": P_eta(G)=" << v.lhs << " > P_xi(G)=" << v.rhs;
    else if (v.inside) os << ": exit rate eta " << v.lhs << " < exit rate xi " << v.rhs;
    else os << ": entry rate eta " << v.lhs << " > entry rate xi " << v.rhs;
    os << '\n';
  }
  if (violations.size() > limit) os << "  ... " << violations.size() - limit << " more\n";
  return os.str();
}

bool MonotonicityReport::has_counterexample(std::size_t eta, std::size_t xi) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const MonotonicityViolation& v) { return v.eta == eta && v.xi == xi; });
}

MonotonicityReport generator_monotone(const GeneratorMatrix& g, const std::vector<UpSet>& upsets,
                                      std::size_t max_reported) {
  const auto& idx = g.index;
  const auto n_states = static_cast<Eigen::Index>(idx.size());
  const double scale = std::max(1.0, g.q.cwiseAbs().maxCoeff());
  const double eps = 1e-12 * scale;
  const auto pairs = ordered_pairs(idx);
  MonotonicityReport report;
  std::vector<double> into(idx.size());
  std::vector<double> out_of(idx.size());
  for (std::size_t gi = 0; gi < upsets.size(); ++gi) {
    const auto& up = upsets[gi];
    for (Eigen::Index s = 0; s < n_states; ++s) {
      double in_sum = 0.0;
      double out_sum = 0.0;
      for (Eigen::Index z = 0; z < n_states; ++z) {
        if (z == s) continue;
        (up.contains(static_cast<std::size_t>(z)) ? in_sum : out_sum) += g.q(s, z);
      }
      into[static_cast<std::size_t>(s)] = in_sum;
      out_of[static_cast<std::size_t>(s)] = out_sum;
    }
    for (const auto& [eta, xi] : pairs.pairs) {
      const bool eta_in = up.contains(eta);
      const bool xi_in = up.contains(xi);
      if (!eta_in && !xi_in && into[eta] > into[xi] + eps) {
        report.monotone = false;
        if (report.violations.size() < max_reported) report.violations.push_back({eta, xi, gi, false, into[eta], into[xi]});
      } else if (eta_in && xi_in && out_of[eta] + eps < out_of[xi]) {
        report.monotone = false;
        if (report.violations.size() < max_reported) report.violations.push_back({eta, xi, gi, true, out_of[eta], out_of[xi]});
      }
    }
  }
  return report;
}

Eigen::VectorXd transition_apply(const GeneratorMatrix& g, double t, const Eigen::VectorXd& v, double tail) {
  if (t < 0.0) throw DomainError("transition time must be >= 0");
  const double cu = g.q.diagonal().cwiseAbs().maxCoeff();
  if (t == 0.0 || cu == 0.0) return v;
  const Eigen::MatrixXd p_hat =
      Eigen::MatrixXd::Identity(g.q.rows(), g.q.cols()) + g.q / cu;
  Eigen::VectorXd term = v;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(v.size());
  poisson_weights(cu * t, tail, [&](std::size_t k, double w) {
    if (k > 0) term = p_hat * term;
    acc += w * term;
  });
  return acc;
}

Eigen::MatrixXd transition_matrix(const GeneratorMatrix& g, double t, double tail) {
  if (t < 0.0) throw DomainError("transition time must be >= 0");
  const auto n = g.q.rows();
  const double cu = g.q.diagonal().cwiseAbs().maxCoeff();
  if (t == 0.0 || cu == 0.0) return Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd p_hat = Eigen::MatrixXd::Identity(n, n) + g.q / cu;
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
  poisson_weights(cu * t, tail, [&](std::size_t k, double w) {
    if (k > 0) term = term * p_hat;
    acc += w * term;
  });
  return acc;
}

MonotonicityReport semigroup_monotone(const GeneratorMatrix& g, const std::vector<UpSet>& upsets,
                                      const std::vector<double>& times, double tol, std::size_t max_reported) {
  if (!(tol > 0.0)) throw DomainError("semigroup tolerance must be positive");
  const auto& idx = g.index;
  const auto pairs = ordered_pairs(idx);
  MonotonicityReport report;
  for (double t : times) {
    if (t == 0.0) continue;  // P(0) = I
    for (std::size_t gi = 0; gi < upsets.size(); ++gi) {
      Eigen::VectorXd indicator(static_cast<Eigen::Index>(idx.size()));
      for (std::size_t s = 0; s < idx.size(); ++s) indicator(static_cast<Eigen::Index>(s)) = upsets[gi].contains(s) ? 1.0 : 0.0;
      const Eigen::VectorXd prob = transition_apply(g, t, indicator, tol / 10.0);
      for (const auto& [eta, xi] : pairs.pairs) {
        const double l = prob(static_cast<Eigen::Index>(eta));
        const double r = prob(static_cast<Eigen::Index>(xi));
        if (l > r + tol) {
          report.monotone = false;
          if (report.violations.size() < max_reported) report.violations.push_back({eta, xi, gi, false, l, r, t});
        }
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------- stationary

StationaryResult stationary(const GeneratorMatrix& g) {
  const auto n = static_cast<std::size_t>(g.q.rows());
  auto edge = [&](std::size_t i, std::size_t j) {
    return i != j && g.q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > 0.0;
  };

  // Tarjan's strongly connected components, iterative.
  std::vector<int> comp(n, -1);
  std::vector<std::size_t> low(n), num(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<std::size_t> stack;
  std::size_t counter = 0;
  int n_comp = 0;
  for (std::size_t root = 0; root < n; ++root) {
    if (num[root] != 0) continue;
    std::vector<std::pair<std::size_t, std::size_t>> work{{root, 0}};
    num[root] = low[root] = ++counter;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!work.empty()) {
      auto& [v, next] = work.back();
      if (next < n) {
        const std::size_t w = next++;
        if (!edge(v, w)) continue;
        if (num[w] == 0) {
          num[w] = low[w] = ++counter;
          stack.push_back(w);
          on_stack[w] = 1;
          work.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], num[w]);
        }
        continue;
      }
      const std::size_t done = v;
      work.pop_back();
      if (!work.empty()) low[work.back().first] = std::min(low[work.back().first], low[done]);
      if (low[done] == num[done]) {
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = n_comp;
        } while (w != done);
        ++n_comp;
      }
    }
  }

  std::vector<char> closed(static_cast<std::size_t>(n_comp), 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (edge(i, j) && comp[i] != comp[j]) closed[static_cast<std::size_t>(comp[i])] = 0;
    }
  }

  StationaryResult result;
  result.distribution = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (int c = 0; c < n_comp; ++c) {
    if (!closed[static_cast<std::size_t>(c)]) continue;
    ++result.closed_classes;
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i) {
      if (comp[i] == c) members.push_back(i);
    }
    const auto m = static_cast<Eigen::Index>(members.size());
    Eigen::MatrixXd a(m, m);
    for (Eigen::Index r = 0; r < m; ++r) {
      for (Eigen::Index k = 0; k < m; ++k) {
        a(r, k) = g.q(static_cast<Eigen::Index>(members[static_cast<std::size_t>(k)]),
                      static_cast<Eigen::Index>(members[static_cast<std::size_t>(r)]));
      }
    }
    a.row(m - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    rhs(m - 1) = 1.0;
    const Eigen::VectorXd pi = a.fullPivLu().solve(rhs);
    for (Eigen::Index k = 0; k < m; ++k) {
      result.distribution(static_cast<Eigen::Index>(members[static_cast<std::size_t>(k)])) += pi(k);
    }
  }
  if (result.closed_classes > 0) result.distribution /= static_cast<double>(result.closed_classes);
  result.unique = result.closed_classes == 1;
  return result;
}

// ---------------------------------------------------------------- coupling

CoupledGenerator build_coupled_generator(const ModelSpec& first, const ModelSpec& second, const Lattice& lattice,
                                         std::size_t capacity) {
  if (first.n() != second.n()) throw PreconditionError("coupled systems must share the particle types");
  if (first.layer_count() != second.layer_count()) throw PreconditionError("coupled systems must have the same layers");
  StateSpaceIndex idx(lattice.sites(), first.n(), capacity);
  const std::size_t n_states = idx.size();
  if (n_states > capacity / n_states) {
    throw CapacityError("coupled state space " + std::to_string(n_states) + "^2 exceeds the limit of " +
                        std::to_string(capacity));
  }
  const auto place = place_values(idx);
  const auto total = static_cast<Eigen::Index>(n_states * n_states);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(total, total);
  auto add = [&](std::size_t from, std::size_t to, double rate) {
    if (from != to && rate != 0.0) q(static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(to)) += rate;
  };
  auto shifted = [&](std::size_t s, std::size_t x, int delta) {
    return static_cast<std::size_t>(static_cast<std::ptrdiff_t>(s) +
                                    static_cast<std::ptrdiff_t>(delta) * static_cast<std::ptrdiff_t>(place[x]));
  };
  for (std::size_t eta = 0; eta < n_states; ++eta) {
    for (std::size_t xi = 0; xi < n_states; ++xi) {
      const std::size_t from = eta * n_states + xi;
      for (std::size_t x = 0; x < lattice.sites(); ++x) {
        const int a1 = idx.digit(eta, x);
        const int a2 = idx.digit(xi, x);
        for (const auto& nb : lattice.neighbors(x)) {
          const int b1 = idx.digit(eta, nb.site);
          const int b2 = idx.digit(xi, nb.site);
          for (std::size_t l = 0; l < first.layer_count(); ++l) {
            const auto& L1 = first.layer(l);
            const auto& L2 = second.layer(l);
            const int j1 = L1.map(a1, b1);
            const int j2 = L2.map(a2, b2);
            const double r1 = L1.rates(a1, b1) * nb.weight;
            const double r2 = L2.rates(a2, b2) * nb.weight;
            const double r1u = j1 > a1 ? r1 : 0.0;
            const double r1d = j1 < a1 ? r1 : 0.0;
            const double r2u = j2 > a2 ? r2 : 0.0;
            const double r2d = j2 < a2 ? r2 : 0.0;
            const double joint = std::min(r1u, r2u) + std::min(r1d, r2d);
            const std::size_t eta_next = shifted(eta, x, j1 - a1);
            const std::size_t xi_next = shifted(xi, x, j2 - a2);
            add(from, eta_next * n_states + xi_next, joint);
            add(from, eta * n_states + xi_next, (r2u + r2d) - joint);
            add(from, eta_next * n_states + xi, (r1u + r1d) - joint);
          }
        }
      }
      const auto row = static_cast<Eigen::Index>(from);
      q(row, row) = 0.0;
      q(row, row) = -q.row(row).sum();
    }
  }
  return {std::move(idx), std::move(q)};
}

std::string CouplingReport::describe(const StateSpaceIndex& index, std::size_t limit) const {
  std::ostringstream os;
  os << (preserved ? "order preserved" : "order NOT preserved") << '\n';
  for (std::size_t i = 0; i < std::min(limit, escapes.size()); ++i) {
    const auto& e = escapes[i];
    os << "  (" << format_configuration(index.decode(e.eta)) << ") <= (" << format_configuration(index.decode(e.xi))
       << ") -> (" << format_configuration(index.decode(e.eta_next)) << "), ("
       << format_configuration(index.decode(e.xi_next)) << ") at rate " << e.rate << '\n';
  }
  if (escapes.size() > limit) os << "  ... " << escapes.size() - limit << " more\n";
  return os.str();
}

bool CouplingReport::has_escape_from(std::size_t eta, std::size_t xi) const {
  return std::any_of(escapes.begin(), escapes.end(),
                     [&](const CouplingEscape& e) { return e.eta == eta && e.xi == xi; });
}

CouplingReport coupled_order_preserved(const CoupledGenerator& g) {
  const auto& idx = g.index;
  const std::size_t n_states = idx.size();
  CouplingReport report;
  for (std::size_t eta = 0; eta < n_states; ++eta) {
    for (std::size_t xi = 0; xi < n_states; ++xi) {
      if (!idx.leq(eta, xi)) continue;
      const auto from = static_cast<Eigen::Index>(eta * n_states + xi);
      for (Eigen::Index to = 0; to < g.q.cols(); ++to) {
        if (to == from || !(g.q(from, to) > 0.0)) continue;
        const auto e2 = static_cast<std::size_t>(to) / n_states;
        const auto x2 = static_cast<std::size_t>(to) % n_states;
        if (!idx.leq(e2, x2)) {
          report.preserved = false;
          report.escapes.push_back({eta, xi, e2, x2, g.q(from, to)});
        }
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------- equivalence study

ModelSpec random_single_map_model(int n, std::uint64_t seed, std::size_t trial, double rate_low, double rate_high) {
  if (n < 1 || n > kMaxN) throw DomainError("n out of range");
  if (!(rate_low > 0.0) || !(rate_high >= rate_low)) throw DomainError("rates must satisfy 0 < low <= high");
  CounterStream rng(mix_seed(seed), static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32),
                    0x45515556u);
  const auto types = static_cast<std::size_t>(n + 1);
  std::vector<ParticleType> map(types * types);
  std::vector<double> rates(types * types);
  for (auto& v : map) v = static_cast<ParticleType>(std::min<double>(n, std::floor(rng.uniform() * (n + 1))));
  for (auto& r : rates) r = rate_low + (rate_high - rate_low) * rng.uniform();
  return ModelSpec(n, {{InteractionMap(n, std::move(map)), RateTable(n, std::move(rates))}});
}

std::vector<EquivalenceTrial> equivalence_study(const EquivalenceOptions& options) {
  const Lattice lattice(LatticeSpec{{options.sites}, Boundary::Free, Kernel::nearest_neighbor()});
  const StateSpaceIndex index(lattice.sites(), options.n);
  const auto upsets = enumerate_upsets(index);
  std::vector<EquivalenceTrial> out;
  out.reserve(options.trials);
  for (std::size_t i = 0; i < options.trials; ++i) {
    auto model = random_single_map_model(options.n, options.seed, i, options.rate_low, options.rate_high);
    const auto g = build_generator(model, lattice);
    const bool checker = check_ims_attractive(model).attractive;
    const bool gen = generator_monotone(g, upsets, 1).monotone;
    const bool semi = semigroup_monotone(g, upsets, options.times, options.tol, 1).monotone;
    out.push_back({i, std::move(model), checker, gen, semi});
  }
  return out;
}

}  // namespace ims
