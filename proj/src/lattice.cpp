#include "ims/lattice.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

namespace ims {

std::string_view to_string(Boundary b) {
  return b == Boundary::Periodic ? "periodic" : "free";
}

std::string_view to_string(KernelKind k) {
  switch (k) {
    case KernelKind::NearestNeighbor: return "nearest-neighbor";
    case KernelKind::Box: return "box";
    case KernelKind::Complete: return "complete";
    case KernelKind::Offsets: return "offsets";
  }
  return "?";
}

std::string_view to_string(OrderRelation r) {
  switch (r) {
    case OrderRelation::LessOrEqual: return "less-or-equal";
    case OrderRelation::GreaterOrEqual: return "greater-or-equal";
    case OrderRelation::Equal: return "equal";
    case OrderRelation::Incomparable: return "incomparable";
  }
  return "?";
}

// ---------------------------------------------------------------- Kernel

Kernel::Kernel(KernelKind kind, int range, double weight, std::vector<KernelOffset> offsets)
    : kind_(kind), range_(range), weight_(weight), offsets_(std::move(offsets)) {
  if (!(weight_ >= 0.0) || !std::isfinite(weight_)) throw DomainError("kernel weight must be finite and >= 0");
  for (const auto& o : offsets_) {
    if (!(o.weight >= 0.0) || !std::isfinite(o.weight)) throw DomainError("kernel offset weight must be finite and >= 0");
    if (o.dx == 0 && o.dy == 0) throw DomainError("kernel offsets must exclude (0,0): phi(x,x) = 0");
  }
}

Kernel Kernel::nearest_neighbor(double weight) { return Kernel(KernelKind::NearestNeighbor, 1, weight, {}); }

Kernel Kernel::box(int range, double weight) {
  if (range < 1) throw DomainError("box kernel range must be >= 1");
  return Kernel(KernelKind::Box, range, weight, {});
}

Kernel Kernel::complete(double weight) { return Kernel(KernelKind::Complete, 0, weight, {}); }

Kernel Kernel::offsets(std::vector<KernelOffset> offsets) {
  if (offsets.empty()) throw DomainError("explicit kernel needs at least one offset");
  int range = 0;
  for (const auto& o : offsets) range = std::max({range, std::abs(o.dx), std::abs(o.dy)});
  return Kernel(KernelKind::Offsets, range, 1.0, std::move(offsets));
}

std::vector<KernelOffset> Kernel::offsets_for(int dim) const {
  std::vector<KernelOffset> out;
  switch (kind_) {
    case KernelKind::NearestNeighbor:
      out.push_back({-1, 0, weight_});
      out.push_back({1, 0, weight_});
      if (dim == 2) {
        out.push_back({0, -1, weight_});
        out.push_back({0, 1, weight_});
      }
      break;
    case KernelKind::Box: {
      const int ylo = dim == 2 ? -range_ : 0;
      const int yhi = dim == 2 ? range_ : 0;
      for (int dx = -range_; dx <= range_; ++dx) {
        for (int dy = ylo; dy <= yhi; ++dy) {
          if (dx != 0 || dy != 0) out.push_back({dx, dy, weight_});
        }
      }
      break;
    }
    case KernelKind::Complete:
      break;
    case KernelKind::Offsets:
      for (const auto& o : offsets_) {
        if (dim == 1 && o.dy != 0) throw DomainError("offset with dy != 0 on a 1-d lattice");
        out.push_back(o);
      }
      break;
  }
  return out;
}

std::string Kernel::describe() const {
  std::ostringstream os;
  os << to_string(kind_);
  if (kind_ == KernelKind::Box) os << ":" << range_;
  if (kind_ != KernelKind::Offsets && weight_ != 1.0) os << " weight=" << weight_;
  if (kind_ == KernelKind::Offsets) os << "[" << offsets_.size() << "]";
  return os.str();
}

std::string LatticeSpec::describe() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < sides.size(); ++i) os << (i ? "x" : "") << sides[i];
  os << ' ' << to_string(boundary) << ' ' << kernel.describe();
  return os.str();
}

// ---------------------------------------------------------------- Lattice

Lattice::Lattice(LatticeSpec spec) : spec_(std::move(spec)) {
  const int dim = static_cast<int>(spec_.sides.size());
  if (dim < 1 || dim > 2) throw DomainError("lattice dimension must be 1 or 2, got " + std::to_string(dim));
  std::size_t count = 1;
  for (int s : spec_.sides) {
    if (s <= 0) throw DomainError("lattice side lengths must be positive, got " + std::to_string(s));
    count *= static_cast<std::size_t>(s);
  }
  neighbors_.resize(count);

  const auto offsets = spec_.kernel.offsets_for(dim);
  for (std::size_t x = 0; x < count; ++x) {
    std::map<std::size_t, double> acc;
    if (spec_.kernel.kind() == KernelKind::Complete) {
      for (std::size_t y = 0; y < count; ++y) {
        if (y != x) acc[y] += spec_.kernel.weight();
      }
    } else {
      const auto c = coordinates(x);
      for (const auto& o : offsets) {
        std::array<int, 2> t{c[0] + o.dx, c[1] + o.dy};
        bool inside = true;
        for (int i = 0; i < dim; ++i) {
          const int side = spec_.sides[static_cast<std::size_t>(i)];
          auto& v = t[static_cast<std::size_t>(i)];
          if (spec_.boundary == Boundary::Periodic) {
            v = ((v % side) + side) % side;
          } else if (v < 0 || v >= side) {
            inside = false;
          }
        }
        if (!inside) continue;
        const auto y = site_at(t);
        // wrap-around aliases of x itself are dropped; other aliases add up
        if (y != x) acc[y] += o.weight;
      }
    }
    double mass = 0.0;
    for (const auto& [y, w] : acc) {
      if (w <= 0.0) continue;
      neighbors_[x].push_back({y, w});
      mass += w;
      max_weight_ = std::max(max_weight_, w);
    }
    max_mass_ = std::max(max_mass_, mass);
    pair_count_ += neighbors_[x].size();
  }
}

double Lattice::weight(std::size_t x, std::size_t y) const {
  const auto& nb = neighbors_.at(x);
  auto it = std::lower_bound(nb.begin(), nb.end(), y, [](const Neighbor& n, std::size_t s) { return n.site < s; });
  return (it != nb.end() && it->site == y) ? it->weight : 0.0;
}

std::array<int, 2> Lattice::coordinates(std::size_t x) const {
  if (dimension() == 1) return {static_cast<int>(x), 0};
  const auto cols = static_cast<std::size_t>(spec_.sides[1]);
  return {static_cast<int>(x / cols), static_cast<int>(x % cols)};
}

std::size_t Lattice::site_at(std::array<int, 2> coords) const {
  if (dimension() == 1) return static_cast<std::size_t>(coords[0]);
  return static_cast<std::size_t>(coords[0]) * static_cast<std::size_t>(spec_.sides[1]) +
         static_cast<std::size_t>(coords[1]);
}

Lattice build_lattice(int dimension, std::vector<int> sides, Boundary boundary, Kernel kernel) {
  if (static_cast<int>(sides.size()) != dimension) {
    throw DomainError("expected " + std::to_string(dimension) + " side lengths, got " + std::to_string(sides.size()));
  }
  return Lattice(LatticeSpec{std::move(sides), boundary, std::move(kernel)});
}

// ---------------------------------------------------------------- Configuration

int Configuration::max_type() const noexcept {
  return values_.empty() ? 0 : *std::max_element(values_.begin(), values_.end());
}

std::string format_configuration(const Configuration& c) {
  std::string out;
  out.reserve(c.size() * 2);
  for (std::size_t x = 0; x < c.size(); ++x) {
    if (x) out += ' ';
    out += std::to_string(c[x]);
  }
  return out;
}

Configuration parse_configuration(std::string_view line, int n, std::size_t sites) {
  std::vector<ParticleType> values;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\n' || line[i] == '\r' || line[i] == ',')) ++i;
    if (i >= line.size()) break;
    int v = 0;
    auto [ptr, ec] = std::from_chars(line.data() + i, line.data() + line.size(), v);
    if (ec != std::errc() || ptr == line.data() + i) {
      throw DomainError("configuration: cannot parse value at position " + std::to_string(i));
    }
    if (v < 0 || v > n) {
      throw DomainError("configuration: site " + std::to_string(values.size()) + " has type " + std::to_string(v) +
                        " outside [0, " + std::to_string(n) + "]");
    }
    values.push_back(static_cast<ParticleType>(v));
    i = static_cast<std::size_t>(ptr - line.data());
  }
  if (values.size() != sites) {
    throw DomainError("configuration has " + std::to_string(values.size()) + " sites, lattice has " +
                      std::to_string(sites));
  }
  return Configuration(std::move(values));
}

OrderRelation compare_configs(const Configuration& eta, const Configuration& xi) {
  if (eta.size() != xi.size()) {
    throw DomainError("cannot compare configurations on different lattices (" + std::to_string(eta.size()) +
                      " vs " + std::to_string(xi.size()) + " sites)");
  }
  bool le = true;
  bool ge = true;
  for (std::size_t x = 0; x < eta.size(); ++x) {
    if (eta[x] < xi[x]) ge = false;
    if (eta[x] > xi[x]) le = false;
  }
  if (le && ge) return OrderRelation::Equal;
  if (le) return OrderRelation::LessOrEqual;
  if (ge) return OrderRelation::GreaterOrEqual;
  return OrderRelation::Incomparable;
}

bool config_leq(const Configuration& eta, const Configuration& xi) {
  const auto r = compare_configs(eta, xi);
  return r == OrderRelation::LessOrEqual || r == OrderRelation::Equal;
}

std::pair<Configuration, Configuration> extremal(const ModelSpec& model, const Lattice& lattice) {
  return {Configuration(lattice.sites(), 0), Configuration(lattice.sites(), model.n())};
}

std::vector<PairRate> pair_rates(const ModelSpec& model, const Lattice& lattice, const Configuration& eta,
                                 std::size_t x, std::size_t y) {
  std::vector<PairRate> out(model.layer_count());
  const double phi = lattice.weight(x, y);
  if (phi == 0.0) return out;
  const int a = eta[x];
  const int b = eta[y];
  for (std::size_t i = 0; i < model.layer_count(); ++i) {
    const auto& layer = model.layer(i);
    const int j = layer.map(a, b);
    const double r = layer.rates(a, b) * phi;
    if (j > a) out[i].up = r;
    if (j < a) out[i].down = r;
  }
  return out;
}

double site_exit_rate(const ModelSpec& model, const Lattice& lattice, const Configuration& eta, std::size_t x) {
  double total = 0.0;
  for (const auto& nb : lattice.neighbors(x)) {
    for (const auto& r : pair_rates(model, lattice, eta, x, nb.site)) total += r.up + r.down;
  }
  return total;
}

double rate_bound(const ModelSpec& model, const Lattice& lattice) {
  return model.max_rate() * lattice.max_weight();
}

int influenced_type(const ModelSpec& model, std::size_t layer, const Configuration& eta, std::size_t x,
                    std::size_t y) {
  return model.layer(layer).map(eta[x], eta[y]);
}

}  // namespace ims
