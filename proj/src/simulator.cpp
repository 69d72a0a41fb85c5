#include "ims/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ims/random.hpp"

namespace ims {

namespace {

constexpr std::uint32_t kCallBits = 19;
constexpr std::uint32_t kMaxLayers = 1u << 12;

bool ordered_at(const Configuration& lower, const Configuration& upper, std::size_t x) {
  return lower[x] <= upper[x];
}

}  // namespace

std::string_view to_string(Direction d) { return d == Direction::Up ? "up" : "down"; }

bool event_before(const Event& l, const Event& r) noexcept {
  if (l.t != r.t) return l.t < r.t;
  if (l.layer != r.layer) return l.layer < r.layer;
  if (l.x != r.x) return l.x < r.x;
  if (l.y != r.y) return l.y < r.y;
  return l.dir < r.dir;
}

// ---------------------------------------------------------------- EventStream

EventStream::EventStream(const ModelSpec& model, const Lattice& lattice, double t_begin, double t_end,
                         std::uint64_t seed, double bound)
    : bound_(bound > 0.0 ? bound : rate_bound(model, lattice)),
      t_begin_(t_begin),
      t_end_(t_end),
      seed_(seed),
      key_(mix_seed(seed)),
      layers_(model.layer_count()) {
  if (!(t_end > t_begin)) throw DomainError("event stream needs a nonempty window (t_begin < t_end)");
  if (!(bound_ > 0.0) || !std::isfinite(bound_)) {
    throw DomainError("rate bound c must be positive: the model has no positive rate");
  }
  if (layers_ > kMaxLayers) throw CapacityError("too many layers for the event channel encoding");
  for (std::uint32_t layer = 0; layer < layers_; ++layer) {
    for (std::size_t x = 0; x < lattice.sites(); ++x) {
      for (const auto& nb : lattice.neighbors(x)) {
        for (Direction d : {Direction::Up, Direction::Down}) {
          channels_.push_back({layer, static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(nb.site), d});
        }
      }
    }
  }
  const double lo = std::floor(t_begin * bound_);
  const double hi = std::floor(t_end * bound_);
  constexpr double kLimit = static_cast<double>(std::numeric_limits<std::int32_t>::max());
  if (lo < -kLimit || hi > kLimit) throw CapacityError("event stream window too long for 32-bit block indices");
  first_block_ = static_cast<std::int64_t>(lo);
  last_block_ = static_cast<std::int64_t>(hi);
}

void EventStream::fill_block(std::int64_t k, std::vector<Event>& out) const {
  out.clear();
  const double block_lo = static_cast<double>(k) / bound_;
  const double block_hi = static_cast<double>(k + 1) / bound_;
  const auto block_word = static_cast<std::uint32_t>(static_cast<std::int32_t>(k));
  for (const auto& ch : channels_) {
    const std::uint32_t tag = (ch.layer << (kCallBits + 1)) | (static_cast<std::uint32_t>(ch.dir) << kCallBits);
    CounterStream rng(key_, ch.x, ch.y, block_word, tag);
    double t = block_lo;
    for (;;) {
      t += rng.exponential(bound_);
      if (!(t < block_hi)) break;
      const double u = bound_ * rng.uniform();
      if (t > t_begin_ && t <= t_end_) out.push_back({t, ch.x, ch.y, ch.layer, ch.dir, u});
    }
    if (rng.calls() - tag >= (1u << kCallBits)) throw CapacityError("channel block exhausted its counter space");
  }
  std::sort(out.begin(), out.end(), event_before);
}

std::vector<Event> EventStream::events() const {
  std::vector<Event> all;
  for_each([&](const Event& e, std::size_t) { all.push_back(e); });
  return all;
}

double EventStream::expected_count() const noexcept {
  return bound_ * (t_end_ - t_begin_) * static_cast<double>(channels_.size());
}

EventStream build_event_stream(const ModelSpec& model, const Lattice& lattice, double horizon, std::uint64_t seed) {
  if (!(horizon > 0.0)) throw DomainError("horizon must be positive");
  return EventStream(model, lattice, 0.0, horizon, seed);
}

// ---------------------------------------------------------------- evolution

bool apply_event_in_place(Configuration& eta, const Event& e, const ModelSpec& model, const Lattice& lattice) {
  const auto& layer = model.layer(e.layer);
  const int a = eta[e.x];
  const int j = layer.map(a, eta[e.y]);
  const bool matches = e.dir == Direction::Up ? j > a : j < a;
  if (!matches) return false;
  const double rate = layer.rates(a, eta[e.y]) * lattice.weight(e.x, e.y);
  if (!(e.u <= rate)) return false;
  eta.set(e.x, j);
  return true;
}

Configuration apply_event(const Configuration& eta, const Event& e, const ModelSpec& model, const Lattice& lattice) {
  Configuration out = eta;
  apply_event_in_place(out, e, model, lattice);
  return out;
}

Configuration Trajectory::at(double t) const {
  Configuration c = initial;
  for (const auto& tr : transitions) {
    if (!(tr.t < t)) break;
    c.set(tr.site, tr.after);
  }
  return c;
}

Trajectory evolve(const Configuration& initial, const EventStream& stream, const ModelSpec& model,
                  const Lattice& lattice) {
  if (initial.size() != lattice.sites()) throw DomainError("initial configuration does not match the lattice");
  if (initial.max_type() > model.n()) throw DomainError("initial configuration has a type above n");
  Trajectory traj{initial, initial, stream.begin(), stream.end(), {}};
  stream.for_each([&](const Event& e, std::size_t index) {
    const auto before = static_cast<ParticleType>(traj.final[e.x]);
    if (apply_event_in_place(traj.final, e, model, lattice)) {
      traj.transitions.push_back({index, e.t, e.x, before, static_cast<ParticleType>(traj.final[e.x])});
    }
  });
  return traj;
}

std::string OrderBreak::describe() const {
  std::ostringstream os;
  os << "order between configurations " << lower << " and " << upper << " broken by event #" << event_index
     << " (t=" << event.t << ", layer " << event.layer << ", " << to_string(event.dir) << ", x=" << event.x
     << ", y=" << event.y << ", u=" << event.u << "): [" << format_configuration(lower_after) << "] vs ["
     << format_configuration(upper_after) << "] are " << to_string(compare_configs(lower_after, upper_after));
  return os.str();
}

OrderViolation::OrderViolation(OrderBreak b) : std::logic_error(b.describe()), info_(std::move(b)) {}

CoupledRun coupled_evolve(const std::vector<Configuration>& configs, const EventStream& stream,
                          const ModelSpec& model, const Lattice& lattice, OrderCheck check) {
  for (const auto& c : configs) {
    if (c.size() != lattice.sites()) throw DomainError("coupled configurations must all live on the lattice");
    if (c.max_type() > model.n()) throw DomainError("configuration has a type above n");
  }
  CoupledRun run;
  run.trajectories.reserve(configs.size());
  for (const auto& c : configs) run.trajectories.push_back({c, c, stream.begin(), stream.end(), {}});

  struct Tracked {
    std::size_t lower;
    std::size_t upper;
    bool intact;
  };
  std::vector<Tracked> pairs;
  if (check != OrderCheck::Off) {
    for (std::size_t i = 0; i < configs.size(); ++i) {
      for (std::size_t j = 0; j < configs.size(); ++j) {
        if (i != j && config_leq(configs[i], configs[j])) pairs.push_back({i, j, true});
      }
    }
  }
  const bool assert_order = check == OrderCheck::Assert && check_ims_attractive(model).attractive;

  std::vector<char> changed(configs.size());
  stream.for_each([&](const Event& e, std::size_t index) {
    bool any = false;
    for (std::size_t i = 0; i < run.trajectories.size(); ++i) {
      auto& tr = run.trajectories[i];
      const auto before = static_cast<ParticleType>(tr.final[e.x]);
      changed[i] = apply_event_in_place(tr.final, e, model, lattice);
      if (changed[i]) {
        tr.transitions.push_back({index, e.t, e.x, before, static_cast<ParticleType>(tr.final[e.x])});
        any = true;
      }
    }
    if (!any) return;
    // Pairs were ordered before this event and only site x moved.
    for (auto& p : pairs) {
      if (!p.intact || !(changed[p.lower] || changed[p.upper])) continue;
      const auto& lo = run.trajectories[p.lower].final;
      const auto& hi = run.trajectories[p.upper].final;
      if (ordered_at(lo, hi, e.x)) continue;
      p.intact = false;
      OrderBreak b{p.lower, p.upper, index, e, lo, hi};
      if (assert_order) throw OrderViolation(std::move(b));
      run.breaks.push_back(std::move(b));
    }
  });
  return run;
}

std::vector<std::string> parameter_order_violations(const ModelSpec& lower_model, const ModelSpec& upper_model) {
  if (lower_model.n() != upper_model.n() || lower_model.layer_count() != upper_model.layer_count()) {
    throw PreconditionError("parameter coupling needs models with the same types and layer count");
  }
  std::vector<std::string> bad;
  const int n = lower_model.n();
  for (std::size_t i = 0; i < lower_model.layer_count(); ++i) {
    const auto& l1 = lower_model.layer(i);
    const auto& l2 = upper_model.layer(i);
    if (!(l1.map == l2.map)) {
      throw PreconditionError("parameter coupling needs identical maps; layer " + std::to_string(i) + " differs");
    }
    for (int a = 0; a <= n; ++a) {
      for (int b = 0; b <= n; ++b) {
        const int j = l1.map(a, b);
        const bool up_bad = j > a && l1.rates(a, b) > l2.rates(a, b);
        const bool down_bad = j < a && l1.rates(a, b) < l2.rates(a, b);
        if (up_bad || down_bad) {
          bad.push_back("(" + std::to_string(i) + ", " + std::to_string(a) + ", " + std::to_string(b) + ")");
        }
      }
    }
  }
  return bad;
}

ParamCoupledRun param_coupled_evolve(const Configuration& lower_init, const Configuration& upper_init,
                                     const ModelSpec& lower_model, const ModelSpec& upper_model,
                                     const Lattice& lattice, double horizon, std::uint64_t seed) {
  if (const auto bad = parameter_order_violations(lower_model, upper_model); !bad.empty()) {
    std::string msg = "parameters are not ordered (lower up-rates <= upper, lower down-rates >= upper) at";
    for (const auto& s : bad) msg += " " + s;
    throw PreconditionError(msg);
  }
  if (!config_leq(lower_init, upper_init)) throw PreconditionError("parameter coupling needs lower_init <= upper_init");
  if (!(horizon > 0.0)) throw DomainError("horizon must be positive");

  const double c = std::max(rate_bound(lower_model, lattice), rate_bound(upper_model, lattice));
  const EventStream stream(lower_model, lattice, 0.0, horizon, seed, c);
  ParamCoupledRun run{{lower_init, lower_init, 0.0, horizon, {}}, {upper_init, upper_init, 0.0, horizon, {}}, {}};
  stream.for_each([&](const Event& e, std::size_t index) {
    const auto b1 = static_cast<ParticleType>(run.lower.final[e.x]);
    const auto b2 = static_cast<ParticleType>(run.upper.final[e.x]);
    const bool c1 = apply_event_in_place(run.lower.final, e, lower_model, lattice);
    const bool c2 = apply_event_in_place(run.upper.final, e, upper_model, lattice);
    if (c1) run.lower.transitions.push_back({index, e.t, e.x, b1, static_cast<ParticleType>(run.lower.final[e.x])});
    if (c2) run.upper.transitions.push_back({index, e.t, e.x, b2, static_cast<ParticleType>(run.upper.final[e.x])});
    if ((c1 || c2) && !run.first_break && !ordered_at(run.lower.final, run.upper.final, e.x)) {
      run.first_break = OrderBreak{0, 1, index, e, run.lower.final, run.upper.final};
    }
  });
  return run;
}

double DensityRow::fraction(int a) const {
  std::size_t total = 0;
  for (auto c : counts) total += c;
  return total == 0 ? 0.0 : static_cast<double>(counts.at(static_cast<std::size_t>(a))) / static_cast<double>(total);
}

std::vector<DensityRow> density_series(const Trajectory& trajectory, const std::vector<double>& grid, int n) {
  std::vector<double> times = grid;
  for (double t : times) {
    if (!(t >= trajectory.t_begin && t <= trajectory.t_end)) {
      std::ostringstream os;
      os << "density time " << t << " outside [" << trajectory.t_begin << ", " << trajectory.t_end << "]";
      throw DomainError(os.str());
    }
  }
  if (!std::is_sorted(times.begin(), times.end())) throw DomainError("density grid must be nondecreasing");

  std::vector<DensityRow> rows;
  std::vector<std::size_t> counts(static_cast<std::size_t>(n + 1), 0);
  for (std::size_t x = 0; x < trajectory.initial.size(); ++x) ++counts.at(static_cast<std::size_t>(trajectory.initial[x]));
  std::size_t next = 0;
  const auto& trs = trajectory.transitions;
  for (double t : times) {
    while (next < trs.size() && trs[next].t < t) {
      --counts[trs[next].before];
      ++counts[trs[next].after];
      ++next;
    }
    rows.push_back({t, counts});
  }
  return rows;
}

}  // namespace ims
