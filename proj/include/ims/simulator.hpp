#pragma once

// Graphical representation: per-channel Poisson arrows with uniform marks,
// thinned against current rates. All initial states evolved against the same
// stream are coupled.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ims/core.hpp"
#include "ims/lattice.hpp"

namespace ims {

enum class Direction : std::uint8_t { Up = 0, Down = 1 };

std::string_view to_string(Direction d);

/// One arrow y -> x at time t on the (layer, dir) channel, carrying mark u in (0, c).
struct Event {
  double t = 0.0;
  std::uint32_t x = 0;
  std::uint32_t y = 0;
  std::uint32_t layer = 0;
  Direction dir = Direction::Up;
  double u = 0.0;

  friend bool operator==(const Event&, const Event&) = default;
};

/// Tie-break order (t, layer, x, y, dir).
bool event_before(const Event& l, const Event& r) noexcept;

struct Channel {
  std::uint32_t layer;
  std::uint32_t x;
  std::uint32_t y;
  Direction dir;
};

/// Poisson arrows on (t_begin, t_end].
///
/// Time is cut into blocks [k/c, (k+1)/c). Arrows of one channel inside one
/// block come from a Philox substream keyed by (seed, x, y, k, layer, dir), so
/// the arrows in any interval do not depend on the window that asked for
/// them. Events are produced block by block and never stored unless
/// `events()` is called.
class EventStream {
 public:
  EventStream(const ModelSpec& model, const Lattice& lattice, double t_begin, double t_end, std::uint64_t seed,
              double bound = 0.0);

  double bound() const noexcept { return bound_; }
  double begin() const noexcept { return t_begin_; }
  double end() const noexcept { return t_end_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const std::vector<Channel>& channels() const noexcept { return channels_; }
  std::size_t layer_count() const noexcept { return layers_; }

  /// Visits events in time order. `f(const Event&, std::size_t index)`.
  template <class F>
  void for_each(F&& f) const {
    std::vector<Event> buffer;
    std::size_t index = 0;
    for (std::int64_t k = first_block_; k <= last_block_; ++k) {
      fill_block(k, buffer);
      for (const auto& e : buffer) f(e, index++);
    }
  }

  std::vector<Event> events() const;

  /// Expected number of events, c * (t_end - t_begin) * channels.
  double expected_count() const noexcept;

 private:
  void fill_block(std::int64_t k, std::vector<Event>& out) const;

  double bound_;
  double t_begin_;
  double t_end_;
  std::uint64_t seed_;
  std::uint64_t key_;
  std::size_t layers_;
  std::vector<Channel> channels_;
  std::int64_t first_block_;
  std::int64_t last_block_;
};

/// Stream over (0, horizon].
EventStream build_event_stream(const ModelSpec& model, const Lattice& lattice, double horizon, std::uint64_t seed);

/// Thinning rule: x takes J_layer(eta(x), eta(y)) when the direction matches
/// and u <= the corresponding pair rate. Returns whether x changed.
bool apply_event_in_place(Configuration& eta, const Event& e, const ModelSpec& model, const Lattice& lattice);

Configuration apply_event(const Configuration& eta, const Event& e, const ModelSpec& model, const Lattice& lattice);

struct Transition {
  std::size_t event_index;
  double t;
  std::uint32_t site;
  ParticleType before;
  ParticleType after;

  friend bool operator==(const Transition&, const Transition&) = default;
};

struct Trajectory {
  Configuration initial;
  Configuration final;
  double t_begin = 0.0;
  double t_end = 0.0;
  std::vector<Transition> transitions;

  /// State just before time t (transitions with time < t applied).
  Configuration at(double t) const;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

Trajectory evolve(const Configuration& initial, const EventStream& stream, const ModelSpec& model,
                  const Lattice& lattice);

/// What to do when an initially ordered pair loses its order.
enum class OrderCheck {
  Off,     // no tracking
  Record,  // note the first break of every ordered pair
  Assert   // throw OrderViolation if the model is attractive
};

struct OrderBreak {
  std::size_t lower;  // index into the configuration list
  std::size_t upper;
  std::size_t event_index;
  Event event;
  Configuration lower_after;
  Configuration upper_after;

  std::string describe() const;
};

class OrderViolation : public std::logic_error {
 public:
  explicit OrderViolation(OrderBreak b);
  const OrderBreak& info() const noexcept { return info_; }

 private:
  OrderBreak info_;
};

struct CoupledRun {
  std::vector<Trajectory> trajectories;
  std::vector<OrderBreak> breaks;
};

/// Evolves every configuration against the same events.
CoupledRun coupled_evolve(const std::vector<Configuration>& configs, const EventStream& stream,
                          const ModelSpec& model, const Lattice& lattice, OrderCheck check = OrderCheck::Record);

struct ParamCoupledRun {
  Trajectory lower;
  Trajectory upper;
  std::optional<OrderBreak> first_break;
};

/// Layers whose rates break lambda1 <= lambda2 on up pairs or lambda1 >= lambda2
/// on down pairs, formatted "(layer, a, b)". Empty when ordered.
std::vector<std::string> parameter_order_violations(const ModelSpec& lower_model, const ModelSpec& upper_model);

/// One stream with the larger bound; each process thins against its own rates.
ParamCoupledRun param_coupled_evolve(const Configuration& lower_init, const Configuration& upper_init,
                                     const ModelSpec& lower_model, const ModelSpec& upper_model,
                                     const Lattice& lattice, double horizon, std::uint64_t seed);

struct DensityRow {
  double t;
  std::vector<std::size_t> counts;  // counts[a] = sites holding type a

  double fraction(int a) const;
};

std::vector<DensityRow> density_series(const Trajectory& trajectory, const std::vector<double>& grid, int n);

}  // namespace ims
