#include "ims/cftp.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>

#include "ims/simulator.hpp"

namespace ims {

NoCoalescence::NoCoalescence(Configuration lower, Configuration upper, int epochs)
    : std::runtime_error("no coalescence after " + std::to_string(epochs) + " epochs: bottom chain at [" +
                         format_configuration(lower) + "], top chain at [" + format_configuration(upper) + "]"),
      lower_(std::move(lower)),
      upper_(std::move(upper)),
      epochs_(epochs) {}

double default_base_window(const ModelSpec& model, const Lattice& lattice) {
  const double c = rate_bound(model, lattice);
  if (!(c > 0.0)) throw DomainError("model has no positive rate");
  return static_cast<double>(lattice.sites()) / c;
}

CftpResult cftp_sample_traced(const ModelSpec& model, const Lattice& lattice, std::uint64_t seed,
                              const CftpOptions& options, const CftpEpochHook& hook) {
  if (options.max_epochs < 1) throw DomainError("max_epochs must be >= 1");
  if (const auto v = check_ims_attractive(model); !v.attractive) {
    throw PreconditionError("coupling from the past needs an attractive model:\n" + v.to_string());
  }
  const double c = rate_bound(model, lattice);
  const double t0 = options.base_window > 0.0 ? options.base_window : default_base_window(model, lattice);
  auto [bottom, top] = extremal(model, lattice);

  std::size_t consumed = 0;
  Configuration lower;
  Configuration upper;
  for (int epoch = 0; epoch < options.max_epochs; ++epoch) {
    const double start = -std::ldexp(t0, epoch);
    const EventStream stream(model, lattice, start, 0.0, seed, c);
    lower = bottom;
    upper = top;
    stream.for_each([&](const Event& e, std::size_t) {
      ++consumed;
      const bool lo = apply_event_in_place(lower, e, model, lattice);
      const bool hi = apply_event_in_place(upper, e, model, lattice);
      if ((lo || hi) && lower[e.x] > upper[e.x]) {
        throw std::logic_error("monotone sandwich broken at t=" + std::to_string(e.t) + " site " +
                               std::to_string(e.x));
      }
    });
    if (hook) hook(epoch, start, lower, upper);
    if (lower == upper) return {std::move(lower), epoch, consumed};
  }
  throw NoCoalescence(std::move(lower), std::move(upper), options.max_epochs);
}

CftpResult cftp_sample(const ModelSpec& model, const Lattice& lattice, std::uint64_t seed, const CftpOptions& options) {
  return cftp_sample_traced(model, lattice, seed, options, {});
}

namespace {

std::string failure_message(const std::vector<CftpBatchError::Failure>& failures) {
  std::string msg = std::to_string(failures.size()) + " CFTP sample(s) failed";
  for (std::size_t i = 0; i < std::min<std::size_t>(failures.size(), 3); ++i) {
    msg += "; #" + std::to_string(failures[i].index) + ": " + failures[i].message;
  }
  return msg;
}

}  // namespace

CftpBatchError::CftpBatchError(std::vector<Failure> failures)
    : std::runtime_error(failure_message(failures)), failures_(std::move(failures)) {}

CftpBatch cftp_batch(const ModelSpec& model, const Lattice& lattice, std::uint64_t base_seed, std::size_t count,
                     const CftpOptions& options, unsigned threads) {
  CftpBatch batch;
  if (count == 0) return batch;
  if (const auto v = check_ims_attractive(model); !v.attractive) {
    throw PreconditionError("coupling from the past needs an attractive model:\n" + v.to_string());
  }
  std::vector<std::optional<CftpResult>> results(count);
  std::vector<CftpBatchError::Failure> failures;
  std::mutex failures_mutex;

  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < count; i += stride) {
      try {
        results[i] = cftp_sample(model, lattice, base_seed + i, options);
      } catch (const std::exception& e) {
        std::lock_guard lock(failures_mutex);
        failures.push_back({i, e.what()});
      }
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
    for (auto& t : pool) t.join();
  }
  if (!failures.empty()) {
    std::sort(failures.begin(), failures.end(), [](const auto& l, const auto& r) { return l.index < r.index; });
    throw CftpBatchError(std::move(failures));
  }

  double states = 1.0;
  for (std::size_t x = 0; x < lattice.sites(); ++x) states *= model.n() + 1;
  batch.by_counts = states > static_cast<double>(kHistogramConfigLimit);
  batch.samples.reserve(count);
  for (auto& r : results) {
    const auto& s = r->sample;
    std::string key;
    if (batch.by_counts) {
      std::vector<std::size_t> counts(static_cast<std::size_t>(model.n() + 1), 0);
      for (std::size_t x = 0; x < s.size(); ++x) ++counts[static_cast<std::size_t>(s[x])];
      for (std::size_t a = 0; a < counts.size(); ++a) key += (a ? " " : "") + std::to_string(counts[a]);
    } else {
      key = format_configuration(s);
    }
    ++batch.histogram[key];
    batch.samples.push_back(std::move(*r));
  }
  return batch;
}

}  // namespace ims
