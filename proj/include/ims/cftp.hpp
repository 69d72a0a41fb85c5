#pragma once

// Exact stationary samples for attractive systems by monotone coupling from
// the past between the bottom and top configurations.

#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "ims/core.hpp"
#include "ims/lattice.hpp"

namespace ims {

struct CftpOptions {
  double base_window = 0.0;  // T0; 0 picks sites / c
  int max_epochs = 24;
};

struct CftpResult {
  Configuration sample;
  int epochs_used = 0;  // coalesced from time -2^epochs_used * T0
  std::size_t events_consumed = 0;

  friend bool operator==(const CftpResult&, const CftpResult&) = default;
};

class NoCoalescence : public std::runtime_error {
 public:
  NoCoalescence(Configuration lower, Configuration upper, int epochs);
  const Configuration& lower() const noexcept { return lower_; }
  const Configuration& upper() const noexcept { return upper_; }
  int epochs() const noexcept { return epochs_; }

 private:
  Configuration lower_;
  Configuration upper_;
  int epochs_;
};

/// T0 used when options.base_window is 0.
double default_base_window(const ModelSpec& model, const Lattice& lattice);

/// Throws PreconditionError for non-attractive models and NoCoalescence when
/// the extremal chains still differ after max_epochs doublings.
CftpResult cftp_sample(const ModelSpec& model, const Lattice& lattice, std::uint64_t seed,
                       const CftpOptions& options = {});

/// Per-epoch hook for tests: called with (epoch, window start, lower, upper)
/// at time 0 of every epoch.
using CftpEpochHook =
    std::function<void(int epoch, double start, const Configuration& lower, const Configuration& upper)>;

CftpResult cftp_sample_traced(const ModelSpec& model, const Lattice& lattice, std::uint64_t seed,
                              const CftpOptions& options, const CftpEpochHook& hook);

struct CftpBatch {
  std::vector<CftpResult> samples;
  /// Keyed by configuration line, or by type counts "c0 c1 ... cn" when the
  /// state space is too large to tabulate.
  std::map<std::string, std::size_t> histogram;
  bool by_counts = false;
};

class CftpBatchError : public std::runtime_error {
 public:
  struct Failure {
    std::size_t index;
    std::string message;
  };
  explicit CftpBatchError(std::vector<Failure> failures);
  const std::vector<Failure>& failures() const noexcept { return failures_; }

 private:
  std::vector<Failure> failures_;
};

inline constexpr std::size_t kHistogramConfigLimit = 4096;

/// Samples i = 0..count-1 with seeds base_seed + i, on up to `threads` workers.
CftpBatch cftp_batch(const ModelSpec& model, const Lattice& lattice, std::uint64_t base_seed, std::size_t count,
                     const CftpOptions& options = {}, unsigned threads = 1);

}  // namespace ims
