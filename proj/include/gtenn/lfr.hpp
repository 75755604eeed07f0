#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "gtenn/graph.hpp"
#include "gtenn/random.hpp"

namespace gtenn {

/// Generation failed for the requested parameters (wiring stalled, or the
/// degree / community constraints cannot be met).
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameters of a dynamic LFR benchmark. Defaults are the LFR1..LFR8
/// benchmark setup with mu left at 0.1.
struct LfrConfig {
  std::size_t nodes = 1000;
  std::size_t snapshots = 9;
  double mu = 0.1;
  double avg_degree = 15.0;
  std::size_t max_degree = 30;
  std::size_t min_community = 10;
  std::size_t max_community = 50;
  double gamma = 2.5;
  double beta = 1.5;
  double churn_fraction = 0.1;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  /// LFR<index> for index in 1..8: mu = index / 10, everything else default.
  static LfrConfig preset(int index);
};

struct LfrSnapshot {
  EdgeSet edges;
  Labels labels;
};

/// `count` i.i.d. draws with P(k) ∝ k^-exponent on the integers [lo, hi].
std::vector<std::size_t> sample_powerlaw(std::size_t count, double exponent, std::size_t lo,
                                         std::size_t hi, Rng& rng);
std::vector<std::size_t> sample_powerlaw(std::size_t count, double exponent, std::size_t lo,
                                         std::size_t hi, std::uint64_t seed);

/// Mean of the truncated discrete power law on [lo, hi].
double powerlaw_mean(double exponent, std::size_t lo, std::size_t hi);

/// Power-law degree sequence on [k_min, max_degree], with k_min chosen so the
/// truncated mean is closest to avg_degree. The last entry is resampled until
/// the total is even.
std::vector<std::size_t> degree_sequence(const LfrConfig& config, Rng& rng);

/// Smallest integer lower degree bound whose truncated mean is closest to the target.
std::size_t minimum_degree_for(const LfrConfig& config);

/// Community sizes drawn from the beta power law on [min_community,
/// max_community], redrawn until they sum to exactly `nodes`.
std::vector<std::size_t> community_sizes(const LfrConfig& config, Rng& rng);

LfrSnapshot generate_static_lfr(const LfrConfig& config);
LfrSnapshot generate_static_lfr(const LfrConfig& config, Rng& rng);

/// Moves round(churn_fraction * N) random nodes to a different community and
/// rewires their edges to restore the configured intra/inter split. Degrees
/// are preserved; edges among unmoved nodes are kept except where a swap is
/// needed to place a moved node's stubs.
LfrSnapshot evolve_snapshot(const LfrSnapshot& previous, const LfrConfig& config, Rng& rng);

/// Snapshot 1 from generate_static_lfr, then snapshots-1 evolution steps.
DynamicNetwork generate_dynamic_lfr(const LfrConfig& config);

}  // namespace gtenn
