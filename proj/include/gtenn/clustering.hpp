#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "gtenn/graph.hpp"
#include "gtenn/matrix.hpp"

namespace gtenn {

/// Community assignment of one snapshot; ids are contiguous from 0.
struct Partition {
  Labels labels;
  std::size_t t = 0;

  std::size_t community_count() const;
};

/// Relabels to contiguous ids, preserving the ascending order of the
/// original ids (smallest id becomes 0).
Labels compact_labels(const Labels& labels);

struct SomConfig {
  std::size_t grid_rows = 2;
  std::size_t grid_cols = 2;
  double alpha0 = 0.5;
  double sigma0 = 1.0;
  /// Neighborhood radius reached at the last iteration; fixes the decay
  /// time constant S = iterations / ln(sigma0 / sigma_end).
  double sigma_end = 0.5;
  std::size_t iterations = 100;
  std::uint64_t seed = 1;

  void validate() const;

  /// Decay time constant S; `iterations` when sigma0 <= sigma_end.
  double time_constant() const;

  /// About sqrt(n/2) units on a near-square grid (at least 2), 50 n
  /// iterations, alpha0 0.5, sigma0 half the grid diagonal, sigma_end 0.5.
  static SomConfig defaults_for(std::size_t n, std::uint64_t seed);

  /// Near-square rows x cols grid with at least `units` cells.
  static std::pair<std::size_t, std::size_t> grid_for(std::size_t units);
};

/// Online Kohonen map. Units start at randomly chosen data points; each
/// iteration draws a point, finds its best-matching unit (lowest index on
/// ties) and pulls every unit toward it by α(s)·exp(-grid_dist²/2σ(s)²), with
/// α(s) = α0·exp(-s/S) and σ(s) = σ0·exp(-s/S). Returns units x d.
Matrix som_fit(const Matrix& points, const SomConfig& config);

/// Index of the unit closest to a point; lowest index on ties.
std::size_t best_matching_unit(std::span<const double> point, const Matrix& units);

/// Labels each point by its best-matching unit, compacted in unit order.
Partition som_assign(const Matrix& points, const Matrix& units);

/// Lloyd iterations from k-means++ seeding until assignments stop changing or
/// max_iterations. An empty cluster is reseeded at the point farthest from
/// its current center.
Partition kmeans(const Matrix& points, std::size_t k, std::uint64_t seed,
                 std::size_t max_iterations = 300,
                 std::vector<double>* objective_trace = nullptr);

/// Within-cluster sum of squared distances to cluster means.
double within_cluster_ss(const Matrix& points, const Labels& labels);

}  // namespace gtenn
