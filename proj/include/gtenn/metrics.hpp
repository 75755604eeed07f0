#pragma once

#include <cstddef>
#include <ostream>
#include <vector>

#include "gtenn/graph.hpp"

namespace gtenn {

/// counts[k][j] = nodes predicted in community k and truly in class j.
/// Labels may be arbitrary non-negative ids; empty rows/columns are dropped.
class ContingencyTable {
 public:
  ContingencyTable(const Labels& predicted, const Labels& truth);

  std::size_t total() const { return total_; }
  const std::vector<std::vector<std::size_t>>& counts() const { return counts_; }
  const std::vector<std::size_t>& predicted_sizes() const { return row_sums_; }
  const std::vector<std::size_t>& truth_sizes() const { return col_sums_; }

  /// Natural-log entropies of the two marginals, the joint, and the mutual
  /// information.
  double predicted_entropy() const;
  double truth_entropy() const;
  double joint_entropy() const;
  double mutual_information() const;

 private:
  std::size_t total_ = 0;
  std::vector<std::vector<std::size_t>> counts_;
  std::vector<std::size_t> row_sums_;
  std::vector<std::size_t> col_sums_;
};

/// (1/N) Σ_k max_j |C_k ∩ T_j|.
double purity(const Labels& predicted, const Labels& truth);
/// 2 I(C,T) / (H(C) + H(T)); 1 when both partitions are a single cluster.
double nmi(const Labels& predicted, const Labels& truth);
/// 1 − H(T|C)/H(T); 1 when H(T) = 0.
double homogeneity(const Labels& predicted, const Labels& truth);
/// 1 − H(C|T)/H(C); 1 when H(C) = 0.
double completeness(const Labels& predicted, const Labels& truth);

struct MetricValues {
  double purity = 0.0;
  double nmi = 0.0;
  double homogeneity = 0.0;
  double completeness = 0.0;
};

MetricValues evaluate(const Labels& predicted, const Labels& truth);

struct SequenceReport {
  std::vector<MetricValues> per_snapshot;  // index t-1
  MetricValues mean;
};

/// Metrics for each snapshot and their arithmetic means over the sequence.
SequenceReport evaluate_sequence(const std::vector<Labels>& predicted, const std::vector<Labels>& truth);

/// CSV with header t,purity,nmi,homogeneity,completeness, one row per
/// snapshot and a final row with t = "mean".
void write_metrics_csv(std::ostream& out, const SequenceReport& report);

}  // namespace gtenn
