#include "gtenn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <fmt/format.h>

namespace gtenn {

namespace {

/// Dense ids in ascending order of the original labels.
std::vector<std::size_t> densify(const Labels& labels, std::size_t& count) {
  std::map<int, std::size_t> ids;
  for (int l : labels) {
    if (l < 0) throw std::invalid_argument(fmt::format("metrics: negative community id {}", l));
    ids.emplace(l, 0);
  }
  count = 0;
  for (auto& [label, id] : ids) id = count++;
  std::vector<std::size_t> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = ids.at(labels[i]);
  return out;
}

double entropy(const std::vector<std::size_t>& sizes, double total) {
  double h = 0.0;
  for (std::size_t s : sizes) {
    if (s == 0) continue;
    const double p = static_cast<double>(s) / total;
    h -= p * std::log(p);
  }
  return h;
}

}  // namespace

ContingencyTable::ContingencyTable(const Labels& predicted, const Labels& truth) {
  if (predicted.size() != truth.size()) {
    throw std::invalid_argument(fmt::format(
        "metrics: node-set mismatch, prediction covers {} nodes but truth covers {}",
        predicted.size(), truth.size()));
  }
  if (predicted.empty()) throw std::invalid_argument("metrics: partitions are empty");
  std::size_t rows = 0;
  std::size_t cols = 0;
  const auto p = densify(predicted, rows);
  const auto t = densify(truth, cols);
  total_ = predicted.size();
  counts_.assign(rows, std::vector<std::size_t>(cols, 0));
  row_sums_.assign(rows, 0);
  col_sums_.assign(cols, 0);
  for (std::size_t i = 0; i < total_; ++i) {
    ++counts_[p[i]][t[i]];
    ++row_sums_[p[i]];
    ++col_sums_[t[i]];
  }
}

double ContingencyTable::predicted_entropy() const {
  return entropy(row_sums_, static_cast<double>(total_));
}

double ContingencyTable::truth_entropy() const {
  return entropy(col_sums_, static_cast<double>(total_));
}

double ContingencyTable::joint_entropy() const {
  double h = 0.0;
  for (const auto& row : counts_) h += entropy(row, static_cast<double>(total_));
  return h;
}

double ContingencyTable::mutual_information() const {
  const double n = static_cast<double>(total_);
  double mi = 0.0;
  for (std::size_t k = 0; k < counts_.size(); ++k) {
    for (std::size_t j = 0; j < counts_[k].size(); ++j) {
      const std::size_t c = counts_[k][j];
      if (c == 0) continue;
      const double pkj = static_cast<double>(c) / n;
      mi += pkj * std::log(static_cast<double>(c) * n /
                           (static_cast<double>(row_sums_[k]) * static_cast<double>(col_sums_[j])));
    }
  }
  return std::max(mi, 0.0);
}

double purity(const Labels& predicted, const Labels& truth) {
  const ContingencyTable table(predicted, truth);
  std::size_t hits = 0;
  for (const auto& row : table.counts()) hits += *std::max_element(row.begin(), row.end());
  return static_cast<double>(hits) / static_cast<double>(table.total());
}

double nmi(const Labels& predicted, const Labels& truth) {
  const ContingencyTable table(predicted, truth);
  const double denom = table.predicted_entropy() + table.truth_entropy();
  if (denom == 0.0) return 1.0;
  return std::clamp(2.0 * table.mutual_information() / denom, 0.0, 1.0);
}

double homogeneity(const Labels& predicted, const Labels& truth) {
  const ContingencyTable table(predicted, truth);
  const double ht = table.truth_entropy();
  if (ht == 0.0) return 1.0;
  const double n = static_cast<double>(table.total());
  double conditional = 0.0;  // H(T|C)
  for (std::size_t k = 0; k < table.counts().size(); ++k) {
    const double row = static_cast<double>(table.predicted_sizes()[k]);
    for (std::size_t c : table.counts()[k]) {
      if (c == 0) continue;
      conditional -= static_cast<double>(c) / n * std::log(static_cast<double>(c) / row);
    }
  }
  return std::clamp(1.0 - conditional / ht, 0.0, 1.0);
}

double completeness(const Labels& predicted, const Labels& truth) {
  return homogeneity(truth, predicted);
}

MetricValues evaluate(const Labels& predicted, const Labels& truth) {
  return {purity(predicted, truth), nmi(predicted, truth), homogeneity(predicted, truth),
          completeness(predicted, truth)};
}

SequenceReport evaluate_sequence(const std::vector<Labels>& predicted, const std::vector<Labels>& truth) {
  if (predicted.size() != truth.size()) {
    throw std::invalid_argument(fmt::format(
        "metrics: {} predicted snapshots but {} ground-truth snapshots", predicted.size(), truth.size()));
  }
  if (predicted.empty()) throw std::invalid_argument("metrics: no snapshots to evaluate");
  SequenceReport report;
  for (std::size_t t = 0; t < predicted.size(); ++t) {
    try {
      report.per_snapshot.push_back(evaluate(predicted[t], truth[t]));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(fmt::format("snapshot {}: {}", t + 1, e.what()));
    }
  }
  const double count = static_cast<double>(predicted.size());
  for (const MetricValues& m : report.per_snapshot) {
    report.mean.purity += m.purity / count;
    report.mean.nmi += m.nmi / count;
    report.mean.homogeneity += m.homogeneity / count;
    report.mean.completeness += m.completeness / count;
  }
  return report;
}

void write_metrics_csv(std::ostream& out, const SequenceReport& report) {
  out << "t,purity,nmi,homogeneity,completeness\n";
  auto row = [&out](const std::string& t, const MetricValues& m) {
    out << fmt::format("{},{:.12f},{:.12f},{:.12f},{:.12f}\n", t, m.purity, m.nmi, m.homogeneity,
                       m.completeness);
  };
  for (std::size_t t = 0; t < report.per_snapshot.size(); ++t) {
    row(std::to_string(t + 1), report.per_snapshot[t]);
  }
  row("mean", report.mean);
}

}  // namespace gtenn
