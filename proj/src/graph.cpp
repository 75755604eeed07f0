#include "gtenn/graph.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace gtenn {

FormatError::FormatError(const std::string& message, std::size_t line)
    : std::runtime_error(line ? fmt::format("line {}: {}", line, message) : message),
      message_(message),
      line_(line) {}

FormatError FormatError::in_file(const std::string& file) const {
  return FormatError(fmt::format("{}: {}", file, message_), line_);
}

EdgeSet::EdgeSet(std::vector<Edge> edges, std::size_t node_count) : edges_(std::move(edges)) {
  for (Edge& e : edges_) {
    if (e.first >= node_count || e.second >= node_count) {
      throw std::invalid_argument(fmt::format("edge ({}, {}) references a node outside [0, {})",
                                              e.first, e.second, node_count));
    }
    if (e.first == e.second) {
      throw std::invalid_argument(fmt::format("self-loop on node {} is not allowed", e.first));
    }
    if (e.first > e.second) std::swap(e.first, e.second);
  }
  std::sort(edges_.begin(), edges_.end());
  if (auto dup = std::adjacent_find(edges_.begin(), edges_.end()); dup != edges_.end()) {
    throw std::invalid_argument(
        fmt::format("edge ({}, {}) appears more than once", dup->first, dup->second));
  }
}

bool EdgeSet::contains(NodeId a, NodeId b) const {
  if (a > b) std::swap(a, b);
  return std::binary_search(edges_.begin(), edges_.end(), Edge{a, b});
}

DynamicNetwork::DynamicNetwork(std::size_t node_count, std::vector<EdgeSet> snapshots,
                               std::optional<std::vector<Labels>> ground_truth)
    : node_count_(node_count), snapshots_(std::move(snapshots)) {
  for (const EdgeSet& s : snapshots_) {
    for (const Edge& e : s.edges()) {
      if (e.second >= node_count_) {
        throw std::invalid_argument(
            fmt::format("edge ({}, {}) references a node outside [0, {})", e.first, e.second,
                        node_count_));
      }
    }
  }
  if (ground_truth) set_ground_truth(std::move(*ground_truth));
}

void DynamicNetwork::check_time(std::size_t t) const {
  if (t < 1 || t > snapshots_.size()) {
    throw std::out_of_range(
        fmt::format("snapshot index {} outside [1, {}]", t, snapshots_.size()));
  }
}

const EdgeSet& DynamicNetwork::snapshot(std::size_t t) const {
  check_time(t);
  return snapshots_[t - 1];
}

const Labels& DynamicNetwork::ground_truth(std::size_t t) const {
  check_time(t);
  if (!ground_truth_) throw std::logic_error("network has no ground truth");
  return (*ground_truth_)[t - 1];
}

void DynamicNetwork::validate_truth(const std::vector<Labels>& truth) const {
  if (truth.size() != snapshots_.size()) {
    throw std::invalid_argument(fmt::format("ground truth has {} snapshots, network has {}",
                                            truth.size(), snapshots_.size()));
  }
  for (std::size_t t = 0; t < truth.size(); ++t) {
    if (truth[t].size() != node_count_) {
      throw std::invalid_argument(fmt::format("ground truth of snapshot {} labels {} nodes, expected {}",
                                              t + 1, truth[t].size(), node_count_));
    }
  }
}

void DynamicNetwork::set_ground_truth(std::vector<Labels> truth) {
  validate_truth(truth);
  ground_truth_ = std::move(truth);
}

std::vector<std::vector<NodeId>> DynamicNetwork::neighbors(std::size_t t) const {
  std::vector<std::vector<NodeId>> adj(node_count_);
  for (const Edge& e : snapshot(t).edges()) {
    adj[e.first].push_back(e.second);
    adj[e.second].push_back(e.first);
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());
  return adj;
}

Matrix build_adjacency(const DynamicNetwork& network, std::size_t t) {
  const std::size_t n = network.node_count();
  Matrix a(n, n);
  for (const Edge& e : network.snapshot(t).edges()) {
    a(e.first, e.second) = 1.0;
    a(e.second, e.first) = 1.0;
  }
  return a;
}

Matrix normalize_adjacency(const Matrix& adjacency) {
  if (adjacency.rows() != adjacency.cols()) {
    throw ShapeError(fmt::format("normalize_adjacency: matrix {} is not square",
                                 adjacency.shape_string()));
  }
  const std::size_t n = adjacency.rows();
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) {
    double d = 1.0;
    for (double v : adjacency.row(i)) d += v;
    inv_sqrt[i] = 1.0 / std::sqrt(d);
  }
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double a = adjacency(i, j) + (i == j ? 1.0 : 0.0);
      if (a != 0.0) out(i, j) = inv_sqrt[i] * a * inv_sqrt[j];
    }
  }
  return out;
}

std::vector<double> degree_vector(const Matrix& adjacency) {
  std::vector<double> d(adjacency.rows(), 0.0);
  for (std::size_t i = 0; i < adjacency.rows(); ++i) {
    for (double v : adjacency.row(i)) d[i] += v;
  }
  return d;
}

double mixing_fraction(const EdgeSet& edges, const Labels& labels) {
  if (edges.empty()) return 0.0;
  std::size_t inter = 0;
  for (const Edge& e : edges.edges()) {
    if (labels.at(e.first) != labels.at(e.second)) ++inter;
  }
  return static_cast<double>(inter) / static_cast<double>(edges.size());
}

}  // namespace gtenn
