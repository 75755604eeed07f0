#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gtenn/matrix.hpp"

namespace gtenn {

using NodeId = std::uint32_t;
/// Undirected edge stored with first < second.
using Edge = std::pair<NodeId, NodeId>;
/// Community label per node, indexed by node id.
using Labels = std::vector<int>;

/// Malformed input file. `line` is 1-based, 0 when not tied to a line.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& message, std::size_t line);
  std::size_t line() const { return line_; }
  const std::string& message() const { return message_; }
  /// Same error with the file name prepended.
  FormatError in_file(const std::string& file) const;

 private:
  std::string message_;
  std::size_t line_;
};

/// Sorted, duplicate-free list of undirected edges of one snapshot.
class EdgeSet {
 public:
  EdgeSet() = default;
  /// Normalizes orientation and sorts. Throws on self-loops, duplicates, or
  /// ids outside [0, node_count).
  EdgeSet(std::vector<Edge> edges, std::size_t node_count);

  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t size() const { return edges_.size(); }
  bool empty() const { return edges_.empty(); }
  bool contains(NodeId a, NodeId b) const;

  friend bool operator==(const EdgeSet&, const EdgeSet&) = default;

 private:
  std::vector<Edge> edges_;
};

/// Fixed node set observed through an ordered sequence of snapshots, with
/// optional per-snapshot ground-truth communities. Time indices are 1-based.
class DynamicNetwork {
 public:
  DynamicNetwork(std::size_t node_count, std::vector<EdgeSet> snapshots,
                 std::optional<std::vector<Labels>> ground_truth = std::nullopt);

  std::size_t node_count() const { return node_count_; }
  std::size_t snapshot_count() const { return snapshots_.size(); }
  const EdgeSet& snapshot(std::size_t t) const;
  const std::vector<EdgeSet>& snapshots() const { return snapshots_; }

  bool has_ground_truth() const { return ground_truth_.has_value(); }
  const Labels& ground_truth(std::size_t t) const;
  const std::optional<std::vector<Labels>>& ground_truth_sequence() const { return ground_truth_; }
  void set_ground_truth(std::vector<Labels> truth);

  /// Sorted neighbor lists of snapshot t.
  std::vector<std::vector<NodeId>> neighbors(std::size_t t) const;

  friend bool operator==(const DynamicNetwork&, const DynamicNetwork&) = default;

 private:
  void check_time(std::size_t t) const;
  void validate_truth(const std::vector<Labels>& truth) const;

  std::size_t node_count_;
  std::vector<EdgeSet> snapshots_;
  std::optional<std::vector<Labels>> ground_truth_;
};

/// Binary symmetric adjacency of snapshot t (1-based), zero diagonal.
Matrix build_adjacency(const DynamicNetwork& network, std::size_t t);

/// D^{-1/2}(A + I)D^{-1/2} with D the row sums of A + I.
Matrix normalize_adjacency(const Matrix& adjacency);

/// Row sums of A (self-loops excluded).
std::vector<double> degree_vector(const Matrix& adjacency);

/// Fraction of edges whose endpoints carry different labels. 0 for no edges.
double mixing_fraction(const EdgeSet& edges, const Labels& labels);

// Text formats.
//
// Snapshot file:   "n <N> t <T>" then "snapshot <t>" blocks of "src dst" lines.
// Partition file:  "snapshot <t>" blocks of "node label" lines.
// Blank lines and lines starting with '#' are ignored.

DynamicNetwork read_network(std::istream& in);
void write_network(std::ostream& out, const DynamicNetwork& network);

/// Reads per-snapshot labels. When `node_count` is given every block must
/// label exactly that many nodes.
std::vector<Labels> read_partitions(std::istream& in,
                                    std::optional<std::size_t> node_count = std::nullopt);
void write_partitions(std::ostream& out, const std::vector<Labels>& partitions);

DynamicNetwork load_network(const std::filesystem::path& network_file,
                            const std::optional<std::filesystem::path>& truth_file = std::nullopt);
std::vector<Labels> load_partitions(const std::filesystem::path& file,
                                    std::optional<std::size_t> node_count = std::nullopt);

}  // namespace gtenn
