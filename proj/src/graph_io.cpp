#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>
#include <unordered_set>

#include <fmt/format.h>

#include "gtenn/graph.hpp"

namespace gtenn {

namespace {

struct Line {
  std::size_t number = 0;
  std::vector<std::string_view> tokens;
};

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  /// Next non-blank, non-comment line. Returns false at end of input.
  bool next(Line& line) {
    while (std::getline(in_, buffer_)) {
      ++number_;
      line.number = number_;
      line.tokens.clear();
      std::string_view rest(buffer_);
      while (!rest.empty()) {
        const auto start = rest.find_first_not_of(" \t\r");
        if (start == std::string_view::npos) break;
        rest.remove_prefix(start);
        const auto end = rest.find_first_of(" \t\r");
        line.tokens.push_back(rest.substr(0, end));
        rest.remove_prefix(end == std::string_view::npos ? rest.size() : end);
      }
      if (line.tokens.empty() || line.tokens.front().starts_with('#')) continue;
      return true;
    }
    return false;
  }

 private:
  std::istream& in_;
  std::string buffer_;
  std::size_t number_ = 0;
};

template <typename T>
T parse_number(std::string_view token, std::size_t line, const char* what) {
  T value{};
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw FormatError(fmt::format("expected {} but found '{}'", what, token), line);
  }
  return value;
}

std::size_t expect_snapshot_header(const Line& line, std::size_t expected) {
  if (line.tokens.size() != 2 || line.tokens[0] != "snapshot") {
    throw FormatError("expected 'snapshot <t>'", line.number);
  }
  const auto t = parse_number<std::size_t>(line.tokens[1], line.number, "snapshot index");
  if (t != expected) {
    throw FormatError(fmt::format("snapshot {} out of order (expected {})", t, expected), line.number);
  }
  return t;
}

}  // namespace

DynamicNetwork read_network(std::istream& in) {
  LineReader reader(in);
  Line line;
  if (!reader.next(line)) throw FormatError("empty network file", 0);
  if (line.tokens.size() != 4 || line.tokens[0] != "n" || line.tokens[2] != "t") {
    throw FormatError("header must be 'n <node_count> t <snapshot_count>'", line.number);
  }
  const auto n = parse_number<std::size_t>(line.tokens[1], line.number, "node count");
  const auto count = parse_number<std::size_t>(line.tokens[3], line.number, "snapshot count");

  std::vector<EdgeSet> snapshots;
  std::vector<Edge> current;
  std::vector<std::size_t> current_lines;
  std::unordered_set<std::uint64_t> seen;
  bool open = false;

  auto close_block = [&]() {
    if (!open) return;
    try {
      snapshots.emplace_back(std::move(current), n);
    } catch (const std::invalid_argument& e) {
      throw FormatError(fmt::format("snapshot {}: {}", snapshots.size() + 1, e.what()),
                        current_lines.empty() ? 0 : current_lines.front());
    }
    current.clear();
    current_lines.clear();
    seen.clear();
  };

  while (reader.next(line)) {
    if (line.tokens[0] == "snapshot") {
      close_block();
      expect_snapshot_header(line, snapshots.size() + 1);
      if (snapshots.size() + 1 > count) {
        throw FormatError(fmt::format("more snapshots than the declared {}", count), line.number);
      }
      open = true;
      continue;
    }
    if (!open) throw FormatError("edge listed before any 'snapshot <t>' line", line.number);
    if (line.tokens.size() != 2) {
      throw FormatError("edge lines must be 'src dst' (weighted input is not supported)", line.number);
    }
    const auto a = parse_number<NodeId>(line.tokens[0], line.number, "node id");
    const auto b = parse_number<NodeId>(line.tokens[1], line.number, "node id");
    if (a >= n || b >= n) {
      throw FormatError(fmt::format("node id outside [0, {})", n), line.number);
    }
    if (a == b) throw FormatError(fmt::format("self-loop on node {}", a), line.number);
    const Edge e = a < b ? Edge{a, b} : Edge{b, a};
    if (!seen.insert((std::uint64_t{e.first} << 32) | e.second).second) {
      throw FormatError(
          fmt::format("edge ({}, {}) listed twice; directed or duplicated input is rejected", a, b),
          line.number);
    }
    current.push_back(e);
    current_lines.push_back(line.number);
  }
  close_block();
  if (snapshots.size() != count) {
    throw FormatError(
        fmt::format("header declares {} snapshots but file has {}", count, snapshots.size()), 0);
  }
  return DynamicNetwork(n, std::move(snapshots));
}

void write_network(std::ostream& out, const DynamicNetwork& network) {
  out << "n " << network.node_count() << " t " << network.snapshot_count() << '\n';
  for (std::size_t t = 1; t <= network.snapshot_count(); ++t) {
    out << "snapshot " << t << '\n';
    for (const Edge& e : network.snapshot(t).edges()) out << e.first << ' ' << e.second << '\n';
  }
}

std::vector<Labels> read_partitions(std::istream& in, std::optional<std::size_t> node_count) {
  LineReader reader(in);
  Line line;
  std::vector<Labels> result;
  std::vector<std::pair<NodeId, int>> block;
  std::size_t block_line = 0;
  bool open = false;

  auto close_block = [&]() {
    if (!open) return;
    const std::size_t expected = node_count ? *node_count
                                            : (result.empty() ? block.size() : result.front().size());
    if (block.size() != expected) {
      throw FormatError(fmt::format("snapshot {} labels {} nodes, expected {}", result.size() + 1,
                                    block.size(), expected),
                        block_line);
    }
    Labels labels(expected, -1);
    std::vector<bool> seen(expected, false);
    for (const auto& [node, label] : block) {
      if (node >= expected) {
        throw FormatError(fmt::format("snapshot {}: node {} outside [0, {})", result.size() + 1,
                                      node, expected),
                          block_line);
      }
      if (seen[node]) {
        throw FormatError(
            fmt::format("snapshot {}: node {} labeled twice", result.size() + 1, node), block_line);
      }
      seen[node] = true;
      labels[node] = label;
    }
    result.push_back(std::move(labels));
    block.clear();
  };

  while (reader.next(line)) {
    if (line.tokens[0] == "snapshot") {
      close_block();
      expect_snapshot_header(line, result.size() + 1);
      open = true;
      block_line = line.number;
      continue;
    }
    if (!open) throw FormatError("label listed before any 'snapshot <t>' line", line.number);
    if (line.tokens.size() != 2) throw FormatError("label lines must be 'node label'", line.number);
    block.emplace_back(parse_number<NodeId>(line.tokens[0], line.number, "node id"),
                       parse_number<int>(line.tokens[1], line.number, "integer label"));
  }
  close_block();
  return result;
}

void write_partitions(std::ostream& out, const std::vector<Labels>& partitions) {
  for (std::size_t t = 0; t < partitions.size(); ++t) {
    out << "snapshot " << t + 1 << '\n';
    for (std::size_t i = 0; i < partitions[t].size(); ++i) {
      out << i << ' ' << partitions[t][i] << '\n';
    }
  }
}

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument(fmt::format("cannot open '{}'", path.string()));
  return in;
}

}  // namespace

DynamicNetwork load_network(const std::filesystem::path& network_file,
                            const std::optional<std::filesystem::path>& truth_file) {
  auto in = open_input(network_file);
  DynamicNetwork network = [&] {
    try {
      return read_network(in);
    } catch (const FormatError& e) {
      throw e.in_file(network_file.string());
    }
  }();
  if (truth_file) {
    network.set_ground_truth(load_partitions(*truth_file, network.node_count()));
  }
  return network;
}

std::vector<Labels> load_partitions(const std::filesystem::path& file,
                                    std::optional<std::size_t> node_count) {
  auto in = open_input(file);
  try {
    return read_partitions(in, node_count);
  } catch (const FormatError& e) {
    throw e.in_file(file.string());
  }
}

}  // namespace gtenn
