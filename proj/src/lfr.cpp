#include "gtenn/lfr.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <unordered_set>

#include <fmt/format.h>

namespace gtenn {

namespace {

constexpr int kMaxWiringSweeps = 100;
constexpr int kSwapAttempts = 50;
constexpr int kMaxLayoutAttempts = 200;

std::uint64_t edge_key(NodeId a, NodeId b) {
  if (a > b) std::swap(a, b);
  return (std::uint64_t{a} << 32) | b;
}

/// (1 - mu) * degree, rounded stochastically so the expected split is exact.
std::size_t internal_target(std::size_t degree, double mu, Rng& rng) {
  const double x = (1.0 - mu) * static_cast<double>(degree);
  const double base = std::floor(x);
  const auto k = static_cast<std::size_t>(base) + (rng.uniform() < x - base ? 1 : 0);
  return std::min(k, degree);
}

/// Mutable simple graph whose edges are grouped into categories (one per
/// community for internal edges, one extra for external edges) so stub
/// matching can repair rejected pairs by swapping with same-category edges.
class Wiring {
 public:
  Wiring(std::size_t category_count, Rng& rng) : pools_(category_count), rng_(rng) {}

  bool has(NodeId a, NodeId b) const { return adjacency_.contains(edge_key(a, b)); }

  void add(NodeId a, NodeId b, std::size_t category) {
    adjacency_.insert(edge_key(a, b));
    pools_[category].push_back(a < b ? Edge{a, b} : Edge{b, a});
  }

  /// Pairs up `stubs` (node ids, one entry per stub) into new edges of
  /// `category`. `accept` restricts which node pairs may be joined. Returns
  /// the stubs still unmatched after kMaxWiringSweeps.
  std::vector<NodeId> wire(std::vector<NodeId> stubs, std::size_t category,
                           const std::function<bool(NodeId, NodeId)>& accept) {
    auto valid = [&](NodeId a, NodeId b) { return a != b && !has(a, b) && accept(a, b); };
    for (int sweep = 0; sweep < kMaxWiringSweeps && !stubs.empty(); ++sweep) {
      rng_.shuffle(stubs.begin(), stubs.end());
      std::vector<NodeId> rejected;
      for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
        const NodeId a = stubs[i];
        const NodeId b = stubs[i + 1];
        if (valid(a, b)) {
          add(a, b, category);
        } else {
          rejected.push_back(a);
          rejected.push_back(b);
        }
      }
      stubs.clear();
      for (std::size_t i = 0; i + 1 < rejected.size(); i += 2) {
        if (!swap_in(rejected[i], rejected[i + 1], category, valid)) {
          stubs.push_back(rejected[i]);
          stubs.push_back(rejected[i + 1]);
        }
      }
    }
    return stubs;
  }

  EdgeSet edges(std::size_t node_count) const {
    std::vector<Edge> all;
    for (const auto& pool : pools_) all.insert(all.end(), pool.begin(), pool.end());
    return EdgeSet(std::move(all), node_count);
  }

 private:
  /// Replaces a random edge (c, d) of the category with (a, c) and (b, d).
  template <typename Valid>
  bool swap_in(NodeId a, NodeId b, std::size_t category, const Valid& valid) {
    auto& pool = pools_[category];
    for (int attempt = 0; attempt < kSwapAttempts && !pool.empty(); ++attempt) {
      const std::size_t idx = rng_.below(pool.size());
      auto [c, d] = pool[idx];
      if (rng_.below(2) == 1) std::swap(c, d);
      if (!valid(a, c) || !valid(b, d)) continue;
      if (edge_key(a, c) == edge_key(b, d)) continue;
      adjacency_.erase(edge_key(c, d));
      pool[idx] = pool.back();
      pool.pop_back();
      add(a, c, category);
      add(b, d, category);
      return true;
    }
    return false;
  }

  std::unordered_set<std::uint64_t> adjacency_;
  std::vector<std::vector<Edge>> pools_;
  Rng& rng_;
};

struct StubPlan {
  std::vector<std::size_t> internal;
  std::vector<std::size_t> external;
};

/// Makes every community's internal stub count even by moving one stub of a
/// random member between its internal and external allotments.
void fix_internal_parity(StubPlan& plan, const std::vector<std::vector<NodeId>>& members,
                         const std::vector<std::size_t>& capacity, Rng& rng) {
  for (std::size_t c = 0; c < members.size(); ++c) {
    std::size_t total = 0;
    for (NodeId v : members[c]) total += plan.internal[v];
    if (total % 2 == 0) continue;

    std::vector<NodeId> can_lower;
    std::vector<NodeId> can_raise;
    for (NodeId v : members[c]) {
      if (plan.internal[v] > 0) can_lower.push_back(v);
      if (plan.external[v] > 0 && plan.internal[v] + 1 <= capacity[v]) can_raise.push_back(v);
    }
    const bool raise = !can_raise.empty() && (can_lower.empty() || rng.below(2) == 1);
    if (raise) {
      const NodeId v = can_raise[rng.below(can_raise.size())];
      ++plan.internal[v];
      --plan.external[v];
    } else {
      // An odd total guarantees a member with internal stubs.
      const NodeId v = can_lower[rng.below(can_lower.size())];
      --plan.internal[v];
      ++plan.external[v];
    }
  }
}

void wire_plan(Wiring& wiring, const StubPlan& plan, const Labels& labels,
               const std::vector<std::vector<NodeId>>& members) {
  const std::size_t external_category = members.size();
  std::vector<NodeId> external;
  for (std::size_t v = 0; v < labels.size(); ++v) {
    external.insert(external.end(), plan.external[v], static_cast<NodeId>(v));
  }
  for (std::size_t c = 0; c < members.size(); ++c) {
    std::vector<NodeId> stubs;
    for (NodeId v : members[c]) stubs.insert(stubs.end(), plan.internal[v], v);
    // A community's internal degrees are not always realizable as a simple
    // graph; stubs that cannot be placed inside become external stubs so
    // every node keeps its degree.
    const auto left = wiring.wire(std::move(stubs), c, [](NodeId, NodeId) { return true; });
    external.insert(external.end(), left.begin(), left.end());
  }
  const auto left = wiring.wire(std::move(external), external_category,
                                [&labels](NodeId a, NodeId b) { return labels[a] != labels[b]; });
  if (!left.empty()) {
    throw GenerationError(fmt::format(
        "stub matching left {} stubs unplaced after {} sweeps; try a lower average degree, "
        "larger communities, or a different mixing parameter",
        left.size(), kMaxWiringSweeps));
  }
}

std::vector<std::vector<NodeId>> group_members(const Labels& labels, std::size_t community_count) {
  std::vector<std::vector<NodeId>> members(community_count);
  for (std::size_t v = 0; v < labels.size(); ++v) {
    members[static_cast<std::size_t>(labels[v])].push_back(static_cast<NodeId>(v));
  }
  return members;
}

/// Places nodes into communities so every node's internal degree fits inside
/// its community. Highest internal degree first; ties in random order.
bool assign_communities(const std::vector<std::size_t>& internal,
                        const std::vector<std::size_t>& sizes, Labels& labels, Rng& rng) {
  std::vector<NodeId> order(internal.size());
  std::iota(order.begin(), order.end(), NodeId{0});
  rng.shuffle(order.begin(), order.end());
  std::stable_sort(order.begin(), order.end(),
                   [&](NodeId a, NodeId b) { return internal[a] > internal[b]; });

  std::vector<std::size_t> free_slots = sizes;
  labels.assign(internal.size(), -1);
  std::vector<std::size_t> fitting;
  for (NodeId v : order) {
    fitting.clear();
    for (std::size_t c = 0; c < sizes.size(); ++c) {
      if (free_slots[c] > 0 && sizes[c] > internal[v]) fitting.push_back(c);
    }
    if (fitting.empty()) return false;
    const std::size_t c = fitting[rng.below(fitting.size())];
    --free_slots[c];
    labels[v] = static_cast<int>(c);
  }
  return true;
}

}  // namespace

void LfrConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("lfr: " + msg); };
  if (nodes < 2) fail("nodes must be at least 2");
  if (snapshots < 1) fail("snapshots must be at least 1");
  if (!(mu >= 0.0 && mu <= 1.0)) fail(fmt::format("mu must lie in [0, 1], got {}", mu));
  if (!(avg_degree >= 1.0)) fail("avg_degree must be at least 1");
  if (!(avg_degree <= static_cast<double>(max_degree))) fail("avg_degree must not exceed max_degree");
  if (max_degree >= nodes) fail("max_degree must be smaller than nodes");
  if (min_community < 1 || min_community > max_community) {
    fail("community size range must satisfy 1 <= min_community <= max_community");
  }
  if (max_community > nodes) fail("max_community must not exceed nodes");
  if (!(gamma > 1.0)) fail("gamma must be greater than 1");
  if (!(beta > 1.0)) fail("beta must be greater than 1");
  if (!(churn_fraction >= 0.0 && churn_fraction < 1.0)) fail("churn_fraction must lie in [0, 1)");
}

LfrConfig LfrConfig::preset(int index) {
  if (index < 1 || index > 8) {
    throw std::invalid_argument(fmt::format("lfr preset index must be 1..8, got {}", index));
  }
  LfrConfig c;
  c.mu = index / 10.0;
  return c;
}

std::vector<std::size_t> sample_powerlaw(std::size_t count, double exponent, std::size_t lo,
                                         std::size_t hi, Rng& rng) {
  if (lo < 1 || lo > hi) {
    throw std::invalid_argument(fmt::format("powerlaw: infeasible bounds [{}, {}]", lo, hi));
  }
  if (!(exponent > 1.0)) throw std::invalid_argument("powerlaw: exponent must exceed 1");
  std::vector<double> cdf(hi - lo + 1);
  double acc = 0.0;
  for (std::size_t k = lo; k <= hi; ++k) {
    acc += std::pow(static_cast<double>(k), -exponent);
    cdf[k - lo] = acc;
  }
  std::vector<std::size_t> out(count);
  for (auto& v : out) {
    const double u = rng.uniform() * acc;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    v = lo + static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cdf.begin(),
                                                               static_cast<std::ptrdiff_t>(hi - lo)));
  }
  return out;
}

std::vector<std::size_t> sample_powerlaw(std::size_t count, double exponent, std::size_t lo,
                                         std::size_t hi, std::uint64_t seed) {
  Rng rng(seed);
  return sample_powerlaw(count, exponent, lo, hi, rng);
}

double powerlaw_mean(double exponent, std::size_t lo, std::size_t hi) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = lo; k <= hi; ++k) {
    const double w = std::pow(static_cast<double>(k), -exponent);
    num += static_cast<double>(k) * w;
    den += w;
  }
  return num / den;
}

std::size_t minimum_degree_for(const LfrConfig& config) {
  std::size_t best = 1;
  double best_gap = INFINITY;
  for (std::size_t lo = 1; lo <= config.max_degree; ++lo) {
    const double gap = std::abs(powerlaw_mean(config.gamma, lo, config.max_degree) - config.avg_degree);
    if (gap < best_gap) {
      best_gap = gap;
      best = lo;
    }
  }
  return best;
}

std::vector<std::size_t> degree_sequence(const LfrConfig& config, Rng& rng) {
  const std::size_t lo = minimum_degree_for(config);
  auto degrees = sample_powerlaw(config.nodes, config.gamma, lo, config.max_degree, rng);
  if (degrees.empty()) return degrees;
  auto total = std::accumulate(degrees.begin(), degrees.end(), std::size_t{0});
  for (int attempt = 0; total % 2 == 1; ++attempt) {
    if (attempt == 10000) throw GenerationError("degree sequence: cannot reach an even degree sum");
    total -= degrees.back();
    degrees.back() = sample_powerlaw(1, config.gamma, lo, config.max_degree, rng).front();
    total += degrees.back();
  }
  return degrees;
}

std::vector<std::size_t> community_sizes(const LfrConfig& config, Rng& rng) {
  const std::size_t n = config.nodes;
  const std::size_t lo = config.min_community;
  const std::size_t hi = config.max_community;
  auto draw = [&] { return sample_powerlaw(1, config.beta, lo, hi, rng).front(); };

  for (int restart = 0; restart < 100000; ++restart) {
    std::vector<std::size_t> sizes;
    std::size_t total = 0;
    while (total < n) {
      sizes.push_back(draw());
      total += sizes.back();
    }
    if (total == n) return sizes;
    const std::size_t remainder = n - (total - sizes.back());
    if (remainder < lo) continue;
    for (int attempt = 0; attempt < 10000; ++attempt) {
      const std::size_t s = draw();
      if (s == remainder) {
        sizes.back() = s;
        return sizes;
      }
    }
  }
  throw GenerationError(fmt::format(
      "community sizes in [{}, {}] could not be drawn to sum to {} nodes", lo, hi, n));
}

LfrSnapshot generate_static_lfr(const LfrConfig& config) {
  config.validate();
  Rng rng(derive_seed(config.seed, 0));
  return generate_static_lfr(config, rng);
}

LfrSnapshot generate_static_lfr(const LfrConfig& config, Rng& rng) {
  config.validate();
  const std::size_t n = config.nodes;
  const auto degrees = degree_sequence(config, rng);

  StubPlan plan{std::vector<std::size_t>(n), std::vector<std::size_t>(n)};
  for (std::size_t v = 0; v < n; ++v) {
    plan.internal[v] = internal_target(degrees[v], config.mu, rng);
    plan.external[v] = degrees[v] - plan.internal[v];
  }

  Labels labels;
  std::vector<std::size_t> sizes;
  bool placed = false;
  for (int attempt = 0; attempt < kMaxLayoutAttempts && !placed; ++attempt) {
    sizes = community_sizes(config, rng);
    placed = assign_communities(plan.internal, sizes, labels, rng);
  }
  if (!placed) {
    throw GenerationError(
        "no community layout fits the internal degrees; widen the community size range or "
        "lower max_degree");
  }

  const auto members = group_members(labels, sizes.size());
  std::vector<std::size_t> capacity(n);
  for (std::size_t v = 0; v < n; ++v) capacity[v] = sizes[static_cast<std::size_t>(labels[v])] - 1;
  fix_internal_parity(plan, members, capacity, rng);

  Wiring wiring(sizes.size() + 1, rng);
  wire_plan(wiring, plan, labels, members);
  return LfrSnapshot{wiring.edges(n), std::move(labels)};
}

LfrSnapshot evolve_snapshot(const LfrSnapshot& previous, const LfrConfig& config, Rng& rng) {
  config.validate();
  const std::size_t n = previous.labels.size();
  const auto move_count =
      static_cast<std::size_t>(std::llround(config.churn_fraction * static_cast<double>(n)));
  if (move_count == 0) return previous;

  // Dense community ids, so removed labels do not leave holes in the pools.
  std::map<int, std::size_t> dense;
  for (int label : previous.labels) dense.emplace(label, 0);
  std::vector<int> original_label;
  for (auto& [label, id] : dense) {
    id = original_label.size();
    original_label.push_back(label);
  }
  const std::size_t community_count = original_label.size();
  if (community_count < 2) {
    throw GenerationError("evolution needs at least two communities to move nodes between");
  }

  Labels labels(n);
  for (std::size_t v = 0; v < n; ++v) labels[v] = static_cast<int>(dense[previous.labels[v]]);

  std::vector<std::size_t> degree(n, 0);
  std::vector<std::size_t> prev_internal(n, 0);
  for (const Edge& e : previous.edges.edges()) {
    ++degree[e.first];
    ++degree[e.second];
    if (labels[e.first] == labels[e.second]) {
      ++prev_internal[e.first];
      ++prev_internal[e.second];
    }
  }
  std::vector<std::size_t> sizes(community_count, 0);
  for (int l : labels) ++sizes[static_cast<std::size_t>(l)];

  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  rng.shuffle(order.begin(), order.end());
  order.resize(move_count);

  std::vector<bool> moved(n, false);
  std::vector<std::size_t> target_internal = prev_internal;
  for (NodeId v : order) {
    moved[v] = true;
    const auto from = static_cast<std::size_t>(labels[v]);
    target_internal[v] = internal_target(degree[v], config.mu, rng);
    std::vector<std::size_t> choices;
    for (std::size_t c = 0; c < community_count; ++c) {
      if (c != from && sizes[c] >= target_internal[v]) choices.push_back(c);
    }
    if (choices.empty()) {
      for (std::size_t c = 0; c < community_count; ++c) {
        if (c != from) choices.push_back(c);
      }
    }
    const std::size_t to = choices[rng.below(choices.size())];
    --sizes[from];
    ++sizes[to];
    labels[v] = static_cast<int>(to);
  }

  Wiring wiring(community_count + 1, rng);
  std::vector<std::size_t> retained(n, 0);
  std::vector<std::size_t> retained_internal(n, 0);
  for (const Edge& e : previous.edges.edges()) {
    if (moved[e.first] || moved[e.second]) continue;
    const bool internal = labels[e.first] == labels[e.second];
    wiring.add(e.first, e.second,
               internal ? static_cast<std::size_t>(labels[e.first]) : community_count);
    ++retained[e.first];
    ++retained[e.second];
    if (internal) {
      ++retained_internal[e.first];
      ++retained_internal[e.second];
    }
  }

  StubPlan plan{std::vector<std::size_t>(n, 0), std::vector<std::size_t>(n, 0)};
  std::vector<std::size_t> capacity(n);
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t free = degree[v] - retained[v];
    const std::size_t community_room =
        sizes[static_cast<std::size_t>(labels[v])] - 1 - retained_internal[v];
    capacity[v] = community_room;
    std::size_t want = target_internal[v] > retained_internal[v]
                           ? target_internal[v] - retained_internal[v]
                           : 0;
    want = std::min({want, free, community_room});
    plan.internal[v] = want;
    plan.external[v] = free - want;
  }

  const auto members = group_members(labels, community_count);
  fix_internal_parity(plan, members, capacity, rng);
  wire_plan(wiring, plan, labels, members);

  Labels out(n);
  for (std::size_t v = 0; v < n; ++v) out[v] = original_label[static_cast<std::size_t>(labels[v])];
  return LfrSnapshot{wiring.edges(n), std::move(out)};
}

DynamicNetwork generate_dynamic_lfr(const LfrConfig& config) {
  config.validate();
  std::vector<EdgeSet> snapshots;
  std::vector<Labels> truth;
  LfrSnapshot current = generate_static_lfr(config);
  for (std::size_t t = 1; t <= config.snapshots; ++t) {
    if (t > 1) {
      Rng rng(derive_seed(config.seed, t));
      current = evolve_snapshot(current, config, rng);
    }
    snapshots.push_back(current.edges);
    truth.push_back(current.labels);
  }
  return DynamicNetwork(config.nodes, std::move(snapshots), std::move(truth));
}

}  // namespace gtenn
