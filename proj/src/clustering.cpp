#include "gtenn/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include <fmt/format.h>

#include "gtenn/random.hpp"

namespace gtenn {

std::size_t Partition::community_count() const {
  if (labels.empty()) return 0;
  return static_cast<std::size_t>(*std::max_element(labels.begin(), labels.end())) + 1;
}

Labels compact_labels(const Labels& labels) {
  std::map<int, int> ids;
  for (int l : labels) ids.emplace(l, 0);
  int next = 0;
  for (auto& [label, id] : ids) id = next++;
  Labels out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = ids.at(labels[i]);
  return out;
}

void SomConfig::validate() const {
  if (grid_rows * grid_cols < 1) throw std::invalid_argument("som: grid needs at least one unit");
  if (!(alpha0 > 0.0 && alpha0 <= 1.0)) throw std::invalid_argument("som: alpha0 must lie in (0, 1]");
  if (!(sigma0 > 0.0)) throw std::invalid_argument("som: sigma0 must be positive");
  if (!(sigma_end > 0.0)) throw std::invalid_argument("som: sigma_end must be positive");
}

double SomConfig::time_constant() const {
  const double span = static_cast<double>(std::max<std::size_t>(iterations, 1));
  if (sigma0 <= sigma_end) return span;
  return span / std::log(sigma0 / sigma_end);
}

std::pair<std::size_t, std::size_t> SomConfig::grid_for(std::size_t units) {
  units = std::max<std::size_t>(units, 2);
  const auto rows = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(units)))));
  return {rows, (units + rows - 1) / rows};
}

SomConfig SomConfig::defaults_for(std::size_t n, std::uint64_t seed) {
  SomConfig c;
  const auto units =
      static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n) / 2.0)));
  std::tie(c.grid_rows, c.grid_cols) = grid_for(units);
  c.alpha0 = 0.5;
  c.sigma0 = 0.5 * std::hypot(static_cast<double>(c.grid_rows), static_cast<double>(c.grid_cols));
  c.iterations = 50 * n;
  c.seed = seed;
  return c;
}

std::size_t best_matching_unit(std::span<const double> point, const Matrix& units) {
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t u = 0; u < units.rows(); ++u) {
    const double d = squared_distance(point, units.row(u));
    if (d < best_dist) {
      best_dist = d;
      best = u;
    }
  }
  return best;
}

Matrix som_fit(const Matrix& points, const SomConfig& config) {
  config.validate();
  const std::size_t n = points.rows();
  const std::size_t d = points.cols();
  if (n == 0 || d == 0) throw std::invalid_argument("som_fit: empty input");
  const std::size_t unit_count = config.grid_rows * config.grid_cols;

  Rng rng(config.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order.begin(), order.end());
  Matrix units(unit_count, d);
  for (std::size_t u = 0; u < unit_count; ++u) {
    const std::size_t src = u < n ? order[u] : rng.below(n);
    std::copy_n(points.row(src).begin(), d, units.row(u).begin());
  }

  const double time_constant = config.time_constant();
  for (std::size_t s = 0; s < config.iterations; ++s) {
    const auto x = points.row(rng.below(n));
    const std::size_t bmu = best_matching_unit(x, units);
    const double decay = std::exp(-static_cast<double>(s) / time_constant);
    const double alpha = config.alpha0 * decay;
    const double sigma = config.sigma0 * decay;
    const double br = static_cast<double>(bmu / config.grid_cols);
    const double bc = static_cast<double>(bmu % config.grid_cols);
    for (std::size_t u = 0; u < unit_count; ++u) {
      const double dr = static_cast<double>(u / config.grid_cols) - br;
      const double dc = static_cast<double>(u % config.grid_cols) - bc;
      const double h = alpha * std::exp(-(dr * dr + dc * dc) / (2.0 * sigma * sigma));
      if (h == 0.0) continue;
      auto w = units.row(u);
      for (std::size_t j = 0; j < d; ++j) w[j] += h * (x[j] - w[j]);
    }
  }
  return units;
}

Partition som_assign(const Matrix& points, const Matrix& units) {
  if (points.cols() != units.cols()) {
    throw ShapeError(fmt::format("som_assign: points {} and units {} differ in width",
                                 points.shape_string(), units.shape_string()));
  }
  if (units.rows() == 0) throw std::invalid_argument("som_assign: no units");
  Labels bmu(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i) {
    bmu[i] = static_cast<int>(best_matching_unit(points.row(i), units));
  }
  return Partition{compact_labels(bmu), 0};
}

double within_cluster_ss(const Matrix& points, const Labels& labels) {
  if (labels.size() != points.rows()) {
    throw std::invalid_argument("within_cluster_ss: one label per point required");
  }
  std::map<int, std::pair<std::vector<double>, std::size_t>> sums;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    auto& [sum, count] = sums[labels[i]];
    sum.resize(points.cols(), 0.0);
    for (std::size_t j = 0; j < points.cols(); ++j) sum[j] += points(i, j);
    ++count;
  }
  for (auto& [label, entry] : sums) {
    for (double& v : entry.first) v /= static_cast<double>(entry.second);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    total += squared_distance(points.row(i), sums.at(labels[i]).first);
  }
  return total;
}

namespace {

Matrix kmeanspp_seeds(const Matrix& points, std::size_t k, Rng& rng) {
  const std::size_t n = points.rows();
  Matrix centers(k, points.cols());
  auto set_center = [&](std::size_t c, std::size_t i) {
    std::copy_n(points.row(i).begin(), points.cols(), centers.row(c).begin());
  };
  set_center(0, rng.below(n));
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(points.row(i), centers.row(c - 1)));
      total += nearest[i];
    }
    std::size_t pick = n - 1;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += nearest[i];
        if (acc > target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.below(n);
    }
    set_center(c, pick);
  }
  return centers;
}

/// Sets each non-empty center to its cluster mean; returns cluster sizes.
std::vector<std::size_t> update_centers(const Matrix& points, const Labels& assign, Matrix& centers) {
  const std::size_t d = points.cols();
  Matrix sums(centers.rows(), d);
  std::vector<std::size_t> counts(centers.rows(), 0);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    const auto c = static_cast<std::size_t>(assign[i]);
    ++counts[c];
    auto row = sums.row(c);
    for (std::size_t j = 0; j < d; ++j) row[j] += points(i, j);
  }
  for (std::size_t c = 0; c < centers.rows(); ++c) {
    if (counts[c] == 0) continue;
    for (std::size_t j = 0; j < d; ++j) centers(c, j) = sums(c, j) / static_cast<double>(counts[c]);
  }
  return counts;
}

}  // namespace

Partition kmeans(const Matrix& points, std::size_t k, std::uint64_t seed,
                 std::size_t max_iterations, std::vector<double>* objective_trace) {
  const std::size_t n = points.rows();
  if (k < 1) throw std::invalid_argument("kmeans: k must be at least 1");
  if (k > n) throw std::invalid_argument(fmt::format("kmeans: k = {} exceeds {} points", k, n));

  Rng rng(seed);
  Matrix centers = kmeanspp_seeds(points, k, rng);
  Labels assign(n, -1);

  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const int c = static_cast<int>(best_matching_unit(points.row(i), centers));
      if (c != assign[i]) {
        assign[i] = c;
        changed = true;
      }
    }
    if (!changed) break;

    std::vector<std::size_t> counts = update_centers(points, assign, centers);
    bool reseeded = false;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      // Move the empty center onto the point worst served by its own center,
      // taking that point out of its old cluster.
      std::size_t far = 0;
      double far_dist = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto own = static_cast<std::size_t>(assign[i]);
        if (counts[own] < 2) continue;
        const double dist = squared_distance(points.row(i), centers.row(own));
        if (dist > far_dist) {
          far_dist = dist;
          far = i;
        }
      }
      if (far_dist < 0.0) continue;
      --counts[static_cast<std::size_t>(assign[far])];
      assign[far] = static_cast<int>(c);
      counts[c] = 1;
      reseeded = true;
    }
    if (reseeded) update_centers(points, assign, centers);
    if (objective_trace) objective_trace->push_back(within_cluster_ss(points, assign));
  }
  return Partition{compact_labels(assign), 0};
}

}  // namespace gtenn
