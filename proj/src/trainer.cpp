#include "gtenn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include <fmt/format.h>

namespace gtenn {

void TrainConfig::validate() const {
  if (!(margin > 0.0)) throw std::invalid_argument("train: margin must be positive");
  if (negatives < 1) throw std::invalid_argument("train: need at least one negative per pair");
  if (epochs < 1) throw std::invalid_argument("train: epochs must be at least 1");
  if (!(optimizer.learning_rate >= 0.0)) {
    throw std::invalid_argument("train: learning rate must be non-negative");
  }
}

std::vector<std::pair<NodeId, NodeId>> positive_pairs(const DynamicNetwork& network, std::size_t t) {
  std::vector<std::pair<NodeId, NodeId>> pairs;
  const auto& edges = network.snapshot(t).edges();
  pairs.reserve(2 * edges.size());
  for (const Edge& e : edges) {
    pairs.emplace_back(e.first, e.second);
    pairs.emplace_back(e.second, e.first);
  }
  return pairs;
}

std::vector<double> negative_distribution(const std::vector<double>& degrees) {
  std::vector<double> p(degrees.size());
  double total = 0.0;
  for (std::size_t v = 0; v < degrees.size(); ++v) {
    p[v] = degrees[v] > 0.0 ? std::pow(degrees[v], 0.75) : 0.0;
    total += p[v];
  }
  if (total <= 0.0) throw std::invalid_argument("negative_distribution: every degree is zero");
  for (double& x : p) x /= total;
  return p;
}

NegativeSampler::NegativeSampler(std::vector<double> distribution,
                                 std::vector<std::vector<NodeId>> neighbors)
    : cdf_(std::move(distribution)), neighbors_(std::move(neighbors)) {
  double acc = 0.0;
  for (double& p : cdf_) {
    acc += p;
    p = acc;
  }
}

NodeId NegativeSampler::draw(Rng& rng) const {
  const double u = rng.uniform() * cdf_.back();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  return static_cast<NodeId>(it - cdf_.begin());
}

bool NegativeSampler::valid(NodeId anchor, NodeId candidate) const {
  if (candidate == anchor) return false;
  const auto& adj = neighbors_[anchor];
  return !std::binary_search(adj.begin(), adj.end(), candidate);
}

std::optional<std::vector<NodeId>> NegativeSampler::sample(NodeId anchor, std::size_t q,
                                                           Rng& rng) const {
  const std::size_t n = cdf_.size();
  if (neighbors_[anchor].size() + 1 >= n) return std::nullopt;
  std::vector<NodeId> out;
  out.reserve(q);
  for (std::size_t i = 0; i < q; ++i) {
    bool found = false;
    for (int attempt = 0; attempt < kMaxTries; ++attempt) {
      const NodeId c = draw(rng);
      if (valid(anchor, c)) {
        out.push_back(c);
        found = true;
        break;
      }
    }
    if (!found) {
      std::vector<NodeId> candidates;
      for (std::size_t v = 0; v < n; ++v) {
        if (valid(anchor, static_cast<NodeId>(v))) candidates.push_back(static_cast<NodeId>(v));
      }
      out.push_back(candidates[rng.below(candidates.size())]);
    }
  }
  return out;
}

Var ranking_loss(Var embeddings, const PairBatch& batch, double margin) {
  Tape& tape = *embeddings.tape();
  const std::size_t q = batch.per_positive;
  if (batch.negatives.size() != batch.positives.size() * q) {
    throw ShapeError("ranking_loss: negatives do not match positives times per_positive");
  }
  if (batch.positives.empty()) return tape.constant(Matrix(1, 1));

  const Matrix& h = embeddings.value();
  auto row = [&h](NodeId v) {
    if (v >= h.rows()) throw ShapeError(fmt::format("ranking_loss: node {} outside embeddings", v));
    return h.row(v);
  };
  double total = 0.0;
  for (std::size_t i = 0; i < batch.positives.size(); ++i) {
    const auto [x, y] = batch.positives[i];
    const double pos = squared_distance(row(x), row(y));
    for (std::size_t k = 0; k < q; ++k) {
      const double term = margin + pos - squared_distance(row(x), row(batch.negatives[i * q + k]));
      if (term > 0.0) total += term;
    }
  }
  const double count = static_cast<double>(batch.positives.size());

  return tape.record(
      Matrix(1, 1, total / count), {embeddings},
      [hi = embeddings.id(), batch = std::make_shared<const PairBatch>(batch), margin, q,
       count](Tape& tp, std::size_t self) {
        const double g = tp.grad(self)(0, 0) / count;
        const Matrix& h = tp.value(hi);
        Matrix& dh = tp.grad(hi);
        const std::size_t d = h.cols();
        for (std::size_t i = 0; i < batch->positives.size(); ++i) {
          const auto [x, y] = batch->positives[i];
          const auto hx = h.row(x);
          const auto hy = h.row(y);
          const double pos = squared_distance(hx, hy);
          for (std::size_t k = 0; k < q; ++k) {
            const NodeId u = batch->negatives[i * q + k];
            const auto hu = h.row(u);
            if (margin + pos - squared_distance(hx, hu) <= 0.0) continue;
            auto dx = dh.row(x);
            auto dy = dh.row(y);
            auto du = dh.row(u);
            for (std::size_t j = 0; j < d; ++j) {
              dx[j] += 2.0 * g * (hu[j] - hy[j]);
              dy[j] -= 2.0 * g * (hx[j] - hy[j]);
              du[j] += 2.0 * g * (hx[j] - hu[j]);
            }
          }
        }
      });
}

std::vector<Matrix> normalized_adjacencies(const DynamicNetwork& network) {
  std::vector<Matrix> out;
  for (std::size_t t = 1; t <= network.snapshot_count(); ++t) {
    out.push_back(normalize_adjacency(build_adjacency(network, t)));
  }
  return out;
}

std::vector<Matrix> embed(const DynamicNetwork& network, GtennModel& model) {
  Tape tape;
  std::vector<Matrix> out;
  for (const Var& h : model.forward(tape, normalized_adjacencies(network))) out.push_back(h.value());
  return out;
}

namespace {

struct SnapshotData {
  std::vector<std::pair<NodeId, NodeId>> positives;
  std::optional<NegativeSampler> sampler;
};

PairBatch make_batch(const SnapshotData& data, std::size_t begin, std::size_t end, std::size_t q,
                     Rng& rng, std::size_t& skipped) {
  PairBatch batch;
  batch.per_positive = q;
  if (!data.sampler) return batch;
  for (std::size_t i = begin; i < end; ++i) {
    const auto& pair = data.positives[i];
    auto negatives = data.sampler->sample(pair.first, q, rng);
    if (!negatives) {
      ++skipped;
      continue;
    }
    batch.positives.push_back(pair);
    batch.negatives.insert(batch.negatives.end(), negatives->begin(), negatives->end());
  }
  return batch;
}

}  // namespace

TrainResult train(const DynamicNetwork& network, GtennModel& model, const TrainConfig& config) {
  config.validate();
  const std::size_t snapshots = network.snapshot_count();
  if (snapshots == 0) throw std::invalid_argument("train: network has no snapshots");
  if (network.node_count() != model.nodes()) {
    throw ShapeError(fmt::format("train: model built for {} nodes, network has {}", model.nodes(),
                                 network.node_count()));
  }

  const auto adjacency = normalized_adjacencies(network);
  std::vector<SnapshotData> data(snapshots);
  std::size_t largest = 0;
  for (std::size_t t = 1; t <= snapshots; ++t) {
    SnapshotData& d = data[t - 1];
    d.positives = positive_pairs(network, t);
    largest = std::max(largest, d.positives.size());
    if (!d.positives.empty()) {
      d.sampler.emplace(negative_distribution(degree_vector(build_adjacency(network, t))),
                        network.neighbors(t));
    }
  }

  const ParameterRefs params = model.parameters();
  Optimizer optimizer(config.optimizer);
  const std::size_t steps =
      config.batch_size == 0 ? 1 : std::max<std::size_t>(1, (largest + config.batch_size - 1) / config.batch_size);
  const std::uint64_t noise_seed = derive_seed(config.seed, 0x6e6f697365);

  TrainResult result;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    Rng rng(derive_seed(noise_seed, epoch));
    if (config.batch_size != 0) {
      for (SnapshotData& d : data) rng.shuffle(d.positives.begin(), d.positives.end());
    }

    EpochLog log{epoch, 0.0, std::vector<double>(snapshots, 0.0)};
    for (std::size_t step = 0; step < steps; ++step) {
      zero_grads(params);
      Tape tape;
      const auto hidden = model.forward(tape, adjacency);

      std::vector<PairBatch> batches(snapshots);
      Var total = tape.constant(Matrix(1, 1));
      for (std::size_t t = 0; t < snapshots; ++t) {
        const std::size_t size = data[t].positives.size();
        const std::size_t begin = config.batch_size == 0 ? 0 : std::min(size, step * config.batch_size);
        const std::size_t end =
            config.batch_size == 0 ? size : std::min(size, begin + config.batch_size);
        batches[t] = make_batch(data[t], begin, end, config.negatives, rng, result.skipped_pairs);
        Var loss = ranking_loss(hidden[t], batches[t], config.margin);
        const double value = loss.value()(0, 0);
        if (!std::isfinite(value)) {
          throw NumericError(fmt::format("non-finite loss at epoch {}, snapshot {}, learning rate {}",
                                         epoch, t + 1, config.optimizer.learning_rate));
        }
        log.snapshot_loss[t] += value / static_cast<double>(steps);
        total = total + loss;
      }
      tape.backward(total);
      optimizer.step(params);
    }
    for (double l : log.snapshot_loss) log.total_loss += l;
    result.log.push_back(std::move(log));
  }

  result.embeddings = embed(network, model);
  for (std::size_t t = 0; t < result.embeddings.size(); ++t) {
    if (!result.embeddings[t].all_finite()) {
      throw NumericError(fmt::format("non-finite embedding after training at snapshot {}, learning rate {}",
                                     t + 1, config.optimizer.learning_rate));
    }
  }
  return result;
}

void write_training_log(std::ostream& out, const std::vector<EpochLog>& log) {
  out << "epoch,total_loss";
  const std::size_t snapshots = log.empty() ? 0 : log.front().snapshot_loss.size();
  for (std::size_t t = 1; t <= snapshots; ++t) out << ",loss_t" << t;
  out << '\n';
  for (const EpochLog& e : log) {
    out << fmt::format("{},{:.10g}", e.epoch, e.total_loss);
    for (double l : e.snapshot_loss) out << fmt::format(",{:.10g}", l);
    out << '\n';
  }
}

}  // namespace gtenn
