#include "gtenn/harness.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

namespace gtenn {

namespace {

constexpr std::uint64_t kModelStream = 1;
constexpr std::uint64_t kTrainStream = 2;
constexpr std::uint64_t kClusterStream = 3;

template <typename Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  writer(out);
  out.flush();
  if (!out) throw std::runtime_error(fmt::format("write to '{}' failed", path.string()));
}

void prepare_output(const std::filesystem::path& out) {
  if (out.empty()) throw std::invalid_argument("an output directory is required");
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) {
    throw std::runtime_error(fmt::format("cannot create output directory '{}': {}", out.string(),
                                         ec.message()));
  }
}

void write_manifest(const std::filesystem::path& out, std::string_view manifest) {
  write_file(out / "manifest.ini", [&](std::ostream& os) { os << manifest; });
}

std::string quoted(const std::filesystem::path& p) {
  const std::string s = p.string();
  if (s.find('"') != std::string::npos || s.find('\n') != std::string::npos) {
    throw std::invalid_argument(fmt::format("path '{}' cannot be recorded in a manifest", s));
  }
  return '"' + s + '"';
}

std::string lfr_keys(const LfrConfig& c) {
  return fmt::format(
      "nodes={}\nsnapshots={}\nmu={}\navg-degree={}\nmax-degree={}\nmin-community={}\n"
      "max-community={}\ngamma={}\nbeta={}\nchurn={}\n",
      c.nodes, c.snapshots, c.mu, c.avg_degree, c.max_degree, c.min_community, c.max_community,
      c.gamma, c.beta, c.churn_fraction);
}

std::string experiment_keys(const ExperimentConfig& c, const std::filesystem::path& out) {
  std::string s = fmt::format("seed={}\nout={}\n", c.seed, quoted(out));
  if (c.lfr) {
    s += fmt::format("data-seed={}\n", c.lfr->seed);
    s += lfr_keys(*c.lfr);
  } else {
    s += fmt::format("network={}\n", quoted(c.network_file));
    if (!c.truth_file.empty()) s += fmt::format("truth={}\n", quoted(c.truth_file));
  }
  std::string dims;
  for (std::size_t d : c.model.dims) dims += (dims.empty() ? "" : ",") + std::to_string(d);
  s += fmt::format(
      "dims=[{}]\nablation=\"{}\"\nweight-features={}\nleaky-slope={}\nepochs={}\nlr={}\n"
      "optimizer=\"{}\"\nmargin={}\nnegatives={}\nbatch-size={}\nmethod=\"{}\"\nk={}\n"
      "som-rows={}\nsom-cols={}\nsom-alpha={}\nsom-sigma={}\nsom-sigma-end={}\n"
      "som-iterations={}\n",
      dims, to_string(c.model.mode), c.model.weight_feature_term, c.model.leaky_slope,
      c.train.epochs, c.train.optimizer.learning_rate, to_string(c.train.optimizer.kind),
      c.train.margin, c.train.negatives, c.train.batch_size, to_string(c.clustering.method),
      c.clustering.k, c.clustering.som_rows, c.clustering.som_cols, c.clustering.som_alpha0,
      c.clustering.som_sigma0, c.clustering.som_sigma_end, c.clustering.som_iterations);
  return s;
}

std::size_t community_count(const Labels& labels) {
  return static_cast<std::size_t>(*std::max_element(labels.begin(), labels.end())) + 1;
}

}  // namespace

ClusterMethod parse_method(std::string_view name) {
  if (name == "som") return ClusterMethod::Som;
  if (name == "kmeans") return ClusterMethod::KMeans;
  throw std::invalid_argument(fmt::format("unknown clustering method '{}' (expected som, kmeans)", name));
}

std::string_view to_string(ClusterMethod method) {
  return method == ClusterMethod::Som ? "som" : "kmeans";
}

SomConfig ClusteringOptions::som_config(std::size_t nodes, std::uint64_t seed) const {
  SomConfig c = SomConfig::defaults_for(nodes, seed);
  if (som_rows != 0 || som_cols != 0) {
    c.grid_rows = som_rows != 0 ? som_rows : c.grid_rows;
    c.grid_cols = som_cols != 0 ? som_cols : c.grid_cols;
    c.sigma0 = 0.5 * std::hypot(static_cast<double>(c.grid_rows), static_cast<double>(c.grid_cols));
  }
  c.alpha0 = som_alpha0;
  if (som_sigma0 > 0.0) c.sigma0 = som_sigma0;
  c.sigma_end = som_sigma_end;
  if (som_iterations != 0) c.iterations = som_iterations;
  return c;
}

void ExperimentConfig::validate() const {
  const bool from_file = !network_file.empty();
  if (lfr.has_value() == from_file) {
    throw std::invalid_argument(
        "exactly one dataset source is required: LFR parameters or a network file");
  }
  if (!truth_file.empty() && !from_file) {
    throw std::invalid_argument("a ground-truth file only applies to a network file");
  }
  if (lfr) lfr->validate();
  model.validate();
  train.validate();
  if (clustering.som_sigma0 < 0.0) throw std::invalid_argument("som: sigma0 must be positive");
  if (!(clustering.som_sigma_end > 0.0)) throw std::invalid_argument("som: sigma_end must be positive");
  if (!(clustering.som_alpha0 > 0.0 && clustering.som_alpha0 <= 1.0)) {
    throw std::invalid_argument("som: alpha0 must lie in (0, 1]");
  }
}

DynamicNetwork load_dataset(const ExperimentConfig& config) {
  config.validate();
  if (config.lfr) return generate_dynamic_lfr(*config.lfr);
  std::optional<std::filesystem::path> truth;
  if (!config.truth_file.empty()) truth = config.truth_file;
  return load_network(config.network_file, truth);
}

std::vector<Labels> cluster_embeddings(const std::vector<Matrix>& embeddings,
                                       const ClusteringOptions& options, std::uint64_t seed,
                                       const DynamicNetwork& network) {
  std::vector<Labels> partitions;
  for (std::size_t t = 1; t <= embeddings.size(); ++t) {
    const Matrix& h = embeddings[t - 1];
    const std::uint64_t snapshot_seed = derive_seed(seed, t);
    if (options.method == ClusterMethod::Som) {
      const Matrix units = som_fit(h, options.som_config(h.rows(), snapshot_seed));
      partitions.push_back(som_assign(h, units).labels);
      continue;
    }
    std::size_t k = options.k;
    if (k == 0) {
      if (!network.has_ground_truth()) {
        throw std::invalid_argument("kmeans: k is required when the network has no ground truth");
      }
      k = community_count(network.ground_truth(t));
    }
    partitions.push_back(kmeans(h, k, snapshot_seed).labels);
  }
  return partitions;
}

RunResult run_experiment(const ExperimentConfig& config, const DynamicNetwork& network) {
  config.validate();
  GtennModel model(network.node_count(), config.model, derive_seed(config.seed, kModelStream));
  TrainConfig train = config.train;
  train.seed = derive_seed(config.seed, kTrainStream);

  RunResult result;
  result.training = gtenn::train(network, model, train);
  result.partitions = cluster_embeddings(result.training.embeddings, config.clustering,
                                         derive_seed(config.seed, kClusterStream), network);
  if (network.has_ground_truth()) {
    result.metrics = evaluate_sequence(result.partitions, *network.ground_truth_sequence());
  }
  return result;
}

void write_embeddings(std::ostream& out, const std::vector<Matrix>& embeddings) {
  for (std::size_t t = 0; t < embeddings.size(); ++t) {
    out << "snapshot " << t + 1 << '\n';
    const Matrix& h = embeddings[t];
    for (std::size_t i = 0; i < h.rows(); ++i) {
      out << i;
      for (double v : h.row(i)) out << fmt::format(" {:.17g}", v);
      out << '\n';
    }
  }
}

std::string generate_manifest(const LfrConfig& config, const std::filesystem::path& out) {
  return fmt::format("[generate]\nseed={}\nout={}\n", config.seed, quoted(out)) + lfr_keys(config);
}

std::string run_manifest(const ExperimentConfig& config, const std::filesystem::path& out) {
  return "[run]\n" + experiment_keys(config, out);
}

std::string sweep_manifest(const ExperimentConfig& base, SweepAxis axis,
                           const std::vector<std::string>& values, std::size_t seeds,
                           const std::filesystem::path& out) {
  std::string list;
  for (const std::string& v : values) list += (list.empty() ? "\"" : ",\"") + v + "\"";
  return "[sweep]\n" + experiment_keys(base, out) +
         fmt::format("axis=\"{}\"\nvalues=[{}]\nseeds={}\n", to_string(axis), list, seeds);
}

std::string eval_manifest(const std::filesystem::path& predicted, const std::filesystem::path& truth,
                          const std::filesystem::path& out) {
  return fmt::format("[eval]\npred={}\ntruth={}\nout={}\n", quoted(predicted), quoted(truth),
                     quoted(out));
}

void cmd_generate(const LfrConfig& config, const std::filesystem::path& out) {
  config.validate();
  prepare_output(out);
  const DynamicNetwork network = generate_dynamic_lfr(config);
  write_file(out / "network.txt", [&](std::ostream& os) { write_network(os, network); });
  write_file(out / "truth.txt",
             [&](std::ostream& os) { write_partitions(os, *network.ground_truth_sequence()); });
  write_manifest(out, generate_manifest(config, out));
}

RunResult cmd_run(const ExperimentConfig& config, const std::filesystem::path& out) {
  config.validate();
  prepare_output(out);
  const DynamicNetwork network = load_dataset(config);
  RunResult result = run_experiment(config, network);

  write_file(out / "partitions.txt",
             [&](std::ostream& os) { write_partitions(os, result.partitions); });
  if (result.metrics) {
    write_file(out / "metrics.csv", [&](std::ostream& os) { write_metrics_csv(os, *result.metrics); });
  }
  if (network.has_ground_truth()) {
    write_file(out / "truth.txt",
               [&](std::ostream& os) { write_partitions(os, *network.ground_truth_sequence()); });
  }
  write_file(out / "train_log.csv",
             [&](std::ostream& os) { write_training_log(os, result.training.log); });
  write_file(out / "embeddings.txt",
             [&](std::ostream& os) { write_embeddings(os, result.training.embeddings); });
  write_manifest(out, run_manifest(config, out));
  return result;
}

SweepAxis parse_axis(std::string_view name) {
  if (name == "mu") return SweepAxis::Mu;
  if (name == "size") return SweepAxis::Size;
  if (name == "method") return SweepAxis::Method;
  if (name == "ablation") return SweepAxis::Ablation;
  throw std::invalid_argument(
      fmt::format("unknown sweep axis '{}' (expected mu, size, method, ablation)", name));
}

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::Mu: return "mu";
    case SweepAxis::Size: return "size";
    case SweepAxis::Method: return "method";
    case SweepAxis::Ablation: return "ablation";
  }
  return "mu";
}

std::vector<std::string> default_sweep_values(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::Mu: return {"0.1", "0.2", "0.3", "0.4", "0.5", "0.6", "0.7", "0.8"};
    case SweepAxis::Size: return {"100", "200", "400"};
    case SweepAxis::Method: return {"som", "kmeans"};
    case SweepAxis::Ablation: return {"full", "gcn_gru", "gcn_only", "gru_only"};
  }
  return {};
}

ExperimentConfig apply_sweep_value(const ExperimentConfig& base, SweepAxis axis,
                                   const std::string& value) {
  ExperimentConfig c = base;
  auto number = [&value, axis]() {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != value.size()) {
      throw std::invalid_argument(
          fmt::format("sweep value '{}' is not a number for axis {}", value, to_string(axis)));
    }
    return x;
  };
  switch (axis) {
    case SweepAxis::Mu:
    case SweepAxis::Size:
      if (!c.lfr) throw std::invalid_argument("mu and size sweeps need an LFR dataset");
      if (axis == SweepAxis::Mu) {
        c.lfr->mu = number();
      } else {
        const double n = number();
        if (n < 2 || n != std::floor(n)) {
          throw std::invalid_argument(fmt::format("sweep size '{}' is not a node count", value));
        }
        c.lfr->nodes = static_cast<std::size_t>(n);
      }
      break;
    case SweepAxis::Method:
      c.clustering.method = parse_method(value);
      break;
    case SweepAxis::Ablation:
      c.model.mode = parse_ablation(value);
      break;
  }
  c.validate();
  return c;
}

std::vector<SweepRow> cmd_sweep(const ExperimentConfig& base, SweepAxis axis,
                                const std::vector<std::string>& values, std::size_t seeds,
                                const std::filesystem::path& out) {
  if (seeds < 3) throw std::invalid_argument("sweep: at least 3 seeds are required");
  if (values.empty()) throw std::invalid_argument("sweep: no values to sweep");
  std::vector<ExperimentConfig> points;
  for (const std::string& v : values) points.push_back(apply_sweep_value(base, axis, v));
  prepare_output(out);

  std::vector<SweepRow> rows;
  for (std::size_t p = 0; p < points.size(); ++p) {
    std::vector<MetricValues> per_seed;
    for (std::size_t s = 0; s < seeds; ++s) {
      ExperimentConfig c = points[p];
      c.seed = base.seed + s;
      if (c.lfr) c.lfr->seed = c.seed;
      const auto dir = out / fmt::format("{}_{}", to_string(axis), values[p]) / fmt::format("seed_{}", c.seed);
      const RunResult r = cmd_run(c, dir);
      if (!r.metrics) throw std::invalid_argument("sweep: the dataset has no ground truth to score");
      per_seed.push_back(r.metrics->mean);
    }

    SweepRow row{values[p], seeds, {}, {}};
    const double n = static_cast<double>(seeds);
    auto fields = [](MetricValues& m) {
      return std::array<double*, 4>{&m.purity, &m.nmi, &m.homogeneity, &m.completeness};
    };
    for (MetricValues m : per_seed) {
      for (std::size_t f = 0; f < 4; ++f) *fields(row.mean)[f] += *fields(m)[f] / n;
    }
    for (MetricValues m : per_seed) {
      for (std::size_t f = 0; f < 4; ++f) {
        const double d = *fields(m)[f] - *fields(row.mean)[f];
        *fields(row.stddev)[f] += d * d / (n - 1.0);
      }
    }
    for (std::size_t f = 0; f < 4; ++f) *fields(row.stddev)[f] = std::sqrt(*fields(row.stddev)[f]);
    rows.push_back(row);
  }

  write_file(out / "sweep.csv", [&](std::ostream& os) { write_sweep_csv(os, axis, rows); });
  write_manifest(out, sweep_manifest(base, axis, values, seeds, out));
  return rows;
}

void write_sweep_csv(std::ostream& out, SweepAxis axis, const std::vector<SweepRow>& rows) {
  out << to_string(axis)
      << ",seeds,purity_mean,purity_std,nmi_mean,nmi_std,homogeneity_mean,homogeneity_std,"
         "completeness_mean,completeness_std\n";
  for (const SweepRow& r : rows) {
    out << fmt::format("{},{},{:.12f},{:.12f},{:.12f},{:.12f},{:.12f},{:.12f},{:.12f},{:.12f}\n",
                       r.value, r.seeds, r.mean.purity, r.stddev.purity, r.mean.nmi, r.stddev.nmi,
                       r.mean.homogeneity, r.stddev.homogeneity, r.mean.completeness,
                       r.stddev.completeness);
  }
}

SequenceReport cmd_eval(const std::filesystem::path& predicted, const std::filesystem::path& truth,
                        const std::filesystem::path& out) {
  const auto truth_labels = load_partitions(truth);
  if (truth_labels.empty()) throw std::invalid_argument("eval: ground-truth file has no snapshots");
  const auto predicted_labels = load_partitions(predicted);
  for (std::size_t t = 0; t < std::min(predicted_labels.size(), truth_labels.size()); ++t) {
    if (predicted_labels[t].size() != truth_labels[t].size()) {
      throw std::invalid_argument(fmt::format(
          "eval: snapshot {} labels {} nodes in '{}' but {} nodes in '{}'", t + 1,
          predicted_labels[t].size(), predicted.string(), truth_labels[t].size(), truth.string()));
    }
  }
  SequenceReport report = evaluate_sequence(predicted_labels, truth_labels);
  if (!out.empty()) {
    prepare_output(out);
    write_file(out / "metrics.csv", [&](std::ostream& os) { write_metrics_csv(os, report); });
    write_manifest(out, eval_manifest(predicted, truth, out));
  }
  return report;
}

}  // namespace gtenn
