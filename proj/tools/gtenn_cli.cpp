// gtenn command-line front end: generate, run, sweep, eval.
//
// Exit codes: 0 success, 1 invalid arguments or input files, 2 runtime or
// numeric failure.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "gtenn/harness.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

/// Raw option values shared by every subcommand that builds a dataset.
struct LfrOptions {
  std::string preset;
  std::optional<std::size_t> nodes, snapshots, max_degree, min_community, max_community;
  std::optional<double> mu, avg_degree, gamma, beta, churn;

  void add_to(CLI::App& app) {
    app.add_option("--preset", preset, "Benchmark preset lfr1..lfr8 (N=1000, 9 snapshots, mu=i/10)");
    app.add_option("--nodes", nodes, "Node count N");
    app.add_option("--snapshots", snapshots, "Snapshot count");
    app.add_option("--mu", mu, "Mixing parameter in [0, 1]");
    app.add_option("--avg-degree", avg_degree, "Average degree");
    app.add_option("--max-degree", max_degree, "Maximum degree");
    app.add_option("--min-community", min_community, "Smallest community size");
    app.add_option("--max-community", max_community, "Largest community size");
    app.add_option("--gamma", gamma, "Degree power-law exponent");
    app.add_option("--beta", beta, "Community-size power-law exponent");
    app.add_option("--churn", churn, "Fraction of nodes changing community per snapshot");
  }

  bool any() const {
    return !preset.empty() || nodes || snapshots || mu || avg_degree || max_degree || min_community ||
           max_community || gamma || beta || churn;
  }

  gtenn::LfrConfig build(std::uint64_t seed) const {
    gtenn::LfrConfig c;
    if (!preset.empty()) {
      const bool ok = preset.size() == 4 && preset.rfind("lfr", 0) == 0 && preset[3] >= '1' &&
                      preset[3] <= '8';
      if (!ok) throw std::invalid_argument(fmt::format("unknown preset '{}' (expected lfr1..lfr8)", preset));
      c = gtenn::LfrConfig::preset(preset[3] - '0');
    }
    if (nodes) c.nodes = *nodes;
    if (snapshots) c.snapshots = *snapshots;
    if (mu) c.mu = *mu;
    if (avg_degree) c.avg_degree = *avg_degree;
    if (max_degree) c.max_degree = *max_degree;
    if (min_community) c.min_community = *min_community;
    if (max_community) c.max_community = *max_community;
    if (gamma) c.gamma = *gamma;
    if (beta) c.beta = *beta;
    if (churn) c.churn_fraction = *churn;
    c.seed = seed;
    c.validate();
    return c;
  }
};

/// Options of `run` and `sweep`.
struct ExperimentOptions {
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> data_seed;
  std::string out;
  std::string network;
  std::string truth;
  LfrOptions lfr;
  std::vector<std::size_t> dims{32, 32, 32};
  std::string ablation = "full";
  bool weight_features = true;
  double leaky_slope = gtenn::kLeakySlope;
  std::size_t epochs = 300;
  double lr = gtenn::TrainConfig{}.optimizer.learning_rate;
  std::string optimizer = "adam";
  double margin = 1.0;
  std::size_t negatives = 5;
  std::size_t batch_size = 0;
  std::string method = "som";
  std::size_t k = 0;
  std::size_t som_rows = 0;
  std::size_t som_cols = 0;
  double som_alpha = 0.5;
  double som_sigma = 0.0;
  double som_sigma_end = 0.5;
  std::size_t som_iterations = 0;

  void add_to(CLI::App& app) {
    app.add_option("--seed", seed, "Master seed for model, training and clustering");
    app.add_option("--data-seed", data_seed, "Seed for the generated dataset (default: --seed)");
    app.add_option("--out", out, "Output directory")->required();
    app.add_option("--network", network, "Snapshot file (instead of generating an LFR benchmark)");
    app.add_option("--truth", truth, "Ground-truth partition file for --network");
    lfr.add_to(app);
    app.add_option("--dims", dims, "Layer widths d0,d1,...,dL")->delimiter(',');
    app.add_option("--ablation", ablation, "full, gcn_gru, gcn_only or gru_only");
    app.add_flag("--weight-features,!--no-weight-features", weight_features,
                 "Let the weight GRU see a summary of the layer input");
    app.add_option("--leaky-slope", leaky_slope, "LeakyReLU negative slope");
    app.add_option("--epochs", epochs, "Training epochs");
    app.add_option("--lr", lr, "Learning rate");
    app.add_option("--optimizer", optimizer, "adam or sgd");
    app.add_option("--margin", margin, "Ranking-loss margin m");
    app.add_option("--negatives", negatives, "Negative samples per positive pair (Q)");
    app.add_option("--batch-size", batch_size, "Positive pairs per step and snapshot (0 = full batch)");
    app.add_option("--method", method, "Clustering method: som or kmeans");
    app.add_option("--k", k, "K-means cluster count (0 = ground-truth community count)");
    app.add_option("--som-rows", som_rows, "SOM grid rows (0 = default for the node count)");
    app.add_option("--som-cols", som_cols, "SOM grid columns (0 = default for the node count)");
    app.add_option("--som-alpha", som_alpha, "SOM initial learning rate");
    app.add_option("--som-sigma", som_sigma, "SOM initial neighborhood radius (0 = half the grid diagonal)");
    app.add_option("--som-sigma-end", som_sigma_end, "SOM neighborhood radius at the last iteration");
    app.add_option("--som-iterations", som_iterations, "SOM iterations (0 = 50 per node)");
  }

  gtenn::ExperimentConfig build() const {
    gtenn::ExperimentConfig c;
    c.seed = seed;
    if (!network.empty()) {
      if (lfr.any()) throw std::invalid_argument("--network cannot be combined with LFR options");
      c.network_file = network;
      c.truth_file = truth;
    } else {
      c.lfr = lfr.build(data_seed.value_or(seed));
      if (!truth.empty()) throw std::invalid_argument("--truth requires --network");
    }
    c.model.dims = dims;
    c.model.mode = gtenn::parse_ablation(ablation);
    c.model.weight_feature_term = weight_features;
    c.model.leaky_slope = leaky_slope;
    c.train.epochs = epochs;
    c.train.optimizer.learning_rate = lr;
    c.train.optimizer.kind = gtenn::parse_optimizer(optimizer);
    c.train.margin = margin;
    c.train.negatives = negatives;
    c.train.batch_size = batch_size;
    c.clustering.method = gtenn::parse_method(method);
    c.clustering.k = k;
    c.clustering.som_rows = som_rows;
    c.clustering.som_cols = som_cols;
    c.clustering.som_alpha0 = som_alpha;
    c.clustering.som_sigma0 = som_sigma;
    c.clustering.som_sigma_end = som_sigma_end;
    c.clustering.som_iterations = som_iterations;
    c.validate();
    return c;
  }
};

void print_report(const gtenn::SequenceReport& report) {
  const auto& m = report.mean;
  std::cout << fmt::format("mean over {} snapshots: purity {:.4f}  nmi {:.4f}  homogeneity {:.4f}  completeness {:.4f}\n",
                           report.per_snapshot.size(), m.purity, m.nmi, m.homogeneity, m.completeness);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic community detection with spatiotemporal graph embeddings"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from a key=value file with [command] sections");
  app.fallthrough();

  LfrOptions gen_lfr;
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  auto* generate = app.add_subcommand("generate", "Generate a dynamic LFR benchmark");
  generate->add_option("--seed", gen_seed, "Generator seed");
  generate->add_option("--out", gen_out, "Output directory")->required();
  gen_lfr.add_to(*generate);

  ExperimentOptions run_opts;
  auto* run = app.add_subcommand("run", "Train, cluster and evaluate one dataset");
  run_opts.add_to(*run);

  ExperimentOptions sweep_opts;
  std::string axis;
  std::vector<std::string> values;
  std::size_t seeds = 3;
  auto* sweep = app.add_subcommand("sweep", "Repeat runs along one axis and aggregate over seeds");
  sweep_opts.add_to(*sweep);
  sweep->add_option("--axis", axis, "mu, size, method or ablation")->required();
  sweep->add_option("--values", values, "Axis values (default: the axis' standard range)")->delimiter(',');
  sweep->add_option("--seeds", seeds, "Seeds per point (at least 3)");

  std::string eval_pred;
  std::string eval_truth;
  std::string eval_out;
  std::uint64_t eval_seed = 1;
  auto* eval = app.add_subcommand("eval", "Score a partition file against ground truth");
  eval->add_option("--pred", eval_pred, "Predicted partition file")->required();
  eval->add_option("--truth", eval_truth, "Ground-truth partition file")->required();
  eval->add_option("--out", eval_out, "Directory for metrics.csv (default: print only)");
  eval->add_option("--seed", eval_seed, "Accepted for uniformity; evaluation is deterministic");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*generate) {
      const auto config = gen_lfr.build(gen_seed);
      gtenn::cmd_generate(config, gen_out);
      std::cout << fmt::format("wrote {} nodes x {} snapshots to {}\n", config.nodes,
                               config.snapshots, gen_out);
    } else if (*run) {
      const auto result = gtenn::cmd_run(run_opts.build(), run_opts.out);
      if (result.metrics) {
        print_report(*result.metrics);
      } else {
        std::cout << "no ground truth: partitions written, metrics skipped\n";
      }
    } else if (*sweep) {
      const auto a = gtenn::parse_axis(axis);
      if (values.empty()) values = gtenn::default_sweep_values(a);
      const auto rows = gtenn::cmd_sweep(sweep_opts.build(), a, values, seeds, sweep_opts.out);
      for (const auto& r : rows) {
        std::cout << fmt::format("{}={}: nmi {:.4f} +- {:.4f}\n", axis, r.value, r.mean.nmi, r.stddev.nmi);
      }
    } else if (*eval) {
      print_report(gtenn::cmd_eval(eval_pred, eval_truth, eval_out));
    }
  } catch (const gtenn::FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
