#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "gtenn/clustering.hpp"
#include "gtenn/graph.hpp"
#include "gtenn/lfr.hpp"
#include "gtenn/metrics.hpp"
#include "gtenn/model.hpp"
#include "gtenn/trainer.hpp"

namespace gtenn {

enum class ClusterMethod { Som, KMeans };

ClusterMethod parse_method(std::string_view name);
std::string_view to_string(ClusterMethod method);

/// How embeddings become partitions. Zero-valued SOM fields take the
/// defaults for the node count (see SomConfig::defaults_for).
struct ClusteringOptions {
  ClusterMethod method = ClusterMethod::Som;
  std::size_t som_rows = 0;
  std::size_t som_cols = 0;
  double som_alpha0 = 0.5;
  double som_sigma0 = 0.0;
  double som_sigma_end = 0.5;
  std::size_t som_iterations = 0;
  /// K-means cluster count; 0 takes the ground-truth community count of each
  /// snapshot.
  std::size_t k = 0;

  SomConfig som_config(std::size_t nodes, std::uint64_t seed) const;
};

/// Everything a run needs. The dataset is either a generated LFR benchmark
/// or a snapshot file with optional ground truth, never both.
struct ExperimentConfig {
  std::optional<LfrConfig> lfr;
  std::filesystem::path network_file;
  std::filesystem::path truth_file;
  ModelConfig model;
  TrainConfig train;
  ClusteringOptions clustering;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Generates or loads the configured dataset.
DynamicNetwork load_dataset(const ExperimentConfig& config);

struct RunResult {
  TrainResult training;
  std::vector<Labels> partitions;        // index t-1
  std::optional<SequenceReport> metrics;  // absent without ground truth
};

/// Trains the encoder on the network, clusters every snapshot and scores the
/// partitions when ground truth is present. Model, training and clustering
/// seeds are derived from config.seed.
RunResult run_experiment(const ExperimentConfig& config, const DynamicNetwork& network);

/// Clusters each snapshot's embeddings.
std::vector<Labels> cluster_embeddings(const std::vector<Matrix>& embeddings,
                                       const ClusteringOptions& options, std::uint64_t seed,
                                       const DynamicNetwork& network);

// Every command writes manifest.ini into its output directory: the command's
// options as "key=value" lines (keys are the long option names) under a
// "[<command>]" section, so `gtenn <command> --config manifest.ini` reruns it.

std::string generate_manifest(const LfrConfig& config, const std::filesystem::path& out);
std::string run_manifest(const ExperimentConfig& config, const std::filesystem::path& out);
std::string eval_manifest(const std::filesystem::path& predicted, const std::filesystem::path& truth,
                          const std::filesystem::path& out);

/// Writes network.txt, truth.txt and the manifest.
void cmd_generate(const LfrConfig& config, const std::filesystem::path& out);

/// Runs one experiment and writes partitions.txt, metrics.csv (when ground
/// truth exists), train_log.csv, embeddings.txt, truth.txt (when labeled)
/// and the manifest.
RunResult cmd_run(const ExperimentConfig& config, const std::filesystem::path& out);

enum class SweepAxis { Mu, Size, Method, Ablation };

SweepAxis parse_axis(std::string_view name);
std::string_view to_string(SweepAxis axis);

/// Values swept when none are given: mu 0.1..0.8, sizes 100/200/400, both
/// clustering methods, all four ablation modes.
std::vector<std::string> default_sweep_values(SweepAxis axis);

/// Applies one sweep value to a copy of the base configuration.
ExperimentConfig apply_sweep_value(const ExperimentConfig& base, SweepAxis axis,
                                   const std::string& value);

struct SweepRow {
  std::string value;
  std::size_t seeds = 0;
  MetricValues mean;
  MetricValues stddev;  // sample standard deviation across seeds
};

/// Runs every sweep value for `seeds` consecutive seeds starting at
/// base.seed, writing each run to its own subdirectory and the aggregate to
/// sweep.csv.
std::vector<SweepRow> cmd_sweep(const ExperimentConfig& base, SweepAxis axis,
                                const std::vector<std::string>& values, std::size_t seeds,
                                const std::filesystem::path& out);

std::string sweep_manifest(const ExperimentConfig& base, SweepAxis axis,
                           const std::vector<std::string>& values, std::size_t seeds,
                           const std::filesystem::path& out);

void write_sweep_csv(std::ostream& out, SweepAxis axis, const std::vector<SweepRow>& rows);

/// Scores a predicted partition file against a ground-truth partition file.
/// Writes metrics.csv and the manifest to `out` when it is non-empty.
SequenceReport cmd_eval(const std::filesystem::path& predicted, const std::filesystem::path& truth,
                        const std::filesystem::path& out);

/// Embeddings as "snapshot t" blocks of "node v_1 ... v_d" lines.
void write_embeddings(std::ostream& out, const std::vector<Matrix>& embeddings);

}  // namespace gtenn
