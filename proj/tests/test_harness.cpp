#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include "gtenn/harness.hpp"

using namespace gtenn;
namespace fs = std::filesystem;

namespace {

/// Fresh scratch directory, removed on destruction.
struct ScratchDir {
  fs::path path;
  explicit ScratchDir(const std::string& name)
      : path(fs::temp_directory_path() / ("gtenn_harness_" + std::to_string(::getpid()) + "_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~ScratchDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Runs the command-line tool and returns its exit status.
int cli(const std::string& args) {
  const std::string command = std::string("\"") + GTENN_CLI + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

constexpr const char* kSmallLfr =
    "--nodes 60 --snapshots 2 --avg-degree 6 --max-degree 12 --max-community 20 --mu 0.2";
constexpr const char* kFastModel = "--epochs 3 --dims 8,8";

LfrConfig small_lfr() {
  LfrConfig c;
  c.nodes = 60;
  c.snapshots = 2;
  c.avg_degree = 6;
  c.max_degree = 12;
  c.max_community = 20;
  c.mu = 0.2;
  return c;
}

ExperimentConfig small_experiment() {
  ExperimentConfig c;
  c.lfr = small_lfr();
  c.model.dims = {8, 8};
  c.train.epochs = 3;
  return c;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

}  // namespace

TEST_CASE("method, axis and ablation names parse and print") {
  CHECK(parse_method("som") == ClusterMethod::Som);
  CHECK(to_string(parse_method("kmeans")) == "kmeans");
  CHECK_THROWS_AS(parse_method("dbscan"), std::invalid_argument);
  for (const char* a : {"mu", "size", "method", "ablation"}) CHECK(to_string(parse_axis(a)) == a);
  CHECK_THROWS_AS(parse_axis("lr"), std::invalid_argument);
  CHECK(default_sweep_values(SweepAxis::Mu).size() == 8);
  CHECK(default_sweep_values(SweepAxis::Ablation).size() == 4);
}

TEST_CASE("sweep values apply to a copy of the base configuration") {
  const ExperimentConfig base = small_experiment();
  CHECK(apply_sweep_value(base, SweepAxis::Mu, "0.4").lfr->mu == 0.4);
  CHECK(apply_sweep_value(base, SweepAxis::Size, "80").lfr->nodes == 80);
  CHECK(apply_sweep_value(base, SweepAxis::Method, "kmeans").clustering.method == ClusterMethod::KMeans);
  CHECK(apply_sweep_value(base, SweepAxis::Ablation, "gru_only").model.mode == AblationMode::GruOnly);
  CHECK(base.lfr->mu == 0.2);
  CHECK_THROWS_AS(apply_sweep_value(base, SweepAxis::Mu, "high"), std::invalid_argument);
  CHECK_THROWS_AS(apply_sweep_value(base, SweepAxis::Mu, "1.5"), std::invalid_argument);
  CHECK_THROWS_AS(apply_sweep_value(base, SweepAxis::Size, "12.5"), std::invalid_argument);
}

TEST_CASE("experiment configuration needs exactly one dataset source") {
  ExperimentConfig c = small_experiment();
  CHECK_NOTHROW(c.validate());
  c.network_file = "net.txt";
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.lfr.reset();
  CHECK_NOTHROW(c.validate());
  c.network_file.clear();
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("clustering options override the SOM defaults") {
  ClusteringOptions o;
  const SomConfig d = o.som_config(200, 1);
  CHECK(d.grid_rows * d.grid_cols == 12);
  o.som_rows = 2;
  o.som_cols = 5;
  o.som_iterations = 7;
  const SomConfig c = o.som_config(200, 1);
  CHECK(c.grid_rows == 2);
  CHECK(c.grid_cols == 5);
  CHECK(c.iterations == 7);
  CHECK(c.sigma0 == doctest::Approx(0.5 * std::hypot(2.0, 5.0)));
}

TEST_CASE("generate writes a network that reloads identically") {
  ScratchDir dir("generate");
  cmd_generate(small_lfr(), dir.path);
  const DynamicNetwork loaded = load_network(dir.path / "network.txt", dir.path / "truth.txt");
  CHECK(loaded == generate_dynamic_lfr(small_lfr()));
  CHECK(fs::exists(dir.path / "manifest.ini"));
}

TEST_CASE("run writes partitions, metrics, training log and embeddings") {
  ScratchDir dir("run");
  const RunResult r = cmd_run(small_experiment(), dir.path);
  REQUIRE(r.metrics.has_value());
  CHECK(r.partitions.size() == 2);
  for (const char* f : {"partitions.txt", "metrics.csv", "truth.txt", "train_log.csv", "embeddings.txt", "manifest.ini"}) {
    CHECK(fs::exists(dir.path / f));
  }
  CHECK(load_partitions(dir.path / "partitions.txt") == r.partitions);
}

TEST_CASE("run without ground truth writes partitions and skips metrics") {
  ScratchDir dir("no_truth");
  cmd_generate(small_lfr(), dir.path / "data");
  ExperimentConfig c = small_experiment();
  c.lfr.reset();
  c.network_file = dir.path / "data" / "network.txt";
  const RunResult r = cmd_run(c, dir.path / "out");
  CHECK_FALSE(r.metrics.has_value());
  CHECK(fs::exists(dir.path / "out" / "partitions.txt"));
  CHECK_FALSE(fs::exists(dir.path / "out" / "metrics.csv"));
}

TEST_CASE("k-means without ground truth needs an explicit k") {
  ScratchDir dir("kmeans_k");
  cmd_generate(small_lfr(), dir.path / "data");
  ExperimentConfig c = small_experiment();
  c.lfr.reset();
  c.network_file = dir.path / "data" / "network.txt";
  c.clustering.method = ClusterMethod::KMeans;
  CHECK_THROWS_AS(cmd_run(c, dir.path / "out"), std::invalid_argument);
  c.clustering.k = 3;
  const RunResult r = cmd_run(c, dir.path / "out");
  for (const Labels& p : r.partitions) CHECK(*std::max_element(p.begin(), p.end()) == 2);
}

TEST_CASE("eval reproduces the metrics written by run") {
  ScratchDir dir("eval");
  cmd_run(small_experiment(), dir.path / "run");
  const SequenceReport report =
      cmd_eval(dir.path / "run" / "partitions.txt", dir.path / "run" / "truth.txt", dir.path / "eval");
  CHECK(slurp(dir.path / "eval" / "metrics.csv") == slurp(dir.path / "run" / "metrics.csv"));
  CHECK(report.per_snapshot.size() == 2);
}

TEST_CASE("eval rejects misaligned partition files") {
  ScratchDir dir("eval_bad");
  write_text(dir.path / "pred.txt", "snapshot 1\n0 0\n1 0\n");
  write_text(dir.path / "truth.txt", "snapshot 1\n0 0\n1 0\n2 1\n");
  CHECK_THROWS_AS(cmd_eval(dir.path / "pred.txt", dir.path / "truth.txt", ""), std::invalid_argument);
}

TEST_CASE("sweep aggregates at least three seeds per value") {
  ScratchDir dir("sweep");
  CHECK_THROWS_AS(cmd_sweep(small_experiment(), SweepAxis::Mu, {"0.2"}, 2, dir.path), std::invalid_argument);
  const auto rows = cmd_sweep(small_experiment(), SweepAxis::Method, {"som", "kmeans"}, 3, dir.path);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].seeds == 3);
  CHECK(rows[1].value == "kmeans");
  CHECK(rows[0].stddev.nmi >= 0.0);
  CHECK(fs::exists(dir.path / "method_som" / "seed_3" / "partitions.txt"));
  std::istringstream csv(slurp(dir.path / "sweep.csv"));
  std::string line;
  int lines = 0;
  while (std::getline(csv, line)) ++lines;
  CHECK(lines == 3);
}

TEST_CASE("sweep CSV layout") {
  std::ostringstream out;
  write_sweep_csv(out, SweepAxis::Mu, {{"0.1", 3, {1, 0.5, 0.25, 0.125}, {0, 0.1, 0, 0}}});
  CHECK(out.str() ==
        "mu,seeds,purity_mean,purity_std,nmi_mean,nmi_std,homogeneity_mean,homogeneity_std,"
        "completeness_mean,completeness_std\n"
        "0.1,3,1.000000000000,0.000000000000,0.500000000000,0.100000000000,0.250000000000,"
        "0.000000000000,0.125000000000,0.000000000000\n");
}

TEST_CASE("cli: generate, run and eval succeed and agree") {
  ScratchDir dir("cli");
  const std::string d = dir.path.string();
  REQUIRE(cli("generate --out " + d + "/g " + kSmallLfr) == 0);
  REQUIRE(cli("run --out " + d + "/r --network " + d + "/g/network.txt --truth " + d + "/g/truth.txt " +
              kFastModel) == 0);
  REQUIRE(cli("eval --pred " + d + "/r/partitions.txt --truth " + d + "/g/truth.txt --out " + d + "/e") == 0);
  CHECK(slurp(dir.path / "e" / "metrics.csv") == slurp(dir.path / "r" / "metrics.csv"));
}

TEST_CASE("cli: manifests rerun to identical outputs") {
  ScratchDir dir("cli_manifest");
  const std::string d = dir.path.string();
  REQUIRE(cli("run --out " + d + "/a " + kSmallLfr + " " + kFastModel + " --seed 4") == 0);
  // The manifest records out=<dir>; an explicit --out redirects the rerun.
  REQUIRE(cli("run --config " + d + "/a/manifest.ini --out " + d + "/b") == 0);
  CHECK(slurp(dir.path / "a" / "partitions.txt") == slurp(dir.path / "b" / "partitions.txt"));
  CHECK(slurp(dir.path / "a" / "metrics.csv") == slurp(dir.path / "b" / "metrics.csv"));

  REQUIRE(cli("generate --out " + d + "/g " + kSmallLfr) == 0);
  REQUIRE(cli("generate --config " + d + "/g/manifest.ini --out " + d + "/g2") == 0);
  CHECK(slurp(dir.path / "g" / "network.txt") == slurp(dir.path / "g2" / "network.txt"));
}

TEST_CASE("cli: validation errors exit with status 1") {
  ScratchDir dir("cli_validation");
  const std::string d = dir.path.string();
  CHECK(cli("") == 1);
  CHECK(cli("generate") == 1);
  CHECK(cli("generate --out " + d + "/x --mu 1.5") == 1);
  CHECK(cli("generate --out " + d + "/x --preset lfr9") == 1);
  CHECK(cli("run --out " + d + "/x --bogus-flag") == 1);
  CHECK(cli("run --out " + d + "/x --network " + d + "/missing.txt") == 1);
  CHECK(cli("run --out " + d + "/x --ablation partial") == 1);
  CHECK(cli("sweep --out " + d + "/x --axis mu --seeds 2") == 1);
  CHECK(cli("eval --pred " + d + "/missing.txt --truth " + d + "/missing.txt") == 1);

  write_text(dir.path / "bad.txt", "n 3 t 1\nsnapshot 1\n0 7\n");
  CHECK(cli("run --out " + d + "/x --network " + d + "/bad.txt") == 1);
}

TEST_CASE("cli: numeric failures exit with status 2") {
  ScratchDir dir("cli_runtime");
  const std::string d = dir.path.string();
  CHECK(cli("run --out " + d + "/x " + kSmallLfr + " " + kFastModel + " --optimizer sgd --lr 1e300") == 2);
}
