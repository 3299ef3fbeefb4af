#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bcd/gradient.hpp"
#include "bcd/metrics.hpp"
#include "bcd/posterior.hpp"
#include "bcd/sampler.hpp"

namespace bcd {

enum class Scenario {
  Finding1,
  Finding2Obs,
  Finding2Mixed,
  Finding3Sweep,
  Finding4Fixed,
  Finding4Uniform,
  Custom,
};

enum class MaskMode { Full, SingleEdge };

struct ExperimentConfig {
  Scenario scenario = Scenario::Custom;
  int d = 6;
  int obs_dim = 10;
  double er_edges_per_node = 2.0;
  double sigma_gt = 0.1;
  long steps = 5000;
  double lr = 0.002;
  long n_obs = 0;
  long n_int = 0;
  NodeMode node_mode = NodeMode::Single;
  ValueDraw value = ValueDraw::fixed(100.0);
  int sets = 20;
  bool supervised = false;
  double kl_weight = 1.0;
  MaskMode mask_mode = MaskMode::Full;
  long batch_size = 0;  // 0 = full dataset
  long eval_every = 50;
  double tau = 0.3;
  int metric_samples = 64;
  std::string data_dir;  // when set, train on this stored dataset

  static ExperimentConfig preset(Scenario scenario);
  static std::optional<Scenario> scenario_from_name(const std::string& name);
  std::string scenario_name() const;
};

/// Observational amounts swept by the finding3 scenario.
const std::vector<long>& finding3_obs_amounts();

std::vector<int> default_seeds();  // 0..19

/// Ground truth and dataset are functions of (config, seed) alone.
GroundTruthScm build_run_scm(const ExperimentConfig& config, int seed);
Dataset build_run_dataset(const ExperimentConfig& config, int seed,
                          const GroundTruthScm& scm);

struct TrainState {
  PosteriorParams params;
  AdamState adam;
  long step = 0;
};

/// Owns one run's ground truth, dataset and derived seeds; advances the
/// training state step by step. Noise at step s depends only on (seed, s),
/// so training continued from a checkpoint is bitwise identical to an
/// uninterrupted run.
class Trainer {
 public:
  Trainer(const ExperimentConfig& config, int seed);

  const ExperimentConfig& config() const { return config_; }
  const GroundTruthScm& scm() const { return scm_; }
  const Dataset& dataset() const { return dataset_; }

  TrainState initial_state() const;

  /// Runs steps (state->step, to_step]; appends metric records at each
  /// eval point. Returns false when a non-finite loss or metric aborts the
  /// run, with the diagnostics filled in.
  bool advance(TrainState* state, long to_step,
               std::vector<MetricsRecord>* records, std::string* abort_reason,
               long* abort_step) const;

  MetricsRecord eval_metrics(const PosteriorParams& params, long step) const;

 private:
  ExperimentConfig config_;
  int seed_;
  GroundTruthScm scm_;
  Dataset dataset_;
  BinaryGraph g_gt_;
  std::optional<SupervisionContext> sup_;
  std::uint64_t init_seed_, train_seed_, metrics_seed_;
};

struct RunResult {
  int seed = 0;
  bool completed = false;
  long abort_step = -1;
  std::string abort_reason;
  std::vector<MetricsRecord> trajectory;
  TrainState final_state;
  double wall_seconds = 0.0;
  bool resumed_from_disk = false;
};

/// One full run in memory.
RunResult run_training(const ExperimentConfig& config, int seed);

/// Writes metrics.csv, checkpoint.json and manifest.json under out_dir.
/// A directory whose manifest says completed = true is returned as-is.
RunResult run_training_to_dir(const ExperimentConfig& config, int seed,
                              const std::filesystem::path& out_dir);

struct SuiteResult {
  std::vector<RunResult> runs;

  /// Final-row values of one metric across completed runs.
  std::vector<double> final_values(const std::string& metric) const;
  double median_final(const std::string& metric) const;
};

/// Independent runs across seeds, in parallel up to `jobs` threads. With a
/// non-empty out_root, per-seed files land in out_root/<scenario>/<seed>/
/// and a summary.csv is written next to them; completed seeds found on disk
/// are not recomputed.
SuiteResult run_suite(const ExperimentConfig& config,
                      const std::vector<int>& seeds,
                      const std::filesystem::path& out_root, int jobs = 1);

/// Same, but with the suite directory given exactly (used by the sweeps).
SuiteResult run_suite_in_dir(const ExperimentConfig& config,
                             const std::vector<int>& seeds,
                             const std::filesystem::path& suite_dir,
                             int jobs = 1);

/// One retraining per interventional budget; the observational block is
/// bitwise identical across budgets for a given seed.
std::vector<SuiteResult> sweep_interventional(
    const ExperimentConfig& config, const std::vector<long>& int_budgets,
    const std::vector<int>& seeds, const std::filesystem::path& out_root,
    int jobs = 1);

/// Finding-3 variant: sweep the amount of observational data, n_int = 0.
std::vector<SuiteResult> sweep_observational(
    const ExperimentConfig& config, const std::vector<long>& obs_amounts,
    const std::vector<int>& seeds, const std::filesystem::path& out_root,
    int jobs = 1);

}  // namespace bcd
