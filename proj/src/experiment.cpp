#include "bcd/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "bcd/io.hpp"
#include "bcd/plot.hpp"

namespace bcd {

namespace {

constexpr std::uint64_t kTagScm = 0xb5c1;
constexpr std::uint64_t kTagData = 0xb5c2;
constexpr std::uint64_t kTagInit = 0xb5c3;
constexpr std::uint64_t kTagTrain = 0xb5c4;
constexpr std::uint64_t kTagMetrics = 0xb5c5;

nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["scenario"] = c.scenario_name();
  j["d"] = c.d;
  j["D"] = c.obs_dim;
  j["er_edges_per_node"] = c.er_edges_per_node;
  j["sigma_gt"] = c.sigma_gt;
  j["steps"] = c.steps;
  j["lr"] = c.lr;
  j["n_obs"] = c.n_obs;
  j["n_int"] = c.n_int;
  j["node_mode"] = c.node_mode == NodeMode::Single ? "single" : "multi";
  j["value_mode"] =
      c.value.mode == ValueDraw::Mode::Fixed ? "fixed" : "uniform";
  j["value"] = c.value.value;
  j["lo"] = c.value.lo;
  j["hi"] = c.value.hi;
  j["sets"] = c.sets;
  j["supervised"] = c.supervised;
  j["kl_weight"] = c.kl_weight;
  j["mask_mode"] = c.mask_mode == MaskMode::Full ? "full" : "single_edge";
  j["batch_size"] = c.batch_size;
  j["eval_every"] = c.eval_every;
  j["tau"] = c.tau;
  j["metric_samples"] = c.metric_samples;
  j["data_dir"] = c.data_dir;
  return j;
}

}  // namespace

ExperimentConfig ExperimentConfig::preset(Scenario scenario) {
  ExperimentConfig c;
  c.scenario = scenario;
  switch (scenario) {
    case Scenario::Finding1:
      c.supervised = true;
      c.n_obs = 600;
      c.mask_mode = MaskMode::Full;
      break;
    case Scenario::Finding2Obs:
      c.n_obs = 1800;
      c.mask_mode = MaskMode::SingleEdge;
      break;
    case Scenario::Finding2Mixed:
      c.n_obs = 900;
      c.n_int = 900;
      c.node_mode = NodeMode::Single;
      c.value = ValueDraw::fixed(100.0);
      c.mask_mode = MaskMode::SingleEdge;
      break;
    case Scenario::Finding3Sweep:
      c.n_obs = 600;  // swept over finding3_obs_amounts()
      c.mask_mode = MaskMode::Full;
      break;
    case Scenario::Finding4Fixed:
      c.n_obs = 300;
      c.n_int = 3300;
      c.node_mode = NodeMode::Multi;
      c.value = ValueDraw::fixed(100.0);
      c.mask_mode = MaskMode::Full;
      break;
    case Scenario::Finding4Uniform:
      c.n_obs = 300;
      c.n_int = 3300;
      c.node_mode = NodeMode::Multi;
      c.value = ValueDraw::uniform(-10.0, 10.0);
      c.mask_mode = MaskMode::Full;
      break;
    case Scenario::Custom:
      break;
  }
  return c;
}

std::optional<Scenario> ExperimentConfig::scenario_from_name(
    const std::string& name) {
  if (name == "finding1") return Scenario::Finding1;
  if (name == "finding2_obs") return Scenario::Finding2Obs;
  if (name == "finding2_mixed") return Scenario::Finding2Mixed;
  if (name == "finding3_sweep") return Scenario::Finding3Sweep;
  if (name == "finding4_fixed") return Scenario::Finding4Fixed;
  if (name == "finding4_uniform") return Scenario::Finding4Uniform;
  if (name == "custom") return Scenario::Custom;
  return std::nullopt;
}

std::string ExperimentConfig::scenario_name() const {
  switch (scenario) {
    case Scenario::Finding1: return "finding1";
    case Scenario::Finding2Obs: return "finding2_obs";
    case Scenario::Finding2Mixed: return "finding2_mixed";
    case Scenario::Finding3Sweep: return "finding3_sweep";
    case Scenario::Finding4Fixed: return "finding4_fixed";
    case Scenario::Finding4Uniform: return "finding4_uniform";
    case Scenario::Custom: return "custom";
  }
  return "custom";
}

const std::vector<long>& finding3_obs_amounts() {
  static const std::vector<long> amounts = {600, 1800, 3600};
  return amounts;
}

std::vector<int> default_seeds() {
  std::vector<int> seeds(20);
  for (int i = 0; i < 20; ++i) seeds[i] = i;
  return seeds;
}

GroundTruthScm build_run_scm(const ExperimentConfig& config, int seed) {
  if (!config.data_dir.empty()) {
    const auto manifest = load_dataset_manifest(config.data_dir);
    return scm_from_json(manifest.at("scm"));
  }
  Rng rng(derive_seed(static_cast<std::uint64_t>(seed), kTagScm));
  return make_ground_truth_scm(config.d, config.obs_dim,
                               config.er_edges_per_node, config.sigma_gt, rng);
}

Dataset build_run_dataset(const ExperimentConfig& config, int seed,
                          const GroundTruthScm& scm) {
  if (!config.data_dir.empty()) return load_dataset(config.data_dir);
  Rng rng(derive_seed(static_cast<std::uint64_t>(seed), kTagData));
  return generate_dataset(scm, config.n_obs, config.n_int, config.node_mode,
                          config.value, config.sets, rng);
}

Trainer::Trainer(const ExperimentConfig& config, int seed)
    : config_(config),
      seed_(seed),
      scm_(build_run_scm(config, seed)),
      dataset_(build_run_dataset(config, seed, scm_)),
      init_seed_(derive_seed(static_cast<std::uint64_t>(seed), kTagInit)),
      train_seed_(derive_seed(static_cast<std::uint64_t>(seed), kTagTrain)),
      metrics_seed_(derive_seed(static_cast<std::uint64_t>(seed), kTagMetrics)) {
  g_gt_ = binarize(scm_.adjacency(), 0.0);  // exact nonzero pattern
  if (config_.supervised)
    sup_ = SupervisionContext::make(scm_, config_.kl_weight);
}

TrainState Trainer::initial_state() const {
  const int d = scm_.latent_dim;
  const EdgeMask mask = config_.mask_mode == MaskMode::Full
                            ? EdgeMask::full(d)
                            : EdgeMask::single_edge(d);
  // In single-edge mode the non-learnable entries stay at the ground truth.
  const EdgeMatrix fixed =
      config_.mask_mode == MaskMode::Full ? EdgeMatrix(d) : scm_.edges;
  Rng rng(init_seed_);
  TrainState state;
  state.params = init_posterior(mask, fixed, d, scm_.obs_dim, rng);
  state.adam = AdamState::zeros(
      {static_cast<int>(mask.size()), d, scm_.obs_dim});
  state.step = 0;
  return state;
}

MetricsRecord Trainer::eval_metrics(const PosteriorParams& params,
                                    long step) const {
  Rng rng(derive_seed(metrics_seed_, static_cast<std::uint64_t>(step)));
  Rng r_shd = rng.fork(), r_auroc = rng.fork(), r_mse = rng.fork(),
      r_kl = rng.fork(), r_x = rng.fork();
  MetricsRecord rec;
  rec.step = step;
  rec.eshd = expected_shd(params, scm_.perm, g_gt_, config_.metric_samples,
                          config_.tau, r_shd);
  rec.auroc = edge_auroc(params, scm_.perm, g_gt_, config_.metric_samples,
                         config_.tau, r_auroc);
  rec.mse_L =
      mse_edge_matrix(params, scm_.edges, config_.metric_samples, r_mse);
  rec.kl_true_learned =
      kl_true_learned(params, scm_.perm, scm_, config_.metric_samples, r_kl);
  const FrozenDraws frozen = draw_frozen(params, dataset_.rows(), r_x);
  rec.mse_X = eval_loss(params, scm_.perm, dataset_.x, dataset_.mask,
                        dataset_.values, frozen, nullptr)
                  .mse_x;
  return rec;
}

bool Trainer::advance(TrainState* state, long to_step,
                      std::vector<MetricsRecord>* records,
                      std::string* abort_reason, long* abort_step) const {
  const long n = dataset_.rows();
  const bool full_batch = config_.batch_size <= 0 || config_.batch_size >= n;
  const SupervisionContext* sup = sup_ ? &*sup_ : nullptr;

  for (long s = state->step + 1; s <= to_step; ++s) {
    Rng step_rng(derive_seed(train_seed_, static_cast<std::uint64_t>(s)));

    StepEval eval;
    try {
      if (full_batch) {
        const FrozenDraws frozen = draw_frozen(state->params, n, step_rng);
        eval = eval_loss_and_grad(state->params, scm_.perm, dataset_.x,
                                  dataset_.mask, dataset_.values, frozen, sup);
      } else {
        std::vector<long> pool(n);
        for (long i = 0; i < n; ++i) pool[i] = i;
        for (long k = 0; k < config_.batch_size; ++k)
          std::swap(pool[k],
                    pool[step_rng.uniform_int(static_cast<int>(k),
                                              static_cast<int>(n - 1))]);
        pool.resize(config_.batch_size);
        std::sort(pool.begin(), pool.end());
        const long b = config_.batch_size;
        Eigen::MatrixXd x(b, dataset_.obs_dim());
        Eigen::MatrixXi mask(b, dataset_.latent_dim());
        Eigen::MatrixXd values(b, dataset_.latent_dim());
        for (long k = 0; k < b; ++k) {
          x.row(k) = dataset_.x.row(pool[k]);
          mask.row(k) = dataset_.mask.row(pool[k]);
          values.row(k) = dataset_.values.row(pool[k]);
        }
        const FrozenDraws frozen = draw_frozen(state->params, b, step_rng);
        eval = eval_loss_and_grad(state->params, scm_.perm, x, mask, values,
                                  frozen, sup);
      }
    } catch (const std::exception& e) {
      // Numerically degenerate parameters (for example an underflowed noise
      // scale) count as divergence, same as a non-finite loss.
      *abort_reason = std::string("non-finite step: ") + e.what();
      *abort_step = s;
      state->step = s;
      return false;
    }

    if (!std::isfinite(eval.loss.total)) {
      *abort_reason = "non-finite loss at step " + std::to_string(s);
      *abort_step = s;
      state->step = s;
      return false;
    }

    ParamVector pv = pack_params(state->params);
    optimizer_step(&pv, eval.grad, config_.lr, &state->adam);
    unpack_params(pv, &state->params);
    state->step = s;

    const bool at_eval = s % config_.eval_every == 0;
    const bool at_end = s == config_.steps && config_.steps % config_.eval_every != 0;
    if (at_eval || at_end) {
      MetricsRecord rec;
      try {
        rec = eval_metrics(state->params, s);
      } catch (const std::exception& e) {
        *abort_reason = std::string("non-finite metric: ") + e.what();
        *abort_step = s;
        return false;
      }
      if (!std::isfinite(rec.eshd) || !std::isfinite(rec.auroc) ||
          !std::isfinite(rec.mse_L) || !std::isfinite(rec.kl_true_learned) ||
          !std::isfinite(rec.mse_X)) {
        *abort_reason = "non-finite metric at step " + std::to_string(s);
        *abort_step = s;
        return false;
      }
      records->push_back(rec);
    }
  }
  return true;
}

RunResult run_training(const ExperimentConfig& config, int seed) {
  const auto t0 = std::chrono::steady_clock::now();
  const Trainer trainer(config, seed);
  RunResult result;
  result.seed = seed;
  result.final_state = trainer.initial_state();
  result.completed =
      trainer.advance(&result.final_state, config.steps, &result.trajectory,
                      &result.abort_reason, &result.abort_step);
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return result;
}

RunResult run_training_to_dir(const ExperimentConfig& config, int seed,
                              const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  const fs::path manifest_path = out_dir / "manifest.json";
  const fs::path metrics_path = out_dir / "metrics.csv";
  const fs::path checkpoint_path = out_dir / "checkpoint.json";

  if (fs::exists(manifest_path) && fs::exists(metrics_path) &&
      fs::exists(checkpoint_path)) {
    std::ifstream in(manifest_path);
    nlohmann::json manifest = nlohmann::json::parse(in);
    if (manifest.value("completed", false)) {
      RunResult result;
      result.seed = seed;
      result.completed = true;
      result.resumed_from_disk = true;
      result.trajectory = read_metrics_csv(metrics_path);
      const Checkpoint ck = load_checkpoint(checkpoint_path);
      result.final_state = {ck.params, ck.adam, ck.step};
      result.wall_seconds = manifest.value("wall_seconds", 0.0);
      return result;
    }
  }

  RunResult result = run_training(config, seed);
  fs::create_directories(out_dir);
  write_metrics_csv(metrics_path, result.trajectory);
  save_checkpoint(checkpoint_path, result.final_state.params,
                  result.final_state.adam, result.final_state.step);
  nlohmann::json manifest;
  manifest["config"] = config_to_json(config);
  manifest["seed"] = seed;
  manifest["completed"] = result.completed;
  manifest["wall_seconds"] = result.wall_seconds;
  if (!result.completed) {
    manifest["abort_step"] = result.abort_step;
    manifest["abort_reason"] = result.abort_reason;
  }
  std::ofstream out(manifest_path, std::ios::binary);
  out << manifest.dump(2) << "\n";
  return result;
}

std::vector<double> SuiteResult::final_values(const std::string& metric) const {
  std::vector<double> values;
  for (const auto& run : runs)
    if (run.completed && !run.trajectory.empty())
      values.push_back(metric_field(run.trajectory.back(), metric));
  return values;
}

double SuiteResult::median_final(const std::string& metric) const {
  const auto values = final_values(metric);
  if (values.empty())
    throw std::runtime_error("median_final: no completed runs");
  return quantile(values, 0.5);
}

SuiteResult run_suite(const ExperimentConfig& config,
                      const std::vector<int>& seeds,
                      const std::filesystem::path& out_root, int jobs) {
  const std::filesystem::path suite_dir =
      out_root.empty() ? out_root : out_root / config.scenario_name();
  return run_suite_in_dir(config, seeds, suite_dir, jobs);
}

SuiteResult run_suite_in_dir(const ExperimentConfig& config,
                             const std::vector<int>& seeds,
                             const std::filesystem::path& suite_dir,
                             int jobs) {
  if (seeds.empty()) throw std::invalid_argument("run_suite: no seeds");
  const bool to_disk = !suite_dir.empty();
  const std::filesystem::path scenario_dir = suite_dir;
  if (to_disk) std::filesystem::create_directories(scenario_dir);

  SuiteResult suite;
  suite.runs.resize(seeds.size());
  std::atomic<std::size_t> next{0};
  std::mutex io_mutex;

  const auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= seeds.size()) break;
      const int seed = seeds[i];
      RunResult result;
      try {
        result = to_disk
                     ? run_training_to_dir(config, seed,
                                           scenario_dir / std::to_string(seed))
                     : run_training(config, seed);
      } catch (const std::exception& e) {
        result.seed = seed;
        result.completed = false;
        result.abort_reason = e.what();
      }
      {
        std::lock_guard<std::mutex> lock(io_mutex);
        std::cout << config.scenario_name() << " seed " << seed << ": "
                  << (result.completed ? "done" : "FAILED") << " in "
                  << result.wall_seconds << "s";
        if (result.completed && !result.trajectory.empty())
          std::cout << " (eshd " << result.trajectory.back().eshd << ", auroc "
                    << result.trajectory.back().auroc << ")";
        if (!result.completed) std::cout << " [" << result.abort_reason << "]";
        std::cout << std::endl;
      }
      suite.runs[i] = std::move(result);
    }
  };

  const int n_threads =
      std::max(1, std::min<int>(jobs, static_cast<int>(seeds.size())));
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(n_threads));
  for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  if (to_disk) {
    std::vector<std::vector<MetricsRecord>> trajectories;
    for (const auto& run : suite.runs)
      if (!run.trajectory.empty()) trajectories.push_back(run.trajectory);
    if (!trajectories.empty())
      write_summary_csv(scenario_dir / "summary.csv", trajectories);
  }
  return suite;
}

std::vector<SuiteResult> sweep_interventional(
    const ExperimentConfig& config, const std::vector<long>& int_budgets,
    const std::vector<int>& seeds, const std::filesystem::path& out_root,
    int jobs) {
  for (std::size_t i = 1; i < int_budgets.size(); ++i)
    if (int_budgets[i] <= int_budgets[i - 1])
      throw std::invalid_argument("sweep_interventional: budgets must ascend");
  std::vector<SuiteResult> results;
  for (const long budget : int_budgets) {
    ExperimentConfig c = config;
    c.n_int = budget;
    const std::filesystem::path dir =
        out_root.empty() ? out_root
                         : out_root / config.scenario_name() /
                               ("int" + std::to_string(budget));
    results.push_back(run_suite_in_dir(c, seeds, dir, jobs));
  }
  return results;
}

std::vector<SuiteResult> sweep_observational(
    const ExperimentConfig& config, const std::vector<long>& obs_amounts,
    const std::vector<int>& seeds, const std::filesystem::path& out_root,
    int jobs) {
  std::vector<SuiteResult> results;
  for (const long amount : obs_amounts) {
    ExperimentConfig c = config;
    c.n_obs = amount;
    c.n_int = 0;
    const std::filesystem::path dir =
        out_root.empty() ? out_root
                         : out_root / config.scenario_name() /
                               ("obs" + std::to_string(amount));
    results.push_back(run_suite_in_dir(c, seeds, dir, jobs));
  }
  return results;
}

}  // namespace bcd
