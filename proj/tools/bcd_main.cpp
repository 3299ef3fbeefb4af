// Command-line front end: dataset generation, training suites, plots and
// gradient checks. Exit codes: 0 success, 1 usage error, 2 numeric failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "bcd/experiment.hpp"
#include "bcd/io.hpp"
#include "bcd/plot.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GenerateArgs {
  int d = 6, obs_dim = 10;
  double er = 2.0, sigma = 0.1;
  long n_obs = 0, n_int = 0;
  std::string node_mode = "single", value_mode = "fixed";
  double value = 100.0, lo = -10.0, hi = 10.0;
  int sets = 20;
  std::uint64_t seed = 0;
  std::string out = "dataset";
};

struct TrainArgs {
  std::string scenario;
  std::string data_dir;
  long steps = 5000;
  double lr = 0.002;
  int seeds = 20;
  bool supervised = false;
  std::string mask = "full";
  std::string out = "runs";
  int jobs = static_cast<int>(std::thread::hardware_concurrency());
  // custom-scenario knobs
  int d = 6, obs_dim = 10;
  double er = 2.0, sigma = 0.1;
  long n_obs = 0, n_int = 0;
  std::string node_mode = "single", value_mode = "fixed";
  double value = 100.0, lo = -10.0, hi = 10.0;
  int sets = 20;
  double kl_weight = 1.0;
  long batch_size = 0, eval_every = 50;
  std::vector<long> int_budgets;
};

struct PlotArgs {
  std::string in;
  std::string metrics = "eshd,auroc,mse_L,kl";
  std::string format = "svg";
};

struct CheckGradArgs {
  int d = 3, obs_dim = 4;
  bool supervised = false;
  double h = 1e-5;
  std::uint64_t seed = 0;
};

bcd::ValueDraw parse_value(const std::string& mode, double value, double lo,
                           double hi) {
  if (mode == "fixed") return bcd::ValueDraw::fixed(value);
  if (mode == "uniform") return bcd::ValueDraw::uniform(lo, hi);
  throw CLI::ValidationError("--value-mode", "must be fixed or uniform");
}

bcd::NodeMode parse_node_mode(const std::string& mode) {
  if (mode == "single") return bcd::NodeMode::Single;
  if (mode == "multi") return bcd::NodeMode::Multi;
  throw CLI::ValidationError("--node-mode", "must be single or multi");
}

int cmd_generate(const GenerateArgs& args) {
  bcd::ExperimentConfig cfg;
  cfg.d = args.d;
  cfg.obs_dim = args.obs_dim;
  cfg.er_edges_per_node = args.er;
  cfg.sigma_gt = args.sigma;
  cfg.n_obs = args.n_obs;
  cfg.n_int = args.n_int;
  cfg.node_mode = parse_node_mode(args.node_mode);
  cfg.value = parse_value(args.value_mode, args.value, args.lo, args.hi);
  cfg.sets = args.sets;

  const int seed = static_cast<int>(args.seed);
  const bcd::GroundTruthScm scm = bcd::build_run_scm(cfg, seed);
  const bcd::Dataset ds = bcd::build_run_dataset(cfg, seed, scm);

  json manifest;
  manifest["d"] = args.d;
  manifest["D"] = args.obs_dim;
  manifest["er"] = args.er;
  manifest["sigma"] = args.sigma;
  manifest["n_obs"] = args.n_obs;
  manifest["n_int"] = args.n_int;
  manifest["node_mode"] = args.node_mode;
  manifest["value_mode"] = args.value_mode;
  manifest["value"] = args.value;
  manifest["lo"] = args.lo;
  manifest["hi"] = args.hi;
  manifest["sets"] = args.sets;
  manifest["seed"] = args.seed;
  manifest["scm"] = bcd::scm_to_json(scm);
  bcd::save_dataset(args.out, ds, manifest);
  std::cout << "wrote " << ds.rows() << " rows to " << args.out << std::endl;
  return 0;
}

int cmd_train(const TrainArgs& args) {
  bcd::ExperimentConfig cfg;
  if (!args.scenario.empty()) {
    const auto scenario = bcd::ExperimentConfig::scenario_from_name(args.scenario);
    if (!scenario) {
      std::cerr << "unknown scenario: " << args.scenario << std::endl;
      return 1;
    }
    cfg = bcd::ExperimentConfig::preset(*scenario);
  }
  if (cfg.scenario == bcd::Scenario::Custom) {
    cfg.d = args.d;
    cfg.obs_dim = args.obs_dim;
    cfg.er_edges_per_node = args.er;
    cfg.sigma_gt = args.sigma;
    cfg.n_obs = args.n_obs;
    cfg.n_int = args.n_int;
    cfg.node_mode = parse_node_mode(args.node_mode);
    cfg.value = parse_value(args.value_mode, args.value, args.lo, args.hi);
    cfg.sets = args.sets;
    cfg.supervised = args.supervised;
    cfg.kl_weight = args.kl_weight;
    cfg.batch_size = args.batch_size;
    if (args.mask == "full") {
      cfg.mask_mode = bcd::MaskMode::Full;
    } else if (args.mask == "single_edge") {
      cfg.mask_mode = bcd::MaskMode::SingleEdge;
    } else {
      std::cerr << "--mask must be full or single_edge" << std::endl;
      return 1;
    }
  }
  cfg.data_dir = args.data_dir;
  cfg.steps = args.steps;
  cfg.lr = args.lr;
  cfg.eval_every = args.eval_every;
  if (cfg.scenario == bcd::Scenario::Custom && cfg.data_dir.empty() &&
      cfg.n_obs + cfg.n_int == 0) {
    std::cerr << "custom scenario needs --data or --n-obs/--n-int" << std::endl;
    return 1;
  }

  std::vector<int> seeds;
  for (int i = 0; i < args.seeds; ++i) seeds.push_back(i);
  const int jobs = std::max(1, args.jobs);

  std::vector<bcd::SuiteResult> suites;
  if (!args.int_budgets.empty()) {
    suites = bcd::sweep_interventional(cfg, args.int_budgets, seeds, args.out,
                                       jobs);
  } else if (cfg.scenario == bcd::Scenario::Finding3Sweep) {
    suites = bcd::sweep_observational(cfg, bcd::finding3_obs_amounts(), seeds,
                                      args.out, jobs);
  } else {
    suites.push_back(bcd::run_suite(cfg, seeds, args.out, jobs));
  }

  bool numeric_failure = false;
  for (const auto& suite : suites) {
    for (const auto& run : suite.runs) {
      std::cout << "final seed " << run.seed << ":";
      if (run.completed && !run.trajectory.empty()) {
        const auto& r = run.trajectory.back();
        std::cout << " eshd=" << r.eshd << " auroc=" << r.auroc
                  << " mse_L=" << r.mse_L << " kl=" << r.kl_true_learned
                  << " mse_X=" << r.mse_X;
      } else {
        std::cout << " FAILED (" << run.abort_reason << ")";
        numeric_failure = true;
      }
      std::cout << std::endl;
    }
    if (!suite.final_values("eshd").empty())
      std::cout << "median final: eshd=" << suite.median_final("eshd")
                << " auroc=" << suite.median_final("auroc")
                << " mse_L=" << suite.median_final("mse_L")
                << " kl=" << suite.median_final("kl_true_learned") << std::endl;
  }
  return numeric_failure ? 2 : 0;
}

int cmd_plot(const PlotArgs& args) {
  if (args.format != "svg") {
    std::cerr << "--format: only svg is supported" << std::endl;
    return 1;
  }
  std::vector<std::string> wanted;
  {
    std::stringstream ss(args.metrics);
    std::string name;
    while (std::getline(ss, name, ',')) {
      if (name == "kl") name = "kl_true_learned";
      const auto& known = bcd::metric_names();
      if (std::find(known.begin(), known.end(), name) == known.end()) {
        std::cerr << "unknown metric: " << name << std::endl;
        return 1;
      }
      wanted.push_back(name);
    }
  }

  std::vector<std::vector<bcd::MetricsRecord>> trajectories;
  std::vector<fs::path> seed_dirs;
  for (const auto& entry : fs::directory_iterator(args.in))
    if (entry.is_directory() && fs::exists(entry.path() / "metrics.csv"))
      seed_dirs.push_back(entry.path());
  std::sort(seed_dirs.begin(), seed_dirs.end());
  for (const auto& dir : seed_dirs)
    trajectories.push_back(bcd::read_metrics_csv(dir / "metrics.csv"));
  if (trajectories.empty()) {
    std::cerr << "no metrics.csv found under " << args.in << std::endl;
    return 1;
  }

  for (const auto& name : wanted) {
    const bcd::PlotSeries series = bcd::aggregate_metric(trajectories, name);
    const fs::path svg = fs::path(args.in) / ("plot_" + name + ".svg");
    const fs::path csv = fs::path(args.in) / ("plot_" + name + ".csv");
    bcd::write_svg(svg, series);
    bcd::write_series_csv(csv, series);
    std::cout << "wrote " << svg.string() << std::endl;
  }
  return 0;
}

int cmd_check_grads(const CheckGradArgs& args) {
  bcd::Rng rng(bcd::derive_seed(args.seed, 0xc6ad5));
  bcd::Rng scm_rng = rng.fork(), data_rng = rng.fork(), init_rng = rng.fork(),
           frozen_rng = rng.fork();
  const bcd::GroundTruthScm scm = bcd::make_ground_truth_scm(
      args.d, args.obs_dim, std::min(2.0, (args.d - 1) / 2.0), 0.1, scm_rng);
  const bcd::Dataset ds = bcd::generate_dataset(
      scm, 8, 8, bcd::NodeMode::Single, bcd::ValueDraw::uniform(-3.0, 3.0), 2,
      data_rng);
  const bcd::PosteriorParams params =
      bcd::init_posterior(bcd::EdgeMask::full(args.d), bcd::EdgeMatrix(args.d),
                          args.d, args.obs_dim, init_rng);
  const bcd::FrozenDraws frozen =
      bcd::draw_frozen(params, ds.rows(), frozen_rng);
  const auto sup = bcd::SupervisionContext::make(scm);

  const bcd::GradReport report = bcd::check_gradients(
      params, scm.perm, ds.x, ds.mask, ds.values, frozen,
      args.supervised ? &sup : nullptr, args.h);

  json out;
  out["d"] = args.d;
  out["D"] = args.obs_dim;
  out["supervised"] = args.supervised;
  out["h"] = args.h;
  out["n_params"] = report.analytic.layout.size();
  out["max_rel_err"] = report.max_rel_err;
  out["pass"] = report.max_rel_err < 1e-4;
  json analytic = json::array(), numeric = json::array();
  for (Eigen::Index i = 0; i < report.analytic.v.size(); ++i) {
    analytic.push_back(report.analytic.v[i]);
    numeric.push_back(report.numeric.v[i]);
  }
  out["analytic"] = analytic;
  out["numeric"] = numeric;
  std::cout << out.dump(2) << std::endl;
  return report.max_rel_err < 1e-4 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian causal discovery over latent linear-Gaussian SCMs"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "Print help");  // frees -h for check-grads --h

  GenerateArgs gen;
  CLI::App* generate = app.add_subcommand("generate", "Generate a dataset directory");
  generate->set_help_flag("--help", "Print help");
  generate->add_option("--d", gen.d, "Latent dimension");
  generate->add_option("--D", gen.obs_dim, "Observed dimension");
  generate->add_option("--er", gen.er, "ER edges per node");
  generate->add_option("--sigma", gen.sigma, "Noise standard deviation");
  generate->add_option("--n-obs", gen.n_obs, "Observational sample count");
  generate->add_option("--n-int", gen.n_int, "Interventional sample count");
  generate->add_option("--node-mode", gen.node_mode, "single|multi");
  generate->add_option("--value-mode", gen.value_mode, "fixed|uniform");
  generate->add_option("--value", gen.value, "Fixed intervention value");
  generate->add_option("--lo", gen.lo, "Uniform value lower bound");
  generate->add_option("--hi", gen.hi, "Uniform value upper bound");
  generate->add_option("--sets", gen.sets, "Interventional block count");
  generate->add_option("--seed", gen.seed, "Seed");
  generate->add_option("--out", gen.out, "Output directory");

  TrainArgs tr;
  CLI::App* train = app.add_subcommand("train", "Train across seeds");
  train->set_help_flag("--help", "Print help");
  train->add_option("--scenario", tr.scenario,
                    "finding1|finding2_obs|finding2_mixed|finding3_sweep|"
                    "finding4_fixed|finding4_uniform|custom");
  train->add_option("--data", tr.data_dir, "Stored dataset directory");
  train->add_option("--steps", tr.steps, "Training steps");
  train->add_option("--lr", tr.lr, "Learning rate");
  train->add_option("--seeds", tr.seeds, "Number of seeds (0..N-1)");
  train->add_flag("--supervised", tr.supervised, "Add the joint KL loss");
  train->add_option("--mask", tr.mask, "full|single_edge");
  train->add_option("--out", tr.out, "Output root directory");
  train->add_option("--jobs", tr.jobs, "Parallel seeds");
  train->add_option("--d", tr.d, "Latent dimension");
  train->add_option("--D", tr.obs_dim, "Observed dimension");
  train->add_option("--er", tr.er, "ER edges per node");
  train->add_option("--sigma", tr.sigma, "Noise standard deviation");
  train->add_option("--n-obs", tr.n_obs, "Observational sample count");
  train->add_option("--n-int", tr.n_int, "Interventional sample count");
  train->add_option("--node-mode", tr.node_mode, "single|multi");
  train->add_option("--value-mode", tr.value_mode, "fixed|uniform");
  train->add_option("--value", tr.value, "Fixed intervention value");
  train->add_option("--lo", tr.lo, "Uniform value lower bound");
  train->add_option("--hi", tr.hi, "Uniform value upper bound");
  train->add_option("--sets", tr.sets, "Interventional block count");
  train->add_option("--kl-weight", tr.kl_weight, "Supervised KL weight");
  train->add_option("--batch-size", tr.batch_size, "0 = full dataset");
  train->add_option("--eval-every", tr.eval_every, "Metric logging period");
  train->add_option("--int-budgets", tr.int_budgets,
                    "Ascending interventional budgets (sweep)")
      ->delimiter(',');

  PlotArgs pl;
  CLI::App* plot = app.add_subcommand("plot", "Plot metric curves from a suite");
  plot->set_help_flag("--help", "Print help");
  plot->add_option("--in", pl.in, "Scenario directory with <seed>/metrics.csv")
      ->required();
  plot->add_option("--metrics", pl.metrics, "Comma list: eshd,auroc,mse_L,kl,mse_X");
  plot->add_option("--format", pl.format, "svg");

  CheckGradArgs cg;
  CLI::App* check = app.add_subcommand("check-grads", "Verify analytic gradients");
  check->set_help_flag("--help", "Print help");
  check->add_option("--d", cg.d, "Latent dimension");
  check->add_option("--D", cg.obs_dim, "Observed dimension");
  check->add_flag("--supervised", cg.supervised, "Include the KL term");
  check->add_option("--h", cg.h, "Finite-difference step");
  check->add_option("--seed", cg.seed, "Seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (generate->parsed()) return cmd_generate(gen);
    if (train->parsed()) return cmd_train(tr);
    if (plot->parsed()) return cmd_plot(pl);
    if (check->parsed()) return cmd_check_grads(cg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 1;
}
