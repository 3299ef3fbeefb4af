#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "bcd/plot.hpp"

using namespace bcd;
namespace fs = std::filesystem;

namespace {

std::vector<MetricsRecord> make_trajectory(std::uint64_t seed, int n_rows) {
  Rng rng(seed);
  std::vector<MetricsRecord> traj;
  for (int t = 0; t < n_rows; ++t) {
    MetricsRecord r;
    r.step = 50 * (t + 1);
    r.eshd = rng.uniform(0, 12);
    r.auroc = rng.uniform();
    r.mse_L = rng.uniform(0, 2);
    r.kl_true_learned = rng.uniform(0, 10);
    r.mse_X = rng.uniform(0, 1);
    traj.push_back(r);
  }
  return traj;
}

}  // namespace

TEST_SUITE("plot") {

TEST_CASE("quantile: linear interpolation on small samples") {
  CHECK(quantile({3.0}, 0.5) == 3.0);
  CHECK(quantile({1.0, 3.0}, 0.5) == 2.0);
  CHECK(quantile({1.0, 2.0, 10.0}, 0.5) == 2.0);
  CHECK(quantile({1.0, 2.0, 3.0, 4.0}, 0.25) == 1.75);
  CHECK(quantile({4.0, 1.0, 3.0, 2.0}, 0.75) == 3.25);
  CHECK(quantile({5.0, 1.0}, 0.0) == 1.0);
  CHECK(quantile({5.0, 1.0}, 1.0) == 5.0);
}

TEST_CASE("aggregate: single trajectory collapses the band onto the line") {
  const auto traj = make_trajectory(1, 10);
  const PlotSeries series = aggregate_metric({traj}, "eshd");
  REQUIRE(series.x.size() == 10);
  for (std::size_t i = 0; i < series.x.size(); ++i) {
    CHECK(series.y_q1[i] == series.y_median[i]);
    CHECK(series.y_q3[i] == series.y_median[i]);
    CHECK(series.y_median[i] == traj[i].eshd);
  }
}

TEST_CASE("aggregate: band ordering holds pointwise") {
  std::vector<std::vector<MetricsRecord>> trajectories;
  for (std::uint64_t s = 0; s < 9; ++s)
    trajectories.push_back(make_trajectory(s, 12));
  for (const auto& name : metric_names()) {
    const PlotSeries series = aggregate_metric(trajectories, name);
    for (std::size_t i = 0; i < series.x.size(); ++i) {
      CHECK(series.y_q1[i] <= series.y_median[i]);
      CHECK(series.y_median[i] <= series.y_q3[i]);
    }
  }
}

TEST_CASE("aggregate: unknown metric throws") {
  CHECK_THROWS_AS(aggregate_metric({make_trajectory(1, 3)}, "nope"),
                  std::invalid_argument);
}

TEST_CASE("svg and series csv are written and consistent") {
  const fs::path dir = fs::temp_directory_path() / "bcd_plot_test";
  fs::remove_all(dir);
  fs::create_directories(dir);

  std::vector<std::vector<MetricsRecord>> trajectories;
  for (std::uint64_t s = 0; s < 5; ++s)
    trajectories.push_back(make_trajectory(s, 8));
  const PlotSeries series = aggregate_metric(trajectories, "auroc");
  write_svg(dir / "auroc.svg", series);
  write_series_csv(dir / "auroc.csv", series);

  std::ifstream svg(dir / "auroc.svg");
  std::stringstream buf;
  buf << svg.rdbuf();
  const std::string text = buf.str();
  CHECK(text.find("<svg") != std::string::npos);
  CHECK(text.find("polyline") != std::string::npos);
  CHECK(text.find("step") != std::string::npos);
  CHECK(text.find("auroc") != std::string::npos);

  std::ifstream csv(dir / "auroc.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "step,median,q1,q3");
  int rows = 0;
  std::string line;
  while (std::getline(csv, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 8);
}

}  // TEST_SUITE
