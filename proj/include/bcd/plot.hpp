#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "bcd/metrics.hpp"

namespace bcd {

/// Per-step aggregate of one metric across seeds.
struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y_median;
  std::vector<double> y_q1;
  std::vector<double> y_q3;
};

/// Metric column names in metrics.csv order.
const std::vector<std::string>& metric_names();

double metric_field(const MetricsRecord& r, const std::string& name);

/// Linear-interpolation quantile (index (n-1)p) of an unsorted sample.
double quantile(std::vector<double> values, double p);

/// Median and interquartile range per step over the trajectories that
/// contain that step.
PlotSeries aggregate_metric(
    const std::vector<std::vector<MetricsRecord>>& trajectories,
    const std::string& metric);

/// summary.csv: step plus {metric}_median,{metric}_q1,{metric}_q3 columns.
void write_summary_csv(
    const std::filesystem::path& path,
    const std::vector<std::vector<MetricsRecord>>& trajectories);

/// Median line with interquartile band, axis ticks and labels.
void write_svg(const std::filesystem::path& path, const PlotSeries& series);

/// The aggregates behind a plot: step,median,q1,q3.
void write_series_csv(const std::filesystem::path& path,
                      const PlotSeries& series);

}  // namespace bcd
