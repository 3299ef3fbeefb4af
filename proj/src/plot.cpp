#include "bcd/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "bcd/io.hpp"

namespace bcd {

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names = {"eshd", "auroc", "mse_L",
                                                 "kl_true_learned", "mse_X"};
  return names;
}

double metric_field(const MetricsRecord& r, const std::string& name) {
  if (name == "eshd") return r.eshd;
  if (name == "auroc") return r.auroc;
  if (name == "mse_L") return r.mse_L;
  if (name == "kl_true_learned") return r.kl_true_learned;
  if (name == "mse_X") return r.mse_X;
  throw std::invalid_argument("unknown metric: " + name);
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile: empty sample");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

PlotSeries aggregate_metric(
    const std::vector<std::vector<MetricsRecord>>& trajectories,
    const std::string& metric) {
  std::map<long, std::vector<double>> by_step;
  for (const auto& traj : trajectories)
    for (const auto& rec : traj)
      by_step[rec.step].push_back(metric_field(rec, metric));

  PlotSeries series;
  series.name = metric;
  for (const auto& [step, values] : by_step) {
    series.x.push_back(static_cast<double>(step));
    series.y_median.push_back(quantile(values, 0.5));
    series.y_q1.push_back(quantile(values, 0.25));
    series.y_q3.push_back(quantile(values, 0.75));
  }
  return series;
}

void write_summary_csv(
    const std::filesystem::path& path,
    const std::vector<std::vector<MetricsRecord>>& trajectories) {
  std::vector<PlotSeries> all;
  for (const auto& name : metric_names())
    all.push_back(aggregate_metric(trajectories, name));

  std::ostringstream out;
  out << "step";
  for (const auto& name : metric_names())
    out << "," << name << "_median," << name << "_q1," << name << "_q3";
  out << "\n";
  const std::size_t n_steps = all.empty() ? 0 : all[0].x.size();
  for (std::size_t i = 0; i < n_steps; ++i) {
    out << static_cast<long>(all[0].x[i]);
    for (const auto& series : all)
      out << "," << format_double(series.y_median[i]) << ","
          << format_double(series.y_q1[i]) << ","
          << format_double(series.y_q3[i]);
    out << "\n";
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << out.str();
}

namespace {

std::string fmt_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

void write_svg(const std::filesystem::path& path, const PlotSeries& series) {
  if (series.x.empty()) throw std::invalid_argument("write_svg: empty series");
  const double width = 640, height = 420;
  const double ml = 74, mr = 20, mt = 42, mb = 52;
  const double pw = width - ml - mr, ph = height - mt - mb;

  double x_min = series.x.front(), x_max = series.x.back();
  double y_min = series.y_q1[0], y_max = series.y_q3[0];
  for (std::size_t i = 0; i < series.x.size(); ++i) {
    y_min = std::min({y_min, series.y_q1[i], series.y_median[i]});
    y_max = std::max({y_max, series.y_q3[i], series.y_median[i]});
  }
  if (x_max == x_min) x_max = x_min + 1.0;
  if (y_max == y_min) {
    y_min -= 1.0;
    y_max += 1.0;
  }
  const double y_pad = 0.05 * (y_max - y_min);
  y_min -= y_pad;
  y_max += y_pad;

  const auto sx = [&](double v) { return ml + (v - x_min) / (x_max - x_min) * pw; };
  const auto sy = [&](double v) { return mt + (y_max - v) / (y_max - y_min) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
      << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\">" << series.name
      << "</text>\n";

  // interquartile band: q1 forward, q3 backward
  svg << "<path d=\"M";
  for (std::size_t i = 0; i < series.x.size(); ++i)
    svg << (i ? " L" : "") << sx(series.x[i]) << " " << sy(series.y_q1[i]);
  for (std::size_t i = series.x.size(); i-- > 0;)
    svg << " L" << sx(series.x[i]) << " " << sy(series.y_q3[i]);
  svg << " Z\" fill=\"#4682b4\" fill-opacity=\"0.25\" stroke=\"none\"/>\n";

  svg << "<polyline fill=\"none\" stroke=\"#4682b4\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < series.x.size(); ++i)
    svg << sx(series.x[i]) << "," << sy(series.y_median[i]) << " ";
  svg << "\"/>\n";

  // axes
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw
      << "\" y2=\"" << mt + ph << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
      << "\" y2=\"" << mt + ph << "\" stroke=\"black\"/>\n";
  const int n_ticks = 5;
  for (int t = 0; t <= n_ticks; ++t) {
    const double fx = x_min + (x_max - x_min) * t / n_ticks;
    const double fy = y_min + (y_max - y_min) * t / n_ticks;
    svg << "<line x1=\"" << sx(fx) << "\" y1=\"" << mt + ph << "\" x2=\""
        << sx(fx) << "\" y2=\"" << mt + ph + 5 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << sx(fx) << "\" y=\"" << mt + ph + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"11\">" << fmt_tick(fx) << "</text>\n";
    svg << "<line x1=\"" << ml - 5 << "\" y1=\"" << sy(fy) << "\" x2=\"" << ml
        << "\" y2=\"" << sy(fy) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << ml - 8 << "\" y=\"" << sy(fy) + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
        << "font-size=\"11\">" << fmt_tick(fy) << "</text>\n";
  }
  svg << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"13\">step</text>\n";
  svg << "<text x=\"18\" y=\"" << mt + ph / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
      << "transform=\"rotate(-90 18 " << mt + ph / 2 << ")\">" << series.name
      << "</text>\n";
  svg << "</svg>\n";

  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << svg.str();
}

void write_series_csv(const std::filesystem::path& path,
                      const PlotSeries& series) {
  std::ostringstream out;
  out << "step,median,q1,q3\n";
  for (std::size_t i = 0; i < series.x.size(); ++i)
    out << static_cast<long>(series.x[i]) << ","
        << format_double(series.y_median[i]) << ","
        << format_double(series.y_q1[i]) << ","
        << format_double(series.y_q3[i]) << "\n";
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << out.str();
}

}  // namespace bcd
