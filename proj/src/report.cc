#include "fwdlearn/report.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "fwdlearn/status.h"

namespace fwdlearn {
namespace fs = std::filesystem;

namespace {

constexpr double kWidth = 720;
constexpr double kHeight = 400;
constexpr double kLeft = 80;
constexpr double kRight = 170;
constexpr double kTop = 40;
constexpr double kBottom = 50;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string Tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void Add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void Settle() {
    if (!(lo <= hi)) {
      lo = 0.0;
      hi = 1.0;
    } else if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
      const double pad = std::max(0.5, 0.1 * std::abs(hi));
      lo -= pad;
      hi += pad;
    }
  }
};

struct MetricColumn {
  const char* name;
  const char* title;
  std::optional<double> MetricsRecord::*member;
};

const MetricColumn kColumns[] = {
    {"critic_loss", "Critic loss", &MetricsRecord::critic_loss},
    {"actor_loss", "Actor loss", &MetricsRecord::actor_loss},
    {"alpha", "Entropy temperature", &MetricsRecord::alpha},
    {"supervised_mse", "Supervised loss (MSE)", &MetricsRecord::supervised_mse},
    {"rmse_rollout", "RMSE rollout metric", &MetricsRecord::rmse_rollout},
    {"mean_rollout_reward", "Mean rollout reward", &MetricsRecord::mean_rollout_reward},
    {"total_env_reward", "Total environment reward", &MetricsRecord::total_env_reward},
};

void WriteFile(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << content;
  if (!out) throw DataError("failed writing '" + path + "'");
}

// labels in order of first appearance
std::vector<std::string> Labels(const std::vector<LabeledMetrics>& metrics) {
  std::vector<std::string> out;
  for (const auto& m : metrics) {
    if (std::find(out.begin(), out.end(), m.label) == out.end()) out.push_back(m.label);
  }
  return out;
}

}  // namespace

std::string RenderLinePlot(const PlotSpec& spec) {
  Range xr;
  Range yr;
  for (const auto& s : spec.series) {
    for (double x : s.x) xr.Add(x);
    for (double y : s.y) yr.Add(y);
    for (double y : s.lower) yr.Add(y);
    for (double y : s.upper) yr.Add(y);
  }
  for (double x : spec.vertical_marks) xr.Add(x);
  xr.Settle();
  yr.Settle();
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) { return kTop + ph - (y - yr.lo) / (yr.hi - yr.lo) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << Num(kLeft + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\">" << Escape(spec.title) << "</text>\n";
  svg << "<rect x=\"" << Num(kLeft) << "\" y=\"" << Num(kTop) << "\" width=\"" << Num(pw)
      << "\" height=\"" << Num(ph) << "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = xr.lo + (xr.hi - xr.lo) * i / 4.0;
    const double fy = yr.lo + (yr.hi - yr.lo) * i / 4.0;
    svg << "<text x=\"" << Num(px(fx)) << "\" y=\"" << Num(kTop + ph + 16)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << Tick(fx) << "</text>\n";
    svg << "<text x=\"" << Num(kLeft - 6) << "\" y=\"" << Num(py(fy) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << Tick(fy)
        << "</text>\n";
    svg << "<line x1=\"" << Num(kLeft) << "\" x2=\"" << Num(kLeft + pw) << "\" y1=\""
        << Num(py(fy)) << "\" y2=\"" << Num(py(fy)) << "\" stroke=\"#eee\"/>\n";
  }
  svg << "<text x=\"" << Num(kLeft + pw / 2) << "\" y=\"" << Num(kHeight - 10)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
      << Escape(spec.x_label) << "</text>\n";
  svg << "<text x=\"16\" y=\"" << Num(kTop + ph / 2) << "\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 "
      << Num(kTop + ph / 2) << ")\">" << Escape(spec.y_label) << "</text>\n";

  for (double x : spec.vertical_marks) {
    svg << "<line class=\"mark\" x1=\"" << Num(px(x)) << "\" x2=\"" << Num(px(x))
        << "\" y1=\"" << Num(kTop) << "\" y2=\"" << Num(kTop + ph)
        << "\" stroke=\"#999\" stroke-dasharray=\"2,3\"/>\n";
  }

  for (std::size_t k = 0; k < spec.series.size(); ++k) {
    const PlotSeries& s = spec.series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    if (!s.lower.empty() && s.lower.size() == s.x.size() && s.upper.size() == s.x.size()) {
      svg << "<polygon class=\"band\" fill=\"" << color << "\" fill-opacity=\"0.2\" "
          << "stroke=\"none\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        svg << Num(px(s.x[i])) << ',' << Num(py(s.upper[i])) << ' ';
      }
      for (std::size_t i = s.x.size(); i-- > 0;) {
        svg << Num(px(s.x[i])) << ',' << Num(py(s.lower[i])) << ' ';
      }
      svg << "\"/>\n";
    }
    svg << "<polyline class=\"series\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\"" << (s.dashed ? " stroke-dasharray=\"6,3\"" : "")
        << " points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      svg << Num(px(s.x[i])) << ',' << Num(py(s.y[i])) << ' ';
    }
    svg << "\"/>\n";
    const double ly = kTop + 14 + 18 * static_cast<double>(k);
    svg << "<line x1=\"" << Num(kLeft + pw + 12) << "\" x2=\"" << Num(kLeft + pw + 36)
        << "\" y1=\"" << Num(ly) << "\" y2=\"" << Num(ly) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"" << (s.dashed ? " stroke-dasharray=\"6,3\"" : "")
        << "/>\n";
    svg << "<text x=\"" << Num(kLeft + pw + 42) << "\" y=\"" << Num(ly + 4)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << Escape(s.name)
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

BandCurve AggregateRuns(const std::vector<const std::vector<MetricsRecord>*>& runs,
                        std::optional<double> MetricsRecord::*column) {
  std::map<int, std::vector<double>> by_round;
  for (const auto* run : runs) {
    for (const auto& rec : *run) {
      if (rec.*column) by_round[rec.round].push_back(*(rec.*column));
    }
  }
  BandCurve curve;
  for (const auto& [round, values] : by_round) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size());
    curve.round.push_back(round);
    curve.mean.push_back(mean);
    curve.std_dev.push_back(std::sqrt(var));
  }
  return curve;
}

std::vector<std::string> RenderReport(const std::vector<LabeledMetrics>& metrics,
                                      const std::vector<LabeledRollouts>& rollouts,
                                      const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) {
    throw ConfigError("cannot create report directory '" + out_dir + "'");
  }
  std::vector<std::string> written;
  const std::vector<std::string> labels = Labels(metrics);
  std::ostringstream summary;
  summary << "runs: " << metrics.size() << "\n";

  for (const auto& column : kColumns) {
    PlotSpec spec{column.title, "round", column.name, {}, {}};
    for (const auto& label : labels) {
      std::vector<const std::vector<MetricsRecord>*> runs;
      for (const auto& m : metrics) {
        if (m.label == label) runs.push_back(&m.records);
      }
      const BandCurve curve = AggregateRuns(runs, column.member);
      if (curve.round.empty()) continue;
      PlotSeries s;
      s.name = label + " (n=" + std::to_string(runs.size()) + ")";
      s.x = curve.round;
      s.y = curve.mean;
      if (runs.size() > 1) {
        for (std::size_t i = 0; i < curve.mean.size(); ++i) {
          s.lower.push_back(curve.mean[i] - curve.std_dev[i]);
          s.upper.push_back(curve.mean[i] + curve.std_dev[i]);
        }
      }
      spec.series.push_back(std::move(s));
    }
    const std::string path = (fs::path(out_dir) / (std::string(column.name) + ".svg")).string();
    WriteFile(path, RenderLinePlot(spec));
    written.push_back(path);
  }

  for (const auto& label : labels) {
    std::vector<const std::vector<MetricsRecord>*> runs;
    for (const auto& m : metrics) {
      if (m.label == label) runs.push_back(&m.records);
    }
    summary << "\n[" << label << "] runs=" << runs.size() << "\n";
    for (const auto& column : kColumns) {
      const BandCurve curve = AggregateRuns(runs, column.member);
      if (curve.round.empty()) continue;
      summary << "  " << column.name << " at round " << curve.round.back() << ": "
              << Tick(curve.mean.back()) << " +- " << Tick(curve.std_dev.back()) << "\n";
    }
  }

  if (!rollouts.empty()) {
    PlotSpec spec{"RMSE by rollout length", "h", "rmse_rollout", {}, {}};
    summary << "\nrollout lengths\n";
    for (const auto& table : rollouts) {
      PlotSeries s;
      s.name = table.label;
      summary << "  [" << table.label << "]\n";
      for (const auto& row : table.rows) {
        summary << "    h=" << row.h << " n=" << row.n_episodes << " rmse="
                << (row.mean_rmse ? Tick(*row.mean_rmse) : std::string("-"))
                << " reward="
                << (row.mean_reward ? Tick(*row.mean_reward) : std::string("-")) << "\n";
        if (!row.mean_rmse) continue;
        s.x.push_back(row.h);
        s.y.push_back(*row.mean_rmse);
        const double sd = row.std_rmse.value_or(0.0);
        s.lower.push_back(*row.mean_rmse - sd);
        s.upper.push_back(*row.mean_rmse + sd);
      }
      spec.series.push_back(std::move(s));
    }
    const std::string path = (fs::path(out_dir) / "rollout_rmse.svg").string();
    WriteFile(path, RenderLinePlot(spec));
    written.push_back(path);
  }

  const std::string summary_path = (fs::path(out_dir) / "summary.txt").string();
  WriteFile(summary_path, summary.str());
  written.push_back(summary_path);
  return written;
}

std::string RenderOverlay(const RolloutRun& run, const std::vector<std::string>& dim_names,
                          const std::string& title) {
  const Eigen::Index dims = run.truth.cols();
  std::ostringstream svg;
  const double total_height = kHeight * static_cast<double>(std::max<Eigen::Index>(dims, 1));
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << total_height << "\">\n";
  std::vector<double> marks;
  for (int end : run.rollout_ends) marks.push_back(end + 1);
  for (Eigen::Index d = 0; d < std::max<Eigen::Index>(dims, 1); ++d) {
    const std::string name = d < static_cast<Eigen::Index>(dim_names.size())
                                 ? dim_names[d]
                                 : "dim " + std::to_string(d);
    PlotSpec spec{title + ": " + name, "step", name, {}, marks};
    if (d < dims) {
      PlotSeries truth{"true", {}, {}, {}, {}, false};
      PlotSeries predicted{"predicted", {}, {}, {}, {}, true};
      for (Eigen::Index t = 0; t < run.truth.rows(); ++t) {
        truth.x.push_back(static_cast<double>(t + 1));
        truth.y.push_back(run.truth(t, d));
        predicted.x.push_back(static_cast<double>(t + 1));
        predicted.y.push_back(run.predicted(t, d));
      }
      spec.series = {std::move(truth), std::move(predicted)};
    }
    svg << "<g transform=\"translate(0," << Num(kHeight * static_cast<double>(d)) << ")\">\n"
        << RenderLinePlot(spec) << "</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace fwdlearn
