#ifndef FWDLEARN_REPORT_H_
#define FWDLEARN_REPORT_H_

#include <optional>
#include <string>
#include <vector>

#include "fwdlearn/harness.h"
#include "fwdlearn/metrics.h"

namespace fwdlearn {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  // optional shaded band, same length as x
  std::vector<double> lower;
  std::vector<double> upper;
  bool dashed = false;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
  std::vector<double> vertical_marks;
};

// Standalone SVG line chart. Empty input still draws labelled axes.
std::string RenderLinePlot(const PlotSpec& spec);

struct LabeledMetrics {
  std::string label;
  std::vector<MetricsRecord> records;
};

struct LabeledRollouts {
  std::string label;
  std::vector<RolloutRow> rows;
};

// mean and population std across runs at every round where at least one run
// has a value
struct BandCurve {
  std::vector<double> round;
  std::vector<double> mean;
  std::vector<double> std_dev;
};
BandCurve AggregateRuns(const std::vector<const std::vector<MetricsRecord>*>& runs,
                        std::optional<double> MetricsRecord::*column);

// Panels (one SVG per metric column, runs with the same label pooled into a
// mean +-1 std band), rollout-length curves, and summary.txt.
// Returns the written file paths.
std::vector<std::string> RenderReport(const std::vector<LabeledMetrics>& metrics,
                                      const std::vector<LabeledRollouts>& rollouts,
                                      const std::string& out_dir);

// true vs predicted traces per state dimension with segment ends marked
std::string RenderOverlay(const RolloutRun& run, const std::vector<std::string>& dim_names,
                          const std::string& title);

}  // namespace fwdlearn

#endif  // FWDLEARN_REPORT_H_
