#include "fwdlearn/metrics.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "fwdlearn/status.h"

namespace fwdlearn {
namespace {

std::vector<std::string_view> SplitCells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace

std::string FormatOptional(const std::optional<double>& value) {
  if (!value) return {};
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", *value);
  return buf;
}

std::optional<double> ParseOptional(std::string_view cell, std::string_view what) {
  if (cell.empty()) return std::nullopt;
  const std::string s(cell);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) {
    throw DataError("bad number '" + s + "' in " + std::string(what));
  }
  return v;
}

std::string FormatMetricsRow(const MetricsRecord& r) {
  std::string out = std::to_string(r.round);
  for (const auto* v : {&r.critic_loss, &r.actor_loss, &r.alpha, &r.supervised_mse,
                        &r.rmse_rollout, &r.mean_rollout_reward, &r.total_env_reward,
                        &r.wall_ms}) {
    out += ',';
    out += FormatOptional(*v);
  }
  return out;
}

MetricsRecord ParseMetricsRow(std::string_view line, int line_no) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  const std::string where = "metrics row " + std::to_string(line_no);
  const auto cells = SplitCells(line);
  if (cells.size() != 9) {
    throw DataError(where + ": expected 9 columns, found " + std::to_string(cells.size()));
  }
  MetricsRecord r;
  const auto [ptr, ec] =
      std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), r.round);
  if (ec != std::errc() || ptr != cells[0].data() + cells[0].size()) {
    throw DataError(where + ": bad round index '" + std::string(cells[0]) + "'");
  }
  std::optional<double>* fields[] = {&r.critic_loss, &r.actor_loss, &r.alpha,
                                     &r.supervised_mse, &r.rmse_rollout,
                                     &r.mean_rollout_reward, &r.total_env_reward,
                                     &r.wall_ms};
  for (int i = 0; i < 8; ++i) *fields[i] = ParseOptional(cells[i + 1], where);
  return r;
}

MetricsWriter::MetricsWriter(const std::string& path)
    : path_(path), out_(path, std::ios::trunc) {
  if (!out_) throw DataError("cannot open metrics file '" + path + "'");
  out_ << kMetricsHeader << '\n';
  out_.flush();
}

void MetricsWriter::Append(const MetricsRecord& record) {
  out_ << FormatMetricsRow(record) << '\n';
  out_.flush();
  if (!out_) throw DataError("failed writing metrics file '" + path_ + "'");
}

std::vector<MetricsRecord> ReadMetricsCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open metrics file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) return {};
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kMetricsHeader) throw DataError(path + ": unexpected metrics header");
  std::vector<MetricsRecord> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      rows.push_back(ParseMetricsRow(line, line_no));
    } catch (const DataError& e) {
      throw DataError(path + ": " + e.what());
    }
  }
  return rows;
}

}  // namespace fwdlearn
