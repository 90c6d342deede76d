#include "staghunt/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace staghunt {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ls(line);
  while (std::getline(ls, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i) {
    out << header[i] << (i + 1 < header.size() ? "," : "");
  }
  out << "\n";
  for (const auto& row : rows) {
    if (row.size() != header.size()) {
      throw std::invalid_argument("write_csv: row width does not match header");
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << row[i] << (i + 1 < row.size() ? "," : "");
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write_csv: write failed for " + path.string());
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_csv: cannot open " + path.string());
  CsvTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split_line(line);
    if (line_no == 1) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw std::runtime_error("read_csv: " + path.string() + ":" + std::to_string(line_no) +
                               ": expected " + std::to_string(table.header.size()) +
                               " fields, got " + std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  if (table.header.empty()) {
    throw std::runtime_error("read_csv: " + path.string() + ": missing header");
  }
  return table;
}

namespace {

const std::vector<std::string> kCurveHeader = {
    "iteration",   "mean_combined_reward", "std_combined_reward", "agent0_mean",
    "agent1_mean", "episodes",             "truncated"};

std::vector<std::string> curve_row(const TrainCurvePoint& pt) {
  return {std::to_string(pt.iteration), fmt(pt.mean_combined_reward),
          fmt(pt.std_combined_reward),  fmt(pt.agent0_mean),
          fmt(pt.agent1_mean),          std::to_string(pt.episodes),
          std::to_string(pt.truncated)};
}

}  // namespace

void write_curve_csv(const std::filesystem::path& path, const TrainCurve& curve,
                     std::optional<int> stage) {
  std::vector<std::string> header = kCurveHeader;
  if (stage) header.push_back("stage");
  std::vector<std::vector<std::string>> rows;
  rows.reserve(curve.size());
  for (const TrainCurvePoint& pt : curve) {
    std::vector<std::string> row = curve_row(pt);
    if (stage) row.push_back(std::to_string(*stage));
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

void write_stage_curve_csv(const std::filesystem::path& path, const TrainCurve& stage1,
                           const TrainCurve& stage2) {
  std::vector<std::string> header = kCurveHeader;
  header.push_back("stage");
  std::vector<std::vector<std::string>> rows;
  rows.reserve(stage1.size() + stage2.size());
  for (const TrainCurvePoint& pt : stage1) {
    std::vector<std::string> row = curve_row(pt);
    row.push_back("1");
    rows.push_back(std::move(row));
  }
  for (const TrainCurvePoint& pt : stage2) {
    std::vector<std::string> row = curve_row(pt);
    row.push_back("2");
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

std::vector<CurveRow> read_curve_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  const int c_iter = table.column("iteration");
  const int c_mean = table.column("mean_combined_reward");
  const int c_eps = table.column("episodes");
  const int c_stage = table.column("stage");
  if (c_iter < 0 || c_mean < 0 || c_eps < 0) {
    throw std::runtime_error("read_curve_csv: " + path.string() +
                             ": missing iteration/mean_combined_reward/episodes columns");
  }
  std::vector<CurveRow> rows;
  rows.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    CurveRow row;
    try {
      row.iteration = std::stoi(table.rows[r][c_iter]);
      row.mean_combined_reward = std::stod(table.rows[r][c_mean]);
      row.episodes = std::stoi(table.rows[r][c_eps]);
      if (c_stage >= 0) row.stage = std::stoi(table.rows[r][c_stage]);
    } catch (const std::exception&) {
      throw std::runtime_error("read_curve_csv: " + path.string() + ":" + std::to_string(r + 2) +
                               ": non-numeric field");
    }
    rows.push_back(row);
  }
  return rows;
}

void write_aggregate_csv(const std::filesystem::path& path,
                         const std::vector<TrainCurve>& curves) {
  if (curves.empty()) throw std::invalid_argument("write_aggregate_csv: no curves");
  const std::size_t iterations = curves.front().size();
  for (const TrainCurve& c : curves) {
    if (c.size() != iterations) {
      throw std::invalid_argument("write_aggregate_csv: curves have different lengths");
    }
  }
  std::vector<std::vector<std::string>> rows;
  rows.reserve(iterations);
  const double n = static_cast<double>(curves.size());
  for (std::size_t i = 0; i < iterations; ++i) {
    double mean = 0.0;
    for (const TrainCurve& c : curves) mean += c[i].mean_combined_reward;
    mean /= n;
    double var = 0.0;
    for (const TrainCurve& c : curves) {
      var += (c[i].mean_combined_reward - mean) * (c[i].mean_combined_reward - mean);
    }
    var /= n;
    rows.push_back({std::to_string(curves.front()[i].iteration), fmt(mean), fmt(std::sqrt(var)),
                    std::to_string(curves.size())});
  }
  write_csv(path, {"iteration", "mean_combined_reward", "std_combined_reward", "trials"}, rows);
}

}  // namespace staghunt
