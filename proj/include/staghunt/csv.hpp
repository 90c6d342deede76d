#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "staghunt/ppo.hpp"

namespace staghunt {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

/// Minimal comma-separated format: one header line, no quoting, fields must
/// not contain commas. Malformed rows are rejected with their line number.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);
CsvTable read_csv(const std::filesystem::path& path);

/// Training-curve schema:
/// iteration,mean_combined_reward,std_combined_reward,agent0_mean,agent1_mean,
/// episodes,truncated[,stage]
void write_curve_csv(const std::filesystem::path& path, const TrainCurve& curve,
                     std::optional<int> stage = std::nullopt);

/// Two-stage variant: stage-1 rows then stage-2 rows, tagged by the stage
/// column, iteration indices restarting per stage.
void write_stage_curve_csv(const std::filesystem::path& path, const TrainCurve& stage1,
                           const TrainCurve& stage2);

struct CurveRow {
  int iteration = 0;
  double mean_combined_reward = 0.0;
  int episodes = 0;
  int stage = 0;  // 0 when the file has no stage column
};

/// Reads any CSV carrying at least iteration, mean_combined_reward and
/// episodes columns.
std::vector<CurveRow> read_curve_csv(const std::filesystem::path& path);

/// Cross-trial aggregate schema: iteration,mean_combined_reward,
/// std_combined_reward,trials — mean and population std across the trials'
/// per-iteration means (the plotted series).
void write_aggregate_csv(const std::filesystem::path& path,
                         const std::vector<TrainCurve>& curves);

}  // namespace staghunt
