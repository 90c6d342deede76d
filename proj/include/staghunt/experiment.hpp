#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "staghunt/csv.hpp"
#include "staghunt/curriculum.hpp"
#include "staghunt/egta.hpp"
#include "staghunt/ppo.hpp"

namespace staghunt {

/// Flat key-value configuration file: one `key = value` per line, `#` starts
/// a comment, blank lines ignored. Keys keep their first-seen order so the
/// resolved config serialises stably.
class KvConfig {
 public:
  static KvConfig load(const std::filesystem::path& path);
  /// Parses a `key=value` override (as passed to --set).
  void set_pair(const std::string& pair);
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;

  std::string serialize() const;
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> order_;
  std::map<std::string, std::string> values_;
};

/// Fully resolved experiment description; every field has a defined default
/// so the persisted copy is self-contained.
struct ExperimentConfig {
  std::string subject = "FFF";   // environment label, or curriculum target
  std::string trainer = "ippo";  // ippo | centralized
  int iterations = 1000;
  int stage1_iterations = 500;  // curriculum only
  int stage2_iterations = 500;
  int trials = 5;
  std::uint64_t base_seed = 0;
  int workers = 1;
  int time_limit = 500;
  Hyperparams hp{};
  MlpConfig net{};
  std::filesystem::path out_dir = "runs/out";
  bool quiet = false;

  static ExperimentConfig from_kv(const KvConfig& kv);
  KvConfig to_kv() const;

  EnvConfig env() const;  // variant(subject) with the configured time limit
};

struct TrialSummary {
  int trial = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
};

struct RunSummary {
  std::vector<TrialSummary> trials;
  std::filesystem::path out_dir;
  int failures() const;
};

/// Trains `trials` independent runs (seed = base_seed + trial), one directory
/// per trial with its curve CSV and final checkpoints, plus an aggregate CSV
/// of mean +- std across trials and the resolved config. Trials run as
/// parallel jobs bounded by `workers`; one trial's failure does not abort the
/// others.
RunSummary cmd_train(const ExperimentConfig& config, std::ostream& log);

/// Same layout for the two-stage curriculum: a stage-tagged curve CSV per
/// trial, stage-1 and final checkpoints, and per-stage aggregates.
RunSummary cmd_curriculum(const ExperimentConfig& config, std::ostream& log);

/// A policy specification: "scripted:GreedyHunt", "scripted:GreedyForage",
/// "scripted:Stationary", "scripted:UniformRandom", or a checkpoint path.
std::unique_ptr<AgentPolicy> make_policy(const std::string& source);

struct EgtaCommand {
  std::string env_label = "FFR";
  std::string coop1, defect1, coop2, defect2;  // policy specifications
  int episodes = 5000;
  int classification_episodes = 500;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> fixed_spawn_seed;
  std::optional<std::filesystem::path> report_csv;
  int time_limit = 500;
};

struct EgtaReport {
  EmpiricalPayoffMatrix matrix;
  Certification cert;
  DeviationAudit audit;
  std::array<PolicyClassification, 4> classifications;  // C1, D1, C2, D2
  std::vector<std::string> warnings;                    // classification mismatches
};

/// Cross-plays the four policies, certifies the sample means and runs the
/// deviation audit. Nominal classes that do not match the measured alpha are
/// reported as warnings, not errors.
EgtaReport cmd_egta(const EgtaCommand& cmd, std::ostream& log);

/// Human-readable payoff table in the reporting layout (tuples at 2 d.p.).
std::string egta_table(const EmpiricalPayoffMatrix& matrix);
void write_egta_csv(const std::filesystem::path& path, const EmpiricalPayoffMatrix& matrix);

enum class ConvergenceClass { kSuboptimalForage, kMixed, kPureHunt };

struct CurveAnalysis {
  ConvergenceClass cls = ConvergenceClass::kMixed;
  double windowed_mean = 0.0;
  int window_rows = 0;       // rows actually used
  bool group_b_like = false;  // suboptimal-forage convergence pattern
};

/// Classifies by the mean of mean_combined_reward over the last `window`
/// rows that completed at least one episode:
/// SuboptimalForage at or below forage_threshold + eps, PureHunt at or above
/// hunt_threshold - eps, Mixed in between.
CurveAnalysis classify_curve(const std::vector<CurveRow>& rows, int window = 20, double eps = 0.5,
                             double forage_threshold = 4.0, double hunt_threshold = 50.0);
CurveAnalysis analyze_curve_file(const std::filesystem::path& path, int window = 20,
                                 double eps = 0.5);

const char* to_string(ConvergenceClass cls);

/// Plays one seeded episode and streams one rendered frame per timestep.
void cmd_render(const std::string& env_label, const std::string& policy0_source,
                const std::string& policy1_source, std::uint64_t seed, int steps,
                std::ostream& out);

}  // namespace staghunt
