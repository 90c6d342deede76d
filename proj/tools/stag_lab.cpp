// stag-lab: experiment runner for the gridworld Stag Hunt laboratory.

#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "staghunt/experiment.hpp"
#include "staghunt/oracle.hpp"

namespace {

using staghunt::ExperimentConfig;
using staghunt::KvConfig;

struct CommonTrainArgs {
  std::string config_file;
  std::vector<std::string> overrides;
  std::string env;
  std::string trainer;
  std::string out_dir;
  std::int64_t iterations = -1;
  std::int64_t trials = -1;
  std::int64_t seed = -1;
  std::int64_t workers = -1;
  std::int64_t hidden = -1;
  bool quiet = false;
};

void add_common_train_flags(CLI::App* cmd, CommonTrainArgs& args) {
  cmd->add_option("--config", args.config_file, "key = value configuration file");
  cmd->add_option("--set", args.overrides, "override, key=value (repeatable)");
  cmd->add_option("-e,--env", args.env, "environment label (FFF..RRR)");
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--iterations", args.iterations, "training iterations");
  cmd->add_option("--trials", args.trials, "independent trials");
  cmd->add_option("--seed", args.seed, "base seed (trial k uses base_seed + k)");
  cmd->add_option("--workers", args.workers, "parallel trial jobs");
  cmd->add_option("--hidden", args.hidden, "policy hidden width");
  cmd->add_flag("--quiet", args.quiet, "suppress per-iteration progress lines");
}

ExperimentConfig resolve_config(const CommonTrainArgs& args) {
  KvConfig kv;
  if (!args.config_file.empty()) kv = KvConfig::load(args.config_file);
  if (!args.env.empty()) kv.set("subject", args.env);
  if (!args.trainer.empty()) kv.set("trainer", args.trainer);
  if (!args.out_dir.empty()) kv.set("out_dir", args.out_dir);
  if (args.iterations >= 0) kv.set("iterations", std::to_string(args.iterations));
  if (args.trials >= 0) kv.set("trials", std::to_string(args.trials));
  if (args.seed >= 0) kv.set("base_seed", std::to_string(args.seed));
  if (args.workers >= 0) kv.set("workers", std::to_string(args.workers));
  if (args.hidden >= 0) kv.set("net.hidden", std::to_string(args.hidden));
  if (args.quiet) kv.set("quiet", "1");
  for (const std::string& pair : args.overrides) kv.set_pair(pair);
  return ExperimentConfig::from_kv(kv);
}

int report_run(const staghunt::RunSummary& summary) {
  if (summary.failures() > 0) {
    std::cerr << summary.failures() << " trial(s) failed; see log above\n";
    return 1;
  }
  std::cout << "results in " << summary.out_dir.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gridworld Stag Hunt laboratory"};
  app.require_subcommand(1);

  CommonTrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "train IPPO or centralized PPO in a variant");
  add_common_train_flags(train, train_args);
  train->add_option("--trainer", train_args.trainer, "ippo | centralized");

  CommonTrainArgs cur_args;
  CLI::App* curriculum =
      app.add_subcommand("curriculum", "two-stage curriculum: cXXX pre-training, then the target");
  add_common_train_flags(curriculum, cur_args);
  std::int64_t stage1_iters = -1, stage2_iters = -1;
  curriculum->add_option("--stage1-iterations", stage1_iters, "stage-1 iterations");
  curriculum->add_option("--stage2-iterations", stage2_iters, "stage-2 iterations");

  staghunt::EgtaCommand egta_cmd;
  bool egta_scripted = false;
  std::string egta_report;
  std::int64_t egta_fixed_spawn = -1;
  CLI::App* egta = app.add_subcommand("egta", "empirical meta-game from two policy pairs");
  egta->add_option("-e,--env", egta_cmd.env_label, "environment label");
  egta->add_option("--coop1", egta_cmd.coop1, "player-1 cooperative policy (ckpt or scripted:*)");
  egta->add_option("--defect1", egta_cmd.defect1, "player-1 defective policy");
  egta->add_option("--coop2", egta_cmd.coop2, "player-2 cooperative policy");
  egta->add_option("--defect2", egta_cmd.defect2, "player-2 defective policy");
  egta->add_flag("--scripted", egta_scripted,
                 "smoke mode: GreedyHunt/GreedyForage stand-ins for all four policies");
  egta->add_option("-n,--episodes", egta_cmd.episodes, "episodes per cell");
  egta->add_option("--classify-episodes", egta_cmd.classification_episodes,
                   "self-play episodes per classification");
  egta->add_option("--seed", egta_cmd.seed, "seed");
  egta->add_option("--fixed-spawn-seed", egta_fixed_spawn,
                   "replay one spawn layout every episode (deterministic plants)");
  egta->add_option("--report", egta_report, "write the per-cell CSV here");

  std::vector<std::string> analyze_files;
  std::int64_t analyze_window = 20;
  double analyze_eps = 0.5;
  CLI::App* analyze = app.add_subcommand("analyze", "classify convergence from curve CSVs");
  analyze->add_option("files", analyze_files, "curve CSV files")->required();
  analyze->add_option("--window", analyze_window, "trailing iterations to average");
  analyze->add_option("--eps", analyze_eps, "classification tolerance");

  std::string render_env = "FFF";
  std::string render_p0 = "scripted:GreedyHunt";
  std::string render_p1 = "scripted:GreedyHunt";
  std::int64_t render_seed = 0;
  std::int64_t render_steps = 50;
  CLI::App* render = app.add_subcommand("render", "print ASCII frames of one episode");
  render->add_option("-e,--env", render_env, "environment label");
  render->add_option("--p0", render_p0, "agent-0 policy (ckpt or scripted:*)");
  render->add_option("--p1", render_p1, "agent-1 policy");
  render->add_option("--seed", render_seed, "seed");
  render->add_option("--steps", render_steps, "maximum steps");

  std::int64_t oracle_width = 3, oracle_height = 3;
  CLI::App* oracle_check =
      app.add_subcommand("oracle-check", "exhaustive transition equivalence on a small grid");
  oracle_check->add_option("--width", oracle_width, "grid width");
  oracle_check->add_option("--height", oracle_height, "grid height");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      return report_run(staghunt::cmd_train(resolve_config(train_args), std::cout));
    }
    if (*curriculum) {
      ExperimentConfig config = resolve_config(cur_args);
      if (stage1_iters >= 0) config.stage1_iterations = static_cast<int>(stage1_iters);
      if (stage2_iters >= 0) config.stage2_iterations = static_cast<int>(stage2_iters);
      return report_run(staghunt::cmd_curriculum(config, std::cout));
    }
    if (*egta) {
      if (egta_scripted) {
        egta_cmd.coop1 = egta_cmd.coop2 = "scripted:GreedyHunt";
        egta_cmd.defect1 = egta_cmd.defect2 = "scripted:GreedyForage";
      }
      if (egta_cmd.coop1.empty() || egta_cmd.defect1.empty() || egta_cmd.coop2.empty() ||
          egta_cmd.defect2.empty()) {
        std::cerr << "egta: provide --coop1/--defect1/--coop2/--defect2 or --scripted\n";
        return 1;
      }
      if (egta_fixed_spawn >= 0) {
        egta_cmd.fixed_spawn_seed = static_cast<std::uint64_t>(egta_fixed_spawn);
      }
      if (!egta_report.empty()) egta_cmd.report_csv = egta_report;

      const staghunt::EgtaReport report = staghunt::cmd_egta(egta_cmd, std::cerr);
      std::cout << "empirical payoff matrix (" << egta_cmd.env_label << ", n=" << egta_cmd.episodes
                << " episodes/cell):\n"
                << staghunt::egta_table(report.matrix);
      for (int i = 0; i < 4; ++i) {
        static const char* kNames[] = {"coop1", "defect1", "coop2", "defect2"};
        std::cout << kNames[i] << ": alpha=" << report.classifications[i].alpha << " -> "
                  << staghunt::to_string(report.classifications[i].cls) << "\n";
      }
      std::cout << "MGSD: " << (report.cert.is_mgsd ? "yes" : "no")
                << "  stag-hunt ordering: " << (report.cert.stag_hunt_ordered ? "yes" : "no")
                << "\n";
      for (const auto& line : report.cert.lines) {
        std::cout << "  " << line.name << ": margin " << line.margin << " (stderr "
                  << line.stderr_of_margin << ") " << (line.holds ? "holds" : "FAILS") << "\n";
      }
      std::cout << "deviation audit: S<P " << (report.audit.sucker_below_mutual_defection ? "yes" : "no")
                << ", P within forage ceiling "
                << (report.audit.defection_within_forage_ceiling ? "yes" : "no")
                << " (P=" << report.audit.p_mean << " +- " << report.audit.p_stderr
                << ", ceiling " << report.audit.forage_ceiling << ")"
                << ", (D,D) pure equilibrium "
                << (report.audit.dd_pure_equilibrium ? "yes" : "no") << "\n";
      return 0;
    }
    if (*analyze) {
      for (const std::string& file : analyze_files) {
        const staghunt::CurveAnalysis a =
            staghunt::analyze_curve_file(file, static_cast<int>(analyze_window), analyze_eps);
        std::cout << file << ": " << staghunt::to_string(a.cls)
                  << " windowed_mean=" << a.windowed_mean << " window=" << a.window_rows
                  << " group=" << (a.group_b_like ? "B-like" : "A-like") << "\n";
      }
      return 0;
    }
    if (*render) {
      staghunt::cmd_render(render_env, render_p0, render_p1,
                           static_cast<std::uint64_t>(render_seed),
                           static_cast<int>(render_steps), std::cout);
      return 0;
    }
    if (*oracle_check) {
      for (const char* label : {"RRF", "RRR"}) {
        staghunt::EnvConfig config = staghunt::variant(label);
        config.width = static_cast<int>(oracle_width);
        config.height = static_cast<int>(oracle_height);
        const staghunt::EquivalenceReport report = staghunt::transition_equivalence_check(config);
        std::cout << label << " on " << oracle_width << "x" << oracle_height << ": "
                  << report.states << " states, " << report.transitions << " transitions, "
                  << report.mismatches.size() << " mismatches -> "
                  << (report.passed() ? "PASS" : "FAIL") << "\n";
        for (const std::string& m : report.mismatches) std::cout << "  " << m << "\n";
        if (!report.passed()) return 1;
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
