#include "staghunt/experiment.hpp"

#include <atomic>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "staghunt/oracle.hpp"
#include "staghunt/render.hpp"
#include "staghunt/scripted.hpp"

namespace staghunt {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace

KvConfig KvConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("KvConfig: cannot open " + path.string());
  KvConfig kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string text = trim(line);
    if (text.empty()) continue;
    const std::size_t eq = text.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("KvConfig: " + path.string() + ":" + std::to_string(line_no) +
                               ": expected key = value");
    }
    kv.set(trim(text.substr(0, eq)), trim(text.substr(eq + 1)));
  }
  return kv;
}

void KvConfig::set_pair(const std::string& pair) {
  const std::size_t eq = pair.find('=');
  if (eq == std::string::npos) {
    throw std::invalid_argument("override must be key=value: " + pair);
  }
  set(trim(pair.substr(0, eq)), trim(pair.substr(eq + 1)));
}

void KvConfig::set(const std::string& key, const std::string& value) {
  if (key.empty()) throw std::invalid_argument("KvConfig: empty key");
  if (!values_.count(key)) order_.push_back(key);
  values_[key] = value;
}

bool KvConfig::has(const std::string& key) const { return values_.count(key) > 0; }

std::string KvConfig::get_string(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

int KvConfig::get_int(const std::string& key, int fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return std::stoi(it->second);
  } catch (const std::exception&) {
    throw std::runtime_error("KvConfig: key '" + key + "' is not an integer: " + it->second);
  }
}

std::uint64_t KvConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return std::stoull(it->second);
  } catch (const std::exception&) {
    throw std::runtime_error("KvConfig: key '" + key + "' is not an integer: " + it->second);
  }
}

double KvConfig::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw std::runtime_error("KvConfig: key '" + key + "' is not a number: " + it->second);
  }
}

std::string KvConfig::serialize() const {
  std::ostringstream out;
  for (const std::string& key : order_) {
    out << key << " = " << values_.at(key) << "\n";
  }
  return out.str();
}

void KvConfig::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("KvConfig: cannot write " + path.string());
  out << serialize();
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_kv(const KvConfig& kv) {
  ExperimentConfig c;
  c.subject = kv.get_string("subject", c.subject);
  c.trainer = kv.get_string("trainer", c.trainer);
  if (c.trainer != "ippo" && c.trainer != "centralized") {
    throw std::invalid_argument("trainer must be ippo or centralized");
  }
  c.iterations = kv.get_int("iterations", c.iterations);
  c.stage1_iterations = kv.get_int("stage1_iterations", c.stage1_iterations);
  c.stage2_iterations = kv.get_int("stage2_iterations", c.stage2_iterations);
  c.trials = kv.get_int("trials", c.trials);
  c.base_seed = kv.get_u64("base_seed", c.base_seed);
  c.workers = kv.get_int("workers", c.workers);
  c.time_limit = kv.get_int("env.time_limit", c.time_limit);
  c.net.hidden = kv.get_int("net.hidden", c.net.hidden);
  c.out_dir = kv.get_string("out_dir", c.out_dir.string());
  c.quiet = kv.get_int("quiet", c.quiet ? 1 : 0) != 0;

  Hyperparams& hp = c.hp;
  hp.clip = kv.get_double("hp.clip", hp.clip);
  hp.discount = kv.get_double("hp.discount", hp.discount);
  hp.train_batch = kv.get_int("hp.train_batch", hp.train_batch);
  hp.sgd_minibatch = kv.get_int("hp.sgd_minibatch", hp.sgd_minibatch);
  hp.sgd_iters = kv.get_int("hp.sgd_iters", hp.sgd_iters);
  hp.kl_coeff = kv.get_double("hp.kl_coeff", hp.kl_coeff);
  hp.kl_target = kv.get_double("hp.kl_target", hp.kl_target);
  hp.entropy_coeff = kv.get_double("hp.entropy_coeff", hp.entropy_coeff);
  hp.vf_clip = kv.get_double("hp.vf_clip", hp.vf_clip);
  hp.vf_loss_coeff = kv.get_double("hp.vf_loss_coeff", hp.vf_loss_coeff);
  hp.gae_lambda = kv.get_double("hp.gae_lambda", hp.gae_lambda);
  hp.learning_rate = kv.get_double("hp.learning_rate", hp.learning_rate);
  hp.adam_beta1 = kv.get_double("hp.adam_beta1", hp.adam_beta1);
  hp.adam_beta2 = kv.get_double("hp.adam_beta2", hp.adam_beta2);
  hp.adam_epsilon = kv.get_double("hp.adam_epsilon", hp.adam_epsilon);
  validate(hp);
  return c;
}

KvConfig ExperimentConfig::to_kv() const {
  KvConfig kv;
  kv.set("subject", subject);
  kv.set("trainer", trainer);
  kv.set("iterations", std::to_string(iterations));
  kv.set("stage1_iterations", std::to_string(stage1_iterations));
  kv.set("stage2_iterations", std::to_string(stage2_iterations));
  kv.set("trials", std::to_string(trials));
  kv.set("base_seed", std::to_string(base_seed));
  kv.set("workers", std::to_string(workers));
  kv.set("env.time_limit", std::to_string(time_limit));
  kv.set("net.hidden", std::to_string(net.hidden));
  kv.set("out_dir", out_dir.string());
  kv.set("quiet", quiet ? "1" : "0");
  kv.set("hp.clip", fmt(hp.clip));
  kv.set("hp.discount", fmt(hp.discount));
  kv.set("hp.train_batch", std::to_string(hp.train_batch));
  kv.set("hp.sgd_minibatch", std::to_string(hp.sgd_minibatch));
  kv.set("hp.sgd_iters", std::to_string(hp.sgd_iters));
  kv.set("hp.kl_coeff", fmt(hp.kl_coeff));
  kv.set("hp.kl_target", fmt(hp.kl_target));
  kv.set("hp.entropy_coeff", fmt(hp.entropy_coeff));
  kv.set("hp.vf_clip", fmt(hp.vf_clip));
  kv.set("hp.vf_loss_coeff", fmt(hp.vf_loss_coeff));
  kv.set("hp.gae_lambda", fmt(hp.gae_lambda));
  kv.set("hp.learning_rate", fmt(hp.learning_rate));
  kv.set("hp.adam_beta1", fmt(hp.adam_beta1));
  kv.set("hp.adam_beta2", fmt(hp.adam_beta2));
  kv.set("hp.adam_epsilon", fmt(hp.adam_epsilon));
  return kv;
}

EnvConfig ExperimentConfig::env() const {
  EnvConfig e = variant(subject);
  e.time_limit = time_limit;
  return e;
}

int RunSummary::failures() const {
  int n = 0;
  for (const TrialSummary& t : trials) n += t.ok ? 0 : 1;
  return n;
}

namespace {

void run_trials(int trials, int workers, const std::function<void(int)>& body,
                std::vector<TrialSummary>& summaries, std::uint64_t base_seed) {
  summaries.assign(trials, {});
  std::atomic<int> next{0};
  auto worker_loop = [&] {
    while (true) {
      const int trial = next.fetch_add(1);
      if (trial >= trials) return;
      TrialSummary& summary = summaries[trial];
      summary.trial = trial;
      summary.seed = base_seed + static_cast<std::uint64_t>(trial);
      try {
        body(trial);
        summary.ok = true;
      } catch (const std::exception& e) {
        summary.ok = false;
        summary.error = e.what();
      }
    }
  };
  const int n_threads = std::max(1, std::min(workers, trials));
  if (n_threads == 1) {
    worker_loop();
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker_loop);
  for (std::thread& t : pool) t.join();
}

std::function<void(const TrainCurvePoint&)> progress_logger(std::ostream& log, std::mutex& mu,
                                                            bool quiet, int trial,
                                                            const std::string& tag) {
  if (quiet) return {};
  return [&log, &mu, trial, tag](const TrainCurvePoint& pt) {
    if (pt.iteration % 25 != 0) return;
    std::scoped_lock lock(mu);
    log << tag << " trial " << trial << " iter " << pt.iteration << " mean_combined "
        << pt.mean_combined_reward << " episodes " << pt.episodes << "\n";
  };
}

void write_meta(const std::filesystem::path& path, const std::vector<std::pair<std::string, std::string>>& fields) {
  KvConfig kv;
  for (const auto& [k, v] : fields) kv.set(k, v);
  kv.save(path);
}

}  // namespace

RunSummary cmd_train(const ExperimentConfig& config, std::ostream& log) {
  if (config.trials < 1) throw std::invalid_argument("cmd_train: trials must be >= 1");
  const EnvConfig env = config.env();
  std::filesystem::create_directories(config.out_dir);
  config.to_kv().save(config.out_dir / "config.resolved");

  std::mutex log_mu;
  std::vector<TrainCurve> curves(config.trials);
  RunSummary summary;
  summary.out_dir = config.out_dir;

  run_trials(
      config.trials, config.workers,
      [&](int trial) {
        const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(trial);
        const std::filesystem::path dir = config.out_dir / ("trial_" + std::to_string(trial));
        std::filesystem::create_directories(dir);

        TrainOptions opts;
        opts.net = config.net;
        opts.iterations = config.iterations;
        opts.seed = seed;
        opts.on_iteration = progress_logger(log, log_mu, config.quiet, trial, config.subject);

        std::vector<std::pair<std::string, std::string>> meta{
            {"trial", std::to_string(trial)},
            {"seed", std::to_string(seed)},
            {"label", config.subject},
            {"trainer", config.trainer},
            {"workers", std::to_string(config.workers)},
        };
        if (config.trainer == "centralized") {
          CentralResult result = train_centralized(env, config.hp, opts);
          curves[trial] = result.curve;
          save_checkpoint(dir / "joint.ckpt", result.policy, "seed:" + std::to_string(seed));
          meta.emplace_back("joint_hash", std::to_string(params_hash(result.policy)));
        } else {
          IppoResult result = train_ippo(env, config.hp, opts);
          curves[trial] = result.curve;
          for (int a = 0; a < 2; ++a) {
            save_checkpoint(dir / ("agent" + std::to_string(a) + ".ckpt"), result.policies[a],
                            "seed:" + std::to_string(seed) + ":agent" + std::to_string(a));
            meta.emplace_back("agent" + std::to_string(a) + "_hash",
                              std::to_string(params_hash(result.policies[a])));
          }
        }
        write_curve_csv(dir / "curve.csv", curves[trial]);
        write_meta(dir / "meta.kv", meta);
      },
      summary.trials, config.base_seed);

  std::vector<TrainCurve> ok_curves;
  for (int t = 0; t < config.trials; ++t) {
    if (summary.trials[t].ok) ok_curves.push_back(curves[t]);
  }
  for (const TrialSummary& t : summary.trials) {
    if (!t.ok) log << "trial " << t.trial << " FAILED: " << t.error << "\n";
  }
  if (ok_curves.empty()) throw std::runtime_error("cmd_train: every trial failed");
  write_aggregate_csv(config.out_dir / "aggregate.csv", ok_curves);
  return summary;
}

RunSummary cmd_curriculum(const ExperimentConfig& config, std::ostream& log) {
  if (config.trials < 1) throw std::invalid_argument("cmd_curriculum: trials must be >= 1");
  variant(config.subject);  // validates the target label
  std::filesystem::create_directories(config.out_dir);
  config.to_kv().save(config.out_dir / "config.resolved");

  std::mutex log_mu;
  std::vector<TrainCurve> stage1(config.trials), stage2(config.trials);
  RunSummary summary;
  summary.out_dir = config.out_dir;

  run_trials(
      config.trials, config.workers,
      [&](int trial) {
        const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(trial);
        const std::filesystem::path dir = config.out_dir / ("trial_" + std::to_string(trial));
        std::filesystem::create_directories(dir);

        CurriculumPlan plan;
        plan.target_label = config.subject;
        plan.stage1_iterations = config.stage1_iterations;
        plan.stage2_iterations = config.stage2_iterations;
        plan.hp = config.hp;
        plan.net = config.net;
        plan.seed = seed;
        plan.time_limit = config.time_limit;
        if (!config.quiet) {
          plan.on_iteration = [&, trial](int stage, const TrainCurvePoint& pt) {
            if (pt.iteration % 25 != 0) return;
            std::scoped_lock lock(log_mu);
            log << "c" << config.subject << " trial " << trial << " stage " << stage << " iter "
                << pt.iteration << " mean_combined " << pt.mean_combined_reward << "\n";
          };
        }

        CurriculumResult result = run_curriculum(plan);
        for (int a = 0; a < 2; ++a) {
          save_checkpoint(dir / ("stage1_agent" + std::to_string(a) + ".ckpt"),
                          result.stage1_policies[a],
                          "seed:" + std::to_string(seed) + ":stage1:agent" + std::to_string(a));
        }

        stage1[trial] = result.stage1_curve;
        stage2[trial] = result.stage2_curve;
        write_stage_curve_csv(dir / "curve.csv", result.stage1_curve, result.stage2_curve);
        for (int a = 0; a < 2; ++a) {
          save_checkpoint(dir / ("agent" + std::to_string(a) + ".ckpt"), result.policies[a],
                          "seed:" + std::to_string(seed) + ":stage2:agent" + std::to_string(a));
        }
        write_meta(dir / "meta.kv",
                   {{"trial", std::to_string(trial)},
                    {"seed", std::to_string(seed)},
                    {"stage1_label", "c" + config.subject},
                    {"stage2_label", config.subject},
                    {"trainer", "ippo"},
                    {"workers", std::to_string(config.workers)},
                    {"stage1_agent0_hash", std::to_string(result.stage1_hashes[0])},
                    {"stage1_agent1_hash", std::to_string(result.stage1_hashes[1])},
                    {"agent0_hash", std::to_string(params_hash(result.policies[0]))},
                    {"agent1_hash", std::to_string(params_hash(result.policies[1]))}});
      },
      summary.trials, config.base_seed);

  std::vector<TrainCurve> ok1, ok2;
  for (int t = 0; t < config.trials; ++t) {
    if (summary.trials[t].ok) {
      ok1.push_back(stage1[t]);
      ok2.push_back(stage2[t]);
    }
  }
  for (const TrialSummary& t : summary.trials) {
    if (!t.ok) log << "trial " << t.trial << " FAILED: " << t.error << "\n";
  }
  if (ok1.empty()) throw std::runtime_error("cmd_curriculum: every trial failed");
  write_aggregate_csv(config.out_dir / "aggregate_stage1.csv", ok1);
  write_aggregate_csv(config.out_dir / "aggregate_stage2.csv", ok2);
  return summary;
}

std::unique_ptr<AgentPolicy> make_policy(const std::string& source) {
  if (source.rfind("scripted:", 0) == 0) {
    const std::string kind = source.substr(9);
    if (kind == "GreedyHunt") return std::make_unique<ScriptedAgent>(ScriptedKind::kGreedyHunt);
    if (kind == "GreedyForage") {
      return std::make_unique<ScriptedAgent>(ScriptedKind::kGreedyForage);
    }
    if (kind == "Stationary") return std::make_unique<ScriptedAgent>(ScriptedKind::kStationary);
    if (kind == "UniformRandom") {
      return std::make_unique<ScriptedAgent>(ScriptedKind::kUniformRandom);
    }
    throw std::invalid_argument("unknown scripted policy: " + kind);
  }
  return std::make_unique<NeuralAgent>(load_checkpoint(source));
}

EgtaReport cmd_egta(const EgtaCommand& cmd, std::ostream& log) {
  EnvConfig env = variant(cmd.env_label);
  env.time_limit = cmd.time_limit;

  const std::array<std::string, 4> sources{cmd.coop1, cmd.defect1, cmd.coop2, cmd.defect2};
  const std::array<PolicyClass, 4> expected{PolicyClass::kCooperative, PolicyClass::kDefective,
                                            PolicyClass::kCooperative, PolicyClass::kDefective};
  const std::array<const char*, 4> names{"coop1", "defect1", "coop2", "defect2"};

  std::array<std::unique_ptr<AgentPolicy>, 4> policies;
  for (int i = 0; i < 4; ++i) policies[i] = make_policy(sources[i]);

  EgtaReport report;
  Rng rng(cmd.seed);
  Rng classify_rng = rng.fork(Stream::kEgta);
  for (int i = 0; i < 4; ++i) {
    report.classifications[i] =
        classify_policy(*policies[i], env, cmd.classification_episodes, classify_rng);
    if (report.classifications[i].cls != expected[i]) {
      std::ostringstream warn;
      warn << names[i] << " measured " << to_string(report.classifications[i].cls)
           << " (alpha=" << report.classifications[i].alpha << "), expected "
           << to_string(expected[i]);
      report.warnings.push_back(warn.str());
      log << "warning: " << warn.str() << "\n";
    }
  }

  EgtaOptions opts;
  opts.episodes = cmd.episodes;
  opts.fixed_spawn_seed = cmd.fixed_spawn_seed;
  Rng payoff_rng(mix_seed(cmd.seed, 77));
  report.matrix = empirical_payoffs(*policies[0], *policies[1], *policies[2], *policies[3], env,
                                    opts, payoff_rng);
  report.cert = certify(report.matrix);
  report.audit = nash_deviation_audit(report.matrix, env.payoffs.f);
  if (cmd.report_csv) write_egta_csv(*cmd.report_csv, report.matrix);
  return report;
}

std::string egta_table(const EmpiricalPayoffMatrix& m) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "            pi2_C              pi2_D\n"
                "pi1_C  (%6.2f, %6.2f)   (%6.2f, %6.2f)\n"
                "pi1_D  (%6.2f, %6.2f)   (%6.2f, %6.2f)\n",
                m.cc.mean[0], m.cc.mean[1], m.cd.mean[0], m.cd.mean[1], m.dc.mean[0],
                m.dc.mean[1], m.dd.mean[0], m.dd.mean[1]);
  return buf;
}

void write_egta_csv(const std::filesystem::path& path, const EmpiricalPayoffMatrix& matrix) {
  auto fmtv = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return std::string(buf);
  };
  std::vector<std::vector<std::string>> rows;
  const std::array<std::pair<const char*, const CellStats*>, 4> cells{
      std::pair{"CC", &matrix.cc}, std::pair{"CD", &matrix.cd}, std::pair{"DC", &matrix.dc},
      std::pair{"DD", &matrix.dd}};
  for (const auto& [name, cell] : cells) {
    for (int player = 0; player < 2; ++player) {
      rows.push_back({name, std::to_string(player + 1), fmtv(cell->mean[player]),
                      fmtv(cell->stderr_of_mean[player]), std::to_string(cell->episodes)});
    }
  }
  write_csv(path, {"cell", "player", "mean", "stderr", "episodes"}, rows);
}

CurveAnalysis classify_curve(const std::vector<CurveRow>& rows, int window, double eps,
                             double forage_threshold, double hunt_threshold) {
  if (window < 1) throw std::invalid_argument("classify_curve: window must be >= 1");
  std::vector<double> usable;
  for (const CurveRow& r : rows) {
    if (r.episodes > 0) usable.push_back(r.mean_combined_reward);
  }
  if (usable.empty()) {
    throw std::runtime_error("classify_curve: no rows with completed episodes");
  }
  const int take = std::min<int>(window, static_cast<int>(usable.size()));
  double sum = 0.0;
  for (int i = static_cast<int>(usable.size()) - take; i < static_cast<int>(usable.size()); ++i) {
    sum += usable[i];
  }
  CurveAnalysis out;
  out.window_rows = take;
  out.windowed_mean = sum / take;
  if (out.windowed_mean <= forage_threshold + eps) {
    out.cls = ConvergenceClass::kSuboptimalForage;
  } else if (out.windowed_mean >= hunt_threshold - eps) {
    out.cls = ConvergenceClass::kPureHunt;
  } else {
    out.cls = ConvergenceClass::kMixed;
  }
  out.group_b_like = out.cls == ConvergenceClass::kSuboptimalForage;
  return out;
}

CurveAnalysis analyze_curve_file(const std::filesystem::path& path, int window, double eps) {
  return classify_curve(read_curve_csv(path), window, eps);
}

const char* to_string(ConvergenceClass cls) {
  switch (cls) {
    case ConvergenceClass::kSuboptimalForage: return "SuboptimalForage";
    case ConvergenceClass::kMixed: return "Mixed";
    case ConvergenceClass::kPureHunt: return "PureHunt";
  }
  return "?";
}

void cmd_render(const std::string& env_label, const std::string& policy0_source,
                const std::string& policy1_source, std::uint64_t seed, int steps,
                std::ostream& out) {
  const EnvConfig config = variant(env_label);
  const std::unique_ptr<AgentPolicy> p0 = make_policy(policy0_source);
  const std::unique_ptr<AgentPolicy> p1 = make_policy(policy1_source);

  Rng root(seed);
  Rng spawn = root.fork(Stream::kSpawn);
  Rng stag = root.fork(Stream::kStagMove);
  Rng sampling = root.fork(Stream::kSampling);

  EnvState state = reset(config, spawn);
  out << render_legend() << "t=0\n" << render_frame(state, config);
  for (int t = 0; t < steps && !state.done; ++t) {
    std::array<Action, 2> actions{Action::kStay, Action::kStay};
    if (!state.frozen[0]) actions[0] = p0->act(state, 0, config, sampling);
    if (!state.frozen[1]) actions[1] = p1->act(state, 1, config, sampling);
    const StepResult sr = step(state, actions, config, stag);
    out << "t=" << state.t << " actions=" << action_name(actions[0]) << ","
        << action_name(actions[1]) << " rewards=" << sr.rewards[0] << "," << sr.rewards[1]
        << (sr.done ? (sr.truncated ? " truncated" : " done") : "") << "\n"
        << render_frame(state, config);
  }
}

}  // namespace staghunt
