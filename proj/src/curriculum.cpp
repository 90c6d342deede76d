#include "staghunt/curriculum.hpp"

#include <stdexcept>

namespace staghunt {

CurriculumResult run_curriculum(const CurriculumPlan& plan) {
  if (plan.stage1_iterations < 0 || plan.stage2_iterations < 0) {
    throw std::invalid_argument("run_curriculum: stage iteration counts must be non-negative");
  }
  EnvConfig target = variant(plan.target_label);
  if (plan.time_limit) target.time_limit = plan.time_limit;
  const EnvConfig coop = coop_variant(target);

  TrainOptions stage1_opts;
  stage1_opts.net = plan.net;
  stage1_opts.iterations = plan.stage1_iterations;
  stage1_opts.seed = mix_seed(plan.seed, 1);
  if (plan.on_iteration) {
    stage1_opts.on_iteration = [&](const TrainCurvePoint& pt) { plan.on_iteration(1, pt); };
  }
  IppoResult stage1 = train_ippo(coop, plan.hp, stage1_opts);

  CurriculumResult result;
  result.stage1_curve = std::move(stage1.curve);
  result.stage1_policies = stage1.policies;
  result.stage1_hashes = {params_hash(stage1.policies[0]), params_hash(stage1.policies[1])};

  TrainOptions stage2_opts;
  stage2_opts.net = plan.net;
  stage2_opts.iterations = plan.stage2_iterations;
  stage2_opts.seed = mix_seed(plan.seed, 2);
  stage2_opts.initial_policies = std::move(stage1.policies);
  if (plan.on_iteration) {
    stage2_opts.on_iteration = [&](const TrainCurvePoint& pt) { plan.on_iteration(2, pt); };
  }
  IppoResult stage2 = train_ippo(target, plan.hp, stage2_opts);

  result.policies = std::move(stage2.policies);
  result.stage2_curve = std::move(stage2.curve);
  return result;
}

}  // namespace staghunt
