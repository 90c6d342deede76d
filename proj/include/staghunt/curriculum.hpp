#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "staghunt/ppo.hpp"

namespace staghunt {

/// Two-stage training plan: pre-train in the cooperation-inducing variant of
/// the target (foraging reward removed, -0.5 timestep penalty), then continue
/// in the target variant itself from the stage-1 parameters.
struct CurriculumPlan {
  std::string target_label = "FFR";
  int stage1_iterations = 500;
  int stage2_iterations = 500;
  Hyperparams hp{};
  MlpConfig net{};
  std::uint64_t seed = 0;
  /// Episode cap for both stages; unset keeps the variant default.
  std::optional<int> time_limit;
  std::function<void(int stage, const TrainCurvePoint&)> on_iteration;
};

struct CurriculumResult {
  std::array<MlpParams, 2> policies;          // stage-2 final parameters
  std::array<MlpParams, 2> stage1_policies;   // the handoff snapshot
  TrainCurve stage1_curve;
  TrainCurve stage2_curve;
  /// Hashes of the stage-1 final parameters handed to stage 2.
  std::array<std::uint64_t, 2> stage1_hashes{0, 0};
};

/// Stage 1 trains IPPO in coop_variant(variant(target)); stage 2 resumes the
/// exact stage-1 parameters in variant(target) with fresh optimiser moments,
/// the penalty removed and the original payoffs restored.
CurriculumResult run_curriculum(const CurriculumPlan& plan);

}  // namespace staghunt
