#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "trajlab/events.hpp"
#include "trajlab/types.hpp"

namespace trajlab {

struct ScriptStep {
  EventKind kind = EventKind::kContact;
  /// Steps after the previous event (after t=0 for the first); 0 = same step.
  std::uint32_t gap = 1;
};

struct EventScript {
  SubtaskKind subtask_kind = SubtaskKind::kPick;
  std::vector<ScriptStep> steps;
  /// Total records; defaults to two past the last event.
  std::optional<std::uint32_t> length;
  std::optional<bool> initial_grasped;
  std::optional<float> initial_dist_obj_goal;
  std::optional<float> initial_art_q;
  ArticulationKind articulation_kind = ArticulationKind::kFridge;
};

nlohmann::ordered_json script_to_json(const EventScript& script);
EventScript script_from_json(const nlohmann::json& j);

/// Builds a trajectory whose extracted events equal the script (kinds and
/// steps). Throws Error(kInfeasibleScript) naming the violated rule.
Trajectory realize(const EventScript& script, std::uint64_t seed, const Thresholds& th);

/// The event list that defines each mode, realized into fixtures by tests.
EventScript defining_script(std::string_view mode_id);

struct FuzzConfig {
  std::uint32_t min_len = 20;
  std::uint32_t max_len = 200;
  /// Per-step probability of an actuated change.
  double edge_density = 0.15;
  int arm_dof = 7;
};

/// Random, physically consistent trajectory; pure in (seed, config, subtask, th).
Trajectory fuzz(std::uint64_t seed, const FuzzConfig& config, SubtaskKind subtask,
                const Thresholds& th);
/// Independent stream for episode `index` of a run seeded with `seed`.
std::uint64_t episode_seed(std::uint64_t seed, std::uint64_t index);

struct NoiseModel {
  double arm_sigma = 0.1;
  double arm_clip = 0.2;
  double base_sigma = 0.1;
  double base_clip = 0.2;
  double rot_sigma = 0.25;
  double rot_clip = 0.5;
};

struct Perturbation {
  std::vector<double> arm;
  double base_x = 0.0;
  double base_y = 0.0;
  double rotation = 0.0;
};

Perturbation sample_noise(const NoiseModel& model, std::mt19937_64& rng, int arm_dof);
Perturbation sample_noise(const NoiseModel& model, std::uint64_t seed, int arm_dof);

}  // namespace trajlab
