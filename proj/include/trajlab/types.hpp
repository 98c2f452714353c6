#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace trajlab {

enum class Task { kTidyHouse, kPrepareGroceries, kSetTable, kCustom };
enum class SubtaskKind { kPick, kPlace, kOpen, kClose };
enum class Split { kTrain, kVal, kOther };
enum class ArticulationKind { kNone, kFridge, kDrawer };

inline constexpr SubtaskKind kAllSubtasks[] = {SubtaskKind::kPick, SubtaskKind::kPlace,
                                               SubtaskKind::kOpen, SubtaskKind::kClose};

std::string_view to_string(Task v);
std::string_view to_string(SubtaskKind v);
std::string_view to_string(Split v);
std::string_view to_string(ArticulationKind v);

// Parsers accept the canonical spelling case-insensitively and throw
// Error(kInvalidArgument) otherwise.
Task parse_task(std::string_view s);
SubtaskKind parse_subtask(std::string_view s);
Split parse_split(std::string_view s);
ArticulationKind parse_articulation(std::string_view s);

inline constexpr float kNaN = std::numeric_limits<float>::quiet_NaN();

/// Success/failure thresholds. Distances in m, joints in joint units,
/// forces in N, fractions of the articulation range.
struct Thresholds {
  double rest_radius = 0.05;
  double goal_radius = 0.15;
  double j_arm_pick = 0.6;
  double j_arm_other = 0.2;
  double j_tor_max = 0.01;
  double static_qd_arm = 0.2;
  double static_v_base = 0.05;
  double static_omega = 0.05;
  double coll_pick = 5000.0;
  double coll_place = 7500.0;
  double coll_artic = 10000.0;
  double open_frac_fridge = 0.75;
  double open_frac_drawer = 0.9;
  double close_frac = 0.01;
  double slightly_open_frac = 0.1;
  double slightly_close_frac = 0.05;
  double contact_eps = 1e-6;

  bool operator==(const Thresholds&) const = default;
};

struct TrajectoryHeader {
  int format_version = 1;
  std::string episode_id;
  Task task = Task::kCustom;
  SubtaskKind subtask_kind = SubtaskKind::kPick;
  Split split = Split::kOther;
  std::string policy_tag;
  std::string target_id;
  ArticulationKind articulation_kind = ArticulationKind::kNone;
  double art_qmin = 0.0;
  double art_qmax = 0.0;
  int arm_dof = 7;
  std::vector<double> rest_arm = std::vector<double>(7, 0.0);
  double rest_tor = 0.0;
  double control_freq = 20.0;
  std::optional<Thresholds> thresholds_override;

  bool operator==(const TrajectoryHeader&) const = default;
};

/// One control step of derived scalars. NaN marks a field that does not
/// apply to the subtask kind.
struct TimestepRecord {
  std::uint32_t t = 0;
  std::vector<float> q_arm;
  std::vector<float> qd_arm;
  float q_tor = 0.0f;
  float v_base_x = 0.0f;
  float v_base_y = 0.0f;
  float omega_base = 0.0f;
  float dist_ee_rest = 0.0f;
  float dist_obj_goal = kNaN;
  float force_ee_target = kNaN;
  float cum_robot_force = 0.0f;
  bool grasped = false;
  float art_q = kNaN;
};

struct Trajectory {
  TrajectoryHeader header;
  std::vector<TimestepRecord> records;
};

/// Field-for-field equality where NaN equals NaN bitwise (used by round-trip checks).
bool bit_equal(const TimestepRecord& a, const TimestepRecord& b);
bool bit_equal(const Trajectory& a, const Trajectory& b);

}  // namespace trajlab
