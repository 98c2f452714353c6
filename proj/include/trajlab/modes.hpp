#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trajlab/events.hpp"
#include "trajlab/types.hpp"

namespace trajlab {

struct ModeInfo {
  std::string_view id;       // e.g. "pick.s1_straightforward"
  SubtaskKind subtask;
  bool success;
  std::string_view numeral;  // roman numeral used in the statistics tables
};

/// All modes of a subtask: success modes first, in table column order.
std::span<const ModeInfo> modes(SubtaskKind subtask);
/// Throws Error(kUnknownMode).
const ModeInfo& mode_info(std::string_view mode_id);
bool is_known_mode(std::string_view mode_id);

/// Modes whose episodes still satisfy the success predicate at the last record.
bool is_persistent_success_mode(std::string_view mode_id);

/// Position of the last occurrence of `kind` in the list, -1 when absent.
int last_index(const EventList& events, EventKind kind);

inline constexpr std::size_t kEventKindCount = 14;

/// The facts the mode rules read from an event list.
struct EventSummary {
  SubtaskKind subtask = SubtaskKind::kPick;
  std::size_t size = 0;
  std::array<int, kEventKindCount> last{};
  std::array<int, kEventKindCount> count{};
  std::optional<EventKind> front;
  std::optional<EventKind> back;
  std::vector<EventKind> kinds;
  /// initial_dist_obj_goal <= goal radius (Place only).
  bool starts_in_goal = false;

  int idx(EventKind k) const { return last[static_cast<std::size_t>(k)]; }
  bool has(EventKind k) const { return count[static_cast<std::size_t>(k)] > 0; }
};

EventSummary summarize(const EventList& events, const Thresholds& th = {});

using ModePredicate = bool (*)(const EventSummary&);

struct ModeRule {
  std::string_view mode_id;
  ModePredicate applies;
};

/// Ordered first-match rule lists per subtask and branch.
struct ModeRules {
  std::array<std::vector<ModeRule>, 4> success;
  std::array<std::vector<ModeRule>, 4> failure;
};

const ModeRules& default_mode_rules();

/// First matching mode in the branch selected by Success membership, or
/// nullopt when no rule applies.
std::optional<std::string_view> match_mode(const EventSummary& summary, const ModeRules& rules);

struct ModeLabel {
  SubtaskKind subtask_kind = SubtaskKind::kPick;
  std::string mode_id;
  bool is_success = false;
  bool success_once = false;
  bool success_at_end = false;
  /// Set when a reading of an ambiguous rule decided the label.
  std::string interpretation;
};

/// Total for every list extract_events can produce. success_at_end is
/// filled from the mode (persistent success set); label_trajectory replaces
/// it with the predicate value at the final record.
ModeLabel classify(const EventList& events, const Thresholds& th = {},
                   const ModeRules& rules = default_mode_rules());

struct TrajectoryLabel {
  EventList events;
  ModeLabel mode;
};

TrajectoryLabel label_trajectory(const Trajectory& traj, const Thresholds& th);

struct GroupingScheme {
  std::string name;
  std::map<std::string, std::string, std::less<>> mapping;
  /// Group labels in presentation order.
  std::vector<std::string> groups;
};

/// Success modes -> S-Once, f5 -> F-Col, f7 -> F-Grasp, remaining failures -> F-Other.
const GroupingScheme& pick_coarse_scheme();
/// Throws Error(kUnknownMode) when the scheme does not cover the mode.
const std::string& group(std::string_view mode_id, const GroupingScheme& scheme);
/// Built-in name or a JSON file {"name":..,"groups":[..],"mapping":{mode:group}}.
GroupingScheme load_grouping(const std::string& name_or_path);

}  // namespace trajlab
