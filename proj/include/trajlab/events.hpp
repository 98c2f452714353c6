#pragma once

#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "trajlab/types.hpp"

namespace trajlab {

enum class EventKind {
  kContact,
  kGrasped,
  kDropped,
  kObjAtGoal,
  kReleasedAtGoal,
  kReleasedOutsideGoal,
  kObjLeftGoal,
  kOpened,
  kSlightlyOpened,
  kClosed,
  kSlightlyClosed,
  kOpen,  // Close subtask: the articulation leaves the closed band again
  kSuccess,
  kExcessiveCollisions,
};

std::string_view to_string(EventKind kind);
EventKind parse_event_kind(std::string_view s);

/// Event kinds of a subtask, in the within-step evaluation order.
std::span<const EventKind> alphabet(SubtaskKind subtask);
bool in_alphabet(SubtaskKind subtask, EventKind kind);

struct Event {
  EventKind kind = EventKind::kContact;
  std::uint32_t t = 1;

  bool operator==(const Event&) const = default;
};

struct EventList {
  SubtaskKind subtask_kind = SubtaskKind::kPick;
  std::vector<Event> events;
  /// Object-to-goal distance at record 0; NaN outside Place.
  float initial_dist_obj_goal = kNaN;

  std::size_t size() const { return events.size(); }
  bool empty() const { return events.empty(); }
};

/// Scans t = 1..n-1 comparing each step with its predecessor. Throws
/// Error(kTooShort) for fewer than two records and Error(kRequiredFieldNaN)
/// when a signal the subtask reads is missing.
EventList extract_events(const Trajectory& traj, const Thresholds& th);

nlohmann::ordered_json events_to_json(const EventList& events);
EventList events_from_json(const nlohmann::json& j, SubtaskKind subtask);

}  // namespace trajlab
