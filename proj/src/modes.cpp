#include "trajlab/modes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "trajlab/error.hpp"
#include "trajlab/predicates.hpp"

namespace trajlab {

namespace {

using K = EventKind;
using S = EventSummary;

constexpr ModeInfo kPickModes[] = {
    {"pick.s1_straightforward", SubtaskKind::kPick, true, "i"},
    {"pick.s2_winding", SubtaskKind::kPick, true, "ii"},
    {"pick.s3_success_then_drop", SubtaskKind::kPick, true, "iii"},
    {"pick.s4_success_then_excessive_collisions", SubtaskKind::kPick, true, "iv"},
    {"pick.f5_excessive_collisions", SubtaskKind::kPick, false, "v"},
    {"pick.f6_mobility", SubtaskKind::kPick, false, "vi"},
    {"pick.f7_cant_grasp", SubtaskKind::kPick, false, "vii"},
    {"pick.f8_drop", SubtaskKind::kPick, false, "viii"},
    {"pick.f9_too_slow", SubtaskKind::kPick, false, "ix"},
};

constexpr ModeInfo kPlaceModes[] = {
    {"place.s1_place_in_goal", SubtaskKind::kPlace, true, "i"},
    {"place.s2_dropped_to_goal", SubtaskKind::kPlace, true, "ii"},
    {"place.s3_dubious", SubtaskKind::kPlace, true, "iii"},
    {"place.s4_winding", SubtaskKind::kPlace, true, "iv"},
    {"place.s5_success_then_excessive_collisions", SubtaskKind::kPlace, true, "v"},
    {"place.f6_excessive_collisions", SubtaskKind::kPlace, false, "vi"},
    {"place.f7_didnt_grasp", SubtaskKind::kPlace, false, "vii"},
    {"place.f8_didnt_reach_goal", SubtaskKind::kPlace, false, "viii"},
    {"place.f9_place_in_goal_failure", SubtaskKind::kPlace, false, "ix"},
    {"place.f10_dropped_to_goal_failure", SubtaskKind::kPlace, false, "x"},
    {"place.f11_wont_let_go", SubtaskKind::kPlace, false, "xi"},
    {"place.f12_too_slow", SubtaskKind::kPlace, false, "xii"},
};

constexpr ModeInfo kOpenModes[] = {
    {"open.s1_open", SubtaskKind::kOpen, true, "i"},
    {"open.s2_dubious", SubtaskKind::kOpen, true, "ii"},
    {"open.s3_success_then_excessive_collisions", SubtaskKind::kOpen, true, "iii"},
    {"open.f4_excessive_collisions", SubtaskKind::kOpen, false, "iv"},
    {"open.f5_cant_reach", SubtaskKind::kOpen, false, "v"},
    {"open.f6_closed_after_open", SubtaskKind::kOpen, false, "vi"},
    {"open.f7_slightly_opened", SubtaskKind::kOpen, false, "vii"},
    {"open.f8_too_slow", SubtaskKind::kOpen, false, "viii"},
    {"open.f9_cant_open", SubtaskKind::kOpen, false, "ix"},
};

constexpr ModeInfo kCloseModes[] = {
    {"close.s1_close", SubtaskKind::kClose, true, "i"},
    {"close.s2_dubious", SubtaskKind::kClose, true, "ii"},
    {"close.s3_success_then_excessive_collisions", SubtaskKind::kClose, true, "iii"},
    {"close.f4_excessive_collisions", SubtaskKind::kClose, false, "iv"},
    {"close.f5_cant_reach", SubtaskKind::kClose, false, "v"},
    {"close.f6_opened_after_closed", SubtaskKind::kClose, false, "vi"},
    {"close.f7_slightly_closed", SubtaskKind::kClose, false, "vii"},
    {"close.f8_too_slow", SubtaskKind::kClose, false, "viii"},
    {"close.f9_cant_close", SubtaskKind::kClose, false, "ix"},
};

constexpr std::string_view kPersistent[] = {
    "pick.s1_straightforward", "pick.s2_winding",   "place.s1_place_in_goal",
    "place.s2_dropped_to_goal", "place.s4_winding", "open.s1_open",
    "close.s1_close"};

constexpr std::string_view kS3Interpretation = "open_close_s3_membership";

bool no_exc(const S& s) { return !s.has(K::kExcessiveCollisions); }
bool exc(const S& s) { return s.has(K::kExcessiveCollisions); }
bool always(const S&) { return true; }

// Pick -----------------------------------------------------------------------

bool pick_s1(const S& s) {
  return s.kinds == std::vector<K>{K::kContact, K::kGrasped, K::kSuccess};
}
// (contact, grasped, ..., success): opens with contact and ends on success.
bool pick_s2(const S& s) {
  return s.front == K::kContact && s.back == K::kSuccess && s.size > 3 && no_exc(s);
}
bool dropped_after_grasp(const S& s) {
  return s.has(K::kDropped) && s.idx(K::kDropped) > s.idx(K::kGrasped) && no_exc(s);
}
// Success lists no earlier rule claims: ending on the success edge reads as
// a winding success, anything after it as a post-success loss.
bool pick_success_ends_on_success(const S& s) { return s.back == K::kSuccess; }
bool pick_f6(const S& s) { return s.size == 0; }
bool pick_f7(const S& s) { return s.size > 0 && s.count[static_cast<std::size_t>(K::kContact)] == static_cast<int>(s.size); }

// Place ----------------------------------------------------------------------

bool goal_held(const S& s) { return s.idx(K::kObjLeftGoal) <= s.idx(K::kObjAtGoal); }
bool place_s1(const S& s) {
  return s.size <= 4 && (s.has(K::kReleasedAtGoal) || s.starts_in_goal) && goal_held(s) && no_exc(s);
}
bool place_s2(const S& s) {
  return s.size <= 4 && (s.has(K::kReleasedOutsideGoal) || !s.starts_in_goal) && goal_held(s) &&
         no_exc(s);
}
bool place_s3(const S& s) { return s.idx(K::kObjAtGoal) < s.idx(K::kObjLeftGoal) && no_exc(s); }
bool place_s4(const S& s) {
  return s.size > 4 && s.idx(K::kObjAtGoal) > s.idx(K::kObjLeftGoal) && no_exc(s);
}
bool place_f7(const S& s) { return s.size == 0 && no_exc(s); }
bool place_f8(const S& s) { return s.size > 0 && !s.has(K::kObjAtGoal) && no_exc(s); }
bool left_after_reaching(const S& s) {
  return s.has(K::kObjAtGoal) && s.idx(K::kObjLeftGoal) > s.idx(K::kObjAtGoal) && no_exc(s);
}
bool place_f9(const S& s) {
  const bool placed_latest =
      (s.size <= 2 && s.starts_in_goal) ||
      (s.idx(K::kReleasedAtGoal) > s.idx(K::kReleasedOutsideGoal) &&
       s.idx(K::kReleasedAtGoal) > s.idx(K::kGrasped));
  return placed_latest && left_after_reaching(s);
}
bool place_f10(const S& s) {
  const bool dropped_latest =
      (s.size <= 2 && !s.starts_in_goal) ||
      (s.idx(K::kReleasedOutsideGoal) > s.idx(K::kReleasedAtGoal) &&
       s.idx(K::kReleasedOutsideGoal) > s.idx(K::kGrasped));
  return dropped_latest && left_after_reaching(s);
}
bool place_f11(const S& s) {
  return s.has(K::kObjAtGoal) && s.idx(K::kGrasped) > s.idx(K::kReleasedAtGoal) &&
         s.idx(K::kGrasped) > s.idx(K::kReleasedOutsideGoal) && no_exc(s);
}

// Open / Close -----------------------------------------------------------------
// `Reached` is the target state edge (Opened / Closed), `Undone` its reversal
// (Closed / Open), `Partial` the slight-progress edge.

template <K Reached, K Undone, K Partial>
struct Articulated {
  static bool s1(const S& s) { return no_exc(s) && s.idx(Reached) > s.idx(Undone); }
  static bool s2(const S& s) { return no_exc(s) && s.idx(Reached) < s.idx(Undone); }
  // Both edges absent: the success edge alone decides.
  static bool s_residual(const S& s) { return no_exc(s); }
  static bool f5(const S& s) { return !s.has(K::kContact) && no_exc(s); }
  static bool f6(const S& s) {
    return s.has(Undone) && s.idx(Undone) > s.idx(Reached) && s.idx(Undone) > s.idx(Partial) &&
           no_exc(s);
  }
  static bool f7(const S& s) {
    return s.idx(Partial) > s.idx(Reached) && s.idx(Partial) > s.idx(Undone) && no_exc(s);
  }
  static bool f8(const S& s) { return s.has(Reached); }
};

using OpenRules = Articulated<K::kOpened, K::kClosed, K::kSlightlyOpened>;
using CloseRules = Articulated<K::kClosed, K::kOpen, K::kSlightlyClosed>;

ModeRules build_default_rules() {
  ModeRules r;
  const auto pick = static_cast<std::size_t>(SubtaskKind::kPick);
  const auto place = static_cast<std::size_t>(SubtaskKind::kPlace);
  const auto open = static_cast<std::size_t>(SubtaskKind::kOpen);
  const auto close = static_cast<std::size_t>(SubtaskKind::kClose);

  r.success[pick] = {
      {"pick.s1_straightforward", pick_s1},
      {"pick.s2_winding", pick_s2},
      {"pick.s3_success_then_drop", dropped_after_grasp},
      {"pick.s4_success_then_excessive_collisions", exc},
      {"pick.s2_winding", pick_success_ends_on_success},
      {"pick.s3_success_then_drop", always},
  };
  r.failure[pick] = {
      {"pick.f5_excessive_collisions", exc},
      {"pick.f6_mobility", pick_f6},
      {"pick.f7_cant_grasp", pick_f7},
      {"pick.f8_drop", dropped_after_grasp},
      {"pick.f9_too_slow", always},
  };

  r.success[place] = {
      {"place.s1_place_in_goal", place_s1},
      {"place.s2_dropped_to_goal", place_s2},
      {"place.s3_dubious", place_s3},
      {"place.s4_winding", place_s4},
      {"place.s5_success_then_excessive_collisions", exc},
      // Long lists where the object never crossed the goal boundary.
      {"place.s4_winding", always},
  };
  r.failure[place] = {
      {"place.f6_excessive_collisions", exc},
      {"place.f7_didnt_grasp", place_f7},
      {"place.f8_didnt_reach_goal", place_f8},
      {"place.f9_place_in_goal_failure", place_f9},
      {"place.f10_dropped_to_goal_failure", place_f10},
      {"place.f11_wont_let_go", place_f11},
      {"place.f12_too_slow", always},
  };

  r.success[open] = {
      {"open.s1_open", OpenRules::s1},
      {"open.s2_dubious", OpenRules::s2},
      {"open.s3_success_then_excessive_collisions", exc},
      {"open.s1_open", OpenRules::s_residual},
  };
  r.failure[open] = {
      {"open.f4_excessive_collisions", exc},
      {"open.f5_cant_reach", OpenRules::f5},
      {"open.f6_closed_after_open", OpenRules::f6},
      {"open.f7_slightly_opened", OpenRules::f7},
      {"open.f8_too_slow", OpenRules::f8},
      {"open.f9_cant_open", always},
  };

  r.success[close] = {
      {"close.s1_close", CloseRules::s1},
      {"close.s2_dubious", CloseRules::s2},
      {"close.s3_success_then_excessive_collisions", exc},
      {"close.s1_close", CloseRules::s_residual},
  };
  r.failure[close] = {
      {"close.f4_excessive_collisions", exc},
      {"close.f5_cant_reach", CloseRules::f5},
      {"close.f6_opened_after_closed", CloseRules::f6},
      {"close.f7_slightly_closed", CloseRules::f7},
      {"close.f8_too_slow", CloseRules::f8},
      {"close.f9_cant_close", always},
  };
  return r;
}

GroupingScheme build_pick_coarse() {
  GroupingScheme g;
  g.name = "pick-coarse";
  g.groups = {"S-Once", "F-Col", "F-Grasp", "F-Other"};
  for (const auto& m : kPickModes) {
    std::string grp = "F-Other";
    if (m.success) {
      grp = "S-Once";
    } else if (m.id == "pick.f5_excessive_collisions") {
      grp = "F-Col";
    } else if (m.id == "pick.f7_cant_grasp") {
      grp = "F-Grasp";
    }
    g.mapping.emplace(std::string(m.id), grp);
  }
  return g;
}

}  // namespace

std::span<const ModeInfo> modes(SubtaskKind subtask) {
  switch (subtask) {
    case SubtaskKind::kPick: return kPickModes;
    case SubtaskKind::kPlace: return kPlaceModes;
    case SubtaskKind::kOpen: return kOpenModes;
    case SubtaskKind::kClose: return kCloseModes;
  }
  return kPickModes;
}

const ModeInfo& mode_info(std::string_view mode_id) {
  for (SubtaskKind st : kAllSubtasks) {
    for (const auto& m : modes(st)) {
      if (m.id == mode_id) return m;
    }
  }
  throw Error(ErrorKind::kUnknownMode, "unknown mode \"" + std::string(mode_id) + "\"");
}

bool is_known_mode(std::string_view mode_id) {
  for (SubtaskKind st : kAllSubtasks) {
    for (const auto& m : modes(st)) {
      if (m.id == mode_id) return true;
    }
  }
  return false;
}

bool is_persistent_success_mode(std::string_view mode_id) {
  return std::find(std::begin(kPersistent), std::end(kPersistent), mode_id) != std::end(kPersistent);
}

int last_index(const EventList& events, EventKind kind) {
  for (std::size_t i = events.events.size(); i-- > 0;) {
    if (events.events[i].kind == kind) return static_cast<int>(i);
  }
  return -1;
}

EventSummary summarize(const EventList& events, const Thresholds& th) {
  EventSummary s;
  s.subtask = events.subtask_kind;
  s.size = events.events.size();
  s.last.fill(-1);
  s.kinds.reserve(s.size);
  for (std::size_t i = 0; i < events.events.size(); ++i) {
    const auto k = static_cast<std::size_t>(events.events[i].kind);
    s.last[k] = static_cast<int>(i);
    ++s.count[k];
    s.kinds.push_back(events.events[i].kind);
  }
  if (!s.kinds.empty()) {
    s.front = s.kinds.front();
    s.back = s.kinds.back();
  }
  s.starts_in_goal = events.initial_dist_obj_goal <= static_cast<float>(th.goal_radius);
  return s;
}

const ModeRules& default_mode_rules() {
  static const ModeRules rules = build_default_rules();
  return rules;
}

std::optional<std::string_view> match_mode(const EventSummary& summary, const ModeRules& rules) {
  const auto st = static_cast<std::size_t>(summary.subtask);
  const auto& branch = summary.has(EventKind::kSuccess) ? rules.success[st] : rules.failure[st];
  for (const auto& rule : branch) {
    if (rule.applies(summary)) return rule.mode_id;
  }
  return std::nullopt;
}

ModeLabel classify(const EventList& events, const Thresholds& th, const ModeRules& rules) {
  const EventSummary summary = summarize(events, th);
  const auto id = match_mode(summary, rules);
  if (!id) {
    throw Error(ErrorKind::kInvariantViolation,
                "no mode applies to " + events_to_json(events).dump());
  }
  const ModeInfo& info = mode_info(*id);
  ModeLabel label;
  label.subtask_kind = events.subtask_kind;
  label.mode_id = std::string(info.id);
  label.is_success = info.success;
  label.success_once = summary.has(EventKind::kSuccess);
  label.success_at_end = is_persistent_success_mode(info.id);
  if ((info.subtask == SubtaskKind::kOpen || info.subtask == SubtaskKind::kClose) &&
      info.numeral == "iii") {
    label.interpretation = std::string(kS3Interpretation);
  }
  return label;
}

TrajectoryLabel label_trajectory(const Trajectory& traj, const Thresholds& th) {
  TrajectoryLabel out;
  out.events = extract_events(traj, th);
  const Thresholds& eff = effective_thresholds(traj.header, th);
  out.mode = classify(out.events, eff);
  out.mode.success_at_end = success_step(traj.records.back(), traj.header, eff);
  return out;
}

const GroupingScheme& pick_coarse_scheme() {
  static const GroupingScheme scheme = build_pick_coarse();
  return scheme;
}

const std::string& group(std::string_view mode_id, const GroupingScheme& scheme) {
  auto it = scheme.mapping.find(mode_id);
  if (it == scheme.mapping.end()) {
    throw Error(ErrorKind::kUnknownMode, "grouping \"" + scheme.name + "\" does not cover mode \"" +
                                             std::string(mode_id) + "\"");
  }
  return it->second;
}

GroupingScheme load_grouping(const std::string& name_or_path) {
  if (name_or_path == "pick-coarse") return pick_coarse_scheme();
  std::ifstream in(name_or_path);
  if (!in) throw Error(ErrorKind::kInvalidArgument, "unknown grouping \"" + name_or_path + "\"");
  GroupingScheme g;
  try {
    const auto j = nlohmann::json::parse(in);
    g.name = j.value("name", name_or_path);
    for (const auto& [mode, grp] : j.at("mapping").items()) {
      mode_info(mode);
      g.mapping.emplace(mode, grp.get<std::string>());
    }
    if (j.contains("groups")) {
      g.groups = j.at("groups").get<std::vector<std::string>>();
    } else {
      for (const auto& [mode, grp] : g.mapping) {
        if (std::find(g.groups.begin(), g.groups.end(), grp) == g.groups.end()) g.groups.push_back(grp);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, "bad grouping file: " + std::string(e.what()));
  }
  return g;
}

}  // namespace trajlab
