#include "trajlab/events.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "trajlab/error.hpp"
#include "trajlab/predicates.hpp"
#include "trajlab/trajlog.hpp"

namespace trajlab {

namespace {

constexpr EventKind kPickOrder[] = {EventKind::kContact, EventKind::kGrasped, EventKind::kDropped,
                                    EventKind::kSuccess, EventKind::kExcessiveCollisions};
constexpr EventKind kPlaceOrder[] = {EventKind::kGrasped,         EventKind::kObjAtGoal,
                                     EventKind::kReleasedAtGoal,  EventKind::kReleasedOutsideGoal,
                                     EventKind::kObjLeftGoal,     EventKind::kSuccess,
                                     EventKind::kExcessiveCollisions};
constexpr EventKind kOpenOrder[] = {EventKind::kContact, EventKind::kOpened,
                                    EventKind::kSlightlyOpened, EventKind::kClosed,
                                    EventKind::kSuccess, EventKind::kExcessiveCollisions};
constexpr EventKind kCloseOrder[] = {EventKind::kContact, EventKind::kClosed,
                                     EventKind::kSlightlyClosed, EventKind::kOpen,
                                     EventKind::kSuccess, EventKind::kExcessiveCollisions};

constexpr EventKind kAllKinds[] = {
    EventKind::kContact,        EventKind::kGrasped,        EventKind::kDropped,
    EventKind::kObjAtGoal,      EventKind::kReleasedAtGoal, EventKind::kReleasedOutsideGoal,
    EventKind::kObjLeftGoal,    EventKind::kOpened,         EventKind::kSlightlyOpened,
    EventKind::kClosed,         EventKind::kSlightlyClosed, EventKind::kOpen,
    EventKind::kSuccess,        EventKind::kExcessiveCollisions};

// Per-step indicator values an edge is taken over.
struct StepState {
  bool contact = false;
  bool grasped = false;
  bool at_goal = false;
  bool open = false;
  bool slightly_opened = false;
  bool closed = false;
  bool slightly_closed = false;
  bool success = false;
  bool over_limit = false;
  float dist_obj_goal = kNaN;
};

void require(float v, const char* field, const TimestepRecord& rec, SubtaskKind subtask) {
  if (std::isnan(v)) {
    throw Error(ErrorKind::kRequiredFieldNaN, std::string(field) + " is NaN at t=" +
                                                  std::to_string(rec.t) + " but required for " +
                                                  std::string(to_string(subtask)));
  }
}

StepState observe(const TimestepRecord& rec, const TrajectoryHeader& hdr, const Thresholds& th,
                  float a_q0) {
  StepState s;
  const auto subtask = hdr.subtask_kind;
  const float eps = static_cast<float>(th.contact_eps);
  s.grasped = rec.grasped;
  s.success = success_step(rec, hdr, th);
  s.over_limit = failure_step(rec, hdr, th);
  switch (subtask) {
    case SubtaskKind::kPick:
      require(rec.force_ee_target, "force_ee_target", rec, subtask);
      s.contact = rec.force_ee_target > eps;
      break;
    case SubtaskKind::kPlace:
      require(rec.dist_obj_goal, "dist_obj_goal", rec, subtask);
      s.dist_obj_goal = rec.dist_obj_goal;
      s.at_goal = rec.dist_obj_goal <= static_cast<float>(th.goal_radius);
      break;
    case SubtaskKind::kOpen:
      require(rec.force_ee_target, "force_ee_target", rec, subtask);
      require(rec.art_q, "art_q", rec, subtask);
      s.contact = rec.force_ee_target > eps;
      s.open = is_open(rec.art_q, hdr, th);
      s.slightly_opened = slightly_opened(rec.art_q, hdr, th);
      break;
    case SubtaskKind::kClose:
      require(rec.force_ee_target, "force_ee_target", rec, subtask);
      require(rec.art_q, "art_q", rec, subtask);
      s.contact = rec.force_ee_target > eps;
      s.closed = is_closed(rec.art_q, hdr, th);
      s.slightly_closed = slightly_closed(rec.art_q, a_q0, hdr, th);
      break;
  }
  return s;
}

bool fires(SubtaskKind subtask, EventKind kind, const StepState& p, const StepState& c) {
  switch (kind) {
    case EventKind::kContact: return !p.contact && c.contact;
    case EventKind::kGrasped: return !p.grasped && c.grasped;
    case EventKind::kDropped: return p.grasped && !c.grasped;
    case EventKind::kObjAtGoal: return !p.at_goal && c.at_goal;
    case EventKind::kReleasedAtGoal: return p.grasped && !c.grasped && c.at_goal;
    case EventKind::kReleasedOutsideGoal: return p.grasped && !c.grasped && !c.at_goal;
    case EventKind::kObjLeftGoal: return p.at_goal && !c.at_goal;
    case EventKind::kOpened: return !p.open && c.open;
    case EventKind::kSlightlyOpened: return !p.slightly_opened && c.slightly_opened;
    case EventKind::kClosed:
      // Open subtask: leaves the open band; Close subtask: enters the closed band.
      return subtask == SubtaskKind::kOpen ? (p.open && !c.open) : (!p.closed && c.closed);
    case EventKind::kSlightlyClosed: return !p.slightly_closed && c.slightly_closed;
    case EventKind::kOpen: return p.closed && !c.closed;
    case EventKind::kSuccess: return !p.success && c.success;
    case EventKind::kExcessiveCollisions: return !p.over_limit && c.over_limit;
  }
  return false;
}

}  // namespace

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kContact: return "Contact";
    case EventKind::kGrasped: return "Grasped";
    case EventKind::kDropped: return "Dropped";
    case EventKind::kObjAtGoal: return "ObjAtGoal";
    case EventKind::kReleasedAtGoal: return "ReleasedAtGoal";
    case EventKind::kReleasedOutsideGoal: return "ReleasedOutsideGoal";
    case EventKind::kObjLeftGoal: return "ObjLeftGoal";
    case EventKind::kOpened: return "Opened";
    case EventKind::kSlightlyOpened: return "SlightlyOpened";
    case EventKind::kClosed: return "Closed";
    case EventKind::kSlightlyClosed: return "SlightlyClosed";
    case EventKind::kOpen: return "Open";
    case EventKind::kSuccess: return "Success";
    case EventKind::kExcessiveCollisions: return "ExcessiveCollisions";
  }
  return "Contact";
}

EventKind parse_event_kind(std::string_view s) {
  for (EventKind k : kAllKinds) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown event kind \"" + std::string(s) + "\"");
}

std::span<const EventKind> alphabet(SubtaskKind subtask) {
  switch (subtask) {
    case SubtaskKind::kPick: return kPickOrder;
    case SubtaskKind::kPlace: return kPlaceOrder;
    case SubtaskKind::kOpen: return kOpenOrder;
    case SubtaskKind::kClose: return kCloseOrder;
  }
  return kPickOrder;
}

bool in_alphabet(SubtaskKind subtask, EventKind kind) {
  auto a = alphabet(subtask);
  return std::find(a.begin(), a.end(), kind) != a.end();
}

EventList extract_events(const Trajectory& traj, const Thresholds& base) {
  const auto& hdr = traj.header;
  if (traj.records.size() < 2) {
    throw Error(ErrorKind::kTooShort, "episode " + hdr.episode_id + " has " +
                                          std::to_string(traj.records.size()) +
                                          " records; events need at least 2");
  }
  const Thresholds& th = effective_thresholds(hdr, base);
  EventList out;
  out.subtask_kind = hdr.subtask_kind;
  if (hdr.subtask_kind == SubtaskKind::kPlace) {
    require(traj.records.front().dist_obj_goal, "dist_obj_goal", traj.records.front(), hdr.subtask_kind);
    out.initial_dist_obj_goal = traj.records.front().dist_obj_goal;
  }
  const float a_q0 = traj.records.front().art_q;
  const auto order = alphabet(hdr.subtask_kind);

  StepState prev = observe(traj.records.front(), hdr, th, a_q0);
  for (std::size_t i = 1; i < traj.records.size(); ++i) {
    const StepState cur = observe(traj.records[i], hdr, th, a_q0);
    for (EventKind kind : order) {
      if (fires(hdr.subtask_kind, kind, prev, cur)) out.events.push_back({kind, static_cast<std::uint32_t>(i)});
    }
    prev = cur;
  }
  return out;
}

nlohmann::ordered_json events_to_json(const EventList& events) {
  nlohmann::ordered_json j;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& e : events.events) {
    arr.push_back({{"kind", to_string(e.kind)}, {"t", e.t}});
  }
  j["events"] = std::move(arr);
  if (events.subtask_kind == SubtaskKind::kPlace && !std::isnan(events.initial_dist_obj_goal)) {
    j["initial_dist_obj_goal"] = std::stod(format_float(events.initial_dist_obj_goal));
  }
  return j;
}

EventList events_from_json(const nlohmann::json& j, SubtaskKind subtask) {
  EventList out;
  out.subtask_kind = subtask;
  try {
    for (const auto& e : j.at("events")) {
      const EventKind kind = parse_event_kind(e.at("kind").get<std::string>());
      if (!in_alphabet(subtask, kind)) {
        throw Error(ErrorKind::kInvalidArgument, "event " + std::string(to_string(kind)) +
                                                     " is not in the " +
                                                     std::string(to_string(subtask)) + " alphabet");
      }
      out.events.push_back({kind, e.at("t").get<std::uint32_t>()});
    }
    if (j.contains("initial_dist_obj_goal") && !j.at("initial_dist_obj_goal").is_null()) {
      out.initial_dist_obj_goal = j.at("initial_dist_obj_goal").get<float>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, std::string("bad event list: ") + e.what());
  }
  return out;
}

}  // namespace trajlab
