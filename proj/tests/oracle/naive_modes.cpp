#include "naive_modes.hpp"

namespace oracle {

namespace {

using List = std::vector<std::string>;

int idx(const List& e, const std::string& name) {
  int found = -1;
  for (int i = 0; i < static_cast<int>(e.size()); ++i) {
    if (e[i] == name) found = i;
  }
  return found;
}

bool in(const List& e, const std::string& name) { return idx(e, name) != -1; }

std::string pick(const List& e) {
  const bool exc = in(e, "ExcessiveCollisions");
  const int n = static_cast<int>(e.size());
  if (in(e, "Success")) {
    if (e == List{"Contact", "Grasped", "Success"}) return "pick.s1_straightforward";
    if (n > 3 && e.front() == "Contact" && e.back() == "Success" && !exc) return "pick.s2_winding";
    if (in(e, "Dropped") && idx(e, "Dropped") > idx(e, "Grasped") && !exc) return "pick.s3_success_then_drop";
    if (exc) return "pick.s4_success_then_excessive_collisions";
    if (e.back() == "Success") return "pick.s2_winding";
    return "pick.s3_success_then_drop";
  }
  if (exc) return "pick.f5_excessive_collisions";
  if (n == 0) return "pick.f6_mobility";
  bool only_contact = true;
  for (const auto& x : e) only_contact = only_contact && x == "Contact";
  if (only_contact) return "pick.f7_cant_grasp";
  if (in(e, "Dropped") && idx(e, "Dropped") > idx(e, "Grasped")) return "pick.f8_drop";
  return "pick.f9_too_slow";
}

std::string place(const List& e, double d0) {
  const bool exc = in(e, "ExcessiveCollisions");
  const int n = static_cast<int>(e.size());
  // Logged values are f32, so the goal radius is compared at f32 as well.
  const bool d0_in = static_cast<float>(d0) <= 0.15f;
  const int at = idx(e, "ObjAtGoal");
  const int left = idx(e, "ObjLeftGoal");
  const int rat = idx(e, "ReleasedAtGoal");
  const int rout = idx(e, "ReleasedOutsideGoal");
  const int gr = idx(e, "Grasped");
  if (in(e, "Success")) {
    if (n <= 4 && (rat != -1 || d0_in) && left <= at && !exc) return "place.s1_place_in_goal";
    if (n <= 4 && (rout != -1 || !d0_in) && left <= at && !exc) return "place.s2_dropped_to_goal";
    if (at < left && !exc) return "place.s3_dubious";
    if (n > 4 && at > left && !exc) return "place.s4_winding";
    if (exc) return "place.s5_success_then_excessive_collisions";
    return "place.s4_winding";
  }
  if (exc) return "place.f6_excessive_collisions";
  if (n == 0) return "place.f7_didnt_grasp";
  if (at == -1) return "place.f8_didnt_reach_goal";
  const bool placed_latest = (n <= 2 && d0_in) || (rat > rout && rat > gr);
  if (placed_latest && left > at) return "place.f9_place_in_goal_failure";
  const bool dropped_latest = (n <= 2 && !d0_in) || (rout > rat && rout > gr);
  if (dropped_latest && left > at) return "place.f10_dropped_to_goal_failure";
  if (gr > rat && gr > rout) return "place.f11_wont_let_go";
  return "place.f12_too_slow";
}

// Open and Close written out separately on purpose.
std::string open(const List& e) {
  const bool exc = in(e, "ExcessiveCollisions");
  const int opened = idx(e, "Opened");
  const int closed = idx(e, "Closed");
  const int slight = idx(e, "SlightlyOpened");
  if (in(e, "Success")) {
    if (!exc && opened > closed) return "open.s1_open";
    if (!exc && opened < closed) return "open.s2_dubious";
    if (exc) return "open.s3_success_then_excessive_collisions";
    return "open.s1_open";
  }
  if (exc) return "open.f4_excessive_collisions";
  if (!in(e, "Contact")) return "open.f5_cant_reach";
  if (closed != -1 && closed > opened && closed > slight) return "open.f6_closed_after_open";
  if (slight > opened && slight > closed) return "open.f7_slightly_opened";
  if (opened != -1) return "open.f8_too_slow";
  return "open.f9_cant_open";
}

std::string close(const List& e) {
  const bool exc = in(e, "ExcessiveCollisions");
  const int closed = idx(e, "Closed");
  const int reopened = idx(e, "Open");
  const int slight = idx(e, "SlightlyClosed");
  if (in(e, "Success")) {
    if (!exc && closed > reopened) return "close.s1_close";
    if (!exc && closed < reopened) return "close.s2_dubious";
    if (exc) return "close.s3_success_then_excessive_collisions";
    return "close.s1_close";
  }
  if (exc) return "close.f4_excessive_collisions";
  if (!in(e, "Contact")) return "close.f5_cant_reach";
  if (reopened != -1 && reopened > closed && reopened > slight) return "close.f6_opened_after_closed";
  if (slight > closed && slight > reopened) return "close.f7_slightly_closed";
  if (closed != -1) return "close.f8_too_slow";
  return "close.f9_cant_close";
}

}  // namespace

std::string naive_mode(const std::string& subtask, const std::vector<std::string>& events, double d0) {
  if (subtask == "Pick") return pick(events);
  if (subtask == "Place") return place(events, d0);
  if (subtask == "Open") return open(events);
  if (subtask == "Close") return close(events);
  return "";
}

}  // namespace oracle
