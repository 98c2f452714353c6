#include "trajlab/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "trajlab/error.hpp"
#include "trajlab/predicates.hpp"

namespace trajlab {

namespace {

[[noreturn]] void infeasible(const std::string& why) {
  throw Error(ErrorKind::kInfeasibleScript, why);
}

std::string at(std::uint32_t t) { return " at t=" + std::to_string(t); }

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

double range_max(ArticulationKind kind) { return kind == ArticulationKind::kDrawer ? 0.5 : 1.5; }

float art_level(const TrajectoryHeader& h, double frac) {
  return static_cast<float>(h.art_qmin + frac * (h.art_qmax - h.art_qmin));
}

// Rest joint offsets come from the initialization noise, snapped to a
// dyadic grid so float arithmetic on them stays exact.
std::vector<double> rest_pose(std::uint64_t seed, int dof) {
  auto p = sample_noise(NoiseModel{}, seed, dof);
  for (auto& v : p.arm) v = std::round(v * 256.0) / 256.0;
  return p.arm;
}

void pose_at_rest(TimestepRecord& r, const TrajectoryHeader& h) {
  r.dist_ee_rest = 0.01f;
  for (std::size_t i = 0; i < r.q_arm.size(); ++i) {
    r.q_arm[i] = static_cast<float>(h.rest_arm[i]);
    r.qd_arm[i] = 0.0f;
  }
  r.q_tor = static_cast<float>(h.rest_tor);
  r.v_base_x = r.v_base_y = r.omega_base = 0.0f;
}

void pose_away(TimestepRecord& r, const TrajectoryHeader& h, std::mt19937_64& rng) {
  std::uniform_real_distribution<float> far(0.3f, 1.2f);
  std::uniform_real_distribution<float> fast(0.3f, 0.8f);
  r.dist_ee_rest = far(rng);
  for (std::size_t i = 0; i < r.q_arm.size(); ++i) {
    r.q_arm[i] = static_cast<float>(h.rest_arm[i]) + far(rng);
    r.qd_arm[i] = fast(rng);
  }
  r.q_tor = static_cast<float>(h.rest_tor) + 0.1f;
  r.v_base_x = fast(rng);
  r.v_base_y = -fast(rng);
  r.omega_base = fast(rng);
}

TrajectoryHeader base_header(SubtaskKind subtask, ArticulationKind art, int dof,
                             std::uint64_t seed) {
  TrajectoryHeader h;
  h.subtask_kind = subtask;
  h.arm_dof = dof;
  h.rest_arm = rest_pose(seed, dof);
  h.rest_tor = 0.0;
  h.policy_tag = "synthetic";
  if (subtask == SubtaskKind::kOpen || subtask == SubtaskKind::kClose) {
    h.articulation_kind = art == ArticulationKind::kNone ? ArticulationKind::kFridge : art;
    h.art_qmin = 0.0;
    h.art_qmax = range_max(h.articulation_kind);
  }
  return h;
}

TimestepRecord blank_record(const TrajectoryHeader& h) {
  TimestepRecord r;
  r.q_arm.assign(static_cast<std::size_t>(h.arm_dof), 0.0f);
  r.qd_arm.assign(static_cast<std::size_t>(h.arm_dof), 0.0f);
  return r;
}

// ---------------------------------------------------------------------------
// realize

struct RealizeState {
  bool contact = false;
  bool grasped = false;
  bool at_rest = false;
  float cum = 0.0f;
  float dist = kNaN;
  float art = kNaN;
};

bool is_passive(SubtaskKind st, EventKind k) {
  if (k == EventKind::kExcessiveCollisions) return true;
  switch (st) {
    case SubtaskKind::kPick: return k == EventKind::kDropped;
    case SubtaskKind::kPlace: return k == EventKind::kObjAtGoal || k == EventKind::kObjLeftGoal;
    case SubtaskKind::kOpen:
      return k == EventKind::kOpened || k == EventKind::kClosed || k == EventKind::kSlightlyOpened;
    case SubtaskKind::kClose:
      return k == EventKind::kOpen || k == EventKind::kClosed || k == EventKind::kSlightlyClosed;
  }
  return false;
}

std::size_t order_of(SubtaskKind st, EventKind k) {
  auto a = alphabet(st);
  return static_cast<std::size_t>(std::find(a.begin(), a.end(), k) - a.begin());
}

// First of `candidates` to appear in the script, if any.
std::optional<EventKind> first_of(const EventScript& s, std::initializer_list<EventKind> candidates) {
  for (const auto& step : s.steps) {
    for (EventKind k : candidates) {
      if (step.kind == k) return k;
    }
  }
  return std::nullopt;
}

class Realizer {
 public:
  Realizer(const EventScript& s, std::uint64_t seed, const Thresholds& th)
      : script_(s), th_(th), rng_(seed) {
    hdr_ = base_header(s.subtask_kind, s.articulation_kind, 7, seed);
    hdr_.episode_id = "synth-" + lower(to_string(s.subtask_kind)) + "-" + std::to_string(seed);
  }

  Trajectory run() {
    check_shape();
    init_state();
    const std::uint32_t n = length();
    Trajectory traj;
    traj.header = hdr_;
    traj.records.push_back(make_record(0));
    std::size_t next = 0;
    for (std::uint32_t t = 1; t < n; ++t) {
      std::vector<EventKind> here;
      while (next < script_.steps.size() && times_[next] == t) here.push_back(script_.steps[next++].kind);
      if (state_.at_rest) {
        for (EventKind k : here) {
          if (k != EventKind::kSuccess && !is_passive(hdr_.subtask_kind, k)) state_.at_rest = false;
        }
      }
      for (EventKind k : here) apply(k, t, traj);
      traj.records.push_back(make_record(t));
      if (std::find(here.begin(), here.end(), EventKind::kSuccess) != here.end() &&
          !success_step(traj.records.back(), hdr_, th_)) {
        infeasible("Success" + at(t) + " cannot hold in the scripted state");
      }
    }
    verify(traj);
    return traj;
  }

 private:
  void check_shape() {
    const auto st = script_.subtask_kind;
    if ((st == SubtaskKind::kOpen || st == SubtaskKind::kClose) &&
        script_.articulation_kind == ArticulationKind::kNone) {
      infeasible(std::string(to_string(st)) + " scripts need an articulation");
    }
    std::uint32_t t = 0;
    int exc = 0;
    for (std::size_t i = 0; i < script_.steps.size(); ++i) {
      const auto& s = script_.steps[i];
      if (!in_alphabet(st, s.kind)) {
        infeasible(std::string(to_string(s.kind)) + " is not a " + std::string(to_string(st)) + " event");
      }
      if (i == 0 && s.gap < 1) infeasible("the first event needs gap >= 1 (events start at t=1)");
      if (i > 0 && s.gap == 0 &&
          order_of(st, s.kind) <= order_of(st, script_.steps[i - 1].kind)) {
        infeasible("same-step events must follow the evaluation order (" +
                   std::string(to_string(script_.steps[i - 1].kind)) + " then " +
                   std::string(to_string(s.kind)) + ")");
      }
      t += s.gap;
      times_.push_back(t);
      if (s.kind == EventKind::kExcessiveCollisions && ++exc > 1) {
        infeasible("at most one ExcessiveCollisions event");
      }
      if (s.kind == EventKind::kSuccess && exc > 0) {
        infeasible("Success cannot follow ExcessiveCollisions");
      }
    }
  }

  std::uint32_t length() const {
    const std::uint32_t last = times_.empty() ? 0 : times_.back();
    const std::uint32_t n = script_.length.value_or(last + 3);
    if (n < last + 1 || n < 2) {
      infeasible("length " + std::to_string(n) + " does not cover the last event" + at(last));
    }
    return n;
  }

  void init_state() {
    using K = EventKind;
    switch (script_.subtask_kind) {
      case SubtaskKind::kPick:
        state_.grasped = script_.initial_grasped.value_or(false);
        state_.contact = state_.grasped;
        break;
      case SubtaskKind::kPlace: {
        const auto first_grip = first_of(script_, {K::kGrasped, K::kReleasedAtGoal, K::kReleasedOutsideGoal});
        state_.grasped = script_.initial_grasped.value_or(first_grip != K::kGrasped);
        const auto first_goal = first_of(script_, {K::kObjAtGoal, K::kObjLeftGoal});
        state_.dist = script_.initial_dist_obj_goal.value_or(first_goal == K::kObjLeftGoal ? 0.05f : 0.4f);
        break;
      }
      case SubtaskKind::kOpen: {
        const auto first = first_of(script_, {K::kSlightlyOpened, K::kClosed, K::kOpened});
        double frac = 0.5;
        if (first == K::kSlightlyOpened || opened_with_slight()) frac = 0.0;
        if (first == K::kClosed) frac = 0.95;
        state_.art = script_.initial_art_q.value_or(art_level(hdr_, frac));
        break;
      }
      case SubtaskKind::kClose: {
        const auto first = first_of(script_, {K::kClosed, K::kSlightlyClosed, K::kOpen});
        state_.art = script_.initial_art_q.value_or(art_level(hdr_, first == K::kOpen ? 0.0 : 0.8));
        break;
      }
    }
    a_q0_ = state_.art;
  }

  // Opened and SlightlyOpened scripted at the same step: the door starts shut.
  bool opened_with_slight() const {
    for (std::size_t i = 0; i + 1 < script_.steps.size(); ++i) {
      if (script_.steps[i].kind == EventKind::kOpened &&
          script_.steps[i + 1].kind == EventKind::kSlightlyOpened && script_.steps[i + 1].gap == 0) {
        return true;
      }
    }
    return false;
  }

  float limit() const { return static_cast<float>(collision_limit(hdr_.subtask_kind, th_)); }
  float goal() const { return static_cast<float>(th_.goal_radius); }

  void apply(EventKind k, std::uint32_t t, Trajectory& traj) {
    const auto st = hdr_.subtask_kind;
    const std::string name(to_string(k));
    auto need = [&](bool ok, const char* what) {
      if (!ok) infeasible(name + at(t) + " requires " + what);
    };
    switch (k) {
      case EventKind::kContact:
        if (state_.contact) {
          // Lose contact silently on the previous step.
          need(!state_.grasped, "contact to be lost first, which is impossible while grasping");
          traj.records[t - 1].force_ee_target = 0.0f;
        }
        state_.contact = true;
        break;
      case EventKind::kGrasped:
        need(!state_.grasped, "the object to be released");
        if (st == SubtaskKind::kPick) need(state_.contact, "contact with the object");
        state_.grasped = true;
        break;
      case EventKind::kDropped:
        need(state_.grasped, "the object to be grasped");
        state_.grasped = false;
        break;
      case EventKind::kObjAtGoal:
        need(state_.dist > goal(), "the object outside the goal");
        state_.dist = 0.05f;
        break;
      case EventKind::kObjLeftGoal:
        need(state_.dist <= goal(), "the object inside the goal");
        state_.dist = 0.5f;
        break;
      case EventKind::kReleasedAtGoal:
        need(state_.grasped, "the object to be grasped");
        need(state_.dist <= goal(), "the object inside the goal");
        state_.grasped = false;
        break;
      case EventKind::kReleasedOutsideGoal:
        need(state_.grasped, "the object to be grasped");
        need(state_.dist > goal(), "the object outside the goal");
        state_.grasped = false;
        break;
      case EventKind::kOpened:
        need(!is_open(state_.art, hdr_, th_), "the articulation not yet open");
        state_.art = art_level(hdr_, 0.95);
        break;
      case EventKind::kSlightlyOpened:
        need(!slightly_opened(traj.records[t - 1].art_q, hdr_, th_), "the articulation below the slight-open mark");
        if (!slightly_opened(state_.art, hdr_, th_)) state_.art = art_level(hdr_, 0.3);
        break;
      case EventKind::kClosed:
        if (st == SubtaskKind::kOpen) {
          need(is_open(state_.art, hdr_, th_), "the articulation open");
          state_.art = art_level(hdr_, 0.4);
        } else {
          need(!is_closed(state_.art, hdr_, th_), "the articulation not yet closed");
          state_.art = static_cast<float>(hdr_.art_qmin);
        }
        break;
      case EventKind::kSlightlyClosed:
        need(!slightly_closed(traj.records[t - 1].art_q, a_q0_, hdr_, th_),
             "the articulation above the slight-close mark");
        if (!slightly_closed(state_.art, a_q0_, hdr_, th_)) state_.art = reopened_level();
        break;
      case EventKind::kOpen:
        need(is_closed(state_.art, hdr_, th_), "the articulation closed");
        state_.art = reopened_level();
        break;
      case EventKind::kSuccess:
        state_.at_rest = true;
        if (st == SubtaskKind::kOpen || st == SubtaskKind::kClose) state_.contact = false;
        break;
      case EventKind::kExcessiveCollisions:
        need(state_.cum <= limit(), "the collision budget not yet exceeded");
        state_.cum = limit() + 1000.0f;
        break;
    }
  }

  float reopened_level() const {
    const double range = hdr_.art_qmax - hdr_.art_qmin;
    return static_cast<float>(std::max(static_cast<double>(a_q0_) - 0.3 * range, hdr_.art_qmin + 0.2 * range));
  }

  TimestepRecord make_record(std::uint32_t t) {
    TimestepRecord r = blank_record(hdr_);
    r.t = t;
    if (state_.at_rest) {
      pose_at_rest(r, hdr_);
    } else {
      pose_away(r, hdr_, rng_);
    }
    r.cum_robot_force = state_.cum;
    r.grasped = state_.grasped;
    if (hdr_.subtask_kind != SubtaskKind::kPlace) r.force_ee_target = state_.contact ? 2.0f : 0.0f;
    r.dist_obj_goal = state_.dist;
    r.art_q = state_.art;
    return r;
  }

  void verify(const Trajectory& traj) const {
    const EventList got = extract_events(traj, th_);
    const std::size_t n = std::max(got.events.size(), script_.steps.size());
    for (std::size_t i = 0; i < n; ++i) {
      auto describe = [](std::optional<Event> e) {
        return e ? std::string(to_string(e->kind)) + "@" + std::to_string(e->t) : std::string("nothing");
      };
      std::optional<Event> want;
      std::optional<Event> have;
      if (i < script_.steps.size()) want = Event{script_.steps[i].kind, times_[i]};
      if (i < got.events.size()) have = got.events[i];
      if (want != have) {
        infeasible("event " + std::to_string(i) + ": script needs " + describe(want) +
                   " but the realized signals produce " + describe(have));
      }
    }
  }

  const EventScript& script_;
  const Thresholds& th_;
  std::mt19937_64 rng_;
  TrajectoryHeader hdr_;
  RealizeState state_;
  float a_q0_ = kNaN;
  std::vector<std::uint32_t> times_;
};

// ---------------------------------------------------------------------------
// fuzz

template <typename T>
T pick_one(std::mt19937_64& rng, std::initializer_list<T> options) {
  std::uniform_int_distribution<std::size_t> d(0, options.size() - 1);
  return *(options.begin() + static_cast<std::ptrdiff_t>(d(rng)));
}

class Fuzzer {
 public:
  Fuzzer(std::uint64_t seed, const FuzzConfig& cfg, SubtaskKind st, const Thresholds& th)
      : cfg_(cfg), th_(th), rng_(seed) {
    const auto art = coin(0.5) ? ArticulationKind::kFridge : ArticulationKind::kDrawer;
    hdr_ = base_header(st, art, std::max(cfg.arm_dof, 1), seed);
    if (coin(0.5)) std::fill(hdr_.rest_arm.begin(), hdr_.rest_arm.end(), 0.0);
    hdr_.episode_id = "fuzz-" + lower(to_string(st)) + "-" + std::to_string(seed);
    hdr_.policy_tag = "fuzz";
    hdr_.split = Split::kTrain;
    hdr_.target_id = "obj-" + std::to_string(std::uniform_int_distribution<int>(0, 3)(rng_));
    limit_ = static_cast<float>(collision_limit(st, th));
    eps_ = static_cast<float>(th.contact_eps);
  }

  Trajectory run() {
    const std::uint32_t lo = std::max<std::uint32_t>(cfg_.min_len, 2);
    const std::uint32_t hi = std::max(lo, cfg_.max_len);
    const std::uint32_t n = std::uniform_int_distribution<std::uint32_t>(lo, hi)(rng_);
    Trajectory traj;
    traj.header = hdr_;
    TimestepRecord r = initial();
    traj.records.reserve(n);
    traj.records.push_back(r);
    bool frozen = false;
    for (std::uint32_t t = 1; t < n; ++t) {
      r.t = t;
      if (frozen) {
        if (coin(cfg_.edge_density * 0.5)) passive(r);
      } else if (coin(cfg_.edge_density)) {
        actuate(r);
        if (coin(0.15)) actuate(r);
      }
      collide(r);
      // Once the success conjunction holds the robot stays put; only
      // passive changes (slips, rolls, door drift, collisions) follow.
      if (!frozen && success_step(r, hdr_, th_)) frozen = true;
      traj.records.push_back(r);
    }
    return traj;
  }

 private:
  bool coin(double p) { return std::bernoulli_distribution(std::clamp(p, 0.0, 1.0))(rng_); }
  float uniform(float a, float b) { return std::uniform_real_distribution<float>(a, b)(rng_); }
  float f(double v) const { return static_cast<float>(v); }

  TimestepRecord initial() {
    TimestepRecord r = blank_record(hdr_);
    pose_away(r, hdr_, rng_);
    switch (hdr_.subtask_kind) {
      case SubtaskKind::kPick:
        r.force_ee_target = coin(0.8) ? 0.0f : uniform(0.5f, 10.0f);
        break;
      case SubtaskKind::kPlace:
        r.grasped = coin(0.85);
        r.dist_obj_goal = goal_distance();
        break;
      case SubtaskKind::kOpen:
        r.force_ee_target = 0.0f;
        r.art_q = coin(0.8) ? f(hdr_.art_qmin) : door_level();
        break;
      case SubtaskKind::kClose:
        r.force_ee_target = 0.0f;
        r.art_q = coin(0.85) ? art_level(hdr_, pick_one(rng_, {1.0, 0.8, 0.6, 0.3})) : door_level();
        a_q0_ = r.art_q;
        break;
    }
    return r;
  }

  float goal_distance() {
    const float g = f(th_.goal_radius);
    switch (std::uniform_int_distribution<int>(0, 5)(rng_)) {
      case 0: return g;  // on the boundary counts as inside
      case 1: return std::nextafter(g, 1.0f);
      case 2: return uniform(0.0f, g);
      default: return uniform(0.2f, 1.0f);
    }
  }

  float door_level() {
    switch (std::uniform_int_distribution<int>(0, 8)(rng_)) {
      case 0: return f(hdr_.art_qmin);
      case 1: return open_threshold(hdr_, th_);
      case 2: return std::nextafter(open_threshold(hdr_, th_), -1.0f);
      case 3: return slightly_open_threshold(hdr_, th_);
      case 4: return closed_threshold(hdr_, th_);
      case 5: return std::nextafter(closed_threshold(hdr_, th_), 10.0f);
      case 6: return f(hdr_.art_qmax);
      case 7:
        if (!std::isnan(a_q0_)) return slightly_closed_threshold(a_q0_, hdr_, th_);
        [[fallthrough]];
      default: return art_level(hdr_, uniform(0.0f, 1.0f));
    }
  }

  void set_force(TimestepRecord& r, bool contact) {
    if (contact) {
      r.force_ee_target = uniform(0.5f, 20.0f);
    } else {
      r.force_ee_target = coin(0.2) ? eps_ : 0.0f;  // exactly eps is still no contact
    }
  }

  void go_rest(TimestepRecord& r) {
    pose_at_rest(r, hdr_);
    const bool pick = hdr_.subtask_kind == SubtaskKind::kPick;
    const float j_arm = f(pick ? th_.j_arm_pick : th_.j_arm_other);
    r.dist_ee_rest = coin(0.3) ? f(th_.rest_radius) : uniform(0.0f, f(th_.rest_radius));
    if (coin(0.3)) {
      const std::size_t i = std::uniform_int_distribution<std::size_t>(0, r.q_arm.size() - 1)(rng_);
      r.q_arm[i] = f(hdr_.rest_arm[i]) + (coin(0.5) ? j_arm : -j_arm * 0.5f);
    }
    if (coin(0.3)) r.q_tor = f(hdr_.rest_tor) + f(th_.j_tor_max) * (coin(0.5) ? 1.0f : -0.5f);
    if (coin(0.3)) r.qd_arm[0] = coin(0.5) ? f(th_.static_qd_arm) : -f(th_.static_qd_arm);
    if (coin(0.3)) r.v_base_x = -f(th_.static_v_base);
    if (coin(0.3)) r.omega_base = f(th_.static_omega);
    if (coin(0.35)) near_miss(r, j_arm);
    if (!pick) r.force_ee_target = hdr_.subtask_kind == SubtaskKind::kPlace ? kNaN : 0.0f;
  }

  // Breaks exactly one rest condition by a small margin.
  void near_miss(TimestepRecord& r, float j_arm) {
    switch (std::uniform_int_distribution<int>(0, 5)(rng_)) {
      case 0: r.dist_ee_rest = std::nextafter(f(th_.rest_radius), 1.0f); break;
      case 1: r.q_arm.back() = f(hdr_.rest_arm.back()) + j_arm * 1.05f; break;
      case 2: r.q_tor = f(hdr_.rest_tor) + f(th_.j_tor_max) * 1.5f; break;
      case 3: r.qd_arm.back() = f(th_.static_qd_arm) * 1.05f; break;
      case 4: r.v_base_y = f(th_.static_v_base) * 1.2f; break;
      default: r.omega_base = -f(th_.static_omega) * 1.2f; break;
    }
  }

  void actuate(TimestepRecord& r) {
    switch (hdr_.subtask_kind) {
      case SubtaskKind::kPick: actuate_pick(r); break;
      case SubtaskKind::kPlace: actuate_place(r); break;
      case SubtaskKind::kOpen:
      case SubtaskKind::kClose: actuate_door(r); break;
    }
  }

  void move_or_rest(TimestepRecord& r) {
    if (coin(0.5)) {
      go_rest(r);
    } else {
      pose_away(r, hdr_, rng_);
    }
  }

  void actuate_pick(TimestepRecord& r) {
    const bool contact = r.force_ee_target > eps_;
    switch (std::uniform_int_distribution<int>(0, 3)(rng_)) {
      case 0:
        if (!r.grasped) set_force(r, !contact);  // the gripper cannot lose contact while grasping
        break;
      case 1:
        if (!r.grasped) {
          if (!contact) set_force(r, true);
          r.grasped = true;
        } else {
          r.grasped = false;
          if (coin(0.5)) set_force(r, false);
        }
        break;
      default: move_or_rest(r); break;
    }
  }

  void actuate_place(TimestepRecord& r) {
    switch (std::uniform_int_distribution<int>(0, 3)(rng_)) {
      case 0:
        // Carried, or rolling after release.
        if (r.grasped || coin(0.3)) r.dist_obj_goal = goal_distance();
        break;
      case 1: r.grasped = !r.grasped; break;
      default: move_or_rest(r); break;
    }
  }

  void actuate_door(TimestepRecord& r) {
    const bool contact = r.force_ee_target > eps_;
    switch (std::uniform_int_distribution<int>(0, 3)(rng_)) {
      case 0: set_force(r, !contact); break;
      case 1:
        if (contact) r.art_q = door_level();
        break;
      default:
        move_or_rest(r);
        break;
    }
  }

  void passive(TimestepRecord& r) {
    switch (hdr_.subtask_kind) {
      case SubtaskKind::kPick:
        if (r.grasped) {
          r.grasped = false;
          if (coin(0.5)) r.force_ee_target = 0.0f;
        }
        break;
      case SubtaskKind::kPlace: r.dist_obj_goal = goal_distance(); break;
      case SubtaskKind::kOpen:
      case SubtaskKind::kClose: r.art_q = door_level(); break;
    }
  }

  void collide(TimestepRecord& r) {
    if (r.cum_robot_force > limit_) return;
    if (coin(cfg_.edge_density * 0.4)) r.cum_robot_force += uniform(0.0f, limit_ * 0.08f);
    if (coin(cfg_.edge_density * 0.04)) {
      r.cum_robot_force = std::max(r.cum_robot_force, coin(0.4) ? limit_ : limit_ * 1.3f);
    }
  }

  FuzzConfig cfg_;
  const Thresholds& th_;
  std::mt19937_64 rng_;
  TrajectoryHeader hdr_;
  float limit_ = 0.0f;
  float eps_ = 0.0f;
  float a_q0_ = kNaN;
};

using K = EventKind;

struct ModeScript {
  std::string_view mode;
  std::initializer_list<K> kinds;
};

const ModeScript kModeScripts[] = {
    {"pick.s1_straightforward", {K::kContact, K::kGrasped, K::kSuccess}},
    {"pick.s2_winding", {K::kContact, K::kGrasped, K::kDropped, K::kContact, K::kGrasped, K::kSuccess}},
    {"pick.s3_success_then_drop", {K::kContact, K::kGrasped, K::kSuccess, K::kDropped}},
    {"pick.s4_success_then_excessive_collisions",
     {K::kContact, K::kGrasped, K::kSuccess, K::kExcessiveCollisions}},
    {"pick.f5_excessive_collisions", {K::kContact, K::kExcessiveCollisions}},
    {"pick.f6_mobility", {}},
    {"pick.f7_cant_grasp", {K::kContact}},
    {"pick.f8_drop", {K::kContact, K::kGrasped, K::kDropped}},
    {"pick.f9_too_slow", {K::kContact, K::kGrasped}},
    {"place.s1_place_in_goal", {K::kObjAtGoal, K::kReleasedAtGoal, K::kSuccess}},
    {"place.s2_dropped_to_goal", {K::kReleasedOutsideGoal, K::kObjAtGoal, K::kSuccess}},
    {"place.s3_dubious", {K::kObjAtGoal, K::kReleasedAtGoal, K::kSuccess, K::kObjLeftGoal}},
    {"place.s4_winding",
     {K::kObjAtGoal, K::kReleasedAtGoal, K::kObjLeftGoal, K::kObjAtGoal, K::kSuccess}},
    {"place.s5_success_then_excessive_collisions",
     {K::kObjAtGoal, K::kReleasedAtGoal, K::kSuccess, K::kExcessiveCollisions}},
    {"place.f6_excessive_collisions", {K::kExcessiveCollisions}},
    {"place.f7_didnt_grasp", {}},
    {"place.f8_didnt_reach_goal", {K::kReleasedOutsideGoal}},
    {"place.f9_place_in_goal_failure", {K::kObjAtGoal, K::kReleasedAtGoal, K::kObjLeftGoal}},
    {"place.f10_dropped_to_goal_failure",
     {K::kReleasedOutsideGoal, K::kObjAtGoal, K::kObjLeftGoal}},
    {"place.f11_wont_let_go", {K::kReleasedOutsideGoal, K::kGrasped, K::kObjAtGoal}},
    {"place.f12_too_slow", {K::kObjAtGoal, K::kReleasedAtGoal}},
    {"open.s1_open", {K::kContact, K::kSlightlyOpened, K::kOpened, K::kSuccess}},
    {"open.s2_dubious", {K::kContact, K::kSlightlyOpened, K::kOpened, K::kSuccess, K::kClosed}},
    {"open.s3_success_then_excessive_collisions",
     {K::kContact, K::kSlightlyOpened, K::kOpened, K::kSuccess, K::kExcessiveCollisions}},
    {"open.f4_excessive_collisions", {K::kContact, K::kExcessiveCollisions}},
    {"open.f5_cant_reach", {}},
    {"open.f6_closed_after_open", {K::kContact, K::kSlightlyOpened, K::kOpened, K::kClosed}},
    {"open.f7_slightly_opened", {K::kContact, K::kSlightlyOpened}},
    {"open.f8_too_slow", {K::kContact, K::kSlightlyOpened, K::kOpened}},
    {"open.f9_cant_open", {K::kContact}},
    {"close.s1_close", {K::kContact, K::kSlightlyClosed, K::kClosed, K::kSuccess}},
    {"close.s2_dubious", {K::kContact, K::kSlightlyClosed, K::kClosed, K::kSuccess, K::kOpen}},
    {"close.s3_success_then_excessive_collisions",
     {K::kContact, K::kSlightlyClosed, K::kClosed, K::kSuccess, K::kExcessiveCollisions}},
    {"close.f4_excessive_collisions", {K::kContact, K::kExcessiveCollisions}},
    {"close.f5_cant_reach", {}},
    {"close.f6_opened_after_closed", {K::kContact, K::kSlightlyClosed, K::kClosed, K::kOpen}},
    {"close.f7_slightly_closed", {K::kContact, K::kSlightlyClosed}},
    {"close.f8_too_slow", {K::kContact, K::kSlightlyClosed, K::kClosed}},
    {"close.f9_cant_close", {K::kContact}},
};

}  // namespace

nlohmann::ordered_json script_to_json(const EventScript& s) {
  nlohmann::ordered_json j;
  j["subtask"] = to_string(s.subtask_kind);
  auto steps = nlohmann::ordered_json::array();
  for (const auto& step : s.steps) steps.push_back({{"kind", to_string(step.kind)}, {"gap", step.gap}});
  j["events"] = std::move(steps);
  if (s.length) j["length"] = *s.length;
  if (s.initial_grasped) j["initial_grasped"] = *s.initial_grasped;
  if (s.initial_dist_obj_goal) j["initial_dist_obj_goal"] = *s.initial_dist_obj_goal;
  if (s.initial_art_q) j["initial_art_q"] = *s.initial_art_q;
  if (s.subtask_kind == SubtaskKind::kOpen || s.subtask_kind == SubtaskKind::kClose) {
    j["articulation_kind"] = to_string(s.articulation_kind);
  }
  return j;
}

EventScript script_from_json(const nlohmann::json& j) {
  EventScript s;
  try {
    s.subtask_kind = parse_subtask(j.at("subtask").get<std::string>());
    for (const auto& e : j.at("events")) {
      ScriptStep step;
      step.kind = parse_event_kind(e.at("kind").get<std::string>());
      const auto gap = e.value("gap", std::int64_t{1});
      if (gap < 0) throw Error(ErrorKind::kInvalidArgument, "event gaps must be non-negative");
      step.gap = static_cast<std::uint32_t>(gap);
      s.steps.push_back(step);
    }
    if (j.contains("length")) s.length = j.at("length").get<std::uint32_t>();
    if (j.contains("initial_grasped")) s.initial_grasped = j.at("initial_grasped").get<bool>();
    if (j.contains("initial_dist_obj_goal")) s.initial_dist_obj_goal = j.at("initial_dist_obj_goal").get<float>();
    if (j.contains("initial_art_q")) s.initial_art_q = j.at("initial_art_q").get<float>();
    if (j.contains("articulation_kind")) {
      s.articulation_kind = parse_articulation(j.at("articulation_kind").get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, std::string("bad event script: ") + e.what());
  }
  return s;
}

Trajectory realize(const EventScript& script, std::uint64_t seed, const Thresholds& th) {
  return Realizer(script, seed, th).run();
}

EventScript defining_script(std::string_view mode_id) {
  for (const auto& ms : kModeScripts) {
    if (ms.mode != mode_id) continue;
    EventScript s;
    s.subtask_kind = parse_subtask(mode_id.substr(0, mode_id.find('.')));
    for (K k : ms.kinds) s.steps.push_back({k, 1});
    if (mode_id == "pick.s1_straightforward") s.steps[1].gap = 0;  // contact and grasp together
    return s;
  }
  throw Error(ErrorKind::kUnknownMode, "unknown mode \"" + std::string(mode_id) + "\"");
}

std::uint64_t episode_seed(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

Trajectory fuzz(std::uint64_t seed, const FuzzConfig& config, SubtaskKind subtask,
                const Thresholds& th) {
  return Fuzzer(seed, config, subtask, th).run();
}

Perturbation sample_noise(const NoiseModel& m, std::mt19937_64& rng, int arm_dof) {
  auto clipped = [&](double sigma, double clip) {
    return std::clamp(std::normal_distribution<double>(0.0, sigma)(rng), -clip, clip);
  };
  Perturbation p;
  p.arm.resize(static_cast<std::size_t>(std::max(arm_dof, 0)));
  for (auto& v : p.arm) v = clipped(m.arm_sigma, m.arm_clip);
  p.base_x = clipped(m.base_sigma, m.base_clip);
  p.base_y = clipped(m.base_sigma, m.base_clip);
  p.rotation = clipped(m.rot_sigma, m.rot_clip);
  return p;
}

Perturbation sample_noise(const NoiseModel& model, std::uint64_t seed, int arm_dof) {
  std::mt19937_64 rng(seed);
  return sample_noise(model, rng, arm_dof);
}

}  // namespace trajlab
