#include "trajlab/predicates.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "trajlab/error.hpp"

namespace trajlab {

namespace {

struct ThresholdField {
  const char* name;
  double Thresholds::*member;
  bool fraction;
};

constexpr ThresholdField kFields[] = {
    {"rest_radius", &Thresholds::rest_radius, false},
    {"goal_radius", &Thresholds::goal_radius, false},
    {"j_arm_pick", &Thresholds::j_arm_pick, false},
    {"j_arm_other", &Thresholds::j_arm_other, false},
    {"j_tor_max", &Thresholds::j_tor_max, false},
    {"static_qd_arm", &Thresholds::static_qd_arm, false},
    {"static_v_base", &Thresholds::static_v_base, false},
    {"static_omega", &Thresholds::static_omega, false},
    {"coll_pick", &Thresholds::coll_pick, false},
    {"coll_place", &Thresholds::coll_place, false},
    {"coll_artic", &Thresholds::coll_artic, false},
    {"open_frac_fridge", &Thresholds::open_frac_fridge, true},
    {"open_frac_drawer", &Thresholds::open_frac_drawer, true},
    {"close_frac", &Thresholds::close_frac, true},
    {"slightly_open_frac", &Thresholds::slightly_open_frac, true},
    {"slightly_close_frac", &Thresholds::slightly_close_frac, true},
    {"contact_eps", &Thresholds::contact_eps, false},
};

inline float as_f32(double v) { return static_cast<float>(v); }

void require_articulation(const TrajectoryHeader& hdr) {
  if (hdr.articulation_kind == ArticulationKind::kNone) {
    throw Error(ErrorKind::kMissingArticulation,
                "episode " + hdr.episode_id + " has no articulation");
  }
}

void require_value(float v, const char* field, const TimestepRecord& rec,
                   const TrajectoryHeader& hdr) {
  if (std::isnan(v)) {
    throw Error(ErrorKind::kRequiredFieldNaN,
                std::string(field) + " is NaN at t=" + std::to_string(rec.t) + " but required for " +
                    std::string(to_string(hdr.subtask_kind)));
  }
}

// Rest terms shared by Place/Open/Close: end effector at rest, arm and torso
// near their resting joints, robot static.
bool at_rest(const TimestepRecord& rec, const TrajectoryHeader& hdr, const Thresholds& th,
             double j_arm_limit, bool check_torso) {
  if (!(rec.dist_ee_rest <= as_f32(th.rest_radius))) return false;
  if (!(j_max(rec.q_arm, hdr.rest_arm) <= as_f32(j_arm_limit))) return false;
  if (check_torso &&
      !(std::abs(rec.q_tor - as_f32(hdr.rest_tor)) <= as_f32(th.j_tor_max))) {
    return false;
  }
  return is_static(rec, th);
}

}  // namespace

nlohmann::ordered_json thresholds_to_json(const Thresholds& th) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& f : kFields) j[f.name] = th.*(f.member);
  return j;
}

std::vector<std::string> check_thresholds(const Thresholds& th) {
  std::vector<std::string> problems;
  for (const auto& f : kFields) {
    const double v = th.*(f.member);
    if (!(v > 0.0) || !std::isfinite(v)) {
      problems.push_back(std::string(f.name) + " must be positive");
    } else if (f.fraction && !(v < 1.0)) {
      problems.push_back(std::string(f.name) + " must lie in (0, 1)");
    }
  }
  return problems;
}

Thresholds thresholds_from_json(const nlohmann::json& j, const Thresholds& base) {
  if (!j.is_object()) throw Error(ErrorKind::kInvalidArgument, "thresholds must be a JSON object");
  Thresholds th = base;
  for (const auto& [key, value] : j.items()) {
    const ThresholdField* field = nullptr;
    for (const auto& f : kFields) {
      if (key == f.name) field = &f;
    }
    if (field == nullptr) throw Error(ErrorKind::kInvalidArgument, "unknown threshold \"" + key + "\"");
    if (!value.is_number()) {
      throw Error(ErrorKind::kInvalidArgument, "threshold \"" + key + "\" must be a number");
    }
    th.*(field->member) = value.get<double>();
  }
  if (auto problems = check_thresholds(th); !problems.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "invalid thresholds: " + problems.front());
  }
  return th;
}

const Thresholds& effective_thresholds(const TrajectoryHeader& hdr, const Thresholds& th) {
  return hdr.thresholds_override ? *hdr.thresholds_override : th;
}

double j_max(std::span<const double> q, std::span<const double> r) {
  if (q.size() != r.size()) {
    throw Error(ErrorKind::kLengthMismatch, "joint vectors differ in length (" +
                                                std::to_string(q.size()) + " vs " +
                                                std::to_string(r.size()) + ")");
  }
  double m = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) m = std::max(m, std::abs(q[i] - r[i]));
  return m;
}

float j_max(std::span<const float> q, std::span<const double> r) {
  if (q.size() != r.size()) {
    throw Error(ErrorKind::kLengthMismatch, "joint vectors differ in length (" +
                                                std::to_string(q.size()) + " vs " +
                                                std::to_string(r.size()) + ")");
  }
  float m = 0.0f;
  for (std::size_t i = 0; i < q.size(); ++i) m = std::max(m, std::abs(q[i] - as_f32(r[i])));
  return m;
}

bool is_static(const TimestepRecord& rec, const Thresholds& th) {
  const float qd_limit = as_f32(th.static_qd_arm);
  for (float qd : rec.qd_arm) {
    if (!(std::abs(qd) <= qd_limit)) return false;
  }
  const float v_limit = as_f32(th.static_v_base);
  return std::abs(rec.v_base_x) <= v_limit && std::abs(rec.v_base_y) <= v_limit &&
         std::abs(rec.omega_base) <= as_f32(th.static_omega);
}

double collision_limit(SubtaskKind kind, const Thresholds& th) {
  switch (kind) {
    case SubtaskKind::kPick: return th.coll_pick;
    case SubtaskKind::kPlace: return th.coll_place;
    case SubtaskKind::kOpen:
    case SubtaskKind::kClose: return th.coll_artic;
  }
  return th.coll_artic;
}

bool success_step(const TimestepRecord& rec, const TrajectoryHeader& hdr, const Thresholds& th) {
  require_value(rec.cum_robot_force, "cum_robot_force", rec, hdr);
  require_value(rec.dist_ee_rest, "dist_ee_rest", rec, hdr);
  const bool within_budget =
      rec.cum_robot_force <= as_f32(collision_limit(hdr.subtask_kind, th));
  switch (hdr.subtask_kind) {
    case SubtaskKind::kPick:
      return rec.grasped && at_rest(rec, hdr, th, th.j_arm_pick, false) && within_budget;
    case SubtaskKind::kPlace:
      require_value(rec.dist_obj_goal, "dist_obj_goal", rec, hdr);
      return !rec.grasped && rec.dist_obj_goal <= as_f32(th.goal_radius) &&
             at_rest(rec, hdr, th, th.j_arm_other, true) && within_budget;
    case SubtaskKind::kOpen:
      require_value(rec.art_q, "art_q", rec, hdr);
      return is_open(rec.art_q, hdr, th) && at_rest(rec, hdr, th, th.j_arm_other, true) &&
             within_budget;
    case SubtaskKind::kClose:
      require_value(rec.art_q, "art_q", rec, hdr);
      return is_closed(rec.art_q, hdr, th) && at_rest(rec, hdr, th, th.j_arm_other, true) &&
             within_budget;
  }
  return false;
}

bool failure_step(const TimestepRecord& rec, const TrajectoryHeader& hdr, const Thresholds& th) {
  return rec.cum_robot_force > as_f32(collision_limit(hdr.subtask_kind, th));
}

float open_threshold(const TrajectoryHeader& hdr, const Thresholds& th) {
  require_articulation(hdr);
  const double frac = hdr.articulation_kind == ArticulationKind::kFridge ? th.open_frac_fridge
                                                                         : th.open_frac_drawer;
  return as_f32(frac * (hdr.art_qmax - hdr.art_qmin) + hdr.art_qmin);
}

float closed_threshold(const TrajectoryHeader& hdr, const Thresholds& th) {
  require_articulation(hdr);
  return as_f32(th.close_frac * (hdr.art_qmax - hdr.art_qmin) + hdr.art_qmin);
}

float slightly_open_threshold(const TrajectoryHeader& hdr, const Thresholds& th) {
  require_articulation(hdr);
  return as_f32(th.slightly_open_frac * (hdr.art_qmax - hdr.art_qmin) + hdr.art_qmin);
}

float slightly_closed_threshold(float a_q0, const TrajectoryHeader& hdr, const Thresholds& th) {
  require_articulation(hdr);
  return as_f32(static_cast<double>(a_q0) - th.slightly_close_frac * (hdr.art_qmax - hdr.art_qmin));
}

bool is_open(float a_q, const TrajectoryHeader& hdr, const Thresholds& th) {
  return a_q >= open_threshold(hdr, th);
}

bool is_closed(float a_q, const TrajectoryHeader& hdr, const Thresholds& th) {
  return a_q <= closed_threshold(hdr, th);
}

bool slightly_opened(float a_q, const TrajectoryHeader& hdr, const Thresholds& th) {
  return a_q >= slightly_open_threshold(hdr, th);
}

bool slightly_closed(float a_q, float a_q0, const TrajectoryHeader& hdr, const Thresholds& th) {
  return a_q < slightly_closed_threshold(a_q0, hdr, th);
}

}  // namespace trajlab
