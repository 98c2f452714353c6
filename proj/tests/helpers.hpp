#pragma once

#include <unistd.h>

#include <filesystem>
#include <string>
#include <vector>

#include "trajlab/events.hpp"
#include "trajlab/types.hpp"

namespace testing {

// A valid trajectory of `n` records with constant signals: arm away from rest,
// no contact, object away from the goal, articulation in the middle of a
// 0..1.6 fridge range.
inline trajlab::Trajectory blank(trajlab::SubtaskKind st, std::size_t n, int dof = 7) {
  using namespace trajlab;
  Trajectory tr;
  auto& h = tr.header;
  h.episode_id = "ep";
  h.subtask_kind = st;
  h.task = Task::kTidyHouse;
  h.split = Split::kTrain;
  h.target_id = "002";
  h.policy_tag = "test";
  h.arm_dof = dof;
  h.rest_arm.assign(static_cast<std::size_t>(dof), 0.0);
  const bool art = st == SubtaskKind::kOpen || st == SubtaskKind::kClose;
  if (art) {
    h.articulation_kind = ArticulationKind::kFridge;
    h.art_qmin = 0.0;
    h.art_qmax = 1.6;
  }
  for (std::size_t t = 0; t < n; ++t) {
    TimestepRecord r;
    r.t = static_cast<std::uint32_t>(t);
    r.q_arm.assign(static_cast<std::size_t>(dof), 0.0f);
    r.qd_arm.assign(static_cast<std::size_t>(dof), 0.0f);
    r.dist_ee_rest = 0.5f;
    if (st == SubtaskKind::kPlace) {
      r.dist_obj_goal = 0.4f;
      r.grasped = true;
    } else {
      r.force_ee_target = 0.0f;
    }
    if (art) r.art_q = 0.8f;
    tr.records.push_back(r);
  }
  return tr;
}

// Puts record t into the subtask's success pose (rest reached, static).
inline void at_rest(trajlab::TimestepRecord& r) { r.dist_ee_rest = 0.0f; }

inline std::vector<std::string> names(const trajlab::EventList& e) {
  std::vector<std::string> out;
  for (const auto& ev : e.events) out.emplace_back(trajlab::to_string(ev.kind));
  return out;
}

inline trajlab::EventList list(trajlab::SubtaskKind st, std::initializer_list<trajlab::EventKind> kinds,
                               float d0 = trajlab::kNaN) {
  trajlab::EventList e;
  e.subtask_kind = st;
  e.initial_dist_obj_goal = d0;
  std::uint32_t t = 1;
  for (auto k : kinds) e.events.push_back({k, t++});
  return e;
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("trajlab-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
