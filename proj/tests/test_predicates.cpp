#include <doctest.h>

#include <json.hpp>

#include "helpers.hpp"
#include "trajlab/error.hpp"
#include "trajlab/predicates.hpp"

using namespace trajlab;
using testing::blank;

TEST_SUITE("predicates") {

TEST_CASE("j_max") {
  const std::vector<double> r(7, 0.25);
  CHECK(j_max(std::span<const double>(r), std::span<const double>(r)) == 0.0);
  std::vector<double> q = r;
  const double d[] = {0.1, -0.3, 0.05, 0, 0, 0, 0};
  for (int i = 0; i < 7; ++i) q[i] += d[i];
  CHECK(j_max(std::span<const double>(q), std::span<const double>(r)) == doctest::Approx(0.3).epsilon(1e-12));
  const std::vector<double> short_q(6, 0.0);
  CHECK_THROWS_AS(j_max(std::span<const double>(short_q), std::span<const double>(r)), Error);
}

TEST_CASE("is_static") {
  TimestepRecord r;
  r.qd_arm.assign(7, 0.0f);
  CHECK(is_static(r, {}));
  r.qd_arm[2] = 0.21f;
  CHECK_FALSE(is_static(r, {}));
  r.qd_arm[2] = -0.2f;
  CHECK(is_static(r, {}));
  r.omega_base = -0.04f;
  CHECK(is_static(r, {}));
  r.v_base_y = -0.06f;
  CHECK_FALSE(is_static(r, {}));
}

TEST_CASE("pick success boundaries are inclusive") {
  Trajectory tr = blank(SubtaskKind::kPick, 2);
  auto& r = tr.records[1];
  r.grasped = true;
  r.dist_ee_rest = 0.05f;
  r.cum_robot_force = 5000.0f;
  CHECK(success_step(r, tr.header, {}));
  CHECK_FALSE(failure_step(r, tr.header, {}));
  r.cum_robot_force = 5000.1f;
  CHECK_FALSE(success_step(r, tr.header, {}));
  CHECK(failure_step(r, tr.header, {}));
  r.cum_robot_force = 0.0f;
  r.dist_ee_rest = 0.0501f;
  CHECK_FALSE(success_step(r, tr.header, {}));
  r.dist_ee_rest = 0.0f;
  r.q_arm[0] = 0.6f;
  CHECK(success_step(r, tr.header, {}));
  r.q_arm[0] = 0.61f;
  CHECK_FALSE(success_step(r, tr.header, {}));
  r.q_arm[0] = 0.0f;
  r.grasped = false;
  CHECK_FALSE(success_step(r, tr.header, {}));
}

TEST_CASE("place success needs release, goal and stillness") {
  Trajectory tr = blank(SubtaskKind::kPlace, 2);
  auto& r = tr.records[1];
  r.dist_ee_rest = 0.0f;
  r.dist_obj_goal = 0.15f;
  CHECK_FALSE(success_step(r, tr.header, {}));  // still grasped
  r.grasped = false;
  CHECK(success_step(r, tr.header, {}));
  r.dist_obj_goal = 0.1501f;
  CHECK_FALSE(success_step(r, tr.header, {}));
  r.dist_obj_goal = 0.1f;
  r.v_base_x = 0.06f;
  CHECK_FALSE(success_step(r, tr.header, {}));
  r.v_base_x = 0.0f;
  r.q_arm[6] = 0.21f;
  CHECK_FALSE(success_step(r, tr.header, {}));
}

TEST_CASE("collision limits are strict") {
  TrajectoryHeader h;
  TimestepRecord r;
  h.subtask_kind = SubtaskKind::kPick;
  r.cum_robot_force = 4999.9f;
  CHECK_FALSE(failure_step(r, h, {}));
  h.subtask_kind = SubtaskKind::kPlace;
  r.cum_robot_force = 7500.01f;
  CHECK(failure_step(r, h, {}));
  h.subtask_kind = SubtaskKind::kOpen;
  r.cum_robot_force = 10000.0f;
  CHECK_FALSE(failure_step(r, h, {}));
}

TEST_CASE("articulation indicators") {
  TrajectoryHeader h;
  h.subtask_kind = SubtaskKind::kOpen;
  h.articulation_kind = ArticulationKind::kFridge;
  h.art_qmin = 0.0;
  h.art_qmax = 1.6;
  CHECK(open_threshold(h, {}) == 1.2f);
  CHECK(is_open(1.2f, h, {}));
  CHECK_FALSE(is_open(std::nextafter(1.2f, 0.0f), h, {}));
  CHECK(is_closed(0.016f, h, {}));
  CHECK_FALSE(is_closed(0.017f, h, {}));
  CHECK(slightly_opened(0.16f, h, {}));
  CHECK_FALSE(slightly_opened(0.15f, h, {}));
  CHECK(slightly_closed(0.71f, 0.8f, h, {}));
  CHECK_FALSE(slightly_closed(0.72f, 0.8f, h, {}));

  h.articulation_kind = ArticulationKind::kDrawer;
  h.art_qmax = 0.5;
  CHECK_FALSE(is_open(0.44f, h, {}));
  CHECK(is_open(0.45f, h, {}));

  h.articulation_kind = ArticulationKind::kNone;
  CHECK_THROWS_AS(is_open(0.3f, h, {}), Error);
}

TEST_CASE("open success needs the open state at rest") {
  Trajectory tr = blank(SubtaskKind::kOpen, 2);
  auto& r = tr.records[1];
  r.dist_ee_rest = 0.0f;
  r.art_q = 1.2f;
  CHECK(success_step(r, tr.header, {}));
  r.art_q = 1.1f;
  CHECK_FALSE(success_step(r, tr.header, {}));
  r.art_q = kNaN;
  CHECK_THROWS_AS(success_step(r, tr.header, {}), Error);
}

TEST_CASE("thresholds json") {
  const Thresholds def;
  CHECK(thresholds_from_json(thresholds_to_json(def)) == def);
  const Thresholds t = thresholds_from_json(nlohmann::json{{"coll_pick", 6000}});
  CHECK(t.coll_pick == 6000.0);
  CHECK(t.coll_place == def.coll_place);
  CHECK_THROWS_AS(thresholds_from_json(nlohmann::json{{"nope", 1}}), Error);
  CHECK_THROWS_AS(thresholds_from_json(nlohmann::json{{"open_frac_fridge", 1.5}}), Error);
  CHECK(check_thresholds(def).empty());
}

TEST_CASE("header override wins") {
  TrajectoryHeader h;
  Thresholds cli;
  cli.coll_pick = 1.0;
  CHECK(&effective_thresholds(h, cli) == &cli);
  h.thresholds_override = Thresholds{};
  CHECK(effective_thresholds(h, cli).coll_pick == 5000.0);
}

}  // TEST_SUITE
