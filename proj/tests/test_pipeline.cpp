#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "helpers.hpp"
#include "trajlab/error.hpp"
#include "trajlab/pipeline.hpp"
#include "trajlab/synth.hpp"
#include "trajlab/trajlog.hpp"

using namespace trajlab;

namespace {

std::string render(const BatchResult& r) {
  std::string out;
  for (const auto& l : r.labels) out += label_line(l) + "\n";
  for (const auto& f : r.failures) out += failure_to_json(f).dump() + "\n";
  return out;
}

LabelRecord lab(std::string id, std::string mode, std::string target = "003") {
  LabelRecord l;
  l.episode_id = std::move(id);
  l.mode_id = std::move(mode);
  l.subtask = mode_info(l.mode_id).subtask;
  l.success_once = mode_info(l.mode_id).success;
  l.target_id = std::move(target);
  l.task = Task::kTidyHouse;
  l.split = Split::kTrain;
  return l;
}

std::string id(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "ep%05d", i);
  return buf;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("batch labels are sorted by episode id") {
  testing::TempDir dir;
  const char* ids[] = {"c", "a", "b"};
  for (int i = 0; i < 3; ++i) {
    Trajectory tr = realize(defining_script("pick.s1_straightforward"), i, {});
    tr.header.episode_id = ids[i];
    save_trajectory(dir / (std::string("f") + std::to_string(i) + ".trjl"), tr, FileFormat::kBinary);
  }
  const BatchResult r = label_batch(collect_inputs({dir.path()}), {}, 2);
  REQUIRE(r.labels.size() == 3);
  CHECK(r.labels[0].episode_id == "a");
  CHECK(r.labels[1].episode_id == "b");
  CHECK(r.labels[2].episode_id == "c");
  CHECK(r.failures.empty());
  CHECK(r.mode_counts.at("pick.s1_straightforward") == 3);
}

TEST_CASE("worker count does not change output") {
  testing::TempDir dir;
  for (int i = 0; i < 40; ++i) {
    const SubtaskKind st = kAllSubtasks[i % 4];
    Trajectory tr = fuzz(episode_seed(9, i), {}, st, {});
    tr.header.episode_id = id(i);
    save_trajectory(dir / (id(i) + (i % 2 ? ".trjt" : ".trjl")), tr, i % 2 ? FileFormat::kText : FileFormat::kBinary);
  }
  std::ofstream(dir / "broken.trjl") << "TRJL";
  const auto inputs = collect_inputs({dir.path()});
  CHECK(inputs.size() == 41);
  const std::string one = render(label_batch(inputs, {}, 1));
  CHECK(one == render(label_batch(inputs, {}, 8)));
  CHECK(one == render(label_batch(inputs, {}, 3)));
}

TEST_CASE("failures are reported per file") {
  testing::TempDir dir;
  for (int i = 0; i < 2; ++i) {
    Trajectory tr = realize(defining_script("place.s1_place_in_goal"), i, {});
    tr.header.episode_id = id(i);
    save_trajectory(dir / (id(i) + ".trjl"), tr, FileFormat::kBinary);
  }
  {
    std::ostringstream os;
    write_binary(realize(defining_script("place.s1_place_in_goal"), 7, {}), os);
    const std::string bytes = os.str();
    std::ofstream(dir / "z.trjl", std::ios::binary) << bytes.substr(0, bytes.size() - 3);
  }
  const BatchResult r = label_batch(collect_inputs({dir.path(), dir / "missing.trjl"}), {}, 1);
  CHECK(r.labels.size() == 2);
  REQUIRE(r.failures.size() == 2);
  CHECK(r.failures[0].kind == ErrorKind::kIo);
  CHECK(r.failures[1].kind == ErrorKind::kTruncatedFile);
  const auto j = failure_to_json(r.failures[1]);
  CHECK(j["error"] == "TruncatedFile");
}

TEST_CASE("label json round trip") {
  const Trajectory tr = realize(defining_script("place.s2_dropped_to_goal"), 4, {});
  const LabelRecord l = make_label(tr, {}, "x.trjl");
  const std::string line = label_line(l);
  CHECK(line.rfind(R"({"episode_id":)", 0) == 0);
  CHECK(line.find(R"("initial_dist_obj_goal":0.4)") != std::string::npos);
  std::istringstream in(line + "\n\n" + line + "\n");
  const auto back = read_labels(in);
  REQUIRE(back.size() == 2);
  CHECK(label_line(back[0]) == line);
  std::istringstream bad(line + "\n{\"episode_id\":1}\n");
  try {
    read_labels(bad);
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kParseError);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("quota and allow list") {
  std::vector<LabelRecord> labels;
  for (int i = 0; i < 2000; ++i) labels.push_back(lab(id(1999 - i), i < 1200 ? "pick.s1_straightforward" : "pick.f8_drop"));
  FilterSpec spec;
  spec.allow = {{SubtaskKind::kPick, {"pick.s1_straightforward"}, 1.0}};
  spec.quota_per_target = 1000;
  const DatasetManifest m = filter(labels, spec);
  REQUIRE(m.entries.size() == 1000);
  std::set<std::string> expected;
  std::vector<std::string> s1_ids;
  for (const auto& l : labels) {
    if (l.mode_id == "pick.s1_straightforward") s1_ids.push_back(l.episode_id);
  }
  std::sort(s1_ids.begin(), s1_ids.end());
  for (int i = 0; i < 1000; ++i) CHECK(m.entries[i].episode_id == s1_ids[i]);
  CHECK(m.counts.at({"003", "pick.s1_straightforward"}) == 1000);
  CHECK(m.shortfalls.empty());
}

TEST_CASE("weighted pools split the quota") {
  std::vector<LabelRecord> labels;
  for (int i = 0; i < 400; ++i) labels.push_back(lab(id(i), "place.s1_place_in_goal"));
  for (int i = 400; i < 800; ++i) labels.push_back(lab(id(i), "place.s2_dropped_to_goal"));
  FilterSpec spec;
  spec.allow = {{SubtaskKind::kPlace, {"place.s1_place_in_goal"}, 0.5},
                {SubtaskKind::kPlace, {"place.s2_dropped_to_goal"}, 0.5}};
  spec.quota_per_target = 500;
  const DatasetManifest m = filter(labels, spec);
  CHECK(m.entries.size() == 500);
  CHECK(m.counts.at({"003", "place.s1_place_in_goal"}) == 250);
  CHECK(m.counts.at({"003", "place.s2_dropped_to_goal"}) == 250);
}

TEST_CASE("short pools are reported") {
  std::vector<LabelRecord> labels;
  for (int i = 0; i < 300; ++i) labels.push_back(lab(id(i), "pick.s1_straightforward"));
  FilterSpec spec;
  spec.allow = {{SubtaskKind::kPick, {"pick.s1_straightforward"}, 1.0}};
  const DatasetManifest m = filter(labels, spec);
  CHECK(m.entries.size() == 300);
  REQUIRE(m.shortfalls.size() == 1);
  CHECK(m.shortfalls[0].wanted == 1000);
  CHECK(m.shortfalls[0].selected == 300);
  const auto j = manifest_to_json(m);
  CHECK(j["shortfalls"][0]["missing"] == 700);
  const DatasetManifest back = manifest_from_json(nlohmann::json::parse(j.dump()));
  CHECK(back.entries.size() == 300);
  CHECK(manifest_to_json(back).dump() == j.dump());
}

TEST_CASE("quota per target and task") {
  std::vector<LabelRecord> labels;
  for (int i = 0; i < 30; ++i) {
    LabelRecord l = lab(id(i), "pick.s1_straightforward", i % 3 == 0 ? "a" : "b");
    l.task = i % 2 ? Task::kSetTable : Task::kTidyHouse;
    labels.push_back(l);
  }
  FilterSpec spec;
  spec.allow = {{SubtaskKind::kPick, {"pick.s1_straightforward"}, 1.0}};
  spec.quota_per_target = 4;
  CHECK(filter(labels, spec).entries.size() == 8);
  spec.quota_key = QuotaKey::kTargetIdTask;
  CHECK(filter(labels, spec).entries.size() == 16);
}

TEST_CASE("filter spec validation") {
  using nlohmann::json;
  CHECK_THROWS_AS(filter_spec_from_json(json::parse(R"({"allow":[]})")), Error);
  CHECK_THROWS_AS(filter_spec_from_json(json::parse(R"({"allow":[{"subtask":"Pick","modes":["pick.s99"]}]})")), Error);
  CHECK_THROWS_AS(
      filter_spec_from_json(json::parse(R"({"allow":[{"subtask":"Pick","modes":["place.s1_place_in_goal"]}]})")),
      Error);
  CHECK_THROWS_AS(
      filter_spec_from_json(json::parse(R"({"allow":[{"subtask":"Pick","modes":["pick.f8_drop"],"weight":-1}]})")),
      Error);
  CHECK_THROWS_AS(
      filter_spec_from_json(json::parse(R"({"allow":[{"subtask":"Pick","modes":["pick.f8_drop"]}],"quota_per_target":0})")),
      Error);
  const FilterSpec a = filter_spec_from_json(json::parse(R"({"allow":[{"subtask":"Pick","modes":["pick.s1_straightforward"]}]})"));
  REQUIRE(a.allow.size() == 1);
  CHECK(a.allow[0].weight == 1.0);
  CHECK(a.quota_per_target == 1000);
  const FilterSpec b = filter_spec_from_json(json::parse(
      R"({"allow":[{"subtask":"Place","modes":["place.s1_place_in_goal"],"weight":0.5},)"
      R"({"subtask":"Place","modes":["place.s2_dropped_to_goal"],"weight":0.5}],"quota_per_target":500})"));
  CHECK(b.allow.size() == 2);
  CHECK(b.quota_per_target == 500);
  const FilterSpec c = filter_spec_from_json(json::parse(filter_spec_to_json(b).dump()));
  CHECK(filter_spec_to_json(c).dump() == filter_spec_to_json(b).dump());
}

}  // TEST_SUITE
