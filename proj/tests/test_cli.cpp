#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "helpers.hpp"
#include "trajlab/cli.hpp"
#include "trajlab/synth.hpp"
#include "trajlab/trajlog.hpp"

using namespace trajlab;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args, const ModeRules* rules = nullptr) {
  args.insert(args.begin(), "trajlab");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err, rules);
  return {code, out.str(), err.str()};
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

bool always_s1(const EventSummary&) { return true; }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("label one file to stdout") {
  testing::TempDir dir;
  save_trajectory(dir / "a.trjl", realize(defining_script("pick.s1_straightforward"), 1, {}), FileFormat::kBinary);
  const Run r = run({"label", (dir / "a.trjl").string(), "--out", "-"});
  CHECK(r.code == 0);
  REQUIRE(lines(r.out) == 1);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["mode_id"] == "pick.s1_straightforward");
  CHECK(r.err.find("\"command\":\"label\"") != std::string::npos);
}

TEST_CASE("label reports partial failure") {
  testing::TempDir dir;
  save_trajectory(dir / "a.trjl", realize(defining_script("open.s1_open"), 1, {}), FileFormat::kBinary);
  save_trajectory(dir / "b.trjt", realize(defining_script("open.f7_slightly_opened"), 1, {}), FileFormat::kText);
  std::ofstream(dir / "c.trjl") << "TRJL\x01";
  const Run r = run({"label", dir.path().string(), "--workers", "2", "--quiet"});
  CHECK(r.code == 2);
  CHECK(lines(r.out) == 2);
  CHECK(r.err.find("TruncatedFile") != std::string::npos);
}

TEST_CASE("stdout does not depend on workers") {
  testing::TempDir dir;
  for (int i = 0; i < 12; ++i) {
    Trajectory tr = fuzz(episode_seed(4, i), {}, kAllSubtasks[i % 4], {});
    tr.header.episode_id = "e" + std::to_string(100 + i);
    save_trajectory(dir / (tr.header.episode_id + ".trjl"), tr, FileFormat::kBinary);
  }
  const Run a = run({"label", dir.path().string(), "--workers", "1"});
  const Run b = run({"label", dir.path().string(), "--workers", "8"});
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
}

TEST_CASE("stats, ratio, filter on a label file") {
  testing::TempDir dir;
  for (int i = 0; i < 6; ++i) {
    const char* mode = i < 4 ? "pick.s1_straightforward" : "pick.f8_drop";
    Trajectory tr = realize(defining_script(mode), i, {});
    tr.header.episode_id = "p" + std::to_string(i);
    tr.header.task = Task::kTidyHouse;
    tr.header.target_id = "002";
    save_trajectory(dir / (tr.header.episode_id + ".trjl"), tr, FileFormat::kBinary);
  }
  const std::string labels = (dir / "labels.jsonl").string();
  REQUIRE(run({"label", dir.path().string(), "--out", labels}).code == 0);

  const Run md = run({"stats", labels, "--group-by", "task"});
  CHECK(md.code == 0);
  CHECK(md.out.find("### Pick") != std::string::npos);
  CHECK(md.out.find("| TidyHouse | 6 | 66.67 | 66.67 |") != std::string::npos);

  const Run csv = run({"stats", labels, "--format", "csv", "--grouping", "pick-coarse"});
  CHECK(csv.out.find("S-Once") != std::string::npos);

  const Run ratio = run({"ratio", labels, "--a", "pick.s1_straightforward", "--b", "pick.f8_drop"});
  CHECK(ratio.out == "2 : 1\n");
  CHECK(run({"ratio", labels, "--a", "pick.s2_winding", "--b", "pick.f9_too_slow"}).code == 2);

  std::ofstream(dir / "spec.json") << R"({"allow":[{"subtask":"Pick","modes":["pick.s1_straightforward"]}],"quota_per_target":3})";
  const Run f = run({"filter", labels, "--spec", (dir / "spec.json").string()});
  CHECK(f.code == 0);
  const auto m = nlohmann::json::parse(f.out);
  CHECK(m["entries"].size() == 3);
  CHECK(m["entries"][0]["episode_id"] == "p0");

  std::ofstream(dir / "bad.json") << R"({"allow":[]})";
  CHECK(run({"filter", labels, "--spec", (dir / "bad.json").string()}).code == 1);
}

TEST_CASE("chain plan output") {
  testing::TempDir dir;
  {
    std::ofstream eps(dir / "eps.jsonl");
    for (int i = 0; i < 4; ++i) {
      eps << R"({"episode_id":"e)" << i << R"(","success":[)";
      for (int k = 0; k < 16; ++k) eps << (k ? "," : "") << (k < 4 * (i + 1) ? "true" : "false");
      eps << "]}\n";
    }
  }
  const Run r = run({"chain", (dir / "eps.jsonl").string(), "--plan", "settable"});
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["slots"].size() == 16);
  CHECK(j["progressive_completion"].size() == 16);
  CHECK(j["progressive_completion"][15] == 25.0);
  CHECK(run({"chain", "--plan", "settable"}).code == 1);
  CHECK(run({"chain", "--plan", "nosuchtask", "--bound", "x.json"}).code != 0);
}

TEST_CASE("synth, validate and convert") {
  testing::TempDir dir;
  const std::string bin = (dir / "s.trjl").string();
  const std::string txt = (dir / "s.trjt").string();
  CHECK(run({"synth", "--mode", "close.s2_dubious", "--seed", "3", "--out", bin}).code == 0);
  CHECK(run({"convert", bin, txt}).code == 0);
  CHECK(bit_equal(load_trajectory(bin), load_trajectory(txt)));
  const Run v = run({"validate", bin, txt});
  CHECK(v.code == 0);
  CHECK(lines(v.out) == 2);

  // The writers refuse invalid data, so the decrease is patched into the text.
  {
    std::ifstream in(txt);
    std::ofstream os(dir / "bad.trjt");
    std::string line;
    while (std::getline(in, line)) {
      for (const auto& [prefix, value] : {std::pair{"{\"t\":1,", "50.0"}, std::pair{"{\"t\":2,", "10.0"}}) {
        if (line.rfind(prefix, 0) != 0) continue;
        const auto k = line.find("\"cum_robot_force\":") + 18;
        line.replace(k, line.find(',', k) - k, value);
      }
      os << line << '\n';
    }
  }
  const Run vb = run({"validate", (dir / "bad.trjt").string()});
  CHECK(vb.code == 2);
  CHECK(vb.out.find("\"valid\":false") != std::string::npos);

  std::ofstream(dir / "script.json") << R"({"subtask_kind":"Pick","steps":[{"kind":"Dropped","gap":1}],"initial_grasped":false})";
  CHECK(run({"synth", "--script", (dir / "script.json").string(), "--out", bin}).code == 1);
}

TEST_CASE("fuzz writes numbered episodes") {
  testing::TempDir dir;
  const Run r = run({"fuzz", "--subtask", "place", "--n", "3", "--seed", "9", "--out", dir.path().string()});
  CHECK(r.code == 0);
  CHECK(std::filesystem::exists(dir / "place-9-000002.trjl"));
  CHECK(load_trajectory(dir / "place-9-000002.trjl").header.episode_id == "place-9-000002");
}

TEST_CASE("mece-check") {
  const Run ok = run({"mece-check", "--subtask", "pick", "--n", "1000", "--seed", "7"});
  CHECK(ok.code == 0);
  const auto j = nlohmann::json::parse(ok.out);
  CHECK(j["violations"] == 0);
  std::uint64_t total = 0;
  for (const auto& [k, v] : j["histogram"].items()) total += v.get<std::uint64_t>();
  CHECK(total == 1000);
  CHECK(lines(run({"mece-check", "--n", "50"}).out) == 4);

  CHECK(run({"mece-check", "--n", "0"}).code == 1);

  // A table that files every success under a Pick failure mode and leaves
  // Place without failure rules.
  ModeRules broken = default_mode_rules();
  broken.success[0] = {{"pick.f9_too_slow", always_s1}};
  broken.failure[1].clear();
  const Run bad = run({"mece-check", "--subtask", "all", "--n", "500", "--seed", "1"}, &broken);
  CHECK(bad.code == 3);
  CHECK(bad.out.find("counterexample") != std::string::npos);
}

TEST_CASE("usage errors") {
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"label"}).code == 1);
  CHECK(run({"stats", "x.jsonl", "--format", "xml"}).code == 1);
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"label", "--thresholds", "/nonexistent.json", "a.trjl"}).code == 1);
}

TEST_CASE("thresholds from environment and flag") {
  testing::TempDir dir;
  Trajectory tr = realize(defining_script("pick.s1_straightforward"), 1, {});
  save_trajectory(dir / "a.trjl", tr, FileFormat::kBinary);
  std::ofstream(dir / "th.json") << R"({"contact_eps":1e9})";
  const std::string file = (dir / "a.trjl").string();
  const Run strict = run({"label", file, "--thresholds", (dir / "th.json").string()});
  CHECK(nlohmann::json::parse(strict.out)["mode_id"] == "pick.s2_winding");
  ::setenv("TRAJLAB_THRESHOLDS", (dir / "th.json").c_str(), 1);
  const Run env = run({"label", file});
  ::unsetenv("TRAJLAB_THRESHOLDS");
  CHECK(env.out == strict.out);
  CHECK(nlohmann::json::parse(run({"label", file}).out)["mode_id"] == "pick.s1_straightforward");
}

}  // TEST_SUITE
