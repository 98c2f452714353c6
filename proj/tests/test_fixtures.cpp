#include <doctest.h>

#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "helpers.hpp"
#include "trajlab/c_api.h"
#include "trajlab/cli.hpp"
#include "trajlab/pipeline.hpp"
#include "trajlab/trajlog.hpp"

using namespace trajlab;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = TRAJLAB_FIXTURE_DIR;

struct Owned {
  int code;
  std::string text;
};

template <typename F>
Owned call(F&& f) {
  char* out = nullptr;
  const int code = f(&out);
  std::unique_ptr<char, void (*)(char*)> guard(out, trajlab_free);
  return {code, out ? out : ""};
}

std::string cli_out(std::vector<std::string> args) {
  args.insert(args.begin(), "trajlab");
  args.push_back("--quiet");
  std::ostringstream out, err;
  REQUIRE(cli::run(args, out, err) == 0);
  return out.str();
}

std::vector<fs::path> fixtures() {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(kFixtures)) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_SUITE("fixtures") {

TEST_CASE("every mode has a fixture that labels to it") {
  std::size_t seen = 0;
  for (SubtaskKind st : kAllSubtasks) {
    for (const auto& m : modes(st)) {
      const fs::path p = kFixtures / (std::string(m.id) + ".trjl");
      REQUIRE(fs::exists(p));
      CHECK(label_trajectory(load_trajectory(p), {}).mode.mode_id == m.id);
      ++seen;
    }
  }
  CHECK(seen == 39);
  CHECK(label_trajectory(load_trajectory(kFixtures / "pick_s1.trjl"), {}).mode.mode_id == "pick.s1_straightforward");
  CHECK(label_trajectory(load_trajectory(kFixtures / "place_s2.trjt"), {}).mode.mode_id == "place.s2_dropped_to_goal");
}

TEST_CASE("fixtures validate cleanly") {
  for (const auto& p : fixtures()) CHECK_FALSE(has_errors(validate(load_trajectory(p))));
}

TEST_CASE("C boundary labels match the CLI byte for byte") {
  for (const auto& p : fixtures()) {
    const Owned r = call([&](char** o) { return trajlab_label_file(p.c_str(), nullptr, o); });
    REQUIRE(r.code == 0);
    CHECK(r.text + "\n" == cli_out({"label", p.string()}));
  }
  const std::string paths = nlohmann::json::array({kFixtures.string()}).dump();
  const Owned batch = call([&](char** o) { return trajlab_label_paths(paths.c_str(), nullptr, 4, o); });
  REQUIRE(batch.code == 0);
  const auto j = nlohmann::json::parse(batch.text);
  CHECK(j["labels"].size() == fixtures().size());
  CHECK(j["failures"].empty());
}

TEST_CASE("C boundary stats and filter match the CLI") {
  testing::TempDir dir;
  const std::string labels = cli_out({"label", kFixtures.string()});
  std::ofstream(dir / "labels.jsonl") << labels;
  const std::string spec = R"({"allow":[{"subtask":"Pick","modes":["pick.s1_straightforward"]}],"quota_per_target":1})";
  std::ofstream(dir / "spec.json") << spec;

  const Owned st = call([&](char** o) { return trajlab_stats(labels.c_str(), "task", nullptr, 2, o); });
  REQUIRE(st.code == 0);
  CHECK(st.text + "\n" ==
        cli_out({"stats", (dir / "labels.jsonl").string(), "--group-by", "task", "--format", "json"}));

  const Owned f = call([&](char** o) { return trajlab_filter(labels.c_str(), spec.c_str(), o); });
  REQUIRE(f.code == 0);
  CHECK(f.text + "\n" == cli_out({"filter", (dir / "labels.jsonl").string(), "--spec", (dir / "spec.json").string()}));
}

TEST_CASE("C boundary errors carry the core error kind") {
  testing::TempDir dir;
  std::ofstream(dir / "t.trjl") << "TRJL\x01";
  const std::string p = (dir / "t.trjl").string();
  const Owned r = call([&](char** o) { return trajlab_label_file(p.c_str(), nullptr, o); });
  CHECK(std::string(trajlab_error_kind_name(r.code)) == "TruncatedFile");
  CHECK(nlohmann::json::parse(r.text)["error"] == "TruncatedFile");

  const Owned empty = call([](char** o) { return trajlab_stats("", nullptr, nullptr, 2, o); });
  CHECK(std::string(trajlab_error_kind_name(empty.code)) == "EmptyInput");
  const Owned bad = call([](char** o) { return trajlab_filter("", R"({"allow":[]})", o); });
  CHECK(std::string(trajlab_error_kind_name(bad.code)) == "EmptyAllowList");
  CHECK(std::string(trajlab_error_kind_name(0)).empty());

  const Owned th = call([](char** o) { return trajlab_thresholds_default(o); });
  CHECK(nlohmann::json::parse(th.text)["contact_eps"].is_number());
}

}  // TEST_SUITE
