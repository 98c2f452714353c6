#include <doctest.h>

#include <cstring>
#include <sstream>

#include "helpers.hpp"
#include "trajlab/error.hpp"
#include "trajlab/synth.hpp"
#include "trajlab/trajlog.hpp"

using namespace trajlab;
using testing::blank;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected trajlab::Error");
  return ErrorKind::kIo;
}

std::string to_bytes(const Trajectory& tr) {
  std::ostringstream os(std::ios::binary);
  write_binary(tr, os);
  return os.str();
}

}  // namespace

TEST_SUITE("trajlog") {

TEST_CASE("record size follows the declared layout") {
  CHECK(record_size(7) == 100);
  const Trajectory tr = blank(SubtaskKind::kPick, 2);
  const std::string bytes = to_bytes(tr);
  std::uint32_t header_len = 0;
  std::memcpy(&header_len, bytes.data() + 8, 4);
  CHECK(bytes.size() == kPreambleSize + header_len + 8 + 2 * 100);
  CHECK(bytes.substr(0, 4) == "TRJL");
}

TEST_CASE("writing is deterministic") {
  const Trajectory tr = blank(SubtaskKind::kOpen, 5);
  CHECK(to_bytes(tr) == to_bytes(tr));
}

TEST_CASE("decreasing cumulative force refuses to write") {
  Trajectory tr = blank(SubtaskKind::kPick, 3);
  tr.records[1].cum_robot_force = 10.0f;
  tr.records[2].cum_robot_force = 5.0f;
  std::ostringstream os;
  CHECK(kind_of([&] { write_binary(tr, os); }) == ErrorKind::kInvariantViolation);
}

TEST_CASE("binary round trip") {
  Trajectory tr = blank(SubtaskKind::kPlace, 4);
  tr.records[2].dist_obj_goal = 0.1f;
  tr.records[3].grasped = false;
  tr.header.thresholds_override = Thresholds{};
  tr.header.thresholds_override->goal_radius = 0.2;
  std::istringstream in(to_bytes(tr));
  CHECK(bit_equal(read_binary(in), tr));
}

TEST_CASE("bad magic, version and truncation") {
  const std::string good = to_bytes(blank(SubtaskKind::kPick, 2));
  {
    std::string b = good;
    b.replace(0, 4, "XXXX");
    std::istringstream in(b);
    CHECK(kind_of([&] { read_binary(in); }) == ErrorKind::kBadMagic);
  }
  {
    std::string b = good;
    b[4] = 9;
    std::istringstream in(b);
    CHECK(kind_of([&] { read_binary(in); }) == ErrorKind::kUnsupportedVersion);
  }
  {
    std::istringstream in(good.substr(0, good.size() - 1));
    CHECK(kind_of([&] { read_binary(in); }) == ErrorKind::kTruncatedFile);
  }
  {
    std::istringstream in(good.substr(0, 10));
    CHECK(kind_of([&] { read_binary(in); }) == ErrorKind::kTruncatedFile);
  }
  {
    std::string b = good;
    b[12] = '[';  // first byte of the header JSON
    std::istringstream in(b);
    CHECK(kind_of([&] { read_binary(in); }) == ErrorKind::kHeaderParseError);
  }
}

TEST_CASE("text format reads two records") {
  const Trajectory tr = blank(SubtaskKind::kPick, 2);
  std::ostringstream os;
  write_text(tr, os);
  const std::string text = os.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  std::istringstream in(text);
  const Trajectory back = read_text(in);
  CHECK(back.records.size() == 2);
  CHECK(bit_equal(back, tr));
}

TEST_CASE("text record missing a field names field and line") {
  const Trajectory tr = blank(SubtaskKind::kPick, 2);
  std::ostringstream os;
  write_text(tr, os);
  std::string text = os.str();
  const auto pos = text.rfind("\"cum_robot_force\":");
  REQUIRE(pos != std::string::npos);
  const auto end = text.find(',', pos);
  text.erase(pos, end - pos + 1);
  std::istringstream in(text);
  try {
    read_text(in);
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kParseError);
    const std::string msg = e.what();
    CHECK(msg.find("cum_robot_force") != std::string::npos);
    CHECK(msg.find("line 3") != std::string::npos);
  }
}

TEST_CASE("text keeps NaN, boundary and subnormal floats") {
  Trajectory tr = blank(SubtaskKind::kPick, 3);
  tr.records[1].force_ee_target = 1e-40f;
  tr.records[1].q_arm[3] = -0.1f;
  tr.records[2].cum_robot_force = 5000.0f;
  tr.records[2].dist_ee_rest = 0.05f;
  tr.records[0].dist_obj_goal = kNaN;
  std::ostringstream os;
  write_text(tr, os);
  CHECK(os.str().find("\"dist_obj_goal\":null") != std::string::npos);
  std::istringstream in(os.str());
  CHECK(bit_equal(read_text(in), tr));
}

TEST_CASE("format_float is shortest round-trip") {
  CHECK(format_float(0.05f) == "0.05");
  CHECK(format_float(5000.0f) == "5000.0");
  CHECK(format_float(-0.0f) == "-0.0");
  CHECK(format_float(kNaN) == "null");
}

TEST_CASE("validate") {
  SUBCASE("well formed") { CHECK(validate(blank(SubtaskKind::kPick, 3)).empty()); }
  SUBCASE("cumulative force decrease") {
    Trajectory tr = blank(SubtaskKind::kPick, 3);
    tr.records[0].cum_robot_force = 0.0f;
    tr.records[1].cum_robot_force = 10.0f;
    tr.records[2].cum_robot_force = 5.0f;
    const auto f = validate(tr);
    REQUIRE(f.size() == 1);
    CHECK(f[0].severity == Severity::kError);
    CHECK(f[0].message == "cumulative force decreased at t=2");
    CHECK(f[0].t == 2u);
  }
  SUBCASE("articulation above range warns") {
    Trajectory tr = blank(SubtaskKind::kOpen, 3);
    tr.records[1].art_q = 1.61f;
    const auto f = validate(tr);
    REQUIRE(f.size() == 1);
    CHECK(f[0].severity == Severity::kWarning);
    CHECK_FALSE(has_errors(f));
  }
  SUBCASE("missing required field") {
    Trajectory tr = blank(SubtaskKind::kOpen, 3);
    tr.records[2].art_q = kNaN;
    CHECK(has_errors(validate(tr)));
  }
  SUBCASE("too short") { CHECK(has_errors(validate(blank(SubtaskKind::kPick, 1)))); }
  SUBCASE("vector length") {
    Trajectory tr = blank(SubtaskKind::kPick, 3);
    tr.records[1].qd_arm.pop_back();
    CHECK(has_errors(validate(tr)));
  }
  SUBCASE("time index") {
    Trajectory tr = blank(SubtaskKind::kPick, 3);
    tr.records[2].t = 5;
    CHECK(has_errors(validate(tr)));
  }
  SUBCASE("negative force") {
    Trajectory tr = blank(SubtaskKind::kPick, 3);
    tr.records[2].force_ee_target = -1.0f;
    CHECK(has_errors(validate(tr)));
  }
}

TEST_CASE("file helpers pick the format by extension and content") {
  testing::TempDir dir;
  const Trajectory tr = fuzz(5, {}, SubtaskKind::kClose, {});
  save_trajectory(dir / "a.trjl", tr, format_for_path(dir / "a.trjl"));
  save_trajectory(dir / "a.trjt", tr, format_for_path(dir / "a.trjt"));
  CHECK(format_for_path(dir / "a.trjl") == FileFormat::kBinary);
  CHECK(format_for_path(dir / "a.trjt") == FileFormat::kText);
  CHECK(bit_equal(load_trajectory(dir / "a.trjl"), tr));
  CHECK(bit_equal(load_trajectory(dir / "a.trjt"), tr));
  CHECK(kind_of([&] { load_trajectory(dir / "missing.trjl"); }) == ErrorKind::kIo);
}

}  // TEST_SUITE
