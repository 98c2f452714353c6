#include "trajlab/types.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <string>

#include "trajlab/error.hpp"

namespace trajlab {

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo: return "IoError";
    case ErrorKind::kInvariantViolation: return "InvariantViolation";
    case ErrorKind::kBadMagic: return "BadMagic";
    case ErrorKind::kUnsupportedVersion: return "UnsupportedVersion";
    case ErrorKind::kTruncatedFile: return "TruncatedFile";
    case ErrorKind::kHeaderParseError: return "HeaderParseError";
    case ErrorKind::kParseError: return "ParseError";
    case ErrorKind::kRequiredFieldNaN: return "RequiredFieldNaN";
    case ErrorKind::kTooShort: return "TooShort";
    case ErrorKind::kMissingArticulation: return "MissingArticulation";
    case ErrorKind::kLengthMismatch: return "LengthMismatch";
    case ErrorKind::kUnknownMode: return "UnknownMode";
    case ErrorKind::kEmptyAllowList: return "EmptyAllowList";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kEmptyInput: return "EmptyInput";
    case ErrorKind::kBothZero: return "BothZero";
    case ErrorKind::kMisalignedEpisode: return "MisalignedEpisode";
    case ErrorKind::kMissingRate: return "MissingRate";
    case ErrorKind::kInfeasibleScript: return "InfeasibleScript";
  }
  return "Unknown";
}

namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const E (&values)[N], std::string_view what) {
  for (E v : values) {
    if (iequals(s, to_string(v))) return v;
  }
  throw Error(ErrorKind::kInvalidArgument,
              "unknown " + std::string(what) + " \"" + std::string(s) + "\"");
}

}  // namespace

std::string_view to_string(Task v) {
  switch (v) {
    case Task::kTidyHouse: return "TidyHouse";
    case Task::kPrepareGroceries: return "PrepareGroceries";
    case Task::kSetTable: return "SetTable";
    case Task::kCustom: return "Custom";
  }
  return "Custom";
}

std::string_view to_string(SubtaskKind v) {
  switch (v) {
    case SubtaskKind::kPick: return "Pick";
    case SubtaskKind::kPlace: return "Place";
    case SubtaskKind::kOpen: return "Open";
    case SubtaskKind::kClose: return "Close";
  }
  return "Pick";
}

std::string_view to_string(Split v) {
  switch (v) {
    case Split::kTrain: return "Train";
    case Split::kVal: return "Val";
    case Split::kOther: return "Other";
  }
  return "Other";
}

std::string_view to_string(ArticulationKind v) {
  switch (v) {
    case ArticulationKind::kNone: return "None";
    case ArticulationKind::kFridge: return "Fridge";
    case ArticulationKind::kDrawer: return "Drawer";
  }
  return "None";
}

Task parse_task(std::string_view s) {
  static constexpr Task kValues[] = {Task::kTidyHouse, Task::kPrepareGroceries, Task::kSetTable,
                                     Task::kCustom};
  return parse_enum(s, kValues, "task");
}

SubtaskKind parse_subtask(std::string_view s) {
  return parse_enum(s, kAllSubtasks, "subtask");
}

Split parse_split(std::string_view s) {
  static constexpr Split kValues[] = {Split::kTrain, Split::kVal, Split::kOther};
  return parse_enum(s, kValues, "split");
}

ArticulationKind parse_articulation(std::string_view s) {
  static constexpr ArticulationKind kValues[] = {ArticulationKind::kNone, ArticulationKind::kFridge,
                                                 ArticulationKind::kDrawer};
  return parse_enum(s, kValues, "articulation kind");
}

namespace {

bool same_bits(float a, float b) {
  return std::bit_cast<std::uint32_t>(a) == std::bit_cast<std::uint32_t>(b);
}

bool same_bits(const std::vector<float>& a, const std::vector<float>& b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](float x, float y) { return same_bits(x, y); });
}

}  // namespace

bool bit_equal(const TimestepRecord& a, const TimestepRecord& b) {
  return a.t == b.t && same_bits(a.q_arm, b.q_arm) && same_bits(a.qd_arm, b.qd_arm) &&
         same_bits(a.q_tor, b.q_tor) && same_bits(a.v_base_x, b.v_base_x) &&
         same_bits(a.v_base_y, b.v_base_y) && same_bits(a.omega_base, b.omega_base) &&
         same_bits(a.dist_ee_rest, b.dist_ee_rest) && same_bits(a.dist_obj_goal, b.dist_obj_goal) &&
         same_bits(a.force_ee_target, b.force_ee_target) &&
         same_bits(a.cum_robot_force, b.cum_robot_force) && a.grasped == b.grasped &&
         same_bits(a.art_q, b.art_q);
}

bool bit_equal(const Trajectory& a, const Trajectory& b) {
  if (!(a.header == b.header) || a.records.size() != b.records.size()) return false;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    if (!bit_equal(a.records[i], b.records[i])) return false;
  }
  return true;
}

}  // namespace trajlab
