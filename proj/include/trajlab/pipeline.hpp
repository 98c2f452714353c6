#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "trajlab/error.hpp"
#include "trajlab/events.hpp"
#include "trajlab/modes.hpp"
#include "trajlab/types.hpp"

namespace trajlab {

/// One labeled episode: the unit of `label` output.
struct LabelRecord {
  std::string episode_id;
  SubtaskKind subtask = SubtaskKind::kPick;
  std::string mode_id;
  bool success_once = false;
  bool success_at_end = false;
  std::vector<Event> events;
  float initial_dist_obj_goal = kNaN;
  Task task = Task::kCustom;
  std::string target_id;
  Split split = Split::kOther;
  std::string policy_tag;
  std::string source;
  std::string interpretation;
};

LabelRecord make_label(const Trajectory& traj, const Thresholds& th, std::string source = {});
nlohmann::ordered_json label_to_json(const LabelRecord& label);
LabelRecord label_from_json(const nlohmann::json& j);
/// Compact single-line JSON.
std::string label_line(const LabelRecord& label);
/// Reads JSON lines; blank lines are skipped. Throws Error(kParseError) with the line number.
std::vector<LabelRecord> read_labels(std::istream& in);

struct LabelFailure {
  std::string path;
  ErrorKind kind = ErrorKind::kIo;
  std::string message;
};

nlohmann::ordered_json failure_to_json(const LabelFailure& f);

struct BatchResult {
  /// Sorted by episode_id, then source.
  std::vector<LabelRecord> labels;
  /// Sorted by path.
  std::vector<LabelFailure> failures;
  std::map<std::string, std::size_t> mode_counts;
};

/// Expands directories (non-recursive, *.trjl and *.trjt) and returns a sorted,
/// de-duplicated file list. Missing paths are kept so they fail per file.
std::vector<std::filesystem::path> collect_inputs(const std::vector<std::filesystem::path>& paths);

/// Labels every input on a pool of `workers` threads (0 = hardware
/// concurrency). Output does not depend on the worker count.
BatchResult label_batch(const std::vector<std::filesystem::path>& inputs, const Thresholds& th,
                        unsigned workers);

enum class QuotaKey { kTargetId, kTargetIdTask };

struct FilterPool {
  SubtaskKind subtask = SubtaskKind::kPick;
  std::vector<std::string> modes;
  double weight = 1.0;
};

struct FilterSpec {
  std::vector<FilterPool> allow;
  std::size_t quota_per_target = 1000;
  QuotaKey quota_key = QuotaKey::kTargetId;
  std::string selection = "FirstByEpisodeId";
};

/// Throws Error(kEmptyAllowList) or Error(kInvalidArgument).
FilterSpec filter_spec_from_json(const nlohmann::json& j);
nlohmann::ordered_json filter_spec_to_json(const FilterSpec& spec);
void check_filter_spec(const FilterSpec& spec);

struct ManifestEntry {
  std::string episode_id;
  std::string source;
  SubtaskKind subtask = SubtaskKind::kPick;
  std::string mode_id;
  std::string target_id;
  Task task = Task::kCustom;
  Split split = Split::kOther;
  std::string policy_tag;
};

struct Shortfall {
  SubtaskKind subtask = SubtaskKind::kPick;
  std::string quota_key;
  std::size_t pool = 0;
  std::size_t wanted = 0;
  std::size_t selected = 0;
};

struct DatasetManifest {
  /// Sorted by episode_id.
  std::vector<ManifestEntry> entries;
  /// (target_id, mode_id) -> count.
  std::map<std::pair<std::string, std::string>, std::size_t> counts;
  std::vector<Shortfall> shortfalls;
};

/// Per (subtask, quota key) group, pool k receives round(weight_k * quota)
/// slots (largest remainder), filled with its first episodes by episode_id.
DatasetManifest filter(const std::vector<LabelRecord>& labels, const FilterSpec& spec);
nlohmann::ordered_json manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(const nlohmann::json& j);

}  // namespace trajlab
