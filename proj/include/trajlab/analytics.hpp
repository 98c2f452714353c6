#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "trajlab/modes.hpp"
#include "trajlab/pipeline.hpp"

namespace trajlab {

/// A percentage held as an integer count of 10^-decimals units, so printing
/// never goes through binary floating point.
struct Percent {
  std::int64_t scaled = 0;
  int decimals = 2;

  double value() const;
  std::string str() const;
  bool operator==(const Percent&) const = default;
};

/// 100 * count / total rounded half away from zero, from exact integers.
Percent percent(std::uint64_t count, std::uint64_t total, int decimals = 2);

enum class GroupKey { kTask, kTarget, kPolicy, kSplit };

/// Comma-separated list of task,target,policy,split (empty string -> none).
std::vector<GroupKey> parse_group_by(const std::string& spec);
std::string_view to_string(GroupKey key);

struct StatsRow {
  std::vector<std::string> key;
  std::uint64_t episodes = 0;
  std::uint64_t success_once = 0;
  std::uint64_t success_at_end = 0;
  std::uint64_t failures = 0;
  /// Aligned with StatsTable::columns.
  std::vector<std::uint64_t> counts;
};

struct StatsTable {
  SubtaskKind subtask = SubtaskKind::kPick;
  std::vector<GroupKey> group_by;
  /// Mode ids (success modes then failure modes) or grouping labels.
  std::vector<std::string> columns;
  /// Number of leading success columns; 0 under a grouping scheme.
  std::size_t success_columns = 0;
  std::optional<std::string> grouping;
  int decimals = 2;
  /// Sorted by key.
  std::vector<StatsRow> rows;
};

/// One table per subtask present in `labels`, in Pick/Place/Open/Close order.
/// Throws Error(kEmptyInput) for no labels, Error(kUnknownMode) when the
/// grouping does not cover a label.
std::vector<StatsTable> mode_table(const std::vector<LabelRecord>& labels,
                                   const std::vector<GroupKey>& group_by,
                                   const GroupingScheme* grouping = nullptr, int decimals = 2);

void render_markdown(const std::vector<StatsTable>& tables, std::ostream& out);
void render_csv(const std::vector<StatsTable>& tables, std::ostream& out);
nlohmann::ordered_json tables_to_json(const std::vector<StatsTable>& tables);

struct RatioReport {
  std::string mode_a;
  std::string mode_b;
  std::uint64_t count_a = 0;
  std::uint64_t count_b = 0;
  /// "a/b : 1" when a >= b, else "1 : b/a"; two decimals, trailing zeros dropped.
  std::string text;
};

/// Throws Error(kBothZero) when neither mode occurs.
RatioReport ratio_report(const std::vector<LabelRecord>& labels, const std::string& mode_a,
                         const std::string& mode_b);
RatioReport ratio_from_counts(std::uint64_t a, std::uint64_t b);
nlohmann::ordered_json ratio_to_json(const RatioReport& r);

struct ChainSlot {
  /// "Nav" (teleport) or a subtask name.
  std::string kind;
  /// Object, goal or articulation the slot is bound to, e.g. "x0", "g1", "a0".
  std::string target;
  /// "Fr"/"Dr" when the slot happens in the fridge or drawer, else empty.
  std::string articulation;
  bool auto_success = false;

  /// e.g. "Pick_Fr(x0)" or "Nav(g2)".
  std::string label() const;
};

struct ChainPlan {
  std::string task;
  std::vector<ChainSlot> slots;
};

/// tidyhouse, preparegroceries or settable (case-insensitive).
std::optional<ChainPlan> builtin_plan(const std::string& name);
/// A built-in name or a JSON plan file.
ChainPlan load_plan(const std::string& name_or_path);
nlohmann::ordered_json plan_to_json(const ChainPlan& plan);
ChainPlan plan_from_json(const nlohmann::json& j);

struct ChainEpisode {
  std::string episode_id;
  std::vector<bool> success;
};

/// JSON lines {"episode_id":..., "success":[...]}.
std::vector<ChainEpisode> read_chain_episodes(std::istream& in);

/// Percentage of episodes whose slots 1..k all succeeded, per slot k.
/// Auto-success slots always pass. Throws Error(kMisalignedEpisode) or
/// Error(kEmptyInput).
std::vector<double> progressive_completion(const std::vector<ChainEpisode>& episodes,
                                           const ChainPlan& plan);

/// 100 * product of the success rates (fractions) of non-auto slots 1..k.
/// Rates are looked up by slot label, then kind_articulation, then kind.
/// Throws Error(kMissingRate).
std::vector<double> independence_upper_bound(const std::map<std::string, double>& rates,
                                             const ChainPlan& plan);

}  // namespace trajlab
