#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "trajlab/types.hpp"

namespace trajlab {

// Threshold values are rounded to the record storage precision (f32) before
// comparison, so a stored value printed as exactly the threshold meets it.

nlohmann::ordered_json thresholds_to_json(const Thresholds& th);
/// Overrides the fields present in `j` on top of `base`. Unknown keys and
/// values violating the invariants throw Error(kInvalidArgument).
Thresholds thresholds_from_json(const nlohmann::json& j, const Thresholds& base = {});
/// Empty when all values are positive and fractions lie in (0, 1).
std::vector<std::string> check_thresholds(const Thresholds& th);

/// The header's override wins over the caller-supplied table.
const Thresholds& effective_thresholds(const TrajectoryHeader& hdr, const Thresholds& th);

/// max_i |q_i - r_i|. Throws Error(kLengthMismatch) on unequal lengths.
double j_max(std::span<const double> q, std::span<const double> r);
float j_max(std::span<const float> q, std::span<const double> r);

bool is_static(const TimestepRecord& rec, const Thresholds& th);

/// Cumulative-force limit for the subtask kind.
double collision_limit(SubtaskKind kind, const Thresholds& th);

/// Per-step success conjunction. Throws Error(kRequiredFieldNaN) when a field
/// the subtask reads is NaN.
bool success_step(const TimestepRecord& rec, const TrajectoryHeader& hdr, const Thresholds& th);
/// Cumulative force strictly above the subtask limit.
bool failure_step(const TimestepRecord& rec, const TrajectoryHeader& hdr, const Thresholds& th);

// Articulation indicators. All throw Error(kMissingArticulation) when the
// header has no articulation.
bool is_open(float a_q, const TrajectoryHeader& hdr, const Thresholds& th);
bool is_closed(float a_q, const TrajectoryHeader& hdr, const Thresholds& th);
bool slightly_opened(float a_q, const TrajectoryHeader& hdr, const Thresholds& th);
/// a_q < a_q0 - slightly_close_frac * range, with a_q0 the position at record 0.
bool slightly_closed(float a_q, float a_q0, const TrajectoryHeader& hdr, const Thresholds& th);

/// Joint position at which is_open starts to hold (fraction depends on fridge/drawer).
float open_threshold(const TrajectoryHeader& hdr, const Thresholds& th);
float closed_threshold(const TrajectoryHeader& hdr, const Thresholds& th);
float slightly_open_threshold(const TrajectoryHeader& hdr, const Thresholds& th);
float slightly_closed_threshold(float a_q0, const TrajectoryHeader& hdr, const Thresholds& th);

}  // namespace trajlab
