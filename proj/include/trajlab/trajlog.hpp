#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "trajlab/types.hpp"

namespace trajlab {

// TRJL1 container: "TRJL" | u16 version | u16 flags | u32 header_len |
// header JSON | u64 n_records | fixed-size little-endian records.
inline constexpr char kMagic[4] = {'T', 'R', 'J', 'L'};
inline constexpr std::uint16_t kFormatVersion = 1;
inline constexpr std::size_t kPreambleSize = 4 + 2 + 2 + 4;

/// Bytes per record for a given arm size: t, 2*dof joint floats, 9 scalars, grasped + pad.
constexpr std::size_t record_size(int arm_dof) {
  return 4 + 4 * (2 * static_cast<std::size_t>(arm_dof) + 9) + 4;
}

enum class Severity { kError, kWarning };

struct Finding {
  Severity severity = Severity::kError;
  std::string message;
  std::optional<std::uint32_t> t;
};

/// Structural and physical sanity checks. Empty result iff the trajectory
/// is fully valid; warnings (art_q outside its range) do not block writing.
std::vector<Finding> validate(const Trajectory& traj);
bool has_errors(const std::vector<Finding>& findings);

nlohmann::ordered_json header_to_json(const TrajectoryHeader& header);
TrajectoryHeader header_from_json(const nlohmann::json& j);

/// Writes the binary container and returns the number of bytes written.
/// Throws Error(kInvariantViolation) if validate() reports errors.
std::size_t write_binary(const Trajectory& traj, std::ostream& sink);
Trajectory read_binary(std::istream& source);

/// Line-delimited text interchange: a {"header": {...}} line, then one flat
/// JSON object per record.
void write_text(const Trajectory& traj, std::ostream& sink);
Trajectory read_text(std::istream& source);

enum class FileFormat { kBinary, kText };

/// Sniffs the leading bytes to pick the reader.
Trajectory load_trajectory(const std::filesystem::path& path);
void save_trajectory(const std::filesystem::path& path, const Trajectory& traj, FileFormat format);
/// .trjl is binary; anything else is text.
FileFormat format_for_path(const std::filesystem::path& path);

/// Shortest decimal spelling that reads back to the same float.
std::string format_float(float v);

}  // namespace trajlab
