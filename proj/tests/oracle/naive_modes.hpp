#pragma once

// Naive transcription of the mode rules, deliberately sharing nothing with the
// library: events are plain strings, indices are recomputed by linear scans,
// and every subtask is a hand-written if/else ladder.

#include <string>
#include <vector>

namespace oracle {

// subtask: "Pick" | "Place" | "Open" | "Close". d0 is the object's initial goal
// distance (Place only). Returns the mode id, or "" if nothing matched.
std::string naive_mode(const std::string& subtask, const std::vector<std::string>& events, double d0);

}  // namespace oracle
