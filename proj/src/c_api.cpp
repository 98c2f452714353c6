#include "trajlab/c_api.h"

#include <array>
#include <cstring>
#include <sstream>

#include <json.hpp>

#include "trajlab/analytics.hpp"
#include "trajlab/error.hpp"
#include "trajlab/pipeline.hpp"
#include "trajlab/predicates.hpp"

using namespace trajlab;
using nlohmann::json;

namespace {

constexpr int kKinds = static_cast<int>(ErrorKind::kInfeasibleScript) + 1;

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p != nullptr) std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

int fail(ErrorKind kind, const std::string& message, char** out) {
  *out = dup(json{{"error", error_kind_name(kind)}, {"message", message}}.dump());
  return static_cast<int>(kind) + 1;
}

// Runs `body`, which returns the JSON text, and maps exceptions to codes.
template <typename F>
int guarded(char** out, F&& body) {
  if (out == nullptr) return static_cast<int>(ErrorKind::kInvalidArgument) + 1;
  *out = nullptr;
  try {
    *out = dup(body());
    return 0;
  } catch (const Error& e) {
    return fail(e.kind(), e.what(), out);
  } catch (const json::exception& e) {
    return fail(ErrorKind::kInvalidArgument, e.what(), out);
  } catch (const std::exception& e) {
    return fail(ErrorKind::kIo, e.what(), out);
  }
}

Thresholds thresholds_arg(const char* text) {
  if (text == nullptr || *text == '\0') return {};
  return thresholds_from_json(json::parse(text));
}

std::vector<LabelRecord> labels_arg(const char* text) {
  std::istringstream in(text == nullptr ? "" : text);
  return read_labels(in);
}

}  // namespace

extern "C" {

int trajlab_label_file(const char* path, const char* thresholds, char** out) {
  return guarded(out, [&] {
    if (path == nullptr) throw Error(ErrorKind::kInvalidArgument, "path is NULL");
    const BatchResult r = label_batch({path}, thresholds_arg(thresholds), 1);
    if (!r.failures.empty()) throw Error(r.failures[0].kind, r.failures[0].message);
    return label_line(r.labels.at(0));
  });
}

int trajlab_label_paths(const char* paths_json, const char* thresholds, unsigned workers, char** out) {
  return guarded(out, [&] {
    std::vector<std::filesystem::path> paths;
    for (const auto& p : json::parse(paths_json == nullptr ? "[]" : paths_json)) paths.emplace_back(p.get<std::string>());
    const BatchResult r = label_batch(collect_inputs(paths), thresholds_arg(thresholds), workers);
    // Label lines are spliced in verbatim so they stay byte-equal to the CLI.
    std::string s = "{\"labels\":[";
    for (std::size_t i = 0; i < r.labels.size(); ++i) s += (i ? "," : "") + label_line(r.labels[i]);
    s += "],\"failures\":[";
    for (std::size_t i = 0; i < r.failures.size(); ++i) s += (i ? "," : "") + failure_to_json(r.failures[i]).dump();
    return s + "]}";
  });
}

int trajlab_filter(const char* labels_jsonl, const char* spec, char** out) {
  return guarded(out, [&] {
    const FilterSpec fs = filter_spec_from_json(json::parse(spec == nullptr ? "null" : spec));
    return manifest_to_json(filter(labels_arg(labels_jsonl), fs)).dump(2);
  });
}

int trajlab_stats(const char* labels_jsonl, const char* group_by, const char* grouping, int decimals, char** out) {
  return guarded(out, [&] {
    std::optional<GroupingScheme> scheme;
    if (grouping != nullptr && *grouping != '\0') scheme = load_grouping(grouping);
    const auto tables = mode_table(labels_arg(labels_jsonl), parse_group_by(group_by == nullptr ? "" : group_by),
                                   scheme ? &*scheme : nullptr, decimals);
    return tables_to_json(tables).dump();
  });
}

int trajlab_thresholds_default(char** out) {
  return guarded(out, [] { return thresholds_to_json(Thresholds{}).dump(); });
}

const char* trajlab_error_kind_name(int code) {
  static const auto names = [] {
    std::array<std::string, kKinds> n;
    for (int i = 0; i < kKinds; ++i) n[i] = std::string(error_kind_name(static_cast<ErrorKind>(i)));
    return n;
  }();
  if (code < 1 || code > kKinds) return "";
  return names[code - 1].c_str();
}

void trajlab_free(char* s) { std::free(s); }

}  // extern "C"
