#include "trajlab/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <numeric>
#include <optional>
#include <set>
#include <thread>
#include <tuple>

#include "trajlab/trajlog.hpp"

namespace trajlab {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Prints a stored f32 with its shortest decimal spelling.
double short_double(float v) { return std::stod(format_float(v)); }

std::string quota_key_for(const LabelRecord& l, QuotaKey key) {
  if (key == QuotaKey::kTargetId) return l.target_id;
  return l.target_id + "|" + std::string(to_string(l.task));
}

std::string_view to_string(QuotaKey key) {
  return key == QuotaKey::kTargetId ? "target_id" : "target_id_task";
}

}  // namespace

LabelRecord make_label(const Trajectory& traj, const Thresholds& th, std::string source) {
  const TrajectoryLabel tl = label_trajectory(traj, th);
  LabelRecord l;
  l.episode_id = traj.header.episode_id;
  l.subtask = traj.header.subtask_kind;
  l.mode_id = tl.mode.mode_id;
  l.success_once = tl.mode.success_once;
  l.success_at_end = tl.mode.success_at_end;
  l.events = tl.events.events;
  l.initial_dist_obj_goal = tl.events.initial_dist_obj_goal;
  l.task = traj.header.task;
  l.target_id = traj.header.target_id;
  l.split = traj.header.split;
  l.policy_tag = traj.header.policy_tag;
  l.source = std::move(source);
  l.interpretation = tl.mode.interpretation;
  return l;
}

ordered_json label_to_json(const LabelRecord& l) {
  ordered_json j;
  j["episode_id"] = l.episode_id;
  j["subtask"] = to_string(l.subtask);
  j["mode_id"] = l.mode_id;
  j["success_once"] = l.success_once;
  j["success_at_end"] = l.success_at_end;
  auto events = ordered_json::array();
  for (const auto& e : l.events) events.push_back({{"kind", to_string(e.kind)}, {"t", e.t}});
  j["events"] = std::move(events);
  if (l.subtask == SubtaskKind::kPlace && !std::isnan(l.initial_dist_obj_goal)) {
    j["initial_dist_obj_goal"] = short_double(l.initial_dist_obj_goal);
  }
  j["task"] = to_string(l.task);
  j["target_id"] = l.target_id;
  j["split"] = to_string(l.split);
  j["policy_tag"] = l.policy_tag;
  j["source"] = l.source;
  if (!l.interpretation.empty()) j["interpretation"] = l.interpretation;
  return j;
}

LabelRecord label_from_json(const json& j) {
  LabelRecord l;
  try {
    l.episode_id = j.at("episode_id").get<std::string>();
    l.subtask = parse_subtask(j.at("subtask").get<std::string>());
    l.mode_id = j.at("mode_id").get<std::string>();
    const ModeInfo& info = mode_info(l.mode_id);
    if (info.subtask != l.subtask) {
      throw Error(ErrorKind::kInvalidArgument, "mode " + l.mode_id + " does not belong to subtask " +
                                                   std::string(to_string(l.subtask)));
    }
    l.success_once = j.at("success_once").get<bool>();
    l.success_at_end = j.at("success_at_end").get<bool>();
    if (j.contains("events")) l.events = events_from_json(j, l.subtask).events;
    if (j.contains("initial_dist_obj_goal") && !j.at("initial_dist_obj_goal").is_null()) {
      l.initial_dist_obj_goal = j.at("initial_dist_obj_goal").get<float>();
    }
    if (j.contains("task")) l.task = parse_task(j.at("task").get<std::string>());
    l.target_id = j.value("target_id", std::string());
    if (j.contains("split")) l.split = parse_split(j.at("split").get<std::string>());
    l.policy_tag = j.value("policy_tag", std::string());
    l.source = j.value("source", std::string());
    l.interpretation = j.value("interpretation", std::string());
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParseError, std::string("bad label record: ") + e.what());
  }
  return l;
}

std::string label_line(const LabelRecord& label) { return label_to_json(label).dump(); }

std::vector<LabelRecord> read_labels(std::istream& in) {
  std::vector<LabelRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(label_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kParseError, "line " + std::to_string(n) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.kind(), "line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

ordered_json failure_to_json(const LabelFailure& f) {
  ordered_json j;
  j["path"] = f.path;
  j["error"] = error_kind_name(f.kind);
  j["message"] = f.message;
  return j;
}

std::vector<std::filesystem::path> collect_inputs(const std::vector<std::filesystem::path>& paths) {
  std::set<std::filesystem::path> files;
  for (const auto& p : paths) {
    std::error_code ec;
    if (std::filesystem::is_directory(p, ec)) {
      for (const auto& entry : std::filesystem::directory_iterator(p)) {
        const auto ext = entry.path().extension();
        if (entry.is_regular_file() && (ext == ".trjl" || ext == ".trjt")) files.insert(entry.path());
      }
    } else {
      files.insert(p);
    }
  }
  return {files.begin(), files.end()};
}

BatchResult label_batch(const std::vector<std::filesystem::path>& inputs, const Thresholds& th,
                        unsigned workers) {
  struct Slot {
    std::optional<LabelRecord> label;
    std::optional<LabelFailure> failure;
  };
  std::vector<Slot> slots(inputs.size());
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    for (std::size_t i = next++; i < inputs.size(); i = next++) {
      const std::string path = inputs[i].string();
      try {
        slots[i].label = make_label(load_trajectory(inputs[i]), th, path);
      } catch (const Error& e) {
        slots[i].failure = LabelFailure{path, e.kind(), e.what()};
      } catch (const std::exception& e) {
        slots[i].failure = LabelFailure{path, ErrorKind::kIo, e.what()};
      }
    }
  };

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(inputs.size(), 1)));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  BatchResult out;
  for (auto& s : slots) {
    if (s.label) {
      ++out.mode_counts[s.label->mode_id];
      out.labels.push_back(std::move(*s.label));
    } else {
      out.failures.push_back(std::move(*s.failure));
    }
  }
  std::sort(out.labels.begin(), out.labels.end(), [](const LabelRecord& a, const LabelRecord& b) {
    return std::tie(a.episode_id, a.source) < std::tie(b.episode_id, b.source);
  });
  std::sort(out.failures.begin(), out.failures.end(),
            [](const LabelFailure& a, const LabelFailure& b) { return a.path < b.path; });
  return out;
}

// ---------------------------------------------------------------------------
// filtering

void check_filter_spec(const FilterSpec& spec) {
  if (spec.allow.empty()) throw Error(ErrorKind::kEmptyAllowList, "filter allow list is empty");
  if (spec.quota_per_target < 1) throw Error(ErrorKind::kInvalidArgument, "quota_per_target must be >= 1");
  if (spec.selection != "FirstByEpisodeId") {
    throw Error(ErrorKind::kInvalidArgument, "unsupported selection \"" + spec.selection + "\"");
  }
  std::map<SubtaskKind, double> weight_sum;
  std::set<std::string> seen;
  for (const auto& pool : spec.allow) {
    if (pool.modes.empty()) throw Error(ErrorKind::kEmptyAllowList, "filter pool lists no modes");
    if (!(pool.weight > 0.0) || pool.weight > 1.0) {
      throw Error(ErrorKind::kInvalidArgument, "pool weights must lie in (0, 1]");
    }
    weight_sum[pool.subtask] += pool.weight;
    for (const auto& m : pool.modes) {
      if (mode_info(m).subtask != pool.subtask) {
        throw Error(ErrorKind::kInvalidArgument,
                    "mode " + m + " is not a " + std::string(to_string(pool.subtask)) + " mode");
      }
      if (!seen.insert(m).second) {
        throw Error(ErrorKind::kInvalidArgument, "mode " + m + " appears in more than one pool");
      }
    }
  }
  for (const auto& [subtask, sum] : weight_sum) {
    if (std::abs(sum - 1.0) > 1e-9) {
      throw Error(ErrorKind::kInvalidArgument,
                  "weights for " + std::string(to_string(subtask)) + " sum to " + std::to_string(sum));
    }
  }
}

FilterSpec filter_spec_from_json(const json& j) {
  FilterSpec spec;
  try {
    if (!j.contains("allow") || j.at("allow").empty()) {
      throw Error(ErrorKind::kEmptyAllowList, "filter allow list is empty");
    }
    for (const auto& p : j.at("allow")) {
      FilterPool pool;
      pool.subtask = parse_subtask(p.at("subtask").get<std::string>());
      pool.modes = p.at("modes").get<std::vector<std::string>>();
      pool.weight = p.value("weight", 1.0);
      spec.allow.push_back(std::move(pool));
    }
    if (j.contains("quota_per_target")) {
      const auto q = j.at("quota_per_target").get<std::int64_t>();
      if (q < 1) throw Error(ErrorKind::kInvalidArgument, "quota_per_target must be >= 1");
      spec.quota_per_target = static_cast<std::size_t>(q);
    }
    const std::string key = j.value("quota_key", std::string("target_id"));
    if (key == "target_id") {
      spec.quota_key = QuotaKey::kTargetId;
    } else if (key == "target_id_task") {
      spec.quota_key = QuotaKey::kTargetIdTask;
    } else {
      throw Error(ErrorKind::kInvalidArgument, "unknown quota_key \"" + key + "\"");
    }
    spec.selection = j.value("selection", spec.selection);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, std::string("bad filter spec: ") + e.what());
  }
  check_filter_spec(spec);
  return spec;
}

ordered_json filter_spec_to_json(const FilterSpec& spec) {
  ordered_json j;
  auto allow = ordered_json::array();
  for (const auto& p : spec.allow) {
    allow.push_back({{"subtask", to_string(p.subtask)}, {"modes", p.modes}, {"weight", p.weight}});
  }
  j["allow"] = std::move(allow);
  j["quota_per_target"] = spec.quota_per_target;
  j["quota_key"] = to_string(spec.quota_key);
  j["selection"] = spec.selection;
  return j;
}

namespace {

// Largest-remainder apportionment of `total` by `weights`; ties go to the
// earlier pool.
std::vector<std::size_t> apportion(const std::vector<double>& weights, std::size_t total) {
  std::vector<std::size_t> out(weights.size());
  std::vector<std::pair<double, std::size_t>> rema;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = weights[i] * static_cast<double>(total);
    out[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    assigned += out[i];
    rema.emplace_back(exact - static_cast<double>(out[i]), i);
  }
  std::stable_sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < total && k < rema.size(); ++k, ++assigned) ++out[rema[k].second];
  return out;
}

}  // namespace

DatasetManifest filter(const std::vector<LabelRecord>& labels, const FilterSpec& spec) {
  check_filter_spec(spec);

  // pool index for each allowed mode
  std::map<std::string, std::size_t, std::less<>> pool_of;
  for (std::size_t i = 0; i < spec.allow.size(); ++i) {
    for (const auto& m : spec.allow[i].modes) pool_of.emplace(m, i);
  }

  std::vector<const LabelRecord*> sorted;
  sorted.reserve(labels.size());
  for (const auto& l : labels) sorted.push_back(&l);
  std::sort(sorted.begin(), sorted.end(), [](const LabelRecord* a, const LabelRecord* b) {
    return std::tie(a->episode_id, a->source) < std::tie(b->episode_id, b->source);
  });

  // (subtask, quota key) -> per-pool candidates in episode order
  std::map<std::pair<SubtaskKind, std::string>, std::map<std::size_t, std::vector<const LabelRecord*>>>
      groups;
  for (const LabelRecord* l : sorted) {
    auto it = pool_of.find(l->mode_id);
    if (it == pool_of.end()) continue;
    groups[{l->subtask, quota_key_for(*l, spec.quota_key)}][it->second].push_back(l);
  }

  DatasetManifest out;
  for (const auto& [group_key, pools] : groups) {
    const auto& [subtask, key] = group_key;
    std::vector<std::size_t> pool_ids;
    std::vector<double> weights;
    for (std::size_t i = 0; i < spec.allow.size(); ++i) {
      if (spec.allow[i].subtask == subtask) {
        pool_ids.push_back(i);
        weights.push_back(spec.allow[i].weight);
      }
    }
    const auto targets = apportion(weights, spec.quota_per_target);
    for (std::size_t k = 0; k < pool_ids.size(); ++k) {
      auto it = pools.find(pool_ids[k]);
      const std::size_t available = it == pools.end() ? 0 : it->second.size();
      const std::size_t take = std::min(available, targets[k]);
      for (std::size_t n = 0; n < take; ++n) {
        const LabelRecord& l = *it->second[n];
        out.entries.push_back({l.episode_id, l.source, l.subtask, l.mode_id, l.target_id, l.task,
                               l.split, l.policy_tag});
      }
      if (take < targets[k]) out.shortfalls.push_back({subtask, key, pool_ids[k], targets[k], take});
    }
  }
  std::sort(out.entries.begin(), out.entries.end(), [](const ManifestEntry& a, const ManifestEntry& b) {
    return std::tie(a.episode_id, a.source) < std::tie(b.episode_id, b.source);
  });
  for (const auto& e : out.entries) ++out.counts[{e.target_id, e.mode_id}];
  return out;
}

ordered_json manifest_to_json(const DatasetManifest& m) {
  ordered_json j;
  auto entries = ordered_json::array();
  for (const auto& e : m.entries) {
    ordered_json row;
    row["episode_id"] = e.episode_id;
    row["source"] = e.source;
    row["subtask"] = to_string(e.subtask);
    row["mode_id"] = e.mode_id;
    row["target_id"] = e.target_id;
    row["task"] = to_string(e.task);
    row["split"] = to_string(e.split);
    row["policy_tag"] = e.policy_tag;
    entries.push_back(std::move(row));
  }
  j["entries"] = std::move(entries);
  auto counts = ordered_json::array();
  for (const auto& [key, n] : m.counts) {
    counts.push_back({{"target_id", key.first}, {"mode_id", key.second}, {"count", n}});
  }
  j["counts"] = std::move(counts);
  auto shortfalls = ordered_json::array();
  for (const auto& s : m.shortfalls) {
    shortfalls.push_back({{"subtask", to_string(s.subtask)},
                          {"quota_key", s.quota_key},
                          {"pool", s.pool},
                          {"wanted", s.wanted},
                          {"selected", s.selected},
                          {"missing", s.wanted - s.selected}});
  }
  j["shortfalls"] = std::move(shortfalls);
  return j;
}

DatasetManifest manifest_from_json(const json& j) {
  DatasetManifest m;
  try {
    for (const auto& row : j.at("entries")) {
      ManifestEntry e;
      e.episode_id = row.at("episode_id").get<std::string>();
      e.source = row.value("source", std::string());
      e.subtask = parse_subtask(row.at("subtask").get<std::string>());
      e.mode_id = row.at("mode_id").get<std::string>();
      e.target_id = row.value("target_id", std::string());
      e.task = parse_task(row.value("task", std::string("Custom")));
      e.split = parse_split(row.value("split", std::string("Other")));
      e.policy_tag = row.value("policy_tag", std::string());
      m.entries.push_back(std::move(e));
    }
    for (const auto& c : j.at("counts")) {
      m.counts[{c.at("target_id").get<std::string>(), c.at("mode_id").get<std::string>()}] =
          c.at("count").get<std::size_t>();
    }
    for (const auto& s : j.at("shortfalls")) {
      m.shortfalls.push_back({parse_subtask(s.at("subtask").get<std::string>()),
                              s.at("quota_key").get<std::string>(), s.at("pool").get<std::size_t>(),
                              s.at("wanted").get<std::size_t>(), s.at("selected").get<std::size_t>()});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParseError, std::string("bad manifest: ") + e.what());
  }
  return m;
}

}  // namespace trajlab
