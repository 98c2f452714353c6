#include "trajlab/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "trajlab/analytics.hpp"
#include "trajlab/error.hpp"
#include "trajlab/events.hpp"
#include "trajlab/pipeline.hpp"
#include "trajlab/predicates.hpp"
#include "trajlab/synth.hpp"
#include "trajlab/trajlog.hpp"

namespace trajlab::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

struct Common {
  std::string thresholds;
  unsigned workers = 0;
  std::string format;
  bool quiet = false;
};

void add_common(CLI::App* sub, Common& c, std::string default_format,
                const std::vector<std::string>& formats) {
  sub->add_option("--thresholds", c.thresholds, "JSON thresholds file (default: $TRAJLAB_THRESHOLDS)");
  sub->add_option("--workers", c.workers, "worker threads (0 = all cores)");
  c.format = std::move(default_format);
  sub->add_option("--format", c.format, "output format")->check(CLI::IsMember(formats));
  sub->add_flag("--quiet", c.quiet, "suppress the run report on stderr");
}

Thresholds resolve_thresholds(const std::string& path) {
  std::string p = path;
  if (p.empty()) {
    if (const char* env = std::getenv("TRAJLAB_THRESHOLDS"); env != nullptr) p = env;
  }
  if (p.empty()) return {};
  std::ifstream in(p);
  if (!in) throw Error(ErrorKind::kInvalidArgument, "cannot read thresholds file " + p);
  try {
    return thresholds_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, "thresholds file " + p + ": " + e.what());
  }
}

json read_json_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kInvalidArgument, std::string("cannot read ") + what + " " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, std::string(what) + " " + path + ": " + e.what());
  }
}

// "-" is the standard stream handed to run().
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      out_ = &fallback;
    } else {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw Error(ErrorKind::kIo, "cannot create " + path);
      out_ = &file_;
    }
  }
  std::ostream& operator*() { return *out_; }

 private:
  std::ofstream file_;
  std::ostream* out_ = nullptr;
};

template <typename Fn>
auto with_input(const std::string& path, Fn&& fn) {
  if (path == "-") return fn(std::cin);
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  return fn(in);
}

class Report {
 public:
  Report(std::string command, std::ostream& err, bool quiet)
      : command_(std::move(command)), err_(err), quiet_(quiet), start_(std::chrono::steady_clock::now()) {}

  ordered_json& counters() { return counters_; }

  void emit() {
    if (quiet_) return;
    const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    ordered_json j;
    j["command"] = command_;
    j["wall_ms"] = std::round(ms * 1000.0) / 1000.0;
    for (auto& [k, v] : counters_.items()) j[k] = v;
    err_ << j.dump() << '\n';
  }

 private:
  std::string command_;
  std::ostream& err_;
  bool quiet_;
  std::chrono::steady_clock::time_point start_;
  ordered_json counters_ = ordered_json::object();
};

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string pad(std::uint64_t v, int width) {
  std::ostringstream os;
  os << std::setw(width) << std::setfill('0') << v;
  return os.str();
}

int exit_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kEmptyAllowList:
    case ErrorKind::kUnknownMode:
    case ErrorKind::kInfeasibleScript:
    case ErrorKind::kMissingRate: return kExitUsage;
    default: return kExitDataFailure;
  }
}

// ---------------------------------------------------------------------------
// commands

struct LabelArgs {
  std::vector<std::string> paths;
  std::string out = "-";
};

int cmd_label(const LabelArgs& a, const Common& c, std::ostream& out, std::ostream& err) {
  Report report("label", err, c.quiet);
  const Thresholds th = resolve_thresholds(c.thresholds);
  std::vector<fs::path> paths(a.paths.begin(), a.paths.end());
  const auto inputs = collect_inputs(paths);
  const BatchResult result = label_batch(inputs, th, c.workers);
  Sink sink(a.out, out);
  for (const auto& l : result.labels) *sink << label_line(l) << '\n';
  for (const auto& f : result.failures) err << failure_to_json(f).dump() << '\n';
  report.counters()["inputs"] = inputs.size();
  report.counters()["labeled"] = result.labels.size();
  report.counters()["failures"] = result.failures.size();
  report.counters()["mode_counts"] = result.mode_counts;
  report.emit();
  return result.failures.empty() ? kExitOk : kExitDataFailure;
}

struct FilterArgs {
  std::string labels;
  std::string spec;
  std::string out = "-";
};

int cmd_filter(const FilterArgs& a, const Common& c, std::ostream& out, std::ostream& err) {
  Report report("filter", err, c.quiet);
  const FilterSpec spec = filter_spec_from_json(read_json_file(a.spec, "filter spec"));
  const auto labels = with_input(a.labels, [](std::istream& in) { return read_labels(in); });
  const DatasetManifest m = filter(labels, spec);
  Sink sink(a.out, out);
  *sink << manifest_to_json(m).dump(2) << '\n';
  report.counters()["labels"] = labels.size();
  report.counters()["selected"] = m.entries.size();
  report.counters()["shortfalls"] = m.shortfalls.size();
  report.emit();
  return kExitOk;
}

struct StatsArgs {
  std::string labels;
  std::string group_by;
  std::string grouping;
  int decimals = 2;
  std::string out = "-";
};

int cmd_stats(const StatsArgs& a, const Common& c, std::ostream& out, std::ostream& err) {
  Report report("stats", err, c.quiet);
  const auto labels = with_input(a.labels, [](std::istream& in) { return read_labels(in); });
  std::optional<GroupingScheme> scheme;
  if (!a.grouping.empty()) scheme = load_grouping(a.grouping);
  const auto tables = mode_table(labels, parse_group_by(a.group_by), scheme ? &*scheme : nullptr, a.decimals);
  Sink sink(a.out, out);
  if (c.format == "md") {
    render_markdown(tables, *sink);
  } else if (c.format == "csv") {
    render_csv(tables, *sink);
  } else {
    *sink << tables_to_json(tables).dump() << '\n';
  }
  report.counters()["labels"] = labels.size();
  report.counters()["tables"] = tables.size();
  report.emit();
  return kExitOk;
}

struct RatioArgs {
  std::string labels;
  std::string mode_a;
  std::string mode_b;
};

int cmd_ratio(const RatioArgs& a, const Common& c, std::ostream& out, std::ostream& err) {
  Report report("ratio", err, c.quiet);
  const auto labels = with_input(a.labels, [](std::istream& in) { return read_labels(in); });
  const RatioReport r = ratio_report(labels, a.mode_a, a.mode_b);
  if (c.format == "json") {
    out << ratio_to_json(r).dump() << '\n';
  } else {
    out << r.text << '\n';
  }
  report.emit();
  return kExitOk;
}

struct ChainArgs {
  std::string episodes;
  std::string plan;
  std::string bound;
};

int cmd_chain(const ChainArgs& a, const Common& c, std::ostream& out, std::ostream& err) {
  Report report("chain", err, c.quiet);
  const ChainPlan plan = load_plan(a.plan);
  if (a.episodes.empty() && a.bound.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "chain needs an episodes file, --bound, or both");
  }
  std::optional<std::vector<double>> progressive;
  std::optional<std::vector<double>> bound;
  if (!a.episodes.empty()) {
    const auto eps = with_input(a.episodes, [](std::istream& in) { return read_chain_episodes(in); });
    progressive = progressive_completion(eps, plan);
    report.counters()["episodes"] = eps.size();
  }
  if (!a.bound.empty()) {
    const json rates_json = read_json_file(a.bound, "rates file");
    std::map<std::string, double> rates;
    try {
      rates = rates_json.get<std::map<std::string, double>>();
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kInvalidArgument, std::string("rates file: ") + e.what());
    }
    bound = independence_upper_bound(rates, plan);
  }
  std::vector<std::string> labels;
  for (const auto& s : plan.slots) labels.push_back(s.label());
  if (c.format == "json") {
    ordered_json j;
    j["plan"] = plan.task;
    j["slots"] = labels;
    if (progressive) j["progressive_completion"] = *progressive;
    if (bound) j["independence_upper_bound"] = *bound;
    out << j.dump() << '\n';
  } else {
    const bool md = c.format == "md";
    auto cell = [](double v) {
      std::ostringstream os;
      os << std::fixed << std::setprecision(2) << v;
      return os.str();
    };
    out << (md ? "| slot | label |" : "slot,label");
    if (progressive) out << (md ? " progressive |" : ",progressive");
    if (bound) out << (md ? " upper_bound |" : ",upper_bound");
    out << '\n';
    if (md) out << "|---:|---|" << (progressive ? "---:|" : "") << (bound ? "---:|" : "") << '\n';
    for (std::size_t k = 0; k < labels.size(); ++k) {
      if (md) {
        out << "| " << k + 1 << " | " << labels[k] << " |";
        if (progressive) out << ' ' << cell((*progressive)[k]) << " |";
        if (bound) out << ' ' << cell((*bound)[k]) << " |";
      } else {
        out << k + 1 << ',' << labels[k];
        if (progressive) out << ',' << cell((*progressive)[k]);
        if (bound) out << ',' << cell((*bound)[k]);
      }
      out << '\n';
    }
  }
  report.emit();
  return kExitOk;
}

struct ValidateArgs {
  std::vector<std::string> paths;
};

int cmd_validate(const ValidateArgs& a, const Common& c, std::ostream& out, std::ostream& err) {
  Report report("validate", err, c.quiet);
  std::vector<fs::path> paths(a.paths.begin(), a.paths.end());
  std::size_t bad = 0;
  const auto inputs = collect_inputs(paths);
  for (const auto& p : inputs) {
    ordered_json j;
    j["path"] = p.string();
    try {
      const Trajectory traj = load_trajectory(p);
      const auto findings = validate(traj);
      j["episode_id"] = traj.header.episode_id;
      j["valid"] = !has_errors(findings);
      auto arr = ordered_json::array();
      for (const auto& f : findings) {
        ordered_json jf;
        jf["severity"] = f.severity == Severity::kError ? "error" : "warning";
        jf["message"] = f.message;
        if (f.t) jf["t"] = *f.t;
        arr.push_back(std::move(jf));
      }
      j["findings"] = std::move(arr);
      if (has_errors(findings)) ++bad;
    } catch (const Error& e) {
      j["valid"] = false;
      j["error"] = error_kind_name(e.kind());
      j["message"] = e.what();
      ++bad;
    }
    out << j.dump() << '\n';
  }
  report.counters()["inputs"] = inputs.size();
  report.counters()["invalid"] = bad;
  report.emit();
  return bad == 0 ? kExitOk : kExitDataFailure;
}

struct SynthArgs {
  std::string script;
  std::string mode;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_synth(const SynthArgs& a, const Common& c, std::ostream& out, std::ostream& err) {
  Report report("synth", err, c.quiet);
  if (a.script.empty() == a.mode.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "give exactly one of --script or --mode");
  }
  const Thresholds th = resolve_thresholds(c.thresholds);
  const EventScript script =
      a.mode.empty() ? script_from_json(read_json_file(a.script, "script")) : defining_script(a.mode);
  const Trajectory traj = realize(script, a.seed, th);
  if (a.out == "-") {
    write_text(traj, out);
  } else {
    save_trajectory(a.out, traj, format_for_path(a.out));
  }
  report.counters()["records"] = traj.records.size();
  report.emit();
  return kExitOk;
}

struct FuzzArgs {
  std::string subtask = "pick";
  std::uint64_t n = 1;
  std::uint64_t seed = 0;
  std::string out;
  FuzzConfig config;
};

void add_fuzz_config(CLI::App* sub, FuzzConfig& cfg) {
  sub->add_option("--min-len", cfg.min_len, "shortest episode")->check(CLI::Range(2u, 1000000u));
  sub->add_option("--max-len", cfg.max_len, "longest episode")->check(CLI::Range(2u, 1000000u));
  sub->add_option("--edge-density", cfg.edge_density, "per-step change probability")->check(CLI::Range(0.0, 1.0));
  sub->add_option("--arm-dof", cfg.arm_dof, "arm joints")->check(CLI::Range(1, 4096));
}

int cmd_fuzz(const FuzzArgs& a, const Common& c, std::ostream&, std::ostream& err) {
  Report report("fuzz", err, c.quiet);
  const Thresholds th = resolve_thresholds(c.thresholds);
  const SubtaskKind st = parse_subtask(a.subtask);
  fs::create_directories(a.out);
  const std::string ext = c.format == "trjt" ? ".trjt" : ".trjl";
  for (std::uint64_t i = 0; i < a.n; ++i) {
    Trajectory traj = fuzz(episode_seed(a.seed, i), a.config, st, th);
    traj.header.episode_id = lower(to_string(st)) + "-" + std::to_string(a.seed) + "-" + pad(i, 6);
    save_trajectory(fs::path(a.out) / (traj.header.episode_id + ext), traj,
                    ext == ".trjl" ? FileFormat::kBinary : FileFormat::kText);
  }
  report.counters()["written"] = a.n;
  report.emit();
  return kExitOk;
}

struct MeceArgs {
  std::string subtask = "all";
  std::uint64_t n = 1000;
  std::uint64_t seed = 0;
  FuzzConfig config;
};

int cmd_mece(const MeceArgs& a, const Common& c, std::ostream& out, std::ostream& err,
             const ModeRules& rules) {
  Report report("mece-check", err, c.quiet);
  const Thresholds th = resolve_thresholds(c.thresholds);
  std::vector<SubtaskKind> subtasks;
  if (lower(a.subtask) == "all") {
    subtasks.assign(std::begin(kAllSubtasks), std::end(kAllSubtasks));
  } else {
    subtasks.push_back(parse_subtask(a.subtask));
  }
  std::uint64_t violations = 0;
  for (SubtaskKind st : subtasks) {
    std::map<std::string, std::uint64_t> histogram;
    for (const auto& m : modes(st)) histogram[std::string(m.id)] = 0;
    std::optional<ordered_json> counterexample;
    std::uint64_t bad = 0;
    for (std::uint64_t i = 0; i < a.n; ++i) {
      const std::uint64_t s = episode_seed(a.seed, i);
      std::string reason;
      EventList events;
      try {
        const Trajectory traj = fuzz(s, a.config, st, th);
        events = extract_events(traj, th);
        const EventSummary summary = summarize(events, th);
        const auto mode = match_mode(summary, rules);
        if (!mode) {
          reason = "no mode applies";
        } else if (!is_known_mode(*mode) || mode_info(*mode).subtask != st) {
          reason = "mode " + std::string(*mode) + " does not belong to " + std::string(to_string(st));
        } else if (mode_info(*mode).success != summary.has(EventKind::kSuccess)) {
          reason = "mode " + std::string(*mode) + " contradicts Success membership";
        } else {
          ++histogram[std::string(*mode)];
        }
      } catch (const Error& e) {
        reason = std::string(error_kind_name(e.kind())) + ": " + e.what();
      }
      if (!reason.empty()) {
        ++bad;
        if (!counterexample) {
          ordered_json cx;
          cx["index"] = i;
          cx["episode_seed"] = s;
          cx["reason"] = reason;
          cx["events"] = events_to_json(events);
          counterexample = std::move(cx);
        }
      }
    }
    ordered_json j;
    j["subtask"] = to_string(st);
    j["n"] = a.n;
    j["seed"] = a.seed;
    j["violations"] = bad;
    j["histogram"] = histogram;
    if (counterexample) j["counterexample"] = *counterexample;
    out << j.dump() << '\n';
    if (counterexample) err << "MECE violation: " << counterexample->dump() << '\n';
    violations += bad;
  }
  report.counters()["violations"] = violations;
  report.emit();
  return violations == 0 ? kExitOk : kExitPropertyViolation;
}

struct ConvertArgs {
  std::string in;
  std::string out;
};

int cmd_convert(const ConvertArgs& a, const Common& c, std::ostream& out, std::ostream& err) {
  Report report("convert", err, c.quiet);
  const Trajectory traj = load_trajectory(a.in);
  if (a.out == "-") {
    write_text(traj, out);
  } else {
    FileFormat f = format_for_path(a.out);
    if (c.format == "trjl") f = FileFormat::kBinary;
    if (c.format == "trjt") f = FileFormat::kText;
    save_trajectory(a.out, traj, f);
  }
  report.emit();
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const ModeRules* rules) {
  CLI::App app{"Event labeling, mode classification, filtering and statistics for manipulation episode logs",
               "trajlab"};
  app.require_subcommand(1);

  std::map<std::string, Common> common;

  LabelArgs label_args;
  auto* label = app.add_subcommand("label", "label trajectories with events and a mode");
  label->add_option("paths", label_args.paths, "trajectory files or directories")->required();
  label->add_option("--out", label_args.out, "output file ('-' for stdout)");
  add_common(label, common["label"], "jsonl", {"jsonl", "json"});

  FilterArgs filter_args;
  auto* filt = app.add_subcommand("filter", "select episodes by allowed modes and quotas");
  filt->add_option("labels", filter_args.labels, "label JSON lines ('-' for stdin)")->required();
  filt->add_option("--spec", filter_args.spec, "filter spec JSON")->required();
  filt->add_option("--out", filter_args.out, "manifest output ('-' for stdout)");
  add_common(filt, common["filter"], "json", {"json"});

  StatsArgs stats_args;
  auto* stats = app.add_subcommand("stats", "mode tables with SoR, SaeR and FR");
  stats->add_option("labels", stats_args.labels, "label JSON lines ('-' for stdin)")->required();
  stats->add_option("--group-by", stats_args.group_by, "comma list of task,target,policy,split");
  stats->add_option("--grouping", stats_args.grouping, "pick-coarse or a grouping JSON file");
  stats->add_option("--decimals", stats_args.decimals, "decimal places")->check(CLI::Range(0, 6));
  stats->add_option("--out", stats_args.out, "output file ('-' for stdout)");
  add_common(stats, common["stats"], "md", {"md", "csv", "json"});

  RatioArgs ratio_args;
  auto* ratio = app.add_subcommand("ratio", "normalized count ratio of two modes");
  ratio->add_option("labels", ratio_args.labels, "label JSON lines ('-' for stdin)")->required();
  ratio->add_option("--a", ratio_args.mode_a, "first mode id")->required();
  ratio->add_option("--b", ratio_args.mode_b, "second mode id")->required();
  add_common(ratio, common["ratio"], "text", {"text", "json"});

  ChainArgs chain_args;
  auto* chain = app.add_subcommand("chain", "progressive completion and independence bound");
  chain->add_option("episodes", chain_args.episodes, "chain episode JSON lines");
  chain->add_option("--plan", chain_args.plan, "tidyhouse, preparegroceries, settable or a plan file")->required();
  chain->add_option("--bound", chain_args.bound, "JSON map of per-subtask success rates (fractions)");
  add_common(chain, common["chain"], "json", {"json", "md", "csv"});

  ValidateArgs validate_args;
  auto* val = app.add_subcommand("validate", "check trajectory files");
  val->add_option("paths", validate_args.paths, "trajectory files or directories")->required();
  add_common(val, common["validate"], "json", {"json"});

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "realize an event script as a trajectory");
  synth->add_option("--script", synth_args.script, "event script JSON");
  synth->add_option("--mode", synth_args.mode, "use the defining script of a mode");
  synth->add_option("--seed", synth_args.seed, "seed");
  synth->add_option("--out", synth_args.out, "output (.trjl binary, else text; '-' for stdout)")->required();
  add_common(synth, common["synth"], "auto", {"auto"});

  FuzzArgs fuzz_args;
  auto* fz = app.add_subcommand("fuzz", "write random trajectories");
  fz->add_option("--subtask", fuzz_args.subtask, "pick, place, open or close");
  fz->add_option("--n", fuzz_args.n, "episode count")->check(CLI::PositiveNumber);
  fz->add_option("--seed", fuzz_args.seed, "seed");
  fz->add_option("--out", fuzz_args.out, "output directory")->required();
  add_fuzz_config(fz, fuzz_args.config);
  add_common(fz, common["fuzz"], "trjl", {"trjl", "trjt"});

  MeceArgs mece_args;
  auto* mece = app.add_subcommand("mece-check", "fuzz and assert exactly one mode per episode");
  mece->add_option("--subtask", mece_args.subtask, "pick, place, open, close or all");
  mece->add_option("--n", mece_args.n, "episodes per subtask")->check(CLI::PositiveNumber);
  mece->add_option("--seed", mece_args.seed, "seed");
  add_fuzz_config(mece, mece_args.config);
  add_common(mece, common["mece-check"], "json", {"json"});

  ConvertArgs convert_args;
  auto* conv = app.add_subcommand("convert", "convert between binary and text trajectories");
  conv->add_option("input", convert_args.in, "input trajectory")->required();
  conv->add_option("output", convert_args.out, "output path ('-' for text on stdout)")->required();
  add_common(conv, common["convert"], "auto", {"auto", "trjl", "trjt"});

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*label) return cmd_label(label_args, common["label"], out, err);
    if (*filt) return cmd_filter(filter_args, common["filter"], out, err);
    if (*stats) return cmd_stats(stats_args, common["stats"], out, err);
    if (*ratio) return cmd_ratio(ratio_args, common["ratio"], out, err);
    if (*chain) return cmd_chain(chain_args, common["chain"], out, err);
    if (*val) return cmd_validate(validate_args, common["validate"], out, err);
    if (*synth) return cmd_synth(synth_args, common["synth"], out, err);
    if (*fz) return cmd_fuzz(fuzz_args, common["fuzz"], out, err);
    if (*mece) return cmd_mece(mece_args, common["mece-check"], out, err, rules ? *rules : default_mode_rules());
    if (*conv) return cmd_convert(convert_args, common["convert"], out, err);
  } catch (const Error& e) {
    ordered_json j;
    j["error"] = error_kind_name(e.kind());
    j["message"] = e.what();
    err << j.dump() << '\n';
    return exit_for(e.kind());
  } catch (const std::exception& e) {
    err << "{\"error\":\"IoError\",\"message\":" << json(e.what()).dump() << "}\n";
    return kExitDataFailure;
  }
  return kExitUsage;
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::ios::sync_with_stdio(false);
  return run(args, std::cout, std::cerr);
}

}  // namespace trajlab::cli
