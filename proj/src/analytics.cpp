#include "trajlab/analytics.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "trajlab/error.hpp"

namespace trajlab {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::int64_t pow10(int d) {
  std::int64_t p = 1;
  for (int i = 0; i < d; ++i) p *= 10;
  return p;
}

// round(num / den) with halves away from zero; num, den > 0.
std::uint64_t div_round(unsigned __int128 num, unsigned __int128 den) {
  const auto q = num / den;
  const auto r = num % den;
  return static_cast<std::uint64_t>(2 * r >= den ? q + 1 : q);
}

std::string fixed(std::int64_t scaled, int decimals) {
  const bool neg = scaled < 0;
  const std::uint64_t mag = neg ? static_cast<std::uint64_t>(-scaled) : static_cast<std::uint64_t>(scaled);
  const auto p = static_cast<std::uint64_t>(pow10(decimals));
  std::string s = (neg ? "-" : "") + std::to_string(mag / p);
  if (decimals > 0) {
    std::string frac = std::to_string(mag % p);
    s += "." + std::string(static_cast<std::size_t>(decimals) - frac.size(), '0') + frac;
  }
  return s;
}

std::string key_value(const LabelRecord& l, GroupKey k) {
  switch (k) {
    case GroupKey::kTask: return std::string(to_string(l.task));
    case GroupKey::kTarget: return l.target_id;
    case GroupKey::kPolicy: return l.policy_tag;
    case GroupKey::kSplit: return std::string(to_string(l.split));
  }
  return {};
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Header cells after the key and episode columns, with the percentage of
// each cell for a row.
struct Layout {
  std::vector<std::string> md_headers;
  std::vector<std::string> csv_headers;
  std::vector<Percent> cells;
};

Layout layout(const StatsTable& t, const StatsRow& r) {
  Layout l;
  auto add = [&](std::string md, std::string csv, std::uint64_t count) {
    l.md_headers.push_back(std::move(md));
    l.csv_headers.push_back(std::move(csv));
    l.cells.push_back(percent(count, r.episodes, t.decimals));
  };
  add("SoR", "SoR", r.success_once);
  add("SaeR", "SaeR", r.success_at_end);
  if (t.grouping) {
    add("FR", "FR", r.failures);
    for (std::size_t i = 0; i < t.columns.size(); ++i) add(t.columns[i], t.columns[i], r.counts[i]);
    return l;
  }
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (i == t.success_columns) add("FR", "FR", r.failures);
    add("(" + std::string(mode_info(t.columns[i]).numeral) + ")", t.columns[i], r.counts[i]);
  }
  return l;
}

}  // namespace

double Percent::value() const { return static_cast<double>(scaled) / static_cast<double>(pow10(decimals)); }

std::string Percent::str() const { return fixed(scaled, decimals); }

Percent percent(std::uint64_t count, std::uint64_t total, int decimals) {
  if (total == 0) throw Error(ErrorKind::kEmptyInput, "percentage of an empty population");
  const unsigned __int128 num = static_cast<unsigned __int128>(count) * 100u *
                                static_cast<std::uint64_t>(pow10(decimals));
  return {static_cast<std::int64_t>(div_round(num, total)), decimals};
}

std::string_view to_string(GroupKey key) {
  switch (key) {
    case GroupKey::kTask: return "task";
    case GroupKey::kTarget: return "target";
    case GroupKey::kPolicy: return "policy";
    case GroupKey::kSplit: return "split";
  }
  return "task";
}

std::vector<GroupKey> parse_group_by(const std::string& spec) {
  std::vector<GroupKey> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = lower(item);
    if (item.empty()) continue;
    if (item == "task") {
      out.push_back(GroupKey::kTask);
    } else if (item == "target" || item == "target_id") {
      out.push_back(GroupKey::kTarget);
    } else if (item == "policy" || item == "policy_tag") {
      out.push_back(GroupKey::kPolicy);
    } else if (item == "split") {
      out.push_back(GroupKey::kSplit);
    } else {
      throw Error(ErrorKind::kInvalidArgument, "unknown group-by key \"" + item + "\"");
    }
  }
  return out;
}

std::vector<StatsTable> mode_table(const std::vector<LabelRecord>& labels,
                                   const std::vector<GroupKey>& group_by,
                                   const GroupingScheme* grouping, int decimals) {
  if (labels.empty()) throw Error(ErrorKind::kEmptyInput, "no labels to tabulate");
  std::vector<StatsTable> tables;
  for (SubtaskKind st : kAllSubtasks) {
    StatsTable t;
    t.subtask = st;
    t.group_by = group_by;
    t.decimals = decimals;
    std::map<std::string, std::size_t> column_of;
    if (grouping) {
      t.grouping = grouping->name;
      t.columns = grouping->groups;
    } else {
      for (const auto& m : modes(st)) {
        t.columns.emplace_back(m.id);
        if (m.success) ++t.success_columns;
      }
    }
    for (std::size_t i = 0; i < t.columns.size(); ++i) column_of[t.columns[i]] = i;

    std::map<std::vector<std::string>, StatsRow> rows;
    for (const auto& l : labels) {
      if (l.subtask != st) continue;
      std::vector<std::string> key;
      for (GroupKey k : group_by) key.push_back(key_value(l, k));
      auto& row = rows[key];
      if (row.counts.empty()) {
        row.key = key;
        row.counts.assign(t.columns.size(), 0);
      }
      ++row.episodes;
      row.success_once += l.success_once ? 1 : 0;
      row.success_at_end += l.success_at_end ? 1 : 0;
      row.failures += l.success_once ? 0 : 1;
      mode_info(l.mode_id);
      const std::string& column = grouping ? group(l.mode_id, *grouping) : l.mode_id;
      auto it = column_of.find(column);
      if (it == column_of.end()) {
        // Grouping label missing from the declared group list: append it.
        it = column_of.emplace(column, t.columns.size()).first;
        t.columns.push_back(column);
        for (auto& [k, r] : rows) r.counts.resize(t.columns.size(), 0);
      }
      ++row.counts[it->second];
    }
    if (rows.empty()) continue;
    for (auto& [k, r] : rows) {
      r.counts.resize(t.columns.size(), 0);
      t.rows.push_back(std::move(r));
    }
    tables.push_back(std::move(t));
  }
  return tables;
}

void render_markdown(const std::vector<StatsTable>& tables, std::ostream& out) {
  bool first = true;
  for (const auto& t : tables) {
    if (!first) out << '\n';
    first = false;
    out << "### " << to_string(t.subtask);
    if (t.grouping) out << " (" << *t.grouping << ")";
    out << "\n\n";
    std::vector<std::string> headers;
    for (GroupKey k : t.group_by) headers.emplace_back(to_string(k));
    headers.emplace_back("N");
    const Layout head = layout(t, t.rows.front());
    headers.insert(headers.end(), head.md_headers.begin(), head.md_headers.end());
    out << '|';
    for (const auto& h : headers) out << ' ' << h << " |";
    out << "\n|";
    for (std::size_t i = 0; i < headers.size(); ++i) out << (i < t.group_by.size() ? "---|" : "---:|");
    out << '\n';
    for (const auto& r : t.rows) {
      out << '|';
      for (const auto& k : r.key) out << ' ' << k << " |";
      out << ' ' << r.episodes << " |";
      for (const auto& c : layout(t, r).cells) out << ' ' << c.str() << " |";
      out << '\n';
    }
  }
}

void render_csv(const std::vector<StatsTable>& tables, std::ostream& out) {
  bool first = true;
  for (const auto& t : tables) {
    if (!first) out << '\n';
    first = false;
    out << "subtask";
    for (GroupKey k : t.group_by) out << ',' << to_string(k);
    out << ",episodes";
    for (const auto& h : layout(t, t.rows.front()).csv_headers) out << ',' << csv_field(h);
    out << '\n';
    for (const auto& r : t.rows) {
      out << to_string(t.subtask);
      for (const auto& k : r.key) out << ',' << csv_field(k);
      out << ',' << r.episodes;
      for (const auto& c : layout(t, r).cells) out << ',' << c.str();
      out << '\n';
    }
  }
}

ordered_json tables_to_json(const std::vector<StatsTable>& tables) {
  auto arr = ordered_json::array();
  for (const auto& t : tables) {
    ordered_json jt;
    jt["subtask"] = to_string(t.subtask);
    auto gb = ordered_json::array();
    for (GroupKey k : t.group_by) gb.push_back(to_string(k));
    jt["group_by"] = std::move(gb);
    jt["grouping"] = t.grouping ? ordered_json(*t.grouping) : ordered_json(nullptr);
    jt["decimals"] = t.decimals;
    jt["columns"] = t.columns;
    auto rows = ordered_json::array();
    for (const auto& r : t.rows) {
      ordered_json jr;
      ordered_json key = ordered_json::object();
      for (std::size_t i = 0; i < t.group_by.size(); ++i) key[std::string(to_string(t.group_by[i]))] = r.key[i];
      jr["key"] = std::move(key);
      jr["episodes"] = r.episodes;
      jr["SoR"] = percent(r.success_once, r.episodes, t.decimals).value();
      jr["SaeR"] = percent(r.success_at_end, r.episodes, t.decimals).value();
      jr["FR"] = percent(r.failures, r.episodes, t.decimals).value();
      ordered_json cols = ordered_json::object();
      ordered_json counts = ordered_json::object();
      for (std::size_t i = 0; i < t.columns.size(); ++i) {
        cols[t.columns[i]] = percent(r.counts[i], r.episodes, t.decimals).value();
        counts[t.columns[i]] = r.counts[i];
      }
      jr["percent"] = std::move(cols);
      jr["counts"] = std::move(counts);
      rows.push_back(std::move(jr));
    }
    jt["rows"] = std::move(rows);
    arr.push_back(std::move(jt));
  }
  ordered_json j;
  j["tables"] = std::move(arr);
  return j;
}

// ---------------------------------------------------------------------------
// ratios

RatioReport ratio_from_counts(std::uint64_t a, std::uint64_t b) {
  if (a == 0 && b == 0) throw Error(ErrorKind::kBothZero, "both modes have zero episodes");
  RatioReport r;
  r.count_a = a;
  r.count_b = b;
  auto spell = [](std::uint64_t num, std::uint64_t den) {
    std::string s = fixed(static_cast<std::int64_t>(div_round(static_cast<unsigned __int128>(num) * 100u, den)), 2);
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
    return s;
  };
  if (b == 0) {
    r.text = "1 : 0";
  } else if (a == 0) {
    r.text = "0 : 1";
  } else if (a >= b) {
    r.text = spell(a, b) + " : 1";
  } else {
    r.text = "1 : " + spell(b, a);
  }
  return r;
}

RatioReport ratio_report(const std::vector<LabelRecord>& labels, const std::string& mode_a,
                         const std::string& mode_b) {
  mode_info(mode_a);
  mode_info(mode_b);
  std::uint64_t a = 0;
  std::uint64_t b = 0;
  for (const auto& l : labels) {
    a += l.mode_id == mode_a ? 1 : 0;
    b += l.mode_id == mode_b ? 1 : 0;
  }
  RatioReport r = ratio_from_counts(a, b);
  r.mode_a = mode_a;
  r.mode_b = mode_b;
  return r;
}

ordered_json ratio_to_json(const RatioReport& r) {
  ordered_json j;
  j["mode_a"] = r.mode_a;
  j["mode_b"] = r.mode_b;
  j["count_a"] = r.count_a;
  j["count_b"] = r.count_b;
  j["ratio"] = r.text;
  return j;
}

// ---------------------------------------------------------------------------
// chaining

std::string ChainSlot::label() const {
  std::string s = kind;
  if (!articulation.empty()) s += "_" + articulation;
  if (!target.empty()) s += "(" + target + ")";
  return s;
}

namespace {

ChainSlot nav(std::string target) { return {"Nav", std::move(target), "", true}; }
ChainSlot step(std::string kind, std::string target, std::string art = "") {
  return {std::move(kind), std::move(target), std::move(art), false};
}

}  // namespace

std::optional<ChainPlan> builtin_plan(const std::string& name) {
  const std::string n = lower(name);
  ChainPlan plan;
  if (n == "tidyhouse") {
    plan.task = "TidyHouse";
    for (int i = 0; i < 5; ++i) {
      const std::string x = "x" + std::to_string(i);
      const std::string g = "g" + std::to_string(i);
      plan.slots.insert(plan.slots.end(), {nav(x), step("Pick", x), nav(g), step("Place", x)});
    }
  } else if (n == "preparegroceries") {
    plan.task = "PrepareGroceries";
    for (int i = 0; i < 3; ++i) {
      const std::string x = "x" + std::to_string(i);
      const std::string g = "g" + std::to_string(i);
      plan.slots.insert(plan.slots.end(), {nav(x), step("Pick", x, i <= 1 ? "Fr" : ""), nav(g),
                                           step("Place", x, i == 2 ? "Fr" : "")});
    }
  } else if (n == "settable") {
    plan.task = "SetTable";
    const char* arts[] = {"Dr", "Fr"};
    for (int i = 0; i < 2; ++i) {
      const std::string a = "a" + std::to_string(i);
      const std::string x = "x" + std::to_string(i);
      const std::string g = "g" + std::to_string(i);
      plan.slots.insert(plan.slots.end(),
                        {nav(a), step("Open", a, arts[i]), nav(x), step("Pick", x), nav(g),
                         step("Place", x), nav(a), step("Close", a, arts[i])});
    }
  } else {
    return std::nullopt;
  }
  return plan;
}

ordered_json plan_to_json(const ChainPlan& plan) {
  ordered_json j;
  j["task"] = plan.task;
  auto slots = ordered_json::array();
  for (const auto& s : plan.slots) {
    ordered_json js;
    js["kind"] = s.kind;
    js["target"] = s.target;
    if (!s.articulation.empty()) js["articulation"] = s.articulation;
    js["auto_success"] = s.auto_success;
    js["label"] = s.label();
    slots.push_back(std::move(js));
  }
  j["slots"] = std::move(slots);
  return j;
}

ChainPlan plan_from_json(const json& j) {
  ChainPlan plan;
  try {
    plan.task = j.value("task", std::string("Custom"));
    for (const auto& s : j.at("slots")) {
      ChainSlot slot;
      slot.kind = s.at("kind").get<std::string>();
      slot.target = s.value("target", std::string());
      slot.articulation = s.value("articulation", std::string());
      const bool teleport = slot.kind == "Nav" || slot.kind == "Teleport";
      slot.auto_success = s.value("auto_success", teleport);
      if (teleport && !slot.auto_success) {
        throw Error(ErrorKind::kInvalidArgument, "teleport slots always succeed");
      }
      if (!teleport) parse_subtask(slot.kind);
      plan.slots.push_back(std::move(slot));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, std::string("bad chain plan: ") + e.what());
  }
  if (plan.slots.empty()) throw Error(ErrorKind::kInvalidArgument, "chain plan has no slots");
  return plan;
}

ChainPlan load_plan(const std::string& name_or_path) {
  if (auto p = builtin_plan(name_or_path)) return *p;
  std::ifstream in(name_or_path);
  if (!in) throw Error(ErrorKind::kInvalidArgument, "unknown plan \"" + name_or_path + "\"");
  try {
    return plan_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, std::string("bad chain plan: ") + e.what());
  }
}

std::vector<ChainEpisode> read_chain_episodes(std::istream& in) {
  std::vector<ChainEpisode> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      out.push_back({j.value("episode_id", std::string()), j.at("success").get<std::vector<bool>>()});
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kParseError, "line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

std::vector<double> progressive_completion(const std::vector<ChainEpisode>& episodes,
                                           const ChainPlan& plan) {
  if (episodes.empty()) throw Error(ErrorKind::kEmptyInput, "no chain episodes");
  std::vector<std::uint64_t> reached(plan.slots.size(), 0);
  for (const auto& ep : episodes) {
    if (ep.success.size() != plan.slots.size()) {
      throw Error(ErrorKind::kMisalignedEpisode,
                  "episode " + ep.episode_id + " has " + std::to_string(ep.success.size()) +
                      " slots, plan has " + std::to_string(plan.slots.size()));
    }
    for (std::size_t k = 0; k < plan.slots.size(); ++k) {
      if (!plan.slots[k].auto_success && !ep.success[k]) break;
      ++reached[k];
    }
  }
  std::vector<double> out;
  out.reserve(reached.size());
  for (auto r : reached) out.push_back(100.0 * static_cast<double>(r) / static_cast<double>(episodes.size()));
  return out;
}

std::vector<double> independence_upper_bound(const std::map<std::string, double>& rates,
                                             const ChainPlan& plan) {
  std::vector<double> out;
  double product = 1.0;
  for (const auto& slot : plan.slots) {
    if (!slot.auto_success) {
      const std::string candidates[] = {
          slot.label(), slot.articulation.empty() ? slot.kind : slot.kind + "_" + slot.articulation,
          slot.kind};
      const double* rate = nullptr;
      for (const auto& c : candidates) {
        if (auto it = rates.find(c); it != rates.end()) {
          rate = &it->second;
          break;
        }
      }
      if (rate == nullptr) throw Error(ErrorKind::kMissingRate, "no success rate for slot " + slot.label());
      if (!(*rate >= 0.0 && *rate <= 1.0)) {
        throw Error(ErrorKind::kInvalidArgument, "success rate for " + slot.label() + " must lie in [0, 1]");
      }
      product *= *rate;
    }
    out.push_back(100.0 * product);
  }
  return out;
}

}  // namespace trajlab
