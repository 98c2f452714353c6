#include "trajlab/trajlog.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "trajlab/error.hpp"
#include "trajlab/predicates.hpp"

namespace trajlab {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr int kMaxArmDof = 4096;

std::string at_t(std::uint32_t t) { return " at t=" + std::to_string(t); }

// ---------------------------------------------------------------------------
// validation

void check_header(const TrajectoryHeader& h, std::vector<Finding>& out) {
  auto error = [&](std::string msg) { out.push_back({Severity::kError, std::move(msg), {}}); };
  if (h.arm_dof < 1) error("arm_dof must be >= 1");
  if (static_cast<int>(h.rest_arm.size()) != h.arm_dof) {
    error("rest_arm has " + std::to_string(h.rest_arm.size()) + " entries, expected arm_dof=" +
          std::to_string(h.arm_dof));
  }
  if (h.articulation_kind != ArticulationKind::kNone && !(h.art_qmin < h.art_qmax)) {
    error("art_qmin must be < art_qmax");
  }
  if ((h.subtask_kind == SubtaskKind::kOpen || h.subtask_kind == SubtaskKind::kClose) &&
      h.articulation_kind == ArticulationKind::kNone) {
    error(std::string(to_string(h.subtask_kind)) + " subtask requires an articulation");
  }
  if (!(h.control_freq > 0.0)) error("control_freq must be positive");
  if (h.thresholds_override) {
    for (auto& p : check_thresholds(*h.thresholds_override)) error("thresholds_override: " + p);
  }
}

}  // namespace

std::vector<Finding> validate(const Trajectory& traj) {
  std::vector<Finding> out;
  const auto& h = traj.header;
  check_header(h, out);
  auto error = [&](std::string msg, std::uint32_t t) {
    out.push_back({Severity::kError, std::move(msg), t});
  };

  if (traj.records.size() < 2) {
    out.push_back({Severity::kError,
                   "trajectory has " + std::to_string(traj.records.size()) +
                       " records, need at least 2",
                   {}});
  }

  const bool needs_force = h.subtask_kind != SubtaskKind::kPlace;
  const bool needs_goal = h.subtask_kind == SubtaskKind::kPlace;
  const bool needs_art = h.subtask_kind == SubtaskKind::kOpen || h.subtask_kind == SubtaskKind::kClose;
  const bool has_art = h.articulation_kind != ArticulationKind::kNone;

  float prev_cum = 0.0f;
  for (std::size_t i = 0; i < traj.records.size(); ++i) {
    const auto& r = traj.records[i];
    const auto t = static_cast<std::uint32_t>(i);
    if (r.t != i) error("t=" + std::to_string(r.t) + " out of sequence (expected " + std::to_string(i) + ")", t);

    if (static_cast<int>(r.q_arm.size()) != h.arm_dof ||
        static_cast<int>(r.qd_arm.size()) != h.arm_dof) {
      error("joint vectors do not match arm_dof" + at_t(t), t);
    }
    auto all_finite = [](const std::vector<float>& v) {
      return std::all_of(v.begin(), v.end(), [](float x) { return std::isfinite(x); });
    };
    if (!all_finite(r.q_arm) || !all_finite(r.qd_arm)) error("non-finite joint value" + at_t(t), t);
    for (float v : {r.q_tor, r.v_base_x, r.v_base_y, r.omega_base}) {
      if (!std::isfinite(v)) {
        error("non-finite torso/base value" + at_t(t), t);
        break;
      }
    }

    if (!std::isfinite(r.cum_robot_force) || r.cum_robot_force < 0.0f) {
      error("cum_robot_force must be finite and non-negative" + at_t(t), t);
    } else {
      if (i > 0 && r.cum_robot_force < prev_cum) error("cumulative force decreased" + at_t(t), t);
      prev_cum = r.cum_robot_force;
    }

    if (!(r.dist_ee_rest >= 0.0f) || std::isinf(r.dist_ee_rest)) {
      error("dist_ee_rest must be finite and non-negative" + at_t(t), t);
    }
    if (std::isinf(r.dist_obj_goal) || r.dist_obj_goal < 0.0f) {
      error("dist_obj_goal must be non-negative or NaN" + at_t(t), t);
    }
    if (std::isinf(r.force_ee_target) || r.force_ee_target < 0.0f) {
      error("force_ee_target must be non-negative or NaN" + at_t(t), t);
    }
    if (std::isinf(r.art_q)) error("art_q must be finite or NaN" + at_t(t), t);

    const char* missing = nullptr;
    if (needs_force && std::isnan(r.force_ee_target)) missing = "force_ee_target";
    if (needs_goal && std::isnan(r.dist_obj_goal)) missing = "dist_obj_goal";
    if (needs_art && std::isnan(r.art_q)) missing = "art_q";
    if (missing != nullptr) {
      error(std::string(missing) + " is NaN but required for " +
                std::string(to_string(h.subtask_kind)) + at_t(t),
            t);
    }

    if (has_art && std::isfinite(r.art_q) &&
        (r.art_q < static_cast<float>(h.art_qmin) || r.art_q > static_cast<float>(h.art_qmax))) {
      out.push_back({Severity::kWarning,
                     "art_q=" + format_float(r.art_q) + " outside [art_qmin, art_qmax]" + at_t(t), t});
    }
  }
  return out;
}

bool has_errors(const std::vector<Finding>& findings) {
  return std::any_of(findings.begin(), findings.end(),
                     [](const Finding& f) { return f.severity == Severity::kError; });
}

// ---------------------------------------------------------------------------
// header JSON

ordered_json header_to_json(const TrajectoryHeader& h) {
  ordered_json j;
  j["format_version"] = h.format_version;
  j["episode_id"] = h.episode_id;
  j["task"] = to_string(h.task);
  j["subtask_kind"] = to_string(h.subtask_kind);
  j["split"] = to_string(h.split);
  j["policy_tag"] = h.policy_tag;
  j["target_id"] = h.target_id;
  j["articulation_kind"] = to_string(h.articulation_kind);
  if (h.articulation_kind != ArticulationKind::kNone) {
    j["art_qmin"] = h.art_qmin;
    j["art_qmax"] = h.art_qmax;
  }
  j["arm_dof"] = h.arm_dof;
  j["rest_arm"] = h.rest_arm;
  j["rest_tor"] = h.rest_tor;
  j["control_freq"] = h.control_freq;
  if (h.thresholds_override) j["thresholds_override"] = thresholds_to_json(*h.thresholds_override);
  return j;
}

TrajectoryHeader header_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::kHeaderParseError, "header must be a JSON object");
  TrajectoryHeader h;
  try {
    if (!j.contains("episode_id")) throw Error(ErrorKind::kHeaderParseError, "header missing \"episode_id\"");
    if (!j.contains("subtask_kind")) {
      throw Error(ErrorKind::kHeaderParseError, "header missing \"subtask_kind\"");
    }
    h.format_version = j.value("format_version", 1);
    h.episode_id = j.at("episode_id").get<std::string>();
    h.subtask_kind = parse_subtask(j.at("subtask_kind").get<std::string>());
    if (j.contains("task")) h.task = parse_task(j.at("task").get<std::string>());
    if (j.contains("split")) h.split = parse_split(j.at("split").get<std::string>());
    h.policy_tag = j.value("policy_tag", std::string());
    h.target_id = j.value("target_id", std::string());
    if (j.contains("articulation_kind")) {
      h.articulation_kind = parse_articulation(j.at("articulation_kind").get<std::string>());
    }
    if (h.articulation_kind != ArticulationKind::kNone) {
      h.art_qmin = j.at("art_qmin").get<double>();
      h.art_qmax = j.at("art_qmax").get<double>();
    }
    if (j.contains("rest_arm")) h.rest_arm = j.at("rest_arm").get<std::vector<double>>();
    h.arm_dof = j.value("arm_dof", static_cast<int>(h.rest_arm.size()));
    if (!j.contains("rest_arm")) h.rest_arm.assign(static_cast<std::size_t>(std::max(h.arm_dof, 0)), 0.0);
    h.rest_tor = j.value("rest_tor", 0.0);
    h.control_freq = j.value("control_freq", 20.0);
    if (j.contains("thresholds_override") && !j.at("thresholds_override").is_null()) {
      h.thresholds_override = thresholds_from_json(j.at("thresholds_override"));
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kHeaderParseError) throw;
    throw Error(ErrorKind::kHeaderParseError, std::string("bad header: ") + e.what());
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kHeaderParseError, std::string("bad header: ") + e.what());
  }
  if (h.arm_dof < 1 || h.arm_dof > kMaxArmDof) {
    throw Error(ErrorKind::kHeaderParseError, "arm_dof out of range: " + std::to_string(h.arm_dof));
  }
  return h;
}

// ---------------------------------------------------------------------------
// binary container

namespace {

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void bytes(std::string_view s) { buf_.append(s); }
  const std::string& data() const { return buf_; }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  std::string buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}
  std::uint8_t u8() { return static_cast<std::uint8_t>(data_[pos_++]); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  float f32() { return std::bit_cast<float>(u32()); }

 private:
  std::uint64_t get(int n) {
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::string_view data_;
  std::size_t pos_ = 0;
};

void read_exact(std::istream& in, char* dst, std::size_t n, const char* what) {
  in.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw Error(ErrorKind::kTruncatedFile, std::string("unexpected end of file in ") + what);
  }
}

void encode_record(const TimestepRecord& r, ByteWriter& w) {
  w.u32(r.t);
  for (float v : r.q_arm) w.f32(v);
  for (float v : r.qd_arm) w.f32(v);
  for (float v : {r.q_tor, r.v_base_x, r.v_base_y, r.omega_base, r.dist_ee_rest, r.dist_obj_goal,
                  r.force_ee_target, r.cum_robot_force, r.art_q}) {
    w.f32(v);
  }
  w.u8(r.grasped ? 1 : 0);
  w.u8(0);
  w.u8(0);
  w.u8(0);
}

TimestepRecord decode_record(ByteReader& rd, int dof) {
  TimestepRecord r;
  r.t = rd.u32();
  r.q_arm.resize(static_cast<std::size_t>(dof));
  r.qd_arm.resize(static_cast<std::size_t>(dof));
  for (auto& v : r.q_arm) v = rd.f32();
  for (auto& v : r.qd_arm) v = rd.f32();
  r.q_tor = rd.f32();
  r.v_base_x = rd.f32();
  r.v_base_y = rd.f32();
  r.omega_base = rd.f32();
  r.dist_ee_rest = rd.f32();
  r.dist_obj_goal = rd.f32();
  r.force_ee_target = rd.f32();
  r.cum_robot_force = rd.f32();
  r.art_q = rd.f32();
  r.grasped = rd.u8() != 0;
  rd.u8();
  rd.u8();
  rd.u8();
  return r;
}

void refuse_invalid(const Trajectory& traj) {
  auto findings = validate(traj);
  for (const auto& f : findings) {
    if (f.severity == Severity::kError) {
      throw Error(ErrorKind::kInvariantViolation,
                  "refusing to write episode " + traj.header.episode_id + ": " + f.message);
    }
  }
}

}  // namespace

std::size_t write_binary(const Trajectory& traj, std::ostream& sink) {
  refuse_invalid(traj);
  const std::string header = header_to_json(traj.header).dump();
  ByteWriter w;
  w.bytes(std::string_view(kMagic, 4));
  w.u16(kFormatVersion);
  w.u16(0);
  w.u32(static_cast<std::uint32_t>(header.size()));
  w.bytes(header);
  w.u64(traj.records.size());
  for (const auto& r : traj.records) encode_record(r, w);
  sink.write(w.data().data(), static_cast<std::streamsize>(w.data().size()));
  if (!sink) throw Error(ErrorKind::kIo, "write failed for episode " + traj.header.episode_id);
  return w.data().size();
}

Trajectory read_binary(std::istream& source) {
  std::array<char, kPreambleSize> pre{};
  source.read(pre.data(), 4);
  if (source.gcount() != 4 || std::memcmp(pre.data(), kMagic, 4) != 0) {
    throw Error(ErrorKind::kBadMagic, "not a TRJL container");
  }
  read_exact(source, pre.data() + 4, kPreambleSize - 4, "preamble");
  ByteReader pr(std::string_view(pre.data(), pre.size()));
  pr.u32();
  const std::uint16_t version = pr.u16();
  pr.u16();  // flags
  const std::uint32_t header_len = pr.u32();
  if (version != kFormatVersion) {
    throw Error(ErrorKind::kUnsupportedVersion, "unsupported TRJL version " + std::to_string(version));
  }

  std::string header_text(header_len, '\0');
  read_exact(source, header_text.data(), header_len, "header");
  json hj;
  try {
    hj = json::parse(header_text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kHeaderParseError, std::string("header is not valid JSON: ") + e.what());
  }
  Trajectory traj;
  traj.header = header_from_json(hj);

  char count_buf[8];
  read_exact(source, count_buf, 8, "record count");
  const std::uint64_t n = ByteReader(std::string_view(count_buf, 8)).u64();

  const std::size_t rsize = record_size(traj.header.arm_dof);
  traj.records.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(n, 1u << 16)));
  std::string buf(rsize, '\0');
  for (std::uint64_t i = 0; i < n; ++i) {
    read_exact(source, buf.data(), rsize, "record region");
    ByteReader rd(buf);
    traj.records.push_back(decode_record(rd, traj.header.arm_dof));
  }
  return traj;
}

// ---------------------------------------------------------------------------
// text interchange

std::string format_float(float v) {
  if (std::isnan(v)) return "null";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, res.ptr);
  // Keep integral values lexically floating so "-0" survives a parse.
  if (std::isfinite(v) && s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

namespace {

void append_float(std::string& out, float v) { out += format_float(v); }

void append_floats(std::string& out, const std::vector<float>& vs) {
  out += '[';
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (i > 0) out += ',';
    append_float(out, vs[i]);
  }
  out += ']';
}

std::string record_line(const TimestepRecord& r) {
  std::string s;
  s.reserve(256);
  s += "{\"t\":" + std::to_string(r.t);
  s += ",\"q_arm\":";
  append_floats(s, r.q_arm);
  s += ",\"qd_arm\":";
  append_floats(s, r.qd_arm);
  const std::pair<const char*, float> scalars[] = {
      {"q_tor", r.q_tor},
      {"v_base_x", r.v_base_x},
      {"v_base_y", r.v_base_y},
      {"omega_base", r.omega_base},
      {"dist_ee_rest", r.dist_ee_rest},
      {"dist_obj_goal", r.dist_obj_goal},
      {"force_ee_target", r.force_ee_target},
      {"cum_robot_force", r.cum_robot_force},
  };
  for (const auto& [name, v] : scalars) {
    s += ",\"";
    s += name;
    s += "\":";
    append_float(s, v);
  }
  s += ",\"grasped\":";
  s += r.grasped ? "true" : "false";
  s += ",\"art_q\":";
  append_float(s, r.art_q);
  s += '}';
  return s;
}

// SAX consumer for one record line. Float fields are parsed from the raw
// token text with from_chars<float> so no double rounding occurs.
class RecordSax {
 public:
  using number_integer_t = json::number_integer_t;
  using number_unsigned_t = json::number_unsigned_t;
  using number_float_t = json::number_float_t;
  using string_t = json::string_t;
  using binary_t = json::binary_t;

  explicit RecordSax(std::size_t line) : line_(line) {}

  bool null() { return scalar(kNaN, "null"); }
  bool boolean(bool v) {
    if (depth_ == 1 && key_ == "grasped") {
      rec_.grasped = v;
      seen_grasped_ = true;
      return true;
    }
    return fail("unexpected boolean for \"" + key_ + "\"");
  }
  bool number_integer(number_integer_t v) { return integral(static_cast<double>(v), v >= 0, static_cast<std::uint64_t>(v)); }
  bool number_unsigned(number_unsigned_t v) { return integral(static_cast<double>(v), true, v); }
  bool number_float(number_float_t, const string_t& raw) {
    float f = 0.0f;
    auto res = std::from_chars(raw.data(), raw.data() + raw.size(), f);
    if (res.ec != std::errc()) return fail("bad number " + raw);
    return scalar(f, raw);
  }
  bool string(string_t&) { return depth_ != 1 || fail("unexpected string for \"" + key_ + "\""); }
  bool binary(binary_t&) { return fail("unexpected binary value"); }
  bool start_object(std::size_t) {
    ++depth_;
    return depth_ == 1 || unknown_key_skip();
  }
  bool end_object() {
    --depth_;
    return true;
  }
  bool start_array(std::size_t) {
    ++depth_;
    if (depth_ == 2 && (key_ == "q_arm" || key_ == "qd_arm")) {
      array_ = key_ == "q_arm" ? &rec_.q_arm : &rec_.qd_arm;
      array_->clear();
      seen_.push_back(key_);
    }
    return true;
  }
  bool end_array() {
    --depth_;
    if (depth_ == 1) array_ = nullptr;
    return true;
  }
  bool key(string_t& k) {
    if (depth_ == 1) key_ = k;
    return true;
  }
  bool parse_error(std::size_t pos, const std::string&, const nlohmann::detail::exception& ex) {
    error_ = "malformed JSON at column " + std::to_string(pos) + ": " + ex.what();
    return false;
  }

  TimestepRecord take() {
    static constexpr const char* kRequired[] = {
        "t",          "q_arm",        "qd_arm",        "q_tor",           "v_base_x",
        "v_base_y",   "omega_base",   "dist_ee_rest",  "dist_obj_goal",   "force_ee_target",
        "cum_robot_force", "art_q"};
    for (const char* name : kRequired) {
      if (std::find(seen_.begin(), seen_.end(), name) == seen_.end()) {
        throw Error(ErrorKind::kParseError,
                    "line " + std::to_string(line_) + ": missing field \"" + name + "\"");
      }
    }
    if (!seen_grasped_) {
      throw Error(ErrorKind::kParseError, "line " + std::to_string(line_) + ": missing field \"grasped\"");
    }
    return std::move(rec_);
  }

  const std::string& error() const { return error_; }

 private:
  bool unknown_key_skip() { return true; }

  bool integral(double as_double, bool non_negative, std::uint64_t as_unsigned) {
    if (depth_ == 1 && key_ == "t") {
      if (!non_negative || as_unsigned > 0xffffffffu) return fail("t out of range");
      rec_.t = static_cast<std::uint32_t>(as_unsigned);
      seen_.push_back("t");
      return true;
    }
    return scalar(static_cast<float>(as_double), {});
  }

  bool scalar(float v, std::string_view raw) {
    if (array_ != nullptr && depth_ == 2) {
      if (raw == "null") return fail("null inside \"" + key_ + "\"");
      array_->push_back(v);
      return true;
    }
    if (depth_ != 1) return true;
    float* dst = field(key_);
    if (dst == nullptr) return true;  // unknown keys are ignored
    if (raw == "null" && key_ != "dist_obj_goal" && key_ != "force_ee_target" && key_ != "art_q") {
      return fail("field \"" + key_ + "\" may not be null");
    }
    *dst = v;
    seen_.push_back(key_);
    return true;
  }

  float* field(const std::string& k) {
    if (k == "q_tor") return &rec_.q_tor;
    if (k == "v_base_x") return &rec_.v_base_x;
    if (k == "v_base_y") return &rec_.v_base_y;
    if (k == "omega_base") return &rec_.omega_base;
    if (k == "dist_ee_rest") return &rec_.dist_ee_rest;
    if (k == "dist_obj_goal") return &rec_.dist_obj_goal;
    if (k == "force_ee_target") return &rec_.force_ee_target;
    if (k == "cum_robot_force") return &rec_.cum_robot_force;
    if (k == "art_q") return &rec_.art_q;
    return nullptr;
  }

  bool fail(std::string msg) {
    error_ = std::move(msg);
    return false;
  }

  std::size_t line_;
  int depth_ = 0;
  std::string key_;
  std::vector<float>* array_ = nullptr;
  std::vector<std::string> seen_;
  bool seen_grasped_ = false;
  TimestepRecord rec_;
  std::string error_;
};

}  // namespace

void write_text(const Trajectory& traj, std::ostream& sink) {
  refuse_invalid(traj);
  ordered_json first;
  first["header"] = header_to_json(traj.header);
  sink << first.dump() << '\n';
  for (const auto& r : traj.records) sink << record_line(r) << '\n';
  if (!sink) throw Error(ErrorKind::kIo, "write failed for episode " + traj.header.episode_id);
}

Trajectory read_text(std::istream& source) {
  std::string line;
  std::size_t line_no = 0;
  Trajectory traj;
  bool have_header = false;
  while (std::getline(source, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (!have_header) {
      json j;
      try {
        j = json::parse(line);
      } catch (const json::exception& e) {
        throw Error(ErrorKind::kParseError, "line " + std::to_string(line_no) + ": " + e.what());
      }
      if (!j.is_object() || !j.contains("header")) {
        throw Error(ErrorKind::kParseError,
                    "line " + std::to_string(line_no) + ": expected {\"header\": {...}}");
      }
      traj.header = header_from_json(j.at("header"));
      have_header = true;
      continue;
    }
    RecordSax sax(line_no);
    const bool ok = json::sax_parse(line, &sax);
    if (!ok) throw Error(ErrorKind::kParseError, "line " + std::to_string(line_no) + ": " + sax.error());
    traj.records.push_back(sax.take());
  }
  if (!have_header) throw Error(ErrorKind::kParseError, "empty trajectory text");
  return traj;
}

// ---------------------------------------------------------------------------
// files

FileFormat format_for_path(const std::filesystem::path& path) {
  return path.extension() == ".trjl" ? FileFormat::kBinary : FileFormat::kText;
}

Trajectory load_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  char first = '\0';
  in.get(first);
  if (!in) throw Error(ErrorKind::kTruncatedFile, path.string() + " is empty");
  in.unget();
  if (first == kMagic[0]) return read_binary(in);
  if (first == '{' || first == ' ' || first == '\n') return read_text(in);
  return read_binary(in);  // reports BadMagic
}

void save_trajectory(const std::filesystem::path& path, const Trajectory& traj, FileFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot create " + path.string());
  if (format == FileFormat::kBinary) {
    write_binary(traj, out);
  } else {
    write_text(traj, out);
  }
  out.flush();
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

}  // namespace trajlab
