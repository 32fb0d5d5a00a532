#pragma once

#include "k3taut/filtration.hpp"
#include "k3taut/verifier.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>

namespace k3taut::io {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Malformed or invalid input file. line and column are 1-based and zero when
/// the problem is not tied to a position.
struct InputError : std::runtime_error {
  std::string source;
  std::size_t line = 0;
  std::size_t column = 0;

  InputError(std::string src, std::size_t ln, std::size_t col, const std::string& msg)
      : std::runtime_error(format(src, ln, col, msg)), source(std::move(src)), line(ln), column(col) {}

  static std::string format(const std::string& src, std::size_t ln, std::size_t col, const std::string& msg) {
    std::string where = src;
    if (ln > 0) where += (where.empty() ? "line " : ":") + std::to_string(ln) + ":" + std::to_string(col);
    return where.empty() ? msg : where + ": " + msg;
  }
};

/// 1-based line and column of the last character read before a parse error.
/// nlohmann reports the byte offset just past it.
inline std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  std::size_t end = std::min(byte == 0 ? 0 : byte - 1, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

inline json parse_text(const std::string& text, const std::string& source = {}) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    auto [ln, col] = line_column(text, e.byte);
    std::string what = e.what();
    auto pos = what.find("syntax error");
    throw InputError(source, ln, col, pos == std::string::npos ? what : what.substr(pos));
  }
}

inline json read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path.string(), 0, 0, "cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str(), path.string());
}

namespace detail {

[[noreturn]] inline void fail(const std::string& msg) { throw InputError({}, 0, 0, msg); }

inline const json& field(const json& j, const char* name) {
  if (!j.is_object()) fail("expected an object holding '" + std::string(name) + "'");
  auto it = j.find(name);
  if (it == j.end()) fail("missing field '" + std::string(name) + "'");
  return *it;
}

inline int as_int(const json& j, const std::string& what) {
  if (!j.is_number_integer()) fail(what + " must be an integer");
  return j.get<int>();
}

inline std::vector<int> int_list(const json& j, const std::string& what) {
  if (!j.is_array()) fail(what + " must be an array of integers");
  std::vector<int> out;
  for (const auto& x : j) out.push_back(as_int(x, what + " entry"));
  return out;
}

inline void check_schema(const json& j) {
  if (!j.is_object()) fail("top level must be an object");
  auto it = j.find("schema_version");
  if (it == j.end()) fail("missing field 'schema_version'");
  if (!it->is_number_integer() || it->get<int>() != kSchemaVersion)
    fail("unsupported schema_version, expected " + std::to_string(kSchemaVersion));
}

}  // namespace detail

/// Rationals are written as strings "p/q" or "p"; plain integers are accepted.
inline Rational parse_rational(const json& j) {
  if (j.is_number_integer()) return Rational(j.get<long>());
  if (!j.is_string()) detail::fail("rational must be a string \"p/q\" or an integer");
  const std::string s = j.get<std::string>();
  if (s.empty() || s.find_first_of(" \t\n") != std::string::npos) detail::fail("malformed rational '" + s + "'");
  if (auto slash = s.find('/'); slash != std::string::npos && s.find_first_not_of('0', slash + 1) == std::string::npos &&
                                slash + 1 < s.size())
    detail::fail("zero denominator in '" + s + "'");
  Rational r;
  if (r.set_str(s, 10) != 0) detail::fail("malformed rational '" + s + "'");
  r.canonicalize();
  return r;
}

inline json rational_to_json(const Rational& r) { return r.get_str(); }

// ---------------------------------------------------------------- config

struct RunConfig {
  SurfaceModel surface;
  std::size_t term_ceiling = VerifyOptions{}.term_ceiling;
  unsigned parallelism = 0;  // 0: one worker per hardware thread
  std::string output;

  unsigned workers() const {
    if (parallelism > 0) return parallelism;
    return std::max(1u, std::thread::hardware_concurrency());
  }

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

inline RunConfig config_from_json(const json& j) {
  detail::check_schema(j);
  RunConfig c;
  if (auto it = j.find("surface"); it != j.end()) {
    const json& g = detail::field(*it, "gram");
    if (!g.is_array()) detail::fail("surface.gram must be an array of rows");
    std::vector<std::vector<Rational>> gram;
    for (const auto& row : g) {
      if (!row.is_array()) detail::fail("surface.gram rows must be arrays");
      auto& r = gram.emplace_back();
      for (const auto& x : row) r.push_back(parse_rational(x));
    }
    try {
      c.surface = SurfaceModel(std::move(gram));
    } catch (const std::invalid_argument& e) {
      detail::fail(std::string("surface.gram: ") + e.what());
    }
  }
  if (auto it = j.find("term_ceiling"); it != j.end()) {
    if (!it->is_number_integer() || it->get<long long>() < 1) detail::fail("term_ceiling must be a positive integer");
    c.term_ceiling = it->get<std::size_t>();
  }
  if (auto it = j.find("parallelism"); it != j.end()) {
    if (!it->is_number_integer() || it->get<long long>() < 0) detail::fail("parallelism must be a nonnegative integer");
    c.parallelism = it->get<unsigned>();
  }
  if (auto it = j.find("output"); it != j.end()) {
    if (!it->is_string()) detail::fail("output must be a string");
    c.output = it->get<std::string>();
  }
  return c;
}

inline json config_to_json(const RunConfig& c) {
  json gram = json::array();
  for (const auto& row : c.surface.gram()) {
    json r = json::array();
    for (const auto& x : row) r.push_back(rational_to_json(x));
    gram.push_back(r);
  }
  return json{{"schema_version", kSchemaVersion},
              {"surface", {{"gram", gram}}},
              {"term_ceiling", c.term_ceiling},
              {"parallelism", c.parallelism},
              {"output", c.output}};
}

// ---------------------------------------------------------------- alpha

inline AlphaNode alpha_from_json(const json& j) {
  using detail::as_int;
  using detail::field;
  if (!j.is_object()) detail::fail("alpha node must be an object");
  if (j.contains("gen")) {
    const json& g = j["gen"];
    if (!g.is_string()) detail::fail("alpha 'gen' must be a string");
    const std::string gen = g.get<std::string>();
    if (gen == "one") return AlphaNode::one();
    if (gen == "cx") return AlphaNode::cx(as_int(field(j, "s"), "cx.s"));
    if (gen == "div") return AlphaNode::div(as_int(field(j, "s"), "div.s"), as_int(field(j, "index"), "div.index"));
    if (gen == "diag") return AlphaNode::diag(as_int(field(j, "s"), "diag.s"), as_int(field(j, "t"), "diag.t"));
    if (gen == "ch") {
      bool normalized = true;
      if (auto it = j.find("normalized"); it != j.end()) {
        if (!it->is_boolean()) detail::fail("ch.normalized must be a boolean");
        normalized = it->get<bool>();
      }
      return AlphaNode::ch(as_int(field(j, "s"), "ch.s"), as_int(field(j, "degree"), "ch.degree"), normalized);
    }
    detail::fail("unknown alpha generator '" + gen + "'");
  }
  auto children = [&](const char* key) {
    const json& arr = j[key];
    if (!arr.is_array() || arr.empty()) detail::fail(std::string("alpha '") + key + "' must be a nonempty array");
    std::vector<AlphaNode> out;
    for (const auto& c : arr) out.push_back(alpha_from_json(c));
    return out;
  };
  if (j.contains("mul")) return AlphaNode::mul(children("mul"));
  if (j.contains("add")) return AlphaNode::add(children("add"));
  if (j.contains("scale")) return AlphaNode::scale(parse_rational(j["scale"]), alpha_from_json(field(j, "of")));
  detail::fail("alpha node needs one of 'gen', 'mul', 'add', 'scale'");
}

inline json alpha_to_json(const AlphaNode& a) {
  using K = AlphaNode::Kind;
  auto kids = [&] {
    json arr = json::array();
    for (const auto& c : a.children) arr.push_back(alpha_to_json(c));
    return arr;
  };
  switch (a.kind) {
    case K::One: return {{"gen", "one"}};
    case K::Cx: return {{"gen", "cx"}, {"s", a.s}};
    case K::Div: return {{"gen", "div"}, {"s", a.s}, {"index", a.index}};
    case K::Diag: return {{"gen", "diag"}, {"s", a.s}, {"t", a.t}};
    case K::Ch: return {{"gen", "ch"}, {"s", a.s}, {"degree", a.index}, {"normalized", a.normalized}};
    case K::Mul: return {{"mul", kids()}};
    case K::Add: return {{"add", kids()}};
    case K::Scale: return {{"scale", rational_to_json(a.scalar)}, {"of", alpha_to_json(a.children.at(0))}};
  }
  return {};
}

// ---------------------------------------------------------------- instances

inline InstanceSpec instance_from_json(const json& j) {
  using detail::as_int;
  using detail::field;
  using detail::int_list;
  detail::check_schema(j);
  InstanceSpec s;
  s.n = as_int(field(j, "n"), "n");
  s.k = as_int(field(j, "k"), "k");
  s.l = as_int(field(j, "l"), "l");
  s.alpha = std::make_shared<AlphaNode>(j.contains("alpha") ? alpha_from_json(j["alpha"]) : AlphaNode::one());
  s.omega = int_list(field(j, "omega"), "omega");
  s.theta = j.contains("theta") ? int_list(j["theta"], "theta") : std::vector<int>{};
  if (j.contains("assignment")) {
    const json& a = j["assignment"];
    if (!a.is_object()) detail::fail("assignment must be an object mapping theta factors to aux factors");
    for (const auto& [key, val] : a.items()) {
      int t = 0;
      try {
        std::size_t used = 0;
        t = std::stoi(key, &used);
        if (used != key.size()) throw std::invalid_argument(key);
      } catch (const std::exception&) {
        detail::fail("assignment key '" + key + "' is not an integer");
      }
      if (!s.assignment.emplace(t, as_int(val, "assignment value")).second) detail::fail("assignment repeats factor " + key);
    }
  }
  s.indices = int_list(field(j, "indices"), "indices");
  return s;
}

inline json instance_to_json(const InstanceSpec& s) {
  json assignment = json::object();
  for (const auto& [t, a] : s.assignment) assignment[std::to_string(t)] = a;
  return json{{"schema_version", kSchemaVersion},
              {"n", s.n},
              {"k", s.k},
              {"l", s.l},
              {"alpha", alpha_to_json(*s.alpha)},
              {"omega", s.omega},
              {"theta", s.theta},
              {"assignment", assignment},
              {"indices", s.indices}};
}

// ---------------------------------------------------------------- filtration

struct FiltrationRequest {
  ZeroCycleExpr cycle;
  int max_m = 4;

  friend bool operator==(const FiltrationRequest&, const FiltrationRequest&) = default;
};

inline FiltrationRequest filtration_from_json(const json& j) {
  detail::check_schema(j);
  FiltrationRequest r;
  const json& c = detail::field(j, "cycle");
  if (auto it = c.find("points"); it != c.end()) {
    if (!it->is_array()) detail::fail("cycle.points must be an array");
    for (const auto& p : *it) r.cycle.points[detail::as_int(detail::field(p, "id"), "point id")] += parse_rational(detail::field(p, "coef"));
  }
  if (auto it = c.find("cx"); it != c.end()) r.cycle.cx = parse_rational(*it);
  if (auto it = c.find("rational_curve"); it != c.end())
    for (int id : detail::int_list(*it, "cycle.rational_curve")) r.cycle.rational_curve_points.insert(id);
  if (auto it = j.find("max_m"); it != j.end()) r.max_m = detail::as_int(*it, "max_m");
  return r;
}

inline json filtration_to_json(const FiltrationRequest& r) {
  json pts = json::array();
  for (const auto& [id, c] : r.cycle.points) pts.push_back({{"id", id}, {"coef", rational_to_json(c)}});
  return json{{"schema_version", kSchemaVersion},
              {"cycle", {{"points", pts}, {"cx", rational_to_json(r.cycle.cx)}, {"rational_curve", r.cycle.rational_curve_points}}},
              {"max_m", r.max_m}};
}

inline json filtration_report_to_json(const FiltrationRequest& req, const FiltrationReport& rep) {
  json out{{"schema_version", kSchemaVersion}, {"input", filtration_to_json(req)}};
  if (rep.index)
    out["index"] = *rep.index;
  else
    out["index"] = "Unknown";
  out["residual_terms"] = rep.residual_terms;
  out["monotone"] = rep.monotone;
  if (!rep.index) out["note"] = "no power up to max_m + 1 reduced to zero; not reduced is not a proof of nonvanishing";
  return out;
}

// ---------------------------------------------------------------- reports

struct ReportRecord {
  json input;
  Verdict verdict;
};

inline bool same_verdict(const Verdict& a, const Verdict& b) {
  return a.status == b.status && a.reason == b.reason && a.residual == b.residual && a.peak_terms == b.peak_terms &&
         a.wall_time_ms == b.wall_time_ms && a.trace == b.trace;
}

inline bool operator==(const ReportRecord& a, const ReportRecord& b) {
  return a.input == b.input && same_verdict(a.verdict, b.verdict);
}

inline json report_to_json(const ReportRecord& r) {
  json trace = json::array();
  for (const auto& t : r.verdict.trace)
    trace.push_back({{"depth", t.depth}, {"level", t.level}, {"branch", t.branch}, {"terms", t.terms}});
  return json{{"schema_version", kSchemaVersion},
              {"input", r.input},
              {"verdict", {{"status", to_string(r.verdict.status)}, {"reason", r.verdict.reason}, {"residual", r.verdict.residual}}},
              {"wall_time_ms", r.verdict.wall_time_ms},
              {"peak_terms", r.verdict.peak_terms},
              {"trace", trace}};
}

inline Status status_from_string(const std::string& s) {
  for (Status st : {Status::CertifiedZero, Status::Inconclusive, Status::InputError})
    if (to_string(st) == s) return st;
  detail::fail("unknown verdict status '" + s + "'");
}

inline ReportRecord report_from_json(const json& j) {
  using detail::field;
  detail::check_schema(j);
  ReportRecord r;
  r.input = field(j, "input");
  const json& v = field(j, "verdict");
  r.verdict.status = status_from_string(field(v, "status").get<std::string>());
  r.verdict.reason = field(v, "reason").get<std::string>();
  r.verdict.residual = field(v, "residual").get<std::string>();
  r.verdict.wall_time_ms = field(j, "wall_time_ms").get<double>();
  r.verdict.peak_terms = field(j, "peak_terms").get<std::size_t>();
  for (const auto& t : field(j, "trace"))
    r.verdict.trace.push_back({field(t, "depth").get<int>(), field(t, "level").get<int>(),
                               field(t, "branch").get<std::string>(), field(t, "terms").get<std::size_t>()});
  return r;
}

/// Report with timing fields zeroed, for determinism comparisons.
inline json without_timing(json report) {
  report.erase("wall_time_ms");
  return report;
}

}  // namespace k3taut::io
