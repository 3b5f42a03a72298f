#pragma once

// JSON encoding of matrices, paths, orbit systems and reports.  Output is
// canonical: keys sorted, floats with 17 significant digits.

#include <cstdio>
#include <json.hpp>

#include "certifier.hpp"

namespace maslov {

using json = nlohmann::json;

// ---------------------------------------------------------------- canonical dump

namespace detail {

inline void dump_canonical(const json& j, std::string& out) {
  switch (j.type()) {
    case json::value_t::object: {
      out += '{';
      bool first = true;
      for (const auto& [k, v] : j.items()) {  // std::map keeps keys sorted
        if (!first) out += ',';
        first = false;
        out += json(k).dump();
        out += ':';
        dump_canonical(v, out);
      }
      out += '}';
      break;
    }
    case json::value_t::array: {
      out += '[';
      for (size_t i = 0; i < j.size(); ++i) {
        if (i) out += ',';
        dump_canonical(j[i], out);
      }
      out += ']';
      break;
    }
    case json::value_t::number_float: {
      double x = j.get<double>();
      if (!std::isfinite(x)) {
        out += "null";
        break;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", x);
      std::string s = buf;
      if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
      out += s;
      break;
    }
    default:
      out += j.dump();
  }
}

}  // namespace detail

inline std::string canonical_dump(const json& j) {
  std::string s;
  detail::dump_canonical(j, s);
  return s;
}

// ---------------------------------------------------------------- scalars

inline json to_json_value(const Rational& r) { return r.den() == 1 ? json(r.num()) : json(r.str()); }

inline Rational parse_rational(const json& j) {
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    try {
      auto slash = s.find('/');
      if (slash == std::string::npos) return Rational(std::stoll(s));
      return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
    } catch (const std::logic_error&) {
      throw InputError("malformed rational '" + s + "'");
    }
  }
  throw InputError("rational must be an integer or a \"p/q\" string");
}

inline json to_json_value(const QuadSurd& q) {
  json j = {{"a", to_json_value(q.a())}};
  if (!q.is_rational()) {
    j["b"] = to_json_value(q.b());
    j["radicand"] = q.radicand();
  }
  return j;
}

inline QuadSurd parse_surd(const json& j) {
  if (!j.is_object() || !j.contains("a")) throw InputError("exact value needs an object with key \"a\"");
  Rational a = parse_rational(j.at("a"));
  if (!j.contains("b")) return QuadSurd(a);
  if (!j.contains("radicand") || !j.at("radicand").is_number_integer())
    throw InputError("exact value with \"b\" needs an integer \"radicand\"");
  return {a, parse_rational(j.at("b")), j.at("radicand").get<std::int64_t>()};
}

inline json turns_json(const Turns& t) {
  json j = {{"turns", t.value}, {"angle", kTwoPi * t.value}};
  if (t.exact) j["exact"] = to_json_value(*t.exact);
  return j;
}

inline double parse_number(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) throw InputError(std::string("missing numeric field \"") + key + "\"");
  return j.at(key).get<double>();
}

// ---------------------------------------------------------------- matrices

inline json matrix_json(const Mat& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) r.push_back(M(i, j));
    rows.push_back(r);
  }
  return rows;
}

inline Mat parse_matrix(const json& j) {
  if (!j.is_array() || j.empty()) throw InputError("matrix must be a non-empty array of rows");
  const size_t n = j.size();
  Mat M(n, n);
  for (size_t i = 0; i < n; ++i) {
    if (!j[i].is_array() || j[i].size() != n) throw InputError("matrix must be square");
    for (size_t k = 0; k < n; ++k) {
      if (!j[i][k].is_number()) throw InputError("matrix entries must be numbers");
      M(i, k) = j[i][k].get<double>();
    }
  }
  return M;
}

// ---------------------------------------------------------------- paths

inline json atom_json(const Atom& a) {
  return std::visit(
      [](const auto& at) -> json {
        using T = std::decay_t<decltype(at)>;
        if constexpr (std::is_same_v<T, RotationAtom>) {
          json j = {{"kind", "rotation"}, {"angle", at.angle}};
          if (at.turns) j["turns"] = to_json_value(*at.turns);
          return j;
        } else if constexpr (std::is_same_v<T, HyperbolicAtom>) {
          return {{"kind", "hyperbolic"}, {"rate", at.rate}};
        } else if constexpr (std::is_same_v<T, ShearAtom>) {
          return {{"kind", "shear"}, {"a", at.a}};
        } else {
          return {{"kind", "generic"}, {"target", matrix_json(at.target)}};
        }
      },
      a);
}

inline Atom parse_atom(const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) throw InputError("atom needs a \"kind\"");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "rotation") {
    if (j.contains("turns")) return rotation_atom_turns(parse_surd(j.at("turns")));
    return rotation_atom(parse_number(j, "angle"));
  }
  if (kind == "hyperbolic") return HyperbolicAtom{parse_number(j, "rate")};
  if (kind == "shear") return ShearAtom{parse_number(j, "a")};
  if (kind == "generic") {
    if (!j.contains("target")) throw InputError("generic atom needs a \"target\" matrix");
    return GenericAtom(parse_matrix(j.at("target")));
  }
  throw InputError("unknown atom kind '" + kind + "'");
}

inline json path_json(const SymplecticPath& p) {
  json j = {{"dim", p.dim()}};
  bool sampled = p.size() == 1 && std::holds_alternative<SampledSegment>(p.segments()[0]);
  if (sampled) {
    const auto& s = std::get<SampledSegment>(p.segments()[0]);
    json samples = json::array();
    for (size_t i = 0; i < s.t.size(); ++i) samples.push_back({{"t", s.t[i]}, {"matrix", matrix_json(s.m[i])}});
    j["samples"] = samples;
    return j;
  }
  json segs = json::array();
  for (const auto& seg : p.segments()) {
    const auto* as = std::get_if<AtomSegment>(&seg);
    if (!as) throw InputError("sampled segments inside a multi-segment path have no JSON form");
    json atoms = json::array();
    for (const auto& a : as->atoms) atoms.push_back(atom_json(a));
    segs.push_back({{"atoms", atoms}});
  }
  j["segments"] = segs;
  return j;
}

inline SymplecticPath parse_path(const json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.at("dim").is_number_integer())
    throw InputError("path needs an integer \"dim\"");
  const int dim = j.at("dim").get<int>();
  if (j.contains("samples")) {
    std::vector<double> t;
    std::vector<Mat> m;
    for (const auto& s : j.at("samples")) {
      t.push_back(parse_number(s, "t"));
      if (!s.contains("matrix")) throw InputError("sample needs a \"matrix\"");
      m.push_back(parse_matrix(s.at("matrix")));
      if (m.back().rows() != dim) throw InputError("sample matrix dimension differs from \"dim\"");
    }
    return SymplecticPath(dim, {Segment(SampledSegment(std::move(t), std::move(m)))});
  }
  if (!j.contains("segments") || !j.at("segments").is_array()) throw InputError("path needs \"segments\" or \"samples\"");
  std::vector<Segment> segs;
  for (const auto& s : j.at("segments")) {
    if (!s.contains("atoms") || !s.at("atoms").is_array()) throw InputError("segment needs an \"atoms\" array");
    AtomSegment as;
    for (const auto& a : s.at("atoms")) as.atoms.push_back(parse_atom(a));
    if (as.dim() != dim) throw InputError("segment dimension " + std::to_string(as.dim()) + " differs from \"dim\"");
    segs.emplace_back(std::move(as));
  }
  return SymplecticPath(dim, std::move(segs));
}

// ---------------------------------------------------------------- systems

inline OrbitSystem parse_system(const json& j, std::int64_t q_max = kDefaultQmax) {
  if (!j.is_object()) throw InputError("orbit system must be a JSON object");
  if (j.contains("ellipsoid")) {
    const json& e = j.at("ellipsoid");
    if (!e.contains("r") || !e.at("r").is_array()) throw InputError("ellipsoid needs an \"r\" array");
    bool exact = true;
    for (const auto& x : e.at("r")) exact = exact && x.is_object();
    if (exact) {
      std::vector<QuadSurd> r;
      for (const auto& x : e.at("r")) r.push_back(parse_surd(x));
      return ellipsoid_system(r);
    }
    std::vector<double> r;
    for (const auto& x : e.at("r")) {
      if (!x.is_number()) throw InputError("ellipsoid radii must be all numbers or all exact objects");
      r.push_back(x.get<double>());
    }
    return ellipsoid_system(r, q_max);
  }
  if (!j.contains("n") || !j.at("n").is_number_integer()) throw InputError("orbit system needs an integer \"n\"");
  if (!j.contains("orbits") || !j.at("orbits").is_array()) throw InputError("orbit system needs an \"orbits\" array");
  std::vector<PrimeOrbitSpec> orbits;
  for (const auto& o : j.at("orbits")) {
    std::string label = o.contains("label") && o.at("label").is_string() ? o.at("label").get<std::string>()
                                                                         : "x" + std::to_string(orbits.size() + 1);
    if (!o.contains("path")) throw InputError("orbit '" + label + "' needs a \"path\"");
    orbits.emplace_back(label, parse_number(o, "action"), parse_path(o.at("path")));
  }
  return make_system(j.at("n").get<int>(), std::move(orbits));
}

inline json system_json(const OrbitSystem& s) {
  json orbits = json::array();
  for (const auto& o : s.orbits) orbits.push_back({{"label", o.label()}, {"action", o.action()}, {"path", path_json(o.path())}});
  return {{"n", s.n}, {"orbits", orbits}};
}

// ---------------------------------------------------------------- reports

inline json table_json(const SplittingTable& t) {
  json rows = json::array();
  for (const auto& e : t.entries) {
    json r = turns_json(e.angle);
    r["s_plus"] = e.s_plus;
    r["s_minus"] = e.s_minus;
    r["nullity"] = e.nullity;
    rows.push_back(r);
  }
  return rows;
}

inline json report_json(const IndexReport& r) {
  json blocks = json::array();
  for (const auto& b : r.endpoint.blocks) blocks.push_back(block_name(b));
  return {{"dim", r.dim},
          {"mean", r.mean},
          {"mu_minus", r.lower},
          {"mu_plus", r.upper},
          {"nullity", r.nullity},
          {"splitting_at_one", {r.splitting_at_one.first, r.splitting_at_one.second}},
          {"C", r.C},
          {"dyn_convex", r.dyn_convex},
          {"identity_residual", r.identity_residual},
          {"blocks", blocks},
          {"hyperbolic_dim", static_cast<int>(r.endpoint.rest.rows())},
          {"table", table_json(r.table)}};
}

inline json event_json(const CijtEvent& e) {
  json orbits = json::array();
  for (const auto& o : e.checks.orbits)
    orbits.push_back({{"deviation", o.deviation},
                      {"IR1", o.ir1},
                      {"IR2", o.ir2},
                      {"IR3", o.ir3},
                      {"bounds", e.checks.bounds_applicable ? json(o.bounds) : json("not applicable")},
                      {"failure", o.failure}});
  return {{"d", e.d},
          {"k", e.k},
          {"eta", e.eta},
          {"N", e.N},
          {"checks",
           {{"divisibility", e.checks.divisibility},
            {"bounds_applicable", e.checks.bounds_applicable},
            {"ok", e.checks.ok()},
            {"failure", e.checks.failure},
            {"orbits", orbits}}}};
}

inline json degree_table_json(const OrbitSystem& s, const DegreeTable& t) {
  json rows = json::array();
  for (const auto& e : t.entries)
    rows.push_back({{"degree", e.degree}, {"orbit", s.orbits[e.orbit].label()}, {"k", e.k}, {"action", e.action}});
  return {{"cutoff", t.cutoff},
          {"entries", rows},
          {"bijective", t.bijective},
          {"action_monotone", t.action_monotone},
          {"checked", t.checked},
          {"failure", t.failure},
          {"notices", t.notices}};
}

inline json certificate_json(const Certificate& c) {
  json terms = json::array();
  for (const auto& t : c.step3.terms) {
    json r = turns_json(t.angle);
    r["jump"] = t.jump;
    r["weight"] = t.weight;
    r["contribution"] = t.contribution;
    terms.push_back(r);
  }
  json angles = json::array();
  for (size_t i = 0; i < c.step4.turns.size(); ++i) {
    json a = turns_json(c.step4.turns[i]);
    a["witness"] = c.step4.witnesses.size() > i ? c.step4.witnesses[i] : "";
    angles.push_back(a);
  }
  auto opt = [](const std::optional<long>& x) { return x ? json(*x) : json(nullptr); };
  return {{"label", c.label},
          {"role", c.role},
          {"verdict", verdict_name(c.verdict)},
          {"failed_step", c.failed_step},
          {"reason", c.reason},
          {"events", {{"d", {c.d1, c.d2}}, {"k1", c.k1}, {"k2", c.k2}}},
          {"step1",
           {{"pass", c.step1.pass},
            {"eta_below_half", c.step1.eta_below_half},
            {"rule_applied", c.step1.rule_applied},
            {"k_bottom", c.step1.k_bottom},
            {"k_top", c.step1.k_top},
            {"mu_plus_bottom", c.step1.mu_plus_bottom},
            {"mu_plus_top", c.step1.mu_plus_top},
            {"deg_bottom", opt(c.step1.deg_bottom)},
            {"deg_top", opt(c.step1.deg_top)},
            {"forced_bottom", c.step1.forced_bottom},
            {"forced_top", c.step1.forced_top},
            {"slots_match", c.step1.slots_match},
            {"note", c.step1.note}}},
          {"step2",
           {{"pass", c.step2.pass},
            {"nullity", c.step2.nullity},
            {"mu_minus", c.step2.mu_minus},
            {"mu_plus", c.step2.mu_plus},
            {"p", c.step2.p},
            {"scan_clean", c.step2.scan_clean},
            {"roots", c.step2.roots}}},
          {"step3",
           {{"pass", c.step3.pass}, {"k", c.step3.k}, {"value", c.step3.value}, {"target", c.step3.target}, {"terms", terms}}},
          {"step4",
           {{"pass", c.step4.pass},
            {"angles", angles},
            {"claim1", c.step4.claim1},
            {"jumps_one", c.step4.jumps_one},
            {"residual", c.step4.residual},
            {"failure", c.step4.failure}}}};
}

// ---------------------------------------------------------------- schema checks

// Required keys per report kind; used to check that emitted reports re-parse.
inline void validate_report(const json& j, const std::string& kind) {
  auto need = [&](const json& o, std::initializer_list<const char*> keys, const std::string& where) {
    if (!o.is_object()) throw InputError(where + " is not an object");
    for (const char* k : keys)
      if (!o.contains(k)) throw InputError(where + " lacks key \"" + k + "\"");
  };
  need(j, {"command", "config", "status"}, kind + " report");
  if (kind == "index" || kind == "iterate") {
    need(j.at("report"), {"dim", "mean", "mu_minus", "mu_plus", "nullity", "splitting_at_one", "C", "table"}, "index report");
  } else if (kind == "split") {
    need(j, {"omega", "s_plus", "s_minus"}, "split report");
  } else if (kind == "cijt") {
    need(j, {"N", "p", "s", "events"}, "cijt report");
    for (const auto& e : j.at("events")) need(e, {"d", "k", "eta", "N", "checks"}, "event");
  } else if (kind == "ellipsoid" || kind == "degrees") {
    need(j, {"degrees", "ratio"}, kind + " report");
    need(j.at("degrees"), {"cutoff", "entries", "bijective"}, "degree table");
  } else if (kind == "certify") {
    need(j, {"certificates"}, "certify report");
    for (const auto& c : j.at("certificates")) need(c, {"label", "verdict", "step1", "step2", "step3", "step4"}, "certificate");
  } else {
    throw InputError("unknown report kind '" + kind + "'");
  }
}

}  // namespace maslov
