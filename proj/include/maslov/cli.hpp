#pragma once

// Command-line front end.  Exit codes: 0 success, 1 the mathematics says no
// (a verification or certification failed; the report is still written),
// 2 bad input.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json_io.hpp"
#include "splitting_oracle.hpp"

namespace maslov {

struct RunConfig {
  std::string command;
  std::string input;
  double eta = 0.125;
  long d_max = 10000;
  std::int64_t q_max = kDefaultQmax;
  int cutoff = 101;
  std::string format = "json";
  int threads = 1;
  long k = 1;
  double omega = 0.0;
  std::string radii;

  json to_json() const {
    return {{"command", command}, {"input", input}, {"eta", eta},       {"d_max", d_max},
            {"q_max", q_max},     {"cutoff", cutoff}, {"format", format}, {"threads", threads},
            {"k", k},             {"omega", omega},   {"r", radii}};
  }
};

namespace detail {

inline json read_document(const std::string& path) {
  std::stringstream buf;
  if (path == "-") {
    buf << std::cin.rdbuf();
  } else {
    std::ifstream f(path);
    if (!f) throw InputError("cannot open '" + path + "'");
    buf << f.rdbuf();
  }
  try {
    return json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw InputError(std::string("malformed JSON: ") + e.what());
  }
}

inline std::vector<double> parse_radii(const std::string& s) {
  std::vector<double> r;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      size_t used = 0;
      r.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::logic_error&) {
      throw InputError("malformed radius '" + tok + "'");
    }
  }
  return r;
}

struct Outcome {
  json report;
  bool failed = false;
  std::vector<std::string> text;
};

inline json ratio_json(const RatioCheck& rc) {
  return {{"ratio", rc.ratio}, {"max_deviation", rc.max_deviation}, {"ok", rc.ok}, {"offender", rc.offender}};
}

inline Outcome degrees_outcome(const OrbitSystem& sys, int cutoff) {
  Outcome o;
  DegreeTable t = degree_assignment(sys, cutoff);
  RatioCheck rc = action_ratio_check(sys, std::max(1, static_cast<int>(t.entries.size())));
  o.report["degrees"] = degree_table_json(sys, t);
  o.report["ratio"] = ratio_json(rc);
  o.failed = !t.ok() || !rc.ok;
  std::string degs;
  for (const auto& e : t.entries) degs += (degs.empty() ? "" : ",") + std::to_string(e.degree);
  o.text.push_back("degrees up to " + std::to_string(cutoff) + ": {" + degs + "}");
  o.text.push_back(std::string("bijection ") + (t.bijective ? "holds" : "fails: " + t.failure) +
                   (t.checked ? "" : " (skipped: degenerate iterates)"));
  o.text.push_back("action/mean ratio " + std::to_string(rc.ratio) + (rc.ok ? " (constant)" : " (varies at " + rc.offender + ")"));
  for (const auto& n : t.notices) o.text.push_back("notice: " + n);
  return o;
}

inline Outcome dispatch(const RunConfig& cfg) {
  Outcome o;
  const std::string& c = cfg.command;
  if (c == "index") {
    SymplecticPath p = parse_path(read_document(cfg.input));
    IndexReport r = index_report(p);
    IdentityCheck ic = mean_identity_check(r);
    o.report["report"] = report_json(r);
    o.failed = !ic.pass;
    o.text.push_back("mean index " + std::to_string(r.mean) + ", mu- " + std::to_string(r.lower) + ", mu+ " +
                     std::to_string(r.upper) + ", nullity " + std::to_string(r.nullity));
  } else if (c == "iterate") {
    if (cfg.k < 1) throw InputError("--k must be positive");
    SymplecticPath p = parse_path(read_document(cfg.input));
    IterationProfile prof(index_report(p));
    IndexReport direct = index_report(power_path(p, static_cast<int>(cfg.k)));
    IterationClass ic = classify_iteration(prof.base().endpoint, cfg.k, cfg.q_max);
    const long mm = prof.mu_minus(cfg.k);
    const int nu = prof.nullity(cfg.k);
    o.report["report"] = report_json(direct);
    o.report["formula"] = {{"k", cfg.k}, {"mu_minus", mm}, {"mu_plus", mm + nu}, {"nullity", nu}, {"mean", prof.mean(cfg.k)}};
    o.report["admissible"] = ic.admissible;
    o.report["good"] = ic.good_if_iterate;
    o.report["irrational_within_bound"] = ic.irrational_within_bound;
    o.failed = direct.lower != mm || direct.nullity != nu;
    o.text.push_back("k = " + std::to_string(cfg.k) + ": mu- " + std::to_string(mm) + ", mu+ " + std::to_string(mm + nu) +
                     (o.failed ? " (direct computation disagrees)" : " (matches direct computation)"));
  } else if (c == "split") {
    SymplecticPath p = parse_path(read_document(cfg.input));
    double x = cfg.omega / kTwoPi;
    x -= std::floor(x);
    auto [sp, sm] = splitting_numbers(endpoint_decomposition(p), x);
    auto [op, om] = splitting_oracle(p, x * kTwoPi);
    o.report["omega"] = cfg.omega;
    o.report["s_plus"] = sp;
    o.report["s_minus"] = sm;
    o.report["oracle"] = json::object({{"s_plus", op}, {"s_minus", om}});
    o.failed = sp != op || sm != om;
    o.text.push_back("S+ = " + std::to_string(sp) + ", S- = " + std::to_string(sm) +
                     (o.failed ? " (oracle disagrees)" : " (oracle agrees)"));
  } else if (c == "cijt") {
    OrbitSystem sys = parse_system(read_document(cfg.input), cfg.q_max);
    EventSearch s = find_events(sys, cfg.eta, cfg.d_max, cfg.threads, cfg.q_max);
    json events = json::array();
    for (const auto& e : s.events) events.push_back(event_json(e));
    o.report["N"] = s.n.N;
    o.report["p"] = s.n.p;
    o.report["s"] = s.n.s;
    o.report["irrational_within_bound"] = s.n.irrational_within_bound;
    o.report["events"] = events;
    auto pairs = all_interchange_pairs(s.events);
    o.report["interchange"] = pairs.empty() ? json(nullptr)
                                            : json({{"first", pairs.front().first.d}, {"second", pairs.front().second.d}});
    if (s.events.empty()) {
      o.report["message"] = "no events under budget";
      o.text.push_back("no events under budget");
    } else {
      o.text.push_back(std::to_string(s.events.size()) + " events, N = " + std::to_string(s.n.N));
      for (size_t i = 0; i < std::min<size_t>(s.events.size(), 10); ++i) {
        std::string ks;
        for (long k : s.events[i].k) ks += (ks.empty() ? "" : ",") + std::to_string(k);
        o.text.push_back("  d = " + std::to_string(s.events[i].d) + ", k = (" + ks + ")");
      }
    }
  } else if (c == "ellipsoid") {
    OrbitSystem sys = ellipsoid_system(parse_radii(cfg.radii), cfg.q_max);
    o = degrees_outcome(sys, cfg.cutoff);
  } else if (c == "degrees") {
    OrbitSystem sys = parse_system(read_document(cfg.input), cfg.q_max);
    o = degrees_outcome(sys, cfg.cutoff);
  } else if (c == "certify") {
    OrbitSystem sys = parse_system(read_document(cfg.input), cfg.q_max);
    auto certs = certify_system(sys, cfg.eta, cfg.d_max, cfg.q_max, cfg.threads);
    json arr = json::array();
    int certified = 0, rejected = 0;
    for (const auto& ct : certs) {
      arr.push_back(certificate_json(ct));
      certified += ct.verdict == Verdict::irrationally_elliptic;
      rejected += ct.verdict == Verdict::rejected;
      std::string line = ct.label + ": " + verdict_name(ct.verdict);
      if (ct.verdict == Verdict::irrationally_elliptic) {
        line += ", angles";
        for (double a : ct.step4.angles) line += " " + std::to_string(a);
      } else {
        line += (ct.failed_step ? " at step " + std::to_string(ct.failed_step) : std::string()) + " (" + ct.reason + ")";
      }
      o.text.push_back(line);
    }
    o.report["certificates"] = arr;
    o.report["certified"] = certified;
    o.failed = certified == 0 || rejected > 0;
  } else {
    throw InputError("unknown command '" + c + "'");
  }
  return o;
}

}  // namespace detail

inline int run_cli(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Maslov-type index iteration, common index jumps and ellipticity certificates"};
  app.require_subcommand(1);
  RunConfig cfg;
  app.add_option("--format", cfg.format, "output format")->check(CLI::IsMember({"json", "text"}));
  app.add_option("--qmax", cfg.q_max, "denominator bound for root-of-unity detection")->check(CLI::PositiveNumber);
  app.add_option("--threads", cfg.threads, "worker threads for event search")->check(CLI::PositiveNumber);

  auto* idx = app.add_subcommand("index", "index report of a path");
  idx->add_option("path", cfg.input, "path JSON ('-' for stdin)")->required();
  auto* it = app.add_subcommand("iterate", "indices of the k-th iterate");
  it->add_option("path", cfg.input)->required();
  it->add_option("--k", cfg.k, "iteration count")->required();
  auto* sp = app.add_subcommand("split", "splitting numbers at exp(i omega)");
  sp->add_option("path", cfg.input)->required();
  sp->add_option("--omega", cfg.omega, "angle in radians")->required();
  auto* cj = app.add_subcommand("cijt", "common index jump events");
  cj->add_option("system", cfg.input)->required();
  cj->add_option("--eta", cfg.eta)->check(CLI::PositiveNumber);
  cj->add_option("--dmax", cfg.d_max)->check(CLI::PositiveNumber);
  auto* el = app.add_subcommand("ellipsoid", "degree table of an ellipsoid");
  el->add_option("--r", cfg.radii, "comma-separated radii")->required();
  el->add_option("--cutoff", cfg.cutoff);
  auto* dg = app.add_subcommand("degrees", "degree table of an orbit system");
  dg->add_option("system", cfg.input)->required();
  dg->add_option("--cutoff", cfg.cutoff)->required();
  auto* ce = app.add_subcommand("certify", "irrational-ellipticity certificates");
  ce->add_option("system", cfg.input)->required();
  ce->add_option("--eta", cfg.eta)->check(CLI::PositiveNumber);
  ce->add_option("--dmax", cfg.d_max)->check(CLI::PositiveNumber);
  for (auto* s : {idx, it, sp, cj, el, dg, ce}) {
    s->add_option("--format", cfg.format)->check(CLI::IsMember({"json", "text"}));
    s->add_option("--qmax", cfg.q_max)->check(CLI::PositiveNumber);
    s->add_option("--threads", cfg.threads)->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  cfg.command = app.get_subcommands().front()->get_name();

  detail::Outcome o;
  try {
    o = detail::dispatch(cfg);
  } catch (const ConsistencyError& e) {
    err << "consistency failure: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  o.report["command"] = cfg.command;
  o.report["config"] = cfg.to_json();
  o.report["status"] = o.failed ? "failed" : "ok";
  if (cfg.format == "json") {
    out << canonical_dump(o.report) << "\n";
  } else {
    out << cfg.command << " [" << (o.failed ? "failed" : "ok") << "]\n";
    for (const auto& l : o.text) out << l << "\n";
  }
  return o.failed ? 1 : 0;
}

}  // namespace maslov
