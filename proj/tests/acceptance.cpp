// Acceptance run: one PASS/FAIL line per criterion, each with its time budget.
// Exit status is non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

#include "maslov/certifier.hpp"
#include "maslov/splitting_oracle.hpp"
#include "support/mutations.hpp"
#include "support/random_paths.hpp"

using namespace maslov;
namespace mt = maslov::testing;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

// Collects the first few failures so the summary line stays readable.
struct Tally {
  long checks = 0, failures = 0;
  std::ostringstream first;

  void expect(bool cond, const std::string& what) {
    ++checks;
    if (cond) return;
    if (failures++ < 3) first << (failures > 1 ? "; " : "") << what;
  }
  Outcome done(const std::string& extra = "") const {
    Outcome o;
    o.ok = failures == 0;
    o.detail = std::to_string(checks) + " checks";
    if (!extra.empty()) o.detail += ", " + extra;
    if (failures) o.detail += ", " + std::to_string(failures) + " failed: " + first.str();
    return o;
  }
};

long rotation_formula(double lambda) {
  return (lambda > 0 ? 1 : -1) * (2 * static_cast<long>(std::floor(std::abs(lambda))) + 1);
}

// (S+, S-) of a single normal form at exp(2 pi i x), written out per block type
std::pair<int, int> table_row(const NormalBlock& b, double x) {
  auto same = [](double u, double v) { return std::abs(std::remainder(u - v, 1.0)) < 1e-12; };
  if (std::holds_alternative<DBlock>(b)) return {0, 0};
  if (auto* n = std::get_if<N1Block>(&b)) {
    if (!same(x, n->lambda == 1 ? 0.0 : 0.5)) return {0, 0};
    bool split = n->lambda == 1 ? n->a >= 0 : n->a <= 0;
    return split ? std::make_pair(1, 1) : std::make_pair(0, 0);
  }
  if (auto* r = std::get_if<RBlock>(&b)) {
    if (same(x, r->turns.value)) return {0, 1};
    if (same(x, 1.0 - r->turns.value)) return {1, 0};
    return {0, 0};
  }
  const auto& n2 = std::get<N2Block>(b);
  if (!same(x, n2.turns.value) && !same(x, 1.0 - n2.turns.value)) return {0, 0};
  return n2_trivial(n2) ? std::make_pair(0, 0) : std::make_pair(1, 1);
}

std::string pair_str(std::pair<int, int> p) {
  return "(" + std::to_string(p.first) + "," + std::to_string(p.second) + ")";
}

const CijtEvent* find_event(const std::vector<CijtEvent>& ev, long d, const std::vector<long>& k) {
  for (const auto& e : ev)
    if (e.d == d && e.k == k) return &e;
  return nullptr;
}

// One full turn on the first 2-dimensional block, constant elsewhere.
SymplecticPath unit_loop(int dim) {
  std::vector<Atom> atoms{rotation_atom(kTwoPi)};
  if (dim > 2) atoms.emplace_back(GenericAtom(Mat::Identity(dim - 2, dim - 2)));
  return atom_path(atoms);
}

// ------------------------------------------------------------------ criteria

Outcome rotation_indices() {
  mt::Rng g(1);
  Tally t;
  for (int i = 0; i < 200; ++i) {
    double lam = mt::uniform(g, -10.0, 10.0);
    if (std::abs(lam - std::round(lam)) < 1e-6) continue;
    auto r = index_report(rotation_path(kTwoPi * lam));
    t.expect(r.lower == rotation_formula(lam) && r.upper == r.lower,
             "lambda " + std::to_string(lam) + " gave " + std::to_string(r.lower));
  }
  return t.done();
}

Outcome splitting_numbers_table() {
  mt::Rng g(2);
  std::vector<NormalBlock> blocks;
  for (int a : {-1, 0, 1}) {
    blocks.push_back(N1Block{1, a});
    blocks.push_back(N1Block{-1, a});
  }
  for (int i = 0; i < 50; ++i) {
    double x = mt::uniform(g, 0.01, 0.99);
    if (std::abs(x - 0.5) < 1e-3) continue;
    blocks.push_back(RBlock{Turns(x)});
    if (i % 5 == 0) {
      blocks.push_back(canonical_n2(Turns(x), true));
      blocks.push_back(canonical_n2(Turns(x), false));
    }
  }
  blocks.push_back(DBlock{2.5});
  blocks.push_back(DBlock{-0.3});
  Tally t;
  for (const auto& b : blocks) {
    NormalFormDecomposition d;
    d.blocks = {b};
    auto path = generic_path(make_normal_form(b));
    std::vector<double> probes = {0.0, 0.5};
    if (auto* r = std::get_if<RBlock>(&b)) probes = {r->turns.value, 1.0 - r->turns.value, 0.0};
    if (auto* n = std::get_if<N2Block>(&b)) probes = {n->turns.value, 1.0 - n->turns.value, 0.0};
    for (double x : probes) {
      auto sp = splitting_numbers(d, x);
      auto want = table_row(b, x);
      auto orc = splitting_oracle(path, kTwoPi * x);
      t.expect(sp == want, block_name(b) + " table " + pair_str(sp) + " vs " + pair_str(want));
      t.expect(orc == want, block_name(b) + " oracle " + pair_str(orc) + " vs " + pair_str(want));
    }
  }
  return t.done(std::to_string(blocks.size()) + " blocks");
}

Outcome iteration_formula() {
  mt::Rng g(3);
  Tally t;
  for (int i = 0; i < 100; ++i) {
    mt::PathOptions o;
    o.conjugate = i % 2 == 0;
    o.nice = i % 3 == 0;
    auto p = mt::random_path(g, mt::pick(g, 1, 3), o);
    IndexReport r;
    try {
      r = index_report(p);
    } catch (const Error& e) {
      t.expect(false, "path " + std::to_string(i) + ": " + e.what());
      continue;
    }
    for (long k = 1; k <= 50; ++k) {
      try {
        auto d = index_report(power_path(p, static_cast<int>(k)));
        t.expect(iterate_mu_minus(r.lower, r.table, k) == d.lower && iterate_nullity(r.table, k) == d.nullity,
                 "path " + std::to_string(i) + " k=" + std::to_string(k));
      } catch (const Error& e) {
        t.expect(false, "path " + std::to_string(i) + " k=" + std::to_string(k) + ": " + e.what());
      }
    }
  }
  return t.done();
}

Outcome bott_nullity_checks() {
  Tally t;
  for (int q = 1; q <= 12; ++q)
    for (int p = 1; p < q; ++p) {
      if (std::gcd(p, q) != 1) continue;
      auto path = atom_path({rotation_atom_turns(QuadSurd(Rational(p, q)))});
      auto r = index_report(path);
      Mat M = path.endpoint();
      for (long k = 1; k <= 30; ++k) {
        int want = k % q == 0 ? 2 : 0;
        t.expect(iterate_nullity(r.table, k) == want && bott_nullity(M, k) == want && power_nullity(M, k) == want,
                 "R(" + std::to_string(p) + "/" + std::to_string(q) + ") k=" + std::to_string(k));
      }
    }
  for (double a : {1.0, -1.0, 0.5}) {
    auto path = atom_path({ShearAtom{a}});
    auto r = index_report(path);
    for (long k = 1; k <= 30; ++k)
      t.expect(iterate_nullity(r.table, k) == 1 && bott_nullity(path.endpoint(), k) == 1,
               "shear " + std::to_string(a) + " k=" + std::to_string(k));
  }
  for (int a : {-1, 0, 1}) {
    Mat N = make_normal_form(N1Block{-1, a});
    auto r = index_report(generic_path(N));
    for (long k = 1; k <= 30; ++k) {
      int want = k % 2 == 0 ? 1 + (a == 0) : 0;
      t.expect(iterate_nullity(r.table, k) == want && bott_nullity(N, k) == want,
               "N1(-1," + std::to_string(a) + ") k=" + std::to_string(k));
    }
  }
  return t.done();
}

Outcome index_invariants() {
  mt::Rng g(5);
  Tally t;
  for (int i = 0; i < 1000; ++i) {
    const std::string tag = "path " + std::to_string(i);
    mt::PathOptions o;
    o.conjugate = i % 2 == 1;
    auto p = mt::random_path(g, mt::pick(g, 1, 3), o);
    auto r = index_report(p);
    const int m = p.half_dim();
    t.expect(r.upper - r.lower == r.nullity, tag + " mu+ - mu- != nullity");
    t.expect(r.nullity == nullity_omega(p.endpoint(), 1.0), tag + " nullity");
    t.expect(r.mean - m <= r.lower + 1e-9 && r.upper <= r.mean + m + 1e-9, tag + " mean envelope");
    t.expect(mean_identity_check(r).pass, tag + " mean identity");
    if (r.nullity == 0) {
      double det = (Mat::Identity(2 * m, 2 * m) - p.endpoint()).determinant();
      t.expect(((r.lower - m) % 2 == 0) == (det > 0), tag + " parity");
    }

    if (i % 4 == 0) {
      auto loop = unit_loop(p.dim());
      auto shifted = index_report(append_loop(p, loop));
      t.expect(maslov_loop_index(loop) == 1 && shifted.lower == r.lower + 2 && shifted.nullity == r.nullity,
               tag + " loop shift");
    }
    if (i % 4 == 1) {
      auto q = mt::random_path(g, mt::pick(g, 1, 2), o);
      if (q.size() == p.size()) {
        auto s = index_report(q);
        auto both = index_report(diamond_path(p, q));
        t.expect(both.lower == r.lower + s.lower && both.nullity == r.nullity + s.nullity &&
                     std::abs(both.mean - r.mean - s.mean) <= 1e-8 * std::max(1.0, std::abs(both.mean)),
                 tag + " diamond additivity");
      }
    }
    if (i % 4 == 2) {
      const int k = mt::pick(g, 2, 6);
      double mk = mean_index(power_path(p, k));
      t.expect(std::abs(mk - k * r.mean) <= 1e-8 * std::max(1.0, std::abs(mk)), tag + " homogeneity");
    }
  }
  return t.done();
}

Outcome degree_bijections() {
  Tally t;
  auto check = [&](const OrbitSystem& sys, int cutoff, long first) {
    auto tab = degree_assignment(sys, cutoff);
    std::vector<long> got, want;
    for (const auto& e : tab.entries) got.push_back(e.degree);
    for (long d = first; d <= cutoff; d += 2) want.push_back(d);
    t.expect(tab.ok() && got == want, "degrees up to " + std::to_string(cutoff) + ": " + tab.failure);

    double inv = 0.0;
    for (const auto& r : *sys.ellipsoid_r) inv += 1.0 / r.value();
    auto rc = action_ratio_check(sys, 200);
    t.expect(rc.ok && std::abs(rc.ratio - kPi / inv) < 1e-10 && rc.max_deviation < 1e-10,
             "action ratio " + std::to_string(rc.ratio));
  };
  check(e2_fixture(), 101, 3);
  check(e3_fixture(), 100, 4);
  return t.done();
}

Outcome cijt_events() {
  Tally t;
  const auto e2 = e2_fixture();
  auto single = find_events(make_system(2, {e2.orbits[0]}), 0.125, 10000);
  const auto* a = find_event(single.events, 198, {58});
  t.expect(a && a->checks.ok(), "single-orbit event (198, 58)");
  auto full = find_events(e2, 0.125, 10000);
  t.expect(single.n.N == 2 && full.n.N == 2, "N = " + std::to_string(full.n.N));
  const auto* b = find_event(full.events, 280, {82, 58});
  t.expect(b && b->checks.ok(), "event (280, (82, 58))");
  for (const auto* s : {&single, &full})
    for (const auto& e : s->events) t.expect(e.checks.ok(), "event d=" + std::to_string(e.d) + ": " + e.checks.failure);
  return t.done(std::to_string(single.events.size() + full.events.size()) + " events verified");
}

Outcome interchange_events() {
  Tally t;
  const auto e2 = e2_fixture();
  auto s = find_events(e2, 0.125, 10000);
  auto pairs = all_interchange_pairs(s.events);
  bool found = std::any_of(pairs.begin(), pairs.end(),
                           [](const InterchangePair& p) { return p.first.d == 280 && p.second.d == 676; });
  t.expect(found, "(280, 676) not among " + std::to_string(pairs.size()) + " interchange pairs");
  const auto* a = find_event(s.events, 280, {82, 58});
  const auto* b = find_event(s.events, 676, {198, 140});
  t.expect(a && b && interchanged(*a, *b), "events 280 and 676 interchange");
  if (a && b) {
    t.expect(event_degrees(e2, *a) == std::vector<std::optional<long>>{279, 281}, "degrees at 280");
    t.expect(event_degrees(e2, *b) == std::vector<std::optional<long>>{677, 675}, "degrees at 676");
  }
  return t.done(std::to_string(pairs.size()) + " pairs");
}

Outcome certification() {
  Tally t;
  for (const auto& [name, sys] : {std::make_pair("E2", e2_fixture()), std::make_pair("E3", e3_fixture())}) {
    auto certs = certify_system(sys);
    int ok = 0;
    for (const auto& c : certs) {
      if (c.verdict != Verdict::irrationally_elliptic) continue;
      ++ok;
      t.expect(verify_certificate(sys, c), std::string(name) + " " + c.label + " does not re-verify");
    }
    t.expect(ok >= 2, std::string(name) + ": " + std::to_string(ok) + " certificates");
  }
  int rejected = 0;
  for (const auto& m : mt::mutation_suite()) {
    bool hit = false;
    for (const auto& c : certify_system(m.sys)) {
      if (c.orbit != m.orbit) continue;
      hit = c.verdict == Verdict::rejected && c.failed_step == m.expected_step;
      t.expect(hit, m.name + ": " + verdict_name(c.verdict) + " at step " + std::to_string(c.failed_step) + " (" +
                        c.reason + ")");
    }
    rejected += hit;
  }
  return t.done(std::to_string(rejected) + "/20 mutations rejected");
}

Outcome degenerate_oracle() {
  mt::Rng g(10);
  Tally t;
  for (int i = 0; i < 500; ++i) {
    auto p = mt::random_degenerate_path(g, mt::pick(g, 1, 3));
    auto r = index_report(p);
    auto o = perturbation_oracle(p);
    t.expect(o == std::make_pair(r.lower, r.upper),
             "path " + std::to_string(i) + ": oracle " + pair_str(o) + " vs " + pair_str({r.lower, r.upper}));
  }
  const double res = report_stats().max_residual.load();
  t.expect(res < 1e-6, "identity residual " + std::to_string(res));
  char buf[64];
  std::snprintf(buf, sizeof buf, "max identity residual %.2e", res);
  return t.done(buf);
}

struct Criterion {
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"rotation paths match 2 floor|lambda| + 1", 1.0, rotation_indices},
      {"splitting numbers match table and oracle", 5.0, splitting_numbers_table},
      {"iteration formula matches direct index, k <= 50", 10.0, iteration_formula},
      {"Bott nullity of iterates", 5.0, bott_nullity_checks},
      {"index invariants on 1000 random paths", 30.0, index_invariants},
      {"ellipsoid degree bijections and action ratio", 2.0, degree_bijections},
      {"common index jump events verified", 30.0, cijt_events},
      {"interchanged events (280, 676)", 60.0, interchange_events},
      {"certificates and mutation rejections", 120.0, certification},
      {"perturbation oracle on degenerate paths", 60.0, degenerate_oracle},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool in_time = secs <= c.budget_s;
    bool pass = o.ok && in_time;
    failed += !pass;
    std::printf("%s %2zu %-52s %7.2fs / %.0fs  %s%s\n", pass ? "PASS" : "FAIL", i + 1, c.name, secs, c.budget_s,
                o.detail.c_str(), in_time ? "" : " [over budget]");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
