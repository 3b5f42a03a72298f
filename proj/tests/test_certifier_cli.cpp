// Certifier, JSON reports and the command-line front end.

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "maslov/cli.hpp"
#include "support/mutations.hpp"
#include "support/random_paths.hpp"

using namespace maslov;
namespace mt = maslov::testing;
namespace fs = std::filesystem;

namespace {

const std::vector<Certificate>& e2_certs() {
  static const std::vector<Certificate> c = certify_system(e2_fixture());
  return c;
}

QuadSurd half_sqrt2() { return sqrt2() * QuadSurd(Rational(1, 2)); }

// first k >= 1 at which ceil((k+1)x) - ceil(kx) == jump
long first_k_with_jump(const Turns& x, long jump) {
  for (long k = 1;; ++k)
    if (ceil_times(x, k + 1) - ceil_times(x, k) == jump) return k;
}

struct CliResult {
  int code;
  std::string out, err;
};

CliResult run(std::vector<std::string> args) {
  args.insert(args.begin(), "maslov");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string write_temp(const std::string& name, const std::string& body) {
  fs::path p = fs::temp_directory_path() / ("maslov_test_" + name);
  std::ofstream(p) << body;
  return p.string();
}

const char* kE2 = R"({"ellipsoid":{"r":[{"a":1},{"a":0,"b":1,"radicand":2}]}})";

}  // namespace

// ------------------------------------------------------------------ step 3 and step 4 pieces

TEST(Step3, PureRotationsReachTarget) {
  // both below 1/2, so each block carries weight S- - S+ = 1 at its own angle
  Turns x(QuadSurd(Rational(-1, 2), Rational(1, 2), 2));
  Turns y(QuadSurd(Rational(0), Rational(1, 10), 5));
  NormalFormDecomposition d;
  d.blocks = {RBlock{x}, RBlock{y}};
  for (long k = 1; k < 400; ++k) {
    bool ones = ceil_times(x, k + 1) - ceil_times(x, k) == 1 && ceil_times(y, k + 1) - ceil_times(y, k) == 1;
    auto r = step3_sum(d, k);
    EXPECT_EQ(r.target, 2);
    EXPECT_EQ(r.pass, ones) << k;
    if (ones) EXPECT_EQ(r.value, 2) << k;
  }
}

TEST(Step3, HyperbolicBlockContributesNothing) {
  Turns x(QuadSurd(Rational(-1, 2), Rational(1, 2), 2));
  NormalFormDecomposition d;
  d.blocks = {RBlock{x}};
  d.rest = make_normal_form(DBlock{2.0});
  long k = first_k_with_jump(x, 1);
  auto r = step3_sum(d, k);
  EXPECT_EQ(r.value, 1);
  EXPECT_EQ(r.target, 2);
  EXPECT_FALSE(r.pass);
}

TEST(Step3, TrivialN2ContributesNothing) {
  NormalFormDecomposition d;
  d.blocks = {canonical_n2(Turns(half_sqrt2()), true)};
  auto r = step3_sum(d, 5);
  EXPECT_EQ(r.value, 0);
  EXPECT_FALSE(r.pass);
}

TEST(Step4, RotationDecomposition) {
  const double a = 0.2, b = 0.7;
  auto rd = rotation_decomposition(diamond(rotation2(kTwoPi * a), rotation2(kTwoPi * b)));
  ASSERT_TRUE(rd.ok) << rd.failure;
  std::multiset<double> got;
  for (const auto& t : rd.turns) got.insert(std::round(t.value * 1e8) / 1e8);
  EXPECT_EQ(got, (std::multiset<double>{a, b}));

  mt::Rng g(31);
  for (int i = 0; i < 25; ++i) {
    double x = mt::uniform(g, 0.02, 0.98), y = mt::uniform(g, 0.02, 0.98);
    Mat Q = mt::random_conjugator(g, 4, 0.6);
    Mat M = Q * diamond(rotation2(kTwoPi * x), rotation2(kTwoPi * y)) * symplectic_inverse(Q);
    auto r = rotation_decomposition(M);
    ASSERT_TRUE(r.ok) << r.failure;
    std::vector<double> want = {x, y}, have = {r.turns[0].value, r.turns[1].value};
    std::sort(want.begin(), want.end());
    std::sort(have.begin(), have.end());
    EXPECT_NEAR(have[0], want[0], 1e-8);
    EXPECT_NEAR(have[1], want[1], 1e-8);
    EXPECT_LT((symplectic_inverse(r.Q) * M * r.Q - standard_rotation_sum(r.turns)).norm(), 1e-7);
  }

  EXPECT_FALSE(rotation_decomposition(make_normal_form(canonical_n2(Turns(0.3), false))).ok);
  EXPECT_FALSE(rotation_decomposition(make_normal_form(DBlock{2.0})).ok);
}

// ------------------------------------------------------------------ certify_system

TEST(Certifier, E2BothOrbitsIrrationallyElliptic) {
  const auto& certs = e2_certs();
  ASSERT_EQ(certs.size(), 2u);
  std::vector<double> want = {kTwoPi / std::sqrt(2.0), std::fmod(kTwoPi * std::sqrt(2.0), kTwoPi)};
  for (const auto& c : certs) {
    EXPECT_EQ(c.verdict, Verdict::irrationally_elliptic) << c.label << ": " << c.reason;
    ASSERT_EQ(c.step4.angles.size(), 1u);
    EXPECT_NEAR(c.step4.angles[0], want[c.orbit], 1e-9);
    EXPECT_TRUE(c.step1.pass);
    EXPECT_TRUE(c.step2.pass);
    EXPECT_TRUE(c.step3.pass);
    EXPECT_TRUE(c.step4.claim1);
  }
  EXPECT_NE(certs[0].role, certs[1].role);
}

TEST(Certifier, CertificatesReverify) {
  auto sys = e2_fixture();
  for (const auto& c : e2_certs()) EXPECT_TRUE(verify_certificate(sys, c));
}

TEST(Certifier, E3ExtremalOrbits) {
  auto certs = certify_system(e3_fixture());
  int certified = 0;
  for (const auto& c : certs) {
    if (c.verdict != Verdict::irrationally_elliptic) continue;
    ++certified;
    EXPECT_EQ(c.step4.angles.size(), 2u);
    for (const auto& w : c.step4.witnesses) EXPECT_FALSE(w.empty());
  }
  EXPECT_GE(certified, 2);
}

TEST(Certifier, PreconditionsGateCertification) {
  OrbitSystem one = make_system(2, {e2_fixture().orbits[0]});
  for (const auto& c : certify_system(one)) {
    EXPECT_EQ(c.verdict, Verdict::inconclusive);
    EXPECT_FALSE(c.reason.empty());
  }
  for (const auto& c : certify_system(e2_fixture(), 0.125, 100)) EXPECT_EQ(c.verdict, Verdict::inconclusive);
}

TEST(Certifier, RepresentativeMutationsRejected) {
  auto suite = mt::mutation_suite();
  ASSERT_EQ(suite.size(), 20u);
  for (size_t idx : {size_t(0), size_t(4), size_t(10), size_t(16)}) {
    const auto& m = suite[idx];
    auto certs = certify_system(m.sys);
    bool seen = false;
    for (const auto& c : certs) {
      if (c.orbit != m.orbit) continue;
      seen = true;
      EXPECT_EQ(c.verdict, Verdict::rejected) << m.name << ": " << c.reason;
      EXPECT_EQ(c.failed_step, m.expected_step) << m.name;
    }
    EXPECT_TRUE(seen) << m.name;
  }
}

// ------------------------------------------------------------------ JSON

TEST(Json, CanonicalDump) {
  json j = {{"b", 1.0}, {"a", 0.1}, {"c", {{"z", 2}, {"y", 1.5}}}};
  EXPECT_EQ(canonical_dump(j), R"({"a":0.10000000000000001,"b":1.0,"c":{"y":1.5,"z":2}})");
}

TEST(Json, ExactScalars) {
  QuadSurd q(Rational(1, 2), Rational(-3, 7), 5);
  EXPECT_EQ(parse_surd(to_json_value(q)).str(), q.str());
  EXPECT_EQ(parse_rational(to_json_value(Rational(-4, 6))).str(), Rational(-2, 3).str());
  EXPECT_THROW(parse_rational(json("1/0")), InputError);
}

TEST(Json, PathRoundTripPreservesIndices) {
  mt::Rng g(77);
  for (int i = 0; i < 30; ++i) {
    auto p = mt::random_path(g, mt::pick(g, 1, 3));
    auto q = parse_path(json::parse(canonical_dump(path_json(p))));
    auto a = index_report(p), b = index_report(q);
    EXPECT_EQ(a.lower, b.lower);
    EXPECT_EQ(a.nullity, b.nullity);
    EXPECT_LT((p.endpoint() - q.endpoint()).norm(), 1e-12 * std::max(1.0, p.endpoint().norm()));
  }
}

TEST(Json, SystemRoundTrip) {
  auto sys = parse_system(json::parse(kE2));
  ASSERT_TRUE(sys.ellipsoid_r.has_value());
  auto again = parse_system(json::parse(canonical_dump(system_json(sys))));
  ASSERT_EQ(again.orbits.size(), 2u);
  for (size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(again.orbits[i].base().lower, sys.orbits[i].base().lower);
    EXPECT_DOUBLE_EQ(again.orbits[i].action(), sys.orbits[i].action());
  }
  EXPECT_THROW(parse_system(json::parse(R"({"n":2})")), InputError);
  EXPECT_THROW(parse_path(json::parse(R"({"dim":2,"segments":[{"atoms":[{"kind":"warp"}]}]})")), InputError);
}

// ------------------------------------------------------------------ CLI

TEST(Cli, EllipsoidDegrees) {
  auto r = run({"ellipsoid", "--r", "1,1.4142135623730951", "--cutoff", "101"});
  ASSERT_EQ(r.code, 0) << r.err;
  json j = json::parse(r.out);
  validate_report(j, "ellipsoid");
  std::vector<long> got;
  for (const auto& e : j["degrees"]["entries"]) got.push_back(e["degree"].get<long>());
  std::vector<long> want;
  for (long d = 3; d <= 101; d += 2) want.push_back(d);
  EXPECT_EQ(got, want);
  EXPECT_EQ(j["config"]["cutoff"], 101);
  EXPECT_EQ(j["config"]["eta"], 0.125);
  EXPECT_EQ(j["config"]["d_max"], 10000);
  EXPECT_EQ(j["config"]["q_max"], 1000000);
}

TEST(Cli, CertifyFixture) {
  auto path = write_temp("e2.json", kE2);
  auto r = run({"certify", path});
  ASSERT_EQ(r.code, 0) << r.err;
  json j = json::parse(r.out);
  validate_report(j, "certify");
  ASSERT_EQ(j["certificates"].size(), 2u);
  for (const auto& c : j["certificates"]) EXPECT_EQ(c["verdict"], "irrationally_elliptic");
}

TEST(Cli, CertifyRejectionExitsOne) {
  auto suite = mt::mutation_suite();
  auto path = write_temp("mut.json", canonical_dump(system_json(suite[4].sys)));
  auto r = run({"certify", path});
  EXPECT_EQ(r.code, 1) << r.err;
  json j = json::parse(r.out);
  EXPECT_EQ(j["status"], "failed");
}

TEST(Cli, CijtEmptyBudget) {
  auto path = write_temp("e2c.json", kE2);
  auto r = run({"cijt", path, "--eta", "1e-9", "--dmax", "100"});
  ASSERT_EQ(r.code, 0) << r.err;
  json j = json::parse(r.out);
  validate_report(j, "cijt");
  EXPECT_TRUE(j["events"].empty());
  EXPECT_EQ(j["message"], "no events under budget");
  auto t = run({"cijt", path, "--eta", "1e-9", "--dmax", "100", "--format", "text"});
  EXPECT_NE(t.out.find("no events under budget"), std::string::npos);
}

TEST(Cli, CijtFindsEvents) {
  auto path = write_temp("e2d.json", kE2);
  auto r = run({"cijt", path, "--dmax", "700"});
  ASSERT_EQ(r.code, 0) << r.err;
  json j = json::parse(r.out);
  validate_report(j, "cijt");
  bool found = false;
  for (const auto& e : j["events"]) found = found || (e["d"] == 280 && e["k"] == json::array({82, 58}));
  EXPECT_TRUE(found);
}

TEST(Cli, IndexIterateSplit) {
  json path = {{"dim", 2}, {"segments", json::array({{{"atoms", json::array({{{"kind", "rotation"}, {"angle", 4.4}}})}}})}};
  auto file = write_temp("rot.json", path.dump());
  auto r = run({"index", file});
  ASSERT_EQ(r.code, 0) << r.err;
  json j = json::parse(r.out);
  validate_report(j, "index");
  EXPECT_EQ(j["report"]["mu_minus"], 1);

  auto it = run({"iterate", file, "--k", "3"});
  ASSERT_EQ(it.code, 0) << it.err;
  json ji = json::parse(it.out);
  validate_report(ji, "iterate");
  EXPECT_EQ(ji["formula"]["mu_minus"], ji["report"]["mu_minus"]);

  auto sp = run({"split", file, "--omega", "4.4"});
  ASSERT_EQ(sp.code, 0) << sp.err;
  json js = json::parse(sp.out);
  validate_report(js, "split");
  EXPECT_EQ(js["s_plus"], js["oracle"]["s_plus"]);
  EXPECT_EQ(js["s_minus"], js["oracle"]["s_minus"]);
}

TEST(Cli, DegreesOnSystemFile) {
  auto path = write_temp("e2e.json", kE2);
  auto r = run({"degrees", path, "--cutoff", "51"});
  ASSERT_EQ(r.code, 0) << r.err;
  validate_report(json::parse(r.out), "degrees");
}

TEST(Cli, InputErrorsExitTwo) {
  EXPECT_EQ(run({"index", "/nonexistent/file.json"}).code, 2);
  EXPECT_EQ(run({"index", write_temp("bad.json", "{not json")}).code, 2);
  EXPECT_EQ(run({"index", write_temp("dim.json", R"({"dim":4,"segments":[{"atoms":[{"kind":"shear","a":1}]}]})")}).code, 2);
  EXPECT_EQ(run({"ellipsoid", "--r", "1,1.5"}).code, 2);
  EXPECT_EQ(run({"ellipsoid", "--r", "1,abc"}).code, 2);
  EXPECT_EQ(run({"iterate", write_temp("k.json", R"({"dim":2,"segments":[{"atoms":[{"kind":"shear","a":1}]}]})"), "--k", "0"}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  auto bad = run({"degrees", write_temp("n.json", R"({"n":3,"orbits":[{"action":1,"path":{"dim":2,"segments":[{"atoms":[{"kind":"rotation","angle":1}]}]}}]})"), "--cutoff", "9"});
  EXPECT_EQ(bad.code, 2);
  EXPECT_FALSE(bad.err.empty());
}

TEST(Cli, Deterministic) {
  auto path = write_temp("e2f.json", kE2);
  auto a = run({"cijt", path, "--dmax", "1000"});
  auto b = run({"cijt", path, "--dmax", "1000", "--threads", "2"});
  auto c = run({"cijt", path, "--dmax", "1000"});
  EXPECT_EQ(a.out, c.out);
  json ja = json::parse(a.out), jb = json::parse(b.out);
  EXPECT_EQ(ja["events"], jb["events"]);
  auto d1 = run({"certify", path}), d2 = run({"certify", path});
  EXPECT_EQ(d1.out, d2.out);
}

#ifdef MASLOV_CLI_PATH
TEST(Cli, BinaryExitCodes) {
  auto status = [](const std::string& args) {
    std::string cmd = std::string(MASLOV_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    int s = std::system(cmd.c_str());
    return WEXITSTATUS(s);
  };
  EXPECT_EQ(status("ellipsoid --r 1,1.4142135623730951 --cutoff 21"), 0);
  EXPECT_EQ(status("ellipsoid --r 1,2"), 2);
  EXPECT_EQ(status("index /nonexistent.json"), 2);
  std::string e2 = write_temp("e2bin.json", kE2);
  EXPECT_EQ(status("certify " + e2 + " --format text"), 0);
}
#endif
