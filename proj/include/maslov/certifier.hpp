#pragma once

// Irrational-ellipticity certification of the extremal orbits at a pair of
// interchanged common index jump events.
//
//   step 1  degree equalities deg = mu+ at both events (eta < 1/2 forcing)
//   step 2  nu = 0 at the bottom event, strong non-degeneracy (N logic + scan)
//   step 3  ceiling-jump sum equals n - 1
//   step 4  explicit conjugacy to a diamond sum of irrational rotations

#include "cijt.hpp"

namespace maslov {

enum class Verdict { irrationally_elliptic, rejected, inconclusive };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::irrationally_elliptic: return "irrationally_elliptic";
    case Verdict::rejected: return "rejected";
    default: return "inconclusive";
  }
}

// ---------------------------------------------------------------- step 3

struct Step3Term {
  Turns angle;  // in (0, 1/2)
  long jump = 0;        // 2 ceil((k+1)x) - 2 ceil(kx) - 1
  int weight = 0;       // S- - S+ at exp(2 pi i x)
  long contribution = 0;
};

struct Step3Record {
  long k = 0;
  long value = 0;
  long target = 0;
  bool pass = false;
  std::vector<Step3Term> terms;
};

inline Step3Record step3_sum(const NormalFormDecomposition& d, long k) {
  if (k < 1) throw InputError("iteration count must be positive");
  Step3Record r;
  r.k = k;
  r.target = d.dim() / 2;
  SplittingTable t = splitting_table(d);
  for (const auto& e : t.entries) {
    if (!(e.angle.value > 1e-9 && e.angle.value < 0.5 - 1e-9)) continue;
    if (rational_turns(e.angle).rational) continue;
    Step3Term term;
    term.angle = e.angle;
    term.jump = 2 * ceil_times(e.angle, k + 1) - 2 * ceil_times(e.angle, k) - 1;
    term.weight = e.s_minus - e.s_plus;
    term.contribution = term.jump * term.weight;
    r.value += term.contribution;
    r.terms.push_back(term);
  }
  r.pass = r.value == r.target;
  return r;
}

// ---------------------------------------------------------------- step 4

struct RotationDecomposition {
  bool ok = false;
  std::string failure;
  std::vector<Turns> turns;  // Krein-resolved, in (0, 1)
  Mat Q;                     // symplectic, Q^{-1} M Q is the standard-layout rotation sum
  double residual = 0.0;
};

// Standard layout (q_1..q_m, p_1..p_m) rotation sum.
inline Mat standard_rotation_sum(const std::vector<Turns>& turns) {
  const int m = static_cast<int>(turns.size());
  Mat T = Mat::Zero(2 * m, 2 * m);
  for (int j = 0; j < m; ++j) {
    const double th = kTwoPi * turns[j].value;
    T(j, j) = std::cos(th);
    T(j, m + j) = -std::sin(th);
    T(m + j, j) = std::sin(th);
    T(m + j, m + j) = std::cos(th);
  }
  return T;
}

inline RotationDecomposition rotation_decomposition(const Mat& M, const std::vector<QuadSurd>& hints = {}) {
  require_symplectic(M);
  RotationDecomposition out;
  const int dim = static_cast<int>(M.rows());
  const int m = dim / 2;
  SpectralData sd;
  try {
    sd = spectral_data(M);
  } catch (const SpectralAmbiguity& e) {
    out.failure = std::string("spectrum ambiguous: ") + e.what();
    return out;
  }
  std::vector<CVec> pos;  // Krein-normalized eigenvectors with h(v,v) = 2
  for (const auto& c : sd.clusters) {
    if (!c.unit) {
      out.failure = "not elliptic: eigenvalue off the unit circle";
      return out;
    }
    if (c.value.imag() == 0.0) {
      out.failure = "eigenvalue +-1 present";
      return out;
    }
    if (c.value.imag() < 0) continue;
    InvariantSubspace inv = invariant_subspace(sd.schur, c.members);
    const CMat& V = inv.V;
    const double scale = std::max(1.0, M.norm());
    CMat Nm = (M.cast<cplx>() * V - c.value * V);
    if (Nm.norm() > 1e-7 * scale) {
      out.failure = "not conjugate to rotations: non-trivial Jordan structure";
      return out;
    }
    CMat H = krein_gram(V, dim);
    H = 0.5 * (H + H.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<CMat> es(H);
    for (Eigen::Index j = 0; j < es.eigenvalues().size(); ++j) {
      const double h = es.eigenvalues()(j);
      if (std::abs(h) < 1e-10) {
        out.failure = "degenerate Krein form";
        return out;
      }
      CVec v = V * es.eigenvectors().col(j);
      v *= std::sqrt(2.0 / std::abs(h));
      double x = angle_turns(c.value);
      if (h < 0) {
        v = v.conjugate().eval();
        x = 1.0 - x;
      }
      pos.push_back(v);
      out.turns.emplace_back(x);
    }
  }
  if (static_cast<int>(pos.size()) != m) {
    out.failure = "eigenvector count mismatch";
    return out;
  }
  out.Q = Mat(dim, dim);
  for (int j = 0; j < m; ++j) {
    out.Q.col(j) = pos[j].real();
    out.Q.col(m + j) = -pos[j].imag();
  }
  for (auto& t : out.turns)
    for (const auto& h : hints) {
      QuadSurd f = h.frac();
      if (std::abs(f.value() - t.value) < 1e-9) t = Turns(f);
      else if (std::abs(1.0 - f.value() - t.value) < 1e-9) t = Turns(QuadSurd(Rational(1)) - f);
    }
  if (symplectic_defect(out.Q) > 1e-8) {
    out.failure = "constructed conjugator is not symplectic";
    return out;
  }
  Mat C = symplectic_inverse(out.Q) * M * out.Q;
  out.residual = (C - standard_rotation_sum(out.turns)).norm() / std::max(1.0, M.norm());
  if (out.residual > 1e-8) {
    out.failure = "conjugacy residual too large";
    return out;
  }
  out.ok = true;
  return out;
}

// ---------------------------------------------------------------- certificates

struct Step1Record {
  bool pass = false;
  bool eta_below_half = false;
  bool rule_applied = false;  // degree taken from the concentration rule (degenerate iterate)
  long k_bottom = 0, k_top = 0;
  long mu_plus_bottom = 0, mu_plus_top = 0;
  std::optional<long> deg_bottom, deg_top;
  long forced_bottom = 0, forced_top = 0;  // d - n + 1 and d' + n - 1
  bool slots_match = false;
  std::string note;
};

struct Step2Record {
  bool pass = false;
  int nullity = 0;
  long mu_minus = 0, mu_plus = 0;
  long p = 1;
  bool scan_clean = false;
  std::vector<std::string> roots;  // roots of unity found by the direct scan
};

struct Step4Record {
  bool pass = false;
  std::vector<Turns> turns;
  std::vector<double> angles;  // radians
  std::vector<std::string> witnesses;
  bool claim1 = false;
  bool jumps_one = false;
  double residual = 0.0;
  std::string failure;
};

struct Certificate {
  std::string label;
  size_t orbit = 0;
  std::string role;  // "bottom-first" or "top-first"
  Verdict verdict = Verdict::inconclusive;
  int failed_step = 0;
  std::string reason;
  long d1 = 0, d2 = 0;
  std::vector<long> k1, k2;
  Step1Record step1;
  Step2Record step2;
  Step3Record step3;
  Step4Record step4;
};

inline std::string irrationality_witness(const Turns& t, std::int64_t q_max) {
  if (t.exact) return "exact " + t.exact->str() + " has a non-zero surd part";
  return "no p/q with q <= " + std::to_string(q_max) + " within 1e-13";
}

namespace detail {

inline Certificate certify_orbit(const OrbitSystem& sys, size_t i, const InterchangePair& pair, bool bottom_first,
                                 double eta, const NData& nd, std::int64_t q_max) {
  const auto& o = sys.orbits[i];
  const auto& pr = o.profile();
  const int n = sys.n;
  Certificate c;
  c.label = o.label();
  c.orbit = i;
  c.role = bottom_first ? "bottom-first" : "top-first";
  c.d1 = pair.first.d;
  c.d2 = pair.second.d;
  c.k1 = pair.first.k;
  c.k2 = pair.second.k;
  const CijtEvent& eb = bottom_first ? pair.first : pair.second;
  const CijtEvent& et = bottom_first ? pair.second : pair.first;
  auto reject = [&](int step, const std::string& why) {
    c.verdict = Verdict::rejected;
    c.failed_step = step;
    c.reason = why;
    return c;
  };

  // step 1
  Step1Record& s1 = c.step1;
  s1.eta_below_half = eta < 0.5;
  s1.k_bottom = eb.k[i];
  s1.k_top = et.k[i];
  s1.mu_plus_bottom = pr.mu_plus(s1.k_bottom);
  s1.mu_plus_top = pr.mu_plus(s1.k_top);
  s1.forced_bottom = eb.d - n + 1;
  s1.forced_top = et.d + n - 1;
  auto deg_of = [&](long k) -> std::optional<long> {
    VisibilityRecord v = euler_visibility(sys, o, k);
    if (v.degenerate) {
      s1.rule_applied = true;
      return v.interval_hi;
    }
    if (!v.good) s1.note = "iterate is bad; degree model uses mu+";
    return v.degree.value_or(v.interval_hi);
  };
  s1.deg_bottom = deg_of(s1.k_bottom);
  s1.deg_top = deg_of(s1.k_top);
  s1.slots_match = s1.deg_bottom == s1.forced_bottom && s1.deg_top == s1.forced_top;
  if (!s1.eta_below_half) {
    c.reason = "hypothesis eta < 1/2 fails";
    return c;
  }
  if (!eb.checks.ok() || !et.checks.ok()) {
    c.reason = "events fail verification";
    return c;
  }
  s1.pass = s1.deg_bottom == s1.mu_plus_bottom && s1.deg_top == s1.mu_plus_top;
  if (!s1.pass) return reject(1, "deg != mu+ at an event");

  // step 2
  Step2Record& s2 = c.step2;
  s2.p = nd.p;
  s2.mu_minus = pr.mu_minus(s1.k_bottom);
  s2.mu_plus = pr.mu_plus(s1.k_bottom);
  s2.nullity = pr.nullity(s1.k_bottom);
  const Mat& M = o.path().endpoint();
  SpectralData sd = spectral_data(M, robust_spectral_options());
  for (const auto& cl : sd.clusters) {
    if (!cl.unit) continue;
    Turns x(angle_turns(cl.value));
    RootTest rt = rational_turns(x, q_max);
    if (rt.rational) s2.roots.push_back(std::to_string(rt.p) + "/" + std::to_string(rt.q));
  }
  // exact angles from the decomposition override numeric ones
  for (const auto& [x, mult] : unit_angles(o.base().endpoint)) {
    RootTest rt = rational_turns(x, q_max);
    if (rt.rational && rt.exact) {
      std::string s = std::to_string(rt.p) + "/" + std::to_string(rt.q);
      if (std::find(s2.roots.begin(), s2.roots.end(), s) == s2.roots.end()) s2.roots.push_back(s);
    }
  }
  s2.scan_clean = s2.roots.empty();
  if (s2.nullity > 0) return reject(2, "nu > 0 at the bottom event: mu- != mu+");
  if (!s2.scan_clean)
    throw ConsistencyError("nu = 0 at an N-divisible iterate but the eigenvalue scan finds a root of unity");
  s2.pass = true;

  // step 3
  c.step3 = step3_sum(o.base().endpoint, s1.k_bottom);
  if (!c.step3.pass)
    return reject(3, "ceiling-jump sum " + std::to_string(c.step3.value) + " != n-1 = " + std::to_string(c.step3.target));

  // step 4
  Step4Record& s4 = c.step4;
  std::vector<QuadSurd> hints;
  for (const auto& [x, mult] : unit_angles(o.base().endpoint))
    if (x.exact) hints.push_back(*x.exact);
  RotationDecomposition rd = rotation_decomposition(M, hints);
  s4.residual = rd.residual;
  if (!rd.ok) {
    s4.failure = rd.failure;
    return reject(4, rd.failure);
  }
  s4.turns = rd.turns;
  bool irrational = true;
  for (const auto& t : rd.turns) {
    s4.angles.push_back(kTwoPi * t.value);
    if (rational_turns(t, q_max).rational) irrational = false;
    s4.witnesses.push_back(irrationality_witness(t, q_max));
  }
  s4.claim1 = true;
  for (size_t a = 0; a < rd.turns.size(); ++a)
    for (size_t b = a + 1; b < rd.turns.size(); ++b)
      if (std::abs(rd.turns[a].value + rd.turns[b].value - 1.0) < 1e-9) s4.claim1 = false;
  s4.jumps_one = true;
  for (const auto& t : rd.turns)
    if (ceil_times(t, s1.k_bottom + 1) - ceil_times(t, s1.k_bottom) != 1) s4.jumps_one = false;
  if (!irrational) {
    s4.failure = "rational rotation angle";
    return reject(4, s4.failure);
  }
  if (!s4.claim1) {
    s4.failure = "both theta and 2pi - theta present";
    return reject(4, s4.failure);
  }
  if (!s4.jumps_one) {
    s4.failure = "ceiling jump differs from 1";
    return reject(4, s4.failure);
  }
  s4.pass = true;
  if (s1.rule_applied) {
    c.reason = "step 1 relies on the concentration rule for a degenerate iterate";
    return c;
  }
  c.verdict = Verdict::irrationally_elliptic;
  return c;
}

}  // namespace detail

inline std::vector<Certificate> certify_system(const OrbitSystem& sys, double eta = 0.125, long d_max = 10000,
                                               std::int64_t q_max = kDefaultQmax, int threads = 1) {
  std::vector<Certificate> out;
  auto all_inconclusive = [&](const std::string& why) {
    for (size_t i = 0; i < sys.orbits.size(); ++i) {
      Certificate c;
      c.label = sys.orbits[i].label();
      c.orbit = i;
      c.reason = why;
      out.push_back(c);
    }
    return out;
  };
  if (static_cast<int>(sys.orbits.size()) != sys.n)
    return all_inconclusive("hypothesis fails: system has " + std::to_string(sys.orbits.size()) +
                            " prime orbits, expected n = " + std::to_string(sys.n));
  for (const auto& o : sys.orbits)
    if (!o.base().dyn_convex) return all_inconclusive("hypothesis fails: " + o.label() + " is not dynamically convex");
  NData nd = compute_N(sys, q_max);
  auto pair = find_interchange_events(sys, eta, d_max, 0, threads);
  if (!pair) return all_inconclusive("no interchanged events within d_max");
  auto ord = deviation_order(pair->first);
  const size_t bottom = ord.front(), top = ord.back();
  for (size_t i = 0; i < sys.orbits.size(); ++i) {
    if (i == bottom || i == top) {
      out.push_back(detail::certify_orbit(sys, i, *pair, i == bottom, eta, nd, q_max));
    } else {
      Certificate c;
      c.label = sys.orbits[i].label();
      c.orbit = i;
      c.d1 = pair->first.d;
      c.d2 = pair->second.d;
      c.k1 = pair->first.k;
      c.k2 = pair->second.k;
      c.reason = "not extremal at the interchanged events";
      out.push_back(c);
    }
  }
  return out;
}

// Rebuild the system from its raw paths, certify again, and compare.
inline bool verify_certificate(const OrbitSystem& sys, const Certificate& cert, double eta = 0.125,
                               long d_max = 10000) {
  std::vector<PrimeOrbitSpec> fresh;
  for (const auto& o : sys.orbits) fresh.emplace_back(o.label(), o.action(), o.path());
  OrbitSystem again = make_system(sys.n, std::move(fresh));
  for (const auto& c : certify_system(again, eta, d_max)) {
    if (c.label != cert.label) continue;
    if (c.verdict != cert.verdict || c.failed_step != cert.failed_step) return false;
    if (c.step4.angles.size() != cert.step4.angles.size()) return false;
    for (size_t j = 0; j < c.step4.angles.size(); ++j)
      if (std::abs(c.step4.angles[j] - cert.step4.angles[j]) > 1e-9) return false;
    return c.d1 == cert.d1 && c.d2 == cert.d2;
  }
  return false;
}

}  // namespace maslov
