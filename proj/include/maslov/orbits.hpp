#pragma once

// Orbit systems: prime closed orbits with actions and linearized paths, the
// ellipsoid model, and the degree / visibility bookkeeping.

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "iteration.hpp"

namespace maslov {

class PrimeOrbitSpec {
 public:
  PrimeOrbitSpec(std::string label, double action, SymplecticPath path)
      : label_(std::move(label)), action_(action), path_(std::move(path)),
        profile_(index_report(path_)), cache_(std::make_shared<Cache>()) {
    if (!(action > 0) || !std::isfinite(action)) throw InputError("orbit action must be positive");
  }

  const std::string& label() const { return label_; }
  double action() const { return action_; }
  double action(long k) const { return static_cast<double>(k) * action_; }
  const SymplecticPath& path() const { return path_; }
  const IterationProfile& profile() const { return profile_; }
  const IndexReport& base() const { return profile_.base(); }

  // Direct report of the k-th iterate path, built once per k.
  const IndexReport& report(int k) const {
    std::lock_guard<std::mutex> lock(cache_->mu);
    auto it = cache_->reports.find(k);
    if (it == cache_->reports.end()) it = cache_->reports.emplace(k, index_report(power_path(path_, k))).first;
    return it->second;
  }

 private:
  struct Cache {
    std::mutex mu;
    std::map<int, IndexReport> reports;
  };
  std::string label_;
  double action_;
  SymplecticPath path_;
  IterationProfile profile_;
  std::shared_ptr<Cache> cache_;
};

struct OrbitSystem {
  int n = 0;  // ambient half-dimension; orbit paths live in Sp(2n-2)
  std::vector<PrimeOrbitSpec> orbits;
  size_t x0 = 0;  // least-action visible prime orbit
  std::optional<std::vector<QuadSurd>> ellipsoid_r;  // exact radii when built from a fixture
};

inline OrbitSystem make_system(int n, std::vector<PrimeOrbitSpec> orbits) {
  if (n < 2) throw InputError("orbit system needs n >= 2");
  if (orbits.empty()) throw InputError("orbit system needs at least one orbit");
  for (const auto& o : orbits)
    if (o.path().dim() != 2 * (n - 1))
      throw InputError("orbit '" + o.label() + "' has path dimension " + std::to_string(o.path().dim()) +
                       ", expected " + std::to_string(2 * (n - 1)));
  OrbitSystem s;
  s.n = n;
  s.orbits = std::move(orbits);
  for (size_t i = 1; i < s.orbits.size(); ++i)
    if (s.orbits[i].action() < s.orbits[s.x0].action()) s.x0 = i;
  return s;
}

// ---------------------------------------------------------------- ellipsoids

// E_n(r): orbit i has action 2 pi r_i and path
//   diamond_{j != i} R(2 pi (r_i/r_j) t)   followed by a loop of Maslov index 1
// (the loop converts the coordinate-plane trivialization into the one induced
// by a capping disk).
inline OrbitSystem ellipsoid_system(const std::vector<QuadSurd>& r) {
  const int n = static_cast<int>(r.size());
  if (n < 2) throw InputError("ellipsoid needs at least two radii");
  for (const auto& x : r)
    if (x.sign() <= 0) throw InputError("ellipsoid radii must be positive");
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if ((r[i] / r[j]).is_rational())
        throw InputError("rational ratio r_" + std::to_string(i + 1) + "/r_" + std::to_string(j + 1) +
                         ": infinitely many closed orbits (#T(E_n(r)) = infinity)");
  std::vector<PrimeOrbitSpec> orbits;
  for (int i = 0; i < n; ++i) {
    AtomSegment seg, loop;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      seg.atoms.emplace_back(rotation_atom_turns(r[i] / r[j]));
      loop.atoms.emplace_back(rotation_atom_turns(QuadSurd(Rational(loop.atoms.empty() ? 1 : 0))));
    }
    SymplecticPath p(2 * (n - 1), {Segment(seg), Segment(loop)});
    orbits.emplace_back("x" + std::to_string(i + 1), kTwoPi * r[i].value(), std::move(p));
  }
  OrbitSystem s = make_system(n, std::move(orbits));
  s.ellipsoid_r = r;
  return s;
}

inline OrbitSystem ellipsoid_system(const std::vector<double>& r, std::int64_t q_max = kDefaultQmax) {
  const int n = static_cast<int>(r.size());
  if (n < 2) throw InputError("ellipsoid needs at least two radii");
  for (double x : r)
    if (!(x > 0) || !std::isfinite(x)) throw InputError("ellipsoid radii must be positive");
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rational_turns(Turns(r[i] / r[j]), q_max).rational)
        throw InputError("rational ratio r_" + std::to_string(i + 1) + "/r_" + std::to_string(j + 1) +
                         " within the denominator bound: infinitely many closed orbits (#T(E_n(r)) = infinity)");
  std::vector<PrimeOrbitSpec> orbits;
  for (int i = 0; i < n; ++i) {
    AtomSegment seg, loop;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      seg.atoms.emplace_back(rotation_atom(kTwoPi * r[i] / r[j]));
      loop.atoms.emplace_back(rotation_atom(loop.atoms.empty() ? kTwoPi : 0.0));
    }
    SymplecticPath p(2 * (n - 1), {Segment(seg), Segment(loop)});
    orbits.emplace_back("x" + std::to_string(i + 1), kTwoPi * r[i], std::move(p));
  }
  return make_system(n, std::move(orbits));
}

inline QuadSurd sqrt2() { return QuadSurd::sqrt_of(2); }
inline QuadSurd golden() { return {Rational(1, 2), Rational(1, 2), 5}; }

// E_2(1, sqrt 2) and E_3(1, phi, phi^2) with exact angle arithmetic.
inline OrbitSystem e2_fixture() { return ellipsoid_system(std::vector<QuadSurd>{QuadSurd(1), sqrt2()}); }
inline OrbitSystem e3_fixture() {
  QuadSurd phi = golden();
  return ellipsoid_system(std::vector<QuadSurd>{QuadSurd(1), phi, phi * phi});
}

// Closed forms for ellipsoid orbits.
inline long ellipsoid_mu(const std::vector<QuadSurd>& r, size_t i, long k) {
  long mu = static_cast<long>(r.size()) - 1 + 2 * k;
  for (size_t j = 0; j < r.size(); ++j)
    if (j != i) mu += 2 * (r[i] / r[j] * QuadSurd(Rational(k))).floor();
  return mu;
}

inline double ellipsoid_mean(const std::vector<QuadSurd>& r, size_t i, long k) {
  QuadSurd s;
  for (const auto& x : r) s = s + QuadSurd(1) / x;
  return 2.0 * static_cast<double>(k) * (r[i] * s).value();
}

// ---------------------------------------------------------------- visibility

struct VisibilityRecord {
  bool degenerate = false;
  bool good = true;
  int euler = 0;                // chi in {-1, 0, 1}; 0 for bad or degenerate
  std::optional<long> degree;   // point degree for good non-degenerate iterates
  long interval_lo = 0;         // [mu-, mu+]
  long interval_hi = 0;
};

inline int parity_sign(long x) { return (x % 2 == 0) ? 1 : -1; }

inline VisibilityRecord euler_visibility(const OrbitSystem& sys, const PrimeOrbitSpec& spec, long k) {
  if (k < 1) throw InputError("iteration count must be positive");
  const auto& prof = spec.profile();
  VisibilityRecord v;
  v.interval_lo = prof.mu_minus(k);
  v.interval_hi = prof.mu_plus(k);
  const double mean = prof.mean(k);
  if (v.interval_lo < mean - (sys.n - 1) - 1e-9 || v.interval_hi > mean + (sys.n - 1) + 1e-9)
    throw ConsistencyError("index interval of " + spec.label() + "^" + std::to_string(k) +
                           " leaves [mean-n+1, mean+n-1]");
  IterationClass ic = classify_iteration(prof.base().endpoint, k);
  v.good = ic.good_if_iterate;
  if (prof.nullity(k) > 0) {
    v.degenerate = true;
    return v;
  }
  long mu = v.interval_lo;
  if (v.good) {
    v.euler = parity_sign(mu);
    v.degree = mu;
  }
  if (ic.admissible && (k % 2 == 1 || ic.neg_interval_count % 2 == 0) && prof.nullity(1) == 0) {
    int base_chi = parity_sign(prof.mu_minus(1));
    if (v.euler != base_chi)
      throw ConsistencyError("Euler characteristic of " + spec.label() + "^" + std::to_string(k) +
                             " differs from the prime orbit on an admissible iterate");
  }
  return v;
}

// deg(x^k) = deg(x) + mu+(x^k) - mu+(x) for admissible k.
inline long deg_iterate(const PrimeOrbitSpec& spec, long base_deg, long k) {
  const auto& prof = spec.profile();
  IterationClass ic = classify_iteration(prof.base().endpoint, k);
  if (!ic.admissible) throw InputError("deg_iterate needs an admissible iterate");
  long up = prof.mu_plus(k) - prof.mu_plus(1);
  long down = prof.mu_minus(k) - prof.mu_minus(1);
  if (up != down) throw ConsistencyError("mu+ and mu- shifts differ on an admissible iterate");
  return base_deg + up;
}

// ---------------------------------------------------------------- degrees

struct DegreeEntry {
  long degree = 0;
  size_t orbit = 0;
  long k = 0;
  double action = 0.0;
};

struct DegreeTable {
  int cutoff = 0;
  std::vector<DegreeEntry> entries;  // sorted by degree
  bool bijective = true;
  bool action_monotone = true;
  bool checked = true;  // false when degenerate iterates forced the check to be skipped
  std::string failure;  // first missing / duplicated degree or order violation
  std::vector<std::string> notices;
  bool ok() const { return bijective && action_monotone; }
};

inline DegreeTable degree_assignment(const OrbitSystem& sys, int cutoff) {
  DegreeTable t;
  t.cutoff = cutoff;
  for (size_t i = 0; i < sys.orbits.size(); ++i) {
    const auto& o = sys.orbits[i];
    const long k_limit = 4L * std::max(cutoff, 1) + 16;
    for (long k = 1; k <= k_limit; ++k) {
      if (o.profile().mu_minus(k) > cutoff) break;
      VisibilityRecord v = euler_visibility(sys, o, k);
      if (v.degenerate) {
        t.checked = false;
        t.notices.push_back(o.label() + "^" + std::to_string(k) + " is degenerate: degree interval [" +
                            std::to_string(v.interval_lo) + "," + std::to_string(v.interval_hi) +
                            "], bijection check skipped");
        continue;
      }
      if (!v.good) continue;
      if (*v.degree <= cutoff) t.entries.push_back({*v.degree, i, k, o.action(k)});
    }
  }
  std::sort(t.entries.begin(), t.entries.end(), [](const DegreeEntry& a, const DegreeEntry& b) {
    return a.degree != b.degree ? a.degree < b.degree : a.action < b.action;
  });
  if (!t.checked) return t;
  long expect = sys.n + 1;
  for (size_t idx = 0; idx < t.entries.size(); ++idx) {
    const auto& e = t.entries[idx];
    if (e.degree != expect) {
      t.bijective = false;
      t.failure = e.degree < expect ? "duplicated degree " + std::to_string(e.degree)
                                    : "missing degree " + std::to_string(expect);
      return t;
    }
    if (idx > 0 && !(e.action > t.entries[idx - 1].action)) {
      t.action_monotone = false;
      t.failure = "action order violated at degree " + std::to_string(e.degree);
      return t;
    }
    expect += 2;
  }
  if (expect <= cutoff) {
    t.bijective = false;
    t.failure = "missing degree " + std::to_string(expect);
  }
  return t;
}

struct RatioCheck {
  double ratio = 0.0;
  double max_deviation = 0.0;
  bool ok = true;
  std::string offender;
};

// A(x)/mean(x) over the first `count` visible iterates in action order.
inline RatioCheck action_ratio_check(const OrbitSystem& sys, int count, double tol = 1e-10) {
  struct It {
    double action;
    size_t orbit;
    long k;
  };
  std::vector<It> its;
  for (size_t i = 0; i < sys.orbits.size(); ++i)
    for (long k = 1; k <= count; ++k) its.push_back({sys.orbits[i].action(k), i, k});
  std::sort(its.begin(), its.end(), [](const It& a, const It& b) { return a.action < b.action; });
  RatioCheck rc;
  int used = 0;
  for (const auto& it : its) {
    if (used >= count) break;
    const auto& o = sys.orbits[it.orbit];
    VisibilityRecord v = euler_visibility(sys, o, it.k);
    if (!v.degenerate && !v.good) continue;
    double r = o.action(it.k) / o.profile().mean(it.k);
    if (used == 0) rc.ratio = r;
    double dev = std::abs(r - rc.ratio);
    if (dev > rc.max_deviation) rc.max_deviation = dev;
    if (dev >= tol && rc.ok) {
      rc.ok = false;
      rc.offender = o.label();
    }
    ++used;
  }
  return rc;
}

}  // namespace maslov
