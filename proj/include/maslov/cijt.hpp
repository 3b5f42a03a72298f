#pragma once

// Common index jump events: the N construction, verified event search,
// Gamma classification at an event and interchange-event search.

#include <algorithm>
#include <thread>

#include "orbits.hpp"

namespace maslov {

struct NData {
  long N = 1;
  long p = 1;
  std::vector<long> s;  // per orbit; 0 for x0 and for orbits with larger action
  bool irrational_within_bound = false;
};

inline NData compute_N(const OrbitSystem& sys, std::int64_t q_max = kDefaultQmax) {
  NData out;
  out.s.assign(sys.orbits.size(), 0);
  for (const auto& o : sys.orbits) {
    for (const auto& [x, mult] : unit_angles(o.base().endpoint)) {
      RootTest rt = rational_turns(x, q_max);
      if (!rt.rational) {
        if (!rt.exact) out.irrational_within_bound = true;
        continue;
      }
      out.p = std::lcm(out.p, static_cast<long>(rt.q));
      if (out.p > (1L << 40)) throw InputError("root-of-unity orders overflow N; exact input required");
    }
  }
  const double a0 = sys.orbits[sys.x0].action();
  long fact = 1;
  for (size_t i = 0; i < sys.orbits.size(); ++i) {
    if (i == sys.x0) continue;
    const double ai = sys.orbits[i].action();
    if (ai <= a0 * (1.0 + 1e-12)) out.s[i] = static_cast<long>(std::floor(a0 / ai + 1e-12));
    for (long j = 2; j <= out.s[i]; ++j) {
      fact *= j;
      if (fact > (1L << 40)) throw InputError("N = 2p prod s_i! overflows");
    }
  }
  out.N = 2 * out.p * fact;
  return out;
}

// ---------------------------------------------------------------- events

struct OrbitChecks {
  double deviation = 0.0;  // mean(x^k) - d
  bool ir1 = false;
  bool ir2 = false;
  bool ir3 = false;
  bool bounds = false;
  std::string failure;
};

struct EventChecks {
  bool divisibility = false;
  bool bounds_applicable = false;
  std::vector<OrbitChecks> orbits;
  std::string failure;  // first failing clause, empty when everything passes
  bool ok() const { return failure.empty(); }
};

struct CijtEvent {
  long d = 0;
  std::vector<long> k;
  double eta = 0.0;
  long N = 1;
  EventChecks checks;
};

inline constexpr int kBoundWindow = 10;

inline EventChecks verify_event(const OrbitSystem& sys, const CijtEvent& e) {
  EventChecks c;
  auto fail = [&](const std::string& what) {
    if (c.failure.empty()) c.failure = what;
  };
  if (e.k.size() != sys.orbits.size()) throw InputError("event lists the wrong number of iterates");
  c.divisibility = e.N > 0 && e.d % e.N == 0;
  for (long k : e.k) c.divisibility = c.divisibility && k >= 1 && k % e.N == 0;
  if (!c.divisibility) fail("divisibility");
  c.bounds_applicable = true;
  for (const auto& o : sys.orbits) c.bounds_applicable = c.bounds_applicable && o.base().dyn_convex;
  const long d = e.d;
  for (size_t i = 0; i < sys.orbits.size(); ++i) {
    const auto& o = sys.orbits[i];
    const auto& pr = o.profile();
    const long k = e.k[i];
    OrbitChecks oc;
    auto ofail = [&](const std::string& what) {
      if (oc.failure.empty()) oc.failure = what;
      fail(what + " (" + o.label() + ")");
    };
    if (k < 1) {
      oc.failure = "non-positive iterate";
      fail("k (" + o.label() + ")");
      c.orbits.push_back(oc);
      continue;
    }
    oc.deviation = pr.mean(k) - static_cast<double>(d);
    oc.ir1 = std::abs(oc.deviation) < e.eta;
    if (!oc.ir1) ofail("IR1");
    oc.ir2 = pr.mu_minus(k + 1) == d + pr.mu_minus(1) && pr.mu_plus(k + 1) == d + pr.mu_plus(1);
    if (!oc.ir2) ofail("IR2");
    const auto& b = pr.base();
    oc.ir3 = k >= 2 && pr.mu_plus(k - 1) == d - (b.lower + 2 * b.splitting_at_one.first - b.nullity);
    if (!oc.ir3) ofail("IR3");
    if (c.bounds_applicable) {
      const long m = pr.half_dim();
      oc.bounds = true;
      for (long l = 1; l <= kBoundWindow && oc.bounds; ++l) {
        if (pr.mu_minus(k + l) < d + 2 + m) {
          oc.bounds = false;
          ofail("CIJT-low");
        } else if (k - l >= 1 && pr.mu_plus(k - l) > d - 2) {
          oc.bounds = false;
          ofail("CIJT-up");
        }
      }
    }
    c.orbits.push_back(oc);
  }
  return c;
}

namespace detail {

inline void events_for_d(const OrbitSystem& sys, double eta, long d, long N, std::vector<CijtEvent>& out) {
  // per orbit: the N-multiple(s) nearest d / mean
  std::vector<std::vector<long>> cand(sys.orbits.size());
  for (size_t i = 0; i < sys.orbits.size(); ++i) {
    const double mean = sys.orbits[i].profile().mean(1);
    const double q = static_cast<double>(d) / (mean * static_cast<double>(N));
    const double fl = std::floor(q);
    if (std::abs(q - fl - 0.5) < 1e-12) {
      cand[i] = {static_cast<long>(fl), static_cast<long>(fl) + 1};
    } else {
      cand[i] = {static_cast<long>(std::nearbyint(q))};
    }
    std::vector<long> ks;
    for (long c : cand[i]) {
      if (c < 1) continue;
      // IR1 prefilter
      if (std::abs(sys.orbits[i].profile().mean(c * N) - static_cast<double>(d)) < eta) ks.push_back(c * N);
    }
    if (ks.empty()) return;
    cand[i] = ks;
  }
  // cartesian product over ties
  std::vector<size_t> idx(cand.size(), 0);
  while (true) {
    CijtEvent e;
    e.d = d;
    e.eta = eta;
    e.N = N;
    for (size_t i = 0; i < cand.size(); ++i) e.k.push_back(cand[i][idx[i]]);
    e.checks = verify_event(sys, e);
    if (e.checks.ok()) out.push_back(std::move(e));
    size_t j = 0;
    while (j < idx.size() && ++idx[j] == cand[j].size()) idx[j++] = 0;
    if (j == idx.size()) break;
  }
}

}  // namespace detail

struct EventSearch {
  NData n;
  std::vector<CijtEvent> events;  // sorted by d
};

inline EventSearch find_events(const OrbitSystem& sys, double eta, long d_max, int threads = 1,
                               std::int64_t q_max = kDefaultQmax) {
  if (!(eta > 0)) throw InputError("eta must be positive");
  for (const auto& o : sys.orbits)
    if (!(o.profile().mean(1) > 0)) throw InputError("event search needs positive mean indices");
  EventSearch s;
  s.n = compute_N(sys, q_max);
  const long N = s.n.N;
  const long count = d_max / N;
  threads = std::max(1, std::min<int>(threads, static_cast<int>(std::max<long>(count, 1))));
  std::vector<std::vector<CijtEvent>> parts(threads);
  auto work = [&](int t) {
    for (long j = 1 + t; j <= count; j += threads) detail::events_for_d(sys, eta, j * N, N, parts[t]);
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  for (auto& p : parts)
    for (auto& e : p) s.events.push_back(std::move(e));
  std::stable_sort(s.events.begin(), s.events.end(), [](const CijtEvent& a, const CijtEvent& b) {
    return a.d != b.d ? a.d < b.d : a.k < b.k;
  });
  return s;
}

// ---------------------------------------------------------------- Gamma classes

struct GammaEntry {
  size_t orbit = 0;
  long k = 0;
  long mu_minus = 0;
  long mu_plus = 0;
  bool visible = true;
  std::optional<long> degree;  // point degree of a good non-degenerate iterate
  long bound = 0;              // lower bound for Gamma+, upper bound for Gamma-, degree (or mu+) for Gamma0
};

struct GammaClassification {
  long d = 0;
  long lo = 0;  // interval [d-n+1, d+n-1]
  long hi = 0;
  std::vector<GammaEntry> plus, zero, minus;
};

inline GammaClassification classify_iterates(const OrbitSystem& sys, const CijtEvent& e, long k_window) {
  GammaClassification g;
  g.d = e.d;
  g.lo = e.d - sys.n + 1;
  g.hi = e.d + sys.n - 1;
  for (size_t i = 0; i < sys.orbits.size(); ++i) {
    const auto& o = sys.orbits[i];
    const auto& pr = o.profile();
    for (long k = std::max(1L, e.k[i] - k_window); k <= e.k[i] + k_window; ++k) {
      GammaEntry ge;
      ge.orbit = i;
      ge.k = k;
      ge.mu_minus = pr.mu_minus(k);
      ge.mu_plus = pr.mu_plus(k);
      VisibilityRecord v = euler_visibility(sys, o, k);
      ge.visible = v.degenerate || v.good;
      ge.degree = v.degree;
      const std::string tag = o.label() + "^" + std::to_string(k);
      if (k > e.k[i]) {
        ge.bound = ge.mu_minus;
        if (ge.mu_minus < e.d + sys.n + 1) throw ConsistencyError("Gamma+ bound fails for " + tag);
        g.plus.push_back(ge);
      } else if (k == e.k[i]) {
        ge.bound = ge.degree.value_or(ge.mu_plus);
        if (ge.mu_minus < g.lo || ge.mu_plus > g.hi) throw ConsistencyError("Gamma0 degree leaves the interval for " + tag);
        g.zero.push_back(ge);
      } else {
        if (ge.degree) {
          ge.bound = *ge.degree;
          if (*ge.degree > e.d - sys.n - 1) throw ConsistencyError("Gamma- degree bound fails for " + tag);
        } else {
          // bad or degenerate: only the index bound is available
          ge.bound = ge.mu_plus;
          if (ge.mu_plus > e.d - 2) throw ConsistencyError("Gamma- index bound fails for " + tag);
        }
        g.minus.push_back(ge);
      }
    }
  }
  return g;
}

// ---------------------------------------------------------------- interchange

struct InterchangePair {
  CijtEvent first;
  CijtEvent second;
};

inline std::vector<size_t> deviation_order(const CijtEvent& e) {
  std::vector<size_t> ord(e.checks.orbits.size());
  std::iota(ord.begin(), ord.end(), 0);
  std::sort(ord.begin(), ord.end(), [&](size_t a, size_t b) {
    return e.checks.orbits[a].deviation < e.checks.orbits[b].deviation;
  });
  return ord;
}

// Strict orderings of the mean indices at the two events are mutually reversed.
inline bool interchanged(const CijtEvent& a, const CijtEvent& b) {
  const size_t r = a.checks.orbits.size();
  if (r < 2 || b.checks.orbits.size() != r) return false;
  auto strict = [](const CijtEvent& e) {
    auto o = deviation_order(e);
    for (size_t j = 1; j < o.size(); ++j)
      if (!(e.checks.orbits[o[j - 1]].deviation < e.checks.orbits[o[j]].deviation)) return false;
    return true;
  };
  if (!strict(a) || !strict(b)) return false;
  auto oa = deviation_order(a), ob = deviation_order(b);
  std::reverse(ob.begin(), ob.end());
  return oa == ob;
}

// All pairs (e1, e2) with e1.d < e2.d whose orderings are reversed, by ascending (e1.d, e2.d).
inline std::vector<InterchangePair> all_interchange_pairs(const std::vector<CijtEvent>& events) {
  std::vector<InterchangePair> out;
  for (size_t a = 0; a < events.size(); ++a)
    for (size_t b = a + 1; b < events.size(); ++b)
      if (events[a].d < events[b].d && interchanged(events[a], events[b])) out.push_back({events[a], events[b]});
  return out;
}

// The first interchanged pair whose earlier event has d >= d_min.
inline std::optional<InterchangePair> find_interchange_events(const OrbitSystem& sys, double eta, long d_max,
                                                              long d_min = 0, int threads = 1) {
  if (sys.orbits.size() < 2) return std::nullopt;
  EventSearch s = find_events(sys, eta, d_max, threads);
  for (size_t a = 0; a < s.events.size(); ++a) {
    if (s.events[a].d < d_min) continue;
    for (size_t b = a + 1; b < s.events.size(); ++b)
      if (s.events[a].d < s.events[b].d && interchanged(s.events[a], s.events[b]))
        return InterchangePair{s.events[a], s.events[b]};
  }
  return std::nullopt;
}

// Degrees of the Gamma0 iterates, one per orbit (nullopt when not a point degree).
inline std::vector<std::optional<long>> event_degrees(const OrbitSystem& sys, const CijtEvent& e) {
  std::vector<std::optional<long>> out;
  for (size_t i = 0; i < sys.orbits.size(); ++i) out.push_back(euler_visibility(sys, sys.orbits[i], e.k[i]).degree);
  return out;
}

}  // namespace maslov
