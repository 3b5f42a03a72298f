#pragma once

// Indices of iterated paths from the splitting table of the endpoint,
// the Bott-type nullity count, degree shifts, non-degenerate parts and
// dynamical convexity.

#include <string>

#include "index.hpp"

namespace maslov {

// mu-(Phi^k) = k(mu- + S+(1) - C) + 2 sum_theta ceil(k theta / 2pi) S-(e^{i theta}) - (S+(1) + C)
inline long iterate_mu_minus(long base, const SplittingTable& t, long k) {
  if (k < 1) throw InputError("iteration count must be positive");
  const long s1 = t.at_one().first;
  const long C = t.C;
  long sum = 0;
  for (const auto& e : t.entries) {
    if (e.angle.value <= 1e-9 || e.s_minus == 0) continue;
    sum += 2 * ceil_times(e.angle, k) * e.s_minus;
  }
  return k * (base + s1 - C) + sum - (s1 + C);
}

// nu(Phi^k) = sum over omega^k = 1 of nu_omega(Phi(1)), read from the table.
inline int iterate_nullity(const SplittingTable& t, long k) {
  int nu = 0;
  for (const auto& e : t.entries)
    if (is_kth_root(e.angle, k)) nu += e.nullity;
  return nu;
}

struct IdentityCheck {
  bool pass = false;
  double residual = 0.0;
};

// mean = mu- + S+(1) - C + sum (theta/pi) S-, within 1e-6.
inline IdentityCheck mean_identity_check(const IndexReport& r) {
  double rhs = r.lower + r.splitting_at_one.first - r.C + weighted_minus_sum(r.table);
  IdentityCheck c;
  c.residual = std::abs(r.mean - rhs);
  c.pass = c.residual < 1e-6;
  return c;
}

inline Mat matrix_power(const Mat& M, long k) {
  Mat r = Mat::Identity(M.rows(), M.cols()), b = M;
  while (k > 0) {
    if (k & 1) r = r * b;
    b = b * b;
    k >>= 1;
  }
  return r;
}

// Sum over the eigenvalues omega of M with omega^k = 1 of nu_omega(M).
inline int bott_nullity(const Mat& M, long k) {
  require_symplectic(M);
  if (k < 1) throw InputError("iteration count must be positive");
  SpectralData sd = spectral_data(M);
  int nu = 0;
  for (const auto& c : sd.clusters) {
    if (!c.unit) continue;
    if (is_kth_root(Turns(angle_turns(c.value)), k)) nu += nullity_omega(sd, c.value);
  }
  return nu;
}

// dim ker(M^k - Id), computed on the matrix power itself.
inline int power_nullity(const Mat& M, long k) { return nullity_omega(matrix_power(M, k), 1.0); }

inline int degree_shift(const IndexReport& base, const IndexReport& iterated, bool admissible) {
  if (!admissible) throw InputError("degree shift needs an admissible iteration");
  int s = iterated.lower - base.lower;
  if (iterated.upper - base.upper != s)
    throw ConsistencyError("mu+ and mu- shifts differ on an admissible iterate");
  return s;
}

struct NondegeneratePart {
  int reduced_dim = 0;
  int reduced_mu = 0;
  double reduced_mean = 0.0;
  SplittingTable table;  // table of Psi: the eigenvalue-1 entry removed
};

inline NondegeneratePart nondegenerate_part(const IndexReport& r, const NormalFormDecomposition& endpoint) {
  NondegeneratePart p;
  int ones = 0;
  NormalFormDecomposition rest;
  rest.rest = endpoint.rest;
  for (const auto& b : endpoint.blocks) {
    if (auto* n1 = std::get_if<N1Block>(&b); n1 && n1->lambda == 1) {
      ++ones;
      continue;
    }
    rest.blocks.push_back(b);
  }
  p.reduced_dim = r.dim - 2 * ones;
  p.reduced_mu = r.lower + r.splitting_at_one.first;
  p.reduced_mean = r.mean;
  p.table = splitting_table(rest);
  // carry over exact angles from the report's table
  for (auto& e : p.table.entries)
    if (const SplitEntry* o = r.table.find(e.angle.value); o && o->angle.exact) e.angle = o->angle;
  return p;
}

inline long nondegenerate_iterate(const NondegeneratePart& p, long k) {
  return iterate_mu_minus(p.reduced_mu, p.table, k);
}

struct ConvexityReport {
  bool flag = false;
  int growth_bound = 0;  // guaranteed increment mu-(Phi^{k+1}) - mu-(Phi^k)
  bool bounds_pass = true;
  int checked_up_to = 0;
  std::string failure;
};

inline ConvexityReport dynamical_convexity(const IndexReport& r, int k_max = 100) {
  ConvexityReport c;
  const int m = r.half_dim();
  c.flag = r.lower >= m + 2;
  if (!c.flag) return c;
  c.growth_bound = r.lower - m;
  if (r.lower + 2 * r.splitting_at_one.first - r.nullity < 2) {
    c.bounds_pass = false;
    c.failure = "mu- + 2 S+(1) - nu < 2";
    return c;
  }
  long prev = r.lower;
  for (long k = 1; k <= k_max; ++k) {
    long cur = k == 1 ? r.lower : iterate_mu_minus(r.lower, r.table, k);
    if (cur < 2 * k + m) {
      c.bounds_pass = false;
      c.failure = "mu-(Phi^" + std::to_string(k) + ") < 2k + m";
      return c;
    }
    if (k > 1 && cur < prev + c.growth_bound) {
      c.bounds_pass = false;
      c.failure = "growth bound fails at k = " + std::to_string(k);
      return c;
    }
    prev = cur;
    c.checked_up_to = static_cast<int>(k);
  }
  return c;
}

// Indices of every iterate of one path, from its base report.
class IterationProfile {
 public:
  IterationProfile() = default;
  explicit IterationProfile(IndexReport base) : base_(std::move(base)) {}

  const IndexReport& base() const { return base_; }
  long mu_minus(long k) const { return k == 1 ? base_.lower : iterate_mu_minus(base_.lower, base_.table, k); }
  int nullity(long k) const { return k == 1 ? base_.nullity : iterate_nullity(base_.table, k); }
  long mu_plus(long k) const { return mu_minus(k) + nullity(k); }
  double mean(long k) const { return static_cast<double>(k) * base_.mean; }
  int half_dim() const { return base_.half_dim(); }

 private:
  IndexReport base_;
};

}  // namespace maslov
