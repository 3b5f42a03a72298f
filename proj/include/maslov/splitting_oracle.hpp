#pragma once

// Independent estimate of S+-(omega) by local spectral flow: every endpoint
// block carrying omega is nudged by small symplectic perturbations, and the
// Krein-signed number of eigenvalues that land on each side of omega is
// recorded.  S+ is the largest signed loss just above omega, S- the largest
// signed gain just below it.  This sees crossings at every omega, not only
// at omega = 1.

#include <random>

#include "index.hpp"

namespace maslov {

namespace detail {

// Cayley transform of delta * J S: exactly symplectic, close to Id.
inline Mat cayley(const Mat& S, double delta) {
  const Eigen::Index n = S.rows();
  Mat A = delta * standard_J(static_cast<int>(n)) * S;
  Mat I = Mat::Identity(n, n);
  return (I - 0.5 * A).partialPivLu().solve(I + 0.5 * A);
}

inline std::vector<double> block_angles(const NormalBlock& b) {
  std::vector<double> out;
  for (const auto& [t, mult] : unit_angles(NormalFormDecomposition{{b}, Mat(0, 0)})) out.push_back(t.value);
  return out;
}

inline double circle_dist(double a, double b) {
  double d = std::abs(a - b);
  d -= std::floor(d);
  return std::min(d, 1.0 - d);
}

struct SignedCounts {
  int above = 0;  // Krein-signed count on (theta0, theta0 + arc)
  int below = 0;  // on (theta0 - arc, theta0)
  bool valid = true;
};

inline SignedCounts arc_counts(const Mat& M, double x0, double arc_turns) {
  SignedCounts sc;
  SpectralData sd;
  try {
    sd = spectral_data(M);
  } catch (const Error&) {
    sc.valid = false;
    return sc;
  }
  for (const auto& c : sd.clusters) {
    if (!c.unit) continue;
    double off = angle_turns(c.value) - x0;
    off -= std::nearbyint(off);
    int sgn = c.krein_pos - c.krein_neg;
    if (c.value.imag() == 0.0) {
      // +-1 clusters: Krein form pairs up, no net sign
      sgn = 0;
    }
    if (std::abs(off) <= 1e-10) {
      sc.valid = false;  // still degenerate at omega
      return sc;
    }
    if (off > 0 && off < arc_turns) sc.above += sgn;
    if (off < 0 && -off < arc_turns) sc.below += sgn;
  }
  return sc;
}

inline std::pair<int, int> block_oracle(const NormalBlock& b, double x0, double delta) {
  Mat B = make_normal_form(b);
  const Eigen::Index n = B.rows();
  double arc = 0.05;
  for (double a : block_angles(b)) {
    double d = circle_dist(a, x0);
    if (d > 1e-9) arc = std::min(arc, 0.45 * d);
  }
  std::vector<Mat> family;
  const int m = static_cast<int>(n / 2);
  if (m == 1) {
    family.push_back(B * rotation2(delta));
    family.push_back(B * rotation2(-delta));
    for (double s : {1.0, -1.0}) {
      Mat D = Mat::Zero(2, 2);
      D(0, 0) = std::exp(s * delta);
      D(1, 1) = std::exp(-s * delta);
      family.push_back(B * D);
    }
  } else {
    for (int a = -1; a <= 1; ++a)
      for (int c = -1; c <= 1; ++c)
        if (a != 0 || c != 0) family.push_back(B * diamond(rotation2(a * delta), rotation2(c * delta)));
  }
  std::mt19937_64 rng(0x5eed + static_cast<unsigned>(n));
  std::normal_distribution<double> nd;
  for (int r = 0; r < 24 * m; ++r) {
    Mat S(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) S(i, j) = nd(rng);
    S = 0.5 * (S + S.transpose()).eval();
    family.push_back(B * cayley(S, delta));
  }
  int sp = 0, sm = 0;
  int used = 0;
  for (const Mat& M1 : family) {
    SignedCounts sc = arc_counts(M1, x0, arc);
    if (!sc.valid) continue;
    ++used;
    sp = std::max(sp, -sc.above);
    sm = std::max(sm, sc.below);
  }
  if (used == 0) throw UnsupportedDegeneracy("block family does not admit the nudge");
  return {sp, sm};
}

}  // namespace detail

inline std::pair<int, int> splitting_oracle(const SymplecticPath& p, double theta0, double eps = 1e-4) {
  double x0 = theta0 / kTwoPi;
  x0 -= std::floor(x0);
  NormalFormDecomposition d = endpoint_decomposition(p);
  std::pair<int, int> passes[2];
  for (int pass = 0; pass < 2; ++pass) {
    double delta = pass == 0 ? eps : eps / 10.0;
    int sp = 0, sm = 0;
    for (const auto& b : d.blocks) {
      bool carries = false;
      for (double a : detail::block_angles(b)) {
        double dist = detail::circle_dist(a, x0);
        if (dist <= 1e-9) carries = true;
        else if (dist < 1e-6) throw SpectralAmbiguity("probe angle is ambiguous relative to a block angle");
      }
      if (!carries) continue;
      auto [a, c] = detail::block_oracle(b, x0, delta);
      sp += a;
      sm += c;
    }
    passes[pass] = {sp, sm};
  }
  if (passes[0] != passes[1]) throw ConsistencyError("splitting oracle passes at eps and eps/10 disagree");
  return passes[0];
}

}  // namespace maslov
