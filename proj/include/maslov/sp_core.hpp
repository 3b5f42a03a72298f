#pragma once

// Symplectic linear algebra: the diamond product, spectra with Krein signs,
// nullities, basic normal forms and their recovery from a matrix.

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "exact.hpp"
#include "linalg.hpp"

namespace maslov {

// ---------------------------------------------------------------- matrices

inline void require_symplectic(const Mat& M, const char* what = "matrix") {
  if (M.rows() != M.cols() || M.rows() % 2 != 0)
    throw InputError(std::string(what) + " must be square of even size");
  if (!M.allFinite()) throw InputError(std::string(what) + " has non-finite entries");
  if (!is_symplectic(M))
    throw InputError(std::string(what) + " is not symplectic (defect " +
                     std::to_string(symplectic_defect(M)) + ")");
}

// Symplectic direct sum with the interleaved layout
//   [[A1,0,B1,0],[0,A2,0,B2],[C1,0,D1,0],[0,C2,0,D2]].
inline Mat diamond(const Mat& a, const Mat& b) {
  const Eigen::Index m1 = a.rows() / 2, m2 = b.rows() / 2, m = m1 + m2;
  Mat r = Mat::Zero(2 * m, 2 * m);
  r.block(0, 0, m1, m1) = a.block(0, 0, m1, m1);
  r.block(0, m, m1, m1) = a.block(0, m1, m1, m1);
  r.block(m, 0, m1, m1) = a.block(m1, 0, m1, m1);
  r.block(m, m, m1, m1) = a.block(m1, m1, m1, m1);
  r.block(m1, m1, m2, m2) = b.block(0, 0, m2, m2);
  r.block(m1, m + m1, m2, m2) = b.block(0, m2, m2, m2);
  r.block(m + m1, m1, m2, m2) = b.block(m2, 0, m2, m2);
  r.block(m + m1, m + m1, m2, m2) = b.block(m2, m2, m2, m2);
  return r;
}

// Extract the diamond factor living on coordinates [off, off+len) of each half.
inline Mat diamond_factor(const Mat& M, Eigen::Index off, Eigen::Index len) {
  const Eigen::Index m = M.rows() / 2;
  Mat r(2 * len, 2 * len);
  r.block(0, 0, len, len) = M.block(off, off, len, len);
  r.block(0, len, len, len) = M.block(off, m + off, len, len);
  r.block(len, 0, len, len) = M.block(m + off, off, len, len);
  r.block(len, len, len, len) = M.block(m + off, m + off, len, len);
  return r;
}

// ---------------------------------------------------------------- spectra

struct EigenCluster {
  cplx value;        // cluster centre, snapped to the circle / real axis / +-1
  int multiplicity = 0;
  bool unit = false;
  int krein_pos = 0;  // only meaningful when unit
  int krein_neg = 0;
  std::vector<char> members;  // which Schur diagonal entries belong here
};

struct SpectralData {
  int dim = 0;
  std::vector<EigenCluster> clusters;
  int m0 = 0;  // multiplicity of negative real eigenvalues
  SchurForm schur;
};

struct SpectralOptions {
  double cluster_tol = 1e-6;
  double unit_tol = 1e-8;
  double ambiguity_factor = 10.0;  // distinct clusters closer than factor*tol -> error
  bool strict = true;              // robust mode merges instead of complaining
};

inline SpectralOptions robust_spectral_options() {
  SpectralOptions o;
  o.cluster_tol = 1e-5;
  o.unit_tol = 1e-5;
  o.strict = false;
  return o;
}

namespace detail {

// Single-linkage clustering of the Schur diagonal, relative to |lambda| so
// that lambda and 1/lambda are treated alike.
inline std::vector<std::vector<int>> cluster_indices(const CVec& ev, double tol) {
  const int n = static_cast<int>(ev.size());
  std::vector<int> parent(n);
  for (int i = 0; i < n; ++i) parent[i] = i;
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(ev(i) - ev(j)) <= tol * std::max(std::abs(ev(i)), std::abs(ev(j))))
        parent[find(i)] = find(j);
  std::vector<std::vector<int>> groups;
  std::vector<int> slot(n, -1);
  for (int i = 0; i < n; ++i) {
    int r = find(i);
    if (slot[r] < 0) {
      slot[r] = static_cast<int>(groups.size());
      groups.emplace_back();
    }
    groups[slot[r]].push_back(i);
  }
  return groups;
}

}  // namespace detail

// Hermitian Krein form h(x, y) = y^H (-iJ) x restricted to span(V).
inline CMat krein_gram(const CMat& V, int dim) {
  CMat J = standard_J(dim).cast<cplx>();
  return V.adjoint() * (cplx(0, -1) * J) * V;
}

inline SpectralData spectral_data(const Mat& M, const SpectralOptions& opt = {}) {
  SpectralData sd;
  sd.dim = static_cast<int>(M.rows());
  if (sd.dim == 0) return sd;
  sd.schur = complex_schur(M);
  CVec ev = sd.schur.T.diagonal();
  // defective eigenvalues split like sqrt(eps |M|): widen the clustering
  // radius with the size of M (orthogonal matrices keep cluster_tol)
  const double tol = opt.cluster_tol * std::sqrt(std::max(1.0, M.norm() / std::sqrt(double(sd.dim))));
  auto groups = detail::cluster_indices(ev, tol);

  for (const auto& g : groups) {
    EigenCluster c;
    c.multiplicity = static_cast<int>(g.size());
    c.members.assign(ev.size(), 0);
    cplx mean = 0;
    for (int i : g) {
      mean += ev(i);
      c.members[i] = 1;
    }
    mean /= double(g.size());
    if (std::abs(mean.imag()) <= tol * std::abs(mean)) mean = {mean.real(), 0.0};
    c.unit = std::abs(std::abs(mean) - 1.0) <= std::max(opt.unit_tol, opt.strict ? 0.0 : tol);
    if (c.unit) mean /= std::abs(mean);
    if (std::abs(mean - 1.0) <= tol) mean = 1.0;
    if (std::abs(mean + 1.0) <= tol) mean = -1.0;
    c.value = mean;
    sd.clusters.push_back(std::move(c));
  }

  if (opt.strict) {
    for (size_t i = 0; i < sd.clusters.size(); ++i)
      for (size_t j = i + 1; j < sd.clusters.size(); ++j) {
        cplx a = sd.clusters[i].value, b = sd.clusters[j].value;
        // grouping far off the circle changes neither rho nor any nullity
        auto off = [](cplx z) { return std::abs(std::log(std::abs(z))) > 1e-3; };
        if (off(a) && off(b)) continue;
        double dist = std::abs(a - b);
        if (dist < opt.ambiguity_factor * tol * std::max(std::abs(a), std::abs(b))) {
          std::ostringstream os;
          os.precision(12);
          os << "ambiguous eigenvalue clustering: " << sd.clusters[i].value << " and "
             << sd.clusters[j].value << " are " << dist << " apart";
          throw SpectralAmbiguity(os.str());
        }
      }
  }

  for (auto& c : sd.clusters) {
    if (c.value.imag() == 0.0 && c.value.real() < 0) sd.m0 += c.multiplicity;
    if (!c.unit) continue;
    auto sub = invariant_subspace(sd.schur, c.members);
    Inertia in = hermitian_inertia(krein_gram(sub.V, sd.dim));
    if (in.zero > 0 && opt.strict)
      throw SpectralAmbiguity("Krein form is degenerate at a unit eigenvalue; the eigenvalue is too close to leaving the circle");
    c.krein_pos = in.pos;
    c.krein_neg = in.neg;
  }
  std::sort(sd.clusters.begin(), sd.clusters.end(), [](const EigenCluster& a, const EigenCluster& b) {
    if (a.value.real() != b.value.real()) return a.value.real() < b.value.real();
    return a.value.imag() < b.value.imag();
  });
  return sd;
}

// Complex kernel dimension of M - omega Id.  The SVD (threshold 1e-8 relative)
// runs on the invariant subspace of the eigenvalue cluster at omega, so that
// large hyperbolic parts elsewhere in the spectrum do not swamp the threshold.
inline int nullity_omega(const SpectralData& sd, cplx omega) {
  for (const auto& c : sd.clusters) {
    if (std::abs(c.value - omega) > 1e-6) continue;
    auto sub = invariant_subspace(sd.schur, c.members);
    CMat N = sub.T - omega * CMat::Identity(sub.T.rows(), sub.T.cols());
    return c.multiplicity - numerical_rank(N, 1e-8);
  }
  return 0;
}

inline int nullity_omega(const Mat& M, cplx omega) {
  if (M.rows() == 0) return 0;
  if (std::abs(std::abs(omega) - 1.0) > 1e-8) throw InputError("nullity_omega needs |omega| = 1");
  return nullity_omega(spectral_data(M), omega);
}

inline double angle_turns(cplx z) {
  double t = std::arg(z) / kTwoPi;
  if (t < 0) t += 1.0;
  if (t >= 1.0) t -= 1.0;
  return t;
}

// ---------------------------------------------------------------- normal forms

struct DBlock {
  double lambda = 2.0;
};
struct N1Block {
  int lambda = 1;  // +-1
  int a = 0;       // -1, 0, 1
};
struct RBlock {
  Turns turns;  // theta = 2 pi turns, turns in (0,1) \ {1/2}
};
struct N2Block {
  Turns turns;  // omega = exp(2 pi i turns)
  Eigen::Matrix2d b = Eigen::Matrix2d::Zero();
};

using NormalBlock = std::variant<DBlock, N1Block, RBlock, N2Block>;

inline bool n2_trivial(const N2Block& n) {
  return (n.b(0, 1) - n.b(1, 0)) * std::sin(kTwoPi * n.turns.value) > 0;
}

// Canonical symplectic b for N2 at the given angle.
inline N2Block canonical_n2(const Turns& turns, bool trivial) {
  N2Block n;
  n.turns = turns;
  double th = kTwoPi * turns.value;
  double s = std::sin(th);
  double delta = (trivial ? 1.0 : -1.0) * (s > 0 ? 1.0 : -1.0);
  n.b << -delta * std::cos(th) / s, delta, 0.0, 0.0;
  return n;
}

inline int block_dim(const NormalBlock& b) { return std::holds_alternative<N2Block>(b) ? 4 : 2; }

inline Mat make_normal_form(const NormalBlock& spec) {
  return std::visit(
      [](const auto& blk) -> Mat {
        using T = std::decay_t<decltype(blk)>;
        Mat M;
        if constexpr (std::is_same_v<T, DBlock>) {
          if (!(std::isfinite(blk.lambda)) || blk.lambda == 0.0 || std::abs(blk.lambda) == 1.0)
            throw InputError("D(lambda) needs a real lambda outside {0, +1, -1}");
          M = Mat::Zero(2, 2);
          M(0, 0) = blk.lambda;
          M(1, 1) = 1.0 / blk.lambda;
        } else if constexpr (std::is_same_v<T, N1Block>) {
          if (std::abs(blk.lambda) != 1 || blk.a < -1 || blk.a > 1)
            throw InputError("N1(lambda,a) needs lambda in {1,-1} and a in {-1,0,1}");
          M.resize(2, 2);
          M << blk.lambda, blk.a, 0.0, blk.lambda;
        } else if constexpr (std::is_same_v<T, RBlock>) {
          double t = blk.turns.value;
          if (!(t > 0.0 && t < 1.0) || t == 0.5) throw InputError("R(theta) needs theta in (0,pi)u(pi,2pi)");
          M = rotation2(kTwoPi * t);
        } else {
          double t = blk.turns.value;
          if (!(t > 0.0 && t < 1.0) || t == 0.5) throw InputError("N2(omega,b) needs omega off the real axis");
          double th = kTwoPi * t;
          const auto& b = blk.b;
          double lhs = (b(1, 0) - b(0, 1)) * std::cos(th), rhs = (b(0, 0) + b(1, 1)) * std::sin(th);
          if (std::abs(lhs - rhs) > 1e-9 * std::max(1.0, b.norm()))
            throw InputError("N2(omega,b): b violates (b3-b2)cos(theta) = (b1+b4)sin(theta)");
          if (b(0, 1) == b(1, 0)) throw InputError("N2(omega,b) needs b2 != b3");
          M = Mat::Zero(4, 4);
          M.block(0, 0, 2, 2) = rotation2(th);
          M.block(2, 2, 2, 2) = rotation2(th);
          M.block(0, 2, 2, 2) = b;
          if (!is_symplectic(M)) throw InputError("N2(omega,b) is not symplectic");
        }
        return M;
      },
      spec);
}

struct NormalFormDecomposition {
  std::vector<NormalBlock> blocks;
  Mat rest = Mat(0, 0);  // hyperbolic part, no unit spectrum

  int dim() const {
    int d = static_cast<int>(rest.rows());
    for (const auto& b : blocks) d += block_dim(b);
    return d;
  }
};

inline Mat diamond_all(const std::vector<Mat>& parts) {
  Mat r(0, 0);
  for (const auto& p : parts) r = r.rows() == 0 ? p : diamond(r, p);
  return r;
}

inline Mat reassemble(const NormalFormDecomposition& d) {
  std::vector<Mat> parts;
  for (const auto& b : d.blocks) parts.push_back(make_normal_form(b));
  if (d.rest.rows() > 0) parts.push_back(d.rest);
  return diamond_all(parts);
}

inline std::string block_name(const NormalBlock& b) {
  std::ostringstream os;
  os.precision(10);
  std::visit(
      [&](const auto& blk) {
        using T = std::decay_t<decltype(blk)>;
        if constexpr (std::is_same_v<T, DBlock>) os << "D(" << blk.lambda << ")";
        else if constexpr (std::is_same_v<T, N1Block>) os << "N1(" << blk.lambda << "," << blk.a << ")";
        else if constexpr (std::is_same_v<T, RBlock>) os << "R(2pi*" << blk.turns.value << ")";
        else os << "N2(2pi*" << blk.turns.value << "," << (n2_trivial(blk) ? "trivial" : "nontrivial") << ")";
      },
      b);
  return os.str();
}

// Sort key so that block multisets can be compared.
inline std::pair<int, double> block_key(const NormalBlock& b) {
  return std::visit(
      [](const auto& blk) -> std::pair<int, double> {
        using T = std::decay_t<decltype(blk)>;
        if constexpr (std::is_same_v<T, DBlock>) return {0, blk.lambda};
        else if constexpr (std::is_same_v<T, N1Block>) return {1, blk.lambda * 10.0 + blk.a};
        else if constexpr (std::is_same_v<T, RBlock>) return {2, blk.turns.value};
        else return {n2_trivial(blk) ? 3 : 4, blk.turns.value};
      },
      b);
}

inline void sort_blocks(std::vector<NormalBlock>& blocks) {
  std::stable_sort(blocks.begin(), blocks.end(),
                   [](const NormalBlock& a, const NormalBlock& b) { return block_key(a) < block_key(b); });
}

namespace detail {

// Sign form on the Jordan part of a unit eigenvalue:
// F(x,y) = conj(lambda) * y^H J (M - lambda) x on the generalized eigenspace.
// Its nonzero eigenvalues (one per 2-block) carry the normal-form type.
struct JordanData {
  int algebraic = 0;
  int geometric = 0;
  int positive = 0;  // signs of F on the Jordan part
  int negative = 0;
  CMat V;
};

inline JordanData jordan_data(const Mat& M, const SpectralData& sd, const EigenCluster& c) {
  JordanData jd;
  auto sub = invariant_subspace(sd.schur, c.members);
  jd.V = sub.V;
  jd.algebraic = c.multiplicity;
  CMat N = sub.T - c.value * CMat::Identity(sub.T.rows(), sub.T.cols());
  int rank = numerical_rank(N, 1e-8);
  jd.geometric = jd.algebraic - rank;
  if (rank > 0) {
    CMat N2 = N * N;
    if (N2.norm() > 1e-6 * std::max(1.0, N.squaredNorm()))
      throw UnsupportedDegeneracy("Jordan block of size >= 3 at unit eigenvalue (" +
                                  std::to_string(c.value.real()) + "," + std::to_string(c.value.imag()) +
                                  ")");
    if (2 * rank > jd.algebraic) throw UnsupportedDegeneracy("inconsistent Jordan structure at unit eigenvalue");
    CMat J = standard_J(static_cast<int>(M.rows())).cast<cplx>();
    CMat Nfull = M.cast<cplx>() - c.value * CMat::Identity(M.rows(), M.cols());
    CMat F = std::conj(c.value) * (jd.V.adjoint() * J * Nfull * jd.V);
    F = 0.5 * (F + F.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<CMat> es(F);
    Eigen::VectorXd f = es.eigenvalues();
    std::vector<double> sorted(f.data(), f.data() + f.size());
    std::sort(sorted.begin(), sorted.end(), [](double x, double y) { return std::abs(x) > std::abs(y); });
    double big = std::abs(sorted[rank - 1]);
    double small = static_cast<int>(sorted.size()) > rank ? std::abs(sorted[rank]) : 0.0;
    if (!(small <= 1e-5 * big))
      throw UnsupportedDegeneracy("Jordan sign form is not resolvable at a unit eigenvalue");
    for (int i = 0; i < rank; ++i) (sorted[i] > 0 ? jd.positive : jd.negative)++;
  }
  return jd;
}

}  // namespace detail

inline NormalFormDecomposition decompose_normal_form(const Mat& M) {
  require_symplectic(M);
  NormalFormDecomposition out;
  SpectralData sd = spectral_data(M);
  std::vector<Mat> hyper;

  for (const auto& c : sd.clusters) {
    if (!c.unit) {
      // off the circle: real pairs -> D(lambda), quadruples -> A (+) A^{-T}
      if (std::abs(c.value) < 1.0) continue;
      if (c.value.imag() == 0.0) {
        for (int i = 0; i < c.multiplicity; ++i) {
          Mat D = Mat::Zero(2, 2);
          D(0, 0) = c.value.real();
          D(1, 1) = 1.0 / c.value.real();
          hyper.push_back(D);
        }
      } else if (c.value.imag() > 0) {
        Eigen::Matrix2d A;
        A << c.value.real(), -c.value.imag(), c.value.imag(), c.value.real();
        Mat Q = Mat::Zero(4, 4);
        Q.block(0, 0, 2, 2) = A;
        Q.block(2, 2, 2, 2) = A.inverse().transpose();
        for (int i = 0; i < c.multiplicity; ++i) hyper.push_back(Q);
      }
      continue;
    }
    if (c.value.imag() < 0) continue;  // mirrored by the upper half-plane partner
    auto jd = detail::jordan_data(M, sd, c);
    const int j2 = jd.algebraic - jd.geometric;
    const int singles = jd.geometric - j2;

    if (c.value.imag() == 0.0) {
      const int lam = c.value.real() > 0 ? 1 : -1;
      if (singles % 2 != 0) throw ConsistencyError("odd semisimple multiplicity at a real unit eigenvalue");
      // sign F = a at +1 and -a at -1
      for (int i = 0; i < jd.positive; ++i) out.blocks.push_back(N1Block{lam, lam});
      for (int i = 0; i < jd.negative; ++i) out.blocks.push_back(N1Block{lam, -lam});
      for (int i = 0; i < singles / 2; ++i) out.blocks.push_back(N1Block{lam, 0});
      continue;
    }

    const double t = angle_turns(c.value);
    // F < 0 on the upper-half-plane eigenvalue means trivial
    for (int i = 0; i < jd.positive; ++i) out.blocks.push_back(canonical_n2(Turns(t), false));
    for (int i = 0; i < jd.negative; ++i) out.blocks.push_back(canonical_n2(Turns(t), true));
    const int rp = c.krein_pos - j2, rn = c.krein_neg - j2;
    if (rp < 0 || rn < 0) throw ConsistencyError("Krein inertia incompatible with Jordan structure");
    for (int i = 0; i < rp; ++i) out.blocks.push_back(RBlock{Turns(t)});
    for (int i = 0; i < rn; ++i) out.blocks.push_back(RBlock{Turns(1.0 - t)});
  }
  sort_blocks(out.blocks);
  out.rest = diamond_all(hyper);
  if (out.dim() != M.rows()) throw ConsistencyError("normal-form decomposition lost dimensions");
  return out;
}

// Attach exact angles to rotation/N2 blocks whose numeric angle matches a hint.
inline void annotate_exact_turns(NormalFormDecomposition& d, const std::vector<QuadSurd>& hints,
                                 double tol = 1e-9) {
  std::vector<char> used(d.blocks.size(), 0);
  for (const auto& h : hints) {
    QuadSurd f = h.frac();
    double fv = f.value();
    for (size_t i = 0; i < d.blocks.size(); ++i) {
      if (used[i]) continue;
      Turns* tp = nullptr;
      if (auto* r = std::get_if<RBlock>(&d.blocks[i])) tp = &r->turns;
      if (auto* n = std::get_if<N2Block>(&d.blocks[i])) tp = &n->turns;
      if (!tp || tp->exact) continue;
      if (std::abs(tp->value - fv) < tol) {
        *tp = Turns(f);
        used[i] = 1;
        break;
      }
      if (std::abs(tp->value - (1.0 - fv)) < tol) {
        *tp = Turns(QuadSurd(Rational(1)) - f);
        used[i] = 1;
        break;
      }
    }
  }
}

// ---------------------------------------------------------------- iteration classes

struct IterationClass {
  bool admissible = true;
  bool good_if_iterate = true;
  int neg_interval_count = 0;
  bool irrational_within_bound = false;  // some unit angle was only shown irrational up to q_max
  std::int64_t q_max = kDefaultQmax;
};

// Unit eigen-angles (in turns, with multiplicity) carried by a decomposition.
inline std::vector<std::pair<Turns, int>> unit_angles(const NormalFormDecomposition& d) {
  std::vector<std::pair<Turns, int>> out;
  for (const auto& b : d.blocks) {
    if (auto* n1 = std::get_if<N1Block>(&b)) out.push_back({Turns(QuadSurd(Rational(n1->lambda > 0 ? 0 : 1, 2))), 2});
    if (auto* r = std::get_if<RBlock>(&b)) {
      out.push_back({r->turns, 1});
      out.push_back({r->turns.complement(), 1});
    }
    if (auto* n2 = std::get_if<N2Block>(&b)) {
      out.push_back({n2->turns, 2});
      out.push_back({n2->turns.complement(), 2});
    }
  }
  return out;
}

inline int negative_interval_count(const Mat& M) {
  if (M.rows() == 0) return 0;
  SpectralData sd = spectral_data(M);
  int cnt = 0;
  for (const auto& c : sd.clusters)
    if (c.value.imag() == 0.0 && c.value.real() > -1.0 && c.value.real() < 0.0 && !c.unit) cnt += c.multiplicity;
  return cnt;
}

inline IterationClass classify_iteration(const NormalFormDecomposition& d, std::int64_t k,
                                         std::int64_t q_max = kDefaultQmax) {
  if (k < 1) throw InputError("iteration count must be positive");
  IterationClass out;
  out.q_max = q_max;
  for (const auto& [x, mult] : unit_angles(d)) {
    auto rt = rational_turns(x, q_max);
    if (!rt.rational) {
      if (!rt.exact) out.irrational_within_bound = true;
      continue;
    }
    std::int64_t q = rt.q;
    if (q == 1) continue;  // the eigenvalue 1 itself
    if (k % q == 0) out.admissible = false;
  }
  out.neg_interval_count = negative_interval_count(d.rest);
  out.good_if_iterate = !(out.neg_interval_count % 2 == 1 && k % 2 == 0);
  return out;
}

inline IterationClass classify_iteration(const Mat& M, std::int64_t k, std::int64_t q_max = kDefaultQmax) {
  return classify_iteration(decompose_normal_form(M), k, q_max);
}

}  // namespace maslov
