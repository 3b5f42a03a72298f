#pragma once

// Paths Phi : [0,1] -> Sp(2m) with Phi(0) = Id.  A path is a concatenation of
// segments; each segment is either a diamond-sum of closed-form atoms or a
// sampled grid.  Segment j runs over [j/S, (j+1)/S] and evaluates as
// seg_j(s) * Phi(j/S).

#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "sp_core.hpp"

namespace maslov {

struct RotationAtom {
  double angle = 0.0;             // R(angle * s)
  std::optional<QuadSurd> turns;  // exact angle / 2pi when known
};
struct HyperbolicAtom {
  double rate = 0.0;  // diag(e^{rate s}, e^{-rate s})
};
struct ShearAtom {
  double a = 0.0;  // [[1, a s], [0, 1]]
};

// Polar interpolation Id -> target: Q(s) P^s with target = Q P.
struct GenericAtom {
  struct Cache {
    CMat W;                 // eigenvectors of the unitary part
    Eigen::VectorXd phase;  // its eigen-phases in (-pi, pi]
    Mat V;                  // eigenvectors of target^T target
    Eigen::VectorXd logw;   // log of its eigenvalues
  };
  Mat target;
  std::shared_ptr<const Cache> cache;

  explicit GenericAtom(Mat m) : target(std::move(m)) {
    require_symplectic(target, "generic atom target");
    auto c = std::make_shared<Cache>();
    const Eigen::Index n = target.rows(), m2 = n / 2;
    Eigen::SelfAdjointEigenSolver<Mat> es(target.transpose() * target);
    c->V = es.eigenvectors();
    c->logw = es.eigenvalues().array().log();
    Mat Pinv = c->V * (-0.5 * c->logw.array()).exp().matrix().asDiagonal() * c->V.transpose();
    Mat Q = target * Pinv;
    CMat U(m2, m2);
    U.real() = Q.topLeftCorner(m2, m2);
    U.imag() = Q.bottomLeftCorner(m2, m2);
    Eigen::ComplexSchur<CMat> cs(U);
    c->W = cs.matrixU();
    c->phase.resize(m2);
    for (Eigen::Index i = 0; i < m2; ++i) c->phase(i) = std::arg(cs.matrixT()(i, i));
    cache = std::move(c);
  }

  Mat eval(double s) const {
    const Eigen::Index n = target.rows(), m2 = n / 2;
    CVec ph(m2);
    for (Eigen::Index i = 0; i < m2; ++i) ph(i) = std::polar(1.0, s * cache->phase(i));
    CMat Us = cache->W * ph.asDiagonal() * cache->W.adjoint();
    Mat Q(n, n);
    Q.topLeftCorner(m2, m2) = Us.real();
    Q.topRightCorner(m2, m2) = -Us.imag();
    Q.bottomLeftCorner(m2, m2) = Us.imag();
    Q.bottomRightCorner(m2, m2) = Us.real();
    Mat P = cache->V * (0.5 * s * cache->logw.array()).exp().matrix().asDiagonal() * cache->V.transpose();
    return Q * P;
  }
};

using Atom = std::variant<RotationAtom, HyperbolicAtom, ShearAtom, GenericAtom>;

inline int atom_dim(const Atom& a) {
  if (auto* g = std::get_if<GenericAtom>(&a)) return static_cast<int>(g->target.rows());
  return 2;
}

inline Mat atom_eval(const Atom& a, double s) {
  return std::visit(
      [s](const auto& at) -> Mat {
        using T = std::decay_t<decltype(at)>;
        if constexpr (std::is_same_v<T, RotationAtom>) {
          return rotation2(at.angle * s);
        } else if constexpr (std::is_same_v<T, HyperbolicAtom>) {
          Mat D = Mat::Zero(2, 2);
          D(0, 0) = std::exp(at.rate * s);
          D(1, 1) = std::exp(-at.rate * s);
          return D;
        } else if constexpr (std::is_same_v<T, ShearAtom>) {
          Mat S = Mat::Identity(2, 2);
          S(0, 1) = at.a * s;
          return S;
        } else {
          return at.eval(s);
        }
      },
      a);
}

inline RotationAtom rotation_atom(double angle) { return RotationAtom{angle, std::nullopt}; }
inline RotationAtom rotation_atom_turns(const QuadSurd& turns) {
  return RotationAtom{kTwoPi * turns.value(), turns};
}

struct AtomSegment {
  std::vector<Atom> atoms;  // diamond-sum, in order

  int dim() const {
    int d = 0;
    for (const auto& a : atoms) d += atom_dim(a);
    return d;
  }
  Mat eval(double s) const {
    Mat r(0, 0);
    for (const auto& a : atoms) r = r.rows() == 0 ? atom_eval(a, s) : diamond(r, atom_eval(a, s));
    return r;
  }
};

// Sampled segment: nodes 0 = t_0 < ... < t_K = 1 with M_0 = Id.  Between nodes
// the path follows the polar interpolation M_i * G_i(u), G_i : Id -> M_i^{-1} M_{i+1}.
struct SampledSegment {
  std::vector<double> t;
  std::vector<Mat> m;
  std::vector<GenericAtom> steps;

  SampledSegment(std::vector<double> times, std::vector<Mat> mats) : t(std::move(times)), m(std::move(mats)) {
    if (t.size() < 2 || t.size() != m.size()) throw InputError("sampled path needs >= 2 nodes with matrices");
    if (std::abs(t.front()) > 1e-12 || std::abs(t.back() - 1.0) > 1e-12)
      throw InputError("sampled path time grid must run from 0 to 1");
    for (size_t i = 1; i < t.size(); ++i)
      if (!(t[i] > t[i - 1])) throw InputError("sampled path time grid must be strictly increasing");
    const Eigen::Index n = m.front().rows();
    for (const auto& x : m) {
      if (x.rows() != n) throw InputError("sampled path matrices differ in size");
      require_symplectic(x, "sampled path node");
    }
    if ((m.front() - Mat::Identity(n, n)).norm() > 1e-9) throw InputError("sampled path must start at Id");
    m.front() = Mat::Identity(n, n);
    for (size_t i = 0; i + 1 < m.size(); ++i) steps.emplace_back(symplectic_inverse(m[i]) * m[i + 1]);
  }

  int dim() const { return static_cast<int>(m.front().rows()); }
  size_t locate(double s) const {
    size_t i = std::upper_bound(t.begin(), t.end(), s) - t.begin();
    if (i == 0) i = 1;
    if (i >= t.size()) i = t.size() - 1;
    return i - 1;
  }
  Mat eval(double s) const {
    size_t i = locate(s);
    double u = (s - t[i]) / (t[i + 1] - t[i]);
    return m[i] * steps[i].eval(std::clamp(u, 0.0, 1.0));
  }
};

using Segment = std::variant<AtomSegment, SampledSegment>;

inline int segment_dim(const Segment& s) {
  return std::visit([](const auto& x) { return x.dim(); }, s);
}
inline Mat segment_eval(const Segment& s, double u) {
  return std::visit([u](const auto& x) { return x.eval(u); }, s);
}

class SymplecticPath {
 public:
  SymplecticPath() = default;
  SymplecticPath(int dim, std::vector<Segment> segments) : dim_(dim), segs_(std::move(segments)) {
    if (dim < 2 || dim % 2 != 0) throw InputError("path dimension must be a positive even integer");
    if (segs_.empty()) throw InputError("path needs at least one segment");
    prefix_.reserve(segs_.size() + 1);
    prefix_.push_back(Mat::Identity(dim, dim));
    for (const auto& s : segs_) {
      if (segment_dim(s) != dim) throw InputError("segment dimension differs from path dimension");
      prefix_.push_back(segment_eval(s, 1.0) * prefix_.back());
    }
    if (!is_symplectic(prefix_.back(), 1e-8)) throw InputError("path endpoint is not symplectic");
  }

  int dim() const { return dim_; }
  int half_dim() const { return dim_ / 2; }
  const std::vector<Segment>& segments() const { return segs_; }
  size_t size() const { return segs_.size(); }
  const Mat& prefix(size_t j) const { return prefix_[j]; }
  const Mat& endpoint() const { return prefix_.back(); }

  // Phi on segment j at local time s in [0,1].
  Mat local(size_t j, double s) const { return segment_eval(segs_[j], s) * prefix_[j]; }

  Mat operator()(double t) const {
    const double S = static_cast<double>(segs_.size());
    double x = std::clamp(t, 0.0, 1.0) * S;
    auto j = static_cast<size_t>(std::min(std::floor(x), S - 1));
    return local(j, x - static_cast<double>(j));
  }

 private:
  int dim_ = 0;
  std::vector<Segment> segs_;
  std::vector<Mat> prefix_;
};

// ---------------------------------------------------------------- constructors

inline SymplecticPath atom_path(const std::vector<Atom>& atoms) {
  AtomSegment seg{atoms};
  return SymplecticPath(seg.dim(), {Segment(seg)});
}

inline SymplecticPath rotation_path(double angle) { return atom_path({rotation_atom(angle)}); }

inline SymplecticPath identity_path(int dim) {
  std::vector<Atom> atoms(dim / 2, Atom(rotation_atom(0.0)));
  return atom_path(atoms);
}

inline SymplecticPath concatenate(const SymplecticPath& a, const SymplecticPath& b) {
  if (a.dim() != b.dim()) throw InputError("concatenation of paths of different dimension");
  auto segs = a.segments();
  segs.insert(segs.end(), b.segments().begin(), b.segments().end());
  return SymplecticPath(a.dim(), std::move(segs));
}

inline bool is_loop(const SymplecticPath& p, double tol = 1e-8) {
  return (p.endpoint() - Mat::Identity(p.dim(), p.dim())).norm() <= tol;
}

// Phi followed by a loop based at Id (the loop acts as psi(t) Phi(1)).
inline SymplecticPath append_loop(const SymplecticPath& p, const SymplecticPath& loop) {
  if (!is_loop(loop)) throw InputError("appended path is not a loop");
  return concatenate(p, loop);
}

// The k-th iteration: segments of Phi repeated k times, the j-th copy acting
// as Phi(t) Phi(1)^j.
inline SymplecticPath power_path(const SymplecticPath& p, int k) {
  if (k < 1) throw InputError("iteration count must be positive");
  std::vector<Segment> segs;
  segs.reserve(p.size() * static_cast<size_t>(k));
  for (int j = 0; j < k; ++j) segs.insert(segs.end(), p.segments().begin(), p.segments().end());
  return SymplecticPath(p.dim(), std::move(segs));
}

// Diamond-sum of two atom-segment paths with the same number of segments.
inline SymplecticPath diamond_path(const SymplecticPath& a, const SymplecticPath& b) {
  if (a.size() != b.size()) throw InputError("diamond of paths needs equal segment counts");
  std::vector<Segment> segs;
  for (size_t j = 0; j < a.size(); ++j) {
    auto* sa = std::get_if<AtomSegment>(&a.segments()[j]);
    auto* sb = std::get_if<AtomSegment>(&b.segments()[j]);
    if (!sa || !sb) throw InputError("diamond of paths needs atom segments");
    AtomSegment s = *sa;
    s.atoms.insert(s.atoms.end(), sb->atoms.begin(), sb->atoms.end());
    segs.emplace_back(std::move(s));
  }
  return SymplecticPath(a.dim() + b.dim(), std::move(segs));
}

// A path (one segment) carrying a single generic atom from Id to M.
inline SymplecticPath generic_path(const Mat& M) { return atom_path({GenericAtom(M)}); }

}  // namespace maslov
