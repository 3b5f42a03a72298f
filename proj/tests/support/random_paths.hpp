#pragma once

// Random diamond-assembled paths for property tests.  Every block is a chain
// of one atom per segment, so the analytic per-block machinery applies and
// rotation blocks keep exact angles.

#include <random>

#include "maslov/path.hpp"

namespace maslov::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& g, double a, double b) { return std::uniform_real_distribution<double>(a, b)(g); }
inline int pick(Rng& g, int a, int b) { return std::uniform_int_distribution<int>(a, b)(g); }

// Random symplectic matrix close to the identity (product of shears and rotations).
inline Mat random_conjugator(Rng& g, int dim, double size = 0.4) {
  const int m = dim / 2;
  Mat Q = Mat::Identity(dim, dim);
  for (int r = 0; r < 3; ++r) {
    Mat S = Mat::Zero(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) S(i, j) = S(j, i) = uniform(g, -size, size);
    Mat L = Mat::Identity(dim, dim);
    if (r % 2 == 0) L.topRightCorner(m, m) = S;
    else L.bottomLeftCorner(m, m) = S;
    Mat O = Mat::Identity(dim, dim);
    for (int i = 0; i < m; ++i) {
      double a = uniform(g, -1.0, 1.0);
      O(i, i) = std::cos(a);
      O(i, m + i) = -std::sin(a);
      O(m + i, i) = std::sin(a);
      O(m + i, m + i) = std::cos(a);
    }
    Q = Q * L * O;
  }
  return Q;
}

// Exact angle in turns: a small-denominator rational or a quadratic irrational.
inline std::int64_t random_radicand(Rng& g) {
  static const std::int64_t radicands[] = {2, 3, 5, 7};
  return radicands[pick(g, 0, 3)];
}

inline QuadSurd random_turns(Rng& g, bool allow_rational = true, std::int64_t radicand = 0) {
  if (radicand == 0) radicand = random_radicand(g);
  if (allow_rational && pick(g, 0, 2) == 0) {
    int q = pick(g, 1, 8);
    int p = pick(g, -2 * q, 3 * q);
    return QuadSurd(Rational(p, q));
  }
  Rational a(pick(g, -10, 10), pick(g, 1, 7));
  Rational b(pick(g, 1, 5) * (pick(g, 0, 1) ? 1 : -1), pick(g, 2, 9));
  return {a, b, radicand};
}

enum class BlockKind { Rotation, Hyperbolic, Shear, GenericD, GenericN1, GenericN2, GenericQuad };

struct PathOptions {
  bool nice = false;            // rotations, shears and hyperbolic atoms only
  int max_segs = 2;
  bool allow_rational = true;   // rational rotation angles (degenerate iterates)
  bool conjugate = true;        // conjugate generic normal forms by a random symplectic Q
};

struct RandomBlock {
  BlockKind kind;
  std::vector<Atom> atoms;  // one per segment
};

// A block whose chain has `segs` atoms.
inline RandomBlock random_block_of(Rng& g, BlockKind kind, int segs, const PathOptions& o = {}) {
  const bool allow_rational = o.allow_rational;
  auto conj = [&](const Mat& T, double size) -> Mat {
    if (!o.conjugate) return T;
    Mat Q = random_conjugator(g, static_cast<int>(T.rows()), size);
    return Q * T * symplectic_inverse(Q);
  };
  RandomBlock b;
  b.kind = kind;
  auto pad_identity = [&](Atom first, int dim) {
    b.atoms.push_back(std::move(first));
    for (int s = 1; s < segs; ++s) b.atoms.emplace_back(GenericAtom(Mat::Identity(dim, dim)));
  };
  switch (b.kind) {
    case BlockKind::Rotation: {
      std::int64_t r = random_radicand(g);  // one quadratic field per chain
      for (int s = 0; s < segs; ++s) b.atoms.emplace_back(rotation_atom_turns(random_turns(g, allow_rational, r)));
      break;
    }
    case BlockKind::Hyperbolic:
      for (int s = 0; s < segs; ++s) b.atoms.emplace_back(HyperbolicAtom{(pick(g, 0, 1) ? 1 : -1) * uniform(g, 0.02, 0.12)});
      break;
    case BlockKind::Shear: {
      double a = pick(g, 0, 1) ? 1.0 : -1.0;
      for (int s = 0; s < segs; ++s) b.atoms.emplace_back(ShearAtom{a * uniform(g, 0.2, 1.0)});
      break;
    }
    case BlockKind::GenericD: {
      double lam = -uniform(g, 1.05, 1.25);
      Mat T = make_normal_form(DBlock{pick(g, 0, 1) ? lam : 1.0 / lam});
      pad_identity(GenericAtom(conj(T, 0.4)), 2);
      break;
    }
    case BlockKind::GenericN1: {
      Mat T = make_normal_form(N1Block{-1, pick(g, -1, 1)});
      pad_identity(GenericAtom(conj(T, 0.4)), 2);
      break;
    }
    case BlockKind::GenericN2: {
      QuadSurd t = random_turns(g, false).frac();
      if (t.value() < 0.02 || t.value() > 0.98 || std::abs(t.value() - 0.5) < 0.02) t = QuadSurd(Rational(0), Rational(1, 5), 2);
      Mat T = make_normal_form(canonical_n2(Turns(t), pick(g, 0, 1) == 1));
      pad_identity(GenericAtom(conj(T, 0.15)), 4);
      break;
    }
    case BlockKind::GenericQuad: {
      // A (+) A^{-T} with complex eigenvalues off the circle
      double r = uniform(g, 1.05, 1.25), th = uniform(g, 0.3, 2.8);
      Mat A(2, 2);
      A << r * std::cos(th), -r * std::sin(th), r * std::sin(th), r * std::cos(th);
      Mat T = Mat::Zero(4, 4);
      T.topLeftCorner(2, 2) = A;
      T.bottomRightCorner(2, 2) = A.inverse().transpose();
      pad_identity(GenericAtom(T), 4);
      break;
    }
  }
  return b;
}

inline RandomBlock random_block(Rng& g, int segs, const PathOptions& o = {}) {
  int k = o.nice ? pick(g, 0, 2) : pick(g, 0, 6);
  return random_block_of(g, static_cast<BlockKind>(k), segs, o);
}

// Path in Sp(2m) built from blocks of total half-dimension m.
inline SymplecticPath random_path(Rng& g, int m, const PathOptions& o = {}) {
  const int segs = pick(g, 1, o.max_segs);
  std::vector<RandomBlock> blocks;
  int used = 0;
  while (used < m) {
    RandomBlock b = random_block(g, segs, o);
    int d = atom_dim(b.atoms.front()) / 2;
    if (used + d > m) continue;
    used += d;
    blocks.push_back(std::move(b));
  }
  std::vector<Segment> out;
  for (int s = 0; s < segs; ++s) {
    AtomSegment seg;
    for (const auto& b : blocks) seg.atoms.push_back(b.atoms[s]);
    out.emplace_back(std::move(seg));
  }
  return SymplecticPath(2 * m, std::move(out));
}

// Path whose endpoint is degenerate: at least one block ends with eigenvalue 1.
inline SymplecticPath random_degenerate_path(Rng& g, int m) {
  std::vector<Atom> atoms;
  int used = 0;
  bool has_one = false;
  while (used < m) {
    int c = pick(g, 0, 4);
    if (!has_one && used == m - 1) c = pick(g, 0, 1);
    switch (c) {
      case 0:  // shear: N1(1, +-1)
        atoms.emplace_back(ShearAtom{pick(g, 0, 1) ? 1.0 : -1.0});
        has_one = true;
        break;
      case 1:  // full turns: identity endpoint
        atoms.emplace_back(rotation_atom_turns(QuadSurd(Rational(pick(g, -3, 3)))));
        has_one = true;
        break;
      case 2:
        atoms.emplace_back(rotation_atom_turns(random_turns(g)));
        break;
      case 3:
        atoms.emplace_back(HyperbolicAtom{(pick(g, 0, 1) ? 1 : -1) * uniform(g, 0.02, 0.12)});
        break;
      default: {
        Mat T = make_normal_form(N1Block{-1, pick(g, -1, 1)});
        atoms.emplace_back(GenericAtom(T));
      }
    }
    ++used;
  }
  return atom_path(atoms);
}

}  // namespace maslov::testing
