#pragma once

// Splitting numbers S+-(omega) read off the basic normal forms, summed over
// the diamond decomposition; C(M) = sum of S- over omega != 1.

#include <vector>

#include "sp_core.hpp"

namespace maslov {

struct SplitEntry {
  Turns angle;  // omega = exp(2 pi i angle), angle in [0,1)
  int s_plus = 0;
  int s_minus = 0;
  int nullity = 0;  // nu_omega
};

struct SplittingTable {
  std::vector<SplitEntry> entries;  // sorted by angle
  int C = 0;

  const SplitEntry* find(double turns, double tol = 1e-9) const {
    for (const auto& e : entries) {
      double d = std::abs(e.angle.value - turns);
      d = std::min(d, 1.0 - d);
      if (d <= tol) return &e;
    }
    return nullptr;
  }
  std::pair<int, int> at_one() const {
    const SplitEntry* e = find(0.0);
    return e ? std::pair{e->s_plus, e->s_minus} : std::pair{0, 0};
  }
  int nullity_at_one() const {
    const SplitEntry* e = find(0.0);
    return e ? e->nullity : 0;
  }
};

namespace detail {

inline Turns exact_turns(std::int64_t p, std::int64_t q) { return Turns(QuadSurd(Rational(p, q))); }

inline void add_entry(std::vector<SplitEntry>& out, const Turns& angle, int sp, int sm, int nu) {
  for (auto& e : out) {
    double d = std::abs(e.angle.value - angle.value);
    if (std::min(d, 1.0 - d) <= 1e-9) {
      e.s_plus += sp;
      e.s_minus += sm;
      e.nullity += nu;
      if (!e.angle.exact && angle.exact) e.angle = angle;
      return;
    }
  }
  out.push_back({angle, sp, sm, nu});
}

}  // namespace detail

// Contribution of a single basic normal form, per the table
//   N1(1,a): (1,1) if a >= 0, else (0,0)        at omega = 1
//   N1(-1,a): (1,1) if a <= 0, else (0,0)       at omega = -1
//   R(theta): (0,1) at e^{i theta}, (1,0) at e^{-i theta}
//   N2(omega,b): (1,1) at omega and conj(omega) if non-trivial, (0,0) if trivial
//   D(lambda): nothing on the circle
inline void block_splitting(const NormalBlock& b, std::vector<SplitEntry>& out) {
  std::visit(
      [&](const auto& blk) {
        using T = std::decay_t<decltype(blk)>;
        if constexpr (std::is_same_v<T, N1Block>) {
          int nu = blk.a == 0 ? 2 : 1;
          if (blk.lambda == 1) {
            int s = blk.a >= 0 ? 1 : 0;
            detail::add_entry(out, detail::exact_turns(0, 1), s, s, nu);
          } else {
            int s = blk.a <= 0 ? 1 : 0;
            detail::add_entry(out, detail::exact_turns(1, 2), s, s, nu);
          }
        } else if constexpr (std::is_same_v<T, RBlock>) {
          detail::add_entry(out, blk.turns, 0, 1, 1);
          detail::add_entry(out, blk.turns.complement(), 1, 0, 1);
        } else if constexpr (std::is_same_v<T, N2Block>) {
          int s = n2_trivial(blk) ? 0 : 1;
          detail::add_entry(out, blk.turns, s, s, 1);
          detail::add_entry(out, blk.turns.complement(), s, s, 1);
        }
      },
      b);
}

inline SplittingTable splitting_table(const NormalFormDecomposition& d) {
  SplittingTable t;
  for (const auto& b : d.blocks) block_splitting(b, t.entries);
  std::sort(t.entries.begin(), t.entries.end(),
            [](const SplitEntry& a, const SplitEntry& b) { return a.angle.value < b.angle.value; });
  for (const auto& e : t.entries)
    if (e.angle.value > 1e-9) t.C += e.s_minus;
  return t;
}

// (S+, S-) at omega = exp(2 pi i turns).
inline std::pair<int, int> splitting_numbers(const NormalFormDecomposition& d, double turns) {
  turns -= std::floor(turns);
  SplittingTable t = splitting_table(d);
  for (const auto& e : t.entries) {
    double dist = std::abs(e.angle.value - turns);
    dist = std::min(dist, 1.0 - dist);
    if (dist <= 1e-9) return {e.s_plus, e.s_minus};
    if (dist < 1e-6)
      throw SpectralAmbiguity("probe angle " + std::to_string(turns) + " is ambiguous relative to block angle " +
                              std::to_string(e.angle.value));
  }
  return {0, 0};
}

inline std::pair<int, int> splitting_numbers(const NormalFormDecomposition& d, cplx omega) {
  return splitting_numbers(d, angle_turns(omega));
}

}  // namespace maslov
