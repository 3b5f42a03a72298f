#pragma once

// The rotation function rho, mean index, Maslov index of loops, the
// Conley-Zehnder type indices mu-/mu+, and a perturbation oracle for them.

#include <atomic>
#include <functional>
#include <vector>

#include "path.hpp"
#include "splitting.hpp"

namespace maslov {

// ---------------------------------------------------------------- rho

inline cplx rho_from_spectrum(const SpectralData& sd) {
  cplx r = 1.0;
  for (const auto& c : sd.clusters)
    if (c.unit && c.value.imag() != 0.0) r *= std::pow(c.value, c.krein_pos);
  if (sd.m0 % 2 != 0) throw ConsistencyError("odd multiplicity of negative real eigenvalues");
  if ((sd.m0 / 2) % 2 != 0) r = -r;
  return r / std::abs(r);
}

// rho(M) = (-1)^{m0/2} prod over unit eigenvalues lambda != +-1 of lambda^{krein_pos(lambda)}
inline cplx rho(const Mat& M) {
  require_symplectic(M);
  return rho_from_spectrum(spectral_data(M));
}

// Tolerant evaluation for sampling along paths: nearby eigenvalues are merged
// (rho is continuous, so merging cannot change its value).
inline cplx rho_robust(const Mat& M) { return rho_from_spectrum(spectral_data(M, robust_spectral_options())); }

// ---------------------------------------------------------------- winding

struct WindingOptions {
  int min_samples = 8;  // per segment, plus a term proportional to its rotation
  long budget = 2'000'000;  // rho evaluations per call
  double min_step = 1e-12;
};

namespace detail {

class Winder {
 public:
  Winder(std::function<Mat(double)> f, const WindingOptions& opt) : f_(std::move(f)), opt_(opt) {}

  cplx at(double s) {
    for (int attempt = 0; attempt < 6; ++attempt) {
      double u = std::clamp(s + (attempt == 0 ? 0.0 : (attempt % 2 ? 1 : -1) * 1e-9 * attempt), 0.0, 1.0);
      try {
        if (++evals_ > opt_.budget)
          throw RefinementBudget("winding refinement budget exhausted (resolution " + std::to_string(last_step_) + ")");
        return rho_robust(f_(u));
      } catch (const SpectralAmbiguity&) {
        continue;
      }
    }
    throw SpectralAmbiguity("rho could not be evaluated near s = " + std::to_string(s));
  }

  // Total change of arg rho over [0,1], starting from n0 equal steps.
  double run(int n0) {
    double total = 0.0;
    double a = 0.0;
    cplx ra = at(0.0);
    for (int i = 1; i <= n0; ++i) {
      double b = static_cast<double>(i) / n0;
      cplx rb = at(b);
      total += refine(a, b, ra, rb);
      a = b;
      ra = rb;
    }
    return total;
  }

 private:
  double refine(double a, double b, cplx ra, cplx rb) {
    double d = std::arg(rb / ra);
    if (std::abs(d) < kPi / 2) return d;
    last_step_ = b - a;
    if (b - a < opt_.min_step)
      throw RefinementBudget("winding refinement stalled at resolution " + std::to_string(b - a));
    double mid = 0.5 * (a + b);
    cplx rm = at(mid);
    return refine(a, mid, ra, rm) + refine(mid, b, rm, rb);
  }

  std::function<Mat(double)> f_;
  WindingOptions opt_;
  long evals_ = 0;
  double last_step_ = 1.0;
};

inline int initial_samples(const Segment& seg, int base) {
  double rot = 0.0;
  if (auto* s = std::get_if<AtomSegment>(&seg)) {
    for (const auto& a : s->atoms) {
      if (auto* r = std::get_if<RotationAtom>(&a)) rot += std::abs(r->angle);
      if (auto* g = std::get_if<GenericAtom>(&a)) rot += g->cache->phase.cwiseAbs().sum();
    }
  } else if (auto* s = std::get_if<SampledSegment>(&seg)) {
    return std::max(base, static_cast<int>(4 * s->t.size()));
  }
  return base + static_cast<int>(std::ceil(8.0 * rot / kPi));
}

// Atom segments whose atoms never leave Id contribute nothing.
inline bool constant_segment(const Segment& seg) {
  auto* s = std::get_if<AtomSegment>(&seg);
  if (!s) return false;
  for (const auto& a : s->atoms) {
    bool still = std::visit(
        [](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, RotationAtom>) return x.angle == 0.0;
          else if constexpr (std::is_same_v<T, HyperbolicAtom>) return x.rate == 0.0;
          else if constexpr (std::is_same_v<T, ShearAtom>) return x.a == 0.0;
          else return x.target == Mat::Identity(x.target.rows(), x.target.cols());
        },
        a);
    if (!still) return false;
  }
  return true;
}

}  // namespace detail

// Numerical winding of rho along the whole path, divided by pi.
inline double numeric_mean_index(const SymplecticPath& p, const WindingOptions& opt = {}) {
  double total = 0.0;
  for (size_t j = 0; j < p.size(); ++j) {
    if (detail::constant_segment(p.segments()[j])) continue;
    detail::Winder w([&p, j](double s) { return p.local(j, s); }, opt);
    total += w.run(detail::initial_samples(p.segments()[j], opt.min_samples));
  }
  return total / kPi;
}

namespace detail {

// Per-block view of a path whose segments are all atom segments with the
// same block layout.
struct BlockChain {
  std::vector<const Atom*> atoms;  // one per segment
  int dim = 0;
};

inline std::optional<std::vector<BlockChain>> block_chains(const SymplecticPath& p) {
  std::vector<int> layout;
  std::vector<BlockChain> chains;
  for (size_t j = 0; j < p.size(); ++j) {
    auto* seg = std::get_if<AtomSegment>(&p.segments()[j]);
    if (!seg) return std::nullopt;
    std::vector<int> lay;
    for (const auto& a : seg->atoms) lay.push_back(atom_dim(a));
    if (j == 0) {
      layout = lay;
      chains.resize(lay.size());
      for (size_t b = 0; b < lay.size(); ++b) chains[b].dim = lay[b];
    } else if (lay != layout) {
      return std::nullopt;
    }
    for (size_t b = 0; b < lay.size(); ++b) chains[b].atoms.push_back(&seg->atoms[b]);
  }
  return chains;
}

enum class ChainKind { Rotation, Unipotent, Mixed };

inline ChainKind chain_kind(const BlockChain& c) {
  bool rot = true, uni = true;
  for (const Atom* a : c.atoms) {
    bool r = std::holds_alternative<RotationAtom>(*a);
    bool u = std::holds_alternative<HyperbolicAtom>(*a) || std::holds_alternative<ShearAtom>(*a);
    rot = rot && r;
    uni = uni && u;
  }
  if (rot) return ChainKind::Rotation;
  if (uni) return ChainKind::Unipotent;  // upper triangular with positive diagonal throughout
  return ChainKind::Mixed;
}

inline SymplecticPath chain_path(const BlockChain& c) {
  std::vector<Segment> segs;
  for (const Atom* a : c.atoms) segs.emplace_back(AtomSegment{{*a}});
  return SymplecticPath(c.dim, std::move(segs));
}

// Exact total turns of a rotation chain, when every atom carries one.
inline std::optional<QuadSurd> chain_exact_turns(const BlockChain& c) {
  QuadSurd total;
  for (const Atom* a : c.atoms) {
    const auto& r = std::get<RotationAtom>(*a);
    if (!r.turns) return std::nullopt;
    total = total + *r.turns;
  }
  return total;
}

}  // namespace detail

// Mean index: (theta(1) - theta(0)) / pi for a continuous lift of arg rho(Phi(t)).
// Rotation chains contribute analytically; chains of hyperbolic and shear atoms
// stay upper triangular with positive diagonal, so rho = 1 along them.
inline double mean_index(const SymplecticPath& p, const WindingOptions& opt = {}) {
  auto chains = detail::block_chains(p);
  if (!chains) return numeric_mean_index(p, opt);
  double total = 0.0;
  for (const auto& c : *chains) {
    switch (detail::chain_kind(c)) {
      case detail::ChainKind::Rotation: {
        if (auto ex = detail::chain_exact_turns(c)) {
          total += 2.0 * ex->value();
        } else {
          double ang = 0.0;
          for (const Atom* a : c.atoms) ang += std::get<RotationAtom>(*a).angle;
          total += ang / kPi;
        }
        break;
      }
      case detail::ChainKind::Unipotent:
        break;
      case detail::ChainKind::Mixed:
        total += numeric_mean_index(detail::chain_path(c), opt);
        break;
    }
  }
  return total;
}

// Exact turn hints for the endpoint: total turns of each exact rotation chain.
inline std::vector<QuadSurd> exact_turn_hints(const SymplecticPath& p) {
  std::vector<QuadSurd> out;
  auto chains = detail::block_chains(p);
  if (!chains) return out;
  for (const auto& c : *chains)
    if (detail::chain_kind(c) == detail::ChainKind::Rotation)
      if (auto ex = detail::chain_exact_turns(c)) out.push_back(*ex);
  return out;
}

inline long snap_integer(double x, const char* what, double tol = 1e-6) {
  double r = std::nearbyint(x);
  if (std::abs(x - r) > tol)
    throw ConsistencyError(std::string(what) + " is not an integer (value " + std::to_string(x) + ")");
  return static_cast<long>(r);
}

inline int maslov_loop_index(const SymplecticPath& loop) {
  if (!is_loop(loop)) throw InputError("maslov_loop_index needs a loop (endpoint = Id within 1e-8)");
  long twice = snap_integer(mean_index(loop), "mean index of a loop");
  if (twice % 2 != 0) throw ConsistencyError("mean index of a loop is odd");
  return static_cast<int>(twice / 2);
}

// ---------------------------------------------------------------- index report

// Running record of the mean-index identity over every report built.
struct ReportStats {
  std::atomic<long> count{0};
  std::atomic<double> max_residual{0.0};

  void record(double r) {
    ++count;
    double cur = max_residual.load();
    while (r > cur && !max_residual.compare_exchange_weak(cur, r)) {
    }
  }
};

inline ReportStats& report_stats() {
  static ReportStats s;
  return s;
}

struct IndexReport {
  int dim = 0;
  double mean = 0.0;
  int lower = 0;
  int upper = 0;
  int nullity = 0;
  std::pair<int, int> splitting_at_one{0, 0};
  std::vector<SplitEntry> circle_data;  // angles in (0,1)
  int C = 0;
  bool dyn_convex = false;
  double identity_residual = 0.0;
  NormalFormDecomposition endpoint;
  SplittingTable table;

  int half_dim() const { return dim / 2; }
};

// sum over theta in (0, 2pi) of (theta/pi) S-(e^{i theta})
inline double weighted_minus_sum(const SplittingTable& t) {
  double s = 0.0;
  for (const auto& e : t.entries)
    if (e.angle.value > 1e-9) s += 2.0 * e.angle.value * e.s_minus;
  return s;
}

inline IndexReport build_report(int dim, double mean, NormalFormDecomposition endpoint) {
  IndexReport r;
  r.dim = dim;
  r.mean = mean;
  r.endpoint = std::move(endpoint);
  r.table = splitting_table(r.endpoint);
  r.splitting_at_one = r.table.at_one();
  r.C = r.table.C;
  for (const auto& e : r.table.entries)
    if (e.angle.value > 1e-9) r.circle_data.push_back(e);
  double val = mean - r.splitting_at_one.first + r.C - weighted_minus_sum(r.table);
  r.lower = static_cast<int>(snap_integer(val, "mu- from the mean-index identity"));
  r.identity_residual = std::abs(val - r.lower);
  r.nullity = r.table.nullity_at_one();
  r.upper = r.lower + r.nullity;
  r.dyn_convex = r.lower >= r.half_dim() + 2;
  report_stats().record(r.identity_residual);
  return r;
}

inline NormalFormDecomposition endpoint_decomposition(const SymplecticPath& p) {
  NormalFormDecomposition d = decompose_normal_form(p.endpoint());
  annotate_exact_turns(d, exact_turn_hints(p));
  return d;
}

inline IndexReport index_report(const SymplecticPath& p, const WindingOptions& opt = {}) {
  return build_report(p.dim(), mean_index(p, opt), endpoint_decomposition(p));
}

// Non-degenerate index of a Sp(2) path: mu = mean + correction(endpoint), where
// the correction is 1 - theta/pi for an elliptic endpoint with Krein-positive
// eigenvalue e^{i theta}, and 0 for hyperbolic endpoints.
inline double sp2_endpoint_correction(const Mat& B) {
  SpectralData sd = spectral_data(B);
  for (const auto& c : sd.clusters) {
    if (!c.unit) continue;
    if (c.value.imag() == 0.0) {
      if (c.value.real() > 0) throw ConsistencyError("perturbed block still has eigenvalue 1");
      return 0.0;
    }
    if (c.krein_pos == 1) return 1.0 - 2.0 * angle_turns(c.value);
  }
  return 0.0;
}

inline double block_correction(const NormalBlock& b) {
  if (auto* r = std::get_if<RBlock>(&b)) return 1.0 - 2.0 * r->turns.value;
  return 0.0;  // D, N1(-1,.), N2: the endpoint rho is real, the index is the mean
}

inline double det_id_minus(const Mat& M) {
  if (M.rows() == 0) return 1.0;
  return (Mat::Identity(M.rows(), M.cols()) - M).determinant();
}

// (mu-, mu+) as min and max of the index over endpoint perturbations that
// nudge each eigenvalue-1 block by a +-eps rotation or a hyperbolic opening.
inline std::pair<int, int> perturbation_oracle(const SymplecticPath& p, double eps = 1e-4) {
  const double mean = mean_index(p);
  NormalFormDecomposition d = endpoint_decomposition(p);
  const int m = p.half_dim();

  double fixed = 0.0;
  int fixed_sign = det_id_minus(d.rest) > 0 ? 1 : -1;
  std::vector<Mat> ones;
  for (const auto& b : d.blocks) {
    if (auto* n1 = std::get_if<N1Block>(&b); n1 && n1->lambda == 1) {
      ones.push_back(make_normal_form(b));
      continue;
    }
    fixed += block_correction(b);
    if (det_id_minus(make_normal_form(b)) < 0) fixed_sign = -fixed_sign;
  }

  struct Nudge {
    double shift;  // winding of rho along the nudge, over pi
    double corr;
    int sign;
  };
  std::vector<std::vector<Nudge>> options;
  for (const Mat& B : ones) {
    std::vector<Nudge> opts;
    std::vector<std::function<Mat(double)>> fams = {
        [B, eps](double s) -> Mat { return B * rotation2(eps * s); },
        [B, eps](double s) -> Mat { return B * rotation2(-eps * s); },
        [B, eps](double s) -> Mat {
          Mat D = Mat::Zero(2, 2);
          D(0, 0) = std::exp(eps * s);
          D(1, 1) = std::exp(-eps * s);
          return B * D;
        }};
    for (auto& f : fams) {
      detail::Winder w(f, {});
      double shift = w.run(8) / kPi;
      Mat B1 = f(1.0);
      if (nullity_omega(B1, 1.0) != 0) throw ConsistencyError("perturbation failed to remove the eigenvalue 1");
      opts.push_back({shift, sp2_endpoint_correction(B1), det_id_minus(B1) > 0 ? 1 : -1});
    }
    options.push_back(std::move(opts));
  }

  int lo = INT32_MAX, hi = INT32_MIN;
  std::vector<size_t> idx(options.size(), 0);
  while (true) {
    double val = mean + fixed;
    int sign = fixed_sign;
    for (size_t i = 0; i < options.size(); ++i) {
      val += options[i][idx[i]].shift + options[i][idx[i]].corr;
      sign *= options[i][idx[i]].sign;
    }
    int mu = static_cast<int>(snap_integer(val, "perturbed index"));
    int parity = ((mu - m) % 2 == 0) ? 1 : -1;
    if (parity != sign) throw ConsistencyError("perturbed index violates the parity rule");
    lo = std::min(lo, mu);
    hi = std::max(hi, mu);
    size_t i = 0;
    while (i < idx.size() && ++idx[i] == options[i].size()) idx[i++] = 0;
    if (i == idx.size()) break;
  }
  return {lo, hi};
}

}  // namespace maslov
