#pragma once

// Points of Hom(pi_1 M, U(n)): relator residual, gradient flow to flat
// representations, block sum, the nonorientable component obstruction, path
// connection between flat points and conjugation-invariant fingerprints.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "flatrep/optimizer.hpp"
#include "flatrep/presentation.hpp"

namespace flatrep {

/// An assignment of one unitary per generator of a surface presentation.
class Representation {
 public:
  Representation(SurfacePresentation presentation, std::vector<Unitary> images)
      : pres_(std::move(presentation)), images_(std::move(images)) {
    if (images_.size() != static_cast<std::size_t>(pres_.generator_count)) {
      throw PreconditionError("representation needs " + std::to_string(pres_.generator_count) +
                              " images, got " + std::to_string(images_.size()));
    }
    rank_ = images_.empty() ? 0 : images_.front().dim();
    for (const auto& u : images_) {
      if (u.dim() != rank_) throw DimensionMismatch("representation images have unequal dimensions");
    }
  }

  /// Every generator sent to the identity of U(n).
  static Representation trivial(const SurfacePresentation& p, Index n) {
    return Representation(p, std::vector<Unitary>(p.generator_count, Unitary::identity(n)));
  }

  const SurfacePresentation& presentation() const noexcept { return pres_; }
  Index rank() const noexcept { return rank_; }
  const std::vector<Unitary>& images() const noexcept { return images_; }
  const Unitary& image(std::size_t i) const { return images_.at(i); }

  friend bool operator==(const Representation& a, const Representation& b) {
    return a.pres_ == b.pres_ && a.images_ == b.images_;
  }

 private:
  SurfacePresentation pres_;
  std::vector<Unitary> images_;
  Index rank_ = 0;
};

inline constexpr double kDefaultTol = 1e-8;
inline constexpr int kDefaultMaxIter = 20000;

/// ||relator(images) - I||_F, the discrete curvature of the representation.
inline double residual(const Representation& rho) {
  if (rho.rank() == 0) return 0.0;
  const auto w = evaluate_word(rho.presentation().relator, rho.images());
  return (w.matrix() - CMatrix::Identity(rho.rank(), rho.rank())).norm();
}

/// Non-convergence of a representation flow: carries the best iterate and its report.
struct FlowFailure {
  Representation best;
  FlowReport report;
};
using RepFlowError = NonConvergence<FlowFailure>;

/// Descends E = residual^2 over U(n)^m until residual <= tol.
/// Throws RepFlowError if `max_iter` steps do not suffice.
inline std::pair<Representation, FlowReport> flow_to_flat(const Representation& start, double tol = kDefaultTol,
                                                           int max_iter = kDefaultMaxIter,
                                                           std::function<void(int, double)> progress = {}) {
  if (!(tol > 0.0)) throw PreconditionError("flow_to_flat: tol must be positive");
  const Word& rel = start.presentation().relator;
  const Index n = start.rank();
  DescentOptions opts;
  opts.tol = tol;
  opts.max_iter = max_iter;
  opts.progress = std::move(progress);
  auto energy = [&](const std::vector<CMatrix>& x) {
    if (n == 0) return 0.0;
    return (evaluate_word_matrices(rel, x, n) - CMatrix::Identity(n, n)).squaredNorm();
  };
  auto gradient = [&](const std::vector<CMatrix>& x) {
    std::vector<CMatrix> g(x.size(), CMatrix::Zero(n, n));
    accumulate_word_gradient(rel, x, n, g);
    return g;
  };
  if (energy(to_matrices(start.images())) <= tol * tol) {
    FlowReport r;
    r.final_residual = residual(start);
    r.energy_trace = {r.final_residual * r.final_residual};
    return {start, r};
  }
  auto res = riemannian_descent(to_matrices(start.images()), energy, gradient, opts);
  std::vector<Unitary> images;
  images.reserve(res.point.size());
  for (auto& m : res.point) images.push_back(Unitary::unchecked(std::move(m)));
  Representation out(start.presentation(), std::move(images));
  if (!res.converged) {
    throw RepFlowError("flow_to_flat did not reach residual " + format_real(tol) + ": " + res.failure,
                       FlowFailure{std::move(out), std::move(res.report)});
  }
  return {std::move(out), std::move(res.report)};
}

/// Generator-wise block sum rho (+) psi.
inline Representation block_sum(const Representation& rho, const Representation& psi) {
  if (!(rho.presentation() == psi.presentation())) {
    throw PreconditionError("block_sum: representations of different presentations");
  }
  std::vector<Unitary> images;
  images.reserve(rho.images().size());
  for (std::size_t i = 0; i < rho.images().size(); ++i) {
    images.push_back(block_diagonal(rho.image(i), psi.image(i)));
  }
  return Representation(rho.presentation(), std::move(images));
}

/// Simultaneous conjugation g rho g^-1.
inline Representation conjugate(const Representation& rho, const Unitary& g) {
  std::vector<Unitary> images;
  images.reserve(rho.images().size());
  for (const auto& u : rho.images()) images.push_back(g * u * g.inverse());
  return Representation(rho.presentation(), std::move(images));
}

inline constexpr double kObstructionResidualTol = 1e-6;
inline constexpr double kObstructionRoundingTol = 1e-4;

/// Component invariant of a flat representation of a nonorientable surface group:
/// the sign of prod_i det rho(x_i). The relator forces the square of that
/// product to be 1. Rank 0 gives +1 (empty product).
inline int obstruction(const Representation& rho) {
  if (rho.presentation().is_orientable()) {
    throw PreconditionError("obstruction is defined for nonorientable presentations only");
  }
  if (rho.rank() == 0) return 1;
  const double r = residual(rho);
  if (!(r <= kObstructionResidualTol)) {
    throw PreconditionError("obstruction needs residual <= 1e-6, got " + format_real(r));
  }
  Complex prod(1.0, 0.0);
  for (const auto& u : rho.images()) prod *= u.matrix().determinant();
  const double to_plus = std::abs(prod - 1.0);
  const double to_minus = std::abs(prod + 1.0);
  const double best = std::min(to_plus, to_minus);
  if (!(best <= kObstructionRoundingTol)) {
    throw PreconditionError("determinant product is " + format_real(best) + " away from +-1");
  }
  return to_plus <= to_minus ? 1 : -1;
}

/// Haar-random start (one independent stream per generator) flowed to residual <= tol.
inline Representation sample_flat(const SurfacePresentation& pres, Index n, std::uint64_t seed,
                                  double tol = kDefaultTol, int max_iter = kDefaultMaxIter) {
  if (n < 1) throw PreconditionError("sample_flat: rank must be >= 1");
  std::vector<Unitary> images;
  images.reserve(pres.generator_count);
  for (int i = 0; i < pres.generator_count; ++i) {
    images.push_back(haar_random(n, detail::mix_seed(seed, static_cast<std::uint64_t>(i))));
  }
  return flow_to_flat(Representation(pres, std::move(images)), tol, max_iter).first;
}

/// A chain of representations from one endpoint to the other.
struct RepPath {
  std::vector<Representation> waypoints;
  double max_residual = 0.0;
  /// Largest per-generator Frobenius distance between consecutive waypoints.
  double max_step = 0.0;
  /// Waypoints whose flow did not reach the requested tolerance.
  int unconverged = 0;
};

struct ConnectOptions {
  int max_iter = kDefaultMaxIter;
  /// Refinement stops once every consecutive pair is within this distance.
  double step_target = 0.25;
  /// Upper bound on the number of waypoints after refinement.
  int max_waypoints = 4096;
  /// Number of times a seeding segment may be halved to avoid the log branch cut.
  int max_doublings = 8;
};

using RefinementExhausted = NonConvergence<RepPath>;

namespace detail {

inline double step_between(const Representation& a, const Representation& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.images().size(); ++i) s = std::max(s, dist_frob(a.image(i), b.image(i)));
  return s;
}

/// Per-generator interpolation; a branch-cut failure is reported as nullopt.
inline std::optional<Representation> interpolate(const Representation& a, const Representation& b, double t) {
  std::vector<Unitary> images;
  images.reserve(a.images().size());
  try {
    for (std::size_t i = 0; i < a.images().size(); ++i) images.push_back(geodesic(a.image(i), b.image(i), t));
  } catch (const BranchCutError&) {
    return std::nullopt;
  }
  return Representation(a.presentation(), std::move(images));
}

inline Representation safe_midpoint(const Representation& a, const Representation& b) {
  std::vector<Unitary> images;
  images.reserve(a.images().size());
  for (std::size_t i = 0; i < a.images().size(); ++i) images.push_back(branch_safe_midpoint(a.image(i), b.image(i)));
  return Representation(a.presentation(), std::move(images));
}

/// Minimum-norm Gauss-Newton correction towards the relator level set.
/// Each image moves by U -> polar(U (I + X)) with X skew-Hermitian, and the
/// stacked X solves J X = -(relator - I) in the least-squares, least-norm
/// sense. Returns nullopt when a step fails to reduce the residual.
inline std::optional<Representation> newton_project(const Representation& start, double tol, int max_steps = 30) {
  const Index n = start.rank();
  const Word& rel = start.presentation().relator;
  const auto gens = static_cast<Index>(start.images().size());
  const Index n2 = n * n;
  std::vector<CMatrix> basis;
  basis.reserve(static_cast<std::size_t>(n2));
  for (Index p = 0; p < n; ++p) {
    CMatrix e = CMatrix::Zero(n, n);
    e(p, p) = Complex(0.0, 1.0);
    basis.push_back(e);
    for (Index q = p + 1; q < n; ++q) {
      CMatrix re = CMatrix::Zero(n, n), im = CMatrix::Zero(n, n);
      re(p, q) = 1.0;
      re(q, p) = -1.0;
      im(p, q) = im(q, p) = Complex(0.0, 1.0);
      basis.push_back(re);
      basis.push_back(im);
    }
  }
  auto x = to_matrices(start.images());
  double res = residual(start);
  for (int step = 0; step < max_steps && res > tol; ++step) {
    const auto& letters = rel.letters();
    const std::size_t len = letters.size();
    std::vector<CMatrix> prefix(len + 1, CMatrix::Identity(n, n)), suffix(len + 1, CMatrix::Identity(n, n));
    for (std::size_t j = 0; j < len; ++j)
      prefix[j + 1] = prefix[j] * letter_matrix(x[static_cast<std::size_t>(letters[j].generator)], letters[j].sign);
    for (std::size_t j = len; j-- > 0;)
      suffix[j] = letter_matrix(x[static_cast<std::size_t>(letters[j].generator)], letters[j].sign) * suffix[j + 1];
    const CMatrix defect = prefix[len] - CMatrix::Identity(n, n);
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(2 * n2, gens * n2);
    for (std::size_t j = 0; j < len; ++j) {
      const auto& l = letters[j];
      const CMatrix& u = x[static_cast<std::size_t>(l.generator)];
      for (Index b = 0; b < n2; ++b) {
        const CMatrix& e = basis[static_cast<std::size_t>(b)];
        const CMatrix dl = l.sign > 0 ? CMatrix(u * e) : CMatrix(-e * u.adjoint());
        const CMatrix dp = prefix[j] * dl * suffix[j + 1];
        const Index col = static_cast<Index>(l.generator) * n2 + b;
        for (Index k = 0; k < n2; ++k) {
          jac(k, col) += dp(k % n, k / n).real();
          jac(n2 + k, col) += dp(k % n, k / n).imag();
        }
      }
    }
    Eigen::VectorXd rhs(2 * n2);
    for (Index k = 0; k < n2; ++k) {
      rhs(k) = -defect(k % n, k / n).real();
      rhs(n2 + k) = -defect(k % n, k / n).imag();
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(jac);
    cod.setThreshold(1e-10);
    const Eigen::VectorXd delta = cod.solve(rhs);
    std::vector<CMatrix> next(x.size());
    for (Index g = 0; g < gens; ++g) {
      CMatrix xg = CMatrix::Zero(n, n);
      for (Index b = 0; b < n2; ++b) xg += delta(g * n2 + b) * basis[static_cast<std::size_t>(b)];
      next[static_cast<std::size_t>(g)] =
          project_unitary(x[static_cast<std::size_t>(g)] * (CMatrix::Identity(n, n) + xg)).matrix();
    }
    const double next_res = (evaluate_word_matrices(rel, next, n) - CMatrix::Identity(n, n)).norm();
    if (!(next_res < res)) return std::nullopt;
    x = std::move(next);
    res = next_res;
  }
  if (!(res <= tol)) return std::nullopt;
  std::vector<Unitary> images;
  images.reserve(x.size());
  for (auto& m : x) images.push_back(Unitary::unchecked(std::move(m)));
  return Representation(start.presentation(), std::move(images));
}

/// Point t of a per-generator one-parameter path from a to b whose angles are
/// chosen so the phase of prod_i det stays unwound: the summed rotation angle
/// is shifted by multiples of 2 pi, one eigenvalue at a time, until its net
/// winding is zero. On a nonorientable surface the principal path can wind
/// the determinant product once around the circle and cross the other sign.
inline Representation unwound_point(const Representation& a, const Representation& b, double t) {
  const std::size_t gens = a.images().size();
  std::vector<UnitarySpectrum> specs;
  std::vector<Eigen::VectorXd> angles;
  double total = 0.0;
  for (std::size_t g = 0; g < gens; ++g) {
    specs.push_back(unitary_spectrum(a.image(g).matrix().adjoint() * b.image(g).matrix()));
    Eigen::VectorXd th(specs.back().eigenvalues.size());
    for (Index i = 0; i < th.size(); ++i) th(i) = std::arg(specs.back().eigenvalues(i));
    total += th.sum();
    angles.push_back(std::move(th));
  }
  const double two_pi = 2.0 * std::numbers::pi;
  for (auto k = std::lround(total / two_pi); k != 0; k += k > 0 ? -1 : 1) {
    std::size_t bg = 0;
    Index bi = -1;
    for (std::size_t g = 0; g < gens; ++g) {
      for (Index i = 0; i < angles[g].size(); ++i) {
        const bool better = bi < 0 || (k > 0 ? angles[g](i) > angles[bg](bi) : angles[g](i) < angles[bg](bi));
        if (better) {
          bg = g;
          bi = i;
        }
      }
    }
    angles[bg](bi) += k > 0 ? -two_pi : two_pi;
  }
  std::vector<Unitary> images;
  images.reserve(gens);
  for (std::size_t g = 0; g < gens; ++g) images.push_back(from_phases(a.image(g), specs[g], t * angles[g]));
  return Representation(a.presentation(), std::move(images));
}

/// Seeds `count` evenly spaced points (endpoints included) between a and b.
/// Where the principal geodesic hits the branch cut, the segment is split at a
/// branch-safe midpoint and each half seeded separately.
inline std::vector<Representation> seed_segment(const Representation& a, const Representation& b, int count,
                                                int doublings_left) {
  std::vector<Representation> pts;
  pts.push_back(a);
  bool ok = true;
  for (int i = 1; i + 1 < count && ok; ++i) {
    auto p = interpolate(a, b, static_cast<double>(i) / (count - 1));
    if (p) {
      pts.push_back(std::move(*p));
    } else {
      ok = false;
    }
  }
  if (ok && count == 2 && !interpolate(a, b, 0.5)) ok = false;
  if (ok) {
    pts.push_back(b);
    return pts;
  }
  if (doublings_left <= 0) {
    throw RefinementExhausted("connect_flat: geodesic seeding hit the branch cut after the doubling cap",
                              RepPath{{a, b}, std::max(residual(a), residual(b)), step_between(a, b), 0});
  }
  const Representation mid = safe_midpoint(a, b);
  const int half = std::max(2, (count + 1) / 2 + 1);
  auto left = seed_segment(a, mid, half, doublings_left - 1);
  auto right = seed_segment(mid, b, half, doublings_left - 1);
  left.pop_back();
  left.insert(left.end(), std::make_move_iterator(right.begin()), std::make_move_iterator(right.end()));
  return left;
}

}  // namespace detail

/// Connects two flat representations by a chain of near-flat waypoints.
///
/// Interior waypoints are seeded along per-generator geodesics and pulled
/// towards flatness with the endpoints pinned, by a least-norm Newton
/// correction or, failing that, the gradient flow. Seeds that do not settle
/// are dropped. Segments longer than
/// `step_target` are then split, the longest-residual midpoint first (ties to
/// the lowest index), and the new midpoint is settled the same way. A path that
/// cannot be refined below the step target within `max_waypoints` raises
/// RefinementExhausted carrying the best path; unconverged waypoints are
/// counted and reflected in `max_residual` rather than treated as a proof of
/// disconnection.
inline RepPath connect_flat(const Representation& rho0, const Representation& rho1, int waypoints = 65,
                            double tol = kDefaultTol, const ConnectOptions& opts = {}) {
  if (!(rho0.presentation() == rho1.presentation()) || rho0.rank() != rho1.rank()) {
    throw PreconditionError("connect_flat: endpoints differ in presentation or rank");
  }
  if (!(tol > 0.0)) throw PreconditionError("connect_flat: tol must be positive");
  for (const auto* r : {&rho0, &rho1}) {
    const double res = residual(*r);
    if (!(res <= tol)) {
      throw PreconditionError("connect_flat: endpoint residual " + format_real(res) + " exceeds tol");
    }
  }
  RepPath path;
  if (rho0 == rho1) {
    path.waypoints = {rho0};
    path.max_residual = residual(rho0);
    return path;
  }
  waypoints = std::max(waypoints, 2);

  // Newton correction first, the flow as fallback; the flag marks convergence.
  auto settle = [&](const Representation& r) -> std::pair<Representation, bool> {
    if (residual(r) <= tol) return {r, true};
    if (auto p = detail::newton_project(r, tol)) return {std::move(*p), true};
    try {
      return {flow_to_flat(r, tol, opts.max_iter).first, true};
    } catch (const RepFlowError& e) {
      return {e.best().best, false};
    }
  };

  // Seeds that fail to settle are dropped; refinement re-splits their segment.
  const bool unwind = !rho0.presentation().is_orientable() && rho0.rank() > 0;
  auto midpoint = [&](const Representation& a, const Representation& b) {
    return unwind ? detail::unwound_point(a, b, 0.5) : detail::safe_midpoint(a, b);
  };
  std::vector<Representation> seeded;
  if (unwind) {
    for (int i = 0; i < waypoints; ++i) {
      seeded.push_back(i == 0               ? rho0
                       : i + 1 == waypoints ? rho1
                                            : detail::unwound_point(rho0, rho1, static_cast<double>(i) / (waypoints - 1)));
    }
  } else {
    seeded = detail::seed_segment(rho0, rho1, waypoints, opts.max_doublings);
  }
  std::vector<Representation> pts{seeded.front()};
  for (std::size_t i = 1; i + 1 < seeded.size(); ++i) {
    auto [p, ok] = settle(seeded[i]);
    if (ok) pts.push_back(std::move(p));
  }
  pts.push_back(seeded.back());
  int unconverged = 0;

  auto finalize = [&](std::vector<Representation> w) {
    RepPath p;
    p.unconverged = unconverged;
    for (std::size_t i = 0; i < w.size(); ++i) {
      p.max_residual = std::max(p.max_residual, residual(w[i]));
      if (i > 0) p.max_step = std::max(p.max_step, detail::step_between(w[i - 1], w[i]));
    }
    p.waypoints = std::move(w);
    return p;
  };

  while (true) {
    // Segment scores: (too long?, midpoint residual) for every consecutive pair.
    std::optional<std::size_t> pick;
    double pick_score = -1.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      if (detail::step_between(pts[i], pts[i + 1]) <= opts.step_target) continue;
      const double score = residual(midpoint(pts[i], pts[i + 1]));
      if (score > pick_score) {
        pick_score = score;
        pick = i;
      }
    }
    if (!pick) break;
    if (static_cast<int>(pts.size()) >= opts.max_waypoints) {
      throw RefinementExhausted("connect_flat: waypoint cap reached before every step fell below " +
                                    format_real(opts.step_target),
                                finalize(std::move(pts)));
    }
    auto [mid, ok] = settle(midpoint(pts[*pick], pts[*pick + 1]));
    if (!ok) ++unconverged;
    pts.insert(pts.begin() + static_cast<std::ptrdiff_t>(*pick) + 1, std::move(mid));
  }
  return finalize(std::move(pts));
}

/// Eigenvalue multiset of a unitary, sorted by principal argument, then real part.
inline std::vector<Complex> sorted_spectrum(const Unitary& u) {
  if (u.dim() == 0) return {};
  Eigen::ComplexEigenSolver<CMatrix> es(u.matrix(), false);
  std::vector<Complex> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(ev.begin(), ev.end(), [](const Complex& a, const Complex& b) {
    const double aa = std::arg(a), ab = std::arg(b);
    if (aa != ab) return aa < ab;
    return a.real() < b.real();
  });
  return ev;
}

using Fingerprint = std::vector<std::vector<Complex>>;

/// Spectra of the probe words: invariant under simultaneous conjugation.
inline Fingerprint fingerprint(const Representation& rho, std::span<const Word> probes) {
  Fingerprint out;
  out.reserve(probes.size());
  for (const auto& w : probes) out.push_back(sorted_spectrum(evaluate_word(w, rho.images())));
  return out;
}

/// The generators and their pairwise products.
inline std::vector<Word> default_probes(const SurfacePresentation& pres) {
  std::vector<Word> probes;
  for (int i = 0; i < pres.generator_count; ++i) probes.push_back(Word::generator(i));
  for (int i = 0; i < pres.generator_count; ++i) {
    for (int j = i + 1; j < pres.generator_count; ++j) probes.push_back(Word::generator(i) * Word::generator(j));
  }
  return probes;
}

/// Distance between two eigenvalue multisets under the best matching.
/// Sorting by argument is discontinuous at -1, so the matching is searched
/// over permutations (n <= 8) or taken greedily beyond that.
inline double multiset_distance(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  const std::size_t n = a.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
      double d = 0.0;
      for (std::size_t i = 0; i < n && d < best; ++i) d = std::max(d, std::abs(a[i] - b[perm[i]]));
      best = std::min(best, d);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
  }
  std::vector<bool> used(n, false);
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t arg = 0;
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (!used[j] && std::abs(a[i] - b[j]) < m) {
        m = std::abs(a[i] - b[j]);
        arg = j;
      }
    }
    used[arg] = true;
    d = std::max(d, m);
  }
  return d;
}

inline double fingerprint_distance(const Fingerprint& a, const Fingerprint& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, multiset_distance(a[i], b[i]));
  return d;
}

}  // namespace flatrep
