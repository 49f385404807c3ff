#pragma once

// Projected Riemannian gradient descent on products of unitary groups with
// Armijo backtracking and polar retraction. Shared by the representation flow
// and the lattice Yang-Mills flow.

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "flatrep/unitary.hpp"

namespace flatrep {

struct FlowReport {
  int iterations = 0;
  double final_residual = 0.0;
  /// Energy (squared residual) at the start and after every accepted step.
  std::vector<double> energy_trace;
};

struct DescentOptions {
  double tol = 1e-8;  ///< stop once sqrt(energy) <= tol
  int max_iter = 20000;
  double armijo_c = 1e-4;
  double shrink = 0.5;
  double initial_step = 1.0;
  double min_step = 1e-30;
  /// Called with (iteration, energy) every `progress_every` iterations.
  std::function<void(int, double)> progress;
  int progress_every = 1000;
};

struct DescentResult {
  std::vector<CMatrix> point;
  FlowReport report;
  bool converged = false;
  std::string failure;
};

namespace detail {

/// Riemannian gradient X skew(X^H G) of each factor, in place of G.
inline double riemannian_gradient(const std::vector<CMatrix>& point, std::vector<CMatrix>& grads) {
  double norm2 = 0.0;
  for (std::size_t i = 0; i < point.size(); ++i) {
    if (point[i].size() == 0) continue;
    grads[i] = point[i] * skew_part(point[i].adjoint() * grads[i]);
    norm2 += grads[i].squaredNorm();
  }
  return norm2;
}

}  // namespace detail

/// Minimizes `energy` over U(n)^m starting from `start`.
///
/// `energy(point) -> double` and `gradient(point) -> vector<CMatrix>` (the
/// Euclidean gradient) are evaluated on plain matrices. Every accepted step
/// satisfies the Armijo condition, so the energy trace is non-increasing.
template <class Energy, class Gradient>
DescentResult riemannian_descent(std::vector<CMatrix> start, Energy&& energy, Gradient&& gradient,
                                 const DescentOptions& opts) {
  DescentResult res;
  res.point = std::move(start);
  double e = energy(res.point);
  res.report.energy_trace.push_back(e);
  const double tol2 = opts.tol * opts.tol;
  auto finish = [&](bool ok, std::string why) {
    res.converged = ok;
    res.failure = std::move(why);
    res.report.final_residual = std::sqrt(e);
    return std::move(res);
  };
  if (e <= tol2) return finish(true, {});

  std::vector<CMatrix> trial(res.point.size());
  for (int it = 1; it <= opts.max_iter; ++it) {
    auto grads = gradient(res.point);
    const double g2 = detail::riemannian_gradient(res.point, grads);
    if (!(g2 > 0.0)) return finish(false, "gradient vanished at a non-flat critical point");

    double step = opts.initial_step;
    double e_trial = std::numeric_limits<double>::infinity();
    bool accepted = false;
    while (step >= opts.min_step) {
      try {
        for (std::size_t i = 0; i < res.point.size(); ++i) {
          trial[i] = res.point[i].size() == 0 ? res.point[i]
                                              : project_unitary(res.point[i] - step * grads[i]).matrix();
        }
        e_trial = energy(trial);
      } catch (const SingularityError&) {
        e_trial = std::numeric_limits<double>::infinity();
      }
      if (e_trial <= e - opts.armijo_c * step * g2) {
        accepted = true;
        break;
      }
      step *= opts.shrink;
    }
    if (!accepted) return finish(false, "line search failed to find a decreasing step");

    std::swap(res.point, trial);
    e = e_trial;
    res.report.iterations = it;
    res.report.energy_trace.push_back(e);
    if (opts.progress && opts.progress_every > 0 && it % opts.progress_every == 0) opts.progress(it, e);
    if (e <= tol2) return finish(true, {});
  }
  return finish(false, "iteration budget of " + std::to_string(opts.max_iter) + " exhausted");
}

}  // namespace flatrep
