#pragma once

// Harder-Narasimhan type combinatorics for rank-n, degree-0 bundles over a
// genus-g surface: admissibility, stratum codimension, bounded enumeration,
// the minimal non-semistable codimension and connectivity bounds.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "flatrep/presentation.hpp"

namespace flatrep {

/// (rank, degree) of one semistable subquotient.
struct RankDegree {
  std::int64_t rank = 0;
  std::int64_t degree = 0;
  friend auto operator<=>(const RankDegree&, const RankDegree&) = default;
};

using HNType = std::vector<RankDegree>;

/// Total rank n, total degree 0, positive ranks and strictly decreasing slopes
/// (compared by cross-multiplication).
inline bool is_admissible(const HNType& seq, std::int64_t n) {
  if (seq.empty()) return false;
  std::int64_t rank = 0, degree = 0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (seq[i].rank <= 0) return false;
    rank += seq[i].rank;
    degree += seq[i].degree;
    if (i > 0 && !(seq[i - 1].degree * seq[i].rank > seq[i].degree * seq[i - 1].rank)) return false;
  }
  return rank == n && degree == 0;
}

inline std::int64_t total_rank(const HNType& mu) {
  std::int64_t n = 0;
  for (const auto& p : mu) n += p.rank;
  return n;
}

/// sum_{i>j} (n_i k_j - n_j k_i)
inline std::int64_t degree_term(const HNType& mu) {
  std::int64_t s = 0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) s += mu[i].rank * mu[j].degree - mu[j].rank * mu[i].degree;
  }
  return s;
}

/// sum_{i>j} n_i n_j
inline std::int64_t rank_term(const HNType& mu) {
  std::int64_t s = 0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) s += mu[i].rank * mu[j].rank;
  }
  return s;
}

/// Complex codimension of the stratum of type mu; the real codimension is twice this.
inline std::int64_t codim_complex(const HNType& mu, std::int64_t g) {
  if (g < 0) throw PreconditionError("codim_complex: genus must be >= 0");
  if (!is_admissible(mu, total_rank(mu))) throw PreconditionError("codim_complex: type is not admissible");
  return degree_term(mu) + (g - 1) * rank_term(mu);
}

/// Every admissible type of total rank n with codim_complex <= max_codim,
/// in lexicographic order.
///
/// Completeness: each pairwise degree term is positive, and the degree term
/// dominates every |k_l| (pair l with the last part when k_l > 0, with the
/// first part when k_l < 0). For g >= 1 the codimension dominates the degree
/// term, so |k_l| <= max_codim; for g = 0 the rank term can subtract at most
/// n(n-1)/2, which widens the degree window by that amount.
inline std::vector<HNType> enumerate_admissible(std::int64_t n, std::int64_t g, std::int64_t max_codim) {
  if (n < 1) throw PreconditionError("enumerate_admissible: n must be >= 1");
  if (g < 0) throw PreconditionError("enumerate_admissible: genus must be >= 0");
  std::vector<HNType> out;
  if (max_codim < 0 && g >= 1) return out;
  const std::int64_t slack = g >= 1 ? 0 : n * (n - 1) / 2;
  const std::int64_t kmax = std::max<std::int64_t>(0, max_codim + slack);

  HNType cur;
  // Partial degree and rank terms are monotone in the prefix, so they prune.
  std::function<void(std::int64_t, std::int64_t, std::int64_t)> rec = [&](std::int64_t rank_left,
                                                                           std::int64_t deg_sum,
                                                                           std::int64_t partial_degree_term) {
    if (rank_left == 0) {
      if (deg_sum == 0 && codim_complex(cur, g) <= max_codim) out.push_back(cur);
      return;
    }
    for (std::int64_t r = 1; r <= rank_left; ++r) {
      for (std::int64_t k = -kmax; k <= kmax; ++k) {
        if (!cur.empty() && !(cur.back().degree * r > k * cur.back().rank)) continue;
        std::int64_t added = 0;
        for (const auto& p : cur) added += r * p.degree - p.rank * k;
        const std::int64_t dt = partial_degree_term + added;
        if (dt > max_codim + slack) continue;
        if (g >= 1) {
          HNType probe = cur;
          probe.push_back({r, k});
          if (dt + (g - 1) * rank_term(probe) > max_codim) continue;
        }
        // The remaining parts have slope below k / r and must cancel the degree.
        const std::int64_t rest = rank_left - r;
        const std::int64_t need = -(deg_sum + k);
        if (rest == 0 && need != 0) continue;
        if (rest > 0 && !(need * r < k * rest)) continue;
        cur.push_back({r, k});
        rec(rest, deg_sum + k, dt);
        cur.pop_back();
      }
    }
  };
  rec(n, 0, 0);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// 2g(n-1) + 2, the claimed minimal real codimension of a non-semistable stratum.
inline std::int64_t min_codim_formula(std::int64_t n, std::int64_t g) { return 2 * g * (n - 1) + 2; }

struct MinCodimResult {
  std::int64_t real_codim = 0;
  std::vector<HNType> argmins;
};

/// Brute-force minimum real codimension over non-semistable types (r >= 2).
/// The search budget is the codimension of ((1,1),(n-1,-1)), an explicit
/// witness, so the closed form is never used to bound the search.
inline MinCodimResult min_nonsemistable_codim(std::int64_t n, std::int64_t g) {
  if (n < 2) throw PreconditionError("rank 1 has no non-semistable stratum");
  if (g < 1) throw PreconditionError("min_nonsemistable_codim needs genus >= 1");
  const HNType witness{{1, 1}, {n - 1, -1}};
  const std::int64_t budget = codim_complex(witness, g);
  MinCodimResult res;
  std::int64_t best = budget;
  for (auto& mu : enumerate_admissible(n, g, budget)) {
    if (mu.size() < 2) continue;
    const std::int64_t c = codim_complex(mu, g);
    if (c < best) {
      best = c;
      res.argmins.clear();
    }
    if (c == best) res.argmins.push_back(std::move(mu));
  }
  res.real_codim = 2 * best;
  return res;
}

struct CodimInequalityReport {
  std::int64_t n = 0;
  std::int64_t degree_term = 0;  ///< must be >= n
  std::int64_t rank_term = 0;    ///< must be >= n - 1
  bool degree_ok = false;
  bool rank_ok = false;
  bool ok() const { return degree_ok && rank_ok; }
};

inline CodimInequalityReport verify_codim_inequalities(const HNType& mu) {
  const std::int64_t n = total_rank(mu);
  if (!is_admissible(mu, n)) throw PreconditionError("verify_codim_inequalities: type is not admissible");
  if (mu.size() < 2) throw PreconditionError("verify_codim_inequalities: needs at least two parts");
  CodimInequalityReport r;
  r.n = n;
  r.degree_term = degree_term(mu);
  r.rank_term = rank_term(mu);
  r.degree_ok = r.degree_term >= n;
  r.rank_ok = r.rank_term >= n - 1;
  return r;
}

struct PartitionMinimum {
  std::vector<std::int64_t> partition;  ///< nondecreasing
  std::int64_t value = 0;
};

/// Minimum of sum_{i>j} p_i p_j over partitions of n into r positive parts,
/// by exhaustive search. Returns the lexicographically first minimizer.
inline PartitionMinimum min_partition_product(std::int64_t n, std::int64_t r) {
  if (r < 2 || r > n) throw PreconditionError("min_partition_product: need 2 <= r <= n");
  PartitionMinimum best;
  best.value = -1;
  std::vector<std::int64_t> cur;
  std::function<void(std::int64_t, std::int64_t)> rec = [&](std::int64_t left, std::int64_t lo) {
    const auto parts_left = r - static_cast<std::int64_t>(cur.size());
    if (parts_left == 0) {
      if (left != 0) return;
      std::int64_t v = 0;
      for (std::size_t i = 0; i < cur.size(); ++i)
        for (std::size_t j = 0; j < i; ++j) v += cur[i] * cur[j];
      if (best.value < 0 || v < best.value) best = {cur, v};
      return;
    }
    for (std::int64_t p = lo; p * parts_left <= left; ++p) {
      cur.push_back(p);
      rec(left - p, p);
      cur.pop_back();
    }
  };
  rec(n, 1);
  return best;
}

/// Connectivity of the space of flat connections in rank n: 2g(n-1) for
/// orientable genus g, and g'(n-1) - 1 for k crosscaps, where g' = k - 1 is the
/// genus of the orientation double cover.
inline std::int64_t connectivity_bound(const SurfacePresentation& pres, std::int64_t n) {
  if (n < 1) throw PreconditionError("connectivity_bound: rank must be >= 1");
  if (!pres.aspherical) throw PreconditionError("connectivity_bound: surface is not aspherical");
  if (pres.is_orientable()) return 2 * pres.surface.genus() * (n - 1);
  return (pres.surface.crosscaps() - 1) * (n - 1) - 1;
}

inline std::string to_string(const HNType& mu) {
  std::string s = "(";
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (i) s += ",";
    s += "(" + std::to_string(mu[i].rank) + "," + std::to_string(mu[i].degree) + ")";
  }
  return s + ")";
}

}  // namespace flatrep
