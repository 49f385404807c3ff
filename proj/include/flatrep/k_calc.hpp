#pragma once

// Exact finitely generated abelian group arithmetic (Smith normal form,
// cokernels, exactness of chains) and the K-group and stable-moduli tables of
// compact aspherical surfaces.

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <initializer_list>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "flatrep/presentation.hpp"

namespace flatrep {

using Integer = boost::multiprecision::cpp_int;

/// Dense integer matrix, row-major.
class IntMatrix {
 public:
  IntMatrix() = default;
  IntMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  IntMatrix(std::initializer_list<std::initializer_list<long long>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    for (const auto& r : rows) {
      if (r.size() != cols_) throw DimensionMismatch("IntMatrix: ragged initializer");
      for (long long v : r) data_.emplace_back(v);
    }
  }

  static IntMatrix identity(std::size_t n) {
    IntMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }

  static IntMatrix column(std::initializer_list<long long> values) {
    IntMatrix m(values.size(), 1);
    std::size_t i = 0;
    for (long long v : values) m(i++, 0) = v;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  Integer& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Integer& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  bool is_zero() const {
    return std::all_of(data_.begin(), data_.end(), [](const Integer& v) { return v == 0; });
  }

  IntMatrix transpose() const {
    IntMatrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  friend IntMatrix operator*(const IntMatrix& a, const IntMatrix& b) {
    if (a.cols_ != b.rows_) throw DimensionMismatch("IntMatrix product shape mismatch");
    IntMatrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        if (a(i, k) == 0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += a(i, k) * b(k, j);
      }
    return out;
  }

  /// [a | b]
  friend IntMatrix hconcat(const IntMatrix& a, const IntMatrix& b) {
    if (a.rows_ != b.rows_) throw DimensionMismatch("hconcat: row mismatch");
    IntMatrix out(a.rows_, a.cols_ + b.cols_);
    for (std::size_t r = 0; r < a.rows_; ++r) {
      for (std::size_t c = 0; c < a.cols_; ++c) out(r, c) = a(r, c);
      for (std::size_t c = 0; c < b.cols_; ++c) out(r, a.cols_ + c) = b(r, c);
    }
    return out;
  }

  friend bool operator==(const IntMatrix&, const IntMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Integer> data_;
};

/// Determinant by fraction-free (Bareiss) elimination.
inline Integer determinant(IntMatrix m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("determinant of a non-square matrix");
  const std::size_t n = m.rows();
  if (n == 0) return 1;
  Integer sign = 1, prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (m(k, k) == 0) {
      std::size_t swap = k + 1;
      while (swap < n && m(swap, k) == 0) ++swap;
      if (swap == n) return 0;
      for (std::size_t c = 0; c < n; ++c) std::swap(m(k, c), m(swap, c));
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j) m(i, j) = (m(i, j) * m(k, k) - m(i, k) * m(k, j)) / prev;
    prev = m(k, k);
  }
  return sign * m(n - 1, n - 1);
}

/// U * M * V = D with U, V unimodular and D diagonal with d_1 | d_2 | ... (d_i >= 0).
struct SmithForm {
  IntMatrix d, u, v;

  std::vector<Integer> diagonal() const {
    std::vector<Integer> out;
    for (std::size_t i = 0; i < std::min(d.rows(), d.cols()); ++i) out.push_back(d(i, i));
    return out;
  }
  std::size_t rank() const {
    std::size_t r = 0;
    for (const auto& x : diagonal()) r += (x != 0);
    return r;
  }
};

namespace detail {

inline void swap_rows(IntMatrix& m, std::size_t a, std::size_t b) {
  if (a == b) return;
  for (std::size_t c = 0; c < m.cols(); ++c) std::swap(m(a, c), m(b, c));
}
inline void swap_cols(IntMatrix& m, std::size_t a, std::size_t b) {
  if (a == b) return;
  for (std::size_t r = 0; r < m.rows(); ++r) std::swap(m(r, a), m(r, b));
}
// row[dst] += q * row[src]
inline void add_row(IntMatrix& m, std::size_t dst, std::size_t src, const Integer& q) {
  for (std::size_t c = 0; c < m.cols(); ++c) m(dst, c) += q * m(src, c);
}
inline void add_col(IntMatrix& m, std::size_t dst, std::size_t src, const Integer& q) {
  for (std::size_t r = 0; r < m.rows(); ++r) m(r, dst) += q * m(r, src);
}
inline void negate_row(IntMatrix& m, std::size_t r) {
  for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = -m(r, c);
}

}  // namespace detail

inline SmithForm smith_normal_form(const IntMatrix& m) {
  using namespace detail;
  SmithForm s{m, IntMatrix::identity(m.rows()), IntMatrix::identity(m.cols())};
  IntMatrix& d = s.d;
  const std::size_t rows = m.rows(), cols = m.cols();
  for (std::size_t t = 0; t < std::min(rows, cols); ++t) {
    while (true) {
      // Smallest nonzero |entry| in the trailing block becomes the pivot.
      std::optional<std::pair<std::size_t, std::size_t>> piv;
      Integer best = 0;
      for (std::size_t i = t; i < rows; ++i)
        for (std::size_t j = t; j < cols; ++j) {
          if (d(i, j) == 0) continue;
          const Integer a = abs(d(i, j));
          if (!piv || a < best) {
            best = a;
            piv = {i, j};
          }
        }
      if (!piv) return s;
      swap_rows(d, t, piv->first);
      swap_rows(s.u, t, piv->first);
      swap_cols(d, t, piv->second);
      swap_cols(s.v, t, piv->second);

      bool clean = true;
      for (std::size_t i = t + 1; i < rows; ++i) {
        if (d(i, t) == 0) continue;
        const Integer q = d(i, t) / d(t, t);
        add_row(d, i, t, -q);
        add_row(s.u, i, t, -q);
        if (d(i, t) != 0) clean = false;
      }
      for (std::size_t j = t + 1; j < cols; ++j) {
        if (d(t, j) == 0) continue;
        const Integer q = d(t, j) / d(t, t);
        add_col(d, j, t, -q);
        add_col(s.v, j, t, -q);
        if (d(t, j) != 0) clean = false;
      }
      if (!clean) continue;

      // Enforce divisibility: fold a row with a non-multiple into row t.
      std::optional<std::size_t> bad;
      for (std::size_t i = t + 1; i < rows && !bad; ++i)
        for (std::size_t j = t + 1; j < cols; ++j)
          if (d(i, j) % d(t, t) != 0) {
            bad = i;
            break;
          }
      if (!bad) break;
      add_row(d, t, *bad, Integer(1));
      add_row(s.u, t, *bad, Integer(1));
    }
    if (d(t, t) < 0) {
      negate_row(d, t);
      negate_row(s.u, t);
    }
  }
  return s;
}

/// Z^rank (+) Z/d_1 (+) ... (+) Z/d_t in invariant-factor form (d_i >= 2, d_i | d_{i+1}).
class FgAbelianGroup {
 public:
  FgAbelianGroup() = default;

  /// Canonicalizes an arbitrary list of cyclic orders (0 = Z, 1 = trivial).
  static FgAbelianGroup from_cyclic(std::size_t rank, const std::vector<Integer>& orders) {
    std::vector<Integer> finite;
    for (const auto& o : orders) {
      const Integer a = abs(o);
      if (a == 0) {
        ++rank;
      } else if (a > 1) {
        finite.push_back(a);
      }
    }
    IntMatrix diag(finite.size(), finite.size());
    for (std::size_t i = 0; i < finite.size(); ++i) diag(i, i) = finite[i];
    FgAbelianGroup g;
    g.rank_ = rank;
    for (const auto& x : smith_normal_form(diag).diagonal())
      if (x > 1) g.torsion_.push_back(x);
    return g;
  }

  static FgAbelianGroup free(std::size_t rank) { return from_cyclic(rank, {}); }
  static FgAbelianGroup trivial() { return {}; }

  std::size_t rank() const noexcept { return rank_; }
  const std::vector<Integer>& torsion() const noexcept { return torsion_; }
  std::size_t generator_count() const noexcept { return rank_ + torsion_.size(); }
  bool is_trivial() const noexcept { return rank_ == 0 && torsion_.empty(); }

  FgAbelianGroup operator+(const FgAbelianGroup& other) const {
    std::vector<Integer> orders = torsion_;
    orders.insert(orders.end(), other.torsion_.begin(), other.torsion_.end());
    return from_cyclic(rank_ + other.rank_, orders);
  }

  /// Relations of the standard presentation Z^{generators} / im(R):
  /// a generators x t matrix with d_i in the row of the i-th torsion generator.
  IntMatrix relations() const {
    IntMatrix r(generator_count(), torsion_.size());
    for (std::size_t i = 0; i < torsion_.size(); ++i) r(rank_ + i, i) = torsion_[i];
    return r;
  }

  /// "Z^r + Z/d1 + ..." with "Z" for rank 1 and "0" for the trivial group.
  std::string to_string() const {
    std::vector<std::string> parts;
    if (rank_ == 1) parts.push_back("Z");
    if (rank_ > 1) parts.push_back("Z^" + std::to_string(rank_));
    for (const auto& d : torsion_) parts.push_back("Z/" + d.str());
    if (parts.empty()) return "0";
    std::string s = parts.front();
    for (std::size_t i = 1; i < parts.size(); ++i) s += " + " + parts[i];
    return s;
  }

  friend bool operator==(const FgAbelianGroup&, const FgAbelianGroup&) = default;

 private:
  std::size_t rank_ = 0;
  std::vector<Integer> torsion_;
};

/// Cokernel of M : Z^cols -> Z^rows.
inline FgAbelianGroup cokernel(const IntMatrix& m) {
  const auto snf = smith_normal_form(m);
  const auto diag = snf.diagonal();
  std::vector<Integer> orders;
  std::size_t r = 0;
  for (const auto& x : diag) {
    if (x == 0) continue;
    ++r;
    orders.push_back(x);
  }
  return FgAbelianGroup::from_cyclic(m.rows() - r, orders);
}

/// Cokernel of a map f : G -> H given on standard generators.
inline FgAbelianGroup cokernel(const IntMatrix& f, const FgAbelianGroup& target) {
  if (f.rows() != target.generator_count()) throw DimensionMismatch("cokernel: map does not land in target");
  return cokernel(hconcat(f, target.relations()));
}

/// Basis (as columns) of the integer kernel of m.
inline IntMatrix integer_kernel(const IntMatrix& m) {
  const auto snf = smith_normal_form(m);
  const std::size_t r = snf.rank();
  IntMatrix k(m.cols(), m.cols() - r);
  for (std::size_t j = r; j < m.cols(); ++j)
    for (std::size_t i = 0; i < m.cols(); ++i) k(i, j - r) = snf.v(i, j);
  return k;
}

/// Whether every column of `x` lies in the Z-span of the columns of `basis`.
inline bool lattice_contains(const IntMatrix& basis, const IntMatrix& x) {
  if (basis.rows() != x.rows()) throw DimensionMismatch("lattice_contains: ambient mismatch");
  const auto snf = smith_normal_form(basis);
  const IntMatrix y = snf.u * x;
  const auto diag = snf.diagonal();
  for (std::size_t c = 0; c < x.cols(); ++c)
    for (std::size_t i = 0; i < y.rows(); ++i) {
      const Integer di = i < diag.size() ? diag[i] : Integer(0);
      if (di == 0 ? y(i, c) != 0 : y(i, c) % di != 0) return false;
    }
  return true;
}

/// G_0 -> G_1 -> ... with maps[i] : groups[i] -> groups[i+1] on standard
/// generators (free generators first, then torsion generators).
struct GroupChain {
  std::vector<FgAbelianGroup> groups;
  std::vector<IntMatrix> maps;
};

struct ExactnessReport {
  bool exact = true;
  /// First node where image != kernel.
  std::optional<std::size_t> failure_node;
  std::string reason;
  /// Alternating rank sum r_1 - r_2 + r_3 - ... over the interior nodes,
  /// reported when both ends are the trivial group.
  std::optional<Integer> euler_characteristic;
};

inline void validate_chain(const GroupChain& chain) {
  if (chain.groups.empty() || chain.maps.size() + 1 != chain.groups.size()) {
    throw PreconditionError("group chain needs one map between each pair of consecutive groups");
  }
  for (std::size_t i = 0; i < chain.maps.size(); ++i) {
    const auto& f = chain.maps[i];
    if (f.cols() != chain.groups[i].generator_count() || f.rows() != chain.groups[i + 1].generator_count()) {
      throw DimensionMismatch("group chain map " + std::to_string(i) + " has the wrong shape");
    }
    if (!lattice_contains(chain.groups[i + 1].relations(), f * chain.groups[i].relations())) {
      throw PreconditionError("group chain map " + std::to_string(i) + " is not well defined on torsion");
    }
  }
}

/// Checks im = ker at every interior node.
inline ExactnessReport is_exact(const GroupChain& chain) {
  validate_chain(chain);
  ExactnessReport rep;
  const auto& gs = chain.groups;
  if (gs.front().is_trivial() && gs.back().is_trivial()) {
    Integer chi = 0;
    for (std::size_t i = 1; i + 1 < gs.size(); ++i) chi += (i % 2 == 1 ? 1 : -1) * Integer(gs[i].rank());
    rep.euler_characteristic = chi;
  }
  for (std::size_t i = 1; i + 1 < gs.size(); ++i) {
    const IntMatrix rel = gs[i].relations();
    const IntMatrix image = hconcat(chain.maps[i - 1], rel);
    // x with f(x) in im(R_next): first block of ker [f | -R_next].
    IntMatrix rel_next = gs[i + 1].relations();
    for (std::size_t r = 0; r < rel_next.rows(); ++r)
      for (std::size_t c = 0; c < rel_next.cols(); ++c) rel_next(r, c) = -rel_next(r, c);
    const IntMatrix big = integer_kernel(hconcat(chain.maps[i], rel_next));
    IntMatrix kernel(gs[i].generator_count(), big.cols());
    for (std::size_t r = 0; r < kernel.rows(); ++r)
      for (std::size_t c = 0; c < big.cols(); ++c) kernel(r, c) = big(r, c);
    kernel = hconcat(kernel, rel);
    if (!lattice_contains(kernel, image)) {
      rep.exact = false;
      rep.failure_node = i;
      rep.reason = "composite map is nonzero: image not contained in kernel";
      return rep;
    }
    if (!lattice_contains(image, kernel)) {
      rep.exact = false;
      rep.failure_node = i;
      rep.reason = "kernel strictly larger than image";
      return rep;
    }
  }
  if (rep.euler_characteristic && *rep.euler_characteristic != 0 && rep.exact) {
    // Exactness forces a vanishing alternating rank sum.
    rep.exact = false;
    rep.reason = "alternating rank sum is nonzero";
  }
  return rep;
}

// ---------------------------------------------------------------------------
// K-group tables

namespace detail {

inline void require_aspherical(const SurfaceDescriptor& s, const char* what) {
  if (!s.aspherical()) {
    throw PreconditionError(std::string(what) + ": surface " + s.name() + " is not aspherical");
  }
}

inline FgAbelianGroup z_plus_z2() { return FgAbelianGroup::from_cyclic(1, {2}); }

}  // namespace detail

/// Deformation K-groups of pi_1 of a compact aspherical surface.
inline FgAbelianGroup kdef_groups(const SurfaceDescriptor& s, int degree) {
  if (degree < 0) throw PreconditionError("kdef_groups: degree must be >= 0");
  detail::require_aspherical(s, "kdef_groups");
  if (s.is_orientable()) {
    if (degree == 0) return FgAbelianGroup::free(1);
    return FgAbelianGroup::free(degree % 2 == 1 ? 2 * s.genus() : 2);
  }
  if (degree % 2 == 0) return detail::z_plus_z2();
  return FgAbelianGroup::free(s.crosscaps() - 1);
}

/// Complex K-theory K^{-degree} of a compact surface (2-periodic).
inline FgAbelianGroup k_topological(const SurfaceDescriptor& s, int degree) {
  const bool even = ((degree % 2) + 2) % 2 == 0;
  if (s.is_orientable()) {
    if (s.count < 0) throw PreconditionError("k_topological: negative genus");
    return even ? FgAbelianGroup::free(2) : FgAbelianGroup::free(2 * s.genus());
  }
  if (s.count < 1) throw PreconditionError("k_topological: crosscap count must be >= 1");
  return even ? detail::z_plus_z2() : FgAbelianGroup::free(s.crosscaps() - 1);
}

/// Deformation K-groups of the free group F_k: Z in even degrees, Z^k in odd.
inline FgAbelianGroup kdef_free_group(int k, int degree) {
  if (k < 0 || degree < 0) throw PreconditionError("kdef_free_group: negative argument");
  return degree % 2 == 0 ? FgAbelianGroup::free(1) : FgAbelianGroup::free(k);
}

struct ComponentCount {
  int count = 1;
  friend bool operator==(const ComponentCount&, const ComponentCount&) = default;
};

/// A value that is expected but not established; `candidates` lists the possibilities.
struct Conjectural {
  std::vector<FgAbelianGroup> candidates;
  std::string note;
  friend bool operator==(const Conjectural&, const Conjectural&) = default;
};

using ModuliValue = std::variant<FgAbelianGroup, ComponentCount, Conjectural>;

/// pi_i of the stable moduli space Hom(pi_1 M, U)/U.
inline ModuliValue moduli_homotopy(const SurfaceDescriptor& s, int i) {
  if (i < 0) throw PreconditionError("moduli_homotopy: degree must be >= 0");
  detail::require_aspherical(s, "moduli_homotopy");
  if (i == 0) return ComponentCount{s.is_orientable() ? 1 : 2};
  if (i == 1) return k_topological(s, 1);
  if (i == 2) {
    if (s.is_orientable()) return FgAbelianGroup::free(1);
    return Conjectural{{FgAbelianGroup::trivial(), FgAbelianGroup::from_cyclic(0, {2})},
                       "cokernel of the Bott map K_0 -> K_2; injectivity of the Bott map is open"};
  }
  return Conjectural{{FgAbelianGroup::trivial()}, "vanishing above degree 2 is conjectural"};
}

inline std::string to_string(const ModuliValue& v) {
  if (const auto* g = std::get_if<FgAbelianGroup>(&v)) return g->to_string();
  if (const auto* c = std::get_if<ComponentCount>(&v)) return std::to_string(c->count) + " component(s)";
  const auto& cj = std::get<Conjectural>(v);
  std::string s = "conjectural(";
  for (std::size_t i = 0; i < cj.candidates.size(); ++i) s += (i ? " or " : "") + cj.candidates[i].to_string();
  return s + ")";
}

struct BottMapCase {
  IntMatrix bott_map;  ///< K_0 -> K_2 on standard generators
  FgAbelianGroup cokernel;
};

struct BottLesRow {
  int degree = 0;
  FgAbelianGroup kdef;
  ModuliValue rdef;
  ModuliValue moduli;
  bool consistent = false;
};

/// The low-degree part of the Bott long exact sequence
/// K_{*-2} -> K_* -> R_* -> ..., with R_2 computed as a cokernel.
struct BottLesReport {
  SurfaceDescriptor surface;
  std::vector<BottLesRow> rows;
  /// Admissible Bott maps K_0 -> K_2 and their cokernels. One entry when the
  /// map is determined, two when only its possibilities are known.
  std::vector<BottMapCase> bott_cases;
  /// Left inverse p with p * s = id when the Bott map splits (orientable case).
  std::optional<IntMatrix> splitting;
  bool injectivity_open = false;
  bool consistent = false;
};

inline BottLesReport bott_les_report(const SurfaceDescriptor& s) {
  detail::require_aspherical(s, "bott_les_report");
  BottLesReport rep;
  rep.surface = s;
  const auto k0 = kdef_groups(s, 0);
  const auto k2 = kdef_groups(s, 2);

  if (s.is_orientable()) {
    // K_0 = Z is generated by the unit; its Bott image is a section of the
    // projection K_2 = Z^2 -> Z induced by the trivial group.
    const IntMatrix section = IntMatrix::column({1, 0});
    const IntMatrix projection{{1, 0}};
    rep.splitting = projection;
    rep.bott_cases.push_back({section, cokernel(section, k2)});
  } else {
    // Both ends are Z + Z/2; the Bott map is either an isomorphism or kills the torsion.
    rep.injectivity_open = true;
    rep.bott_cases.push_back({IntMatrix{{1, 0}, {0, 1}}, cokernel(IntMatrix{{1, 0}, {0, 1}}, k2)});
    rep.bott_cases.push_back({IntMatrix{{1, 0}, {0, 0}}, cokernel(IntMatrix{{1, 0}, {0, 0}}, k2)});
  }

  // Degrees 0 and 1: R_i = K_i. The zeroth space of R is Z x (stable moduli),
  // so R_0 = Z + (component group).
  for (int i = 0; i <= 1; ++i) {
    BottLesRow row;
    row.degree = i;
    row.kdef = kdef_groups(s, i);
    row.rdef = row.kdef;
    row.moduli = moduli_homotopy(s, i);
    if (i == 0) {
      const int comps = std::get<ComponentCount>(row.moduli).count;
      row.consistent = row.kdef == FgAbelianGroup::from_cyclic(1, {Integer(comps)});
    } else {
      row.consistent = std::get<FgAbelianGroup>(row.moduli) == row.kdef;
    }
    rep.rows.push_back(std::move(row));
  }
  BottLesRow r2;
  r2.degree = 2;
  r2.kdef = k2;
  r2.moduli = moduli_homotopy(s, 2);
  if (rep.bott_cases.size() == 1) {
    r2.rdef = rep.bott_cases.front().cokernel;
    const auto* m = std::get_if<FgAbelianGroup>(&r2.moduli);
    const bool split_ok = rep.splitting && (*rep.splitting * rep.bott_cases.front().bott_map) == IntMatrix::identity(1);
    r2.consistent = split_ok && m && *m == rep.bott_cases.front().cokernel;
  } else {
    Conjectural cj;
    for (const auto& c : rep.bott_cases) cj.candidates.push_back(c.cokernel);
    cj.note = "injectivity of the Bott map K_0 -> K_2 is open";
    r2.rdef = cj;
    const auto* m = std::get_if<Conjectural>(&r2.moduli);
    r2.consistent = m && m->candidates == cj.candidates;
  }
  rep.rows.push_back(std::move(r2));
  (void)k0;
  rep.consistent = std::all_of(rep.rows.begin(), rep.rows.end(), [](const BottLesRow& r) { return r.consistent; });
  return rep;
}

/// Degree-zero tail of the would-be Mayer-Vietoris sequence for the connected
/// sum M^{g1+g2} = M^{g1} # M^{g2}, with the boundary map K_1(Z) -> K_0(pi_1 M)
/// left as an unknown integer multiplier.
struct ExcisionCase {
  long long boundary_multiplier = 0;
  ExactnessReport report;
};

struct ExcisionReport {
  int g1 = 0;
  int g2 = 0;
  /// K_1(F_{2g1}) + K_1(F_{2g2}) -> K_1(Z) -> K_0(pi_1 M) -> K_0(F) + K_0(F) -> K_0(Z) -> 0
  GroupChain chain;
  /// The zero incoming map makes exactness equivalent to exactness of the
  /// truncated chain 0 -> K_1(Z) -> K_0(pi_1 M) -> K_0(F)+K_0(F) -> K_0(Z) -> 0.
  Integer euler_obstruction = 0;
  std::vector<ExcisionCase> cases;
  bool any_exact = false;
  /// Replacing the chain by 0 -> Z -(id)-> Z -> 0 gives an exact sequence.
  bool control_exact = false;
};

namespace detail {

inline GroupChain excision_chain(int g1, int g2, long long boundary, bool truncated) {
  const FgAbelianGroup z = FgAbelianGroup::free(1);
  const FgAbelianGroup k1_free = kdef_free_group(2 * g1, 1) + kdef_free_group(2 * g2, 1);
  const FgAbelianGroup k0_surface = kdef_groups(SurfaceDescriptor::orientable(g1 + g2), 0);
  const FgAbelianGroup k0_free = kdef_free_group(2 * g1, 0) + kdef_free_group(2 * g2, 0);
  const IntMatrix boundary_map{{boundary}};
  // K_0(pi_1 M) = Z (rank) maps diagonally; the last map is the difference.
  const IntMatrix restriction = IntMatrix::column({1, 1});
  const IntMatrix difference{{1, -1}};
  GroupChain c;
  if (truncated) {
    c.groups = {FgAbelianGroup::trivial(), z, k0_surface, k0_free, z, FgAbelianGroup::trivial()};
    c.maps = {IntMatrix(1, 0), boundary_map, restriction, difference, IntMatrix(0, 1)};
  } else {
    c.groups = {k1_free, z, k0_surface, k0_free, z, FgAbelianGroup::trivial()};
    c.maps = {IntMatrix(1, k1_free.generator_count()), boundary_map, restriction, difference, IntMatrix(0, 1)};
  }
  return c;
}

}  // namespace detail

/// Certifies that deformation K-theory fails excision in degree 0 for the
/// connected sum M^{g1} # M^{g2}: the incoming map from K_1 of the free groups
/// is zero, and no boundary multiplier makes the resulting sequence exact.
inline ExcisionReport excision_counterexample(int g1, int g2, int boundary_range = 5) {
  if (g1 < 1 || g2 < 1) throw PreconditionError("excision_counterexample: genera must be >= 1");
  ExcisionReport rep;
  rep.g1 = g1;
  rep.g2 = g2;
  rep.chain = detail::excision_chain(g1, g2, 0, false);
  for (long long d = -boundary_range; d <= boundary_range; ++d) {
    ExcisionCase c;
    c.boundary_multiplier = d;
    c.report = is_exact(detail::excision_chain(g1, g2, d, true));
    const auto full = is_exact(detail::excision_chain(g1, g2, d, false));
    if (c.report.exact || full.exact) rep.any_exact = true;
    if (c.report.euler_characteristic) rep.euler_obstruction = *c.report.euler_characteristic;
    rep.cases.push_back(std::move(c));
  }
  GroupChain control;
  control.groups = {FgAbelianGroup::trivial(), FgAbelianGroup::free(1), FgAbelianGroup::free(1),
                    FgAbelianGroup::trivial()};
  control.maps = {IntMatrix(1, 0), IntMatrix::identity(1), IntMatrix(0, 1)};
  rep.control_exact = is_exact(control).exact;
  return rep;
}

}  // namespace flatrep
