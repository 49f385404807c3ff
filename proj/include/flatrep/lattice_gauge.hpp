#pragma once

// Discrete principal U(n)-bundles over cell complexes of a closed surface:
// plaquettes, Yang-Mills energy and flow, gauge action, holonomy, the
// tree-gauge flat connection of a representation and based-gauge equivalence.
//
// Walk convention: a walk is a Word over signed edges written in composition
// order, so the left-to-right product of its labels is the parallel transport
// along it. The last letter is traversed first; consecutive letters satisfy
// end(s_{i+1}) == start(s_i). An edge label maps the fiber over the tail to
// the fiber over the head, and a gauge transform phi acts by
// label(e) -> phi(head) label(e) phi(tail)^-1.

#include <cmath>
#include <deque>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "flatrep/rep_variety.hpp"

namespace flatrep {

struct Edge {
  int tail = 0;
  int head = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Cell structure of a closed surface with a distinguished basepoint (vertex 0).
struct SurfaceComplex {
  int vertex_count = 0;
  int basepoint = 0;
  std::vector<Edge> edges;
  /// Closed boundary walks of the 2-cells.
  std::vector<Word> faces;
  /// One closed walk at the basepoint per group generator.
  std::vector<Word> generator_loops;
  /// The element of the free group on the generators carried by each edge.
  /// Every generator loop multiplies out to its generator and every face to a
  /// conjugate of the relator (or the empty word), so labeling each edge by
  /// rho(edge_words[e]) is flat whenever rho is.
  std::vector<Word> edge_words;
  SurfacePresentation presentation;
  int level = 0;

  int edge_count() const noexcept { return static_cast<int>(edges.size()); }
  int face_count() const noexcept { return static_cast<int>(faces.size()); }
  int euler_characteristic() const noexcept { return vertex_count - edge_count() + face_count(); }

  int start_of(const Letter& s) const { return s.sign > 0 ? edges.at(s.generator).tail : edges.at(s.generator).head; }
  int end_of(const Letter& s) const { return s.sign > 0 ? edges.at(s.generator).head : edges.at(s.generator).tail; }

  /// Vertex where a composition-order walk starts (and ends, when closed).
  int walk_start(const Word& w) const { return start_of(w.letters().back()); }
  int walk_end(const Word& w) const { return end_of(w.letters().front()); }

  bool is_walk(const Word& w) const {
    const auto& l = w.letters();
    for (std::size_t i = 0; i + 1 < l.size(); ++i) {
      if (end_of(l[i + 1]) != start_of(l[i])) return false;
    }
    return true;
  }
  bool is_closed_walk(const Word& w) const { return !w.empty() && is_walk(w) && walk_start(w) == walk_end(w); }

  friend bool operator==(const SurfaceComplex& a, const SurfaceComplex& b) {
    return a.vertex_count == b.vertex_count && a.basepoint == b.basepoint && a.edges == b.edges &&
           a.faces == b.faces && a.generator_loops == b.generator_loops && a.presentation == b.presentation;
  }
};

using ComplexPtr = std::shared_ptr<const SurfaceComplex>;

namespace detail {

/// Bisects every edge and cones every face from a new center vertex.
inline SurfaceComplex subdivide(const SurfaceComplex& c) {
  SurfaceComplex out;
  out.presentation = c.presentation;
  out.level = c.level + 1;
  out.basepoint = c.basepoint;
  out.vertex_count = c.vertex_count;

  // Edge e: t -> h becomes first(e): t -> mid and second(e): mid -> h.
  const int m = c.edge_count();
  for (int e = 0; e < m; ++e) {
    const int mid = out.vertex_count++;
    out.edges.push_back({c.edges[e].tail, mid});
    out.edges.push_back({mid, c.edges[e].head});
    out.edge_words.push_back(c.edge_words[e]);
    out.edge_words.push_back(Word{});
  }
  auto refine = [](const Word& w) {
    std::vector<Letter> l;
    l.reserve(2 * w.size());
    for (const auto& s : w.letters()) {
      const int first = 2 * s.generator, second = 2 * s.generator + 1;
      if (s.sign > 0) {
        l.push_back({second, 1});
        l.push_back({first, 1});
      } else {
        l.push_back({first, -1});
        l.push_back({second, -1});
      }
    }
    return Word(std::move(l));
  };
  for (const auto& loop : c.generator_loops) out.generator_loops.push_back(refine(loop));

  for (const auto& face : c.faces) {
    const Word boundary = refine(face);
    // Traversal order q_1..q_L is the reverse of the composition order.
    std::vector<Letter> q(boundary.letters().rbegin(), boundary.letters().rend());
    const std::size_t len = q.size();
    const int center = out.vertex_count++;
    // spoke[i]: center -> start(q_i), carrying sigma_i with
    // sigma_{i+1} = word(q_i) * sigma_i so every cone triangle but the last
    // is trivial in the free group.
    std::vector<int> spoke(len);
    std::vector<Word> sigma(len);
    Word acc;
    for (std::size_t i = 0; i < len; ++i) {
      spoke[i] = out.edge_count();
      out.edges.push_back({center, out.start_of(q[i])});
      sigma[i] = acc.reduced();
      out.edge_words.push_back(sigma[i]);
      const Word& wq = out.edge_words[q[i].generator];
      acc = (q[i].sign > 0 ? wq : wq.inverse()) * acc;
    }
    for (std::size_t i = 0; i < len; ++i) {
      const std::size_t next = (i + 1) % len;
      // center -> start(q_i) -> end(q_i) = start(q_{i+1}) -> center
      out.faces.push_back(Word{{spoke[next], -1}, q[i], {spoke[i], 1}});
    }
  }
  return out;
}

}  // namespace detail

/// Level 0 is the one-vertex complex with one edge per generator and a single
/// face whose boundary is the relator; each further level bisects edges and
/// cones faces.
inline ComplexPtr build_complex(const SurfacePresentation& pres, int level) {
  if (level < 0) throw PreconditionError("build_complex: level must be >= 0");
  SurfaceComplex c;
  c.presentation = pres;
  c.vertex_count = 1;
  c.basepoint = 0;
  for (int i = 0; i < pres.generator_count; ++i) {
    c.edges.push_back({0, 0});
    c.generator_loops.push_back(Word::generator(i));
    c.edge_words.push_back(Word::generator(i));
  }
  c.faces.push_back(pres.relator);
  for (int l = 0; l < level; ++l) c = detail::subdivide(c);
  return std::make_shared<const SurfaceComplex>(std::move(c));
}

/// One unitary label per edge, all of the same dimension.
class LatticeConnection {
 public:
  LatticeConnection(ComplexPtr complex, std::vector<Unitary> labels)
      : complex_(std::move(complex)), labels_(std::move(labels)) {
    if (!complex_) throw PreconditionError("lattice connection needs a complex");
    if (labels_.size() != complex_->edges.size()) {
      throw PreconditionError("lattice connection needs one label per edge");
    }
    dim_ = labels_.empty() ? 0 : labels_.front().dim();
    for (const auto& u : labels_) {
      if (u.dim() != dim_) throw DimensionMismatch("edge labels have unequal dimensions");
    }
  }

  static LatticeConnection identity(ComplexPtr complex, Index n) {
    const std::size_t m = complex->edges.size();
    return LatticeConnection(std::move(complex), std::vector<Unitary>(m, Unitary::identity(n)));
  }

  static LatticeConnection haar_random(ComplexPtr complex, Index n, std::uint64_t seed) {
    std::vector<Unitary> labels;
    for (std::size_t e = 0; e < complex->edges.size(); ++e) {
      labels.push_back(flatrep::haar_random(n, detail::mix_seed(seed, e)));
    }
    return LatticeConnection(std::move(complex), std::move(labels));
  }

  const SurfaceComplex& complex() const noexcept { return *complex_; }
  const ComplexPtr& complex_ptr() const noexcept { return complex_; }
  const std::vector<Unitary>& labels() const noexcept { return labels_; }
  Index dim() const noexcept { return dim_; }

 private:
  ComplexPtr complex_;
  std::vector<Unitary> labels_;
  Index dim_ = 0;
};

/// One unitary per vertex.
class GaugeTransform {
 public:
  GaugeTransform(ComplexPtr complex, std::vector<Unitary> values)
      : complex_(std::move(complex)), values_(std::move(values)) {
    if (!complex_) throw PreconditionError("gauge transform needs a complex");
    if (values_.size() != static_cast<std::size_t>(complex_->vertex_count)) {
      throw PreconditionError("gauge transform needs one value per vertex");
    }
    for (const auto& u : values_) {
      if (u.dim() != values_.front().dim()) throw DimensionMismatch("gauge values have unequal dimensions");
    }
  }

  static GaugeTransform identity(ComplexPtr complex, Index n) {
    const int v = complex->vertex_count;
    return GaugeTransform(std::move(complex), std::vector<Unitary>(v, Unitary::identity(n)));
  }

  /// Haar-random values; with `based` the basepoint value is the identity.
  static GaugeTransform haar_random(ComplexPtr complex, Index n, std::uint64_t seed, bool based) {
    std::vector<Unitary> values;
    for (int v = 0; v < complex->vertex_count; ++v) {
      values.push_back(based && v == complex->basepoint ? Unitary::identity(n)
                                                        : flatrep::haar_random(n, detail::mix_seed(seed, v)));
    }
    return GaugeTransform(std::move(complex), std::move(values));
  }

  const SurfaceComplex& complex() const noexcept { return *complex_; }
  const std::vector<Unitary>& values() const noexcept { return values_; }
  const Unitary& at(int v) const { return values_.at(v); }
  Index dim() const noexcept { return values_.empty() ? 0 : values_.front().dim(); }

  bool is_based() const {
    const auto& u = values_.at(complex_->basepoint);
    return max_entry_error(u.matrix(), CMatrix::Identity(u.dim(), u.dim())) <= kUnitaryTol;
  }

 private:
  ComplexPtr complex_;
  std::vector<Unitary> values_;
};

namespace detail {

inline bool same_complex(const SurfaceComplex& a, const SurfaceComplex& b) { return &a == &b || a == b; }

}  // namespace detail

/// Transport along a walk: ordered product of its labels (inverses on reversed edges).
inline Unitary walk_transport(const LatticeConnection& a, const Word& walk) {
  return evaluate_word(walk, a.labels());
}

inline Unitary plaquette(const LatticeConnection& a, std::size_t face) {
  if (face >= a.complex().faces.size()) throw IndexOutOfRange("plaquette: face index out of range");
  return walk_transport(a, a.complex().faces[face]);
}

/// Sum over faces of ||plaquette - I||_F^2.
inline double ym_energy(const LatticeConnection& a) {
  if (a.dim() == 0) return 0.0;
  const auto mats = to_matrices(a.labels());
  double e = 0.0;
  for (const auto& f : a.complex().faces) e += word_energy(f, mats);
  return e;
}

/// Generator i goes to the transport around generator_loops[i].
inline Representation holonomy_rep(const LatticeConnection& a) {
  std::vector<Unitary> images;
  for (const auto& loop : a.complex().generator_loops) images.push_back(walk_transport(a, loop));
  return Representation(a.complex().presentation, std::move(images));
}

/// C with residual(holonomy_rep(A)) <= C * sqrt(ym_energy(A)): the relator
/// loop is a product of conjugates of every face boundary once, so the bound
/// follows from ||PQ - I|| <= ||P - I|| + ||Q - I|| and Cauchy-Schwarz.
inline double holonomy_residual_constant(const SurfaceComplex& c) { return std::sqrt(static_cast<double>(c.face_count())); }

inline LatticeConnection gauge_act(const GaugeTransform& phi, const LatticeConnection& a) {
  if (!detail::same_complex(phi.complex(), a.complex())) throw PreconditionError("gauge_act: complex mismatch");
  if (phi.dim() != a.dim()) throw DimensionMismatch("gauge_act: dimension mismatch");
  std::vector<Unitary> labels;
  labels.reserve(a.labels().size());
  for (std::size_t e = 0; e < a.labels().size(); ++e) {
    const Edge& edge = a.complex().edges[e];
    labels.push_back(phi.at(edge.head) * a.labels()[e] * phi.at(edge.tail).inverse());
  }
  return LatticeConnection(a.complex_ptr(), std::move(labels));
}

using LatticeFlowError = NonConvergence<std::pair<LatticeConnection, FlowReport>>;

/// Gradient descent of ym_energy over all edge labels until sqrt(energy) <= tol.
inline std::pair<LatticeConnection, FlowReport> ym_flow(const LatticeConnection& start, double tol = kDefaultTol,
                                                        int max_iter = kDefaultMaxIter,
                                                        std::function<void(int, double)> progress = {}) {
  if (!(tol > 0.0)) throw PreconditionError("ym_flow: tol must be positive");
  const auto& faces = start.complex().faces;
  const Index n = start.dim();
  auto energy = [&](const std::vector<CMatrix>& x) {
    if (n == 0) return 0.0;
    double e = 0.0;
    for (const auto& f : faces) e += (evaluate_word_matrices(f, x, n) - CMatrix::Identity(n, n)).squaredNorm();
    return e;
  };
  auto gradient = [&](const std::vector<CMatrix>& x) {
    std::vector<CMatrix> g(x.size(), CMatrix::Zero(n, n));
    for (const auto& f : faces) accumulate_word_gradient(f, x, n, g);
    return g;
  };
  DescentOptions opts;
  opts.tol = tol;
  opts.max_iter = max_iter;
  opts.progress = std::move(progress);
  auto res = riemannian_descent(to_matrices(start.labels()), energy, gradient, opts);
  std::vector<Unitary> labels;
  for (auto& m : res.point) labels.push_back(Unitary::unchecked(std::move(m)));
  LatticeConnection out(start.complex_ptr(), std::move(labels));
  if (!res.converged) {
    throw LatticeFlowError("ym_flow did not reach sqrt(energy) <= " + format_real(tol) + ": " + res.failure,
                           {std::move(out), std::move(res.report)});
  }
  return {std::move(out), std::move(res.report)};
}

/// Breadth-first spanning tree from the basepoint; neighbours are scanned in
/// increasing edge index.
struct SpanningTree {
  /// Edge used to reach each vertex (-1 at the basepoint).
  std::vector<int> parent_edge;
  /// Vertices in discovery order, basepoint first.
  std::vector<int> order;
  std::vector<bool> is_tree_edge;
};

inline SpanningTree spanning_tree(const SurfaceComplex& c) {
  std::vector<std::vector<int>> incident(c.vertex_count);
  for (int e = 0; e < c.edge_count(); ++e) {
    incident[c.edges[e].tail].push_back(e);
    if (c.edges[e].head != c.edges[e].tail) incident[c.edges[e].head].push_back(e);
  }
  SpanningTree t;
  t.parent_edge.assign(c.vertex_count, -1);
  t.is_tree_edge.assign(c.edges.size(), false);
  std::vector<bool> seen(c.vertex_count, false);
  std::deque<int> queue{c.basepoint};
  seen[c.basepoint] = true;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    t.order.push_back(v);
    for (int e : incident[v]) {
      const int w = c.edges[e].tail == v ? c.edges[e].head : c.edges[e].tail;
      if (seen[w]) continue;
      seen[w] = true;
      t.parent_edge[w] = e;
      t.is_tree_edge[e] = true;
      queue.push_back(w);
    }
  }
  if (static_cast<int>(t.order.size()) != c.vertex_count) throw PreconditionError("complex is not connected");
  return t;
}

inline constexpr double kFlatFromRepTol = 1e-8;

/// Tree-gauge flat connection with holonomy rho: spanning-tree edges carry the
/// identity and every other edge carries rho of the (reduced) loop word
/// tree(head)^-1 * edge_word * tree(tail) that it closes.
inline LatticeConnection flat_from_rep(const Representation& rho, const ComplexPtr& complex) {
  if (!(rho.presentation() == complex->presentation)) {
    throw PreconditionError("flat_from_rep: complex was built from another presentation");
  }
  const double r = residual(rho);
  if (!(r <= kFlatFromRepTol)) throw PreconditionError("flat_from_rep: residual " + format_real(r) + " exceeds 1e-8");
  const SurfaceComplex& c = *complex;
  const auto tree = spanning_tree(c);
  // tree_word[v]: free-group word of the tree path basepoint -> v (composition order).
  std::vector<Word> tree_word(c.vertex_count);
  for (int v : tree.order) {
    const int e = tree.parent_edge[v];
    if (e < 0) continue;
    const Edge& edge = c.edges[e];
    tree_word[v] = edge.head == v ? (c.edge_words[e] * tree_word[edge.tail]).reduced()
                                  : (c.edge_words[e].inverse() * tree_word[edge.head]).reduced();
  }
  std::vector<Unitary> labels;
  labels.reserve(c.edges.size());
  for (int e = 0; e < c.edge_count(); ++e) {
    if (tree.is_tree_edge[e]) {
      labels.push_back(Unitary::identity(rho.rank()));
      continue;
    }
    const Edge& edge = c.edges[e];
    const Word loop = (tree_word[edge.head].inverse() * c.edge_words[e] * tree_word[edge.tail]).reduced();
    labels.push_back(evaluate_word(loop, rho.images()));
  }
  return LatticeConnection(complex, std::move(labels));
}

/// Based gauge transform phi with gauge_act(phi, a) == b, built by transporting
/// along the spanning tree from the basepoint. Returns nullopt when the
/// holonomies differ by more than tol or the tree-built phi misses b by more
/// than 10 * tol on some edge.
inline std::optional<GaugeTransform> based_gauge_equiv(const LatticeConnection& a, const LatticeConnection& b,
                                                       double tol) {
  if (!detail::same_complex(a.complex(), b.complex())) throw PreconditionError("based_gauge_equiv: complex mismatch");
  if (a.dim() != b.dim()) throw DimensionMismatch("based_gauge_equiv: dimension mismatch");
  for (const auto* x : {&a, &b}) {
    const double r = std::sqrt(ym_energy(*x));
    if (!(r <= tol)) throw PreconditionError("based_gauge_equiv: connection is not flat (" + format_real(r) + ")");
  }
  const auto ha = holonomy_rep(a), hb = holonomy_rep(b);
  for (std::size_t i = 0; i < ha.images().size(); ++i) {
    if (dist_frob(ha.image(i), hb.image(i)) > tol) return std::nullopt;
  }
  const SurfaceComplex& c = a.complex();
  const auto tree = spanning_tree(c);
  std::vector<Unitary> phi(c.vertex_count, Unitary::identity(a.dim()));
  for (int v : tree.order) {
    const int e = tree.parent_edge[v];
    if (e < 0) continue;
    const Edge& edge = c.edges[e];
    const Unitary& la = a.labels()[e];
    const Unitary& lb = b.labels()[e];
    // b(e) = phi(head) a(e) phi(tail)^-1
    phi[v] = edge.head == v ? lb * phi[edge.tail] * la.inverse() : lb.inverse() * phi[edge.head] * la;
  }
  GaugeTransform g(a.complex_ptr(), std::move(phi));
  const auto moved = gauge_act(g, a);
  for (std::size_t e = 0; e < moved.labels().size(); ++e) {
    if (dist_frob(moved.labels()[e], b.labels()[e]) > 10.0 * tol) return std::nullopt;
  }
  return g;
}

}  // namespace flatrep
