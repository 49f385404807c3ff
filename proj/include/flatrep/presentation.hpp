#pragma once

// Surface-group presentations, free-group words, word evaluation and the
// Euclidean gradient of the relator defect.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flatrep/unitary.hpp"

namespace flatrep {

/// One letter of a free-group word: generator index and exponent sign (+1/-1).
struct Letter {
  int generator = 0;
  int sign = 1;

  Letter inverse() const { return {generator, -sign}; }
  friend bool operator==(const Letter&, const Letter&) = default;
};

/// A word in a free group, stored letter by letter without free reduction.
class Word {
 public:
  Word() = default;
  Word(std::initializer_list<Letter> letters) : letters_(letters) {
    for (const auto& l : letters_) check_letter(l);
  }
  explicit Word(std::vector<Letter> letters) : letters_(std::move(letters)) {
    for (const auto& l : letters_) check_letter(l);
  }

  static Word generator(int index, int sign = 1) { return Word{{index, sign}}; }

  const std::vector<Letter>& letters() const noexcept { return letters_; }
  std::size_t size() const noexcept { return letters_.size(); }
  bool empty() const noexcept { return letters_.empty(); }

  Word inverse() const {
    std::vector<Letter> out;
    out.reserve(letters_.size());
    for (auto it = letters_.rbegin(); it != letters_.rend(); ++it) out.push_back(it->inverse());
    return Word(std::move(out));
  }

  /// Cancels adjacent x x^-1 pairs.
  Word reduced() const {
    std::vector<Letter> out;
    out.reserve(letters_.size());
    for (const auto& l : letters_) {
      if (!out.empty() && out.back().generator == l.generator && out.back().sign == -l.sign) {
        out.pop_back();
      } else {
        out.push_back(l);
      }
    }
    return Word(std::move(out));
  }

  Word& operator*=(const Word& rhs) {
    letters_.insert(letters_.end(), rhs.letters_.begin(), rhs.letters_.end());
    return *this;
  }
  friend Word operator*(Word lhs, const Word& rhs) { return lhs *= rhs; }
  friend bool operator==(const Word&, const Word&) = default;

 private:
  static void check_letter(const Letter& l) {
    if (l.generator < 0) throw IndexOutOfRange("word letter has negative generator index");
    if (l.sign != 1 && l.sign != -1) throw PreconditionError("word letter sign must be +1 or -1");
  }

  std::vector<Letter> letters_;
};

enum class SurfaceKind { orientable, nonorientable };

/// Closed surface by topological type: orientable genus g, or k crosscaps.
/// Nonorientable M^g # N_j is normalized to k = 2g + j crosscaps.
struct SurfaceDescriptor {
  SurfaceKind kind = SurfaceKind::orientable;
  int count = 1;  // genus (orientable) or crosscaps (nonorientable)

  static SurfaceDescriptor orientable(int genus) { return {SurfaceKind::orientable, genus}; }
  static SurfaceDescriptor nonorientable(int crosscaps) { return {SurfaceKind::nonorientable, crosscaps}; }
  static SurfaceDescriptor connected_sum(int genus, int j) {
    if (genus < 0 || (j != 1 && j != 2)) {
      throw PreconditionError("connected sum M^g # N_j needs g >= 0 and j in {1, 2}");
    }
    return nonorientable(2 * genus + j);
  }

  bool is_orientable() const noexcept { return kind == SurfaceKind::orientable; }
  int genus() const noexcept { return is_orientable() ? count : 0; }
  int crosscaps() const noexcept { return is_orientable() ? 0 : count; }

  /// Decomposition M^g # N_j of a nonorientable surface (j in {1, 2}).
  std::pair<int, int> connected_sum_form() const {
    const int j = (count % 2 == 1) ? 1 : 2;
    return {(count - j) / 2, j};
  }

  /// S^2 and RP^2 are the only compact surfaces that are not aspherical.
  bool aspherical() const noexcept { return count >= (is_orientable() ? 1 : 2); }

  int euler_characteristic() const noexcept { return is_orientable() ? 2 - 2 * count : 2 - count; }

  std::string name() const {
    if (is_orientable()) return count == 1 ? "torus" : "genus" + std::to_string(count);
    if (count == 1) return "rp2";
    if (count == 2) return "klein";
    return "crosscaps" + std::to_string(count);
  }

  friend bool operator==(const SurfaceDescriptor&, const SurfaceDescriptor&) = default;
};

namespace detail {

inline bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

}  // namespace detail

/// Parses surface names: "torus", "sphere", "genusG", "klein", "rp2",
/// "crosscapsK", and connected sums "M<g>#N<j>" / "M<g>#K" / "M<g>#RP2".
inline SurfaceDescriptor parse_surface(std::string_view text) {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  int v = 0;
  if (s == "torus") return SurfaceDescriptor::orientable(1);
  if (s == "sphere") return SurfaceDescriptor::orientable(0);
  if (s == "klein") return SurfaceDescriptor::nonorientable(2);
  if (s == "rp2") return SurfaceDescriptor::nonorientable(1);
  if (s.rfind("genus", 0) == 0 && detail::parse_int(std::string_view(s).substr(5), v) && v >= 0) {
    return SurfaceDescriptor::orientable(v);
  }
  if (s.rfind("crosscaps", 0) == 0 && detail::parse_int(std::string_view(s).substr(9), v) && v >= 1) {
    return SurfaceDescriptor::nonorientable(v);
  }
  if (s.size() > 1 && s[0] == 'm') {
    const auto hash = s.find('#');
    int g = 0;
    if (hash != std::string::npos && detail::parse_int(std::string_view(s).substr(1, hash - 1), g) && g >= 0) {
      const std::string tail = s.substr(hash + 1);
      if (tail == "k" || tail == "n2" || tail == "klein") return SurfaceDescriptor::connected_sum(g, 2);
      if (tail == "n1" || tail == "rp2") return SurfaceDescriptor::connected_sum(g, 1);
    }
  }
  throw PreconditionError("unrecognized surface '" + std::string(text) + "'");
}

/// Standard one-relator presentation of a surface group.
///
/// Orientable genus g: generators a_1, b_1, ..., a_g, b_g (indices 2j, 2j+1),
/// relator [a_1, b_1] ... [a_g, b_g] with [a, b] = a b a^-1 b^-1.
/// Nonorientable with k crosscaps: generators x_1..x_k, relator x_1^2 ... x_k^2.
struct SurfacePresentation {
  SurfaceDescriptor surface;
  int generator_count = 0;
  Word relator;
  bool aspherical = true;

  SurfaceKind kind() const noexcept { return surface.kind; }
  bool is_orientable() const noexcept { return surface.is_orientable(); }

  friend bool operator==(const SurfacePresentation& a, const SurfacePresentation& b) {
    return a.surface == b.surface;
  }
};

inline SurfacePresentation make_presentation(const SurfaceDescriptor& surface) {
  SurfacePresentation p;
  p.surface = surface;
  std::vector<Letter> rel;
  if (surface.is_orientable()) {
    if (surface.count < 1) {
      throw PreconditionError("orientable genus must be >= 1; the sphere is excluded");
    }
    p.generator_count = 2 * surface.count;
    for (int j = 0; j < surface.count; ++j) {
      const int a = 2 * j, b = 2 * j + 1;
      rel.insert(rel.end(), {{a, 1}, {b, 1}, {a, -1}, {b, -1}});
    }
  } else {
    if (surface.count < 1) throw PreconditionError("crosscap count must be >= 1");
    p.generator_count = surface.count;
    for (int i = 0; i < surface.count; ++i) rel.insert(rel.end(), {{i, 1}, {i, 1}});
  }
  p.relator = Word(std::move(rel));
  p.aspherical = surface.aspherical();
  return p;
}

namespace detail {

inline void check_word_indices(const Word& w, std::size_t image_count) {
  for (const auto& l : w.letters()) {
    if (static_cast<std::size_t>(l.generator) >= image_count) {
      throw IndexOutOfRange("word refers to generator " + std::to_string(l.generator) + " but only " +
                            std::to_string(image_count) + " images were given");
    }
  }
}

inline Index common_dim(std::span<const CMatrix> images) {
  if (images.empty()) return 0;
  const Index n = images.front().rows();
  for (const auto& m : images) {
    if (m.rows() != n || m.cols() != n) throw DimensionMismatch("word images have unequal dimensions");
  }
  return n;
}

inline CMatrix letter_matrix(const CMatrix& m, int sign) { return sign > 0 ? m : CMatrix(m.adjoint()); }

}  // namespace detail

/// Ordered product of the images (inverse letters use the conjugate transpose,
/// which is the inverse on U(n)). The empty word evaluates to the identity.
inline CMatrix evaluate_word_matrices(const Word& w, std::span<const CMatrix> images, Index dim) {
  detail::check_word_indices(w, images.size());
  CMatrix out = CMatrix::Identity(dim, dim);
  for (const auto& l : w.letters()) {
    const CMatrix& m = images[l.generator];
    if (m.rows() != dim || m.cols() != dim) throw DimensionMismatch("word images have unequal dimensions");
    if (l.sign > 0) {
      out = out * m;
    } else {
      out = out * m.adjoint();
    }
  }
  return out;
}

inline std::vector<CMatrix> to_matrices(std::span<const Unitary> images) {
  std::vector<CMatrix> out;
  out.reserve(images.size());
  for (const auto& u : images) out.push_back(u.matrix());
  return out;
}

inline Unitary evaluate_word(const Word& w, std::span<const Unitary> images) {
  detail::check_word_indices(w, images.size());
  Index n = images.empty() ? 0 : images.front().dim();
  for (const auto& u : images) {
    if (u.dim() != n) throw DimensionMismatch("word images have unequal dimensions");
  }
  CMatrix out = CMatrix::Identity(n, n);
  for (const auto& l : w.letters()) out = out * detail::letter_matrix(images[l.generator].matrix(), l.sign);
  return Unitary::unchecked(std::move(out));
}

/// E = ||W - I||_F^2 for the word product W.
inline double word_energy(const Word& w, std::span<const CMatrix> images) {
  const Index n = detail::common_dim(images);
  return (evaluate_word_matrices(w, images, n) - CMatrix::Identity(n, n)).squaredNorm();
}

/// Adds the Euclidean gradient of ||W - I||_F^2 into `grads` (one matrix per
/// generator), with respect to the real inner product Re tr(A^H B).
///
/// Writing W = L P R around one occurrence P of a generator X and D = W - I,
/// that occurrence contributes 2 L^H D R^H when P = X and 2 R D^H L when P = X^H.
inline void accumulate_word_gradient(const Word& w, std::span<const CMatrix> images, Index n,
                                     std::vector<CMatrix>& grads) {
  const auto& letters = w.letters();
  const std::size_t len = letters.size();
  if (len == 0) return;
  std::vector<CMatrix> prefix(len + 1), suffix(len + 1);
  prefix[0] = CMatrix::Identity(n, n);
  for (std::size_t i = 0; i < len; ++i) {
    prefix[i + 1] = prefix[i] * detail::letter_matrix(images[letters[i].generator], letters[i].sign);
  }
  suffix[len] = CMatrix::Identity(n, n);
  for (std::size_t i = len; i-- > 0;) {
    suffix[i] = detail::letter_matrix(images[letters[i].generator], letters[i].sign) * suffix[i + 1];
  }
  const CMatrix defect = prefix[len] - CMatrix::Identity(n, n);
  for (std::size_t i = 0; i < len; ++i) {
    const CMatrix& left = prefix[i];
    const CMatrix& right = suffix[i + 1];
    auto& g = grads[letters[i].generator];
    if (letters[i].sign > 0) {
      g += 2.0 * left.adjoint() * defect * right.adjoint();
    } else {
      g += 2.0 * right * defect.adjoint() * left;
    }
  }
}

/// Euclidean gradient of ||evaluate_word(w) - I||_F^2, one matrix per generator.
inline std::vector<CMatrix> word_gradient(const Word& w, std::span<const CMatrix> images) {
  detail::check_word_indices(w, images.size());
  const Index n = detail::common_dim(images);
  std::vector<CMatrix> grads(images.size(), CMatrix::Zero(n, n));
  accumulate_word_gradient(w, images, n, grads);
  return grads;
}

inline std::vector<CMatrix> word_gradient(const Word& w, std::span<const Unitary> images) {
  const auto mats = to_matrices(images);
  return word_gradient(w, std::span<const CMatrix>(mats));
}

}  // namespace flatrep
