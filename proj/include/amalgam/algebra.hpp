#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "amalgam/error.hpp"
#include "amalgam/matrix.hpp"

namespace amalgam {

/// Which unital subalgebra B of the m x m matrices is in play.
///
/// BlockTensor(k, d) embeds k x k matrices as X (x) I_d, so ambient index
/// p*d + s carries block index p and inner index s.
struct SubalgebraKind {
  enum class Tag { Scalar, Diagonal, BlockTensor, Full };

  Tag tag = Tag::Full;
  std::size_t blocks = 0;  // k, BlockTensor only
  std::size_t inner = 0;   // d, BlockTensor only

  static SubalgebraKind scalar() { return {Tag::Scalar, 0, 0}; }
  static SubalgebraKind diagonal() { return {Tag::Diagonal, 0, 0}; }
  static SubalgebraKind block_tensor(std::size_t k, std::size_t d) { return {Tag::BlockTensor, k, d}; }
  static SubalgebraKind full() { return {Tag::Full, 0, 0}; }

  friend bool operator==(const SubalgebraKind&, const SubalgebraKind&) = default;
};

inline std::string to_string(const SubalgebraKind& kind) {
  switch (kind.tag) {
    case SubalgebraKind::Tag::Scalar: return "scalar";
    case SubalgebraKind::Tag::Diagonal: return "diagonal";
    case SubalgebraKind::Tag::BlockTensor:
      return "block_tensor(" + std::to_string(kind.blocks) + "x" + std::to_string(kind.inner) + ")";
    case SubalgebraKind::Tag::Full: return "full";
  }
  return "unknown";
}

/// The triple (A, B, E): ambient matrix size, subalgebra, and the
/// conditional expectation that the subalgebra kind determines.
class AlgebraContext {
 public:
  AlgebraContext(std::size_t ambient_dim, SubalgebraKind kind) : dim_(ambient_dim), kind_(kind) {
    if (dim_ == 0) throw Error(ErrorCode::DimMismatch, "ambient dimension must be positive");
    if (kind_.tag == SubalgebraKind::Tag::BlockTensor &&
        (kind_.blocks == 0 || kind_.inner == 0 || kind_.blocks * kind_.inner != dim_)) {
      throw Error(ErrorCode::DimMismatch, "BlockTensor requires k*d == ambient dim");
    }
  }

  std::size_t ambient_dim() const noexcept { return dim_; }
  const SubalgebraKind& kind() const noexcept { return kind_; }

  bool is_commutative() const noexcept {
    return kind_.tag == SubalgebraKind::Tag::Scalar || kind_.tag == SubalgebraKind::Tag::Diagonal ||
           (kind_.tag == SubalgebraKind::Tag::BlockTensor && kind_.blocks == 1) ||
           (kind_.tag == SubalgebraKind::Tag::Full && dim_ == 1);
  }

  /// E(x).
  Matrix expect(const Matrix& x) const {
    if (x.dim() != dim_) throw Error(ErrorCode::DimMismatch, "element does not have the ambient dim");
    switch (kind_.tag) {
      case SubalgebraKind::Tag::Full: return x;
      case SubalgebraKind::Tag::Scalar: {
        Complex tr{};
        for (std::size_t i = 0; i < dim_; ++i) tr += x(i, i);
        return Matrix::scalar(dim_, tr / static_cast<double>(dim_));
      }
      case SubalgebraKind::Tag::Diagonal: {
        Matrix out(dim_);
        for (std::size_t i = 0; i < dim_; ++i) out(i, i) = x(i, i);
        return out;
      }
      case SubalgebraKind::Tag::BlockTensor: return embed_block(partial_trace(x));
    }
    return x;
  }

  /// Normalized partial trace over the inner factor, as a k x k matrix.
  Matrix partial_trace(const Matrix& x) const {
    const std::size_t k = kind_.blocks;
    const std::size_t d = kind_.inner;
    Matrix reduced(k);
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t q = 0; q < k; ++q) {
        Complex s{};
        for (std::size_t t = 0; t < d; ++t) s += x(p * d + t, q * d + t);
        reduced(p, q) = s / static_cast<double>(d);
      }
    return reduced;
  }

  /// X (x) I_d for a k x k block X.
  Matrix embed_block(const Matrix& block) const {
    const std::size_t k = kind_.blocks;
    const std::size_t d = kind_.inner;
    if (block.dim() != k) throw Error(ErrorCode::DimMismatch, "block has wrong size");
    Matrix out(dim_);
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t q = 0; q < k; ++q)
        for (std::size_t t = 0; t < d; ++t) out(p * d + t, q * d + t) = block(p, q);
    return out;
  }

  /// ||E(x) - x|| <= tol * max(1, ||x||).
  bool contains(const Matrix& x, double tol = 1e-12) const {
    if (x.dim() != dim_) return false;
    const Matrix diff = expect(x) - x;
    return max_abs_entry(diff) <= tol * std::max(1.0, max_abs_entry(x));
  }

  /// Invertibility inside B. Throws NotInSubalgebra if b is not in B.
  bool is_invertible(const Matrix& b) const {
    require_member(b);
    try {
      (void)inverse_unchecked(b);
      return true;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Singular) return false;
      throw;
    }
  }

  /// b^{-1}, computed within B. Throws NotInvertibleInB.
  Matrix inverse(const Matrix& b) const {
    require_member(b);
    try {
      return inverse_unchecked(b);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Singular) throw Error(ErrorCode::NotInvertibleInB, "element of B is singular");
      throw;
    }
  }

  void require_member(const Matrix& b) const {
    if (!contains(b)) throw Error(ErrorCode::NotInSubalgebra, "element is not fixed by the expectation");
  }

 private:
  Matrix inverse_unchecked(const Matrix& b) const {
    switch (kind_.tag) {
      case SubalgebraKind::Tag::Scalar:
      case SubalgebraKind::Tag::Diagonal: {
        const double scale = max_abs_entry(b);
        Matrix out(dim_);
        for (std::size_t i = 0; i < dim_; ++i) {
          const Complex v = kind_.tag == SubalgebraKind::Tag::Scalar ? b(0, 0) : b(i, i);
          if (std::abs(v) <= 1e-12 * scale || v == Complex{}) {
            throw Error(ErrorCode::Singular, "zero diagonal entry");
          }
          out(i, i) = 1.0 / v;
        }
        return out;
      }
      case SubalgebraKind::Tag::BlockTensor: {
        Matrix block(kind_.blocks);
        const std::size_t d = kind_.inner;
        for (std::size_t p = 0; p < kind_.blocks; ++p)
          for (std::size_t q = 0; q < kind_.blocks; ++q) block(p, q) = b(p * d, q * d);
        return embed_block(mat_inv(block));
      }
      case SubalgebraKind::Tag::Full: return mat_inv(b);
    }
    return b;
  }

  std::size_t dim_;
  SubalgebraKind kind_;
};

inline Matrix cond_expect(const AlgebraContext& ctx, const Matrix& x) { return ctx.expect(x); }

inline bool is_invertible_in_B(const AlgebraContext& ctx, const Matrix& b) { return ctx.is_invertible(b); }

enum class Side { Left, Right };

/// Left: (1 - b a)^{-1}. Right: (1 - a b)^{-1}. Exact, by LU.
inline Matrix resolvent(const Matrix& a, const Matrix& b, Side side) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::DimMismatch, "resolvent: dimensions differ");
  Matrix one_minus = Matrix::identity(a.dim()) - (side == Side::Left ? b * a : a * b);
  return mat_inv(one_minus);
}

enum class TransformTag { G, Psi };

/// Radii of the neighbourhoods on which the fixed-point inversion is
/// guaranteed: injectivity ball, target ball, and where preimages land.
struct DomainCertificate {
  double norm_a = 0.0;
  double norm_inv_expect = 0.0;  // ||E(a)^{-1}||, Psi only
  double radius_inject = 0.0;
  double radius_onto = 0.0;
  double radius_preimage = 0.0;
  TransformTag transform = TransformTag::G;

  static DomainCertificate for_g(double norm_a) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    DomainCertificate c;
    c.norm_a = norm_a;
    c.transform = TransformTag::G;
    c.radius_inject = norm_a > 0 ? 1.0 / (4.0 * norm_a) : inf;
    c.radius_onto = norm_a > 0 ? 1.0 / (11.0 * norm_a) : inf;
    c.radius_preimage = norm_a > 0 ? 2.0 / (11.0 * norm_a) : inf;
    return c;
  }

  static DomainCertificate for_psi(double norm_a, double norm_inv_expect) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    DomainCertificate c;
    c.norm_a = norm_a;
    c.norm_inv_expect = norm_inv_expect;
    c.transform = TransformTag::Psi;
    const double a2 = norm_a * norm_a;
    const double e = norm_inv_expect;
    c.radius_inject = a2 > 0 ? 1.0 / (4.0 * a2 * e) : inf;
    c.radius_onto = a2 > 0 ? 1.0 / (11.0 * a2 * e * e) : inf;
    c.radius_preimage = a2 > 0 ? 2.0 / (11.0 * a2 * e) : inf;
    return c;
  }
};

}  // namespace amalgam
