#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <utility>

#include "amalgam/algebra.hpp"
#include "amalgam/distribution.hpp"
#include "amalgam/error.hpp"
#include "amalgam/matrix.hpp"
#include "amalgam/tensor.hpp"

namespace amalgam {

/// What the transforms need from an element a: the subalgebra B it lives
/// over, a norm bound standing in for ||a||, E(a), and the three resolvent
/// expectations at b in B:
///   eval_resolvent(b)   = E((1 - ba)^{-1})
///   eval_a_resolvent(b) = E(a (1 - ba)^{-1})
///   eval_g(b)           = E((1 - ba)^{-1}) b
///   eval_psi(b)         = E((1 - ba)^{-1}) - 1
template <class M>
concept ElementModel = requires(const M& m, const Matrix& b) {
  { m.b_context() } -> std::convertible_to<const AlgebraContext&>;
  { m.norm_bound() } -> std::convertible_to<double>;
  { m.expectation_of_a() } -> std::convertible_to<Matrix>;
  { m.eval_resolvent(b) } -> std::convertible_to<Matrix>;
  { m.eval_a_resolvent(b) } -> std::convertible_to<Matrix>;
  { m.eval_g(b) } -> std::convertible_to<Matrix>;
  { m.eval_psi(b) } -> std::convertible_to<Matrix>;
};

/// An explicit matrix a in a matrix algebra with conditional expectation.
/// Everything is computed from exact resolvents.
class ConcreteModel {
 public:
  ConcreteModel(AlgebraContext ctx, Matrix a) : ctx_(std::move(ctx)), a_(std::move(a)) {
    if (a_.dim() != ctx_.ambient_dim()) throw Error(ErrorCode::DimMismatch, "element does not match context");
    if (!a_.is_finite()) throw Error(ErrorCode::NonFinite, "element must be finite");
    norm_a_ = op_norm(a_);
    expect_a_ = ctx_.expect(a_);
  }

  const AlgebraContext& b_context() const noexcept { return ctx_; }
  const Matrix& element() const noexcept { return a_; }
  double norm_bound() const noexcept { return norm_a_; }
  Matrix expectation_of_a() const { return expect_a_; }

  Matrix eval_resolvent(const Matrix& b) const {
    check_domain(b);
    return ctx_.expect(resolvent(a_, b, Side::Left));
  }

  Matrix eval_a_resolvent(const Matrix& b) const {
    check_domain(b);
    return ctx_.expect(a_ * resolvent(a_, b, Side::Left));
  }

  /// E((1 - ba)^{-1}) b.
  Matrix eval_g(const Matrix& b) const { return eval_resolvent(b) * b; }

  /// b E((1 - ab)^{-1}); equal to eval_g by the bimodule property.
  Matrix eval_g_left_form(const Matrix& b) const {
    check_domain(b);
    return b * ctx_.expect(resolvent(a_, b, Side::Right));
  }

  /// b E(a (1 - ba)^{-1}), which equals E((1 - ba)^{-1}) - 1 without the cancellation.
  Matrix eval_psi(const Matrix& b) const { return b * eval_a_resolvent(b); }

  /// Requires b in B and ||b|| ||a|| < 1.
  void check_domain(const Matrix& b) const {
    ctx_.require_member(b);
    if (op_norm(b) * norm_a_ >= 1.0) throw Error(ErrorCode::OutOfDomain, "||b|| * ||a|| >= 1");
  }

 private:
  AlgebraContext ctx_;
  Matrix a_;
  double norm_a_ = 0.0;
  Matrix expect_a_;
};

/// Truncated series model of a over diagonal B = C^d, built from a BDist.
/// Every series is summed through the distribution's order N:
///   E(a (1 - ba)^{-1}) ~ sum_{n=1}^{N} M_n(b, ..., b).
class TruncatedModel {
 public:
  /// Evaluation is refused once norm_bound * ||b|| exceeds this.
  static constexpr double kMaxSeriesRatio = 0.5;

  explicit TruncatedModel(BDist dist)
      : dist_(std::move(dist)), ctx_((dist_.validate(), dist_.d), SubalgebraKind::diagonal()) {}

  const AlgebraContext& b_context() const noexcept { return ctx_; }
  const BDist& distribution() const noexcept { return dist_; }
  double norm_bound() const noexcept { return dist_.norm_bound; }
  Matrix expectation_of_a() const { return to_matrix(dist_.mean()); }

  /// E(a b_1 a ... b_{n-1} a) for diagonal insertions.
  Matrix eval_moment_word(std::size_t n, std::span<const DVector> inserts) const {
    return to_matrix(dist_.moment(n).apply(inserts));
  }

  Matrix eval_a_resolvent(const Matrix& b) const { return to_matrix(a_resolvent(coords(b))); }

  Matrix eval_resolvent(const Matrix& b) const {
    const DVector bv = coords(b);
    DVector s = hadamard(bv, a_resolvent(bv));
    for (auto& z : s) z += 1.0;
    return to_matrix(s);
  }

  Matrix eval_g(const Matrix& b) const {
    const DVector bv = coords(b);
    DVector s = hadamard(bv, a_resolvent(bv));
    for (auto& z : s) z += 1.0;
    return to_matrix(hadamard(std::move(s), bv));
  }

  Matrix eval_psi(const Matrix& b) const {
    const DVector bv = coords(b);
    return to_matrix(hadamard(bv, a_resolvent(bv)));
  }

  /// Bound on the dropped tail of g at b: ||b|| r^{N+1} / (1 - r), r = norm_bound ||b||.
  double truncation_bound(const Matrix& b) const {
    const double nb = op_norm(b);
    const double r = dist_.norm_bound * nb;
    return nb * std::pow(r, static_cast<double>(dist_.order + 1)) / (1.0 - r);
  }

 private:
  DVector coords(const Matrix& b) const {
    if (b.dim() != dist_.d || !b.is_diagonal()) {
      throw Error(ErrorCode::NotInSubalgebra, "truncated models take diagonal d x d elements");
    }
    DVector bv = b.diag();
    if (dist_.norm_bound * max_abs(bv) > kMaxSeriesRatio) {
      throw Error(ErrorCode::OutOfDomain, "norm_bound * ||b|| exceeds the truncated-series limit 0.5");
    }
    return bv;
  }

  DVector a_resolvent(const DVector& bv) const {
    DVector total(dist_.d);
    for (std::size_t n = 1; n <= dist_.order; ++n) {
      const DVector v = dist_.moments[n - 1].apply_uniform(bv);
      for (std::size_t i = 0; i < dist_.d; ++i) total[i] += v[i];
    }
    return total;
  }

  BDist dist_;
  AlgebraContext ctx_;
};

static_assert(ElementModel<ConcreteModel>);
static_assert(ElementModel<TruncatedModel>);

}  // namespace amalgam
