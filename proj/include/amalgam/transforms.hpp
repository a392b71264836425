#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "amalgam/algebra.hpp"
#include "amalgam/error.hpp"
#include "amalgam/matrix.hpp"
#include "amalgam/models.hpp"

namespace amalgam {

inline constexpr double kDefaultTol = 1e-10;
inline constexpr int kMaxFixedPointIterations = 200;

// g_a(b) = E((1 - ba)^{-1}) b, the Cauchy-type transform.
template <ElementModel M>
Matrix g_transform(const M& model, const Matrix& b) {
  return model.eval_g(b);
}

// Psi_a(b) = E((1 - ba)^{-1}) - 1.
template <ElementModel M>
Matrix psi_transform(const M& model, const Matrix& b) {
  return model.eval_psi(b);
}

/// Dg_a(b) h = E((1 - ba)^{-1} h (1 - ab)^{-1}).
inline Matrix dg(const ConcreteModel& model, const Matrix& b, const Matrix& h) {
  model.check_domain(b);
  const Matrix& a = model.element();
  return model.b_context().expect(resolvent(a, b, Side::Left) * h * resolvent(a, b, Side::Right));
}

/// DPsi_a(b) h = E((1 - ba)^{-1} h a (1 - ba)^{-1}).
inline Matrix dpsi(const ConcreteModel& model, const Matrix& b, const Matrix& h) {
  model.check_domain(b);
  const Matrix& a = model.element();
  const Matrix left = resolvent(a, b, Side::Left);
  return model.b_context().expect(left * h * a * left);
}

/// Trace of one Banach fixed-point solve.
struct FixedPointReport {
  bool converged = false;
  /// The target lay strictly inside the certified onto-ball.
  bool certified = false;
  std::size_t iterations = 0;
  double final_residual = 0.0;
  double preimage_norm = 0.0;
  /// ||b_{k+1} - b_k|| / ||b_k - b_{k-1}|| for steps above the rounding floor.
  std::vector<double> contraction_estimates;
  DomainCertificate certificate;

  double max_contraction() const {
    double m = 0.0;
    for (double r : contraction_estimates) m = std::max(m, r);
    return m;
  }
};

struct Inversion {
  Matrix preimage;
  FixedPointReport report;
};

namespace detail {

// Iterates b <- step(b) from b = 0 until ||b_{k+1} - b_k|| <= stop, or until
// steps at rounding level for the problem scale stop shrinking.
template <class Step>
Inversion banach_iterate(Step&& step, std::size_t dim, double stop, double scale, FixedPointReport report) {
  // Step ratios below this are dominated by rounding, not by the map.
  const double noise = 1e3 * std::numeric_limits<double>::epsilon() * std::max(scale, 1e-300);
  Matrix b(dim);
  double prev = -1.0;
  for (int it = 1; it <= kMaxFixedPointIterations; ++it) {
    Matrix next;
    try {
      next = step(b);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::OutOfDomain) throw;
      throw Error(ErrorCode::NoConvergence, std::string("iterate left the domain: ") + e.what());
    }
    const double s = op_norm(next - b);
    if (prev > noise && s > noise) report.contraction_estimates.push_back(s / prev);
    b = std::move(next);
    prev = s;
    report.iterations = static_cast<std::size_t>(it);
    if (s <= stop || (s <= noise && s >= 0.5 * prev)) {
      report.converged = true;
      return {std::move(b), std::move(report)};
    }
  }
  throw Error(ErrorCode::NoConvergence, "fixed-point iteration hit the iteration cap");
}

}  // namespace detail

/// Solves g_a(b) = w by b <- w + b - g_a(b) from b = 0.
///
/// Stops once a step is at most tol * max(1, ||w||). Targets outside the
/// certified ball are still attempted; the report says so.
template <ElementModel M>
Inversion invert_g(const M& model, const Matrix& w, double tol = kDefaultTol) {
  const AlgebraContext& ctx = model.b_context();
  ctx.require_member(w);
  FixedPointReport report;
  report.certificate = DomainCertificate::for_g(model.norm_bound());
  const double nw = op_norm(w);
  report.certified = nw < report.certificate.radius_onto;
  const double stop = tol * std::max(1.0, nw);
  auto result = detail::banach_iterate([&](const Matrix& b) { return w + b - model.eval_g(b); }, w.dim(), stop,
                                       std::max(nw, 1e-300), std::move(report));
  result.report.final_residual = op_norm(model.eval_g(result.preimage) - w);
  result.report.preimage_norm = op_norm(result.preimage);
  return result;
}

/// E(a)^{-1} in B, or ExpectationNotInvertible.
template <ElementModel M>
Matrix inverse_expectation(const M& model) {
  try {
    return model.b_context().inverse(model.expectation_of_a());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NotInvertibleInB) throw Error(ErrorCode::ExpectationNotInvertible, "E(a) is singular");
    throw;
  }
}

template <ElementModel M>
DomainCertificate psi_certificate(const M& model) {
  return DomainCertificate::for_psi(model.norm_bound(), op_norm(inverse_expectation(model)));
}

/// Solves Psi_a(b) = w through Gamma_a(b) = Psi_a(b) E(a)^{-1}:
/// b <- w E(a)^{-1} + b - Gamma_a(b), from b = 0.
template <ElementModel M>
Inversion invert_psi(const M& model, const Matrix& w, double tol = kDefaultTol) {
  const AlgebraContext& ctx = model.b_context();
  ctx.require_member(w);
  const Matrix inv_e = inverse_expectation(model);
  const double norm_e = op_norm(model.expectation_of_a());
  FixedPointReport report;
  report.certificate = DomainCertificate::for_psi(model.norm_bound(), op_norm(inv_e));
  const double nw = op_norm(w);
  report.certified = nw < report.certificate.radius_onto;
  // ||Psi(b) - w|| <= ||E(a)|| * step, so the step target is scaled down.
  const double stop = tol * std::max(1.0, nw) / std::max(1.0, norm_e);
  const Matrix target = w * inv_e;
  auto result = detail::banach_iterate([&](const Matrix& b) { return target + b - model.eval_psi(b) * inv_e; },
                                       w.dim(), stop, std::max(op_norm(target), 1e-300), std::move(report));
  result.report.final_residual = op_norm(model.eval_psi(result.preimage) - w);
  result.report.preimage_norm = op_norm(result.preimage);
  return result;
}

enum class RPath {
  /// E(a (1 - ba)^{-1}) E((1 - ba)^{-1})^{-1} at b = g^{-1}(w); needs no inverse of w.
  Regular,
  /// g^{-1}(w)^{-1} - w^{-1}, for invertible w.
  Inverse,
};

namespace detail {

inline double cancellation_tol(double tol, double scale, double power) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  return std::max(tol * std::pow(scale, power), 64.0 * eps * scale);
}

}  // namespace detail

/// R_a(w) for w in the certified ball ||w|| < 1/(11 ||a||).
template <ElementModel M>
Matrix r_transform(const M& model, const Matrix& w, double tol = kDefaultTol, RPath path = RPath::Regular) {
  const AlgebraContext& ctx = model.b_context();
  ctx.require_member(w);
  const auto cert = DomainCertificate::for_g(model.norm_bound());
  const double nw = op_norm(w);
  if (!(nw < cert.radius_onto)) throw Error(ErrorCode::OutOfCertifiedDomain, "||w|| >= 1/(11 ||a||)");
  if (path == RPath::Regular) {
    const Matrix b = invert_g(model, w, tol).preimage;
    return model.eval_a_resolvent(b) * ctx.inverse(model.eval_resolvent(b));
  }
  const Matrix w_inv = ctx.inverse(w);
  // b^{-1} - w^{-1} cancels two terms of size 1/||w||.
  const Matrix b = invert_g(model, w, detail::cancellation_tol(tol, nw, 2.0)).preimage;
  return ctx.inverse(b) - w_inv;
}

/// S_a(w) = w^{-1} (1 + w) Psi_a^{-1}(w) for invertible w in the certified
/// ball ||w|| < 1/(11 ||a||^2 ||E(a)^{-1}||^2). Multiplicativity under free
/// products is exact only for commutative B; see AlgebraContext::is_commutative.
template <ElementModel M>
Matrix s_transform(const M& model, const Matrix& w, double tol = kDefaultTol) {
  const AlgebraContext& ctx = model.b_context();
  ctx.require_member(w);
  const auto cert = psi_certificate(model);
  const double nw = op_norm(w);
  const Matrix w_inv = ctx.inverse(w);
  if (!(nw < cert.radius_onto)) {
    throw Error(ErrorCode::OutOfCertifiedDomain, "||w|| >= 1/(11 ||a||^2 ||E(a)^{-1}||^2)");
  }
  const Matrix b = invert_psi(model, w, detail::cancellation_tol(tol, nw, 1.0)).preimage;
  return w_inv * (Matrix::identity(w.dim()) + w) * b;
}

/// Named residuals of an identity check; pass iff every residual <= tol.
struct ResidualReport {
  std::vector<std::pair<std::string, double>> residuals;
  bool pass = false;
  bool commutative_b = false;
  std::vector<FixedPointReport> solves;

  double max_residual() const {
    double m = 0.0;
    for (const auto& [name, r] : residuals) m = std::max(m, r);
    return m;
  }
};

namespace detail {

inline double relative_residual(const Matrix& lhs, const Matrix& rhs) {
  return op_norm(lhs - rhs) / std::max(op_norm(rhs), std::numeric_limits<double>::min());
}

inline void finish(ResidualReport& rep, double tol) {
  rep.pass = true;
  for (const auto& [name, r] : rep.residuals) rep.pass = rep.pass && std::isfinite(r) && r <= tol;
}

}  // namespace detail

/// The two compositions behind b S_a(b) = [b R_a(b)]^{<-1>}:
///   g_a(b) R_a(g_a(b)) = Psi_a(b)  and  Psi_a(b) S_a(Psi_a(b)) = g_a(b).
/// Residuals are relative to the right-hand sides.
template <ElementModel M>
ResidualReport check_rs_relation(const M& model, const Matrix& b, double tol, double solver_tol = 1e-13) {
  const AlgebraContext& ctx = model.b_context();
  (void)inverse_expectation(model);
  if (!ctx.is_invertible(b)) throw Error(ErrorCode::NotInvertibleInB, "b must be invertible in B");
  const Matrix gb = model.eval_g(b);
  const Matrix psib = model.eval_psi(b);

  ResidualReport rep;
  rep.commutative_b = ctx.is_commutative();
  rep.solves.push_back(invert_g(model, gb, solver_tol).report);
  rep.solves.push_back(invert_psi(model, psib, solver_tol).report);
  const Matrix r = r_transform(model, gb, solver_tol);
  const Matrix s = s_transform(model, psib, solver_tol);
  rep.residuals.emplace_back("g_r_composition", detail::relative_residual(gb * r, psib));
  rep.residuals.emplace_back("psi_s_composition", detail::relative_residual(psib * s, gb));
  detail::finish(rep, tol);
  return rep;
}

/// Dilation by z in B_inv: Psi_{za}(b) = Psi_a(bz) and S_{za}(b) = S_a(b) S_z(b).
/// Residuals are relative.
inline ResidualReport check_dilation(const ConcreteModel& model, const Matrix& z, const Matrix& b, double tol,
                                     double solver_tol = 1e-13) {
  const AlgebraContext& ctx = model.b_context();
  if (!ctx.is_invertible(z)) throw Error(ErrorCode::NotInvertibleInB, "z must be invertible in B");
  const ConcreteModel za(ctx, z * model.element());
  const ConcreteModel zm(ctx, z);

  ResidualReport rep;
  rep.commutative_b = ctx.is_commutative();
  rep.residuals.emplace_back("psi_dilation",
                             detail::relative_residual(za.eval_psi(b), model.eval_psi(b * z)));
  const Matrix s_za = s_transform(za, b, solver_tol);
  const Matrix s_a = s_transform(model, b, solver_tol);
  const Matrix s_z = s_transform(zm, b, solver_tol);
  rep.residuals.emplace_back("s_dilation", detail::relative_residual(s_a * s_z, s_za));
  detail::finish(rep, tol);
  return rep;
}

/// ||R_sum(w) - R_1(w) - R_2(w)||.
template <ElementModel M1, ElementModel M2, ElementModel M3>
double additivity_check(const M1& model1, const M2& model2, const M3& model_sum, const Matrix& w,
                        double tol = 1e-13) {
  const Matrix lhs = r_transform(model_sum, w, tol);
  return op_norm(lhs - r_transform(model1, w, tol) - r_transform(model2, w, tol));
}

/// ||S_prod(w) - S_1(w) S_2(w)||.
template <ElementModel M1, ElementModel M2, ElementModel M3>
double multiplicativity_check(const M1& model1, const M2& model2, const M3& model_prod, const Matrix& w,
                              double tol = 1e-13) {
  const Matrix lhs = s_transform(model_prod, w, tol);
  return op_norm(lhs - s_transform(model1, w, tol) * s_transform(model2, w, tol));
}

}  // namespace amalgam
