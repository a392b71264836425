#include <gtest/gtest.h>

#include "test_support.hpp"

namespace amalgam {
namespace {

using testing::Rng;

ConcreteModel scalar_model(Complex c) { return ConcreteModel(AlgebraContext(1, SubalgebraKind::full()), Matrix::scalar(1, c)); }
Matrix s1(Complex z) { return Matrix::scalar(1, z); }

TEST(Transforms, ScalarClosedForms) {
  const Complex c(0.6, -0.3);
  const auto model = scalar_model(c);
  const Complex b(0.2, 0.1);
  EXPECT_LT(std::abs(g_transform(model, s1(b))(0, 0) - b / (1.0 - b * c)), 1e-15);
  EXPECT_LT(std::abs(psi_transform(model, s1(b))(0, 0) - b * c / (1.0 - b * c)), 1e-15);
}

TEST(Transforms, GMatchesNeumannSeriesAndLeftForm) {
  Rng rng(30);
  for (const auto& ctx : testing::sample_contexts()) {
    const std::size_t m = ctx.ambient_dim();
    const ConcreteModel model(ctx, rng.unit_element(m));
    const Matrix b = rng.b_element(ctx, 0.4);
    // b E((1 - ab)^{-1}) = sum_n b E((ab)^n)
    Matrix series(m);
    Matrix power = Matrix::identity(m);
    for (int n = 0; n < 80; ++n) {
      series += b * ctx.expect(power);
      power = power * (model.element() * b);
    }
    const Matrix g = g_transform(model, b);
    EXPECT_LT(max_abs_entry(g - series), 1e-13) << to_string(ctx.kind());
    EXPECT_LT(max_abs_entry(g - model.eval_g_left_form(b)), 1e-13);
    const Matrix psi_direct = ctx.expect(resolvent(model.element(), b, Side::Left)) - Matrix::identity(m);
    EXPECT_LT(max_abs_entry(psi_transform(model, b) - psi_direct), 1e-13);
  }
}

TEST(Transforms, DomainErrors) {
  const AlgebraContext ctx(2, SubalgebraKind::diagonal());
  const ConcreteModel model(ctx, Matrix::identity(2));
  try {
    (void)g_transform(model, Matrix::identity(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OutOfDomain);
  }
  Matrix off(2);
  off(0, 1) = 0.1;
  try {
    (void)g_transform(model, off);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotInSubalgebra);
  }
}

// Central differences at t and t/2: the error must fall by ~4.
template <class F, class D>
void check_second_order(F&& f, D&& df, const Matrix& b, const Matrix& h) {
  auto fd_err = [&](double t) {
    const Matrix fd = (1.0 / (2.0 * t)) * (f(b + t * h) - f(b - t * h));
    return op_norm(fd - df(b, h));
  };
  const double e1 = fd_err(1e-4);
  const double e2 = fd_err(5e-5);
  EXPECT_GE(e1 / e2, 3.5);
  EXPECT_LE(e1 / e2, 4.5);
}

TEST(Derivatives, CentralDifferencesAreSecondOrder) {
  Rng rng(31);
  for (const auto& ctx : {AlgebraContext(4, SubalgebraKind::diagonal()), AlgebraContext(4, SubalgebraKind::block_tensor(2, 2))}) {
    for (int trial = 0; trial < 5; ++trial) {
      const ConcreteModel model(ctx, rng.unit_element(4));
      const Matrix b = rng.b_element(ctx, 0.5);
      const Matrix h = rng.b_element(ctx, 1.0);
      check_second_order([&](const Matrix& x) { return model.eval_g(x); },
                         [&](const Matrix& x, const Matrix& y) { return dg(model, x, y); }, b, h);
      check_second_order([&](const Matrix& x) { return model.eval_psi(x); },
                         [&](const Matrix& x, const Matrix& y) { return dpsi(model, x, y); }, b, h);
    }
  }
}

TEST(Derivatives, AtZero) {
  Rng rng(32);
  const AlgebraContext ctx(4, SubalgebraKind::block_tensor(2, 2));
  const ConcreteModel model(ctx, rng.unit_element(4));
  const Matrix h = rng.b_element(ctx, 1.0);
  EXPECT_LT(max_abs_entry(dg(model, Matrix(4), h) - h), 1e-15);
  EXPECT_LT(max_abs_entry(dpsi(model, Matrix(4), h) - h * model.expectation_of_a()), 1e-15);
}

TEST(Derivatives, NormBounds) {
  Rng rng(33);
  const AlgebraContext ctx(4, SubalgebraKind::block_tensor(2, 2));
  for (int trial = 0; trial < 10; ++trial) {
    const ConcreteModel model(ctx, rng.unit_element(4));
    const double na = model.norm_bound();
    const Matrix b = rng.b_element(ctx, rng.uniform(0.05, 0.9) / na);
    const double alpha = op_norm(b) * na;
    const double g_bound = alpha * (2.0 - alpha) / ((1.0 - alpha) * (1.0 - alpha));
    const double psi_bound = op_norm(b) * na * na * (2.0 - alpha) / ((1.0 - alpha) * (1.0 - alpha));
    for (int k = 0; k < 20; ++k) {
      const Matrix h = rng.b_element(ctx, 1.0);
      EXPECT_LT(op_norm(dg(model, b, h) - dg(model, Matrix(4), h)), g_bound);
      EXPECT_LT(op_norm(dpsi(model, b, h) - dpsi(model, Matrix(4), h)), psi_bound);
    }
  }
}

TEST(Inversion, ScalarClosedForms) {
  const Complex c(0.7, 0.2);
  const auto model = scalar_model(c);
  const double r = 0.9 / (11.0 * std::abs(c));
  const Complex w = std::polar(r, 0.7);
  const auto g = invert_g(model, s1(w), 1e-14);
  EXPECT_LT(std::abs(g.preimage(0, 0) - w / (1.0 + w * c)), 1e-13);
  EXPECT_TRUE(g.report.converged);
  EXPECT_TRUE(g.report.certified);
  const double rp = 0.9 * DomainCertificate::for_psi(std::abs(c), 1.0 / std::abs(c)).radius_onto;
  const Complex wp = std::polar(rp, -0.4);
  const auto p = invert_psi(model, s1(wp), 1e-14);
  EXPECT_LT(std::abs(p.preimage(0, 0) - wp / (c * (1.0 + wp))), 1e-13);
}

TEST(Inversion, CertifiedBallContractionAndPreimage) {
  Rng rng(34);
  for (const auto& ctx : testing::sample_contexts()) {
    for (int trial = 0; trial < 5; ++trial) {
      const ConcreteModel model(ctx, rng.unit_element(ctx.ambient_dim()));
      const auto gc = DomainCertificate::for_g(model.norm_bound());
      const Matrix w = rng.b_element(ctx, 0.95 * gc.radius_onto);
      const auto g = invert_g(model, w, 1e-13);
      EXPECT_LE(g.report.max_contraction(), 0.5 + 1e-9);
      EXPECT_LE(g.report.final_residual, 1e-10);
      EXPECT_LE(g.report.preimage_norm, gc.radius_preimage);
      EXPECT_LT(op_norm(model.eval_g(g.preimage) - w), 1e-12);

      const auto pc = psi_certificate(model);
      const Matrix wp = rng.b_element(ctx, 0.95 * pc.radius_onto);
      const auto p = invert_psi(model, wp, 1e-13);
      EXPECT_LE(p.report.max_contraction(), 40.0 / 81.0 + 1e-9);
      EXPECT_LE(p.report.final_residual, 1e-10);
      EXPECT_LE(p.report.preimage_norm, pc.radius_preimage);
    }
  }
}

TEST(Inversion, ExpectationNotInvertible) {
  Matrix a(2);
  a(0, 1) = 1.0;
  a(1, 0) = 1.0;
  const ConcreteModel model(AlgebraContext(2, SubalgebraKind::diagonal()), a);
  try {
    (void)invert_psi(model, Matrix::scalar(2, 0.01));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ExpectationNotInvertible);
  }
}

TEST(Inversion, ReportsUncertifiedTargets) {
  const auto model = scalar_model(1.0);
  const auto g = invert_g(model, s1(0.15));
  EXPECT_FALSE(g.report.certified);
  EXPECT_TRUE(g.report.converged);
  EXPECT_LT(std::abs(g.preimage(0, 0) - 0.15 / 1.15), 1e-10);
}

TEST(RTransform, PointMass) {
  const Complex c(0.8, -0.1);
  const auto model = scalar_model(c);
  const Complex w = std::polar(0.5 / (11.0 * std::abs(c)), 1.1);
  for (RPath path : {RPath::Regular, RPath::Inverse})
    EXPECT_LT(std::abs(r_transform(model, s1(w), 1e-13, path)(0, 0) - c), 1e-12);
}

TEST(RTransform, PathsAgree) {
  Rng rng(35);
  for (const auto& ctx : testing::sample_contexts()) {
    for (int trial = 0; trial < 5; ++trial) {
      const ConcreteModel model(ctx, rng.unit_element(ctx.ambient_dim()));
      const auto cert = DomainCertificate::for_g(model.norm_bound());
      const Matrix w = rng.b_element(ctx, 0.9 * cert.radius_onto) ;
      if (!ctx.is_invertible(w)) continue;
      const Matrix r1 = r_transform(model, w, 1e-13, RPath::Regular);
      const Matrix r2 = r_transform(model, w, 1e-13, RPath::Inverse);
      EXPECT_LT(op_norm(r1 - r2), 1e-9) << to_string(ctx.kind());
    }
  }
}

TEST(RTransform, OutsideCertifiedBall) {
  const auto model = scalar_model(1.0);
  try {
    (void)r_transform(model, s1(0.1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OutOfCertifiedDomain);
  }
}

TEST(STransform, PointMassAndDilationOfScalars) {
  const Complex c(0.8, 0.3);
  const auto model = scalar_model(c);
  const Complex w = std::polar(0.5 * psi_certificate(model).radius_onto, 0.3);
  EXPECT_LT(std::abs(s_transform(model, s1(w), 1e-14)(0, 0) - 1.0 / c), 1e-12);
}

TEST(STransform, SingularTarget) {
  const ConcreteModel model(AlgebraContext(2, SubalgebraKind::diagonal()), Matrix::identity(2));
  try {
    (void)s_transform(model, Matrix::diagonal(std::vector<Complex>{0.001, 0.0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotInvertibleInB);
  }
}

TEST(RsRelation, HoldsOnCommutativeAndNoncommutativeB) {
  Rng rng(36);
  for (const auto& ctx : testing::sample_contexts()) {
    for (int trial = 0; trial < 4; ++trial) {
      const ConcreteModel model(ctx, rng.unit_element(ctx.ambient_dim()));
      const double e = op_norm(inverse_expectation(model));
      const double na = model.norm_bound();
      const Matrix b = rng.b_element(ctx, 0.5 / (12.0 * na * na * na * e * e));
      if (!ctx.is_invertible(b)) continue;
      const auto rep = check_rs_relation(model, b, 1e-9);
      EXPECT_TRUE(rep.pass) << to_string(ctx.kind()) << " " << rep.max_residual();
      EXPECT_EQ(rep.commutative_b, ctx.is_commutative());
      ASSERT_EQ(rep.residuals.size(), 2u);
    }
  }
}

TEST(Dilation, PsiAndSFactor) {
  Rng rng(37);
  for (const auto& ctx : testing::sample_contexts()) {
    for (int trial = 0; trial < 4; ++trial) {
      const std::size_t m = ctx.ambient_dim();
      const ConcreteModel model(ctx, rng.unit_element(m));
      const Matrix z = rng.b_element(ctx, 1.0) + 2.0 * Matrix::identity(m);
      const ConcreteModel za(ctx, z * model.element());
      const ConcreteModel zm(ctx, z);
      const double r = std::min({psi_certificate(model).radius_onto, psi_certificate(za).radius_onto,
                                 psi_certificate(zm).radius_onto});
      const Matrix b = rng.b_element(ctx, 0.5 * r);
      if (!ctx.is_invertible(b)) continue;
      const auto rep = check_dilation(model, z, b, 1e-9);
      EXPECT_TRUE(rep.pass) << to_string(ctx.kind()) << " " << rep.max_residual();
      // S_z = z^{-1}.
      EXPECT_LT(op_norm(s_transform(zm, b, 1e-13) - ctx.inverse(z)), 1e-9);
    }
  }
}

// Exact B-valued moments of a matrix over the diagonal, as a BDist.
BDist diagonal_moments(const Matrix& a, std::size_t order) {
  const std::size_t d = a.dim();
  BDist dist{d, order, op_norm(a), {}};
  for (std::size_t n = 1; n <= order; ++n) {
    MultilinearTensor t(d, n);
    for (std::size_t col = 0; col < t.columns(); ++col) {
      const auto coords = decode_column(col, d, n - 1);
      Matrix prod = a;
      for (auto j : coords) prod = prod * Matrix::diagonal(basis(d, j)) * a;
      for (std::size_t i = 0; i < d; ++i) t.at(i, col) = prod(i, i);
    }
    dist.moments.push_back(std::move(t));
  }
  return dist;
}

TEST(TruncatedModel, AgreesWithConcreteUpToTail) {
  Rng rng(38);
  const AlgebraContext ctx(3, SubalgebraKind::diagonal());
  const Matrix a = rng.unit_element(3);
  const ConcreteModel exact(ctx, a);
  const TruncatedModel trunc(diagonal_moments(a, 8));
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix b = Matrix::diagonal(rng.dvector(3, 0.05, 0.2));
    EXPECT_LE(op_norm(trunc.eval_g(b) - exact.eval_g(b)), trunc.truncation_bound(b) * (1 + 1e-9) + 1e-15);
    EXPECT_LE(op_norm(trunc.eval_psi(b) - exact.eval_psi(b)), trunc.truncation_bound(b) * trunc.norm_bound() + 1e-15);
  }
}

TEST(TruncatedModel, RefusesLargeArguments) {
  const TruncatedModel model(cumulants_to_moments(CumulantFamily::zero(2, 3)));
  const TruncatedModel big([] {
    BDist d = cumulants_to_moments(CumulantFamily::zero(1, 2));
    d.norm_bound = 1.0;
    return d;
  }());
  try {
    (void)big.eval_g(Matrix::scalar(1, 0.6));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OutOfDomain);
  }
  try {
    (void)model.eval_g(Matrix::identity(3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotInSubalgebra);
  }
}

}  // namespace
}  // namespace amalgam
