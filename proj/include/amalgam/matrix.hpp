#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "amalgam/error.hpp"

namespace amalgam {

using Complex = std::complex<double>;

/// Dense square complex matrix, row-major. Plays the role of an element of
/// the ambient algebra; elements of the subalgebra are stored the same way.
class Matrix {
 public:
  Matrix() = default;

  explicit Matrix(std::size_t dim) : dim_(dim), data_(dim * dim) {}

  Matrix(std::size_t dim, std::vector<Complex> entries) : dim_(dim), data_(std::move(entries)) {
    if (data_.size() != dim_ * dim_) {
      throw Error(ErrorCode::DimMismatch, "entry count does not match dim*dim");
    }
    if (!is_finite()) {
      throw Error(ErrorCode::NonFinite, "matrix entries must be finite");
    }
  }

  static Matrix identity(std::size_t dim) {
    Matrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix diagonal(std::span<const Complex> diag) {
    Matrix m(diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
    return m;
  }

  static Matrix scalar(std::size_t dim, Complex value) {
    Matrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = value;
    return m;
  }

  std::size_t dim() const noexcept { return dim_; }

  Complex& operator()(std::size_t r, std::size_t c) { return data_[r * dim_ + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return data_[r * dim_ + c]; }

  std::span<const Complex> entries() const noexcept { return data_; }
  std::span<Complex> entries() noexcept { return data_; }

  std::vector<Complex> diag() const {
    std::vector<Complex> d(dim_);
    for (std::size_t i = 0; i < dim_; ++i) d[i] = (*this)(i, i);
    return d;
  }

  bool is_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(),
                       [](const Complex& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
  }

  bool is_diagonal() const noexcept {
    for (std::size_t r = 0; r < dim_; ++r)
      for (std::size_t c = 0; c < dim_; ++c)
        if (r != c && (*this)(r, c) != Complex{}) return false;
    return true;
  }

  Matrix adjoint() const {
    Matrix out(dim_);
    for (std::size_t r = 0; r < dim_; ++r)
      for (std::size_t c = 0; c < dim_; ++c) out(c, r) = std::conj((*this)(r, c));
    return out;
  }

  Matrix& operator+=(const Matrix& other) {
    check_same(other);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
  }

  Matrix& operator-=(const Matrix& other) {
    check_same(other);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
  }

  Matrix& operator*=(Complex s) {
    for (auto& z : data_) z *= s;
    return *this;
  }

  friend Matrix operator+(Matrix x, const Matrix& y) { return x += y; }
  friend Matrix operator-(Matrix x, const Matrix& y) { return x -= y; }
  friend Matrix operator-(Matrix x) { return x *= -1.0; }
  friend Matrix operator*(Complex s, Matrix x) { return x *= s; }
  friend Matrix operator*(Matrix x, Complex s) { return x *= s; }
  friend Matrix operator*(const Matrix& x, const Matrix& y);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  void check_same(const Matrix& other) const {
    if (other.dim_ != dim_) throw Error(ErrorCode::DimMismatch, "matrix dimensions differ");
  }

  std::size_t dim_ = 0;
  std::vector<Complex> data_;
};

inline Matrix mat_mul(const Matrix& x, const Matrix& y) {
  if (x.dim() != y.dim()) throw Error(ErrorCode::DimMismatch, "mat_mul: dimensions differ");
  const std::size_t m = x.dim();
  Matrix out(m);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t k = 0; k < m; ++k) {
      const Complex xrk = x(r, k);
      if (xrk == Complex{}) continue;
      for (std::size_t c = 0; c < m; ++c) out(r, c) += xrk * y(k, c);
    }
  }
  return out;
}

inline Matrix operator*(const Matrix& x, const Matrix& y) { return mat_mul(x, y); }

inline double frobenius_norm(const Matrix& x) {
  double s = 0.0;
  for (const auto& z : x.entries()) s += std::norm(z);
  return std::sqrt(s);
}

inline double max_abs_entry(const Matrix& x) {
  double s = 0.0;
  for (const auto& z : x.entries()) s = std::max(s, std::abs(z));
  return s;
}

namespace detail {

inline double rayleigh_power_iteration(const Matrix& gram, std::vector<Complex> v, double tol,
                                       int max_iter) {
  const std::size_t m = gram.dim();
  auto normalize = [](std::vector<Complex>& u) {
    double n = 0.0;
    for (const auto& z : u) n += std::norm(z);
    n = std::sqrt(n);
    if (n == 0.0) return false;
    for (auto& z : u) z /= n;
    return true;
  };
  if (!normalize(v)) return 0.0;
  std::vector<Complex> w(m);
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    for (std::size_t r = 0; r < m; ++r) {
      Complex s{};
      for (std::size_t c = 0; c < m; ++c) s += gram(r, c) * v[c];
      w[r] = s;
    }
    // gram is Hermitian PSD, so <v, gram v> is real and nonnegative.
    double next = 0.0;
    for (std::size_t r = 0; r < m; ++r) next += (std::conj(v[r]) * w[r]).real();
    v.swap(w);
    if (!normalize(v)) return std::max(next, 0.0);
    const bool settled = std::abs(next - lambda) <= tol * std::max(next, 0.0);
    lambda = next;
    if (settled && it > 0) break;
  }
  return std::max(lambda, 0.0);
}

}  // namespace detail

/// Spectral norm (largest singular value).
///
/// Power iteration on x^H x from the normalized all-ones vector; diagonal
/// inputs short-circuit to the largest modulus. If the all-ones start is
/// deficient (the estimate falls below the largest column norm, a hard lower
/// bound), the iteration is restarted from that column's basis vector.
inline double op_norm(const Matrix& x) {
  const std::size_t m = x.dim();
  if (m == 0) return 0.0;
  if (x.is_diagonal()) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s = std::max(s, std::abs(x(i, i)));
    return s;
  }
  constexpr double kTol = 1e-12;
  constexpr int kMaxIter = 10000;
  const Matrix gram = x.adjoint() * x;
  double lambda = detail::rayleigh_power_iteration(gram, std::vector<Complex>(m, 1.0), kTol, kMaxIter);

  std::size_t best_col = 0;
  double best_col_sq = 0.0;
  for (std::size_t c = 0; c < m; ++c) {
    const double sq = gram(c, c).real();
    if (sq > best_col_sq) {
      best_col_sq = sq;
      best_col = c;
    }
  }
  if (lambda < best_col_sq * (1.0 - 1e-12)) {
    std::vector<Complex> e(m);
    e[best_col] = 1.0;
    lambda = std::max({lambda, best_col_sq,
                       detail::rayleigh_power_iteration(gram, std::move(e), kTol, kMaxIter)});
  }
  return std::sqrt(lambda);
}

/// Partial-pivot LU factorization, P x = L U, packed in one matrix.
class LuDecomposition {
 public:
  explicit LuDecomposition(const Matrix& x) : lu_(x), perm_(x.dim()) {
    if (!x.is_finite()) throw Error(ErrorCode::NonFinite, "LU of non-finite matrix");
    const std::size_t m = x.dim();
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    // Frobenius norm stands in for the operator norm in the pivot threshold;
    // both agree up to a factor sqrt(m).
    const double threshold = 1e-12 * frobenius_norm(x);
    for (std::size_t k = 0; k < m; ++k) {
      std::size_t piv = k;
      double best = std::abs(lu_(k, k));
      for (std::size_t r = k + 1; r < m; ++r) {
        const double v = std::abs(lu_(r, k));
        if (v > best) {
          best = v;
          piv = r;
        }
      }
      if (best <= threshold || best == 0.0) {
        throw Error(ErrorCode::Singular, "pivot below threshold in LU factorization");
      }
      if (piv != k) {
        for (std::size_t c = 0; c < m; ++c) std::swap(lu_(k, c), lu_(piv, c));
        std::swap(perm_[k], perm_[piv]);
      }
      const Complex pivot = lu_(k, k);
      for (std::size_t r = k + 1; r < m; ++r) {
        const Complex f = lu_(r, k) / pivot;
        lu_(r, k) = f;
        if (f == Complex{}) continue;
        for (std::size_t c = k + 1; c < m; ++c) lu_(r, c) -= f * lu_(k, c);
      }
    }
  }

  /// Solves x * col = rhs.
  std::vector<Complex> solve(std::span<const Complex> rhs) const {
    const std::size_t m = lu_.dim();
    std::vector<Complex> y(m);
    for (std::size_t r = 0; r < m; ++r) {
      Complex s = rhs[perm_[r]];
      for (std::size_t c = 0; c < r; ++c) s -= lu_(r, c) * y[c];
      y[r] = s;
    }
    for (std::size_t r = m; r-- > 0;) {
      Complex s = y[r];
      for (std::size_t c = r + 1; c < m; ++c) s -= lu_(r, c) * y[c];
      y[r] = s / lu_(r, r);
    }
    return y;
  }

  Matrix inverse() const {
    const std::size_t m = lu_.dim();
    Matrix inv(m);
    std::vector<Complex> e(m);
    for (std::size_t c = 0; c < m; ++c) {
      std::fill(e.begin(), e.end(), Complex{});
      e[c] = 1.0;
      const auto col = solve(e);
      for (std::size_t r = 0; r < m; ++r) inv(r, c) = col[r];
    }
    return inv;
  }

 private:
  Matrix lu_;
  std::vector<std::size_t> perm_;
};

inline Matrix mat_inv(const Matrix& x) { return LuDecomposition(x).inverse(); }

}  // namespace amalgam
