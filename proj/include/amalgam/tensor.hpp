#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "amalgam/error.hpp"
#include "amalgam/matrix.hpp"

namespace amalgam {

/// Element of a commutative diagonal subalgebra, in diagonal coordinates.
using DVector = std::vector<Complex>;

constexpr std::size_t ipow(std::size_t base, std::size_t exp) noexcept {
  std::size_t r = 1;
  while (exp-- > 0) r *= base;
  return r;
}

inline DVector ones(std::size_t d) { return DVector(d, Complex{1.0}); }

inline DVector hadamard(DVector x, const DVector& y) {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] *= y[i];
  return x;
}

inline double max_abs(const DVector& x) {
  double s = 0.0;
  for (const auto& z : x) s = std::max(s, std::abs(z));
  return s;
}

inline bool is_zero(const DVector& x) {
  for (const auto& z : x)
    if (z != Complex{}) return false;
  return true;
}

inline Matrix to_matrix(const DVector& x) { return Matrix::diagonal(x); }

/// B-valued multilinear map of order n over diagonal B of dimension d:
/// (b_1, ..., b_{n-1}) -> d-vector. Stored dense with shape d x d^{n-1},
/// row-major by (output coordinate, insertion coordinates).
class MultilinearTensor {
 public:
  MultilinearTensor() = default;

  MultilinearTensor(std::size_t d, std::size_t order) : d_(d), order_(order), data_(ipow(d, order)) {
    if (d == 0 || order == 0) throw Error(ErrorCode::ShapeMismatch, "tensor needs d >= 1 and order >= 1");
  }

  MultilinearTensor(std::size_t d, std::size_t order, std::vector<Complex> data)
      : d_(d), order_(order), data_(std::move(data)) {
    if (d == 0 || order == 0 || data_.size() != ipow(d, order)) {
      throw Error(ErrorCode::ShapeMismatch, "tensor data size must be d^order");
    }
  }

  std::size_t d() const noexcept { return d_; }
  std::size_t order() const noexcept { return order_; }
  std::size_t size() const noexcept { return data_.size(); }
  std::span<const Complex> data() const noexcept { return data_; }
  std::span<Complex> data() noexcept { return data_; }

  /// Flat column index of an insertion multi-index (first insertion most significant).
  std::size_t column(std::span<const std::size_t> coords) const {
    std::size_t idx = 0;
    for (auto c : coords) idx = idx * d_ + c;
    return idx;
  }

  std::size_t columns() const noexcept { return data_.size() / d_; }

  Complex& at(std::size_t out, std::size_t column) { return data_[out * columns() + column]; }
  const Complex& at(std::size_t out, std::size_t column) const { return data_[out * columns() + column]; }

  /// Evaluates the map; inserts.size() must be order - 1.
  DVector apply(std::span<const DVector> inserts) const {
    if (inserts.size() + 1 != order_) throw Error(ErrorCode::ShapeMismatch, "wrong number of insertions");
    // Sparse insertions (basis vectors and their multiples) touch few columns.
    std::vector<std::vector<std::pair<std::size_t, Complex>>> nz(inserts.size());
    std::size_t combos = 1;
    for (std::size_t k = 0; k < inserts.size(); ++k) {
      for (std::size_t j = 0; j < d_; ++j)
        if (inserts[k][j] != Complex{}) nz[k].emplace_back(j, inserts[k][j]);
      if (nz[k].empty()) return DVector(d_);
      combos *= nz[k].size();
    }
    if (combos < columns()) return apply_sparse(nz);

    std::vector<Complex> cur(data_.begin(), data_.end());
    std::size_t len = cur.size();
    for (std::size_t k = inserts.size(); k-- > 0;) {
      const DVector& b = inserts[k];
      const std::size_t next_len = len / d_;
      for (std::size_t idx = 0; idx < next_len; ++idx) {
        Complex s{};
        for (std::size_t j = 0; j < d_; ++j) s += cur[idx * d_ + j] * b[j];
        cur[idx] = s;
      }
      len = next_len;
    }
    cur.resize(d_);
    return cur;
  }


 private:
  DVector apply_sparse(const std::vector<std::vector<std::pair<std::size_t, Complex>>>& nz) const {
    DVector out(d_);
    std::vector<std::size_t> pos(nz.size(), 0);
    while (true) {
      std::size_t col = 0;
      Complex coef{1.0};
      for (std::size_t k = 0; k < nz.size(); ++k) {
        col = col * d_ + nz[k][pos[k]].first;
        coef *= nz[k][pos[k]].second;
      }
      for (std::size_t i = 0; i < d_; ++i) out[i] += coef * at(i, col);
      std::size_t k = nz.size();
      while (k > 0 && ++pos[k - 1] == nz[k - 1].size()) pos[--k] = 0;
      if (k == 0) return out;
    }
  }

 public:
  /// Evaluates with every insertion equal to b.
  DVector apply_uniform(const DVector& b) const {
    std::vector<DVector> inserts(order_ - 1, b);
    return apply(inserts);
  }

  /// max_i sum_J |T[i][J]|: bound on |T(b_1..)| over insertions of sup-norm <= 1.
  double multilinear_norm() const {
    double best = 0.0;
    const std::size_t cols = columns();
    for (std::size_t i = 0; i < d_; ++i) {
      double s = 0.0;
      for (std::size_t c = 0; c < cols; ++c) s += std::abs(data_[i * cols + c]);
      best = std::max(best, s);
    }
    return best;
  }

  bool is_finite() const noexcept {
    for (const auto& z : data_)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
  }

  MultilinearTensor& operator+=(const MultilinearTensor& o) {
    if (o.d_ != d_ || o.order_ != order_) throw Error(ErrorCode::ShapeMismatch, "tensor shapes differ");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }

  friend bool operator==(const MultilinearTensor&, const MultilinearTensor&) = default;

 private:
  std::size_t d_ = 0;
  std::size_t order_ = 0;
  std::vector<Complex> data_;
};

/// Decodes a flat column index into insertion coordinates.
inline std::vector<std::size_t> decode_column(std::size_t column, std::size_t d, std::size_t count) {
  std::vector<std::size_t> coords(count);
  for (std::size_t k = count; k-- > 0;) {
    coords[k] = column % d;
    column /= d;
  }
  return coords;
}

inline DVector basis(std::size_t d, std::size_t j) {
  DVector e(d);
  e[j] = 1.0;
  return e;
}

}  // namespace amalgam
