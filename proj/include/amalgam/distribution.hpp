#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "amalgam/error.hpp"
#include "amalgam/tensor.hpp"

namespace amalgam {

inline constexpr std::size_t kMaxOrder = 8;
inline constexpr std::size_t kMaxDiagDim = 4;

namespace detail {

inline void validate_tensor_family(std::size_t d, std::size_t order, const std::vector<MultilinearTensor>& ts) {
  if (d == 0 || order == 0) throw Error(ErrorCode::ShapeMismatch, "d and order must be positive");
  if (ts.size() != order) throw Error(ErrorCode::ShapeMismatch, "need one tensor per order");
  for (std::size_t n = 1; n <= order; ++n) {
    const auto& t = ts[n - 1];
    if (t.d() != d || t.order() != n) throw Error(ErrorCode::ShapeMismatch, "tensor shape inconsistent with order");
    if (!t.is_finite()) throw Error(ErrorCode::NonFinite, "tensor entries must be finite");
  }
}

}  // namespace detail

/// 2 * max_n ||M_n||^{1/n}, with ||.|| the row-sum multilinear norm.
inline double default_norm_bound(const std::vector<MultilinearTensor>& moments) {
  double best = 0.0;
  for (std::size_t n = 1; n <= moments.size(); ++n) {
    best = std::max(best, std::pow(moments[n - 1].multilinear_norm(), 1.0 / static_cast<double>(n)));
  }
  return 2.0 * best;
}

/// Truncated B-valued distribution over diagonal B = C^d:
/// moments[n-1] is (b_1..b_{n-1}) -> E(a b_1 a ... b_{n-1} a).
struct BDist {
  std::size_t d = 0;
  std::size_t order = 0;
  double norm_bound = 0.0;
  std::vector<MultilinearTensor> moments;

  const MultilinearTensor& moment(std::size_t n) const {
    if (n == 0 || n > order) throw Error(ErrorCode::OrderExceeded, "moment order out of range");
    return moments[n - 1];
  }

  /// E(a) in diagonal coordinates.
  DVector mean() const { return moment(1).apply({}); }

  void validate() const {
    detail::validate_tensor_family(d, order, moments);
    if (!(norm_bound >= 0.0) || !std::isfinite(norm_bound)) {
      throw Error(ErrorCode::ShapeMismatch, "norm_bound must be finite and nonnegative");
    }
  }

  friend bool operator==(const BDist&, const BDist&) = default;
};

/// Words over {1, 2} of length n are indexed by a mask whose most significant
/// of n bits is the first letter; a set bit means letter 2.
struct Word {
  std::size_t length = 0;
  std::size_t mask = 0;

  int letter(std::size_t k) const { return (mask >> (length - 1 - k)) & 1U ? 2 : 1; }

  std::string key() const {
    std::string s;
    for (std::size_t k = 0; k < length; ++k) s.push_back(letter(k) == 1 ? '1' : '2');
    return s;
  }

  static Word from_letters(const std::vector<int>& letters) {
    Word w{letters.size(), 0};
    for (int l : letters) w.mask = (w.mask << 1) | (l == 2 ? 1U : 0U);
    return w;
  }

  static Word from_key(const std::string& key) {
    std::vector<int> letters;
    for (char ch : key) {
      if (ch != '1' && ch != '2') throw Error(ErrorCode::Parse, "word keys use letters 1 and 2");
      letters.push_back(ch - '0');
    }
    if (letters.empty()) throw Error(ErrorCode::Parse, "empty word key");
    return from_letters(letters);
  }
};

/// Truncated joint distribution of a pair (a_1, a_2): for each word w of
/// length n <= order, the tensor of E(a_{w_1} b_1 a_{w_2} ... b_{n-1} a_{w_n}).
struct JointBDist {
  std::size_t d = 0;
  std::size_t order = 0;
  double norm_bound_1 = 0.0;
  double norm_bound_2 = 0.0;
  std::vector<std::vector<MultilinearTensor>> words;  // [n-1][mask]

  const MultilinearTensor& moment(const Word& w) const {
    if (w.length == 0 || w.length > order) throw Error(ErrorCode::OrderExceeded, "word longer than truncation order");
    return words[w.length - 1][w.mask];
  }

  /// Marginal of letter 1 or 2 (constant words).
  BDist marginal(int letter) const {
    BDist m{d, order, letter == 1 ? norm_bound_1 : norm_bound_2, {}};
    for (std::size_t n = 1; n <= order; ++n) {
      m.moments.push_back(words[n - 1][letter == 1 ? 0 : (std::size_t{1} << n) - 1]);
    }
    return m;
  }

  void validate() const {
    if (d == 0 || order == 0) throw Error(ErrorCode::ShapeMismatch, "d and order must be positive");
    if (words.size() != order) throw Error(ErrorCode::ShapeMismatch, "need one word table per order");
    for (std::size_t n = 1; n <= order; ++n) {
      if (words[n - 1].size() != (std::size_t{1} << n)) throw Error(ErrorCode::ShapeMismatch, "word table size");
      for (const auto& t : words[n - 1])
        if (t.d() != d || t.order() != n) throw Error(ErrorCode::ShapeMismatch, "word tensor shape");
    }
  }

  friend bool operator==(const JointBDist&, const JointBDist&) = default;
};

}  // namespace amalgam
