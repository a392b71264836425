#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "amalgam/distribution.hpp"
#include "amalgam/error.hpp"
#include "amalgam/nc_partition.hpp"
#include "amalgam/tensor.hpp"

namespace amalgam {

/// kappa[n-1] is the n-th B-valued free cumulant
/// (b_1..b_{n-1}) -> kappa_n(a (x) b_1 a (x) ... (x) b_{n-1} a).
struct CumulantFamily {
  std::size_t d = 0;
  std::size_t order = 0;
  std::vector<MultilinearTensor> kappa;

  const MultilinearTensor& cumulant(std::size_t n) const {
    if (n == 0 || n > order) throw Error(ErrorCode::OrderExceeded, "cumulant order out of range");
    return kappa[n - 1];
  }

  void validate() const { detail::validate_tensor_family(d, order, kappa); }

  static CumulantFamily zero(std::size_t d, std::size_t order) {
    CumulantFamily f{d, order, {}};
    for (std::size_t n = 1; n <= order; ++n) f.kappa.emplace_back(d, n);
    return f;
  }
};

/// Nested evaluation of a partition over commutative diagonal B.
///
/// Insertion k sits between legs k and k+1. A block evaluates its tensor on
/// the slots between consecutive legs; a slot holds the insertions it spans
/// times the values of the blocks nested inside it, all multiplied
/// coordinatewise. Top-level blocks multiply left to right with the single
/// insertion separating them.
///
/// `lookup(block)` returns the tensor for that block or nullptr for zero.
template <class Lookup>
DVector evaluate_nested(const NCPartition& p, std::span<const DVector> inserts, std::size_t d, Lookup&& lookup) {
  if (p.size() == 0) return ones(d);
  if (inserts.size() + 1 != p.size()) throw Error(ErrorCode::ShapeMismatch, "need n-1 insertions");

  auto forest = [&](auto& self, std::size_t lo, std::size_t hi) -> DVector {
    DVector acc = ones(d);
    std::size_t leg = lo;
    while (true) {
      const Block& blk = p.blocks()[p.block_of(leg)];
      std::vector<DVector> slots;
      slots.reserve(blk.size() - 1);
      for (std::size_t t = 0; t + 1 < blk.size(); ++t) {
        const std::size_t l = blk[t];
        const std::size_t r = blk[t + 1];
        if (r == l + 1) {
          slots.push_back(inserts[l]);
        } else {
          DVector s = hadamard(inserts[l], self(self, l + 1, r - 1));
          slots.push_back(hadamard(std::move(s), inserts[r - 1]));
        }
        if (is_zero(slots.back())) return DVector(d);
      }
      const MultilinearTensor* t = lookup(blk);
      if (t == nullptr) return DVector(d);
      acc = hadamard(std::move(acc), t->apply(slots));
      const std::size_t last = blk.back();
      if (last >= hi) break;
      acc = hadamard(std::move(acc), inserts[last]);
      if (is_zero(acc)) return acc;
      leg = last + 1;
    }
    return acc;
  };
  return forest(forest, 0, p.size() - 1);
}

/// kappa_pi applied to the insertions.
inline DVector kappa_pi_eval(const CumulantFamily& fam, const NCPartition& p, std::span<const DVector> inserts) {
  if (p.size() > fam.order) throw Error(ErrorCode::OrderExceeded, "partition larger than cumulant order");
  return evaluate_nested(p, inserts, fam.d, [&](const Block& b) { return &fam.kappa[b.size() - 1]; });
}

namespace detail {

inline void check_conversion_limits(std::size_t d, std::size_t order) {
  if (order > kMaxOrder) throw Error(ErrorCode::OrderExceeded, "moment/cumulant conversion limited to order 8");
  if (d > kMaxDiagDim) throw Error(ErrorCode::TooLarge, "diagonal dimension limited to 4");
}

// Fills `target` column by column with sum_{pi in NC(n)} (nested eval on basis insertions).
template <class Lookup>
MultilinearTensor sum_over_nc(std::size_t d, std::size_t n, const std::vector<NCPartition>& parts, Lookup&& lookup) {
  MultilinearTensor out(d, n);
  std::vector<DVector> inserts(n - 1);
  for (std::size_t col = 0; col < out.columns(); ++col) {
    const auto coords = decode_column(col, d, n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) inserts[k] = basis(d, coords[k]);
    DVector total(d);
    for (const auto& p : parts) {
      const DVector v = evaluate_nested(p, inserts, d, lookup);
      for (std::size_t i = 0; i < d; ++i) total[i] += v[i];
    }
    for (std::size_t i = 0; i < d; ++i) out.at(i, col) = total[i];
  }
  return out;
}

}  // namespace detail

/// Triangular recursion kappa_n = M_n - sum_{pi != 1_n} kappa_pi.
inline CumulantFamily moments_to_cumulants(const BDist& dist) {
  dist.validate();
  detail::check_conversion_limits(dist.d, dist.order);
  CumulantFamily fam = CumulantFamily::zero(dist.d, dist.order);
  for (std::size_t n = 1; n <= dist.order; ++n) {
    const auto parts = enumerate_nc(n);
    // kappa_n is still zero here, so the full-block term contributes nothing.
    MultilinearTensor lower = detail::sum_over_nc(dist.d, n, parts, [&](const Block& b) { return &fam.kappa[b.size() - 1]; });
    MultilinearTensor k = dist.moments[n - 1];
    for (std::size_t i = 0; i < k.size(); ++i) k.data()[i] -= lower.data()[i];
    fam.kappa[n - 1] = std::move(k);
  }
  return fam;
}

/// M_n = sum_{pi in NC(n)} kappa_pi. norm_bound is left at zero for the caller.
inline std::vector<MultilinearTensor> cumulants_to_moment_tensors(const CumulantFamily& fam) {
  fam.validate();
  detail::check_conversion_limits(fam.d, fam.order);
  std::vector<MultilinearTensor> moments;
  for (std::size_t n = 1; n <= fam.order; ++n) {
    moments.push_back(detail::sum_over_nc(fam.d, n, enumerate_nc(n),
                                          [&](const Block& b) { return &fam.kappa[b.size() - 1]; }));
  }
  return moments;
}

/// Inverse of moments_to_cumulants; the result carries the default norm bound.
inline BDist cumulants_to_moments(const CumulantFamily& fam) {
  BDist dist{fam.d, fam.order, 0.0, cumulants_to_moment_tensors(fam)};
  dist.norm_bound = default_norm_bound(dist.moments);
  return dist;
}

struct Lemma31Result {
  DVector lhs;
  DVector rhs;
  double residual = 0.0;
  double scale = 0.0;
};

/// Both sides of the irreducible-partition identity for (ba)^{(x) r}:
/// alternating sum over compositions and interval refinements versus the
/// sum over irreducible partitions.
inline Lemma31Result lemma31_check(const CumulantFamily& fam, std::size_t r, const DVector& b) {
  if (r == 0 || r > 7) throw Error(ErrorCode::TooLarge, "lemma31_check supports 1 <= r <= 7");
  if (r > fam.order) throw Error(ErrorCode::OrderExceeded, "r exceeds cumulant order");
  if (b.size() != fam.d) throw Error(ErrorCode::ShapeMismatch, "b must be a d-vector");

  const std::vector<DVector> inserts(r - 1, b);
  auto term = [&](const NCPartition& p) { return hadamard(b, kappa_pi_eval(fam, p, inserts)); };

  Lemma31Result res{DVector(fam.d), DVector(fam.d), 0.0, 0.0};
  for (const auto& c : compositions(r)) {
    const double sign = c.parts.size() % 2 == 1 ? 1.0 : -1.0;
    for (const auto& p : interval_refinements(r, c)) {
      const DVector v = term(p);
      for (std::size_t i = 0; i < fam.d; ++i) res.lhs[i] += sign * v[i];
      res.scale = std::max(res.scale, max_abs(v));
    }
  }
  for (const auto& p : enumerate_nc(r)) {
    if (!p.is_irreducible()) continue;
    const DVector v = term(p);
    for (std::size_t i = 0; i < fam.d; ++i) res.rhs[i] += v[i];
    res.scale = std::max(res.scale, max_abs(v));
  }
  for (std::size_t i = 0; i < fam.d; ++i) res.residual = std::max(res.residual, std::abs(res.lhs[i] - res.rhs[i]));
  return res;
}

/// sum_{r <= order} kappa_r(a (x) wa (x) ... (x) wa).
inline DVector r_series(const CumulantFamily& fam, const DVector& w, std::size_t order) {
  if (order > fam.order) throw Error(ErrorCode::OrderExceeded, "series order exceeds cumulant order");
  if (w.size() != fam.d) throw Error(ErrorCode::ShapeMismatch, "w must be a d-vector");
  DVector total(fam.d);
  for (std::size_t r = 1; r <= order; ++r) {
    const DVector v = fam.kappa[r - 1].apply_uniform(w);
    for (std::size_t i = 0; i < fam.d; ++i) total[i] += v[i];
  }
  return total;
}

}  // namespace amalgam
