#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "amalgam/cumulants.hpp"
#include "amalgam/distribution.hpp"
#include "amalgam/error.hpp"
#include "amalgam/models.hpp"
#include "amalgam/nc_partition.hpp"
#include "amalgam/tensor.hpp"
#include "amalgam/transforms.hpp"

namespace amalgam {

/// Distribution with the given cumulants; norm_bound defaults to
/// default_norm_bound of the resulting moments.
inline BDist dist_from_cumulants(const CumulantFamily& fam, std::optional<double> norm_bound = std::nullopt) {
  BDist dist = cumulants_to_moments(fam);
  if (norm_bound) dist.norm_bound = *norm_bound;
  dist.validate();
  return dist;
}

/// kappa_2(b) = b, every other cumulant zero.
inline CumulantFamily semicircular_family(std::size_t d, std::size_t order, double variance = 1.0) {
  CumulantFamily fam = CumulantFamily::zero(d, order);
  if (order >= 2)
    for (std::size_t i = 0; i < d; ++i) fam.kappa[1].at(i, i) = variance;
  return fam;
}

/// Point mass at the diagonal element c: M_n(b_1..b_{n-1}) = c^n b_1 ... b_{n-1}.
inline BDist delta_dist(const DVector& c, std::size_t order) {
  const std::size_t d = c.size();
  BDist dist{d, order, 0.0, {}};
  for (std::size_t n = 1; n <= order; ++n) {
    MultilinearTensor t(d, n);
    for (std::size_t i = 0; i < d; ++i) {
      std::size_t col = 0;
      for (std::size_t k = 0; k + 1 < n; ++k) col = col * d + i;
      t.at(i, col) = std::pow(c[i], static_cast<double>(n));
    }
    dist.moments.push_back(std::move(t));
  }
  dist.norm_bound = default_norm_bound(dist.moments);
  return dist;
}

namespace detail {

inline void check_pair(const BDist& x, const BDist& y) {
  x.validate();
  y.validate();
  if (x.d != y.d || x.order != y.order) throw Error(ErrorCode::ShapeMismatch, "distributions differ in d or N");
}

// Partitions of NC(n) whose blocks are monochromatic under the word.
inline std::vector<NCPartition> monochromatic(const std::vector<NCPartition>& parts, const Word& w) {
  std::vector<NCPartition> out;
  for (const auto& p : parts) {
    bool ok = true;
    for (const auto& b : p.blocks()) {
      const int c = w.letter(b.front());
      for (auto leg : b) ok = ok && w.letter(leg) == c;
    }
    if (ok) out.push_back(p);
  }
  return out;
}

}  // namespace detail

/// Joint distribution of a free pair: mixed cumulants vanish, and joint
/// moments are the colored moment-cumulant sums over NC(n).
inline JointBDist free_join(const BDist& x, const BDist& y) {
  detail::check_pair(x, y);
  const CumulantFamily kx = moments_to_cumulants(x);
  const CumulantFamily ky = moments_to_cumulants(y);
  JointBDist j{x.d, x.order, x.norm_bound, y.norm_bound, {}};
  for (std::size_t n = 1; n <= x.order; ++n) {
    const auto parts = enumerate_nc(n);
    std::vector<MultilinearTensor> table;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
      const Word w{n, mask};
      const auto valid = detail::monochromatic(parts, w);
      table.push_back(detail::sum_over_nc(x.d, n, valid, [&](const Block& b) {
        const auto& fam = w.letter(b.front()) == 1 ? kx : ky;
        return &fam.kappa[b.size() - 1];
      }));
    }
    // Constant words are the inputs themselves, bit for bit.
    table.front() = x.moments[n - 1];
    table.back() = y.moments[n - 1];
    j.words.push_back(std::move(table));
  }
  return j;
}

/// a_1 = a_2 = x: every word carries x's moment tensor. Not free unless x
/// is a point mass; used as the negative control.
inline JointBDist correlated_join(const BDist& x) {
  x.validate();
  JointBDist j{x.d, x.order, x.norm_bound, x.norm_bound, {}};
  for (std::size_t n = 1; n <= x.order; ++n) j.words.emplace_back(std::size_t{1} << n, x.moments[n - 1]);
  return j;
}

/// E of x_1 c_1 x_2 ... c_{n-1} x_n where x_k = a_{color_k}, minus E(a_{color_k})
/// when centered[k]. Expanded multilinearly into joint moments.
inline DVector word_expectation(const JointBDist& j, const std::vector<int>& colors, const std::vector<bool>& centered,
                                const std::vector<DVector>& inserts) {
  const std::size_t n = colors.size();
  const std::size_t d = j.d;
  const DVector means[2] = {j.words[0][0].apply({}), j.words[0][1].apply({})};
  std::vector<std::size_t> centered_pos;
  for (std::size_t k = 0; k < n; ++k)
    if (centered[k]) centered_pos.push_back(k);

  DVector total(d);
  for (std::size_t sub = 0; sub < (std::size_t{1} << centered_pos.size()); ++sub) {
    // Positions replaced by -E(a) in this term.
    std::vector<bool> replaced(n, false);
    for (std::size_t t = 0; t < centered_pos.size(); ++t)
      if (sub & (std::size_t{1} << t)) replaced[centered_pos[t]] = true;

    DVector outside = ones(d);  // product of B-factors before the first / after the last a
    DVector slot = ones(d);
    std::vector<DVector> slots;
    std::vector<int> letters;
    for (std::size_t k = 0; k < n; ++k) {
      if (replaced[k]) {
        DVector m = means[colors[k] - 1];
        for (auto& z : m) z = -z;
        slot = hadamard(std::move(slot), m);
      } else {
        if (letters.empty()) {
          outside = hadamard(std::move(outside), slot);
        } else {
          slots.push_back(slot);
        }
        slot = ones(d);
        letters.push_back(colors[k]);
      }
      if (k + 1 < n) slot = hadamard(std::move(slot), inserts[k]);
    }
    outside = hadamard(std::move(outside), slot);
    DVector term = outside;
    if (!letters.empty()) term = hadamard(std::move(term), j.moment(Word::from_letters(letters)).apply(slots));
    for (std::size_t i = 0; i < d; ++i) total[i] += term[i];
  }
  return total;
}

/// Largest violation of the freeness relations over alternating words of
/// length n with random diagonal insertions:
///   all letters centered            -> E(word) = 0;
///   first and last letters uncentered -> 0 for n >= 3, E(x_1) c E(x_2) for n = 2.
inline double freeness_oracle(const JointBDist& j, std::size_t n, std::size_t samples = 8,
                              std::uint64_t seed = 0x5eedULL) {
  if (n == 0 || n > j.order) throw Error(ErrorCode::OrderExceeded, "word length exceeds truncation order");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  double worst = 0.0;
  const DVector means[2] = {j.words[0][0].apply({}), j.words[0][1].apply({})};
  for (std::size_t s = 0; s < samples; ++s) {
    std::vector<DVector> inserts(n > 0 ? n - 1 : 0, DVector(j.d));
    for (auto& c : inserts)
      for (auto& z : c) z = Complex(gauss(rng), gauss(rng));
    for (int start = 1; start <= 2; ++start) {
      std::vector<int> colors(n);
      for (std::size_t k = 0; k < n; ++k) colors[k] = (k % 2 == 0) ? start : 3 - start;

      worst = std::max(worst, max_abs(word_expectation(j, colors, std::vector<bool>(n, true), inserts)));

      if (n >= 2) {
        std::vector<bool> relaxed(n, true);
        relaxed.front() = false;
        relaxed.back() = false;
        DVector v = word_expectation(j, colors, relaxed, inserts);
        if (n == 2) {
          const DVector expected = hadamard(hadamard(means[colors[0] - 1], inserts[0]), means[colors[1] - 1]);
          for (std::size_t i = 0; i < j.d; ++i) v[i] -= expected[i];
        }
        worst = std::max(worst, max_abs(v));
      }
    }
  }
  return worst;
}

/// Moments of a_1 + a_2: the sum over all words of each length.
inline BDist sum_dist(const JointBDist& j) {
  j.validate();
  BDist s{j.d, j.order, j.norm_bound_1 + j.norm_bound_2, {}};
  for (std::size_t n = 1; n <= j.order; ++n) {
    MultilinearTensor t(j.d, n);
    for (const auto& w : j.words[n - 1]) t += w;
    s.moments.push_back(std::move(t));
  }
  return s;
}

/// Moments of a_1 a_2 up to order floor(N/2): the word (1,2)^n with the
/// identity inserted inside each a_1 a_2 and b_k between a_2 and a_1.
inline BDist prod_dist(const JointBDist& j) {
  j.validate();
  const std::size_t out_order = j.order / 2;
  if (out_order == 0) throw Error(ErrorCode::OrderExceeded, "products need joint order >= 2");
  const std::size_t d = j.d;
  BDist p{d, out_order, j.norm_bound_1 * j.norm_bound_2, {}};
  for (std::size_t n = 1; n <= out_order; ++n) {
    std::vector<int> letters;
    for (std::size_t k = 0; k < n; ++k) {
      letters.push_back(1);
      letters.push_back(2);
    }
    const MultilinearTensor& src = j.moment(Word::from_letters(letters));
    MultilinearTensor t(d, n);
    for (std::size_t col = 0; col < src.columns(); ++col) {
      const auto coords = decode_column(col, d, 2 * n - 1);
      std::size_t out_col = 0;
      for (std::size_t k = 1; k < coords.size(); k += 2) out_col = out_col * d + coords[k];
      for (std::size_t i = 0; i < d; ++i) t.at(i, out_col) += src.at(i, col);
    }
    p.moments.push_back(std::move(t));
  }
  return p;
}

struct ScalingOptions {
  double solver_tol = 1e-14;
  /// Residuals below this count as exact.
  double floor = 1e-12;
};

/// Residual of a transform identity at w and at w/2. The identity holds up to
/// the truncation tail O(||w||^{n_eff}), so halving w must shrink the residual
/// by at least 2^{n_eff - 1} unless both residuals sit below the floor.
struct ScalingReport {
  double residual = 0.0;
  double residual_half = 0.0;
  double ratio = 0.0;
  double required_ratio = 0.0;
  /// residual / ||w||^{n_eff}, calibrated from this pair.
  double constant = 0.0;
  std::size_t n_eff = 0;
  bool below_floor = false;
  bool pass = false;
};

namespace detail {

template <class Residual>
ScalingReport scaling_report(Residual&& residual_at, const Matrix& w, std::size_t n_eff, const ScalingOptions& opts) {
  ScalingReport rep;
  rep.n_eff = n_eff;
  rep.residual = residual_at(w);
  rep.residual_half = residual_at(0.5 * w);
  rep.required_ratio = std::pow(2.0, static_cast<double>(n_eff) - 1.0);
  rep.ratio = rep.residual / std::max(rep.residual_half, std::numeric_limits<double>::min());
  rep.constant = rep.residual / std::pow(op_norm(w), static_cast<double>(n_eff));
  rep.below_floor = rep.residual < opts.floor && rep.residual_half < opts.floor;
  rep.pass = std::isfinite(rep.residual) && std::isfinite(rep.residual_half) &&
             (rep.below_floor || rep.ratio >= rep.required_ratio);
  return rep;
}

}  // namespace detail

/// R-additivity for the pair described by a joint distribution.
inline ScalingReport additivity_scaling(const JointBDist& j, const Matrix& w, const ScalingOptions& opts = {}) {
  const TruncatedModel m1(j.marginal(1));
  const TruncatedModel m2(j.marginal(2));
  const TruncatedModel ms(sum_dist(j));
  return detail::scaling_report(
      [&](const Matrix& v) { return additivity_check(m1, m2, ms, v, opts.solver_tol); }, w, j.order, opts);
}

/// R_{x+y}(w) = R_x(w) + R_y(w) for free x, y, tested at truncation order N.
inline ScalingReport theorem25_test(const BDist& x, const BDist& y, const Matrix& w, const ScalingOptions& opts = {}) {
  return additivity_scaling(free_join(x, y), w, opts);
}

/// S-multiplicativity for the pair described by a joint distribution.
inline ScalingReport multiplicativity_scaling(const JointBDist& j, const Matrix& w, const ScalingOptions& opts = {}) {
  const TruncatedModel m1(j.marginal(1));
  const TruncatedModel m2(j.marginal(2));
  const TruncatedModel mp(prod_dist(j));
  (void)inverse_expectation(m1);
  (void)inverse_expectation(m2);
  const std::size_t n_eff = std::min(j.order, mp.distribution().order);
  return detail::scaling_report(
      [&](const Matrix& v) { return multiplicativity_check(m1, m2, mp, v, opts.solver_tol); }, w, n_eff, opts);
}

/// S_{xy}(w) = S_x(w) S_y(w) for free x, y over commutative diagonal B.
inline ScalingReport theorem45_test(const BDist& x, const BDist& y, const Matrix& w, const ScalingOptions& opts = {}) {
  return multiplicativity_scaling(free_join(x, y), w, opts);
}

}  // namespace amalgam
