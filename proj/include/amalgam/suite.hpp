#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "amalgam/algebra.hpp"
#include "amalgam/cumulants.hpp"
#include "amalgam/distribution.hpp"
#include "amalgam/error.hpp"
#include "amalgam/free_dist.hpp"
#include "amalgam/matrix.hpp"
#include "amalgam/models.hpp"
#include "amalgam/random.hpp"
#include "amalgam/serialize.hpp"
#include "amalgam/transforms.hpp"

namespace amalgam {

inline constexpr std::string_view kToolName = "amalgam";
inline constexpr std::string_view kToolVersion = "1.0.0";

enum class Suite { Domains, Rs, Dilation, Additivity, Multiplicativity, Lemma31, All };

inline constexpr std::array<std::pair<Suite, std::string_view>, 7> kSuiteNames{{
    {Suite::Domains, "domains"},
    {Suite::Rs, "rs"},
    {Suite::Dilation, "dilation"},
    {Suite::Additivity, "additivity"},
    {Suite::Multiplicativity, "multiplicativity"},
    {Suite::Lemma31, "lemma31"},
    {Suite::All, "all"},
}};

inline std::string_view to_string(Suite s) {
  for (const auto& [v, name] : kSuiteNames)
    if (v == s) return name;
  return "unknown";
}

inline std::optional<Suite> parse_suite(std::string_view name) {
  for (const auto& [v, n] : kSuiteNames)
    if (n == name) return v;
  return std::nullopt;
}

/// Matrix suites (domains, rs, dilation) run in an AlgebraContext built from
/// dim/block/diag; series suites use diagonal B of dimension `diag` (default 2).
struct RunConfig {
  Suite suite = Suite::Rs;
  std::optional<std::size_t> dim;
  std::optional<std::pair<std::size_t, std::size_t>> block;
  std::optional<std::size_t> diag;
  std::size_t trials = 10;
  std::uint64_t seed = 42;
  /// Unset means the suite default (see default_tol).
  std::optional<double> tol;
  std::size_t order = 6;
  double ball_fraction = 0.5;
  bool negative_control = false;
  bool timing = false;

  void validate() const {
    if (trials < 1) throw Error(ErrorCode::Parse, "trials must be >= 1");
    if (!(ball_fraction > 0.0 && ball_fraction <= 1.0)) throw Error(ErrorCode::Parse, "ball_fraction must be in (0, 1]");
    if (tol && !(*tol > 0.0)) throw Error(ErrorCode::Parse, "tol must be > 0");
    if (order < 1 || order > kMaxOrder) throw Error(ErrorCode::Parse, "order must be in [1, 8]");
    if (block && diag) throw Error(ErrorCode::Parse, "--block and --diag are exclusive");
    if (block) {
      const auto [k, d] = *block;
      if (k == 0 || d == 0) throw Error(ErrorCode::Parse, "block sizes must be positive");
      if (dim && *dim != k * d) throw Error(ErrorCode::Parse, "--dim must equal K*D");
    }
    if (diag && (*diag == 0 || (dim && *dim != *diag))) throw Error(ErrorCode::Parse, "--dim must equal D");
    if (dim && (*dim == 0 || *dim > 16)) throw Error(ErrorCode::Parse, "dim must be in [1, 16]");
  }

  AlgebraContext context() const {
    if (block) return AlgebraContext(block->first * block->second, SubalgebraKind::block_tensor(block->first, block->second));
    if (diag) return AlgebraContext(*diag, SubalgebraKind::diagonal());
    if (dim) return AlgebraContext(*dim, SubalgebraKind::diagonal());
    return AlgebraContext(4, SubalgebraKind::block_tensor(2, 2));
  }

  std::size_t series_dim() const { return diag.value_or(2); }
};

/// Residual tolerance per suite when none is given.
inline double default_tol(Suite s) {
  switch (s) {
    case Suite::Domains: return 1e-10;
    case Suite::Rs:
    case Suite::Dilation: return 1e-9;
    case Suite::Lemma31: return 1e-10;
    case Suite::Additivity:
    case Suite::Multiplicativity: return 1e-12;  // absolute floor of the scaling test
    case Suite::All: break;
  }
  return kDefaultTol;
}

/// One seeded instance. Matrix suites fill ctx/a/w/z; series suites fill x/y/w;
/// lemma31 fills family/bvec. For rs, w is the point b at which the
/// compositions are checked.
struct Instance {
  Suite suite = Suite::Rs;
  std::size_t trial = 0;
  std::optional<AlgebraContext> ctx;
  Matrix a;
  Matrix w;
  Matrix z;
  std::optional<BDist> x;
  std::optional<BDist> y;
  std::optional<JointBDist> joint;
  std::optional<CumulantFamily> family;
  DVector bvec;
  std::uint64_t digest = 0;
};

namespace detail {

// Number of free diagonal parameters of a diagonal element of B.
inline std::size_t diagonal_params(const AlgebraContext& ctx) {
  switch (ctx.kind().tag) {
    case SubalgebraKind::Tag::Scalar: return 1;
    case SubalgebraKind::Tag::BlockTensor: return ctx.kind().blocks;
    default: return ctx.ambient_dim();
  }
}

// Diagonal element of B with entry moduli in [floor, 1] * norm, then scaled
// so that its norm is exactly `norm`.
inline Matrix sample_diagonal(Stream& s, const AlgebraContext& ctx, double norm, double floor = 0.1) {
  const std::size_t p = diagonal_params(ctx);
  std::vector<Complex> c(p);
  double top = 0.0;
  for (auto& v : c) {
    v = std::polar(s.uniform(floor, 1.0), 2.0 * std::numbers::pi * s.uniform());
    top = std::max(top, std::abs(v));
  }
  for (auto& v : c) v *= norm / top;
  std::vector<Complex> diag(ctx.ambient_dim());
  for (std::size_t i = 0; i < diag.size(); ++i) {
    switch (ctx.kind().tag) {
      case SubalgebraKind::Tag::Scalar: diag[i] = c[0]; break;
      case SubalgebraKind::Tag::BlockTensor: diag[i] = c[i / ctx.kind().inner]; break;
      default: diag[i] = c[i]; break;
    }
  }
  return Matrix::diagonal(diag);
}

inline DVector sample_dvector(Stream& s, std::size_t d, double norm, double floor = 0.1) {
  DVector v(d);
  double top = 0.0;
  for (auto& z : v) {
    z = std::polar(s.uniform(floor, 1.0), 2.0 * std::numbers::pi * s.uniform());
    top = std::max(top, std::abs(z));
  }
  for (auto& z : v) z *= norm / top;
  return v;
}

// Complex Gaussian matrix rescaled to operator norm 1.
inline Matrix sample_element(Stream& s, std::size_t m) {
  Matrix a(m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k < m; ++k) a(i, k) = s.complex_normal();
  return (1.0 / op_norm(a)) * a;
}

// kappa_1 with coordinates of modulus in [0.5, 1]; higher cumulants Gaussian,
// rescaled to multilinear norm scale^n.
inline CumulantFamily sample_family(Stream& s, std::size_t d, std::size_t order, double scale = 0.5) {
  CumulantFamily fam = CumulantFamily::zero(d, order);
  for (std::size_t i = 0; i < d; ++i) fam.kappa[0].at(i, 0) = std::polar(s.uniform(0.5, 1.0), 2.0 * std::numbers::pi * s.uniform());
  for (std::size_t n = 2; n <= order; ++n) {
    auto& t = fam.kappa[n - 1];
    for (auto& z : t.data()) z = s.complex_normal();
    const double norm = t.multilinear_norm();
    for (auto& z : t.data()) z *= std::pow(scale, static_cast<double>(n)) / norm;
  }
  return fam;
}

inline void digest_family(Fnv1a& h, const std::vector<MultilinearTensor>& ts) {
  for (const auto& t : ts)
    for (const auto& z : t.data()) h.add(z);
}

// Radius of the target ball certified for every model given.
template <class... Ms>
double min_g_radius(const Ms&... ms) {
  return std::min({DomainCertificate::for_g(ms.norm_bound()).radius_onto...});
}

template <class... Ms>
double min_psi_radius(const Ms&... ms) {
  return std::min({psi_certificate(ms).radius_onto...});
}

}  // namespace detail

/// Seeded, reproducible instance for (cfg.suite, trial). cfg.suite must not be All.
/// Series suites also carry the joint distribution: free_join(x, y), or
/// correlated_join(x) with y = x under the negative control.
inline Instance gen_instance(const RunConfig& cfg, std::size_t trial) {
  Instance inst;
  inst.suite = cfg.suite;
  inst.trial = trial;
  const std::string tag(to_string(cfg.suite));
  Stream s(cfg.seed, trial, tag);
  Fnv1a h;
  h.add(tag);
  h.add(static_cast<std::uint64_t>(trial));

  switch (cfg.suite) {
    case Suite::Domains:
    case Suite::Rs:
    case Suite::Dilation: {
      const AlgebraContext ctx = cfg.context();
      inst.ctx = ctx;
      inst.a = detail::sample_element(s, ctx.ambient_dim());
      const ConcreteModel model(ctx, inst.a);
      const double na = model.norm_bound();
      if (cfg.suite == Suite::Domains) {
        inst.w = detail::sample_diagonal(s, ctx, cfg.ball_fraction * DomainCertificate::for_g(na).radius_onto);
      } else if (cfg.suite == Suite::Rs) {
        // Keeps g(b) and Psi(b) inside both certified target balls.
        const double e = op_norm(inverse_expectation(model));
        inst.w = detail::sample_diagonal(s, ctx, cfg.ball_fraction / (12.0 * na * na * na * e * e));
      } else {
        inst.z = detail::sample_diagonal(s, ctx, 1.0, 0.5);
        const ConcreteModel za(ctx, inst.z * inst.a);
        const ConcreteModel zm(ctx, inst.z);
        inst.w = detail::sample_diagonal(s, ctx, cfg.ball_fraction * detail::min_psi_radius(model, za, zm));
      }
      h.add(inst.a);
      h.add(inst.w);
      h.add(inst.z);
      break;
    }
    case Suite::Additivity:
    case Suite::Multiplicativity: {
      const std::size_t d = cfg.series_dim();
      const std::size_t n = cfg.order;
      inst.x = dist_from_cumulants(detail::sample_family(s, d, n));
      inst.y = dist_from_cumulants(detail::sample_family(s, d, n));
      if (cfg.negative_control) inst.y = inst.x;
      inst.joint = cfg.negative_control ? correlated_join(*inst.x) : free_join(*inst.x, *inst.y);
      const TruncatedModel mx(inst.joint->marginal(1));
      const TruncatedModel my(inst.joint->marginal(2));
      double radius = 0.0;
      if (cfg.suite == Suite::Additivity) {
        radius = detail::min_g_radius(mx, my, TruncatedModel(sum_dist(*inst.joint)));
      } else {
        radius = detail::min_psi_radius(mx, my, TruncatedModel(prod_dist(*inst.joint)));
      }
      inst.w = to_matrix(detail::sample_dvector(s, d, cfg.ball_fraction * radius));
      detail::digest_family(h, inst.x->moments);
      detail::digest_family(h, inst.y->moments);
      h.add(inst.w);
      break;
    }
    case Suite::Lemma31: {
      const std::size_t d = std::min<std::size_t>(cfg.series_dim(), 3);
      const std::size_t n = std::min<std::size_t>(cfg.order, 6);
      inst.family = detail::sample_family(s, d, n, 1.0);
      inst.bvec = detail::sample_dvector(s, d, 1.0);
      detail::digest_family(h, inst.family->kappa);
      for (const auto& z : inst.bvec) h.add(z);
      break;
    }
    case Suite::All: throw Error(ErrorCode::Parse, "gen_instance needs a concrete suite");
  }
  inst.digest = h.value();
  return inst;
}

namespace detail {

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline Json fixed_point_json(std::string_view transform, const FixedPointReport& r) {
  return {{"transform", transform},
          {"converged", r.converged},
          {"certified", r.certified},
          {"iterations", r.iterations},
          {"final_residual", r.final_residual},
          {"preimage_norm", r.preimage_norm},
          {"max_contraction", r.max_contraction()},
          {"radius_onto", r.certificate.radius_onto},
          {"radius_preimage", r.certificate.radius_preimage}};
}

inline Json scaling_json(const ScalingReport& r) {
  return {{"residual", r.residual},           {"residual_half", r.residual_half},
          {"ratio", r.ratio},                 {"required_ratio", r.required_ratio},
          {"constant", r.constant},           {"n_eff", r.n_eff},
          {"below_floor", r.below_floor}};
}

// Contraction bounds checked by the domains suite.
inline constexpr double kGContractionBound = 0.5 + 1e-9;
inline constexpr double kPsiContractionBound = 40.0 / 81.0 + 1e-9;

struct TrialOutcome {
  Json residuals = Json::object();
  Json fixed_point = Json::array();
  Json extra = Json::object();
  bool pass = false;
  double max_residual = 0.0;
};

inline void add_residual(TrialOutcome& out, const std::string& name, double v) {
  out.residuals[name] = v;
  out.max_residual = std::max(out.max_residual, v);
}

inline bool domain_ok(const FixedPointReport& r, double contraction_bound, double tol) {
  return r.converged && r.max_contraction() <= contraction_bound && r.final_residual <= tol &&
         r.preimage_norm <= r.certificate.radius_preimage;
}

inline TrialOutcome run_trial(const RunConfig& cfg, const Instance& inst) {
  const double tol = cfg.tol.value_or(default_tol(cfg.suite));
  TrialOutcome out;
  switch (cfg.suite) {
    case Suite::Domains: {
      const ConcreteModel model(*inst.ctx, inst.a);
      // Solve to well below the acceptance tolerance.
      const auto g = invert_g(model, inst.w, std::min(tol, 1e-13));
      const auto psi_cert = psi_certificate(model);
      Stream s(cfg.seed, inst.trial, "domains.psi_target");
      const Matrix w_psi = sample_diagonal(s, *inst.ctx, cfg.ball_fraction * psi_cert.radius_onto);
      const auto p = invert_psi(model, w_psi, std::min(tol, 1e-13));
      out.fixed_point.push_back(fixed_point_json("g", g.report));
      out.fixed_point.push_back(fixed_point_json("psi", p.report));
      add_residual(out, "g_inversion", g.report.final_residual);
      add_residual(out, "psi_inversion", p.report.final_residual);
      out.pass = domain_ok(g.report, kGContractionBound, tol) && domain_ok(p.report, kPsiContractionBound, tol);
      break;
    }
    case Suite::Rs: {
      const ConcreteModel model(*inst.ctx, inst.a);
      const auto rep = check_rs_relation(model, inst.w, tol);
      for (const auto& [name, v] : rep.residuals) add_residual(out, name, v);
      out.fixed_point.push_back(fixed_point_json("g", rep.solves[0]));
      out.fixed_point.push_back(fixed_point_json("psi", rep.solves[1]));
      out.extra["commutative_b"] = rep.commutative_b;
      out.pass = rep.pass;
      break;
    }
    case Suite::Dilation: {
      const ConcreteModel model(*inst.ctx, inst.a);
      const auto rep = check_dilation(model, inst.z, inst.w, tol);
      for (const auto& [name, v] : rep.residuals) add_residual(out, name, v);
      out.extra["commutative_b"] = rep.commutative_b;
      out.pass = rep.pass;
      break;
    }
    case Suite::Additivity:
    case Suite::Multiplicativity: {
      const JointBDist& j = *inst.joint;
      ScalingOptions opts;
      opts.floor = tol;
      const ScalingReport rep = cfg.suite == Suite::Additivity ? additivity_scaling(j, inst.w, opts)
                                                                : multiplicativity_scaling(j, inst.w, opts);
      add_residual(out, cfg.suite == Suite::Additivity ? "r_additivity" : "s_multiplicativity", rep.residual);
      out.extra["scaling"] = scaling_json(rep);
      out.extra["negative_control"] = cfg.negative_control;
      out.pass = rep.pass;
      break;
    }
    case Suite::Lemma31: {
      out.pass = true;
      for (std::size_t r = 1; r <= inst.family->order; ++r) {
        const auto res = lemma31_check(*inst.family, r, inst.bvec);
        add_residual(out, "r" + std::to_string(r), res.residual);
        out.pass = out.pass && res.residual <= tol;
      }
      break;
    }
    case Suite::All: break;
  }
  return out;
}

inline Json config_json(const RunConfig& cfg) {
  Json c = {{"suite", to_string(cfg.suite)},
            {"trials", cfg.trials},
            {"seed", cfg.seed},
            {"tol", cfg.tol ? Json(*cfg.tol) : Json(nullptr)},
            {"order", cfg.order},
            {"ball_fraction", cfg.ball_fraction},
            {"negative_control", cfg.negative_control}};
  const AlgebraContext ctx = cfg.context();
  c["ambient_dim"] = ctx.ambient_dim();
  c["context"] = to_string(ctx.kind());
  c["series_dim"] = cfg.series_dim();
  return c;
}

}  // namespace detail

/// Runs every trial of the configured suite (each suite in turn for All) and
/// returns the report. Numeric failures are recorded per trial.
inline Json run_suite(const RunConfig& cfg) {
  cfg.validate();
  std::vector<Suite> suites;
  if (cfg.suite == Suite::All) {
    for (const auto& [s, name] : kSuiteNames)
      if (s != Suite::All) suites.push_back(s);
  } else {
    suites.push_back(cfg.suite);
  }

  Json trials = Json::array();
  std::size_t passed = 0;
  double max_residual = 0.0;
  for (Suite suite : suites) {
    RunConfig sub = cfg;
    sub.suite = suite;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      Json rec = {{"suite", to_string(suite)}, {"trial", t}};
      detail::TrialOutcome out;
      Json error = nullptr;
      try {
        const Instance inst = gen_instance(sub, t);
        rec["digest"] = detail::hex64(inst.digest);
        out = detail::run_trial(sub, inst);
      } catch (const Error& e) {
        error = e.what();
        out.pass = false;
      }
      if (!rec.contains("digest")) rec["digest"] = nullptr;
      rec["residuals"] = out.residuals;
      rec["fixed_point"] = out.fixed_point;
      for (auto it = out.extra.begin(); it != out.extra.end(); ++it) rec[it.key()] = it.value();
      rec["pass"] = out.pass;
      rec["error"] = error;
      if (out.pass) ++passed;
      max_residual = std::max(max_residual, out.max_residual);
      trials.push_back(std::move(rec));
    }
  }
  const std::size_t total = trials.size();
  return {{"tool", kToolName},
          {"version", kToolVersion},
          {"config", detail::config_json(cfg)},
          {"trials", std::move(trials)},
          {"aggregate",
           {{"trials", total},
            {"passed", passed},
            {"pass_rate", static_cast<double>(passed) / static_cast<double>(total)},
            {"max_residual", max_residual}}}};
}

}  // namespace amalgam
