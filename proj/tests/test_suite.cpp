#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "test_support.hpp"

namespace amalgam {
namespace {

TEST(Stream, KeyedAndReproducible) {
  Stream a(7, 3, "x");
  Stream b(7, 3, "x");
  Stream c(7, 3, "y");
  Stream d(7, 4, "x");
  const auto va = a.bits();
  EXPECT_EQ(va, b.bits());
  EXPECT_NE(va, c.bits());
  EXPECT_NE(va, d.bits());
}

TEST(Stream, UniformAndNormalMoments) {
  Stream s(1, 0, "moments");
  const int n = 200000;
  double su = 0.0, sn = 0.0, sn2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double g = s.normal();
    sn += g;
    sn2 += g * g;
  }
  EXPECT_NEAR(su / n, 0.5, 5e-3);
  EXPECT_NEAR(sn / n, 0.0, 1e-2);
  EXPECT_NEAR(sn2 / n, 1.0, 2e-2);
}

TEST(Fnv1a, KnownVector) {
  Fnv1a h;
  h.add(std::string_view("a"));
  EXPECT_EQ(h.value(), 0xaf63dc4c8601ec8cULL);
}

TEST(RunConfig, Validation) {
  auto bad = [](auto mutate) {
    RunConfig c;
    mutate(c);
    try {
      c.validate();
    } catch (const Error& e) {
      return e.code() == ErrorCode::Parse;
    }
    return false;
  };
  EXPECT_TRUE(bad([](RunConfig& c) { c.trials = 0; }));
  EXPECT_TRUE(bad([](RunConfig& c) { c.ball_fraction = 0.0; }));
  EXPECT_TRUE(bad([](RunConfig& c) { c.ball_fraction = 1.5; }));
  EXPECT_TRUE(bad([](RunConfig& c) { c.tol = -1.0; }));
  EXPECT_TRUE(bad([](RunConfig& c) { c.order = 9; }));
  EXPECT_TRUE(bad([](RunConfig& c) {
    c.block = std::pair<std::size_t, std::size_t>{2, 2};
    c.diag = 4;
  }));
  EXPECT_TRUE(bad([](RunConfig& c) {
    c.block = std::pair<std::size_t, std::size_t>{2, 3};
    c.dim = 5;
  }));
  RunConfig ok;
  ok.ball_fraction = 1.0;
  EXPECT_NO_THROW(ok.validate());
}

TEST(GenInstance, ReproducibleDigests) {
  for (Suite s : {Suite::Domains, Suite::Rs, Suite::Dilation, Suite::Additivity, Suite::Multiplicativity, Suite::Lemma31}) {
    RunConfig cfg;
    cfg.suite = s;
    cfg.order = 4;
    const auto a = gen_instance(cfg, 3);
    const auto b = gen_instance(cfg, 3);
    const auto c = gen_instance(cfg, 4);
    EXPECT_EQ(a.digest, b.digest) << to_string(s);
    EXPECT_NE(a.digest, c.digest) << to_string(s);
  }
}

TEST(GenInstance, ElementNormAndTargetRadius) {
  for (double frac : {0.25, 0.95}) {
    RunConfig cfg;
    cfg.suite = Suite::Domains;
    cfg.ball_fraction = frac;
    for (std::size_t t = 0; t < 20; ++t) {
      const auto inst = gen_instance(cfg, t);
      const double na = op_norm(inst.a);
      EXPECT_GE(na, 0.9);
      EXPECT_LE(na, 1.1);
      const double radius = DomainCertificate::for_g(na).radius_onto;
      EXPECT_NEAR(op_norm(inst.w), frac * radius, 1e-12 * radius);
      for (const auto& z : inst.w.diag()) EXPECT_GE(std::abs(z), 0.1 * frac * radius * (1 - 1e-12));
    }
  }
}

TEST(RunSuite, SchemaAndDeterminism) {
  RunConfig cfg;
  cfg.suite = Suite::Rs;
  cfg.trials = 1;
  cfg.seed = 42;
  const Json a = run_suite(cfg);
  const Json b = run_suite(cfg);
  EXPECT_EQ(a.dump(2), b.dump(2));
  for (const char* key : {"tool", "version", "config", "trials", "aggregate"}) EXPECT_TRUE(a.contains(key)) << key;
  const Json& t = a.at("trials").at(0);
  for (const char* key : {"suite", "trial", "digest", "residuals", "fixed_point", "pass", "error"})
    EXPECT_TRUE(t.contains(key)) << key;
}

TEST(RunSuite, SharedTopLevelSchemaAcrossSuites) {
  std::set<std::string> keys;
  for (Suite s : {Suite::Domains, Suite::Lemma31}) {
    RunConfig cfg;
    cfg.suite = s;
    cfg.trials = 1;
    const Json r = run_suite(cfg);
    std::string joined;
    for (auto it = r.begin(); it != r.end(); ++it) joined += it.key() + ",";
    keys.insert(joined);
  }
  EXPECT_EQ(keys.size(), 1u);
}

TEST(RunSuite, Lemma31PassesEverywhere) {
  RunConfig cfg;
  cfg.suite = Suite::Lemma31;
  cfg.trials = 5;
  cfg.diag = 3;
  const Json r = run_suite(cfg);
  EXPECT_EQ(r.at("aggregate").at("pass_rate").get<double>(), 1.0);
  EXPECT_EQ(r.at("trials").at(0).at("residuals").size(), 6u);
}

TEST(RunSuite, NegativeControlFailsEveryTrial) {
  RunConfig cfg;
  cfg.suite = Suite::Additivity;
  cfg.trials = 4;
  cfg.negative_control = true;
  const Json r = run_suite(cfg);
  EXPECT_EQ(r.at("aggregate").at("pass_rate").get<double>(), 0.0);
}

TEST(RunSuite, NumericFailuresAreRecordedPerTrial) {
  RunConfig cfg;
  cfg.suite = Suite::Additivity;
  cfg.trials = 1;
  cfg.diag = 5;  // beyond the conversion limit
  const Json r = run_suite(cfg);
  EXPECT_FALSE(r.at("trials").at(0).at("pass").get<bool>());
  EXPECT_NE(r.at("trials").at(0).at("error").get<std::string>().find("TooLarge"), std::string::npos);
}

}  // namespace
}  // namespace amalgam
