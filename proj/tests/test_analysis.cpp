#include <gtest/gtest.h>

#include <cstdlib>

#include "zksip/analysis.hpp"

using namespace zksip;

namespace {

ProtocolConfig config(ProtocolKind k, std::uint64_t q, std::size_t d, std::size_t m, std::size_t n) {
  ProtocolConfig c;
  c.kind = k;
  c.q = q;
  c.d = d;
  c.m = m;
  c.n = n;
  return c;
}

// Best tail over all size-t subsets.
template <class T>
T brute_best_tail(const std::vector<T>& p, const std::vector<T>& q, std::size_t t) {
  const std::size_t v = p.size();
  T best = T{1} * T{1} + T{1};
  for (std::size_t mask = 0; mask < (std::size_t{1} << v); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcountll(mask)) != t) continue;
    T s{0};
    for (std::size_t i = 0; i < v; ++i)
      if (!((mask >> i) & 1)) s += p[i] * q[i];
    if (s < best) best = s;
  }
  return best;
}

// All vectors of length v with entries in {0, 1/4, ..., 1} summing to 1.
std::vector<std::vector<Rational>> quarter_grid(std::size_t v) {
  std::vector<std::vector<Rational>> out;
  std::vector<int> c(v, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
    if (i + 1 == v) {
      c[i] = left;
      std::vector<Rational> r;
      for (int e : c) r.emplace_back(e, 4);
      out.push_back(r);
      return;
    }
    for (int e = 0; e <= left; ++e) {
      c[i] = e;
      rec(i + 1, left - e);
    }
  };
  rec(0, 4);
  return out;
}

}  // namespace

TEST(Report, CountsMustAddUp) {
  EXPECT_THROW(make_report("x", 10, 3, 3, 3, 0.5, BoundKind::upper), AccountingError);
  const auto r = make_report("x", 100, 0, 100, 0, 0.0, BoundKind::exact);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.to_json()["accept_rate"], 0.0);
}

TEST(Soundness, PepWrongClaimWithinBound) {
  auto cfg = config(ProtocolKind::pep, 257, 2, 2, 9);
  const auto r = soundness_trial(cfg, "wrong-claim", 2000, 3);
  EXPECT_TRUE(r.pass) << r.to_json().dump();
  const auto h = soundness_trial(cfg, "honest", 200, 3);
  EXPECT_EQ(h.rate, 1.0);
}

TEST(Soundness, ReproducibleAcrossThreadCounts) {
  auto cfg = config(ProtocolKind::pep, 31, 1, 2, 4);
  setenv("STREAMPROOF_THREADS", "1", 1);
  const auto a = soundness_trial(cfg, "wrong-claim", 500, 9).to_json();
  setenv("STREAMPROOF_THREADS", "4", 1);
  const auto b = soundness_trial(cfg, "wrong-claim", 500, 9).to_json();
  unsetenv("STREAMPROOF_THREADS");
  EXPECT_EQ(a.dump(), b.dump());
}

TEST(Soundness, ZkSumcheckCase1NeverAccepts) {
  auto cfg = config(ProtocolKind::zk_sumcheck, 256, 3, 2, 16);
  cfg.overrides.v = 4 * 252 * 252;
  const auto r = soundness_trial(cfg, "case1", 100, 1);
  EXPECT_EQ(r.accepts, 0u);
  EXPECT_TRUE(r.pass);
}

TEST(Soundness, UnknownAdversary) {
  auto cfg = config(ProtocolKind::pep, 257, 2, 2, 9);
  EXPECT_THROW(soundness_trial(cfg, "nope", 100, 1), UsageError);
  EXPECT_THROW(soundness_trial(cfg, "wrong-claim", 10, 1), UsageError);
}

TEST(Uniformity, UniformPassesBiasedFails) {
  Rng rng(1);
  const auto ok = marginal_uniformity_test("u", [&](std::size_t) { return rng.below(16); }, 16, 16000);
  EXPECT_TRUE(ok.pass);
  EXPECT_FALSE(ok.power_warning);
  const auto bad = marginal_uniformity_test("b", [&](std::size_t) { return rng.below(3) ? rng.below(8) : rng.below(16); },
                                            16, 16000);
  EXPECT_FALSE(bad.pass);
  const auto weak = marginal_uniformity_test("w", [&](std::size_t) { return rng.below(16); }, 16, 100);
  EXPECT_TRUE(weak.power_warning);
}

TEST(Capture, Examples) {
  const std::vector<double> half{0.5, 0.5};
  const auto r = top_t_capture(half, half, 1);
  EXPECT_EQ(r.C, std::vector<std::size_t>{0});
  EXPECT_DOUBLE_EQ(r.tail, 0.25);
  const std::vector<double> delta{1, 0, 0}, q{0.2, 0.3, 0.5};
  EXPECT_EQ(top_t_capture(delta, q, 1).tail, 0.0);
  const std::vector<double> unnorm{0.5, 0.4};
  EXPECT_THROW(top_t_capture(unnorm, half, 1), UsageError);
}

TEST(Capture, ExhaustiveQuarterGrid) {
  for (std::size_t v = 1; v <= 5; ++v) {
    const auto grid = quarter_grid(v);
    for (const auto& p : grid)
      for (const auto& q : grid)
        for (std::size_t t = 1; t <= v; ++t) {
          const auto r = top_t_capture(std::span<const Rational>(p), std::span<const Rational>(q), t);
          ASSERT_EQ(r.C.size(), t);
          ASSERT_LE(r.tail, Rational(1, static_cast<long long>(t)));
          ASSERT_LE(brute_best_tail(p, q, t), r.tail);
        }
  }
}

TEST(Lift, PerfectDistinguisherPlansFlippedBranch) {
  const Bits alpha{0, 1};
  PerfectDistinguisher D(alpha);
  Rng rng(2);
  const auto plan = plan_lift(D, 2, 64, alpha, 0.75, rng);
  EXPECT_EQ(plan.branch, 2);
  EXPECT_EQ(plan.coordinate, 1u);
  EXPECT_EQ(plan.repetitions, 456u);
  EXPECT_EQ(plan.message_bits, 456u * 128);
  const auto rep = lift_success_trial(D, plan, 60, 4);
  EXPECT_EQ(rep.accepts, 60u);
  EXPECT_TRUE(rep.extra["message_bits_accounted"].get<bool>());
  EXPECT_THROW(plan_lift(D, 2, 64, alpha, 0.0, rng), UsageError);
}

TEST(Lift, ChainBranchRecoversBit) {
  // Looks only at the last coordinate, so the advantage does not drop when
  // the first coordinate is pinned and the chain branch applies.
  struct Leaky : CommitmentDistinguisher {
    Bits alpha{1, 0};
    std::string name() const override { return "leaky"; }
    std::size_t message_bits(std::size_t l, std::size_t p) const override { return l * p; }
    Bits alice(const BitMatrix& y) const override { return y.a; }
    bool bob(const Bits& msg, const Bits& tau, std::size_t k, Rng&) const override {
      const std::size_t p = msg.size() / 2;
      return tau[1] == (alpha[1] ^ msg[p + k]);
    }
  } D;
  Rng rng(5);
  const auto plan = plan_lift(D, 2, 16, D.alpha, 0.5, rng);
  EXPECT_EQ(plan.branch, 1);
  EXPECT_EQ(plan.coordinate, 2u);
  const auto rep = lift_success_trial(D, plan, 200, 6);
  EXPECT_EQ(rep.accepts, 200u);
}

TEST(Lift, CoinFlipHasNoSignal) {
  CoinFlipDistinguisher D;
  Rng rng(7);
  const auto plan = plan_lift(D, 2, 64, Bits{0, 0}, 0.5, rng);
  const auto rep = lift_success_trial(D, plan, 1000, 8);
  EXPECT_NEAR(rep.rate, 0.5, 4 * std::sqrt(0.25 / 1000));
  EXPECT_EQ(plan.message_bits, 0u);
}

TEST(IndexBenchmark, Strategies) {
  RememberPrefix pre(64);
  const auto a = index_strategy_benchmark(pre, 2, 1024, 4000, 1);
  EXPECT_TRUE(a.pass) << a.to_json().dump();
  EXPECT_NEAR(a.bound, 0.5 + 64.0 / 2048, 1e-12);
  GuessZero z;
  EXPECT_TRUE(index_strategy_benchmark(z, 2, 1024, 4000, 2).pass);
  RememberPrefix all(1024);
  EXPECT_EQ(index_strategy_benchmark(all, 2, 1024, 200, 3).rate, 1.0);
}

TEST(Simulation, HonestZkPepStudy) {
  SimulationConfig c;
  c.protocol = config(ProtocolKind::zk_pep, 32, 1, 2, 4);
  c.protocol.overrides.v_per_q_power = 4;
  c.samples = 300;
  c.seed = 11;
  const auto r = SimulationHarness(c).run();
  EXPECT_GT(r["both_completed"].get<std::size_t>(), 250u);
  EXPECT_EQ(r["layout_identical"], r["both_completed"]);
  EXPECT_EQ(r["opened_identical"], r["both_completed"]);
  EXPECT_FALSE(r["marginals"].empty());
}

TEST(Simulation, HonestZkSumcheckOpensSameValue) {
  SimulationConfig c;
  c.protocol = config(ProtocolKind::zk_sumcheck, 32, 1, 2, 4);
  c.protocol.overrides.v_per_q_power = 4;
  c.samples = 60;
  const SimulationHarness h(c);
  std::size_t both = 0;
  for (std::size_t i = 0; i < c.samples; ++i) {
    const auto s = h.sample(i, true);
    if (s.real_term != Termination::completed || s.sim_term != Termination::completed) continue;
    ++both;
    EXPECT_TRUE(s.shapes_equal);
    ASSERT_TRUE(s.real_opened && s.sim_opened);
    EXPECT_EQ(*s.real_opened, *s.sim_opened);
    EXPECT_EQ(s.sim_view.layout(), s.real_view.layout());
  }
  EXPECT_GT(both, 40u);
}

TEST(Simulation, NextIndexRarelyPassesGate) {
  SimulationConfig c;
  c.protocol = config(ProtocolKind::zk_pep, 32, 1, 2, 4);
  c.protocol.overrides.v_per_q_power = 4;
  c.verifier = "j-plus-one";
  c.samples = 400;
  const auto r = SimulationHarness(c).run();
  EXPECT_GE(r["certificate_gate_abort_rate"].get<double>(), 0.98);
  EXPECT_DOUBLE_EQ(r["certificate_gate_pass_rate_exact"].get<double>(), 1.0 / 1024);
}

TEST(Simulation, OpaqueAndUnknownVerifiers) {
  SimulationConfig c;
  c.protocol = config(ProtocolKind::zk_pep, 32, 1, 2, 4);
  c.protocol.overrides.v_per_q_power = 4;
  c.verifier = "opaque";
  EXPECT_THROW(SimulationHarness{c}, UnsupportedVerifier);
  c.verifier = "bogus";
  EXPECT_THROW(SimulationHarness{c}, UsageError);
}
