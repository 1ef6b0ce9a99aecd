#include <gtest/gtest.h>

#include "zksip/sumcheck.hpp"

using namespace zksip;

namespace {

// f(X1, X2) = X1 * X2 as a map that ignores its stream.
class ProductMap : public StreamPolyMap {
 public:
  explicit ProductMap(const Field& f) : f_(&f) {}
  std::string name() const override { return "x1x2"; }
  const Field& field() const override { return *f_; }
  std::size_t degree() const override { return 1; }
  std::size_t dimension() const override { return 2; }
  std::unique_ptr<StreamEvaluator> evaluator(const EvalPoint& p) const override {
    struct E : StreamEvaluator {
      Element v;
      void consume(Symbol) override {}
      Element value() const override { return v; }
    };
    auto e = std::make_unique<E>();
    e->v = p[0] * p[1];
    return e;
  }
  Element evaluate(std::span<const Symbol>, const EvalPoint& p) const override { return p[0] * p[1]; }

 private:
  const Field* f_;
};

Element brute_force_sum(const PointFunction& f, std::span<const Element> H, std::size_t m) {
  Element acc = H[0].field().zero();
  std::vector<std::size_t> c(m, 0);
  while (true) {
    EvalPoint p;
    for (auto i : c) p.push_back(H[i]);
    acc += f(p);
    std::size_t j = 0;
    while (j < m && ++c[j] == H.size()) c[j++] = 0;
    if (j == m) return acc;
  }
}

}  // namespace

TEST(Sumcheck, ProductExample) {
  const Field& F = Field::prime(5);
  ProductMap f(F);
  const std::vector<Element> H{F.element(1), F.element(2)};
  HonestSumcheckProver P(f.bind({}), 1, 2, H);
  for (std::uint64_t s = 0; s < 50; ++s) EXPECT_EQ(sumcheck_run(f, {}, F.element(4), H, P, s).decision, Decision::accept);
}

TEST(Sumcheck, WrongClaimRate) {
  const Field& F = Field::prime(5);
  ProductMap f(F);
  const std::vector<Element> H{F.element(1), F.element(2)};
  int acc = 0;
  const int N = 4000;
  for (int s = 0; s < N; ++s) {
    AdaptiveSumcheckCheater P(f.bind({}), 1, 2, H, F.element(3), 1000 + s);
    acc += sumcheck_run(f, {}, F.element(3), H, P, s).decision == Decision::accept;
  }
  const double bound = 2.0 / 5;
  EXPECT_LE(double(acc) / N, bound + 4 * std::sqrt(bound * (1 - bound) / N));
}

TEST(Sumcheck, DegreeTooHighRejected) {
  const Field& F = Field::prime(7);
  const std::vector<Element> H{F.element(1), F.element(2)};
  const std::vector<UnivariatePoly> polys{UnivariatePoly(F, {F.one(), F.one(), F.one()})};
  const std::vector<Element> rho{F.element(3)};
  EXPECT_EQ(sumcheck_decide_deferred(1, H, F.element(2), F.element(1), polys, rho), Decision::reject);
  EXPECT_EQ(sumcheck_decide_classic(1, H, F.element(2), F.element(1), polys, rho), Decision::reject);
}

struct ZkSumFixture {
  const Field& F = Field::binary(8);
  std::vector<Element> H{F.element(1), F.element(2)};
  ProtocolParams params;
  std::unique_ptr<LdeMap> f;
  std::vector<Symbol> x;
  Element alpha;

  ZkSumFixture() {
    params = ProtocolParams::zk_sumcheck(F, 3, 2, 16, H, {.v = 4 * 252 * 252});
    f = std::make_unique<LdeMap>(params.f_spec());
    Rng rng(5);
    for (int i = 0; i < 16; ++i) x.push_back(static_cast<Symbol>(rng.below(256)));
    alpha = brute_force_sum(f->bind(x), H, 2);
  }
};

TEST(ZkSumcheck, HonestChainHolds) {
  ZkSumFixture fx;
  ZkSumcheckSetup s(fx.params, *fx.f, fx.alpha, 16);
  HonestZkSumcheckProver P;
  HonestZkSumcheckVerifier V;
  int done = 0;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    RunOptions opt;
    opt.audit = true;
    opt.record_view = seed < 2;
    const auto out = run_zk_sumcheck(s, P, V, fx.x, seed, opt);
    if (out.termination == Termination::rejected_at_setup) continue;
    ++done;
    ASSERT_EQ(out.checks.size(), 3u);
    for (const auto& c : out.checks) EXPECT_TRUE(c.ok());
    EXPECT_EQ(out.decision, Decision::accept);
    EXPECT_EQ(out.metrics.rounds, 5u);
  }
  EXPECT_GT(done, 6);
}

TEST(ZkSumcheck, FalseClaimAlwaysRejected) {
  ZkSumFixture fx;
  ZkSumcheckSetup s(fx.params, *fx.f, fx.alpha + fx.F.one(), 16);
  HonestZkSumcheckProver P;
  HonestZkSumcheckVerifier V;
  RunOptions opt;
  opt.record_view = false;
  for (std::uint64_t seed = 0; seed < 8; ++seed) EXPECT_EQ(run_zk_sumcheck(s, P, V, fx.x, seed, opt).decision, Decision::reject);
}

TEST(ZkSumcheck, SimulatorSatisfiesChain) {
  ZkSumFixture fx;
  ZkSumcheckSetup s(fx.params, *fx.f, fx.alpha, 16);
  HonestZkSumcheckProver P;
  HonestZkSumcheckVerifier V;
  const auto W = whitebox_for(s, V, {fx.x});
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto real = run_zk_sumcheck(s, P, V, fx.x, seed);
    const auto sim = simulate_zk_sumcheck(s, V, fx.x, *W, seed);
    if (sim.termination != Termination::completed || real.termination != Termination::completed) continue;
    for (const auto& c : sim.checks) EXPECT_TRUE(c.ok());
    EXPECT_EQ(real.view.layout(), sim.view.layout());
  }
}
