#include <gtest/gtest.h>

#include "zksip/apps.hpp"

using namespace zksip;

namespace {

// Runs until a session clears the temporal step, so examples test the
// decision logic and not the completeness gap.
template <class F>
AppResult first_completed(F&& run) {
  for (std::uint64_t s = 0; s < 200; ++s) {
    auto r = run(s);
    if (!r.temporal_miss()) return r;
  }
  ADD_FAILURE() << "every session missed the temporal string";
  return {};
}

RunOptions quiet_opts() {
  RunOptions o;
  o.record_view = false;
  return o;
}

// Direct LDE through the Lagrange formula over the whole grid.
Element brute_lde(const LdeSpec& spec, const std::vector<Element>& y, const EvalPoint& p) {
  Element s = spec.field().zero();
  for (std::size_t i = 0; i < y.size(); ++i) {
    Element w = spec.field().one();
    std::size_t idx = i;
    for (std::size_t c = 0; c < spec.m(); ++c) {
      const std::size_t dg = idx % (spec.d() + 1);
      idx /= spec.d() + 1;
      for (std::size_t o = 0; o <= spec.d(); ++o)
        if (o != dg)
          w *= (p[c] - spec.domain().node(o)) / (spec.domain().node(dg) - spec.domain().node(o));
    }
    s += w * y[i];
  }
  return s;
}

}  // namespace

TEST(Apps, DerivedParamsSatisfyGates) {
  for (std::size_t n : {4, 16, 64, 256}) {
    const auto dp = derive_params(n);
    std::size_t g = 1;
    for (std::size_t j = 0; j < dp.m; ++j) g *= dp.d + 1;
    EXPECT_GE(g, n);
    EXPECT_GT(dp.q, 10 * dp.d * dp.m);
    EXPECT_GE(double(dp.q), dp.q_formula);
  }
  EXPECT_THROW(derive_params(16, 0.0), ParameterError);
}

TEST(Apps, IndexExample) {
  const IndexApp app(Field::binary(5), 4, 1, 2, {.v = 4096});
  const std::vector<Symbol> x{3, 1, 4, 1};
  const auto r = first_completed([&](std::uint64_t s) { return app.run(x, 3, app.params().f().element(4), s); });
  EXPECT_EQ(r.decision, Decision::accept);
  EXPECT_TRUE(r.expected);
  const auto bad = first_completed([&](std::uint64_t s) { return app.run(x, 3, app.params().f().element(0), s); });
  EXPECT_EQ(bad.decision, Decision::reject);
  EXPECT_FALSE(bad.expected);
  EXPECT_EQ(app.search(x, 3, 1)->repr(), 4u);
  EXPECT_THROW(app.run(x, 5, app.params().f().one(), 0), RangeError);
  EXPECT_THROW(app.run(x, 0, app.params().f().one(), 0), RangeError);
}

TEST(Apps, IndexAgreesWithLookup) {
  const IndexApp app(Field::binary(5), 4, 1, 2, {.v = 4096});
  Rng rng(11);
  for (int t = 0; t < 60; ++t) {
    std::vector<Symbol> x;
    for (int i = 0; i < 4; ++i) x.push_back(static_cast<Symbol>(rng.below(32)));
    const std::size_t j = 1 + rng.below(4);
    const Element a = rng.below(2) ? app.params().f().element(x[j - 1]) : app.params().f().sample(rng);
    const auto r = app.run(x, j, a, t, quiet_opts());
    if (!r.temporal_miss()) {
      EXPECT_TRUE(r.agrees());
    }
  }
}

TEST(Apps, PointQueryMapMatchesAggregation) {
  const Field& F = Field::prime(101);
  const PointQueryMap f(LdeSpec(F, 8, 2, 2));
  Rng rng(3);
  std::vector<Update> ups;
  for (int i = 0; i < 20; ++i) ups.push_back({static_cast<std::int64_t>(rng.below(17)) - 8, 1 + rng.below(8)});
  const auto x = encode_updates(ups);
  std::vector<Element> y(8, F.zero());
  for (const auto& u : ups) y[u.k - 1] += F.from_integer(u.u);
  for (int t = 0; t < 100; ++t) {
    const auto p = sample_point(F, 2, rng);
    EXPECT_EQ(f.stream_evaluate(x, p), brute_lde(LdeSpec(F, 8, 2, 2), y, p));
    EXPECT_EQ(f.evaluate(x, p), f.stream_evaluate(x, p));
  }
  EXPECT_EQ(decode_update(encode_update({-5, 7})).u, -5);
  EXPECT_EQ(decode_update(encode_update({-5, 7})).k, 7u);
}

TEST(Apps, PointQueryExample) {
  const PointQueryApp app({31}, 4, 1, 2, 8, {.v_per_q_power = 4});
  const std::vector<Update> ups{{3, 2}, {-1, 2}};
  const auto r = first_completed([&](std::uint64_t s) { return app.run(ups, 2, 2, s); });
  EXPECT_EQ(r.decision, Decision::accept);
  const auto bad = first_completed([&](std::uint64_t s) { return app.run(ups, 2, 3, s); });
  EXPECT_EQ(bad.decision, Decision::reject);
}

TEST(Apps, CrtCombine) {
  const std::vector<std::uint64_t> P{11, 13};
  for (std::int64_t v = -71; v <= 71; ++v) {
    const std::vector<std::uint64_t> r{std::uint64_t(((v % 11) + 11) % 11), std::uint64_t(((v % 13) + 13) % 13)};
    EXPECT_EQ(crt_combine(r, P), v);
  }
  EXPECT_THROW(PointQueryApp({11, 11}, 2, 1, 1, 8, {.v_per_q_power = 4}), ParameterError);
  EXPECT_THROW(PointQueryApp({5}, 2, 1, 1, 8, {.v_per_q_power = 4, .allow_large_dm = true}), ParameterError);
}

TEST(Apps, CrtPointQueryAgreesWithAggregation) {
  const PointQueryApp app({11, 13}, 2, 1, 1, 8, {.v_per_q_power = 4});
  Rng rng(21);
  int checked = 0;
  for (int t = 0; t < 60; ++t) {
    std::vector<Update> ups;
    std::int64_t y[2] = {0, 0};
    for (int i = 0; i < 6; ++i) {
      std::size_t k = 1 + rng.below(2);
      std::int64_t u = static_cast<std::int64_t>(rng.below(5)) - 2;
      if (std::abs(y[k - 1] + u) > 8) u = 0;
      y[k - 1] += u;
      ups.push_back({u, k});
    }
    const std::size_t j = 1 + rng.below(2);
    const std::int64_t target = rng.below(2) ? y[j - 1] : static_cast<std::int64_t>(rng.below(17)) - 8;
    const auto r = app.run(ups, j, target, t, quiet_opts());
    if (r.temporal_miss()) continue;
    ++checked;
    EXPECT_TRUE(r.agrees()) << t;
  }
  EXPECT_GT(checked, 20);
}

TEST(Apps, RangeCountExample) {
  const RangeCountApp app(Field::prime(31), RangeFamily::suffixes(4), 1, 3, {.v_per_q_power = 4});
  const std::vector<Symbol> x{1, 2, 3, 2};
  const std::vector<std::size_t> R{2, 3, 4};
  EXPECT_EQ(RangeCountApp::count(x, R), 3u);
  const auto r = first_completed([&](std::uint64_t s) { return app.run(x, R, 3, s); });
  EXPECT_EQ(r.decision, Decision::accept);
  const auto bad = first_completed([&](std::uint64_t s) { return app.run(x, R, 2, s); });
  EXPECT_EQ(bad.decision, Decision::reject);
  EXPECT_THROW(app.run(x, {1, 3}, 1, 0), UsageError);
}

TEST(Apps, RangeCountMapMatchesCounts) {
  const Field& F = Field::prime(31);
  const auto fam = RangeFamily::suffixes(4);
  const LdeSpec spec(F, 5, 1, 3);
  const RangeCountMap f(spec, fam);
  Rng rng(9);
  std::vector<Symbol> x;
  for (int i = 0; i < 12; ++i) x.push_back(1 + static_cast<Symbol>(rng.below(4)));
  std::vector<Element> c;
  for (std::size_t r = 0; r <= 4; ++r) {
    std::uint64_t k = 0;
    for (auto s : x) k += static_cast<std::size_t>(s) > r;
    c.push_back(F.element(k));
  }
  for (int t = 0; t < 100; ++t) {
    const auto p = sample_point(F, 3, rng);
    EXPECT_EQ(f.stream_evaluate(x, p), brute_lde(spec, c, p));
  }
}

TEST(Apps, SelectionMedianExample) {
  const SelectionApp app(Field::prime(31), 4, 1, 3, {.v_per_q_power = 4});
  const std::vector<Symbol> x{1, 1, 2, 3};
  EXPECT_TRUE(SelectionApp::oracle(x, 2, 2, 0, 1));
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto o = app.run(x, 2, 2, 0, 1, s);
    ASSERT_EQ(o.legs.legs.size(), 2u);
    if (o.result.termination == Termination::rejected_at_setup) continue;
    EXPECT_EQ(o.result.decision, Decision::accept);
    break;
  }
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto o = app.run(x, 2, 2, 0, 2, s);
    if (o.result.termination == Termination::rejected_at_setup) continue;
    EXPECT_EQ(o.result.decision, Decision::reject);
    break;
  }
}

TEST(Apps, SelectionSharesTemporalString) {
  // Both legs read one z, so only one temporal pass is charged.
  const SelectionApp app(Field::prime(31), 4, 1, 3, {.v_per_q_power = 4});
  const std::vector<Symbol> x{1, 1, 2, 3};
  const auto o = app.run(x, 2, 2, 0, 1, 5, quiet_opts());
  EXPECT_EQ(o.legs.metrics.setup_bits, app.params().v * app.params().m * app.params().b());
}

TEST(Apps, FrequencyMomentExample) {
  const FrequencyMomentApp app(Field::prime(1031), 4, 1, 3, 2, 32, {.v_per_q_power = 4});
  const std::vector<Symbol> x{1, 1, 2};
  EXPECT_EQ(moment(x, 4, 2), 5u);
  const auto r = first_completed([&](std::uint64_t s) { return app.run(x, 5, s, quiet_opts()); });
  EXPECT_EQ(r.decision, Decision::accept);
  const auto bad = first_completed([&](std::uint64_t s) { return app.run(x, 6, s, quiet_opts()); });
  EXPECT_EQ(bad.decision, Decision::reject);
}

TEST(Apps, FrequencyMomentMapSumsToMoment) {
  const Field& F = Field::prime(1031);
  const FrequencyMomentMap f(F, 4, 1, 3, 2);
  Rng rng(4);
  std::vector<Symbol> x;
  for (int i = 0; i < 32; ++i) x.push_back(1 + static_cast<Symbol>(rng.below(4)));
  const auto H = f.summation_set();
  EXPECT_EQ(cube_sum(f.bind(x), 2, H).repr(), moment(x, 4, 2));
  for (int t = 0; t < 100; ++t) {
    const auto p = sample_point(F, 2, rng);
    EXPECT_EQ(f.stream_evaluate(x, p), f.evaluate(x, p));
  }
}

TEST(Apps, InnerProductExample) {
  const InnerProductApp app(Field::prime(1031), 4, 1, 3, 32, {.v_per_q_power = 4});
  const std::vector<Symbol> x{1, 2}, y{1, 1};
  EXPECT_EQ(inner_product(x, y, 4), 2u);
  const auto r = first_completed([&](std::uint64_t s) { return app.run(x, y, 2, s, quiet_opts()); });
  EXPECT_EQ(r.decision, Decision::accept);
  const auto bad = first_completed([&](std::uint64_t s) { return app.run(x, y, 0, s, quiet_opts()); });
  EXPECT_EQ(bad.decision, Decision::reject);
}

TEST(Apps, InnerProductMapSumsToDot) {
  const Field& F = Field::prime(1031);
  const InnerProductMap f(F, 4, 1, 3);
  Rng rng(6);
  std::vector<Symbol> x, y;
  for (int i = 0; i < 20; ++i) x.push_back(1 + static_cast<Symbol>(rng.below(4)));
  for (int i = 0; i < 25; ++i) y.push_back(1 + static_cast<Symbol>(rng.below(4)));
  const auto xy = combine_streams(x, y);
  EXPECT_EQ(cube_sum(f.bind(xy), 2, f.summation_set()).repr(), inner_product(x, y, 4));
  for (int t = 0; t < 100; ++t) {
    const auto p = sample_point(F, 2, rng);
    EXPECT_EQ(f.stream_evaluate(xy, p), f.evaluate(xy, p));
  }
}
