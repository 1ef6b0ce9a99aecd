#include <gtest/gtest.h>

#include <map>

#include "zksip/grid.hpp"
#include "zksip/poly.hpp"

using namespace zksip;

namespace {

// Product formula evaluated directly from the definition.
Element oracle_chi(const Field& f, std::size_t idx, const EvalPoint& pt, std::size_t d, bool zero_based) {
  Element r = f.one();
  for (std::size_t j = 0; j < pt.size(); ++j) {
    const std::size_t dig = idx % (d + 1);
    idx /= d + 1;
    const std::uint64_t lab = zero_based ? dig : dig + 1;
    for (std::size_t k = 0; k <= d; ++k) {
      const std::uint64_t lk = zero_based ? k : k + 1;
      if (lk == lab) continue;
      r *= (pt[j] - f.embed_index(lk)) / (f.embed_index(lab) - f.embed_index(lk));
    }
  }
  return r;
}

Element oracle_lde(const Field& f, const std::vector<Element>& x, const EvalPoint& pt, std::size_t d, bool zb) {
  Element acc = f.zero();
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * oracle_chi(f, i, pt, d, zb);
  return acc;
}

}  // namespace

TEST(Lagrange, SmallDomainValues) {
  const Field& f = Field::prime(5);
  InterpolationDomain dom(f, 2, DomainKind::one_based);
  EXPECT_EQ(dom.basis(0, f.element(1)), f.one());
  EXPECT_EQ(dom.basis(0, f.element(2)), f.zero());
  EXPECT_EQ(dom.basis(1, f.element(2)), f.one());
  for (std::uint32_t t = 0; t < 5; ++t) {
    const auto b = dom.basis_all(f.element(t));
    EXPECT_EQ(b[0] + b[1], f.one());
    EXPECT_EQ(b[0], dom.basis(0, f.element(t)));
  }
  EXPECT_THROW(InterpolationDomain(f, 5, DomainKind::one_based), ParameterError);
  EXPECT_NO_THROW(InterpolationDomain(f, 5, DomainKind::zero_based));
}

TEST(Lde, SmallExample) {
  const Field& f = Field::prime(5);
  LdeSpec spec(f, 2, 1, 1);
  const std::vector<Element> x{f.element(3), f.element(1)};
  EXPECT_EQ(lde_eval(spec, x, {f.element(2)}), f.element(1));
  EXPECT_EQ(lde_eval(spec, x, {f.element(1)}), f.element(3));
  EXPECT_THROW(LdeSpec(f, 5, 1, 2), ParameterError);
}

TEST(Lde, MatchesDirectFormulaAndGrid) {
  Rng rng(3);
  for (const Field* f : {&Field::prime(13), &Field::binary(4), &Field::prime(257)}) {
    for (std::size_t d : {1u, 2u, 3u})
      for (std::size_t m : {1u, 2u, 3u})
        for (bool zb : {false, true}) {
          LdeSpec spec(*f, 0, d, m, zb ? DomainKind::zero_based : DomainKind::one_based);
          std::vector<Element> x;
          for (std::size_t i = 0; i < spec.grid_size(); ++i) x.push_back(f->sample(rng));
          for (std::size_t i = 0; i < spec.grid_size(); ++i) EXPECT_EQ(lde_eval(spec, x, spec.point_of(i)), x[i]);
          for (int t = 0; t < 5; ++t) {
            const EvalPoint p = sample_point(*f, m, rng);
            EXPECT_EQ(lde_eval(spec, x, p), oracle_lde(*f, x, p, d, zb));
            Fingerprint fp(spec, p);
            for (const auto& e : x) fp.update(e);
            EXPECT_EQ(fp.value(), oracle_lde(*f, x, p, d, zb));
          }
        }
  }
}

TEST(Lde, RestrictionToLineHasDegreeDm) {
  const Field& f = Field::prime(257);
  Rng rng(5);
  LdeSpec spec(f, 0, 2, 3);
  std::vector<Element> x;
  for (std::size_t i = 0; i < spec.grid_size(); ++i) x.push_back(f.sample(rng));
  const Line line = line_through(sample_point(f, 3, rng), sample_point(f, 3, rng), f.element(17));
  const UnivariatePoly g = restrict_lde_to_line(spec, x, line);
  EXPECT_LE(g.degree(), 6);
  for (int t = 0; t < 20; ++t) {
    const Element s = f.sample(rng);
    EXPECT_EQ(g(s), lde_eval(spec, x, line.at(s)));
  }
}

TEST(LineTest, ThroughAndInverse) {
  const Field& f = Field::prime(5);
  const EvalPoint p0{f.element(0), f.element(0)}, p1{f.element(1), f.element(1)};
  const Line l = line_through(p0, p1, f.element(1));
  EXPECT_EQ(l.at(f.element(2)), (EvalPoint{f.element(2), f.element(2)}));
  EXPECT_EQ(*l.parameter_of(p1), f.element(1));
  EXPECT_FALSE(l.parameter_of(EvalPoint{f.element(1), f.element(2)}).has_value());
  EXPECT_THROW(line_through(p0, p1, f.zero()), DegenerateParameter);
  const Line l3 = line_through(p0, p1, f.element(3));
  EXPECT_EQ(l3.at(f.element(3)), p1);
  EXPECT_EQ(*l3.parameter_of(p1), f.element(3));
}

TEST(Interpolation, ExactAndErrors) {
  const Field& f = Field::prime(7);
  const UnivariatePoly p(f, {f.element(2), f.element(0), f.element(3)});  // 3t^2 + 2
  std::vector<std::pair<Element, Element>> pts;
  for (std::uint32_t t = 0; t < 5; ++t) pts.emplace_back(f.element(t), p(f.element(t)));
  EXPECT_EQ(interpolate_univariate(pts, 2), p);
  EXPECT_EQ(interpolate_univariate(pts, 4), p);
  EXPECT_THROW(interpolate_univariate(std::span(pts).first(2), 2), Underdetermined);
  auto bad = pts;
  bad.emplace_back(f.element(1), f.element(0));
  EXPECT_THROW(interpolate_univariate(bad, 2), UsageError);
  pts[4].second += f.one();
  EXPECT_THROW(interpolate_univariate(pts, 2), Infeasible);
}

TEST(Subcube, CoefficientsSumChi) {
  const Field& f = Field::prime(5);
  InterpolationDomain dom(f, 2, DomainKind::one_based);
  const std::vector<Element> H{f.element(1), f.element(2)};
  const auto theta = subcube_coeffs(dom, H);
  EXPECT_EQ(theta, (std::vector<Element>{f.one(), f.one()}));
}

TEST(PartialSum, ProductExample) {
  const Field& f = Field::prime(5);
  InterpolationDomain dom(f, 2, DomainKind::one_based);
  const std::vector<Element> H{f.element(1), f.element(2)};
  auto prod = [](const EvalPoint& p) { return p[0] * p[1]; };
  const UnivariatePoly f1 = partial_sum(prod, {}, 2, H, dom);
  EXPECT_EQ(f1, UnivariatePoly(f, {f.zero(), f.element(3)}));
  EXPECT_EQ(cube_sum(prod, 2, H), f.element(4));
}

TEST(ConstrainedSampling, UnivariateMeetsConstraintsAndIsUniformOnFreeValue) {
  const Field& f = Field::prime(7);
  Rng rng(11);
  const std::vector<std::pair<Element, Element>> cons{{f.element(0), f.element(3)}};
  std::map<std::uint32_t, int> counts;
  for (int i = 0; i < 7000; ++i) {
    const auto g = sample_constrained_univariate(f, 1, cons, rng);
    EXPECT_EQ(g(f.element(0)), f.element(3));
    EXPECT_LE(g.degree(), 1);
    ++counts[g(f.element(4)).repr()];
  }
  EXPECT_EQ(counts.size(), 7u);
  for (auto [v, c] : counts) EXPECT_NEAR(c, 1000, 150);
  const std::vector<std::pair<Element, Element>> dup{{f.element(1), f.element(1)}, {f.element(1), f.element(2)}};
  EXPECT_THROW(sample_constrained_univariate(f, 3, dup, rng), UsageError);
}

TEST(ConstrainedSampling, MultivariateSubcubeAndPointConstraints) {
  const Field& f = Field::binary(8);
  Rng rng(2);
  LdeSpec spec(f, 0, 3, 2);
  const std::vector<Element> H{f.element(1), f.element(2)};
  const EvalPoint rho{f.element(77), f.element(200)};
  std::vector<LinearConstraint> cons{{subcube_functional(spec, H), f.element(9)},
                                     {evaluation_functional(spec, rho), f.element(41)}};
  for (int t = 0; t < 20; ++t) {
    const GridPoly g = sample_constrained_multivariate(spec, cons, rng);
    EXPECT_EQ(cube_sum(g.as_function(), 2, H), f.element(9));
    EXPECT_EQ(g(rho), f.element(41));
    const auto g1 = partial_sum(g.as_function(), {}, 2, H, spec.domain());
    const Element theta_sum = g1(H[0]) + g1(H[1]);
    EXPECT_EQ(theta_sum, f.element(9));
    const EvalPoint pre{f.element(5)};
    const auto w = partial_sum_functional(spec, coords(pre), f.element(3), H);
    const auto g2 = partial_sum(g.as_function(), coords(pre), 2, H, spec.domain());
    EXPECT_EQ(dot(w, g.table()), g2(f.element(3)));
  }
  cons.push_back({evaluation_functional(spec, rho), f.element(42)});
  EXPECT_THROW(sample_constrained_multivariate(spec, cons, rng), Infeasible);
}
