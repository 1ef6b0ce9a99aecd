#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "zksip/poly.hpp"

namespace zksip {

// Multivariate polynomial of individual degree <= d, stored as its values on
// the grid domain^m. Every linear constraint on it is a vector of grid weights.
class GridPoly {
 public:
  GridPoly(const LdeSpec& spec, std::vector<Element> table) : spec_(spec), table_(std::move(table)) {
    if (table_.size() != spec_.grid_size()) throw UsageError("table size does not match the grid");
  }

  const LdeSpec& spec() const { return spec_; }
  const std::vector<Element>& table() const { return table_; }

  Element operator()(const EvalPoint& point) const { return lde_eval(spec_, table_, point); }

  PointFunction as_function() const {
    return [this](const EvalPoint& p) { return (*this)(p); };
  }

 private:
  LdeSpec spec_;
  std::vector<Element> table_;
};

// Weights w with g(point) = <w, table>.
inline std::vector<Element> evaluation_functional(const LdeSpec& spec, const EvalPoint& point) {
  return tensor(basis_table(spec, point));
}

// Weights for f_i(node) where f_i is the round-i partial sum over H of the
// coordinates after the prefix.
inline std::vector<Element> partial_sum_functional(const LdeSpec& spec, std::span<const Element> prefix,
                                                   const Element& t, std::span<const Element> H) {
  if (prefix.size() >= spec.m()) throw UsageError("prefix too long");
  std::vector<std::vector<Element>> factors;
  for (const auto& c : prefix) factors.push_back(spec.domain().basis_all(c));
  factors.push_back(spec.domain().basis_all(t));
  const auto theta = subcube_coeffs(spec.domain(), H);
  while (factors.size() < spec.m()) factors.push_back(theta);
  return tensor(factors);
}

inline std::vector<Element> subcube_functional(const LdeSpec& spec, std::span<const Element> H) {
  const auto theta = subcube_coeffs(spec.domain(), H);
  return tensor(std::vector<std::vector<Element>>(spec.m(), theta));
}

struct LinearConstraint {
  std::vector<Element> weights;
  Element value;
};

// Uniform sample from {u : <w_r, u> = value_r for all r} in F^n.
inline std::vector<Element> sample_affine_solution(const Field& f, std::size_t n,
                                                   std::span<const LinearConstraint> constraints, Rng& rng) {
  std::vector<std::vector<Element>> rows;
  std::vector<Element> rhs;
  for (const auto& c : constraints) {
    if (c.weights.size() != n) throw UsageError("constraint has the wrong width");
    rows.push_back(c.weights);
    rhs.push_back(c.value);
  }
  std::vector<std::size_t> pivot_col;
  std::size_t r = 0;
  for (std::size_t col = 0; col < n && r < rows.size(); ++col) {
    std::size_t piv = r;
    while (piv < rows.size() && rows[piv][col].is_zero()) ++piv;
    if (piv == rows.size()) continue;
    std::swap(rows[piv], rows[r]);
    std::swap(rhs[piv], rhs[r]);
    const Element inv = rows[r][col].inverse();
    for (std::size_t j = col; j < n; ++j) rows[r][j] *= inv;
    rhs[r] *= inv;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i == r || rows[i][col].is_zero()) continue;
      const Element s = rows[i][col];
      for (std::size_t j = col; j < n; ++j) rows[i][j] -= s * rows[r][j];
      rhs[i] -= s * rhs[r];
    }
    pivot_col.push_back(col);
    ++r;
  }
  for (std::size_t i = r; i < rows.size(); ++i)
    if (!rhs[i].is_zero()) throw Infeasible("inconsistent linear constraints");
  std::vector<bool> is_pivot(n, false);
  for (auto c : pivot_col) is_pivot[c] = true;
  std::vector<Element> u(n, f.zero());
  for (std::size_t j = 0; j < n; ++j)
    if (!is_pivot[j]) u[j] = f.sample(rng);
  for (std::size_t i = 0; i < r; ++i) {
    Element v = rhs[i];
    for (std::size_t j = pivot_col[i] + 1; j < n; ++j)
      if (!is_pivot[j]) v -= rows[i][j] * u[j];
    u[pivot_col[i]] = v;
  }
  return u;
}

inline GridPoly sample_constrained_multivariate(const LdeSpec& spec, std::span<const LinearConstraint> constraints,
                                                Rng& rng) {
  if (spec.grid_size() > (std::size_t{1} << 16)) throw ResourceError("grid larger than 2^16");
  return {spec, sample_affine_solution(spec.field(), spec.grid_size(), constraints, rng)};
}

}  // namespace zksip
