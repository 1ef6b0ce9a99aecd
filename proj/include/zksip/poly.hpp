#pragma once

#include <boost/container/small_vector.hpp>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "zksip/field.hpp"

namespace zksip {

// Point in F^m. Inline storage covers every dimension used in practice.
using EvalPoint = boost::container::small_vector<Element, 6>;

inline std::span<const Element> coords(const EvalPoint& p) { return {p.data(), p.size()}; }

inline EvalPoint operator+(const EvalPoint& a, const EvalPoint& b) {
  if (a.size() != b.size()) throw UsageError("point dimension mismatch");
  EvalPoint r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}
inline EvalPoint operator-(const EvalPoint& a, const EvalPoint& b) {
  if (a.size() != b.size()) throw UsageError("point dimension mismatch");
  EvalPoint r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}
inline EvalPoint operator*(const Element& c, const EvalPoint& a) {
  EvalPoint r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
  return r;
}

inline EvalPoint sample_point(const Field& f, std::size_t m, Rng& rng) {
  EvalPoint p(m);
  for (auto& c : p) c = f.sample(rng);
  return p;
}

inline EvalPoint sample_point_excluding(const Field& f, std::size_t m, Rng& rng, std::span<const Element> excluded) {
  EvalPoint p(m);
  for (auto& c : p) c = f.sample_excluding(rng, excluded);
  return p;
}

enum class DomainKind {
  one_based,   // labels 1..size
  zero_based,  // labels 0..size-1
};

// Interpolation nodes embedded in F, with precomputed barycentric weights.
class InterpolationDomain {
 public:
  InterpolationDomain() = default;
  InterpolationDomain(const Field& f, std::size_t size, DomainKind kind) : field_(&f), kind_(kind) {
    if (size == 0) throw ParameterError("empty interpolation domain");
    const std::uint64_t top = kind == DomainKind::one_based ? size : size - 1;
    if (top >= f.order()) throw ParameterError("domain does not fit into " + f.name());
    for (std::size_t j = 0; j < size; ++j) nodes_.push_back(f.embed_index(label(j)));
    for (std::size_t j = 0; j < size; ++j) {
      Element w = f.one();
      for (std::size_t k = 0; k < size; ++k)
        if (k != j) w *= nodes_[j] - nodes_[k];
      weights_.push_back(w.inverse());
    }
  }

  const Field& field() const { return *field_; }
  DomainKind kind() const { return kind_; }
  std::size_t size() const { return nodes_.size(); }
  std::uint64_t label(std::size_t j) const { return kind_ == DomainKind::one_based ? j + 1 : j; }
  const Element& node(std::size_t j) const { return nodes_.at(j); }
  const std::vector<Element>& nodes() const { return nodes_; }
  std::optional<std::size_t> position_of(const Element& e) const {
    for (std::size_t j = 0; j < nodes_.size(); ++j)
      if (nodes_[j] == e) return j;
    return std::nullopt;
  }

  // chi_j(t): 1 at node j, 0 at the other nodes, degree size-1.
  Element basis(std::size_t j, const Element& t) const {
    Element r = weights_.at(j);
    for (std::size_t k = 0; k < nodes_.size(); ++k)
      if (k != j) r *= t - nodes_[k];
    return r;
  }

  std::vector<Element> basis_all(const Element& t) const {
    const std::size_t n = nodes_.size();
    std::vector<Element> out(n, field_->zero());
    if (auto hit = position_of(t)) {
      out[*hit] = field_->one();
      return out;
    }
    std::vector<Element> diff(n), prefix(n + 1), suffix(n + 1);
    for (std::size_t k = 0; k < n; ++k) diff[k] = t - nodes_[k];
    prefix[0] = suffix[n] = field_->one();
    for (std::size_t k = 0; k < n; ++k) prefix[k + 1] = prefix[k] * diff[k];
    for (std::size_t k = n; k-- > 0;) suffix[k] = suffix[k + 1] * diff[k];
    for (std::size_t j = 0; j < n; ++j) out[j] = weights_[j] * prefix[j] * suffix[j + 1];
    return out;
  }

 private:
  const Field* field_ = nullptr;
  DomainKind kind_ = DomainKind::one_based;
  std::vector<Element> nodes_;
  std::vector<Element> weights_;
};

// Shape of a low-degree extension: n data slots laid out on the grid
// domain^m, individual degree d. Slot i sits at the point whose coordinate j
// is the j-th base-(d+1) digit of i (least significant first).
class LdeSpec {
 public:
  LdeSpec() = default;
  LdeSpec(const Field& f, std::size_t n, std::size_t d, std::size_t m, DomainKind kind = DomainKind::one_based)
      : field_(&f), n_(n), d_(d), m_(m), domain_(f, d + 1, kind) {
    if (m == 0) throw ParameterError("dimension must be positive");
    grid_ = 1;
    for (std::size_t j = 0; j < m; ++j) {
      if (grid_ > (std::size_t{1} << 40) / (d + 1)) throw ResourceError("grid too large");
      grid_ *= d + 1;
    }
    if (n > grid_) throw ParameterError("n exceeds (d+1)^m");
    if (n == 0) n_ = grid_;
  }

  const Field& field() const { return *field_; }
  std::size_t n() const { return n_; }
  std::size_t d() const { return d_; }
  std::size_t m() const { return m_; }
  std::size_t grid_size() const { return grid_; }
  const InterpolationDomain& domain() const { return domain_; }

  boost::container::small_vector<std::size_t, 6> digits(std::size_t index) const {
    if (index >= grid_) throw RangeError("grid index out of range");
    boost::container::small_vector<std::size_t, 6> out(m_);
    for (std::size_t j = 0; j < m_; ++j) {
      out[j] = index % (d_ + 1);
      index /= d_ + 1;
    }
    return out;
  }

  EvalPoint point_of(std::size_t index) const {
    EvalPoint p(m_);
    auto dg = digits(index);
    for (std::size_t j = 0; j < m_; ++j) p[j] = domain_.node(dg[j]);
    return p;
  }

  // chi_index(point), computed coordinate by coordinate in O(dm) time.
  Element chi(std::size_t index, const EvalPoint& point) const {
    check_point(point);
    Element r = field_->one();
    for (std::size_t j = 0; j < m_; ++j) {
      r *= domain_.basis(index % (d_ + 1), point[j]);
      index /= d_ + 1;
    }
    return r;
  }

  void check_point(const EvalPoint& point) const {
    if (point.size() != m_) throw UsageError("point has wrong dimension");
  }

 private:
  const Field* field_ = nullptr;
  std::size_t n_ = 0, d_ = 0, m_ = 0, grid_ = 0;
  InterpolationDomain domain_;
};

// Per-coordinate basis values, the tensor factors of chi(point).
inline std::vector<std::vector<Element>> basis_table(const LdeSpec& spec, const EvalPoint& point) {
  spec.check_point(point);
  std::vector<std::vector<Element>> out;
  for (const auto& c : point) out.push_back(spec.domain().basis_all(c));
  return out;
}

// Full tensor chi(point) over the grid, index order as in LdeSpec.
inline std::vector<Element> tensor(const std::vector<std::vector<Element>>& factors) {
  std::vector<Element> out{factors.at(0).at(0).field().one()};
  for (const auto& f : factors) {
    std::vector<Element> next;
    next.reserve(out.size() * f.size());
    for (const auto& b : f)
      for (const auto& a : out) next.push_back(a * b);
    out = std::move(next);
  }
  return out;
}

inline Element lde_eval(const LdeSpec& spec, std::span<const Element> x, const EvalPoint& point) {
  if (x.size() > spec.grid_size()) throw UsageError("vector longer than the grid");
  const auto table = basis_table(spec, point);
  Element acc = spec.field().zero();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i].is_zero()) continue;
    std::size_t idx = i;
    Element w = x[i];
    for (std::size_t j = 0; j < spec.m(); ++j) {
      w *= table[j][idx % (spec.d() + 1)];
      idx /= spec.d() + 1;
    }
    acc += w;
  }
  return acc;
}

// Streaming x-hat(point): one accumulator plus the position, O(dm) per symbol.
class Fingerprint {
 public:
  Fingerprint(const LdeSpec& spec, EvalPoint point) : spec_(&spec), point_(std::move(point)), acc_(spec.field().zero()) {
    spec.check_point(point_);
  }

  void update(const Element& value) {
    if (pos_ >= spec_->grid_size()) throw StreamOverflow("fingerprint fed past the grid");
    if (!value.is_zero()) acc_ += value * spec_->chi(pos_, point_);
    ++pos_;
  }
  // Adds value at an explicit slot (turnstile updates).
  void add_at(std::size_t index, const Element& value) { acc_ += value * spec_->chi(index, point_); }

  std::size_t position() const { return pos_; }
  const Element& value() const { return acc_; }
  const EvalPoint& point() const { return point_; }

 private:
  const LdeSpec* spec_;
  EvalPoint point_;
  Element acc_;
  std::size_t pos_ = 0;
};

// Affine line t -> base + t * direction in F^m.
struct Line {
  EvalPoint base;
  EvalPoint direction;

  EvalPoint at(const Element& t) const { return base + t * direction; }

  // Parameter t with at(t) == point, if any. A constant line reports t = 0.
  std::optional<Element> parameter_of(const EvalPoint& point) const {
    if (point.size() != base.size()) throw UsageError("point dimension mismatch");
    const Field& f = base.at(0).field();
    std::optional<Element> t;
    for (std::size_t i = 0; i < base.size(); ++i) {
      const Element delta = point[i] - base[i];
      if (direction[i].is_zero()) {
        if (!delta.is_zero()) return std::nullopt;
        continue;
      }
      const Element ti = delta / direction[i];
      if (t && *t != ti) return std::nullopt;
      t = ti;
    }
    return t ? *t : f.zero();
  }

  bool contains(const EvalPoint& point) const { return parameter_of(point).has_value(); }
  bool operator==(const Line& o) const = default;
};

// Line with at(0) = p0 and at(t1) = p1.
inline Line line_through(const EvalPoint& p0, const EvalPoint& p1, const Element& t1) {
  if (p0.size() != p1.size()) throw UsageError("point dimension mismatch");
  if (t1.is_zero()) throw DegenerateParameter("line parameter t1 must be nonzero");
  return {p0, t1.inverse() * (p1 - p0)};
}

// Dense univariate polynomial, coefficients low to high, trailing zeros trimmed.
class UnivariatePoly {
 public:
  UnivariatePoly() = default;
  UnivariatePoly(const Field& f, std::vector<Element> coeffs) : field_(&f), coeffs_(std::move(coeffs)) { trim(); }

  static UnivariatePoly zero(const Field& f) { return {f, {}}; }
  static UnivariatePoly constant(const Element& c) { return {c.field(), {c}}; }

  const Field& field() const { return *field_; }
  // -1 for the zero polynomial.
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<Element>& coeffs() const { return coeffs_; }
  Element coeff(std::size_t i) const { return i < coeffs_.size() ? coeffs_[i] : field_->zero(); }

  Element operator()(const Element& t) const {
    Element r = field_->zero();
    for (std::size_t i = coeffs_.size(); i-- > 0;) r = r * t + coeffs_[i];
    return r;
  }

  std::vector<Element> evaluations(std::span<const Element> at) const {
    std::vector<Element> out;
    for (const auto& t : at) out.push_back((*this)(t));
    return out;
  }

  UnivariatePoly operator+(const UnivariatePoly& o) const {
    std::vector<Element> c(std::max(coeffs_.size(), o.coeffs_.size()), field_->zero());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = coeff(i) + o.coeff(i);
    return {*field_, c};
  }
  UnivariatePoly operator-(const UnivariatePoly& o) const { return *this + o.scaled(-field_->one()); }
  UnivariatePoly operator*(const UnivariatePoly& o) const {
    if (coeffs_.empty() || o.coeffs_.empty()) return zero(*field_);
    std::vector<Element> c(coeffs_.size() + o.coeffs_.size() - 1, field_->zero());
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
      for (std::size_t j = 0; j < o.coeffs_.size(); ++j) c[i + j] += coeffs_[i] * o.coeffs_[j];
    return {*field_, c};
  }
  UnivariatePoly scaled(const Element& s) const {
    std::vector<Element> c = coeffs_;
    for (auto& x : c) x *= s;
    return {*field_, c};
  }
  bool operator==(const UnivariatePoly& o) const { return field_ == o.field_ && coeffs_ == o.coeffs_; }

 private:
  void trim() {
    while (!coeffs_.empty() && coeffs_.back().is_zero()) coeffs_.pop_back();
  }

  const Field* field_ = nullptr;
  std::vector<Element> coeffs_;
};

// Product of (t - r) over the given roots.
inline UnivariatePoly vanishing_poly(const Field& f, std::span<const Element> roots) {
  UnivariatePoly r = UnivariatePoly::constant(f.one());
  for (const auto& x : roots) r = r * UnivariatePoly(f, {-x, f.one()});
  return r;
}

// Unique polynomial of degree <= bound through the points. Extra points beyond
// bound + 1 must agree with it.
inline UnivariatePoly interpolate_univariate(std::span<const std::pair<Element, Element>> points, std::size_t bound) {
  if (points.empty()) throw Underdetermined("interpolation with no points");
  const Field& f = points[0].first.field();
  std::vector<std::pair<Element, Element>> pts;
  for (const auto& p : points) {
    bool dup = false;
    for (const auto& q : pts)
      if (q.first == p.first) {
        if (q.second != p.second) throw UsageError("contradictory values at a duplicate abscissa");
        dup = true;
      }
    if (!dup) pts.push_back(p);
  }
  if (pts.size() < bound + 1) throw Underdetermined("too few distinct abscissae for the degree bound");
  const std::size_t k = bound + 1;
  std::vector<Element> xs;
  for (std::size_t i = 0; i < k; ++i) xs.push_back(pts[i].first);
  const UnivariatePoly master = vanishing_poly(f, xs);
  std::vector<Element> coeffs(k, f.zero());
  for (std::size_t i = 0; i < k; ++i) {
    // master / (t - x_i) by synthetic division.
    std::vector<Element> q(k, f.zero());
    Element carry = f.zero();
    for (std::size_t j = k; j-- > 0;) {
      carry = master.coeff(j + 1) + carry * xs[i];
      q[j] = carry;
    }
    Element denom = f.one();
    for (std::size_t j = 0; j < k; ++j)
      if (j != i) denom *= xs[i] - xs[j];
    const Element s = pts[i].second / denom;
    for (std::size_t j = 0; j < k; ++j) coeffs[j] += s * q[j];
  }
  UnivariatePoly r(f, coeffs);
  for (std::size_t i = k; i < pts.size(); ++i)
    if (r(pts[i].first) != pts[i].second) throw Infeasible("points do not lie on a polynomial of the given degree");
  return r;
}

// Polynomial of degree < labels.size() through (label_j, values_j).
inline UnivariatePoly interpolate_on(std::span<const Element> xs, std::span<const Element> ys) {
  if (xs.size() != ys.size()) throw UsageError("abscissa/value count mismatch");
  std::vector<std::pair<Element, Element>> pts;
  for (std::size_t i = 0; i < xs.size(); ++i) pts.emplace_back(xs[i], ys[i]);
  return interpolate_univariate(pts, xs.size() - 1);
}

// Value at t of the degree < nodes.size() polynomial with the given node values.
inline Element lagrange_combine(const InterpolationDomain& dom, std::span<const Element> values, const Element& t) {
  if (values.size() != dom.size()) throw UsageError("value count does not match domain");
  const auto b = dom.basis_all(t);
  return dot(b, values);
}

using PointFunction = std::function<Element(const EvalPoint&)>;

// Restriction t -> f(L(t)), recovered from its values at t = 0..bound.
inline UnivariatePoly restrict_to_line(const PointFunction& f, const Line& line, std::size_t bound) {
  const Field& fl = line.base.at(0).field();
  if (bound >= fl.order()) throw ParameterError("degree bound needs q > bound");
  std::vector<Element> xs, ys;
  for (std::size_t t = 0; t <= bound; ++t) {
    xs.push_back(fl.embed_index(t));
    ys.push_back(f(line.at(xs.back())));
  }
  return interpolate_on(xs, ys);
}

inline UnivariatePoly restrict_lde_to_line(const LdeSpec& spec, std::span<const Element> x, const Line& line) {
  if (line.base.size() != spec.m()) throw UsageError("line dimension mismatch");
  return restrict_to_line([&](const EvalPoint& p) { return lde_eval(spec, x, p); }, line, spec.d() * spec.m());
}

// theta_j = sum over beta in H of chi_j(beta).
inline std::vector<Element> subcube_coeffs(const InterpolationDomain& dom, std::span<const Element> H) {
  std::vector<Element> theta(dom.size(), dom.field().zero());
  for (const auto& h : H) {
    const auto b = dom.basis_all(h);
    for (std::size_t j = 0; j < theta.size(); ++j) theta[j] += b[j];
  }
  return theta;
}

// Uniform polynomial of degree <= bound meeting the constraints. Free values
// are drawn at the smallest unconstrained abscissae.
inline UnivariatePoly sample_constrained_univariate(const Field& f, std::size_t bound,
                                                    std::span<const std::pair<Element, Element>> constraints,
                                                    Rng& rng) {
  std::vector<std::pair<Element, Element>> pts;
  for (const auto& c : constraints) {
    bool dup = false;
    for (const auto& p : pts)
      if (p.first == c.first) {
        if (p.second != c.second) throw UsageError("contradictory duplicate abscissae");
        dup = true;
      }
    if (!dup) pts.push_back(c);
  }
  // Surplus constraints must agree with the interpolant of the rest.
  if (pts.size() > bound + 1) return interpolate_univariate(pts, bound);
  if (bound + 1 > f.order()) throw ParameterError("degree bound exceeds field size");
  for (std::uint64_t a = 0; pts.size() < bound + 1; ++a) {
    const Element x = f.element(a);
    bool used = false;
    for (const auto& p : pts) used = used || p.first == x;
    if (!used) pts.emplace_back(x, f.sample(rng));
  }
  return interpolate_univariate(pts, bound);
}

// f_i(T) = sum over suffix in H^(m-i) of f(prefix, T, suffix), where
// i = prefix.size() + 1, recovered from its values on the domain nodes.
inline UnivariatePoly partial_sum(const PointFunction& f, std::span<const Element> prefix, std::size_t m,
                                  std::span<const Element> H, const InterpolationDomain& dom) {
  if (prefix.size() >= m) throw UsageError("prefix too long");
  if (H.empty()) throw UsageError("empty summation set");
  const std::size_t rest = m - prefix.size() - 1;
  double cube = 1;
  for (std::size_t j = 0; j < rest; ++j) cube *= static_cast<double>(H.size());
  if (cube * static_cast<double>(dom.size()) > double(1 << 24)) throw ResourceError("summation cube too large");
  std::vector<Element> ys;
  EvalPoint pt(m);
  for (std::size_t j = 0; j < prefix.size(); ++j) pt[j] = prefix[j];
  for (std::size_t node = 0; node < dom.size(); ++node) {
    pt[prefix.size()] = dom.node(node);
    Element acc = dom.field().zero();
    std::vector<std::size_t> ctr(rest, 0);
    while (true) {
      for (std::size_t j = 0; j < rest; ++j) pt[prefix.size() + 1 + j] = H[ctr[j]];
      acc += f(pt);
      std::size_t j = 0;
      while (j < rest && ++ctr[j] == H.size()) ctr[j++] = 0;
      if (j == rest) break;
    }
    ys.push_back(acc);
  }
  return interpolate_on(dom.nodes(), ys);
}

// Sum of f over H^m.
inline Element cube_sum(const PointFunction& f, std::size_t m, std::span<const Element> H) {
  const Field& fl = H[0].field();
  Element acc = fl.zero();
  std::vector<std::size_t> ctr(m, 0);
  EvalPoint pt(m);
  while (true) {
    for (std::size_t j = 0; j < m; ++j) pt[j] = H[ctr[j]];
    acc += f(pt);
    std::size_t j = 0;
    while (j < m && ++ctr[j] == H.size()) ctr[j++] = 0;
    if (j == m) break;
  }
  return acc;
}

}  // namespace zksip
