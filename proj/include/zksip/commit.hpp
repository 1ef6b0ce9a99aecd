#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "zksip/params.hpp"
#include "zksip/stream.hpp"

namespace zksip {

// rows x p matrix y, corrections gamma_i = alpha_i - y_ik, and the hidden k.
// A basic commitment is the one-row case.
struct AlgebraicCommitment {
  std::size_t rows = 0, cols = 0;
  std::vector<Element> y;  // row-major
  std::vector<Element> corrections;
  std::size_t k = 0;

  const Element& at(std::size_t r, std::size_t c) const { return y.at(r * cols + c); }
  std::span<const Element> row(std::size_t r) const { return std::span<const Element>(y).subspan(r * cols, cols); }
};

// Commitment with a given hidden column (zk-sumcheck shares k across rounds).
inline AlgebraicCommitment algebraic_commit(std::span<const Element> alpha, const LdeSpec& cspec, Rng& rng,
                                            std::size_t k) {
  if (alpha.empty()) throw UsageError("nothing to commit");
  if (k >= cspec.n()) throw RangeError("hidden column out of range");
  const Field& f = cspec.field();
  AlgebraicCommitment c;
  c.rows = alpha.size();
  c.cols = cspec.n();
  c.y.reserve(c.rows * c.cols);
  for (std::size_t i = 0; i < c.rows * c.cols; ++i) c.y.push_back(f.sample(rng));
  c.k = k;
  for (std::size_t r = 0; r < c.rows; ++r) c.corrections.push_back(alpha[r] - c.at(r, c.k));
  return c;
}

inline AlgebraicCommitment algebraic_commit(std::span<const Element> alpha, const LdeSpec& cspec, Rng& rng) {
  const std::size_t k = rng.below(cspec.n());
  return algebraic_commit(alpha, cspec, rng, k);
}

inline AlgebraicCommitment basic_commit(const Element& alpha, const LdeSpec& cspec, Rng& rng) {
  return algebraic_commit(std::span<const Element>(&alpha, 1), cspec, rng);
}

// w = sum_r beta_r * y_r.
inline std::vector<Element> combine_rows(const AlgebraicCommitment& c, std::span<const Element> beta) {
  if (beta.size() != c.rows) throw UsageError("coefficient count does not match commitment rows");
  std::vector<Element> w(c.cols, beta[0].field().zero());
  for (std::size_t r = 0; r < c.rows; ++r)
    for (std::size_t j = 0; j < c.cols; ++j) w[j] += beta[r] * c.at(r, j);
  return w;
}

// Streaming y-hat(sigma, beta) = sum_r beta_r * y_r-hat(sigma): one accumulator;
// chi_col(sigma) and beta_r are recomputed per symbol.
class CombinedFingerprint {
 public:
  CombinedFingerprint(const LdeSpec& cspec, const EvalPoint& sigma, std::function<Element(std::size_t)> coeff)
      : cspec_(&cspec), sigma_(&sigma), coeff_(std::move(coeff)), acc_(cspec.field().zero()) {}

  void column_begin(std::size_t col) { chi_ = cspec_->chi(col, *sigma_); }
  void ingest(std::size_t row, const Element& value) { acc_ += coeff_(row) * chi_ * value; }
  const Element& value() const { return acc_; }

 private:
  const LdeSpec* cspec_;
  const EvalPoint* sigma_;
  std::function<Element(std::size_t)> coeff_;
  Element acc_, chi_;
};

// Offline oracle of the same quantity.
inline Element combined_fingerprint(const AlgebraicCommitment& c, const LdeSpec& cspec, const EvalPoint& sigma,
                                    std::span<const Element> beta) {
  const auto w = combine_rows(c, beta);
  return lde_eval(cspec, w, sigma);
}

struct DecommitChallenge {
  Line line;    // line(0) = k on the grid, line(tau) = sigma
  Element tau;  // nonzero
};

inline DecommitChallenge decommit_challenge(const LdeSpec& cspec, std::size_t k, const EvalPoint& sigma, Rng& rng) {
  const Field& f = cspec.field();
  const Element zero = f.zero();
  const Element tau = f.sample_excluding(rng, std::span<const Element>(&zero, 1));
  return {line_through(cspec.point_of(k), sigma, tau), tau};
}

// Labels 0..D at which openings are sent.
inline std::vector<Element> opening_abscissae(const Field& f, std::size_t D) { return embed_range(f, 0, D); }

// Honest opening: w-hat along the line, as values at 0..D with D = d * mc.
inline std::vector<Element> honest_opening(const LdeSpec& cspec, std::span<const Element> w, const Line& line) {
  const std::size_t D = cspec.d() * cspec.m();
  std::vector<Element> out;
  for (const auto& t : opening_abscissae(cspec.field(), D)) out.push_back(lde_eval(cspec, w, line.at(t)));
  return out;
}

struct OpeningCheck {
  bool well_formed = false;
  bool consistent = false;     // g(tau) equals the fingerprint
  bool value_matches = false;  // g(0) + correction equals the target
  Element opened;              // g(0) + correction

  bool ok() const { return well_formed && consistent && value_matches; }
};

inline OpeningCheck check_opening(const LdeSpec& cspec, std::span<const Element> evals, const Element& tau,
                                  const Element& fingerprint, const Element& correction, const Element& target) {
  OpeningCheck r;
  const std::size_t D = cspec.d() * cspec.m();
  if (evals.size() != D + 1) return r;
  r.well_formed = true;
  const InterpolationDomain dom(cspec.field(), D + 1, DomainKind::zero_based);
  r.consistent = lagrange_combine(dom, evals, tau) == fingerprint;
  r.opened = evals[0] + correction;
  r.value_matches = r.opened == target;
  return r;
}

// Verifier state after receiving a commitment with coefficient vector beta.
struct CommitReceipt {
  EvalPoint sigma;
  Element fingerprint;
  Element correction;
  std::size_t k = 0;
};

inline CommitReceipt receive_commitment(const LdeSpec& cspec, const AlgebraicCommitment& c,
                                        std::span<const Element> beta, Rng& rng) {
  if (beta.size() != c.rows) throw UsageError("coefficient count does not match commitment rows");
  CommitReceipt r;
  r.sigma = sample_point(cspec.field(), cspec.m(), rng);
  CombinedFingerprint fp(cspec, r.sigma, [&](std::size_t row) { return beta[row]; });
  for (std::size_t col = 0; col < c.cols; ++col) {
    fp.column_begin(col);
    for (std::size_t row = 0; row < c.rows; ++row) fp.ingest(row, c.at(row, col));
  }
  r.fingerprint = fp.value();
  r.correction = dot(beta, c.corrections);
  r.k = c.k;
  return r;
}

using OpeningStrategy = std::function<std::vector<Element>(const Line&)>;

// Opening of a (combined) commitment to the claimed value.
inline OpeningCheck decommit(const Element& claimed, const CommitReceipt& receipt, const LdeSpec& cspec,
                             const OpeningStrategy& prover, Rng& rng) {
  const auto ch = decommit_challenge(cspec, receipt.k, receipt.sigma, rng);
  const auto evals = prover(ch.line);
  return check_opening(cspec, evals, ch.tau, receipt.fingerprint, receipt.correction, claimed);
}

// Opening of g = honest + delta * V with V(0) = 1 and V = 0 on [D]: in
// evaluation form only the value at 0 changes. Passes the fingerprint test
// only when tau lands in [D].
inline std::vector<Element> shifted_opening(std::vector<Element> honest, const Element& delta) {
  honest.at(0) += delta;
  return honest;
}

// z in (S^m)^v with S = F minus the labels 1..excluded, readable at any
// position. Coordinate c of entry i is drawn from word i*m + c.
class TemporalString {
 public:
  TemporalString() = default;
  TemporalString(const Field& f, std::size_t m, std::size_t v, std::uint64_t key, std::size_t excluded = 0)
      : field_(&f), m_(m), v_(v), excluded_(excluded), random_(key) {
    if (excluded >= f.order()) throw ParameterError("temporal alphabet is empty");
  }

  std::size_t size() const { return v_; }
  std::size_t m() const { return m_; }
  const Field& field() const { return *field_; }

  std::uint32_t coord(std::size_t i, std::size_t c) const {
    const std::uint64_t u = random_.below(i * m_ + c, field_->order() - excluded_);
    return static_cast<std::uint32_t>(u == 0 ? 0 : u + excluded_);
  }

  EvalPoint at(std::size_t i) const {
    if (i >= v_) throw RangeError("temporal index out of range");
    EvalPoint p(m_);
    for (std::size_t c = 0; c < m_; ++c) p[c] = Element(*field_, coord(i, c));
    return p;
  }

  bool matches(std::size_t i, const EvalPoint& p) const {
    if (i >= v_ || p.size() != m_) return false;
    for (std::size_t c = 0; c < m_; ++c)
      if (&p[c].field() != field_ || coord(i, c) != p[c].repr()) return false;
    return true;
  }

  std::optional<std::size_t> first_match(const EvalPoint& p) const {
    for (std::size_t i = 0; i < v_; ++i)
      if (matches(i, p)) return i;
    return std::nullopt;
  }

  Tape<EvalPoint> tape() const {
    const TemporalString self = *this;
    return Tape<EvalPoint>(v_, [self](std::size_t i) { return self.at(i); });
  }

  std::vector<std::uint64_t> symbols() const {
    std::vector<std::uint64_t> s;
    s.reserve(v_ * m_);
    for (std::size_t i = 0; i < v_; ++i)
      for (std::size_t c = 0; c < m_; ++c) s.push_back(coord(i, c));
    return s;
  }

 private:
  const Field* field_ = nullptr;
  std::size_t m_ = 0, v_ = 0, excluded_ = 0;
  RandomString random_{0};
};

struct TemporalCertificate {
  EvalPoint rho;
  std::size_t index = 0;
  bool operator==(const TemporalCertificate&) const = default;
};

}  // namespace zksip
