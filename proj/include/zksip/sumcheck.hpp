#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "zksip/pep.hpp"

namespace zksip {

inline Element sum_over(const UnivariatePoly& g, std::span<const Element> H) {
  Element s = g.field().zero();
  for (const auto& h : H) s += g(h);
  return s;
}

// ---------------------------------------------------------------------------
// Plain sumcheck.

// Checks deferred to the end, as one running flag.
inline Decision sumcheck_decide_deferred(std::size_t d, std::span<const Element> H, const Element& alpha,
                                         const Element& f_rho, std::span<const UnivariatePoly> polys,
                                         std::span<const Element> rho) {
  const std::size_t m = rho.size();
  if (polys.size() != m || m == 0) return Decision::reject;
  for (const auto& g : polys)
    if (g.degree() > static_cast<int>(d)) return Decision::reject;
  bool ok = sum_over(polys[0], H) == alpha;
  ok = ok && polys[m - 1](rho[m - 1]) == f_rho;
  for (std::size_t i = 1; i < m; ++i) ok = ok && sum_over(polys[i], H) == polys[i - 1](rho[i - 1]);
  return ok ? Decision::accept : Decision::reject;
}

// Textbook order: each round checked against the running claim on arrival.
inline Decision sumcheck_decide_classic(std::size_t d, std::span<const Element> H, const Element& alpha,
                                        const Element& f_rho, std::span<const UnivariatePoly> polys,
                                        std::span<const Element> rho) {
  const std::size_t m = rho.size();
  if (polys.size() != m || m == 0) return Decision::reject;
  Element claim = alpha;
  for (std::size_t i = 0; i < m; ++i) {
    if (polys[i].degree() > static_cast<int>(d)) return Decision::reject;
    if (sum_over(polys[i], H) != claim) return Decision::reject;
    claim = polys[i](rho[i]);
  }
  return claim == f_rho ? Decision::accept : Decision::reject;
}

class SumcheckProver {
 public:
  virtual ~SumcheckProver() = default;
  virtual std::string name() const = 0;
  // Round polynomial given the challenges so far.
  virtual UnivariatePoly round(std::span<const Element> prefix) = 0;
};

class HonestSumcheckProver : public SumcheckProver {
 public:
  HonestSumcheckProver(PointFunction f, std::size_t d, std::size_t m, std::vector<Element> H)
      : f_(std::move(f)), m_(m), H_(std::move(H)), dom_(H_.at(0).field(), d + 1, DomainKind::one_based) {}
  std::string name() const override { return "honest"; }
  UnivariatePoly round(std::span<const Element> prefix) override { return partial_sum(f_, prefix, m_, H_, dom_); }

 protected:
  PointFunction f_;
  std::size_t m_;
  std::vector<Element> H_;
  InterpolationDomain dom_;
};

// Degree-d polynomial with subcube sum 1 and d random roots.
inline UnivariatePoly unit_sum_poly(const Field& F, std::size_t d, std::span<const Element> H, Rng& rng) {
  while (true) {
    std::vector<Element> roots;
    for (std::size_t j = 0; j < d; ++j) roots.push_back(F.sample(rng));
    const UnivariatePoly V = vanishing_poly(F, roots);
    const Element s = sum_over(V, H);
    if (!s.is_zero()) return V.scaled(s.inverse());
  }
}

// Keeps every round consistent with its running false claim by adding a
// multiple of a unit-sum polynomial to the honest partial sum. Caught unless
// some challenge hits a root of the difference.
class AdaptiveSumcheckCheater : public HonestSumcheckProver {
 public:
  AdaptiveSumcheckCheater(PointFunction f, std::size_t d, std::size_t m, std::vector<Element> H, Element claim,
                          std::uint64_t seed)
      : HonestSumcheckProver(std::move(f), d, m, std::move(H)), d_(d), claim_(claim), rng_(seed) {}
  std::string name() const override { return "adaptive-cheater"; }

  UnivariatePoly round(std::span<const Element> prefix) override {
    if (!prefix.empty()) claim_ = last_(prefix.back());
    UnivariatePoly g = HonestSumcheckProver::round(prefix);
    const Element gap = claim_ - sum_over(g, H_);
    if (!gap.is_zero()) g = g + unit_sum_poly(claim_.field(), d_, H_, rng_).scaled(gap);
    last_ = g;
    return g;
  }

 private:
  std::size_t d_;
  Element claim_;
  Rng rng_;
  UnivariatePoly last_;
};

struct SumcheckResult {
  Decision decision = Decision::reject;
  std::vector<UnivariatePoly> polys;
  EvalPoint rho;
  Element f_rho;
  SessionMetrics metrics;
  View view;
};

inline SumcheckResult sumcheck_run(const StreamPolyMap& f, std::span<const Symbol> x, const Element& alpha,
                                   std::span<const Element> H, SumcheckProver& prover, std::uint64_t seed,
                                   const RunOptions& opt = {}) {
  const Field& F = f.field();
  const std::size_t m = f.dimension(), d = f.degree();
  ProtocolParams::sumcheck(F, d, m, {H.begin(), H.end()});  // validates
  SumcheckResult res;
  std::vector<ScheduleSlot> sched{{Origin::input, "x"}};
  for (std::size_t i = 0; i < m; ++i) sched.push_back({Origin::prover, "f" + std::to_string(i + 1)});
  res.view = View(F, {{"protocol", "sumcheck"}, {"d", d}, {"m", m}}, sched);
  if (!opt.record_view) res.view.disable();
  SpaceMeter meter(opt.budget_bits, opt.meter_mode);
  VerifierCoins coins(derive_seed(seed, role::verifier), &res.view);
  const unsigned b = F.bits();

  Retained<EvalPoint> rho(meter, m * b);
  rho.set(coins.point("rho", F, m));
  res.rho = rho.get();
  Retained<Element> fx(meter, b), claim(meter, b);
  Retained<bool> ok(meter, 1);
  {
    Retained<int> acc(meter, f.accumulators() * b), pos(meter, index_bits(x.size() + 1));
    acc.set(0);
    pos.set(0);
    res.view.record_symbols(Origin::input, "x", x);
    auto ev = f.evaluator(rho.get());
    Tape<Symbol> tape(std::vector<Symbol>(x.begin(), x.end()));
    while (!tape.done()) ev->consume(tape.next());
    fx.set(ev->value());
  }
  res.f_rho = fx.get();
  claim.set(alpha);
  ok.set(true);
  std::vector<Element> prefix;
  for (std::size_t i = 0; i < m; ++i) {
    UnivariatePoly g = prover.round(prefix);
    res.view.record_elements(Origin::prover, "f" + std::to_string(i + 1), g.coeffs());
    res.metrics.interactive_bits += std::max<std::size_t>(1, g.coeffs().size()) * b + b;
    res.polys.push_back(g);
    if (g.degree() > static_cast<int>(d)) {
      ok.set(false);
      break;
    }
    ok.set(ok.get() && sum_over(g, H) == claim.get());
    claim.set(g(rho.get()[i]));
    prefix.push_back(rho.get()[i]);
  }
  const bool accepted = ok.get() && res.polys.size() == m && claim.get() == fx.get();
  res.decision = accepted ? Decision::accept : Decision::reject;
  res.metrics.decision = res.decision;
  res.metrics.peak_bits = meter.peak();
  res.metrics.rounds = res.polys.size();
  res.metrics.space_violation = meter.violated();
  return res;
}

// ---------------------------------------------------------------------------
// Zero-knowledge sumcheck.

class ZkSumcheckSetup {
 public:
  ZkSumcheckSetup(const ProtocolParams& params, const StreamPolyMap& f, Element alpha, std::size_t n)
      : params_(params), f_(&f), alpha_(alpha), n_(n) {
    if (params.kind != ProtocolKind::zk_sumcheck) throw ParameterError("parameters are not for zk-sumcheck");
    if (&f.field() != params.field || f.degree() != params.d || f.dimension() != params.m)
      throw ParameterError("polynomial map does not match the parameters");
    cspec_ = params.commitment_spec();
    row_domain_ = InterpolationDomain(*params.field, params.d + 1, DomainKind::one_based);
    opening_domain_ = InterpolationDomain(*params.field, params.opening_degree() + 1, DomainKind::zero_based);
    theta_ = subcube_coeffs(row_domain_, params.H);
  }

  const ProtocolParams& params() const { return params_; }
  const StreamPolyMap& f() const { return *f_; }
  const Field& field() const { return *params_.field; }
  const Element& alpha() const { return alpha_; }
  std::size_t n() const { return n_; }
  std::size_t m() const { return params_.m; }
  std::size_t d() const { return params_.d; }
  std::size_t v() const { return params_.v; }
  std::size_t p() const { return params_.p; }
  std::size_t D() const { return params_.opening_degree(); }
  unsigned b() const { return params_.b(); }
  const std::vector<Element>& H() const { return params_.H; }
  const LdeSpec& cspec() const { return cspec_; }
  // Round polynomials are committed by their values on [d+1].
  const InterpolationDomain& row_domain() const { return row_domain_; }
  const InterpolationDomain& opening_domain() const { return opening_domain_; }
  const std::vector<Element>& theta() const { return theta_; }
  const std::vector<Element>& rho_excluded() const { return row_domain_.nodes(); }
  bool rho_admissible(const EvalPoint& rho) const {
    if (rho.size() != m()) return false;
    for (const auto& c : rho)
      if (row_domain_.position_of(c)) return false;
    return true;
  }
  // Coefficients of the commitment rows in decommitment j (0..m) for round r
  // (1..m); empty when round r does not take part.
  std::vector<Element> slot_coefficients(std::size_t j, std::size_t r, std::span<const Element> rho) const {
    const Field& F = field();
    if (r == j + 1 && j < m()) return theta_;
    if (r == j && j >= 1) {
      auto chi = row_domain_.basis_all(rho[j - 1]);
      if (j < m())
        for (auto& c : chi) c = F.zero() - c;
      return chi;
    }
    return {};
  }

 private:
  ProtocolParams params_;
  const StreamPolyMap* f_;
  Element alpha_;
  std::size_t n_;
  LdeSpec cspec_;
  InterpolationDomain row_domain_, opening_domain_;
  std::vector<Element> theta_;
};

// One decommitment outcome: g(tau) against the fingerprint, g(0) against the
// folded target.
struct SlotCheck {
  bool well_formed = false, consistent = false, value_matches = false;
  bool ok() const { return well_formed && consistent && value_matches; }
};

class ZkSumcheckVerifier {
 public:
  virtual ~ZkSumcheckVerifier() = default;
  virtual std::string name() const = 0;
  virtual std::unique_ptr<ZkSumcheckVerifier> clone_fresh() const = 0;

  virtual void begin(const ZkSumcheckSetup& s, VerifierCoins& coins, SpaceMeter& meter) = 0;
  virtual void read_temporal(Tape<EvalPoint>& z) = 0;
  virtual bool continues() const = 0;
  virtual Snapshot snapshot() const = 0;
  virtual void read_input(Tape<Symbol>& x) = 0;
  virtual void begin_commitments() = 0;
  // Ingests round i (1-based) and returns rho_i.
  virtual Element read_round(std::size_t i, const AlgebraicCommitment& c) = 0;
  virtual void read_k(std::size_t k) = 0;
  virtual std::size_t temporal_index() = 0;
  virtual std::vector<Line> opening_lines() = 0;
  virtual void read_openings(const std::vector<std::vector<Element>>& evals) = 0;
  virtual Decision decide() = 0;
  virtual std::vector<SlotCheck> checks() const { return {}; }

  virtual std::uint64_t audited_bits() const = 0;
  virtual std::uint64_t space_bound_bits(const ZkSumcheckSetup& s) const {
    return (s.m() + 1) * (s.params().mc + 3) * s.b() + s.m() * s.b() + index_bits(s.v()) + index_bits(s.p()) + 16;
  }
  virtual std::optional<double> certificate_probability(const ZkSumcheckSetup&, const Snapshot&,
                                                        std::span<const Symbol>, const TemporalCertificate&) const {
    return std::nullopt;
  }
  virtual std::unique_ptr<WhiteboxOracle> closed_form_whitebox(const ZkSumcheckSetup&) const { return nullptr; }
};

// Verifier state folded into one fingerprint and one target per decommitment:
// slot j opens the combination of rounds j and j+1 at sigma^(j+1).
class HonestZkSumcheckVerifier : public ZkSumcheckVerifier {
 public:
  std::string name() const override { return "honest"; }
  std::unique_ptr<ZkSumcheckVerifier> clone_fresh() const override {
    return std::make_unique<HonestZkSumcheckVerifier>();
  }

  void begin(const ZkSumcheckSetup& s, VerifierCoins& coins, SpaceMeter& meter) override {
    s_ = &s;
    coins_ = &coins;
    meter_ = &meter;
    const unsigned b = s.b();
    const std::size_t m = s.m();
    rho_ = std::vector<Retained<Element>>(m);
    for (auto& r : rho_) r.bind(meter, b);
    fp_ = std::vector<Retained<Element>>(m + 1);
    target_ = std::vector<Retained<Element>>(m + 1);
    sigma_ = std::vector<Retained<EvalPoint>>(m + 1);
    tau_ = std::vector<Retained<Element>>(m + 1);
    for (std::size_t j = 0; j <= m; ++j) {
      fp_[j].bind(meter, b);
      target_[j].bind(meter, b);
      sigma_[j].bind(meter, s.params().mc * b);
      tau_[j].bind(meter, b);
    }
    ell_.bind(meter, index_bits(s.v()));
    k_.bind(meter, index_bits(s.p()));
    verdict_.bind(meter, 1);
    const EvalPoint rho = coins.point("rho", s.field(), m, s.rho_excluded());
    for (std::size_t i = 0; i < m; ++i) rho_[i].set(rho[i]);
  }

  void read_temporal(Tape<EvalPoint>& z) override {
    Retained<std::size_t> pos(*meter_, index_bits(z.length() + 1));
    pos.set(0);
    const EvalPoint rho = current_rho();
    while (!z.done()) {
      const std::size_t i = z.position();
      const EvalPoint e = z.next();
      if (!ell_.has() && e == rho) ell_.set(i);
    }
    if (!ell_.has()) verdict_.set(false);
  }

  bool continues() const override { return !(verdict_.has() && !verdict_.get()); }

  Snapshot snapshot() const override {
    return TemporalSnapshot::encode(s_->v(), current_rho(), ell_.has() ? std::optional(ell_.get()) : std::nullopt);
  }

  void read_input(Tape<Symbol>& x) override {
    const unsigned b = s_->b();
    Element val;
    {
      Retained<int> acc(*meter_, s_->f().accumulators() * b), pos(*meter_, index_bits(x.length() + 1));
      acc.set(0);
      pos.set(0);
      auto ev = s_->f().evaluator(current_rho());
      while (!x.done()) ev->consume(x.next());
      val = ev->value();
    }
    target_[s_->m()].set(val);
  }

  void begin_commitments() override {
    const Field& F = s_->field();
    for (std::size_t j = 0; j <= s_->m(); ++j) sigma_[j].set(coins_->point("sigma", F, s_->params().mc));
    for (std::size_t j = 0; j <= s_->m(); ++j) fp_[j].set(F.zero());
    target_[0].set(s_->alpha());
    for (std::size_t j = 1; j < s_->m(); ++j) target_[j].set(F.zero());
  }

  Element read_round(std::size_t i, const AlgebraicCommitment& c) override {
    const Element rho_i = rho_[i - 1].get();
    const std::size_t m = s_->m();
    const auto& cspec = s_->cspec();
    if (c.rows != s_->d() + 1 || c.cols != s_->p() || c.corrections.size() != c.rows) {
      verdict_.set(false);
    } else {
      const auto& theta = s_->theta();
      // Both fingerprints go straight into their slots; row coefficients are
      // recomputed per symbol rather than cached.
      Retained<std::size_t> pos(*meter_, index_bits(c.rows * c.cols + 1));
      pos.set(0);
      const EvalPoint& sA = sigma_[i - 1].get();
      const EvalPoint& sB = sigma_[i].get();
      const Element sign = i < m ? s_->field().zero() - s_->field().one() : s_->field().one();
      const auto coefB = [&](std::size_t r) { return sign * s_->row_domain().basis(r, rho_i); };
      for (std::size_t r = 0; r < c.rows; ++r) {
        for (std::size_t col = 0; col < c.cols; ++col) {
          const Element& y = c.at(r, col);
          fp_[i - 1].mut() += theta[r] * cspec.chi(col, sA) * y;
          fp_[i].mut() += coefB(r) * cspec.chi(col, sB) * y;
        }
        // Corrections follow their row.
        target_[i - 1].mut() -= theta[r] * c.corrections[r];
        target_[i].mut() -= coefB(r) * c.corrections[r];
      }
    }
    rho_[i - 1].reset();
    return rho_i;
  }

  void read_k(std::size_t k) override {
    if (k >= s_->p())
      verdict_.set(false);
    else
      k_.set(k);
  }

  std::size_t temporal_index() override {
    const std::size_t l = ell_.has() ? ell_.get() : 0;
    ell_.reset();
    return l;
  }

  std::vector<Line> opening_lines() override {
    const Field& F = s_->field();
    const Element zero = F.zero();
    const EvalPoint base = s_->cspec().point_of(k_.has() ? k_.get() : 0);
    std::vector<Line> lines;
    for (std::size_t j = 0; j <= s_->m(); ++j) {
      tau_[j].set(coins_->element("tau", F, std::span<const Element>(&zero, 1)));
      lines.push_back(line_through(base, sigma_[j].get(), tau_[j].get()));
      sigma_[j].reset();
    }
    k_.reset();
    return lines;
  }

  void read_openings(const std::vector<std::vector<Element>>& evals) override {
    checks_.assign(s_->m() + 1, {});
    bool all = evals.size() == s_->m() + 1;
    for (std::size_t j = 0; j <= s_->m() && j < evals.size(); ++j) {
      SlotCheck& ck = checks_[j];
      if (evals[j].size() == s_->D() + 1) {
        ck.well_formed = true;
        Retained<Element> acc(*meter_, s_->b());
        acc.set(lagrange_combine(s_->opening_domain(), evals[j], tau_[j].get()));
        ck.consistent = acc.get() == fp_[j].get();
        ck.value_matches = evals[j][0] == target_[j].get();
      }
      all = all && ck.ok();
      tau_[j].reset();
      fp_[j].reset();
      target_[j].reset();
    }
    if (!verdict_.has()) verdict_.set(all);
  }

  Decision decide() override { return verdict_.has() && verdict_.get() ? Decision::accept : Decision::reject; }
  std::vector<SlotCheck> checks() const override { return checks_; }

  std::uint64_t audited_bits() const override {
    std::uint64_t t = ell_.charged_bits() + k_.charged_bits() + verdict_.charged_bits();
    for (const auto& r : rho_) t += r.charged_bits();
    for (std::size_t j = 0; j < fp_.size(); ++j)
      t += fp_[j].charged_bits() + target_[j].charged_bits() + sigma_[j].charged_bits() + tau_[j].charged_bits();
    return t;
  }

  std::optional<double> certificate_probability(const ZkSumcheckSetup& s, const Snapshot& b, std::span<const Symbol>,
                                                const TemporalCertificate& c) const override {
    const auto t = TemporalSnapshot::decode(s.field(), s.m(), s.v(), b);
    return t.found && c.index == t.ell && c.rho == t.rho ? 1.0 : 0.0;
  }
  std::unique_ptr<WhiteboxOracle> closed_form_whitebox(const ZkSumcheckSetup& s) const override;

 protected:
  EvalPoint current_rho() const {
    EvalPoint p;
    for (const auto& r : rho_) p.push_back(r.get());
    return p;
  }

  const ZkSumcheckSetup* s_ = nullptr;
  VerifierCoins* coins_ = nullptr;
  SpaceMeter* meter_ = nullptr;
  std::vector<Retained<Element>> rho_, fp_, target_, tau_;
  std::vector<Retained<EvalPoint>> sigma_;
  Retained<std::size_t> ell_, k_;
  Retained<bool> verdict_;
  std::vector<SlotCheck> checks_;
};

class HonestSumcheckWhitebox : public WhiteboxOracle {
 public:
  explicit HonestSumcheckWhitebox(const ZkSumcheckSetup& s) : s_(&s) {}
  double operator()(const Snapshot& b, const TemporalCertificate& c) const override {
    const auto t = TemporalSnapshot::decode(s_->field(), s_->m(), s_->v(), b);
    return t.found && c.index == t.ell && c.rho == t.rho ? 1.0 : 0.0;
  }

 private:
  const ZkSumcheckSetup* s_;
};

inline std::unique_ptr<WhiteboxOracle> HonestZkSumcheckVerifier::closed_form_whitebox(const ZkSumcheckSetup& s) const {
  return std::make_unique<HonestSumcheckWhitebox>(s);
}

class OpaqueZkSumcheckVerifier : public HonestZkSumcheckVerifier {
 public:
  std::string name() const override { return "opaque"; }
  std::unique_ptr<ZkSumcheckVerifier> clone_fresh() const override {
    return std::make_unique<OpaqueZkSumcheckVerifier>();
  }
  std::optional<double> certificate_probability(const ZkSumcheckSetup&, const Snapshot&, std::span<const Symbol>,
                                                const TemporalCertificate&) const override {
    return std::nullopt;
  }
  std::unique_ptr<WhiteboxOracle> closed_form_whitebox(const ZkSumcheckSetup&) const override { return nullptr; }
};

class SumcheckEnumeratingWhitebox : public WhiteboxOracle {
 public:
  SumcheckEnumeratingWhitebox(const ZkSumcheckSetup& s, const ZkSumcheckVerifier& v,
                              std::vector<std::vector<Symbol>> admissible)
      : s_(&s), v_(&v), inputs_(std::move(admissible)) {}
  double operator()(const Snapshot& b, const TemporalCertificate& c) const override {
    double best = 0;
    for (const auto& x : inputs_) {
      const auto pr = v_->certificate_probability(*s_, b, x, c);
      if (!pr) throw UnsupportedVerifier("verifier '" + v_->name() + "' has no whitebox support");
      best = std::max(best, *pr);
    }
    return best;
  }

 private:
  const ZkSumcheckSetup* s_;
  const ZkSumcheckVerifier* v_;
  std::vector<std::vector<Symbol>> inputs_;
};

inline std::unique_ptr<WhiteboxOracle> whitebox_for(const ZkSumcheckSetup& s, const ZkSumcheckVerifier& v,
                                                    std::vector<std::vector<Symbol>> admissible) {
  if (auto w = v.closed_form_whitebox(s)) return w;
  if (admissible.empty()) throw UsageError("empty admissible input set");
  Snapshot probe;
  probe.push(0, 1);
  probe.push_point(EvalPoint(s.m(), s.field().zero()));
  if (!v.certificate_probability(s, probe, admissible.front(), {EvalPoint(s.m(), s.field().zero()), 0}))
    throw UnsupportedVerifier("verifier '" + v.name() + "' has no whitebox support");
  return std::make_unique<SumcheckEnumeratingWhitebox>(s, v, std::move(admissible));
}

class ZkSumcheckProver {
 public:
  virtual ~ZkSumcheckProver() = default;
  virtual std::string name() const = 0;
  virtual void begin(const ZkSumcheckSetup& s, std::span<const Symbol> x, std::uint64_t seed) = 0;
  virtual const TemporalString& temporal_string() const = 0;
  virtual AlgebraicCommitment commit_round(std::size_t i) = 0;
  virtual void receive_challenge(const Element& rho_i) = 0;
  virtual std::size_t reveal_k() = 0;
  virtual bool check_certificate(std::size_t ell) = 0;
  virtual std::vector<Element> open(std::size_t slot, const Line& line) = 0;
};

class HonestZkSumcheckProver : public ZkSumcheckProver {
 public:
  std::string name() const override { return "honest"; }

  void begin(const ZkSumcheckSetup& s, std::span<const Symbol> x, std::uint64_t seed) override {
    s_ = &s;
    x_.assign(x.begin(), x.end());
    rng_.emplace(derive_seed(seed, 1));
    z_ = TemporalString(s.field(), s.m(), s.v(), derive_seed(seed, 2), s.d() + 1);
    k_ = rng_->below(s.p());
    rho_.clear();
    commitments_.clear();
  }

  const TemporalString& temporal_string() const override { return z_; }

  AlgebraicCommitment commit_round(std::size_t i) override {
    const auto vals = round_values(i);
    commitments_.push_back(algebraic_commit(vals, s_->cspec(), *rng_, k_));
    return commitments_.back();
  }

  void receive_challenge(const Element& rho_i) override { rho_.push_back(rho_i); }
  std::size_t reveal_k() override { return k_; }

  bool check_certificate(std::size_t ell) override {
    return rho_.size() == s_->m() && s_->rho_admissible(rho_) && z_.matches(ell, rho_);
  }

  std::vector<Element> open(std::size_t slot, const Line& line) override {
    return honest_opening(s_->cspec(), combined(slot), line);
  }

 protected:
  // f_i on [d+1] given rho_1..rho_(i-1).
  virtual std::vector<Element> round_values(std::size_t) {
    const UnivariatePoly fi = partial_sum(s_->f().bind(x_), coords(rho_), s_->m(), s_->H(), s_->row_domain());
    return fi.evaluations(s_->row_domain().nodes());
  }

  std::vector<Element> combined(std::size_t slot) const {
    std::vector<Element> w(s_->p(), s_->field().zero());
    for (std::size_t r = 1; r <= commitments_.size(); ++r) {
      const auto coef = s_->slot_coefficients(slot, r, coords(rho_));
      if (coef.empty()) continue;
      const auto part = combine_rows(commitments_[r - 1], coef);
      for (std::size_t c = 0; c < w.size(); ++c) w[c] += part[c];
    }
    return w;
  }

  const ZkSumcheckSetup* s_ = nullptr;
  std::vector<Symbol> x_;
  std::optional<Rng> rng_;
  TemporalString z_;
  std::size_t k_ = 0;
  EvalPoint rho_;
  std::vector<AlgebraicCommitment> commitments_;
};

// Commits to round polynomials that track a false running claim, opens honestly.
class CheatingPartialSumsProver : public HonestZkSumcheckProver {
 public:
  std::string name() const override { return "cheating-partial-sums"; }

 protected:
  std::vector<Element> round_values(std::size_t i) override {
    const Field& F = s_->field();
    UnivariatePoly fi = partial_sum(s_->f().bind(x_), coords(rho_), s_->m(), s_->H(), s_->row_domain());
    if (i > 1) claim_ = last_(rho_.back());
    else claim_ = s_->alpha();
    const Element gap = claim_ - sum_over(fi, s_->H());
    if (!gap.is_zero()) fi = fi + unit_sum_poly(F, s_->d(), s_->H(), *rng_).scaled(gap);
    last_ = fi;
    return fi.evaluations(s_->row_domain().nodes());
  }

 private:
  Element claim_;
  UnivariatePoly last_;
};

// Honest commitments; the opening of the alpha decommitment is shifted at 0 to
// hit the folded target.
class ForgedSumOpeningProver : public HonestZkSumcheckProver {
 public:
  std::string name() const override { return "forged-opening"; }
  std::vector<Element> open(std::size_t slot, const Line& line) override {
    auto evals = HonestZkSumcheckProver::open(slot, line);
    if (slot != 0) return evals;
    Element corr = s_->field().zero();
    for (std::size_t r = 0; r <= s_->d(); ++r) corr += s_->theta()[r] * commitments_.at(0).corrections[r];
    const Element delta = s_->alpha() - corr - evals[0];
    return shifted_opening(std::move(evals), delta);
  }
};

struct ZkSumcheckOutcome {
  Decision decision = Decision::reject;
  Termination termination = Termination::completed;
  View view;
  SessionMetrics metrics;
  std::vector<SlotCheck> checks;
  std::vector<std::size_t> capture;
  // Value certified by the last decommitment, f^x(rho) for an honest run.
  std::optional<Element> opened;
};

inline View zk_sumcheck_view(const ZkSumcheckSetup& s, const RunOptions& opt) {
  std::vector<ScheduleSlot> sched{{Origin::prover, "z"}, {Origin::input, "x"}};
  for (std::size_t i = 0; i < s.m(); ++i) {
    sched.push_back({Origin::prover, "y"});
    sched.push_back({Origin::prover, "gamma"});
  }
  sched.push_back({Origin::prover, "k"});
  for (std::size_t j = 0; j <= s.m(); ++j) sched.push_back({Origin::prover, "opening"});
  View v(s.field(), s.params().to_json(), sched);
  if (!opt.record_view) v.disable();
  return v;
}

namespace detail {

inline void record_round(View& view, const AlgebraicCommitment& c) {
  if (!view.enabled()) return;
  view.record_elements(Origin::prover, "y", c.y);
  view.record_elements(Origin::prover, "gamma", c.corrections);
}

inline void audit(const RunOptions& opt, const SpaceMeter& meter, const ZkSumcheckVerifier& v, const char* step) {
  if (opt.audit && meter.current() != v.audited_bits())
    throw AccountingError(std::string("uncharged verifier state after ") + step);
}

inline void finish(ZkSumcheckOutcome& out, const SpaceMeter& meter, Termination t, Decision d, std::size_t rounds) {
  out.termination = t;
  out.decision = d;
  if (t != Termination::completed) out.view.terminate(termination_name(t));
  out.metrics.decision = d;
  out.metrics.peak_bits = meter.peak();
  out.metrics.rounds = rounds;
  out.metrics.space_violation = meter.violated();
}

inline std::uint64_t round_bits(const ZkSumcheckSetup& s, const AlgebraicCommitment& c) {
  return (c.y.size() + c.corrections.size()) * s.b();
}

// Read off the transcript: the last opening at 0 plus the corrections it
// cancels.
inline std::optional<Element> decommitted_value(const ZkSumcheckSetup& s, const AlgebraicCommitment& last,
                                                const Element& rho_m, const std::vector<std::vector<Element>>& evals) {
  if (evals.size() != s.m() + 1 || evals.back().empty() || last.corrections.size() != s.d() + 1) return std::nullopt;
  Element v = evals.back()[0];
  for (std::size_t r = 0; r <= s.d(); ++r) v += s.row_domain().basis(r, rho_m) * last.corrections[r];
  return v;
}

}  // namespace detail

inline ZkSumcheckOutcome run_zk_sumcheck(const ZkSumcheckSetup& s, ZkSumcheckProver& prover,
                                         const ZkSumcheckVerifier& strategy, std::span<const Symbol> x,
                                         std::uint64_t seed, const RunOptions& opt = {}) {
  ZkSumcheckOutcome out;
  out.view = zk_sumcheck_view(s, opt);
  SpaceMeter meter(opt.budget_bits, opt.meter_mode);
  VerifierCoins coins(derive_seed(seed, role::verifier), &out.view);
  auto V = strategy.clone_fresh();
  const unsigned b = s.b();
  const std::size_t m = s.m();

  prover.begin(s, x, derive_seed(seed, role::prover));
  V->begin(s, coins, meter);
  detail::audit(opt, meter, *V, "begin");
  const TemporalString& z = prover.temporal_string();
  if (out.view.enabled()) out.view.record(Origin::prover, "z", z.symbols(), s.field().bytes());
  auto ztape = z.tape();
  V->read_temporal(ztape);
  out.metrics.setup_bits = s.v() * m * b;
  if (!V->continues()) {
    detail::finish(out, meter, Termination::rejected_at_setup, Decision::reject, 1);
    return out;
  }

  out.view.record_symbols(Origin::input, "x", x);
  Tape<Symbol> xtape(std::vector<Symbol>(x.begin(), x.end()));
  V->read_input(xtape);
  V->begin_commitments();
  detail::audit(opt, meter, *V, "input");
  AlgebraicCommitment last;
  Element rho_m = s.field().zero();
  for (std::size_t i = 1; i <= m; ++i) {
    last = prover.commit_round(i);
    detail::record_round(out.view, last);
    out.metrics.interactive_bits += detail::round_bits(s, last) + b;
    rho_m = V->read_round(i, last);
    prover.receive_challenge(rho_m);
    detail::audit(opt, meter, *V, "round");
  }
  const std::size_t k = prover.reveal_k();
  out.view.record_index(Origin::prover, "k", k);
  out.metrics.interactive_bits += index_bits(s.p());
  V->read_k(k);

  const std::size_t ell = V->temporal_index();
  out.metrics.interactive_bits += index_bits(s.v());
  detail::audit(opt, meter, *V, "certificate");
  if (!prover.check_certificate(ell)) {
    detail::finish(out, meter, Termination::prover_abort, Decision::reject, m + 2);
    return out;
  }

  const auto lines = V->opening_lines();
  std::vector<std::vector<Element>> evals;
  for (std::size_t j = 0; j < lines.size(); ++j) {
    evals.push_back(prover.open(j, lines[j]));
    out.view.record_elements(Origin::prover, "opening", evals.back());
    out.metrics.interactive_bits += 2 * s.params().mc * b + evals.back().size() * b;
  }
  V->read_openings(evals);
  detail::audit(opt, meter, *V, "openings");
  const Decision d = V->decide();
  out.checks = V->checks();
  out.opened = detail::decommitted_value(s, last, rho_m, evals);
  detail::finish(out, meter, Termination::completed, d, m + 3);
  return out;
}

// Simulator: round polynomials are partial sums of a uniformly drawn g with
// the claimed subcube sum, agreeing with f^x on the captured temporal entries
// and with every round already sent.
inline ZkSumcheckOutcome simulate_zk_sumcheck(const ZkSumcheckSetup& s, const ZkSumcheckVerifier& strategy,
                                              std::span<const Symbol> x, const WhiteboxOracle& W,
                                              std::uint64_t seed, const RunOptions& opt = {}) {
  ZkSumcheckOutcome out;
  out.view = zk_sumcheck_view(s, opt);
  SpaceMeter meter(opt.budget_bits, opt.meter_mode);
  VerifierCoins coins(derive_seed(seed, role::verifier), &out.view);
  auto V = strategy.clone_fresh();
  const Field& F = s.field();
  const unsigned b = s.b();
  const std::size_t m = s.m();
  const std::uint64_t sim_seed = derive_seed(seed, role::simulator);
  Rng rng(derive_seed(sim_seed, 1));

  V->begin(s, coins, meter);
  const TemporalString z(F, m, s.v(), derive_seed(sim_seed, 2), s.d() + 1);
  if (out.view.enabled()) out.view.record(Origin::prover, "z", z.symbols(), F.bytes());
  auto ztape = z.tape();
  V->read_temporal(ztape);
  out.metrics.setup_bits = s.v() * m * b;
  if (!V->continues()) {
    detail::finish(out, meter, Termination::rejected_at_setup, Decision::reject, 1);
    return out;
  }

  const Snapshot snap = V->snapshot();
  std::vector<double> weight(s.v());
  for (std::size_t i = 0; i < s.v(); ++i) weight[i] = W(snap, {z.at(i), i});
  out.capture = top_t_capture(weight, static_cast<std::size_t>(V->space_bound_bits(s)));

  const LdeSpec gspec(F, s.params().grid(), s.d(), m, DomainKind::one_based);
  std::vector<LinearConstraint> cons{{subcube_functional(gspec, s.H()), s.alpha()}};
  for (auto i : out.capture) {
    const EvalPoint zi = z.at(i);
    cons.push_back({evaluation_functional(gspec, zi), s.f().evaluate(x, zi)});
  }

  out.view.record_symbols(Origin::input, "x", x);
  Tape<Symbol> xtape(std::vector<Symbol>(x.begin(), x.end()));
  V->read_input(xtape);
  V->begin_commitments();

  const std::size_t k = rng.below(s.p());
  std::vector<AlgebraicCommitment> commits;
  EvalPoint rho;
  for (std::size_t i = 1; i <= m; ++i) {
    const GridPoly g = sample_constrained_multivariate(gspec, cons, rng);
    std::vector<Element> vals;
    std::vector<std::vector<Element>> funcs;
    for (const auto& node : s.row_domain().nodes()) {
      funcs.push_back(partial_sum_functional(gspec, coords(rho), node, s.H()));
      vals.push_back(dot(funcs.back(), g.table()));
    }
    commits.push_back(algebraic_commit(vals, s.cspec(), rng, k));
    detail::record_round(out.view, commits.back());
    out.metrics.interactive_bits += detail::round_bits(s, commits.back()) + b;
    rho.push_back(V->read_round(i, commits.back()));
    for (std::size_t j = 0; j < vals.size(); ++j) cons.push_back({std::move(funcs[j]), vals[j]});
  }
  out.view.record_index(Origin::prover, "k", k);
  out.metrics.interactive_bits += index_bits(s.p());
  V->read_k(k);

  const std::size_t ell = V->temporal_index();
  out.metrics.interactive_bits += index_bits(s.v());
  if (!s.rho_admissible(rho) || !z.matches(ell, rho)) {
    detail::finish(out, meter, Termination::sim_abort_temporal, Decision::reject, m + 2);
    return out;
  }
  if (!std::binary_search(out.capture.begin(), out.capture.end(), ell)) {
    detail::finish(out, meter, Termination::sim_abort_capture, Decision::reject, m + 2);
    return out;
  }

  const auto lines = V->opening_lines();
  const EvalPoint base = s.cspec().point_of(k);
  std::vector<std::vector<Element>> evals;
  for (std::size_t j = 0; j < lines.size(); ++j) {
    if (lines[j].base != base) {
      detail::finish(out, meter, Termination::sim_abort_opening, Decision::reject, m + 3);
      return out;
    }
    std::vector<Element> w(s.p(), F.zero());
    for (std::size_t r = 1; r <= m; ++r) {
      const auto coef = s.slot_coefficients(j, r, coords(rho));
      if (coef.empty()) continue;
      const auto part = combine_rows(commits[r - 1], coef);
      for (std::size_t c = 0; c < w.size(); ++c) w[c] += part[c];
    }
    evals.push_back(honest_opening(s.cspec(), w, lines[j]));
    out.view.record_elements(Origin::prover, "opening", evals.back());
    out.metrics.interactive_bits += 2 * s.params().mc * b + evals.back().size() * b;
  }
  V->read_openings(evals);
  const Decision d = V->decide();
  out.checks = V->checks();
  out.opened = detail::decommitted_value(s, commits.back(), rho.back(), evals);
  detail::finish(out, meter, Termination::completed, d, m + 3);
  return out;
}

}  // namespace zksip
