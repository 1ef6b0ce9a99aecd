#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "zksip/capture.hpp"
#include "zksip/commit.hpp"
#include "zksip/grid.hpp"
#include "zksip/poly_map.hpp"
#include "zksip/session.hpp"

namespace zksip {

// Claim f^x(beta) = alpha with x on the input stream.
struct PepInput {
  std::vector<Symbol> x;
  EvalPoint beta;
};

// ---------------------------------------------------------------------------
// Polynomial evaluation proof without zero knowledge.

class PepProver {
 public:
  virtual ~PepProver() = default;
  virtual std::string name() const = 0;
  // Values of g = f^x o L at 1..dm, or at 0..dm in search mode.
  virtual std::vector<Element> respond(const StreamPolyMap& f, const PepInput& in, const Line& line, bool search) = 0;
};

class HonestPepProver : public PepProver {
 public:
  std::string name() const override { return "honest"; }
  std::vector<Element> respond(const StreamPolyMap& f, const PepInput& in, const Line& line, bool search) override {
    const std::size_t D = f.degree() * f.dimension();
    std::vector<Element> out;
    for (std::size_t t = search ? 0 : 1; t <= D; ++t) out.push_back(f.evaluate(in.x, line.at(f.field().embed_index(t))));
    return out;
  }
};

// Search mode with a wrong g(0): the honest line restriction shifted by a
// multiple of the polynomial vanishing on [dm].
class ShiftedPepProver : public PepProver {
 public:
  explicit ShiftedPepProver(Element delta) : delta_(delta) {}
  std::string name() const override { return "shifted"; }
  std::vector<Element> respond(const StreamPolyMap& f, const PepInput& in, const Line& line, bool search) override {
    auto out = HonestPepProver().respond(f, in, line, search);
    if (search) out[0] += delta_;
    return out;
  }

 private:
  Element delta_;
};

struct PepResult {
  Decision decision = Decision::reject;
  std::optional<Element> output;  // g(0) in search mode
  SessionMetrics metrics;
  View view;
};

// Decision mode checks f^x(beta) = alpha; search mode outputs g(0).
inline PepResult pep_run(const StreamPolyMap& f, const PepInput& in, const Element& alpha, PepProver& prover,
                         std::uint64_t seed, bool search = false, const RunOptions& opt = {}) {
  const Field& F = f.field();
  const std::size_t m = f.dimension(), D = f.degree() * m;
  if (F.order() <= D) throw ParameterError("pep needs q > dm");
  if (in.beta.size() != m) throw UsageError("claimed point has wrong dimension");
  PepResult res;
  res.view = View(F, {{"protocol", "pep"}, {"d", f.degree()}, {"m", m}},
                  {{Origin::input, "x"}, {Origin::input, "beta"}, {Origin::prover, "g"}});
  if (!opt.record_view) res.view.disable();
  SpaceMeter meter(opt.budget_bits, opt.meter_mode);
  VerifierCoins coins(derive_seed(seed, role::verifier), &res.view);
  const unsigned b = F.bits();

  Retained<EvalPoint> rho(meter, m * b);
  rho.set(coins.point("rho", F, m));
  Element fx;
  {
    Retained<int> acc(meter, f.accumulators() * b), pos(meter, index_bits(in.x.size() + 1));
    acc.set(0);
    pos.set(0);
    res.view.record_symbols(Origin::input, "x", in.x);
    auto ev = f.evaluator(rho.get());
    Tape<Symbol> tape(in.x);
    while (!tape.done()) ev->consume(tape.next());
    fx = ev->value();
  }
  Retained<Element> fx_slot(meter, b);
  fx_slot.set(fx);
  Retained<EvalPoint> beta(meter, m * b);
  beta.set(in.beta);
  res.view.record_point(Origin::input, "beta", in.beta);
  Retained<Element> phi(meter, b);
  const Element zero = F.zero();
  phi.set(coins.element("phi", F, std::span<const Element>(&zero, 1)));
  const Line line = line_through(beta.get(), rho.get(), phi.get());
  beta.reset();
  rho.reset();
  res.metrics.interactive_bits += 2 * m * b;

  const auto g = prover.respond(f, in, line, search);
  res.view.record_elements(Origin::prover, "g", g);
  res.metrics.interactive_bits += g.size() * b;
  const std::size_t expect = search ? D + 1 : D;
  bool ok = g.size() == expect;
  if (ok) {
    Retained<Element> acc(meter, b);
    const InterpolationDomain dom(F, D + 1, DomainKind::zero_based);
    Element gphi = F.zero();
    acc.set(gphi);
    for (std::size_t j = 0; j <= D; ++j) {
      const Element val = search ? g[j] : (j == 0 ? alpha : g[j - 1]);
      gphi += val * dom.basis(j, phi.get());
    }
    ok = gphi == fx_slot.get();
    if (search && ok) res.output = g[0];
  }
  res.decision = ok ? Decision::accept : Decision::reject;
  res.metrics.decision = res.decision;
  res.metrics.peak_bits = meter.peak();
  res.metrics.rounds = 1;
  res.metrics.space_violation = meter.violated();
  return res;
}

// ---------------------------------------------------------------------------
// Zero-knowledge polynomial evaluation proof.

// Everything public about one zk-pep instance, with derived domains.
class ZkPepSetup {
 public:
  ZkPepSetup(const ProtocolParams& params, const StreamPolyMap& f, Element alpha, std::size_t n)
      : params_(params), f_(&f), alpha_(alpha), n_(n) {
    if (params.kind != ProtocolKind::zk_pep) throw ParameterError("parameters are not for zk-pep");
    if (&f.field() != params.field || f.degree() != params.d || f.dimension() != params.m)
      throw ParameterError("polynomial map does not match the parameters");
    cspec_ = params.commitment_spec();
    row_domain_ = InterpolationDomain(*params.field, params.d * params.m + 1, DomainKind::zero_based);
    opening_domain_ = InterpolationDomain(*params.field, params.opening_degree() + 1, DomainKind::zero_based);
    phi_excluded_ = row_domain_.nodes();
  }

  const ProtocolParams& params() const { return params_; }
  const StreamPolyMap& f() const { return *f_; }
  const Field& field() const { return *params_.field; }
  const Element& alpha() const { return alpha_; }
  std::size_t n() const { return n_; }
  std::size_t m() const { return params_.m; }
  std::size_t v() const { return params_.v; }
  std::size_t p() const { return params_.p; }
  std::size_t rows() const { return params_.d * params_.m; }
  std::size_t D() const { return params_.opening_degree(); }
  unsigned b() const { return params_.b(); }
  const LdeSpec& cspec() const { return cspec_; }
  // chi over {0} and [dm]; row i of the commitment carries label i + 1.
  const InterpolationDomain& row_domain() const { return row_domain_; }
  const InterpolationDomain& opening_domain() const { return opening_domain_; }
  // phi ranges over F minus {0} and [dm].
  const std::vector<Element>& phi_excluded() const { return phi_excluded_; }
  bool phi_admissible(const Element& phi) const { return !row_domain_.position_of(phi).has_value(); }

 private:
  ProtocolParams params_;
  const StreamPolyMap* f_;
  Element alpha_;
  std::size_t n_;
  LdeSpec cspec_;
  InterpolationDomain row_domain_, opening_domain_;
  std::vector<Element> phi_excluded_;
};

class WhiteboxOracle;

// Verifier strategy. The session driver calls the hooks in protocol order.
class ZkPepVerifier {
 public:
  virtual ~ZkPepVerifier() = default;
  virtual std::string name() const = 0;
  virtual std::unique_ptr<ZkPepVerifier> clone_fresh() const = 0;

  virtual void begin(const ZkPepSetup& s, VerifierCoins& coins, SpaceMeter& meter) = 0;
  virtual void read_temporal(Tape<EvalPoint>& z) = 0;
  virtual bool continues() const { return true; }
  virtual Snapshot snapshot() const = 0;
  virtual void read_input(Tape<Symbol>& x, const EvalPoint& beta) = 0;
  // Symbol-at-a-time forms of the two passes, for sessions that share a
  // stream. Only strategies that support multiplexing override them.
  virtual void begin_temporal(std::size_t) { throw UsageError("strategy '" + name() + "' cannot share streams"); }
  virtual void consume_temporal(std::size_t, const EvalPoint&) {}
  virtual void end_temporal() {}
  virtual void begin_input(std::size_t) { throw UsageError("strategy '" + name() + "' cannot share streams"); }
  virtual void consume_input(Symbol) {}
  virtual void end_input(const EvalPoint&) {}
  virtual std::optional<Decision> early_decision() const { return std::nullopt; }
  virtual Line challenge_line() = 0;
  virtual void read_commitment(const AlgebraicCommitment& c) = 0;
  virtual TemporalCertificate certificate() = 0;
  virtual Line opening_line() = 0;
  virtual void read_opening(std::span<const Element> evals) = 0;
  virtual Decision decide() = 0;
  virtual std::optional<Element> opened_value() const { return std::nullopt; }

  // Bits charged by the retained slots, for the accounting audit.
  virtual std::uint64_t audited_bits() const = 0;
  // Size s of the simulator's capture set.
  virtual std::uint64_t space_bound_bits(const ZkPepSetup& s) const {
    return 4 * s.m() * s.b() + 8 * s.b() + index_bits(s.v()) + index_bits(s.p()) + 16;
  }

  // Exact probability that this strategy, restored from b and run on the
  // input, outputs the certificate. Strategies that cannot answer return
  // nullopt and are rejected by the simulator.
  virtual std::optional<double> certificate_probability(const ZkPepSetup&, const Snapshot&, const PepInput&,
                                                        const TemporalCertificate&) const {
    return std::nullopt;
  }
  virtual std::unique_ptr<WhiteboxOracle> closed_form_whitebox(const ZkPepSetup&) const { return nullptr; }
};

// W(b, c): maximum over admissible inputs of P[certificate == c | snapshot b].
class WhiteboxOracle {
 public:
  virtual ~WhiteboxOracle() = default;
  virtual double operator()(const Snapshot& b, const TemporalCertificate& c) const = 0;
};

class EnumeratingWhitebox : public WhiteboxOracle {
 public:
  EnumeratingWhitebox(const ZkPepSetup& s, const ZkPepVerifier& v, std::vector<PepInput> admissible)
      : s_(&s), v_(&v), inputs_(std::move(admissible)) {
    if (inputs_.empty()) throw UsageError("empty admissible input set");
  }
  double operator()(const Snapshot& b, const TemporalCertificate& c) const override {
    double best = 0;
    for (const auto& in : inputs_) {
      const auto pr = v_->certificate_probability(*s_, b, in, c);
      if (!pr) throw UnsupportedVerifier("verifier '" + v_->name() + "' has no whitebox support");
      best = std::max(best, *pr);
    }
    return best;
  }

 private:
  const ZkPepSetup* s_;
  const ZkPepVerifier* v_;
  std::vector<PepInput> inputs_;
};

// Snapshot layout shared by the strategies below: [found:1][rho:m*b][ell:log v if found].
struct TemporalSnapshot {
  bool found = false;
  EvalPoint rho;
  std::size_t ell = 0;

  static Snapshot encode(std::size_t v, const std::optional<EvalPoint>& rho, const std::optional<std::size_t>& ell) {
    Snapshot b;
    b.push(ell ? 1 : 0, 1);
    if (rho) b.push_point(*rho);
    if (ell) b.push(*ell, index_bits(v));
    return b;
  }
  static TemporalSnapshot decode(const Field& f, std::size_t m, std::size_t v, const Snapshot& b) {
    TemporalSnapshot t;
    std::size_t pos = 0;
    t.found = b.read(pos, 1) == 1;
    t.rho = b.read_point(pos, f, m);
    if (t.found) t.ell = static_cast<std::size_t>(b.read(pos, index_bits(v)));
    return t;
  }
  static TemporalSnapshot decode(const ZkPepSetup& s, const Snapshot& b) { return decode(s.field(), s.m(), s.v(), b); }
};

// The honest verifier. Subclasses change what line and certificate it sends.
class HonestZkPepVerifier : public ZkPepVerifier {
 public:
  std::string name() const override { return "honest"; }
  std::unique_ptr<ZkPepVerifier> clone_fresh() const override { return std::make_unique<HonestZkPepVerifier>(); }

  void begin(const ZkPepSetup& s, VerifierCoins& coins, SpaceMeter& meter) override {
    s_ = &s;
    coins_ = &coins;
    meter_ = &meter;
    const unsigned b = s.b();
    const std::size_t m = s.m();
    rho_.bind(meter, m * b);
    ell_.bind(meter, index_bits(s.v()));
    fx_.bind(meter, b);
    beta_.bind(meter, m * b);
    phi_.bind(meter, b);
    sigma_.bind(meter, s.params().mc * b);
    fp_.bind(meter, b);
    corr_.bind(meter, b);
    k_.bind(meter, index_bits(s.p()));
    tau_.bind(meter, b);
    g0_.bind(meter, b);
    gtau_.bind(meter, b);
    verdict_.bind(meter, 1);
    draw_rho();
  }

  void read_temporal(Tape<EvalPoint>& z) override {
    begin_temporal(z.length());
    while (!z.done()) {
      const std::size_t i = z.position();
      consume_temporal(i, z.next());
    }
    end_temporal();
  }

  void begin_temporal(std::size_t length) override {
    tpos_.bind(*meter_, index_bits(length + 1));
    tpos_.set(0);
  }
  void consume_temporal(std::size_t i, const EvalPoint& e) override {
    if (!ell_.has() && e == rho_.get()) ell_.set(i);
  }
  void end_temporal() override {
    tpos_.reset();
    if (!ell_.has()) verdict_.set(false);
  }

  bool continues() const override { return !verdict_.has(); }

  Snapshot snapshot() const override {
    return TemporalSnapshot::encode(s_->v(), rho_.has() ? std::optional(rho_.get()) : std::nullopt,
                                    ell_.has() ? std::optional(ell_.get()) : std::nullopt);
  }

  void read_input(Tape<Symbol>& x, const EvalPoint& beta) override {
    begin_input(x.length());
    while (!x.done()) consume_input(x.next());
    end_input(beta);
  }

  void begin_input(std::size_t length) override {
    iacc_.bind(*meter_, s_->f().accumulators() * s_->b());
    ipos_.bind(*meter_, index_bits(length + 1));
    iacc_.set(0);
    ipos_.set(0);
    eval_ = s_->f().evaluator(rho_.get());
  }
  void consume_input(Symbol sym) override { eval_->consume(sym); }
  void end_input(const EvalPoint& beta) override {
    fx_.set(eval_->value());
    eval_.reset();
    iacc_.reset();
    ipos_.reset();
    beta_.set(beta);
    if (beta == rho_.get()) verdict_.set(fx_.get() == s_->alpha());
  }

  std::optional<Decision> early_decision() const override {
    if (!verdict_.has()) return std::nullopt;
    return verdict_.get() ? Decision::accept : Decision::reject;
  }

  Line challenge_line() override {
    phi_.set(coins_->element("phi", s_->field(), s_->phi_excluded()));
    const Line l = line_through(beta_.get(), line_target(), phi_.get());
    beta_.reset();
    return l;
  }

  void read_commitment(const AlgebraicCommitment& c) override {
    sigma_.set(coins_->point("sigma", s_->field(), s_->params().mc));
    if (c.rows != s_->rows() || c.cols != s_->p() || c.corrections.size() != c.rows || c.k >= s_->p()) {
      verdict_.set(false);
      return;
    }
    const Field& F = s_->field();
    const auto& rows = s_->row_domain();
    fp_.set(F.zero());
    {
      Retained<std::size_t> pos(*meter_, index_bits(c.cols + 1));
      pos.set(0);
      CombinedFingerprint fp(s_->cspec(), sigma_.get(), [&](std::size_t r) { return rows.basis(r + 1, phi_.get()); });
      for (std::size_t col = 0; col < c.cols; ++col) {
        fp.column_begin(col);
        for (std::size_t r = 0; r < c.rows; ++r) fp.ingest(r, c.at(r, col));
      }
      fp_.set(fp.value());
    }
    corr_.set(F.zero());
    for (std::size_t r = 0; r < c.rows; ++r) corr_.set(corr_.get() + rows.basis(r + 1, phi_.get()) * c.corrections[r]);
    k_.set(c.k);
  }

  TemporalCertificate certificate() override {
    TemporalCertificate cert = make_certificate();
    rho_.reset();
    ell_.reset();
    return cert;
  }

  Line opening_line() override {
    const Element zero = s_->field().zero();
    tau_.set(coins_->element("tau", s_->field(), std::span<const Element>(&zero, 1)));
    const std::size_t k = k_.has() ? k_.get() : 0;
    const Line l = line_through(s_->cspec().point_of(k), sigma_.get(), tau_.get());
    sigma_.reset();
    k_.reset();
    return l;
  }

  void read_opening(std::span<const Element> evals) override {
    if (evals.size() != s_->D() + 1) {
      if (!verdict_.has()) verdict_.set(false);
      return;
    }
    g0_.set(evals[0]);
    Retained<std::size_t> pos(*meter_, index_bits(evals.size() + 1));
    pos.set(0);
    gtau_.set(lagrange_combine(s_->opening_domain(), evals, tau_.get()));
  }

  Decision decide() override {
    if (verdict_.has()) return verdict_.get() ? Decision::accept : Decision::reject;
    if (!g0_.has() || !fp_.has()) return Decision::reject;
    const Element target = fx_.get() - s_->row_domain().basis(0, phi_.get()) * s_->alpha();
    const bool ok = gtau_.get() == fp_.get() && g0_.get() + corr_.get() == target;
    return ok ? Decision::accept : Decision::reject;
  }

  std::optional<Element> opened_value() const override {
    if (!g0_.has() || !corr_.has()) return std::nullopt;
    return g0_.get() + corr_.get();
  }

  std::uint64_t audited_bits() const override {
    return rho_.charged_bits() + ell_.charged_bits() + fx_.charged_bits() + beta_.charged_bits() +
           phi_.charged_bits() + sigma_.charged_bits() + fp_.charged_bits() + corr_.charged_bits() +
           k_.charged_bits() + tau_.charged_bits() + g0_.charged_bits() + gtau_.charged_bits() +
           verdict_.charged_bits() + tpos_.charged_bits() + iacc_.charged_bits() + ipos_.charged_bits() +
           extra_bits();
  }

  std::optional<double> certificate_probability(const ZkPepSetup& s, const Snapshot& b, const PepInput&,
                                                const TemporalCertificate& c) const override {
    const auto t = TemporalSnapshot::decode(s, b);
    return t.found && c.index == t.ell && c.rho == t.rho ? 1.0 : 0.0;
  }

  std::unique_ptr<WhiteboxOracle> closed_form_whitebox(const ZkPepSetup& s) const override;

 protected:
  virtual void draw_rho() { rho_.set(coins_->point("rho", s_->field(), s_->m())); }
  virtual EvalPoint line_target() const { return rho_.get(); }
  virtual TemporalCertificate make_certificate() const { return {rho_.get(), ell_.has() ? ell_.get() : 0}; }
  virtual std::uint64_t extra_bits() const { return 0; }

  const ZkPepSetup* s_ = nullptr;
  VerifierCoins* coins_ = nullptr;
  SpaceMeter* meter_ = nullptr;
  Retained<EvalPoint> rho_, beta_, sigma_;
  Retained<std::size_t> ell_, k_;
  Retained<Element> fx_, phi_, fp_, corr_, tau_, g0_, gtau_;
  Retained<bool> verdict_;
  Retained<int> tpos_, iacc_, ipos_;
  std::unique_ptr<StreamEvaluator> eval_;
};

// Honest verifier: W(b, c) = 1 exactly when c is the stored (rho, ell).
class HonestWhitebox : public WhiteboxOracle {
 public:
  explicit HonestWhitebox(const ZkPepSetup& s) : s_(&s) {}
  double operator()(const Snapshot& b, const TemporalCertificate& c) const override {
    const auto t = TemporalSnapshot::decode(*s_, b);
    return t.found && c.index == t.ell && c.rho == t.rho ? 1.0 : 0.0;
  }

 private:
  const ZkPepSetup* s_;
};

inline std::unique_ptr<WhiteboxOracle> HonestZkPepVerifier::closed_form_whitebox(const ZkPepSetup& s) const {
  return std::make_unique<HonestWhitebox>(s);
}

// Grid index of a point, if it is a grid point of the f domain.
inline std::optional<std::size_t> grid_index_of(const LdeSpec& spec, const EvalPoint& p) {
  std::size_t idx = 0, scale = 1;
  for (std::size_t j = 0; j < spec.m(); ++j) {
    const auto pos = spec.domain().position_of(p[j]);
    if (!pos) return std::nullopt;
    idx += *pos * scale;
    scale *= spec.d() + 1;
  }
  return idx;
}

// Runs the temporal setup honestly, then aims its line and certificate at the
// grid point after the claimed one (index j+1 when asked about j), hoping to
// learn a second entry of x.
class NextIndexVerifier : public HonestZkPepVerifier {
 public:
  std::string name() const override { return "next-index"; }
  std::unique_ptr<ZkPepVerifier> clone_fresh() const override { return std::make_unique<NextIndexVerifier>(); }

  static EvalPoint target_for(const ZkPepSetup& s, const EvalPoint& beta) {
    const LdeSpec spec = s.params().f_spec();
    const auto j = grid_index_of(spec, beta);
    if (!j) throw UsageError("next-index verifier needs a grid point claim");
    const std::size_t next = *j + 1 < spec.grid_size() ? *j + 1 : *j - 1;
    return spec.point_of(next);
  }

  void end_input(const EvalPoint& beta) override {
    HonestZkPepVerifier::end_input(beta);
    target_.bind(*meter_, s_->m() * s_->b());
    target_.set(target_for(*s_, beta));
  }
  // Keeps going without a match and then certifies index 0.
  bool continues() const override { return true; }
  std::optional<Decision> early_decision() const override { return std::nullopt; }
  Decision decide() override { return Decision::reject; }

  std::optional<double> certificate_probability(const ZkPepSetup& s, const Snapshot& b, const PepInput& in,
                                                const TemporalCertificate& c) const override {
    const auto t = TemporalSnapshot::decode(s, b);
    const TemporalCertificate out{target_for(s, in.beta), t.found ? t.ell : 0};
    return c == out ? 1.0 : 0.0;
  }
  std::unique_ptr<WhiteboxOracle> closed_form_whitebox(const ZkPepSetup&) const override { return nullptr; }

 protected:
  EvalPoint line_target() const override { return target_.get(); }
  TemporalCertificate make_certificate() const override {
    TemporalCertificate c{target_.get(), ell_.has() ? ell_.get() : 0};
    return c;
  }
  std::uint64_t extra_bits() const override { return target_.charged_bits(); }

  Retained<EvalPoint> target_;
};

// Keeps nothing from the temporal phase and certifies a fresh uniform pair.
class ObliviousVerifier : public HonestZkPepVerifier {
 public:
  std::string name() const override { return "oblivious"; }
  std::unique_ptr<ZkPepVerifier> clone_fresh() const override { return std::make_unique<ObliviousVerifier>(); }

  void read_temporal(Tape<EvalPoint>&) override {}
  Snapshot snapshot() const override { return {}; }
  void read_input(Tape<Symbol>& x, const EvalPoint& beta) override {
    while (!x.done()) x.next();
    beta_.set(beta);
    rho_.set(coins_->point("rho", s_->field(), s_->m()));
    ell_.set(coins_->index("ell", s_->v()));
  }
  std::optional<Decision> early_decision() const override { return std::nullopt; }

  std::optional<double> certificate_probability(const ZkPepSetup& s, const Snapshot&, const PepInput&,
                                                const TemporalCertificate& c) const override {
    if (c.index >= s.v()) return 0.0;
    return 1.0 / (s.params().temporal_space() * static_cast<double>(s.v()));
  }
  std::unique_ptr<WhiteboxOracle> closed_form_whitebox(const ZkPepSetup&) const override { return nullptr; }

 protected:
  void draw_rho() override {}
};

// Honest behaviour but no whitebox description; the simulator refuses it.
class OpaqueVerifier : public HonestZkPepVerifier {
 public:
  std::string name() const override { return "opaque"; }
  std::unique_ptr<ZkPepVerifier> clone_fresh() const override { return std::make_unique<OpaqueVerifier>(); }
  std::optional<double> certificate_probability(const ZkPepSetup&, const Snapshot&, const PepInput&,
                                                const TemporalCertificate&) const override {
    return std::nullopt;
  }
  std::unique_ptr<WhiteboxOracle> closed_form_whitebox(const ZkPepSetup&) const override { return nullptr; }
};

// Prover strategy.
class ZkPepProver {
 public:
  virtual ~ZkPepProver() = default;
  virtual std::string name() const = 0;
  virtual void begin(const ZkPepSetup& s, const PepInput& in, std::uint64_t seed) = 0;
  virtual const TemporalString& temporal_string() const = 0;
  // Replace the prover's own temporal string with one shared across sessions.
  virtual void use_temporal(const TemporalString& z) = 0;
  virtual AlgebraicCommitment commit(const Line& line) = 0;
  // False aborts the session.
  virtual bool check_certificate(const TemporalCertificate& c) = 0;
  virtual std::vector<Element> open(const Line& opening_line) = 0;
};

class HonestZkPepProver : public ZkPepProver {
 public:
  std::string name() const override { return "honest"; }

  void begin(const ZkPepSetup& s, const PepInput& in, std::uint64_t seed) override {
    s_ = &s;
    in_ = &in;
    rng_.emplace(derive_seed(seed, 1));
    z_ = TemporalString(s.field(), s.m(), s.v(), derive_seed(seed, 2));
  }

  const TemporalString& temporal_string() const override { return z_; }
  void use_temporal(const TemporalString& z) override { z_ = z; }

  AlgebraicCommitment commit(const Line& line) override {
    line_ = line;
    auto vals = committed_values(line);
    commitment_ = algebraic_commit(vals, s_->cspec(), *rng_);
    return commitment_;
  }

  bool check_certificate(const TemporalCertificate& c) override {
    if (!z_.matches(c.index, c.rho)) return false;
    const auto t = line_.parameter_of(c.rho);
    if (!t || !s_->phi_admissible(*t)) return false;
    phi_ = *t;
    rho_ = c.rho;
    return true;
  }

  std::vector<Element> open(const Line& opening_line) override {
    return honest_opening(s_->cspec(), combined_row(), opening_line);
  }

 protected:
  virtual std::vector<Element> committed_values(const Line& line) {
    std::vector<Element> vals;
    for (std::size_t i = 1; i <= s_->rows(); ++i) vals.push_back(s_->f().evaluate(in_->x, line.at(s_->field().embed_index(i))));
    return vals;
  }

  std::vector<Element> row_coefficients() const {
    std::vector<Element> beta;
    for (std::size_t r = 0; r < s_->rows(); ++r) beta.push_back(s_->row_domain().basis(r + 1, phi_));
    return beta;
  }
  std::vector<Element> combined_row() const { return combine_rows(commitment_, row_coefficients()); }

  const ZkPepSetup* s_ = nullptr;
  const PepInput* in_ = nullptr;
  std::optional<Rng> rng_;
  TemporalString z_;
  Line line_;
  AlgebraicCommitment commitment_;
  Element phi_;
  EvalPoint rho_;
};

// Commits honestly, then opens to whatever value makes the correction check
// pass; the opening is the honest one shifted at 0.
class ForgedOpeningProver : public HonestZkPepProver {
 public:
  std::string name() const override { return "forged-opening"; }
  std::vector<Element> open(const Line& opening_line) override {
    auto evals = HonestZkPepProver::open(opening_line);
    const auto beta = row_coefficients();
    const Element target = s_->f().evaluate(in_->x, rho_) - s_->row_domain().basis(0, phi_) * s_->alpha();
    const Element delta = target - (evals[0] + dot(beta, commitment_.corrections));
    return shifted_opening(std::move(evals), delta);
  }
};

// Commits to h_i = f|L(i) - P(i) with P(0) = f^x(beta) - alpha and all roots of
// P placed in F minus {0} and [dm]; accepted exactly when phi is a root.
class ShiftedCommitmentProver : public HonestZkPepProver {
 public:
  std::string name() const override { return "shifted-commitment"; }

 protected:
  std::vector<Element> committed_values(const Line& line) override {
    auto vals = HonestZkPepProver::committed_values(line);
    const Field& F = s_->field();
    const Element gap = s_->f().evaluate(in_->x, in_->beta) - s_->alpha();
    if (gap.is_zero()) return vals;
    std::vector<Element> roots, excluded = s_->phi_excluded();
    for (std::size_t i = 0; i < s_->rows(); ++i) {
      roots.push_back(F.sample_excluding(*rng_, excluded));
      excluded.push_back(roots.back());
    }
    UnivariatePoly P = vanishing_poly(F, roots);
    P = P.scaled(gap / P(F.zero()));
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] -= P(F.embed_index(i + 1));
    return vals;
  }
};

struct ZkPepOutcome {
  Decision decision = Decision::reject;
  Termination termination = Termination::completed;
  View view;
  SessionMetrics metrics;
  std::optional<Element> opened;
  std::vector<std::size_t> capture;  // simulator only: indices of C
};

inline View zk_pep_view(const ZkPepSetup& s, const RunOptions& opt) {
  View v(s.field(), s.params().to_json(),
         {{Origin::prover, "z"},
          {Origin::input, "x"},
          {Origin::input, "beta"},
          {Origin::prover, "y"},
          {Origin::prover, "gamma"},
          {Origin::prover, "k"},
          {Origin::prover, "opening"}});
  if (!opt.record_view) v.disable();
  return v;
}

namespace detail {

inline void audit(const RunOptions& opt, const SpaceMeter& meter, const ZkPepVerifier& v, const char* step) {
  if (opt.audit && meter.current() != v.audited_bits())
    throw AccountingError(std::string("uncharged verifier state after ") + step);
}

inline void record_commitment(View& view, const AlgebraicCommitment& c) {
  if (!view.enabled()) return;
  std::vector<Element> cols;
  for (std::size_t col = 0; col < c.cols; ++col)
    for (std::size_t r = 0; r < c.rows; ++r) cols.push_back(c.at(r, col));
  view.record_elements(Origin::prover, "y", cols);
  view.record_elements(Origin::prover, "gamma", c.corrections);
  view.record_index(Origin::prover, "k", c.k);
}

inline std::uint64_t commitment_bits(const ZkPepSetup& s, const AlgebraicCommitment& c) {
  return (c.rows * c.cols + c.corrections.size()) * s.b() + index_bits(s.p());
}

inline void finish(ZkPepOutcome& out, const SpaceMeter& meter, Termination t, Decision d, std::size_t rounds) {
  out.termination = t;
  out.decision = d;
  if (t != Termination::completed) out.view.terminate(termination_name(t));
  out.metrics.decision = d;
  out.metrics.peak_bits = meter.peak();
  out.metrics.rounds = rounds;
  out.metrics.space_violation = meter.violated();
}

}  // namespace detail

// Real interaction between a prover and a fresh copy of the verifier strategy.
inline ZkPepOutcome run_zk_pep(const ZkPepSetup& s, ZkPepProver& prover, const ZkPepVerifier& strategy,
                               const PepInput& in, std::uint64_t seed, const RunOptions& opt = {}) {
  ZkPepOutcome out;
  out.view = zk_pep_view(s, opt);
  SpaceMeter meter(opt.budget_bits, opt.meter_mode);
  VerifierCoins coins(derive_seed(seed, role::verifier), &out.view);
  auto V = strategy.clone_fresh();
  const unsigned b = s.b();
  const std::size_t m = s.m();

  prover.begin(s, in, derive_seed(seed, role::prover));
  V->begin(s, coins, meter);
  detail::audit(opt, meter, *V, "begin");
  const TemporalString& z = prover.temporal_string();
  if (out.view.enabled()) out.view.record(Origin::prover, "z", z.symbols(), s.field().bytes());
  auto ztape = z.tape();
  V->read_temporal(ztape);
  out.metrics.setup_bits = s.v() * m * b;
  detail::audit(opt, meter, *V, "temporal");
  if (!V->continues()) {
    detail::finish(out, meter, Termination::rejected_at_setup, Decision::reject, 1);
    return out;
  }

  out.view.record_symbols(Origin::input, "x", in.x);
  out.view.record_point(Origin::input, "beta", in.beta);
  Tape<Symbol> xtape(in.x);
  V->read_input(xtape, in.beta);
  detail::audit(opt, meter, *V, "input");
  if (auto e = V->early_decision()) {
    detail::finish(out, meter, Termination::early_decision, *e, 1);
    return out;
  }

  const Line L = V->challenge_line();
  out.metrics.interactive_bits += 2 * m * b;
  const AlgebraicCommitment c = prover.commit(L);
  detail::record_commitment(out.view, c);
  out.metrics.interactive_bits += detail::commitment_bits(s, c);
  V->read_commitment(c);
  detail::audit(opt, meter, *V, "commitment");

  const TemporalCertificate cert = V->certificate();
  out.metrics.interactive_bits += m * b + index_bits(s.v());
  detail::audit(opt, meter, *V, "certificate");
  if (!prover.check_certificate(cert)) {
    detail::finish(out, meter, Termination::prover_abort, Decision::reject, 3);
    return out;
  }

  const Line L2 = V->opening_line();
  out.metrics.interactive_bits += 2 * s.params().mc * b;
  const auto evals = prover.open(L2);
  out.view.record_elements(Origin::prover, "opening", evals);
  out.metrics.interactive_bits += evals.size() * b;
  V->read_opening(evals);
  detail::audit(opt, meter, *V, "opening");
  const Decision d = V->decide();
  out.opened = V->opened_value();
  detail::finish(out, meter, Termination::completed, d, 4);
  return out;
}

// Several zk-pep sessions over one input stream, as used by the composite
// applications. The verifiers share a meter and see x in a single pass; with
// shared_temporal they also share one z, taken from the first leg's prover.
struct BundleLeg {
  const ZkPepSetup* setup;
  ZkPepProver* prover;
  const ZkPepVerifier* strategy;
  EvalPoint beta;
};

struct BundleOutcome {
  std::vector<ZkPepOutcome> legs;
  SessionMetrics metrics;
  bool all_accept() const {
    for (const auto& l : legs)
      if (l.decision != Decision::accept) return false;
    return !legs.empty();
  }
};

inline BundleOutcome run_zk_pep_bundle(const std::vector<BundleLeg>& legs, std::span<const Symbol> x,
                                       std::uint64_t seed, bool shared_temporal, const RunOptions& opt = {}) {
  if (legs.empty()) throw UsageError("bundle needs at least one leg");
  BundleOutcome out;
  SpaceMeter meter(opt.budget_bits, opt.meter_mode);
  const std::size_t L = legs.size();
  std::vector<PepInput> inputs;
  std::vector<std::unique_ptr<ZkPepVerifier>> V;
  std::vector<VerifierCoins> coins;
  std::vector<bool> live(L, true);
  out.legs.resize(L);
  inputs.reserve(L);
  coins.reserve(L);
  for (std::size_t i = 0; i < L; ++i) {
    if (shared_temporal && &legs[i].setup->field() != &legs[0].setup->field())
      throw UsageError("shared temporal string needs a common field");
    inputs.push_back({std::vector<Symbol>(x.begin(), x.end()), legs[i].beta});
    coins.emplace_back(derive_seed(derive_seed(seed, role::verifier), i), nullptr);
    V.push_back(legs[i].strategy->clone_fresh());
    out.legs[i].view.disable();
  }
  for (std::size_t i = 0; i < L; ++i) {
    legs[i].prover->begin(*legs[i].setup, inputs[i], derive_seed(derive_seed(seed, role::prover), i));
    V[i]->begin(*legs[i].setup, coins[i], meter);
  }
  auto finish_leg = [&](std::size_t i, Termination t, Decision d, std::size_t rounds) {
    detail::finish(out.legs[i], meter, t, d, rounds);
    live[i] = false;
  };

  if (shared_temporal) {
    const TemporalString& z = legs[0].prover->temporal_string();
    for (std::size_t i = 1; i < L; ++i) legs[i].prover->use_temporal(z);
    for (auto& v : V) v->begin_temporal(z.size());
    auto t = z.tape();
    while (!t.done()) {
      const std::size_t pos = t.position();
      const EvalPoint e = t.next();
      for (auto& v : V) v->consume_temporal(pos, e);
    }
    for (auto& v : V) v->end_temporal();
    out.metrics.setup_bits = legs[0].setup->v() * legs[0].setup->m() * legs[0].setup->b();
  } else {
    for (std::size_t i = 0; i < L; ++i) {
      auto t = legs[i].prover->temporal_string().tape();
      V[i]->read_temporal(t);
      out.metrics.setup_bits += legs[i].setup->v() * legs[i].setup->m() * legs[i].setup->b();
    }
  }
  for (std::size_t i = 0; i < L; ++i)
    if (!V[i]->continues()) finish_leg(i, Termination::rejected_at_setup, Decision::reject, 1);

  for (std::size_t i = 0; i < L; ++i)
    if (live[i]) V[i]->begin_input(x.size());
  for (const Symbol sym : x)
    for (std::size_t i = 0; i < L; ++i)
      if (live[i]) V[i]->consume_input(sym);
  for (std::size_t i = 0; i < L; ++i) {
    if (!live[i]) continue;
    V[i]->end_input(legs[i].beta);
    if (auto e = V[i]->early_decision()) finish_leg(i, Termination::early_decision, *e, 1);
  }

  std::size_t rounds = 1;
  for (std::size_t i = 0; i < L; ++i) {
    if (!live[i]) continue;
    const ZkPepSetup& s = *legs[i].setup;
    ZkPepProver& P = *legs[i].prover;
    auto& met = out.metrics;
    const Line line = V[i]->challenge_line();
    const AlgebraicCommitment c = P.commit(line);
    met.interactive_bits += 2 * s.m() * s.b() + detail::commitment_bits(s, c);
    V[i]->read_commitment(c);
    const TemporalCertificate cert = V[i]->certificate();
    met.interactive_bits += s.m() * s.b() + index_bits(s.v());
    if (!P.check_certificate(cert)) {
      finish_leg(i, Termination::prover_abort, Decision::reject, 3);
      rounds = std::max<std::size_t>(rounds, 3);
      continue;
    }
    const Line L2 = V[i]->opening_line();
    const auto evals = P.open(L2);
    met.interactive_bits += 2 * s.params().mc * s.b() + evals.size() * s.b();
    V[i]->read_opening(evals);
    const Decision d = V[i]->decide();
    out.legs[i].opened = V[i]->opened_value();
    finish_leg(i, Termination::completed, d, 4);
    rounds = 4;
  }
  out.metrics.decision = out.all_accept() ? Decision::accept : Decision::reject;
  out.metrics.peak_bits = meter.peak();
  out.metrics.rounds = rounds;
  out.metrics.space_violation = meter.violated();
  return out;
}

// The simulator: produces the verifier's view from the claim alone, using the
// whitebox oracle to decide which temporal entries the verifier can certify.
inline ZkPepOutcome simulate_zk_pep(const ZkPepSetup& s, const ZkPepVerifier& strategy, const PepInput& in,
                                    const WhiteboxOracle& W, std::uint64_t seed, const RunOptions& opt = {}) {
  ZkPepOutcome out;
  out.view = zk_pep_view(s, opt);
  SpaceMeter meter(opt.budget_bits, opt.meter_mode);
  VerifierCoins coins(derive_seed(seed, role::verifier), &out.view);
  auto V = strategy.clone_fresh();
  const Field& F = s.field();
  const unsigned b = s.b();
  const std::size_t m = s.m();
  const std::uint64_t sim_seed = derive_seed(seed, role::simulator);
  Rng rng(derive_seed(sim_seed, 1));

  V->begin(s, coins, meter);
  const TemporalString z(F, m, s.v(), derive_seed(sim_seed, 2));
  if (out.view.enabled()) out.view.record(Origin::prover, "z", z.symbols(), F.bytes());
  auto ztape = z.tape();
  V->read_temporal(ztape);
  out.metrics.setup_bits = s.v() * m * b;
  if (!V->continues()) {
    detail::finish(out, meter, Termination::rejected_at_setup, Decision::reject, 1);
    return out;
  }

  // Capture set from the snapshot taken right after z.
  const Snapshot snap = V->snapshot();
  std::vector<double> weight(s.v());
  for (std::size_t i = 0; i < s.v(); ++i) weight[i] = W(snap, {z.at(i), i});
  out.capture = top_t_capture(weight, static_cast<std::size_t>(V->space_bound_bits(s)));
  std::vector<std::pair<EvalPoint, Element>> captured;
  for (auto i : out.capture) captured.emplace_back(z.at(i), s.f().evaluate(in.x, z.at(i)));

  out.view.record_symbols(Origin::input, "x", in.x);
  out.view.record_point(Origin::input, "beta", in.beta);
  Tape<Symbol> xtape(in.x);
  V->read_input(xtape, in.beta);
  if (auto e = V->early_decision()) {
    detail::finish(out, meter, Termination::early_decision, *e, 1);
    return out;
  }

  const Line L = V->challenge_line();
  out.metrics.interactive_bits += 2 * m * b;
  if (L.base != in.beta) {
    detail::finish(out, meter, Termination::sim_abort_line, Decision::reject, 2);
    return out;
  }
  std::vector<std::pair<Element, Element>> cons{{F.zero(), s.alpha()}};
  for (const auto& [pt, val] : captured)
    if (auto t = L.parameter_of(pt)) cons.emplace_back(*t, val);
  const UnivariatePoly g = sample_constrained_univariate(F, s.rows(), cons, rng);
  std::vector<Element> gvals;
  for (std::size_t i = 1; i <= s.rows(); ++i) gvals.push_back(g(F.embed_index(i)));
  const AlgebraicCommitment c = algebraic_commit(gvals, s.cspec(), rng);
  detail::record_commitment(out.view, c);
  out.metrics.interactive_bits += detail::commitment_bits(s, c);
  V->read_commitment(c);

  const TemporalCertificate cert = V->certificate();
  out.metrics.interactive_bits += m * b + index_bits(s.v());
  const auto t = L.parameter_of(cert.rho);
  if (!z.matches(cert.index, cert.rho) || !t || !s.phi_admissible(*t)) {
    detail::finish(out, meter, Termination::sim_abort_temporal, Decision::reject, 3);
    return out;
  }
  if (!std::binary_search(out.capture.begin(), out.capture.end(), cert.index)) {
    detail::finish(out, meter, Termination::sim_abort_capture, Decision::reject, 3);
    return out;
  }
  const Element phi = *t;

  const Line L2 = V->opening_line();
  out.metrics.interactive_bits += 2 * s.params().mc * b;
  if (L2.base != s.cspec().point_of(c.k)) {
    detail::finish(out, meter, Termination::sim_abort_opening, Decision::reject, 4);
    return out;
  }
  std::vector<Element> beta;
  for (std::size_t r = 0; r < s.rows(); ++r) beta.push_back(s.row_domain().basis(r + 1, phi));
  const auto evals = honest_opening(s.cspec(), combine_rows(c, beta), L2);
  out.view.record_elements(Origin::prover, "opening", evals);
  out.metrics.interactive_bits += evals.size() * b;
  V->read_opening(evals);
  const Decision d = V->decide();
  out.opened = V->opened_value();
  detail::finish(out, meter, Termination::completed, d, 4);
  return out;
}

// Whitebox oracle for a strategy: its closed form if it has one, otherwise
// enumeration over the admissible inputs.
inline std::unique_ptr<WhiteboxOracle> whitebox_for(const ZkPepSetup& s, const ZkPepVerifier& v,
                                                    std::vector<PepInput> admissible) {
  if (auto w = v.closed_form_whitebox(s)) return w;
  if (admissible.empty()) throw UsageError("empty admissible input set");
  Snapshot probe;
  probe.push(0, 1);
  probe.push_point(EvalPoint(s.m(), s.field().zero()));
  if (!v.certificate_probability(s, probe, admissible.front(), {EvalPoint(s.m(), s.field().zero()), 0}))
    throw UnsupportedVerifier("verifier '" + v.name() + "' has no whitebox support");
  return std::make_unique<EnumeratingWhitebox>(s, v, std::move(admissible));
}

}  // namespace zksip
