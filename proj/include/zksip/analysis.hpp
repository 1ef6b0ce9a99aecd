#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/rational.hpp>

#include "json.hpp"
#include "zksip/parallel.hpp"
#include "zksip/pep.hpp"
#include "zksip/sumcheck.hpp"

namespace zksip {

// ---------------------------------------------------------------- reports

enum class BoundKind {
  upper,      // rate <= bound + 4 sigma
  lower,      // rate >= bound - 4 sigma
  exact,      // rate == bound
  two_sided,  // |rate - bound| <= 4 sigma
};

inline const char* bound_kind_name(BoundKind k) {
  switch (k) {
    case BoundKind::upper: return "upper";
    case BoundKind::lower: return "lower";
    case BoundKind::exact: return "exact";
    case BoundKind::two_sided: return "two-sided";
  }
  return "?";
}

struct TrialReport {
  std::string label;
  std::size_t trials = 0, accepts = 0, rejects = 0, aborts = 0;
  double rate = 0;
  double sigma = 0;          // binomial sigma at the bound
  double lo = 0, hi = 0;     // rate +- 4 sigma at the empirical rate
  double bound = 0;
  BoundKind kind = BoundKind::upper;
  bool pass = false;
  nlohmann::json extra = nlohmann::json::object();

  nlohmann::json to_json() const {
    nlohmann::json j{{"label", label},
                     {"trials", trials},
                     {"accepts", accepts},
                     {"rejects", rejects},
                     {"aborts", aborts},
                     {"accept_rate", rate},
                     {"interval_4sigma_rate", {lo, hi}},
                     {"bound_rate", bound},
                     {"bound_sigma_rate", sigma},
                     {"bound_kind", bound_kind_name(kind)},
                     {"pass", pass}};
    if (!extra.empty()) j["details"] = extra;
    return j;
  }
};

inline TrialReport make_report(std::string label, std::size_t trials, std::size_t accepts, std::size_t rejects,
                               std::size_t aborts, double bound, BoundKind kind) {
  if (trials == 0) throw UsageError("report over zero trials");
  if (accepts + rejects + aborts != trials) throw AccountingError("trial outcomes do not add up");
  TrialReport r;
  r.label = std::move(label);
  r.trials = trials;
  r.accepts = accepts;
  r.rejects = rejects;
  r.aborts = aborts;
  r.bound = bound;
  r.kind = kind;
  const double N = double(trials);
  r.rate = double(accepts) / N;
  const double b = std::clamp(bound, 0.0, 1.0);
  r.sigma = std::sqrt(b * (1 - b) / N);
  const double s = std::sqrt(r.rate * (1 - r.rate) / N);
  r.lo = std::max(0.0, r.rate - 4 * s);
  r.hi = std::min(1.0, r.rate + 4 * s);
  switch (kind) {
    case BoundKind::upper: r.pass = r.rate <= bound + 4 * r.sigma; break;
    case BoundKind::lower: r.pass = r.rate >= bound - 4 * r.sigma; break;
    case BoundKind::exact: r.pass = r.rate == bound; break;
    case BoundKind::two_sided: r.pass = std::abs(r.rate - bound) <= 4 * r.sigma; break;
  }
  return r;
}

// ---------------------------------------------------------------- soundness trials

struct ProtocolConfig {
  ProtocolKind kind = ProtocolKind::zk_pep;
  std::uint64_t q = 256;
  std::size_t d = 3, m = 2, n = 16;
  std::vector<std::uint64_t> H{1, 2};
  ParamOverrides overrides;

  const Field& field() const { return Field::with_order(q); }
  std::vector<Element> H_elements() const {
    std::vector<Element> h;
    for (auto e : H) h.push_back(field().embed_index(e));
    return h;
  }
  ProtocolParams params() const {
    const Field& F = field();
    switch (kind) {
      case ProtocolKind::pep: return ProtocolParams::pep(F, d, m, n);
      case ProtocolKind::sumcheck: return ProtocolParams::sumcheck(F, d, m, H_elements());
      case ProtocolKind::zk_pep: return ProtocolParams::zk_pep(F, d, m, n, overrides);
      case ProtocolKind::zk_sumcheck: return ProtocolParams::zk_sumcheck(F, d, m, n, H_elements(), overrides);
    }
    throw UsageError("unknown protocol");
  }
  nlohmann::json to_json() const { return params().to_json(); }
};

struct AdversaryInfo {
  std::string tag;
  ProtocolKind kind;
  std::string description;
};

inline const std::vector<AdversaryInfo>& adversary_registry() {
  static const std::vector<AdversaryInfo> reg{
      {"honest", ProtocolKind::pep, "honest prover, true claim"},
      {"wrong-claim", ProtocolKind::pep, "honest line restriction against a false claim"},
      {"honest", ProtocolKind::sumcheck, "honest prover, true claim"},
      {"wrong-claim", ProtocolKind::sumcheck, "round polynomials patched to track a false claim"},
      {"honest", ProtocolKind::zk_pep, "honest prover, true claim"},
      {"case1", ProtocolKind::zk_pep, "honest commitment and opening, false claim"},
      {"forged-opening", ProtocolKind::zk_pep, "honest commitment, opening shifted to pass the check"},
      {"shifted-commitment", ProtocolKind::zk_pep, "commits to the line restriction minus a planted polynomial"},
      {"honest", ProtocolKind::zk_sumcheck, "honest prover, true claim"},
      {"case1", ProtocolKind::zk_sumcheck, "honest round polynomials, false claim"},
      {"cheating-partial-sums", ProtocolKind::zk_sumcheck, "round polynomials patched to track a false claim"},
      {"forged-opening", ProtocolKind::zk_sumcheck, "honest commitments, alpha opening shifted"},
  };
  return reg;
}

inline const AdversaryInfo& find_adversary(ProtocolKind kind, const std::string& tag) {
  for (const auto& a : adversary_registry())
    if (a.kind == kind && a.tag == tag) return a;
  throw UsageError("unknown adversary '" + tag + "' for " + protocol_name(kind));
}

// Bound and direction each adversary is checked against.
inline std::pair<double, BoundKind> adversary_bound(const ProtocolParams& P, const std::string& tag) {
  const double q = double(P.q()), dm = double(P.d * P.m);
  const bool zk = P.kind == ProtocolKind::zk_pep || P.kind == ProtocolKind::zk_sumcheck;
  if (tag == "honest") return zk ? std::pair{1 - P.miss_probability(), BoundKind::lower} : std::pair{1.0, BoundKind::exact};
  if (tag == "case1") return {0.0, BoundKind::exact};
  switch (P.kind) {
    case ProtocolKind::pep:
    case ProtocolKind::sumcheck: return {dm / q, BoundKind::upper};
    case ProtocolKind::zk_pep: return {dm / (q - dm - 1), BoundKind::upper};
    case ProtocolKind::zk_sumcheck: return {dm / (q - double(P.d) - 1), BoundKind::upper};
  }
  return {0, BoundKind::upper};
}

enum class TrialOutcome : std::uint8_t { accept, reject, abort };

struct TrialRecord {
  TrialOutcome outcome = TrialOutcome::reject;
  Termination termination = Termination::completed;
  SessionMetrics metrics;
};

namespace detail {

inline TrialRecord classify(const SessionMetrics& m, Termination t) {
  TrialRecord r;
  r.termination = t;
  r.metrics = m;
  if (t == Termination::prover_abort || is_simulator_abort(t)) r.outcome = TrialOutcome::abort;
  else r.outcome = m.decision == Decision::accept ? TrialOutcome::accept : TrialOutcome::reject;
  return r;
}

inline std::vector<Symbol> random_field_stream(const Field& F, std::size_t n, Rng& rng) {
  std::vector<Symbol> x;
  for (std::size_t i = 0; i < n; ++i) x.push_back(static_cast<Symbol>(F.sample(rng).repr()));
  return x;
}

inline Element false_shift(const Field& F, Rng& rng) {
  const Element z = F.zero();
  return F.sample_excluding(rng, std::span<const Element>(&z, 1));
}

inline TrialRecord one_trial(const ProtocolConfig& cfg, const ProtocolParams& P, const std::string& tag,
                             std::uint64_t trial_seed, RunOptions opt = {}) {
  const Field& F = P.f();
  Rng rng(derive_seed(trial_seed, role::input));
  opt.record_view = false;
  const bool honest = tag == "honest";
  switch (P.kind) {
    case ProtocolKind::pep: {
      const LdeMap f(P.f_spec());
      const auto x = random_field_stream(F, P.n, rng);
      const PepInput in{x, P.f_spec().point_of(rng.below(P.n))};
      const Element truth = f.evaluate(x, in.beta);
      HonestPepProver prover;
      const auto r = pep_run(f, in, honest ? truth : truth + false_shift(F, rng), prover, trial_seed, false, opt);
      return classify(r.metrics, Termination::completed);
    }
    case ProtocolKind::sumcheck: {
      const LdeMap f(LdeSpec(F, P.grid(), P.d, P.m));
      const auto x = random_field_stream(F, P.grid(), rng);
      const auto H = cfg.H_elements();
      const Element truth = cube_sum(f.bind(x), P.m, H);
      if (honest) {
        HonestSumcheckProver prover(f.bind(x), P.d, P.m, H);
        return classify(sumcheck_run(f, x, truth, H, prover, trial_seed, opt).metrics, Termination::completed);
      }
      const Element claim = truth + false_shift(F, rng);
      AdaptiveSumcheckCheater prover(f.bind(x), P.d, P.m, H, claim, derive_seed(trial_seed, role::prover));
      return classify(sumcheck_run(f, x, claim, H, prover, trial_seed, opt).metrics, Termination::completed);
    }
    case ProtocolKind::zk_pep: {
      const LdeMap f(P.f_spec());
      const auto x = random_field_stream(F, P.n, rng);
      const PepInput in{x, P.f_spec().point_of(rng.below(P.n))};
      const Element truth = f.evaluate(x, in.beta);
      const ZkPepSetup s(P, f, honest ? truth : truth + false_shift(F, rng), P.n);
      HonestZkPepVerifier V;
      std::unique_ptr<ZkPepProver> prover;
      if (tag == "honest" || tag == "case1") prover = std::make_unique<HonestZkPepProver>();
      else if (tag == "forged-opening") prover = std::make_unique<ForgedOpeningProver>();
      else if (tag == "shifted-commitment") prover = std::make_unique<ShiftedCommitmentProver>();
      else throw UsageError("unknown adversary '" + tag + "'");
      const auto o = run_zk_pep(s, *prover, V, in, trial_seed, opt);
      return classify(o.metrics, o.termination);
    }
    case ProtocolKind::zk_sumcheck: {
      const LdeMap f(P.f_spec());
      const auto x = random_field_stream(F, P.n, rng);
      const Element truth = cube_sum(f.bind(x), P.m, P.H);
      const ZkSumcheckSetup s(P, f, honest ? truth : truth + false_shift(F, rng), P.n);
      HonestZkSumcheckVerifier V;
      std::unique_ptr<ZkSumcheckProver> prover;
      if (tag == "honest" || tag == "case1") prover = std::make_unique<HonestZkSumcheckProver>();
      else if (tag == "cheating-partial-sums") prover = std::make_unique<CheatingPartialSumsProver>();
      else if (tag == "forged-opening") prover = std::make_unique<ForgedSumOpeningProver>();
      else throw UsageError("unknown adversary '" + tag + "'");
      const auto o = run_zk_sumcheck(s, *prover, V, x, trial_seed, opt);
      return classify(o.metrics, o.termination);
    }
  }
  throw UsageError("unknown protocol");
}

}  // namespace detail

// Trial t runs on derive_seed(seed, t) with its own random input, so the
// report is reproducible from (config, seed) at any thread count.
inline TrialReport soundness_trial(const ProtocolConfig& cfg, const std::string& tag, std::size_t trials,
                                   std::uint64_t seed) {
  if (trials < 100) throw UsageError("soundness trials need at least 100 runs");
  find_adversary(cfg.kind, tag);
  const ProtocolParams P = cfg.params();
  std::vector<TrialRecord> out(trials);
  parallel_for(trials, [&](std::size_t t) { out[t] = detail::one_trial(cfg, P, tag, derive_seed(seed, t)); });
  std::size_t a = 0, r = 0, ab = 0;
  for (const auto& o : out) (o.outcome == TrialOutcome::accept ? a : o.outcome == TrialOutcome::reject ? r : ab)++;
  const auto [bound, kind] = adversary_bound(P, tag);
  auto rep = make_report(std::string(protocol_name(cfg.kind)) + "/" + tag, trials, a, r, ab, bound, kind);
  rep.extra = {{"params", P.to_json()}, {"seed", seed}};
  return rep;
}

// Honest or adversarial runs summarized by rates and metered costs.
inline nlohmann::json protocol_run_summary(const ProtocolConfig& cfg, const std::string& tag, std::size_t trials,
                                           std::uint64_t seed, const RunOptions& opt = {}) {
  if (trials < 1) throw UsageError("need at least one trial");
  find_adversary(cfg.kind, tag);
  const ProtocolParams P = cfg.params();
  std::vector<TrialRecord> out(trials);
  parallel_for(trials, [&](std::size_t t) { out[t] = detail::one_trial(cfg, P, tag, derive_seed(seed, t), opt); });
  std::map<std::string, std::size_t> term;
  std::size_t acc = 0, rej = 0, rounds_max = 0, violations = 0;
  std::uint64_t peak_max = 0, setup_max = 0;
  double peak_sum = 0, inter_sum = 0;
  for (const auto& o : out) {
    acc += o.outcome == TrialOutcome::accept;
    rej += o.outcome == TrialOutcome::reject;
    violations += o.metrics.space_violation;
    ++term[termination_name(o.termination)];
    peak_max = std::max(peak_max, o.metrics.peak_bits);
    setup_max = std::max(setup_max, o.metrics.setup_bits);
    rounds_max = std::max(rounds_max, o.metrics.rounds);
    peak_sum += double(o.metrics.peak_bits);
    inter_sum += double(o.metrics.interactive_bits);
  }
  const double N = double(trials);
  return {{"params", P.to_json()},
          {"prover", tag},
          {"trials", trials},
          {"seed", seed},
          {"accept_rate", double(acc) / N},
          {"accepts", acc},
          {"rejects", rej},
          {"aborts", trials - acc - rej},
          {"space_violations", violations},
          {"terminations", term},
          {"peak_bits_max", peak_max},
          {"peak_bits_mean", peak_sum / N},
          {"comm_setup_bits", setup_max},
          {"comm_interactive_bits_mean", inter_sum / N},
          {"rounds_max", rounds_max}};
}

// ---------------------------------------------------------------- uniformity

struct UniformityReport {
  std::string label;
  std::size_t samples = 0, categories = 0;
  double statistic = 0, p_value = 0, significance = 0.01;
  bool pass = false;
  bool power_warning = false;

  nlohmann::json to_json() const {
    return {{"label", label},     {"samples", samples},       {"categories", categories},
            {"chi_square", statistic}, {"p_value", p_value}, {"significance", significance},
            {"pass", pass},       {"power_warning", power_warning}};
  }
};

inline UniformityReport chi_square_uniform(std::string label, std::span<const std::uint64_t> counts,
                                           double significance = 0.01) {
  if (counts.size() < 2) throw UsageError("chi-square needs at least two categories");
  UniformityReport r;
  r.label = std::move(label);
  r.categories = counts.size();
  r.samples = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  if (r.samples == 0) throw UsageError("no samples");
  r.significance = significance;
  const double E = double(r.samples) / double(counts.size());
  for (auto c : counts) r.statistic += (double(c) - E) * (double(c) - E) / E;
  const boost::math::chi_squared dist(double(counts.size() - 1));
  r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
  r.pass = r.p_value >= significance;
  r.power_warning = r.samples < 1000 * counts.size();
  return r;
}

// source(i) yields the selected coordinate of sample i as a value in [0, q).
inline UniformityReport marginal_uniformity_test(std::string label, const std::function<std::uint64_t(std::size_t)>& source,
                                                 std::uint64_t q, std::size_t samples, double significance = 0.01) {
  std::vector<std::uint64_t> counts(q, 0);
  for (std::size_t i = 0; i < samples; ++i) {
    const auto v = source(i);
    if (v >= q) throw RangeError("sample outside the alphabet");
    ++counts[v];
  }
  return chi_square_uniform(std::move(label), counts, significance);
}

// ---------------------------------------------------------------- simulator studies

struct SimulationConfig {
  ProtocolConfig protocol;
  std::string verifier = "honest";
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  double significance = 0.01;
};

inline std::vector<std::string> simulation_verifiers(ProtocolKind kind) {
  if (kind == ProtocolKind::zk_pep) return {"honest", "j-plus-one", "oblivious", "opaque"};
  if (kind == ProtocolKind::zk_sumcheck) return {"honest", "opaque"};
  return {};
}

// One real run and one simulated run on the same verifier seed.
struct SimulationSample {
  Termination real_term = Termination::completed, sim_term = Termination::completed;
  Decision real_decision = Decision::reject, sim_decision = Decision::reject;
  std::optional<Element> real_opened, sim_opened;
  bool shapes_equal = false;
  // Correction and off-k commitment coordinates, empty when the view has none.
  std::vector<std::uint64_t> real_coords, sim_coords;
  View real_view, sim_view;
};

inline bool same_shape(const View& a, const View& b) {
  if (a.entries().size() != b.entries().size()) return false;
  for (std::size_t i = 0; i < a.entries().size(); ++i) {
    const auto &x = a.entries()[i], &y = b.entries()[i];
    if (x.origin != y.origin || x.label != y.label || x.position != y.position || x.width != y.width ||
        x.symbols.size() != y.symbols.size())
      return false;
  }
  return a.termination() == b.termination();
}

// One fixed claim, many seeds. The admissible input set of the whitebox
// oracle is that claim alone.
class SimulationHarness {
 public:
  explicit SimulationHarness(SimulationConfig cfg) : cfg_(std::move(cfg)), P_(cfg_.protocol.params()) {
    const auto names = simulation_verifiers(P_.kind);
    if (std::find(names.begin(), names.end(), cfg_.verifier) == names.end())
      throw UsageError("unknown verifier '" + cfg_.verifier + "' for " + protocol_name(P_.kind));
    if (cfg_.samples < 1) throw UsageError("need at least one sample");
    const Field& F = P_.f();
    Rng rng(derive_seed(cfg_.seed, role::input));
    f_ = std::make_unique<LdeMap>(P_.f_spec());
    in_.x = detail::random_field_stream(F, P_.n, rng);
    if (P_.kind == ProtocolKind::zk_pep) {
      in_.beta = P_.f_spec().point_of(rng.below(P_.n));
      pep_ = std::make_unique<ZkPepSetup>(P_, *f_, f_->evaluate(in_.x, in_.beta), P_.n);
      if (cfg_.verifier == "honest") pv_ = std::make_unique<HonestZkPepVerifier>();
      else if (cfg_.verifier == "j-plus-one") pv_ = std::make_unique<NextIndexVerifier>();
      else if (cfg_.verifier == "oblivious") pv_ = std::make_unique<ObliviousVerifier>();
      else pv_ = std::make_unique<OpaqueVerifier>();
      W_ = whitebox_for(*pep_, *pv_, {in_});
    } else if (P_.kind == ProtocolKind::zk_sumcheck) {
      sc_ = std::make_unique<ZkSumcheckSetup>(P_, *f_, cube_sum(f_->bind(in_.x), P_.m, P_.H), P_.n);
      if (cfg_.verifier == "honest") sv_ = std::make_unique<HonestZkSumcheckVerifier>();
      else sv_ = std::make_unique<OpaqueZkSumcheckVerifier>();
      W_ = whitebox_for(*sc_, *sv_, {in_.x});
    } else {
      throw UsageError("simulation needs a zero-knowledge protocol");
    }
  }

  const ProtocolParams& params() const { return P_; }
  const PepInput& input() const { return in_; }

  SimulationSample sample(std::size_t i, bool keep_views = false) const {
    const std::uint64_t s = derive_seed(cfg_.seed, i);
    SimulationSample out;
    if (pep_) {
      HonestZkPepProver prover;
      auto real = run_zk_pep(*pep_, prover, *pv_, in_, s);
      auto sim = simulate_zk_pep(*pep_, *pv_, in_, *W_, s);
      fill(out, real.termination, real.decision, real.opened, real.view, sim.termination, sim.decision, sim.opened,
           sim.view, keep_views);
    } else {
      HonestZkSumcheckProver prover;
      auto real = run_zk_sumcheck(*sc_, prover, *sv_, in_.x, s);
      auto sim = simulate_zk_sumcheck(*sc_, *sv_, in_.x, *W_, s);
      fill(out, real.termination, real.decision, real.opened, real.view, sim.termination, sim.decision, sim.opened,
           sim.view, keep_views);
    }
    return out;
  }

  // Coordinate names, in the order sample() extracts them.
  std::vector<std::string> coordinate_names() const {
    std::vector<std::string> names;
    const std::size_t rounds = pep_ ? 1 : P_.m, rows = P_.commitment_rows();
    for (std::size_t t = 0; t < rounds; ++t) {
      const std::string pre = pep_ ? "" : "round" + std::to_string(t + 1) + ".";
      for (std::size_t r = 0; r < rows; ++r) names.push_back(pre + "gamma[" + std::to_string(r) + "]");
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t o = 1; o < P_.p; ++o)
          names.push_back(pre + "y[" + std::to_string(r) + "][k+" + std::to_string(o) + "]");
    }
    return names;
  }

  // Exact rate at which this verifier's certificate passes the temporal gate
  // of the simulator, where one is known.
  std::optional<double> expected_gate_pass_rate() const {
    if (cfg_.verifier == "j-plus-one" || cfg_.verifier == "oblivious") return 1.0 / P_.temporal_space();
    return std::nullopt;
  }

  nlohmann::json run() const {
    std::vector<SimulationSample> S(cfg_.samples);
    parallel_for(cfg_.samples, [&](std::size_t i) { S[i] = sample(i); });

    std::map<std::string, std::size_t> real_terms, sim_terms;
    std::size_t both = 0, shapes = 0, opened_equal = 0, sim_accepts = 0, real_accepts = 0;
    for (const auto& x : S) {
      ++real_terms[termination_name(x.real_term)];
      ++sim_terms[termination_name(x.sim_term)];
      real_accepts += x.real_decision == Decision::accept;
      sim_accepts += x.sim_decision == Decision::accept;
      if (x.real_term != Termination::completed || x.sim_term != Termination::completed) continue;
      ++both;
      shapes += x.shapes_equal;
      opened_equal += x.real_opened && x.sim_opened && *x.real_opened == *x.sim_opened;
    }
    const double N = double(cfg_.samples);
    nlohmann::json j{{"params", P_.to_json()},
                     {"verifier", cfg_.verifier},
                     {"samples", cfg_.samples},
                     {"seed", cfg_.seed},
                     {"real_terminations", real_terms},
                     {"simulated_terminations", sim_terms},
                     {"real_accept_rate", double(real_accepts) / N},
                     {"simulated_accept_rate", double(sim_accepts) / N},
                     {"both_completed", both},
                     {"layout_identical", shapes},
                     {"opened_identical", opened_equal}};
    bool pass = shapes == both && opened_equal == both;

    // Certificate gate: temporal and capture aborts both refuse the certificate.
    const std::size_t gate = count(sim_terms, Termination::sim_abort_temporal) +
                             count(sim_terms, Termination::sim_abort_capture);
    const std::size_t reached = cfg_.samples - count(sim_terms, Termination::rejected_at_setup) -
                                count(sim_terms, Termination::early_decision) -
                                count(sim_terms, Termination::sim_abort_line);
    j["certificate_gate_aborts"] = gate;
    j["certificate_gate_reached"] = reached;
    j["certificate_gate_abort_rate"] = reached ? double(gate) / double(reached) : 0.0;
    if (const auto e = expected_gate_pass_rate()) {
      const double pass_rate = reached ? double(reached - gate) / double(reached) : 0.0;
      const double sigma = std::sqrt(*e * (1 - *e) / double(std::max<std::size_t>(reached, 1)));
      j["certificate_gate_pass_rate"] = pass_rate;
      j["certificate_gate_pass_rate_exact"] = *e;
      j["certificate_gate_pass_sigma"] = sigma;
      pass = pass && reached > 0 && std::abs(pass_rate - *e) <= 4 * sigma;
    }

    if (cfg_.verifier == "honest") {
      nlohmann::json marg = nlohmann::json::array();
      const auto names = coordinate_names();
      for (int which = 0; which < 2; ++which) {
        for (std::size_t c = 0; c < names.size(); ++c) {
          std::vector<std::uint64_t> counts(P_.q(), 0);
          for (const auto& x : S) {
            const auto& v = which ? x.sim_coords : x.real_coords;
            if (c < v.size()) ++counts[v[c]];
          }
          if (std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}) == 0) continue;
          const auto r = chi_square_uniform((which ? "simulated." : "real.") + names[c], counts, cfg_.significance);
          pass = pass && r.pass;
          marg.push_back(r.to_json());
        }
      }
      j["marginals"] = marg;
      pass = pass && both > 0;
    }
    j["pass"] = pass;
    return j;
  }

 private:
  static std::size_t count(const std::map<std::string, std::size_t>& m, Termination t) {
    const auto it = m.find(termination_name(t));
    return it == m.end() ? 0 : it->second;
  }

  std::vector<std::uint64_t> coordinates(const View& v) const {
    std::vector<std::uint64_t> out;
    const std::size_t rounds = pep_ ? 1 : P_.m, rows = P_.commitment_rows(), p = P_.p;
    const ViewEntry* k = v.find("k");
    if (!k) return out;
    const std::size_t kk = k->symbols.at(0);
    for (std::size_t t = 0; t < rounds; ++t) {
      const ViewEntry* g = v.find("gamma", t);
      const ViewEntry* y = v.find("y", t);
      if (!g || !y) return {};
      for (std::size_t r = 0; r < rows; ++r) out.push_back(g->symbols.at(r));
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t o = 1; o < p; ++o) {
          const std::size_t col = (kk + o) % p;
          // zk-pep records column by column, zk-sumcheck row by row.
          out.push_back(y->symbols.at(pep_ ? col * rows + r : r * p + col));
        }
    }
    return out;
  }

  void fill(SimulationSample& out, Termination rt, Decision rd, std::optional<Element> ro, View& rv, Termination st,
            Decision sd, std::optional<Element> so, View& sv, bool keep) const {
    out.real_term = rt;
    out.real_decision = rd;
    out.real_opened = ro;
    out.sim_term = st;
    out.sim_decision = sd;
    out.sim_opened = so;
    out.shapes_equal = same_shape(rv, sv);
    out.real_coords = coordinates(rv);
    out.sim_coords = coordinates(sv);
    if (keep) {
      out.real_view = std::move(rv);
      out.sim_view = std::move(sv);
    }
  }

  SimulationConfig cfg_;
  ProtocolParams P_;
  std::unique_ptr<LdeMap> f_;
  PepInput in_;
  std::unique_ptr<ZkPepSetup> pep_;
  std::unique_ptr<ZkSumcheckSetup> sc_;
  std::unique_ptr<ZkPepVerifier> pv_;
  std::unique_ptr<ZkSumcheckVerifier> sv_;
  std::unique_ptr<WhiteboxOracle> W_;
};

// ---------------------------------------------------------------- capture sets

template <class T>
struct CaptureResult {
  std::vector<std::size_t> C;  // sorted, 0-based
  T tail{};
};

namespace detail {

template <class T>
void check_distribution(std::span<const T> p, const T& tol) {
  T s{0};
  for (const auto& e : p) {
    if (e < T{0}) throw UsageError("negative probability");
    s += e;
  }
  const T gap = s > T{1} ? s - T{1} : T{1} - s;
  if (gap > tol) throw UsageError("probability vector does not sum to 1");
}

template <class T>
T tail_outside(std::span<const T> p, std::span<const T> q, const std::vector<std::size_t>& C) {
  std::vector<bool> in(p.size(), false);
  for (auto i : C) in[i] = true;
  T s{0};
  for (std::size_t i = 0; i < p.size(); ++i)
    if (!in[i]) s += p[i] * q[i];
  return s;
}

template <class T>
CaptureResult<T> capture_impl(std::span<const T> p, std::span<const T> q, std::size_t t, const T& tol) {
  if (p.size() != q.size() || p.empty()) throw UsageError("vectors must be nonempty and of equal length");
  if (t < 1 || t > p.size()) throw UsageError("t must be in [1, v]");
  check_distribution(p, tol);
  check_distribution(q, tol);
  const std::size_t v = p.size();
  std::vector<std::size_t> order(v);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });
  // suffix[i] = sum over sorted positions >= i of p q
  std::vector<T> suffix(v + 1, T{0});
  for (std::size_t i = v; i-- > 0;) suffix[i] = suffix[i + 1] + p[order[i]] * q[order[i]];
  const T bound = T{1} / T(static_cast<long long>(t));
  std::size_t cut = t;  // the prefix argument guarantees a hit in [0, t)
  for (std::size_t i = 0; i < t; ++i)
    if (suffix[i] <= bound + tol) {
      cut = i;
      break;
    }
  if (cut == t) throw AccountingError("no prefix meets the tail bound");
  std::vector<std::size_t> C(order.begin(), order.begin() + cut);
  // Pad to size t with the remaining indices of largest p q.
  std::vector<std::size_t> rest(order.begin() + cut, order.end());
  std::stable_sort(rest.begin(), rest.end(), [&](std::size_t a, std::size_t b) {
    const T x = p[a] * q[a], y = p[b] * q[b];
    return x > y || (x == y && a < b);
  });
  for (std::size_t i = 0; C.size() < t; ++i) C.push_back(rest[i]);
  std::sort(C.begin(), C.end());
  CaptureResult<T> r;
  r.tail = tail_outside(p, q, C);
  r.C = std::move(C);
  return r;
}

}  // namespace detail

using Rational = boost::rational<long long>;

inline CaptureResult<double> top_t_capture(std::span<const double> p, std::span<const double> q, std::size_t t,
                                           double tol = 1e-9) {
  return detail::capture_impl<double>(p, q, t, tol);
}

inline CaptureResult<Rational> top_t_capture(std::span<const Rational> p, std::span<const Rational> q,
                                             std::size_t t) {
  return detail::capture_impl<Rational>(p, q, t, Rational(0));
}

// ---------------------------------------------------------------- commitment distinguisher lift

using Bits = std::vector<std::uint8_t>;

struct BitMatrix {
  std::size_t rows = 0, cols = 0;
  Bits a;
  BitMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0) {}
  std::uint8_t& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
  std::uint8_t at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
  Bits column(std::size_t c) const {
    Bits out(rows);
    for (std::size_t r = 0; r < rows; ++r) out[r] = at(r, c);
    return out;
  }
  static BitMatrix random(std::size_t r, std::size_t c, Rng& rng) {
    BitMatrix m(r, c);
    for (auto& b : m.a) b = static_cast<std::uint8_t>(rng.below(2));
    return m;
  }
};

inline Bits xor_bits(const Bits& a, const Bits& b) {
  if (a.size() != b.size()) throw UsageError("bit strings differ in length");
  Bits r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] ^ b[i];
  return r;
}

// A one-way protocol (A, B) on GF(2) commitments of length p to l-bit tuples:
// A compresses y to a message, B decides from the message, a correction and k.
class CommitmentDistinguisher {
 public:
  virtual ~CommitmentDistinguisher() = default;
  virtual std::string name() const = 0;
  virtual std::size_t message_bits(std::size_t l, std::size_t p) const = 0;
  virtual Bits alice(const BitMatrix& y) const = 0;
  virtual bool bob(const Bits& msg, const Bits& tau, std::size_t k, Rng& coins) const = 0;
};

// Sends all of y and accepts exactly the correction of a commitment to alpha.
class PerfectDistinguisher : public CommitmentDistinguisher {
 public:
  explicit PerfectDistinguisher(Bits alpha) : alpha_(std::move(alpha)) {}
  std::string name() const override { return "perfect"; }
  std::size_t message_bits(std::size_t l, std::size_t p) const override { return l * p; }
  Bits alice(const BitMatrix& y) const override { return y.a; }
  bool bob(const Bits& msg, const Bits& tau, std::size_t k, Rng&) const override {
    const std::size_t l = tau.size(), p = msg.size() / l;
    for (std::size_t i = 0; i < l; ++i)
      if (tau[i] != (alpha_[i] ^ msg[i * p + k])) return false;
    return true;
  }

 private:
  Bits alpha_;
};

class CoinFlipDistinguisher : public CommitmentDistinguisher {
 public:
  std::string name() const override { return "coin-flip"; }
  std::size_t message_bits(std::size_t, std::size_t) const override { return 0; }
  Bits alice(const BitMatrix&) const override { return {}; }
  bool bob(const Bits&, const Bits&, std::size_t, Rng& coins) const override { return coins.below(2) == 1; }
};

struct LiftPlan {
  std::size_t l = 0, p = 0;
  Bits alpha;
  double eps = 0;
  bool flip = false;               // B accepts random commitments more often
  std::vector<double> a;           // a_tau estimates, tau read as l bits, bit i-1 = coordinate i
  std::vector<double> eps_prefix;  // eps_0 .. eps_{l-1}
  int branch = 1;
  std::size_t coordinate = 0;      // 1-based row Alice hides x in
  std::size_t repetitions = 0;
  std::size_t pilot_draws = 0;
  std::size_t message_bits = 0;    // repetitions * s

  nlohmann::json to_json() const {
    return {{"l", l},
            {"p", p},
            {"eps", eps},
            {"flip", flip},
            {"a", a},
            {"eps_prefix", eps_prefix},
            {"case", branch},
            {"coordinate", coordinate},
            {"repetitions", repetitions},
            {"pilot_draws", pilot_draws},
            {"message_bits", message_bits}};
  }
};

namespace detail {

inline Bits tau_of(std::size_t code, std::size_t l) {
  Bits t(l);
  for (std::size_t i = 0; i < l; ++i) t[i] = (code >> i) & 1;
  return t;
}
inline std::size_t code_of(const Bits& t) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < t.size(); ++i) c |= std::size_t(t[i]) << i;
  return c;
}
// Codes tau agreeing with alpha on coordinates 1..i.
inline std::vector<std::size_t> prefix_class(const Bits& alpha, std::size_t i) {
  std::vector<std::size_t> out;
  const std::size_t l = alpha.size();
  for (std::size_t c = 0; c < (std::size_t{1} << l); ++c) {
    bool ok = true;
    for (std::size_t j = 0; j < i && ok; ++j) ok = ((c >> j) & 1) == alpha[j];
    if (ok) out.push_back(c);
  }
  return out;
}

}  // namespace detail

// Estimates a_tau with ceil(10 l^2 / eps^2) pilot draws per tau and picks the
// proof branch: the first i in [1, l-1] with eps_i < eps_{i-1} (1 - 1/2l)
// selects the flipped-coordinate branch at row i, otherwise the chain branch
// at row l.
inline LiftPlan plan_lift(const CommitmentDistinguisher& D, std::size_t l, std::size_t p, Bits alpha, double eps,
                          Rng& rng) {
  if (!(eps > 0)) throw UsageError("advantage estimate must be positive");
  if (l < 1 || l > 16 || p < 1) throw UsageError("unsupported lift dimensions");
  if (alpha.size() != l) throw UsageError("alpha must have l bits");
  LiftPlan plan;
  plan.l = l;
  plan.p = p;
  plan.alpha = std::move(alpha);
  plan.eps = eps;
  plan.pilot_draws = static_cast<std::size_t>(std::ceil(10.0 * double(l * l) / (eps * eps)));
  const std::size_t T = std::size_t{1} << l;
  plan.a.assign(T, 0);
  for (std::size_t c = 0; c < T; ++c) {
    const Bits tau = detail::tau_of(c, l);
    std::size_t acc = 0;
    for (std::size_t r = 0; r < plan.pilot_draws; ++r) {
      const BitMatrix y = BitMatrix::random(l, p, rng);
      const std::size_t k = rng.below(p);
      acc += D.bob(D.alice(y), xor_bits(tau, y.column(k)), k, rng);
    }
    plan.a[c] = double(acc) / double(plan.pilot_draws);
  }
  const std::size_t ac = detail::code_of(plan.alpha);
  const double mean = std::accumulate(plan.a.begin(), plan.a.end(), 0.0) / double(T);
  plan.flip = plan.a[ac] < mean;
  if (plan.flip)
    for (auto& v : plan.a) v = 1 - v;
  for (std::size_t i = 0; i < l; ++i) {
    double s = 0;
    const auto cls = detail::prefix_class(plan.alpha, i);
    for (auto c : cls) s += plan.a[ac] - plan.a[c];
    plan.eps_prefix.push_back(s / double(cls.size()));
  }
  plan.branch = 1;
  plan.coordinate = l;
  for (std::size_t i = 1; i < l; ++i)
    if (plan.eps_prefix[i] < plan.eps_prefix[i - 1] * (1 - 1.0 / (2.0 * double(l)))) {
      plan.branch = 2;
      plan.coordinate = i;
      break;
    }
  plan.repetitions = plan.branch == 1
                         ? static_cast<std::size_t>(std::ceil(2.0 / (eps * eps)))
                         : static_cast<std::size_t>(std::ceil(64.0 * double(l * l) / (eps * eps)));
  plan.message_bits = plan.repetitions * D.message_bits(l, p);
  return plan;
}

struct LiftOutcome {
  std::uint8_t guess = 0;
  std::size_t message_bits = 0;
};

// One binary INDEX instance (x, j), j 0-based. shared supplies the joint
// randomness (y' and sigma); Bob's own coins come from private_coins.
inline LiftOutcome lift_distinguisher_to_binary_index(const CommitmentDistinguisher& D, const LiftPlan& plan,
                                                      const Bits& x, std::size_t j, Rng& shared, Rng& private_coins) {
  if (x.size() != plan.p || j >= plan.p) throw UsageError("instance does not match the plan");
  const std::size_t l = plan.l, p = plan.p, row = plan.coordinate - 1;
  LiftOutcome out;
  double mu = 0;
  const auto cls = detail::prefix_class(plan.alpha, plan.coordinate);
  for (std::size_t r = 0; r < plan.repetitions; ++r) {
    const BitMatrix yp = BitMatrix::random(l, p, shared);
    std::vector<std::size_t> sigma(p);
    std::iota(sigma.begin(), sigma.end(), 0);
    for (std::size_t i = p; i > 1; --i) std::swap(sigma[i - 1], sigma[shared.below(i)]);
    // Alice: row `row` of y carries sigma(x).
    BitMatrix y = yp;
    for (std::size_t k = 0; k < p; ++k) y.at(row, k) ^= x[sigma[k]];
    const Bits msg = D.alice(y);
    out.message_bits += msg.size();
    // Bob: k = sigma^{-1}(j).
    const std::size_t k = static_cast<std::size_t>(std::find(sigma.begin(), sigma.end(), j) - sigma.begin());
    const Bits col = yp.column(k);
    auto B = [&](const Bits& tau) { return double(D.bob(msg, xor_bits(tau, col), k, private_coins) != plan.flip); };
    if (plan.branch == 1) {
      mu += B(plan.alpha);
    } else {
      double s = 0;
      for (auto c : cls) {
        Bits tau = detail::tau_of(c, l);
        const double b0 = B(tau);
        tau[row] ^= 1;
        s += b0 - B(tau);
      }
      mu += s / double(cls.size());
    }
  }
  mu /= double(plan.repetitions);
  if (plan.branch == 1) out.guess = mu >= plan.a[detail::code_of(plan.alpha)] - plan.eps / 2 ? 0 : 1;
  else out.guess = mu >= 0 ? 0 : 1;
  return out;
}

// Success rate of the lift over uniform binary INDEX instances.
inline TrialReport lift_success_trial(const CommitmentDistinguisher& D, const LiftPlan& plan, std::size_t instances,
                                      std::uint64_t seed) {
  std::vector<std::uint8_t> ok(instances);
  std::vector<std::size_t> bits(instances);
  parallel_for(instances, [&](std::size_t t) {
    Rng in(derive_seed(derive_seed(seed, t), role::input)), shared(derive_seed(derive_seed(seed, t), role::shared)),
        coins(derive_seed(derive_seed(seed, t), role::verifier));
    Bits x(plan.p);
    for (auto& b : x) b = static_cast<std::uint8_t>(in.below(2));
    const std::size_t j = in.below(plan.p);
    const auto o = lift_distinguisher_to_binary_index(D, plan, x, j, shared, coins);
    ok[t] = o.guess == x[j];
    bits[t] = o.message_bits;
  });
  const std::size_t succ = std::accumulate(ok.begin(), ok.end(), std::size_t{0});
  auto rep = make_report("lift/" + D.name(), instances, succ, instances - succ, 0, 1 - std::exp(-1.0), BoundKind::lower);
  const bool exact_bits = std::all_of(bits.begin(), bits.end(), [&](std::size_t b) { return b == plan.message_bits; });
  const double s = double(D.message_bits(plan.l, plan.p));
  rep.extra = {{"plan", plan.to_json()},
               {"message_bits_accounted", exact_bits},
               {"message_bits_reference", double(plan.l * plan.l) * s / (plan.eps * plan.eps)}};
  return rep;
}

// ---------------------------------------------------------------- INDEX strategies

// A metered space-s streaming algorithm for INDEX over an alphabet of size
// gamma: reads x, then answers x_j.
class IndexStrategy {
 public:
  virtual ~IndexStrategy() = default;
  virtual std::string name() const = 0;
  virtual std::uint64_t declared_bits() const = 0;
  virtual void begin(std::size_t p, std::uint64_t gamma, SpaceMeter& meter) = 0;
  virtual void consume(std::uint32_t symbol) = 0;
  virtual std::uint32_t answer(std::size_t j, Rng& coins) = 0;
  // Releases everything charged since begin().
  virtual void end() {}
  // Exact success on uniform (x, j), when the strategy is simple enough.
  virtual std::optional<double> exact_success(std::size_t, std::uint64_t) const { return std::nullopt; }
};

inline unsigned symbol_bits(std::uint64_t gamma) { return index_bits(gamma); }

// Keeps the first floor(s / log gamma) symbols, guesses uniformly otherwise.
class RememberPrefix : public IndexStrategy {
 public:
  explicit RememberPrefix(std::uint64_t s) : s_(s) {}
  std::string name() const override { return "remember-prefix"; }
  std::uint64_t declared_bits() const override { return s_; }
  void begin(std::size_t p, std::uint64_t gamma, SpaceMeter& meter) override {
    gamma_ = gamma;
    keep_ = std::min<std::size_t>(p, s_ / symbol_bits(gamma));
    store_.bind(meter, keep_ * symbol_bits(gamma));
    store_.set({});
    pos_ = 0;
  }
  void consume(std::uint32_t s) override {
    if (pos_++ < keep_) store_.mut().push_back(s);
  }
  std::uint32_t answer(std::size_t j, Rng& coins) override {
    return j < keep_ ? store_.get()[j] : static_cast<std::uint32_t>(coins.below(gamma_));
  }
  void end() override { store_.reset(); }
  std::optional<double> exact_success(std::size_t p, std::uint64_t gamma) const override {
    const double f = double(std::min<std::size_t>(p, s_ / symbol_bits(gamma))) / double(p);
    return f + (1 - f) / double(gamma);
  }

 private:
  std::uint64_t s_;
  std::uint64_t gamma_ = 2;
  std::size_t keep_ = 0, pos_ = 0;
  Retained<std::vector<std::uint32_t>> store_;
};

class GuessZero : public IndexStrategy {
 public:
  std::string name() const override { return "guess-zero"; }
  std::uint64_t declared_bits() const override { return 0; }
  void begin(std::size_t, std::uint64_t, SpaceMeter&) override {}
  void consume(std::uint32_t) override {}
  std::uint32_t answer(std::size_t, Rng&) override { return 0; }
  std::optional<double> exact_success(std::size_t, std::uint64_t gamma) const override { return 1.0 / double(gamma); }
};

inline TrialReport index_strategy_benchmark(IndexStrategy& strategy, std::uint64_t gamma, std::size_t p,
                                            std::size_t trials, std::uint64_t seed, double c = 1.0) {
  if (gamma < 2 || p < 1 || trials < 1) throw UsageError("bad benchmark dimensions");
  std::size_t succ = 0;
  SpaceMeter meter;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, t));
    strategy.begin(p, gamma, meter);
    std::vector<std::uint32_t> x(p);
    for (auto& s : x) {
      s = static_cast<std::uint32_t>(rng.below(gamma));
      strategy.consume(s);
    }
    const std::size_t j = rng.below(p);
    succ += strategy.answer(j, rng) == x[j];
    strategy.end();
    if (strategy.declared_bits() > 0 && meter.peak() == 0) throw UsageError("strategy '" + strategy.name() + "' is not metered");
    if (meter.peak() > strategy.declared_bits())
      throw SpaceBoundViolation("strategy '" + strategy.name() + "' exceeded its declared space");
  }
  const std::uint64_t peak = meter.peak();
  const auto exact = strategy.exact_success(p, gamma);
  auto rep = make_report("index/" + strategy.name(), trials, succ, trials - succ, 0,
                         exact.value_or(1.0 / double(gamma)), exact ? BoundKind::two_sided : BoundKind::lower);
  const double s = double(strategy.declared_bits());
  rep.extra = {{"space_bits", strategy.declared_bits()},
               {"peak_bits", peak},
               {"gamma", gamma},
               {"p", p},
               {"c", c},
               {"reference_rate", 1.0 / double(gamma) + c * std::sqrt(s / double(p))}};
  return rep;
}

}  // namespace zksip
