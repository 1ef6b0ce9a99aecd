#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "zksip/pep.hpp"
#include "zksip/sumcheck.hpp"

namespace zksip {

// ---------------------------------------------------------------- parameters

// The asymptotic choices d = log^{2/delta} n, m = delta log n / (2 log log n),
// q = log^{1+2/delta} n, evaluated for the given n and clamped to what runs at
// desk scale. Both forms are kept for reporting.
struct DerivedParams {
  std::size_t n = 0;
  double delta = 1;
  double d_formula = 0, m_formula = 0, q_formula = 0;
  std::size_t d = 1, m = 1;
  std::uint64_t q = 0;
  bool prime_field = false;

  const Field& field() const { return prime_field ? Field::prime(q) : Field::with_order(q); }

  nlohmann::json to_json() const {
    return {{"n", n},         {"delta", delta}, {"d_formula", d_formula}, {"m_formula", m_formula},
            {"q_formula", q_formula}, {"d", d}, {"m", m},             {"q", q},
            {"prime_field", prime_field}};
  }
};

inline std::uint64_t next_prime(std::uint64_t x) {
  if (x < 2) x = 2;
  while (!detail::is_prime(x)) ++x;
  return x;
}

// degree_factor multiplies d for maps whose degree grows with the instance
// (k for F_k, 2 for inner products); the grid still uses the base degree.
inline DerivedParams derive_params(std::size_t n, double delta = 1.0, bool prime_field = false,
                                   std::uint64_t min_q = 0, std::size_t degree_factor = 1) {
  if (n < 2) throw ParameterError("n must be at least 2");
  if (!(delta > 0 && delta <= 1)) throw ParameterError("delta must be in (0, 1]");
  DerivedParams r;
  r.n = n;
  r.delta = delta;
  r.prime_field = prime_field;
  const double L = std::max(2.0, std::log2(double(n)));
  r.d_formula = std::pow(L, 2 / delta);
  r.m_formula = delta * L / (2 * std::log2(L));
  r.q_formula = std::pow(L, 1 + 2 / delta);
  r.d = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(r.d_formula)), 1, 8);
  r.m = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(r.m_formula)), 1, 4);
  auto grid = [&] {
    std::size_t g = 1;
    for (std::size_t j = 0; j < r.m; ++j) g *= r.d + 1;
    return g;
  };
  while (grid() < n) {
    if (r.m < 4) ++r.m;
    else if (r.d < 8) ++r.d;
    else throw ParameterError("n too large for the supported grid");
  }
  const std::uint64_t need = std::max<std::uint64_t>(
      {static_cast<std::uint64_t>(std::ceil(r.q_formula)), 10 * r.d * degree_factor * r.m + 1, min_q, 3});
  if (prime_field) {
    r.q = next_prime(need);
  } else {
    std::uint64_t q = 2;
    while (q < need) q <<= 1;
    r.q = q;
  }
  if (r.q > Field::max_order) throw ParameterError("derived field too large");
  return r;
}

// ---------------------------------------------------------------- shared plumbing

struct AppResult {
  Decision decision = Decision::reject;
  Termination termination = Termination::completed;
  bool expected = false;  // brute-force truth of the claim
  std::optional<Element> opened;
  SessionMetrics metrics;

  bool temporal_miss() const { return termination == Termination::rejected_at_setup; }
  // Agreement with the oracle; a temporal miss counts against completeness only.
  bool agrees() const { return (decision == Decision::accept) == expected; }

  nlohmann::json to_json() const {
    nlohmann::json j = metrics.to_json();
    j["termination"] = termination_name(termination);
    j["expected"] = expected ? "accept" : "reject";
    if (opened) j["opened"] = opened->repr();
    return j;
  }
};

inline AppResult app_result(const ZkPepOutcome& o, bool expected) {
  return {o.decision, o.termination, expected, o.opened, o.metrics};
}
inline AppResult app_result(const ZkSumcheckOutcome& o, bool expected) {
  return {o.decision, o.termination, expected, o.opened, o.metrics};
}

inline RunOptions quiet(RunOptions opt) {
  opt.record_view = false;
  return opt;
}

// Frequency vector of a stream over [universe] (symbols 1..universe).
inline std::vector<std::int64_t> frequencies(std::span<const Symbol> x, std::size_t universe) {
  std::vector<std::int64_t> phi(universe, 0);
  for (auto s : x) {
    if (s < 1 || static_cast<std::size_t>(s) > universe) throw RangeError("symbol outside the universe");
    ++phi[s - 1];
  }
  return phi;
}

// ---------------------------------------------------------------- INDEX

class IndexApp {
 public:
  IndexApp(const Field& f, std::size_t n, std::size_t d, std::size_t m, ParamOverrides o = {})
      : params_(ProtocolParams::zk_pep(f, d, m, n, o)), map_(params_.f_spec()) {}

  static IndexApp derived(std::size_t n, double delta = 1.0, ParamOverrides o = {}) {
    const auto dp = derive_params(n, delta);
    IndexApp a(dp.field(), n, dp.d, dp.m, o);
    a.derived_ = dp;
    return a;
  }

  const ProtocolParams& params() const { return params_; }
  const LdeMap& map() const { return map_; }
  const std::optional<DerivedParams>& derivation() const { return derived_; }

  // j is 1-based.
  EvalPoint point(std::size_t j) const {
    if (j < 1 || j > params_.n) throw RangeError("index " + std::to_string(j) + " outside [1, n]");
    return params_.f_spec().point_of(j - 1);
  }

  static bool oracle(std::span<const Symbol> x, std::size_t j, const Element& alpha) {
    return static_cast<std::uint64_t>(x[j - 1]) == alpha.repr();
  }

  AppResult run(std::span<const Symbol> x, std::size_t j, const Element& alpha, std::uint64_t seed,
                const RunOptions& opt = {}) const {
    check_input(x);
    const ZkPepSetup s(params_, map_, alpha, params_.n);
    const PepInput in{{x.begin(), x.end()}, point(j)};
    HonestZkPepProver P;
    HonestZkPepVerifier V;
    return app_result(run_zk_pep(s, P, V, in, seed, opt), oracle(x, j, alpha));
  }

  // Search form over the plain protocol: returns the certified x_j.
  std::optional<Element> search(std::span<const Symbol> x, std::size_t j, std::uint64_t seed) const {
    check_input(x);
    HonestPepProver P;
    const PepInput in{{x.begin(), x.end()}, point(j)};
    const auto r = pep_run(map_, in, params_.f().zero(), P, seed, true);
    return r.output;
  }

 private:
  void check_input(std::span<const Symbol> x) const {
    if (x.size() != params_.n) throw UsageError("stream length differs from n");
  }

  ProtocolParams params_;
  LdeMap map_;
  std::optional<DerivedParams> derived_;
};

// ---------------------------------------------------------------- point query

struct Update {
  std::int64_t u;
  std::size_t k;  // 1-based coordinate
};

inline Symbol encode_update(const Update& up) {
  if (up.u < INT32_MIN || up.u > INT32_MAX) throw RangeError("update magnitude too large");
  return static_cast<Symbol>((std::uint64_t(up.k) << 32) | std::uint32_t(std::int64_t(up.u) + (std::int64_t(1) << 31)));
}
inline Update decode_update(Symbol s) {
  const auto w = static_cast<std::uint64_t>(s);
  return {std::int64_t(w & 0xffffffffu) - (std::int64_t(1) << 31), static_cast<std::size_t>(w >> 32)};
}
inline std::vector<Symbol> encode_updates(std::span<const Update> ups) {
  std::vector<Symbol> out;
  for (const auto& u : ups) out.push_back(encode_update(u));
  return out;
}

// f^x is the LDE of the aggregated vector y_k = sum of u over updates to k,
// tracked as the running sum of u * chi_k(rho).
class PointQueryMap : public StreamPolyMap {
 public:
  explicit PointQueryMap(LdeSpec spec) : spec_(std::move(spec)) {
    if (spec_.field().kind() != FieldKind::prime) throw ParameterError("point query needs a prime field");
  }
  std::string name() const override { return "point-query"; }
  const Field& field() const override { return spec_.field(); }
  std::size_t degree() const override { return spec_.d(); }
  std::size_t dimension() const override { return spec_.m(); }
  const LdeSpec& spec() const { return spec_; }

  std::unique_ptr<StreamEvaluator> evaluator(const EvalPoint& p) const override {
    struct E : StreamEvaluator {
      E(const PointQueryMap& m, const EvalPoint& p) : map(&m), point(p), acc(m.field().zero()) {}
      void consume(Symbol s) override {
        const Update up = decode_update(s);
        map->check_coordinate(up.k);
        acc += map->field().from_integer(up.u) * map->spec_.chi(up.k - 1, point);
      }
      Element value() const override { return acc; }
      const PointQueryMap* map;
      EvalPoint point;
      Element acc;
    };
    return std::make_unique<E>(*this, p);
  }

  Element evaluate(std::span<const Symbol> x, const EvalPoint& p) const override {
    const auto y = aggregate(x);
    std::vector<Element> ys;
    for (auto v : y) ys.push_back(field().from_integer(v));
    return lde_eval(spec_, ys, p);
  }

  std::vector<std::int64_t> aggregate(std::span<const Symbol> x) const {
    std::vector<std::int64_t> y(spec_.n(), 0);
    for (auto s : x) {
      const Update up = decode_update(s);
      check_coordinate(up.k);
      y[up.k - 1] += up.u;
    }
    return y;
  }

 private:
  void check_coordinate(std::size_t k) const {
    if (k < 1 || k > spec_.n()) throw RangeError("update coordinate outside [1, n]");
  }
  LdeSpec spec_;
};

inline std::int64_t crt_combine(std::span<const std::uint64_t> residues, std::span<const std::uint64_t> moduli) {
  if (residues.size() != moduli.size() || moduli.empty()) throw UsageError("crt needs one residue per modulus");
  __int128 M = 1;
  for (auto p : moduli) M *= p;
  __int128 x = 0;
  for (std::size_t i = 0; i < moduli.size(); ++i) {
    const __int128 Mi = M / moduli[i];
    // inverse of Mi mod p_i by Fermat, moduli are prime
    __int128 base = Mi % moduli[i], inv = 1;
    for (std::uint64_t e = moduli[i] - 2; e; e >>= 1, base = base * base % moduli[i])
      if (e & 1) inv = inv * base % moduli[i];
    x = (x + __int128(residues[i]) * Mi % M * inv) % M;
  }
  if (x > M / 2) x -= M;
  return static_cast<std::int64_t>(x);
}

// Decides y_j = t for |y_j| <= M. One prime field when q > 2M+1, otherwise
// several primes with product > 2M+1 run side by side over one pass of x.
class PointQueryApp {
 public:
  PointQueryApp(std::vector<std::uint64_t> primes, std::size_t n, std::size_t d, std::size_t m, std::int64_t M,
                ParamOverrides o = {})
      : primes_(std::move(primes)), M_(M) {
    if (primes_.empty()) throw ParameterError("no moduli");
    if (M < 0) throw ParameterError("M must be nonnegative");
    long double prod = 1;
    for (auto p : primes_) {
      prod *= p;
      const Field& F = Field::prime(p);
      params_.push_back(ProtocolParams::zk_pep(F, d, m, n, o));
    }
    for (std::size_t i = 0; i < primes_.size(); ++i)
      for (std::size_t k = i + 1; k < primes_.size(); ++k)
        if (primes_[i] == primes_[k]) throw ParameterError("moduli must be distinct");
    if (prod <= 2.0L * M + 1) throw ParameterError("product of moduli must exceed 2M+1");
    for (const auto& p : params_) maps_.push_back(std::make_unique<PointQueryMap>(p.f_spec()));
  }

  static PointQueryApp derived(std::size_t n, std::int64_t M, double delta = 1.0, ParamOverrides o = {}) {
    const auto dp = derive_params(n, delta, true, 2 * static_cast<std::uint64_t>(M) + 2);
    PointQueryApp a({dp.q}, n, dp.d, dp.m, M, o);
    a.derived_ = dp;
    return a;
  }

  const std::vector<ProtocolParams>& params() const { return params_; }
  const std::vector<std::uint64_t>& primes() const { return primes_; }
  const PointQueryMap& map(std::size_t i) const { return *maps_.at(i); }
  const std::optional<DerivedParams>& derivation() const { return derived_; }
  std::int64_t bound() const { return M_; }

  static bool oracle(std::span<const Update> ups, std::size_t j, std::int64_t t) {
    std::int64_t y = 0;
    for (const auto& u : ups)
      if (u.k == j) y += u.u;
    return y == t;
  }

  AppResult run(std::span<const Update> ups, std::size_t j, std::int64_t t, std::uint64_t seed,
                const RunOptions& opt = {}) const {
    const std::size_t n = params_[0].n;
    if (j < 1 || j > n) throw RangeError("index " + std::to_string(j) + " outside [1, n]");
    const auto x = encode_updates(ups);
    std::vector<std::unique_ptr<ZkPepSetup>> setups;
    std::vector<HonestZkPepProver> provers(primes_.size());
    HonestZkPepVerifier V;
    std::vector<BundleLeg> legs;
    for (std::size_t i = 0; i < primes_.size(); ++i) {
      const Field& F = params_[i].f();
      setups.push_back(std::make_unique<ZkPepSetup>(params_[i], *maps_[i], F.from_integer(t), n));
      legs.push_back({setups.back().get(), &provers[i], &V, params_[i].f_spec().point_of(j - 1)});
    }
    const auto b = run_zk_pep_bundle(legs, x, seed, false, opt);
    AppResult r;
    r.expected = oracle(ups, j, t);
    r.metrics = b.metrics;
    r.termination = Termination::completed;
    for (const auto& l : b.legs)
      if (l.termination != Termination::completed) {
        r.termination = l.termination;
        break;
      }
    // All legs accepting pins y_j mod each prime to t; the combined residue
    // must then be t itself inside [-M, M].
    bool ok = b.all_accept();
    if (ok) {
      std::vector<std::uint64_t> res;
      for (std::size_t i = 0; i < primes_.size(); ++i) res.push_back(params_[i].f().from_integer(t).repr());
      const std::int64_t c = crt_combine(res, primes_);
      ok = c == t && c >= -M_ && c <= M_;
    }
    r.decision = ok ? Decision::accept : Decision::reject;
    r.metrics.decision = r.decision;
    return r;
  }

 private:
  std::vector<std::uint64_t> primes_;
  std::int64_t M_;
  std::vector<ProtocolParams> params_;
  std::vector<std::unique_ptr<PointQueryMap>> maps_;
  std::optional<DerivedParams> derived_;
};

// ---------------------------------------------------------------- range count

// A family of subsets of [universe]; members are 1-based and sorted.
struct RangeFamily {
  std::size_t universe = 0;
  std::vector<std::vector<std::size_t>> ranges;

  // {[l] minus [i] : 0 <= i <= l}; range i is {i+1, ..., l}.
  static RangeFamily suffixes(std::size_t l) {
    RangeFamily f;
    f.universe = l;
    for (std::size_t i = 0; i <= l; ++i) {
      std::vector<std::size_t> r;
      for (std::size_t e = i + 1; e <= l; ++e) r.push_back(e);
      f.ranges.push_back(std::move(r));
    }
    return f;
  }

  std::size_t size() const { return ranges.size(); }
  bool contains(std::size_t range, std::size_t e) const {
    return std::binary_search(ranges[range].begin(), ranges[range].end(), e);
  }
  std::size_t index_of(std::vector<std::size_t> R) const {
    std::sort(R.begin(), R.end());
    for (std::size_t i = 0; i < ranges.size(); ++i)
      if (ranges[i] == R) return i;
    throw UsageError("range is not in the family");
  }
};

// f^x is the LDE of c_{R'} = #{i : x_i in R'} over the family, i.e. of the
// frequency vector of the derived incidence stream, without materializing it.
class RangeCountMap : public StreamPolyMap {
 public:
  RangeCountMap(LdeSpec spec, RangeFamily family) : spec_(std::move(spec)), family_(std::move(family)) {
    if (spec_.n() != family_.size()) throw ParameterError("LDE length must equal the family size");
    if (spec_.field().order() <= 1) throw ParameterError("field too small");
  }
  std::string name() const override { return "range-count"; }
  const Field& field() const override { return spec_.field(); }
  std::size_t degree() const override { return spec_.d(); }
  std::size_t dimension() const override { return spec_.m(); }
  const RangeFamily& family() const { return family_; }

  std::unique_ptr<StreamEvaluator> evaluator(const EvalPoint& p) const override {
    struct E : StreamEvaluator {
      E(const RangeCountMap& m, const EvalPoint& p) : map(&m), point(p), acc(m.field().zero()) {}
      void consume(Symbol s) override {
        map->check_symbol(s);
        for (std::size_t r = 0; r < map->family_.size(); ++r)
          if (map->family_.contains(r, static_cast<std::size_t>(s))) acc += map->spec_.chi(r, point);
      }
      Element value() const override { return acc; }
      const RangeCountMap* map;
      EvalPoint point;
      Element acc;
    };
    return std::make_unique<E>(*this, p);
  }

  Element evaluate(std::span<const Symbol> x, const EvalPoint& p) const override {
    std::vector<Element> c;
    for (const auto v : counts(x)) c.push_back(field().embed_index(v % field().order()));
    return lde_eval(spec_, c, p);
  }

  std::vector<std::size_t> counts(std::span<const Symbol> x) const {
    std::vector<std::size_t> c(family_.size(), 0);
    for (auto s : x) {
      check_symbol(s);
      for (std::size_t r = 0; r < family_.size(); ++r) c[r] += family_.contains(r, static_cast<std::size_t>(s));
    }
    return c;
  }

 private:
  void check_symbol(Symbol s) const {
    if (s < 1 || static_cast<std::size_t>(s) > family_.universe) throw RangeError("symbol outside the universe");
  }
  LdeSpec spec_;
  RangeFamily family_;
};

// Counts are integers up to the stream length; the field must exceed it.
class RangeCountApp {
 public:
  RangeCountApp(const Field& f, RangeFamily family, std::size_t d, std::size_t m, ParamOverrides o = {})
      : params_(ProtocolParams::zk_pep(f, d, m, family.size(), o)), map_(params_.f_spec(), std::move(family)) {}

  static RangeCountApp derived(RangeFamily family, std::size_t max_len, double delta = 1.0, ParamOverrides o = {}) {
    const auto dp = derive_params(std::max<std::size_t>(2, family.size()), delta, true, max_len + 1);
    RangeCountApp a(dp.field(), std::move(family), dp.d, dp.m, o);
    a.derived_ = dp;
    return a;
  }

  const ProtocolParams& params() const { return params_; }
  const RangeCountMap& map() const { return map_; }
  const std::optional<DerivedParams>& derivation() const { return derived_; }

  static std::size_t count(std::span<const Symbol> x, const std::vector<std::size_t>& R) {
    std::size_t c = 0;
    for (auto s : x) c += std::find(R.begin(), R.end(), static_cast<std::size_t>(s)) != R.end();
    return c;
  }

  Element encode_count(std::size_t t) const {
    if (t >= params_.q()) throw RangeError("count does not fit into the field");
    return params_.f().embed_index(t);
  }

  AppResult run(std::span<const Symbol> x, const std::vector<std::size_t>& R, std::size_t t, std::uint64_t seed,
                const RunOptions& opt = {}) const {
    const std::size_t r = map_.family().index_of(R);
    if (x.size() >= params_.q()) throw UsageError("stream longer than the field order");
    const ZkPepSetup s(params_, map_, encode_count(t), params_.n);
    const PepInput in{{x.begin(), x.end()}, params_.f_spec().point_of(r)};
    HonestZkPepProver P;
    HonestZkPepVerifier V;
    return app_result(run_zk_pep(s, P, V, in, seed, opt), count(x, map_.family().ranges[r]) == t);
  }

 private:
  ProtocolParams params_;
  RangeCountMap map_;
  std::optional<DerivedParams> derived_;
};

// ---------------------------------------------------------------- selection

struct SelectionOutcome {
  AppResult result;
  BundleOutcome legs;
};

// "k is within (phi, phi') of rank r": sum_{i<k} phi_i = r - phi and
// sum_{i<=k} phi_i = r + phi'. With suffix ranges these are the counts
// n - (r - phi) of range k-1 and n - (r + phi') of range k, checked by two
// sessions that share one temporal string and read x once.
class SelectionApp {
 public:
  SelectionApp(const Field& f, std::size_t universe, std::size_t d, std::size_t m, ParamOverrides o = {})
      : inner_(f, RangeFamily::suffixes(universe), d, m, o) {}

  static SelectionApp derived(std::size_t universe, std::size_t max_len, double delta = 1.0, ParamOverrides o = {}) {
    const auto dp = derive_params(universe + 1, delta, true, max_len + 1);
    SelectionApp a(dp.field(), universe, dp.d, dp.m, o);
    a.derived_ = dp;
    return a;
  }

  const ProtocolParams& params() const { return inner_.params(); }
  const RangeCountMap& map() const { return inner_.map(); }
  std::size_t universe() const { return map().family().universe; }
  const std::optional<DerivedParams>& derivation() const { return derived_; }

  static bool oracle(std::span<const Symbol> x, std::size_t k, std::int64_t r, std::int64_t phi, std::int64_t phi2) {
    std::int64_t below = 0, upto = 0;
    for (auto s : x) {
      below += s < static_cast<Symbol>(k);
      upto += s <= static_cast<Symbol>(k);
    }
    return below == r - phi && upto == r + phi2;
  }

  SelectionOutcome run(std::span<const Symbol> x, std::size_t k, std::int64_t r, std::int64_t phi,
                       std::int64_t phi2, std::uint64_t seed, const RunOptions& opt = {}) const {
    if (k < 1 || k > universe()) throw RangeError("candidate outside the universe");
    const std::int64_t n = static_cast<std::int64_t>(x.size());
    if (x.size() >= params().q()) throw UsageError("stream longer than the field order");
    SelectionOutcome out;
    out.result.expected = oracle(x, k, r, phi, phi2);
    const std::int64_t c1 = n - (r - phi), c2 = n - (r + phi2);
    if (c1 < 0 || c2 < 0 || c1 > n || c2 > n) {
      // Claimed prefix counts outside [0, n] are false for every stream.
      out.result.decision = Decision::reject;
      return out;
    }
    const ZkPepSetup s1(params(), map(), inner_.encode_count(c1), params().n);
    const ZkPepSetup s2(params(), map(), inner_.encode_count(c2), params().n);
    HonestZkPepProver P1, P2;
    HonestZkPepVerifier V;
    const std::vector<BundleLeg> legs{{&s1, &P1, &V, params().f_spec().point_of(k - 1)},
                                      {&s2, &P2, &V, params().f_spec().point_of(k)}};
    out.legs = run_zk_pep_bundle(legs, x, seed, true, opt);
    out.result.metrics = out.legs.metrics;
    out.result.decision = out.legs.metrics.decision;
    for (const auto& l : out.legs.legs)
      if (l.termination != Termination::completed) {
        out.result.termination = l.termination;
        break;
      }
    return out;
  }

 private:
  RangeCountApp inner_;
  std::optional<DerivedParams> derived_;
};

// ---------------------------------------------------------------- frequency moments

// The frequency vector phi over [universe] has an LDE phi-hat in m' variables
// of degree d0. f^x(a) = sum over i in [d0+1] of phi-hat(i, a)^k is an
// (m'-1)-variate polynomial of degree k*d0 whose sum over [d0+1]^{m'-1} is
// F_k. The verifier keeps d0+1 running sums, one per first coordinate.
class FrequencyMomentMap : public StreamPolyMap {
 public:
  FrequencyMomentMap(const Field& f, std::size_t universe, std::size_t d0, std::size_t mprime, unsigned k)
      : base_(f, universe, d0, mprime, DomainKind::one_based), k_(k) {
    if (mprime < 2) throw ParameterError("frequency moments need m' >= 2");
    if (k < 1) throw ParameterError("moment order must be positive");
  }
  std::string name() const override { return "frequency-moment"; }
  const Field& field() const override { return base_.field(); }
  std::size_t degree() const override { return k_ * base_.d(); }
  std::size_t dimension() const override { return base_.m() - 1; }
  std::size_t accumulators() const override { return base_.d() + 1; }
  std::size_t universe() const { return base_.n(); }
  unsigned order() const { return k_; }
  const LdeSpec& base() const { return base_; }
  // Labels 1..d0+1, the summation set.
  std::vector<Element> summation_set() const { return base_.domain().nodes(); }

  std::unique_ptr<StreamEvaluator> evaluator(const EvalPoint& p) const override {
    struct E : StreamEvaluator {
      E(const FrequencyMomentMap& m, const EvalPoint& p) : map(&m), rows(m.rows(p)) {
        acc.assign(rows.size(), m.field().zero());
      }
      void consume(Symbol s) override {
        const std::size_t idx = map->grid_index(s);
        for (std::size_t i = 0; i < rows.size(); ++i) acc[i] += map->base_.chi(idx, rows[i]);
      }
      Element value() const override { return map->combine(acc); }
      const FrequencyMomentMap* map;
      std::vector<EvalPoint> rows;
      std::vector<Element> acc;
    };
    return std::make_unique<E>(*this, p);
  }

  Element evaluate(std::span<const Symbol> x, const EvalPoint& p) const override {
    const auto phi = frequencies(x, universe());
    std::vector<Element> ph;
    for (auto v : phi) ph.push_back(field().embed_index(static_cast<std::uint64_t>(v) % field().order()));
    std::vector<Element> vals;
    for (const auto& row : rows(p)) vals.push_back(lde_eval(base_, ph, row));
    return combine(vals);
  }

 private:
  friend class InnerProductMap;
  std::size_t grid_index(Symbol s) const {
    if (s < 1 || static_cast<std::size_t>(s) > universe()) throw RangeError("symbol outside the universe");
    return static_cast<std::size_t>(s - 1);
  }
  // (node_i, a) for each i in [d0+1].
  std::vector<EvalPoint> rows(const EvalPoint& a) const {
    std::vector<EvalPoint> out;
    for (const auto& node : base_.domain().nodes()) {
      EvalPoint r;
      r.push_back(node);
      r.insert(r.end(), a.begin(), a.end());
      out.push_back(std::move(r));
    }
    return out;
  }
  Element combine(std::span<const Element> vals) const {
    Element s = field().zero();
    for (const auto& v : vals) {
      Element t = field().one();
      for (unsigned e = 0; e < k_; ++e) t *= v;
      s += t;
    }
    return s;
  }

  LdeSpec base_;
  unsigned k_;
};

inline std::uint64_t moment(std::span<const Symbol> x, std::size_t universe, unsigned k) {
  std::uint64_t s = 0;
  for (auto v : frequencies(x, universe)) {
    std::uint64_t t = 1;
    for (unsigned e = 0; e < k; ++e) t *= static_cast<std::uint64_t>(v);
    s += t;
  }
  return s;
}

inline std::uint64_t ipow(std::uint64_t b, unsigned e) {
  std::uint64_t r = 1;
  while (e--) r *= b;
  return r;
}

class FrequencyMomentApp {
 public:
  // max_len bounds the stream length; the field must exceed max_len^k so the
  // moment is recovered exactly.
  FrequencyMomentApp(const Field& f, std::size_t universe, std::size_t d0, std::size_t mprime, unsigned k,
                     std::size_t max_len, ParamOverrides o = {})
      : map_(f, universe, d0, mprime, k), max_len_(max_len) {
    if (f.kind() != FieldKind::prime) throw ParameterError("frequency moments need a prime field");
    if (ipow(max_len, k) >= f.order()) throw ParameterError("field order must exceed n^k");
    params_ = ProtocolParams::zk_sumcheck(f, map_.degree(), map_.dimension(), universe, map_.summation_set(), o);
  }

  static FrequencyMomentApp derived(std::size_t universe, unsigned k, std::size_t max_len, double delta = 1.0,
                                    ParamOverrides o = {}) {
    auto dp = derive_params(std::max<std::size_t>(universe, 2), delta, true, ipow(max_len, k) + 1, k);
    if (dp.m < 2) {
      dp.m = 2;
    }
    FrequencyMomentApp a(dp.field(), universe, dp.d, dp.m, k, max_len, o);
    a.derived_ = dp;
    return a;
  }

  const ProtocolParams& params() const { return params_; }
  const FrequencyMomentMap& map() const { return map_; }
  const std::optional<DerivedParams>& derivation() const { return derived_; }

  AppResult run(std::span<const Symbol> x, std::uint64_t t, std::uint64_t seed, const RunOptions& opt = {}) const {
    if (x.size() > max_len_) throw UsageError("stream longer than the configured bound");
    const bool truth = moment(x, map_.universe(), map_.order()) == t;
    if (t > ipow(x.size(), map_.order())) {
      AppResult r;
      r.expected = truth;
      return r;
    }
    const ZkSumcheckSetup s(params_, map_, params_.f().embed_index(t), map_.universe());
    HonestZkSumcheckProver P;
    HonestZkSumcheckVerifier V;
    return app_result(run_zk_sumcheck(s, P, V, x, seed, opt), truth);
  }

 private:
  FrequencyMomentMap map_;
  std::size_t max_len_;
  ProtocolParams params_;
  std::optional<DerivedParams> derived_;
};

// ---------------------------------------------------------------- inner product

// Two streams over [universe] interleaved into one: symbol 2u for x, 2u+1 for y.
inline std::vector<Symbol> combine_streams(std::span<const Symbol> x, std::span<const Symbol> y) {
  std::vector<Symbol> out;
  for (auto s : x) out.push_back(2 * s);
  for (auto s : y) out.push_back(2 * s + 1);
  return out;
}

// f(a) = sum over i in [d0+1] of phi-hat(x)(i, a) * phi-hat(y)(i, a), degree 2*d0.
class InnerProductMap : public StreamPolyMap {
 public:
  InnerProductMap(const Field& f, std::size_t universe, std::size_t d0, std::size_t mprime)
      : fm_(f, universe, d0, mprime, 1) {}
  std::string name() const override { return "inner-product"; }
  const Field& field() const override { return fm_.field(); }
  std::size_t degree() const override { return 2 * fm_.base().d(); }
  std::size_t dimension() const override { return fm_.dimension(); }
  std::size_t accumulators() const override { return 2 * (fm_.base().d() + 1); }
  std::size_t universe() const { return fm_.universe(); }
  std::vector<Element> summation_set() const { return fm_.summation_set(); }

  std::unique_ptr<StreamEvaluator> evaluator(const EvalPoint& p) const override {
    struct E : StreamEvaluator {
      E(const InnerProductMap& m, const EvalPoint& p) : map(&m), rows(m.fm_.rows(p)) {
        ax.assign(rows.size(), m.field().zero());
        ay = ax;
      }
      void consume(Symbol s) override {
        auto& acc = (s & 1) ? ay : ax;
        const std::size_t idx = map->fm_.grid_index(s >> 1);
        for (std::size_t i = 0; i < rows.size(); ++i) acc[i] += map->fm_.base_.chi(idx, rows[i]);
      }
      Element value() const override { return dot(ax, ay); }
      const InnerProductMap* map;
      std::vector<EvalPoint> rows;
      std::vector<Element> ax, ay;
    };
    return std::make_unique<E>(*this, p);
  }

  Element evaluate(std::span<const Symbol> xy, const EvalPoint& p) const override {
    std::vector<Symbol> x, y;
    split(xy, x, y);
    auto lift = [&](std::span<const Symbol> s) {
      std::vector<Element> ph;
      for (auto v : frequencies(s, universe())) ph.push_back(field().embed_index(std::uint64_t(v) % field().order()));
      return ph;
    };
    const auto px = lift(x), py = lift(y);
    Element s = field().zero();
    for (const auto& row : fm_.rows(p)) s += lde_eval(fm_.base_, px, row) * lde_eval(fm_.base_, py, row);
    return s;
  }

  static void split(std::span<const Symbol> xy, std::vector<Symbol>& x, std::vector<Symbol>& y) {
    for (auto s : xy) ((s & 1) ? y : x).push_back(s >> 1);
  }

 private:
  FrequencyMomentMap fm_;
};

inline std::uint64_t inner_product(std::span<const Symbol> x, std::span<const Symbol> y, std::size_t universe) {
  const auto a = frequencies(x, universe), b = frequencies(y, universe);
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < universe; ++i) s += static_cast<std::uint64_t>(a[i] * b[i]);
  return s;
}

class InnerProductApp {
 public:
  InnerProductApp(const Field& f, std::size_t universe, std::size_t d0, std::size_t mprime, std::size_t max_len,
                  ParamOverrides o = {})
      : map_(f, universe, d0, mprime), max_len_(max_len) {
    if (f.kind() != FieldKind::prime) throw ParameterError("inner products need a prime field");
    if (ipow(max_len, 2) >= f.order()) throw ParameterError("field order must exceed n^2");
    params_ = ProtocolParams::zk_sumcheck(f, map_.degree(), map_.dimension(), universe, map_.summation_set(), o);
  }

  static InnerProductApp derived(std::size_t universe, std::size_t max_len, double delta = 1.0,
                                 ParamOverrides o = {}) {
    auto dp = derive_params(std::max<std::size_t>(universe, 2), delta, true, ipow(max_len, 2) + 1, 2);
    if (dp.m < 2) dp.m = 2;
    InnerProductApp a(dp.field(), universe, dp.d, dp.m, max_len, o);
    a.derived_ = dp;
    return a;
  }

  const ProtocolParams& params() const { return params_; }
  const InnerProductMap& map() const { return map_; }
  const std::optional<DerivedParams>& derivation() const { return derived_; }

  AppResult run(std::span<const Symbol> x, std::span<const Symbol> y, std::uint64_t t, std::uint64_t seed,
                const RunOptions& opt = {}) const {
    if (x.size() > max_len_ || y.size() > max_len_) throw UsageError("stream longer than the configured bound");
    const bool truth = inner_product(x, y, map_.universe()) == t;
    if (t > x.size() * y.size()) {
      AppResult r;
      r.expected = truth;
      return r;
    }
    const auto xy = combine_streams(x, y);
    const ZkSumcheckSetup s(params_, map_, params_.f().embed_index(t), map_.universe());
    HonestZkSumcheckProver P;
    HonestZkSumcheckVerifier V;
    return app_result(run_zk_sumcheck(s, P, V, xy, seed, opt), truth);
  }

 private:
  InnerProductMap map_;
  std::size_t max_len_;
  ProtocolParams params_;
  std::optional<DerivedParams> derived_;
};

}  // namespace zksip
