// streamproof: run protocols and applications, attack them, and compare real
// verifier views against simulated ones. Output is JSON with sorted keys.
//
// Exit codes: 0 pass, 1 ran but the check failed, 2 bad parameters or flags,
// 3 unsupported verifier, 4 space budget exceeded in hard-fail mode.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "zksip/zksip.hpp"

using namespace zksip;
using nlohmann::json;

namespace {

struct ProtocolFlags {
  std::string protocol;
  std::optional<std::uint64_t> q;
  std::optional<std::size_t> d, m, n;
  std::string H = "1,2";
  std::string v;  // number or "formula"
  std::optional<std::size_t> v_factor, p;
  bool allow_large_dm = false;
};

struct MeterFlags {
  std::optional<std::uint64_t> budget;
  std::string mode = "record";
};

struct OutputFlags {
  std::string path;
};

std::vector<std::uint64_t> parse_list(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &used);
    } catch (const std::exception&) {
      throw UsageError("not a number: '" + item + "'");
    }
    if (used != item.size()) throw UsageError("not a number: '" + item + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<std::int64_t> parse_signed_list(const std::string& s) {
  std::vector<std::int64_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(item, &used);
    } catch (const std::exception&) {
      throw UsageError("not a number: '" + item + "'");
    }
    if (used != item.size()) throw UsageError("not a number: '" + item + "'");
    out.push_back(v);
  }
  return out;
}

ProtocolKind parse_protocol(const std::string& s) {
  if (s == "pep") return ProtocolKind::pep;
  if (s == "sumcheck") return ProtocolKind::sumcheck;
  if (s == "zk-pep") return ProtocolKind::zk_pep;
  if (s == "zk-sumcheck") return ProtocolKind::zk_sumcheck;
  throw UsageError("unknown protocol '" + s + "'");
}

// v: a count, "formula", or unset (then the caller's default factor applies).
ParamOverrides overrides(const ProtocolFlags& f, std::optional<std::size_t> default_factor) {
  ParamOverrides o;
  o.allow_large_dm = f.allow_large_dm;
  o.p = f.p;
  if (f.v_factor && !f.v.empty()) throw UsageError("--v and --v-factor are exclusive");
  if (f.v_factor) {
    o.v_per_q_power = *f.v_factor;
  } else if (f.v == "formula") {
  } else if (!f.v.empty()) {
    const auto v = parse_list(f.v);
    if (v.size() != 1) throw UsageError("--v takes one number or 'formula'");
    o.v = v[0];
  } else {
    o.v_per_q_power = default_factor;
  }
  return o;
}

ProtocolConfig protocol_config(const ProtocolFlags& f, std::optional<std::size_t> default_factor = std::nullopt,
                               bool simulate_defaults = false) {
  ProtocolConfig c;
  c.kind = parse_protocol(f.protocol);
  // Defaults follow the grid each protocol is usually exercised on.
  if (simulate_defaults) {
    c.q = 32, c.d = 1, c.m = 2, c.n = 4;
  } else if (c.kind == ProtocolKind::pep || c.kind == ProtocolKind::sumcheck) {
    c.q = 257, c.d = 2, c.m = 2, c.n = 9;
  } else {
    c.q = 256, c.d = 3, c.m = 2, c.n = 16;
  }
  if (f.q) c.q = *f.q;
  if (f.d) c.d = *f.d;
  if (f.m) c.m = *f.m;
  if (f.n) c.n = *f.n;
  c.H = parse_list(f.H);
  c.overrides = overrides(f, default_factor);
  return c;
}

RunOptions run_options(const MeterFlags& m) {
  RunOptions o;
  o.budget_bits = m.budget;
  if (m.mode == "hard-fail") o.meter_mode = MeterMode::hard_fail;
  else if (m.mode == "record") o.meter_mode = MeterMode::record;
  else throw UsageError("meter mode must be hard-fail or record");
  return o;
}

void emit(const json& j, const OutputFlags& out) {
  const std::string text = j.dump(2) + "\n";
  if (out.path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out.path, std::ios::binary);
  if (!f) throw UsageError("cannot write " + out.path);
  f << text;
}

void add_protocol_flags(CLI::App* c, ProtocolFlags& f) {
  c->add_option("--q", f.q, "field order (prime or power of two)");
  c->add_option("--d", f.d, "per-variable degree");
  c->add_option("--m", f.m, "number of variables");
  c->add_option("--n", f.n, "input length");
  c->add_option("--H", f.H, "summation set, comma separated")->capture_default_str();
  c->add_option("--v", f.v, "temporal commitment length, or 'formula'");
  c->add_option("--v-factor", f.v_factor, "temporal commitment length v = factor * q^m");
  c->add_option("--p", f.p, "algebraic commitment length");
  c->add_flag("--allow-large-dm", f.allow_large_dm, "skip the dm <= q/10 gate");
}

void add_meter_flags(CLI::App* c, MeterFlags& m) {
  c->add_option("--budget-bits", m.budget, "verifier space budget");
  c->add_option("--meter", m.mode, "hard-fail or record")->capture_default_str();
}

// ---------------------------------------------------------------- run

struct AppFlags {
  std::string app;
  std::size_t n = 0, universe = 0;
  std::optional<std::int64_t> t;
  std::optional<std::size_t> j, k, range;
  std::optional<std::int64_t> r, phi, phi2, M;
  std::string stream, stream2, primes;
  double delta = 1.0;
};

std::vector<Symbol> as_symbols(const std::vector<std::uint64_t>& v) {
  std::vector<Symbol> out;
  for (auto s : v) out.push_back(static_cast<Symbol>(s));
  return out;
}

std::vector<Symbol> stream_or_random(const std::string& given, std::size_t n, std::uint64_t lo, std::uint64_t hi,
                                     Rng& rng) {
  if (!given.empty()) {
    const auto v = parse_list(given);
    for (auto s : v)
      if (s < lo || s > hi) throw UsageError("stream symbol " + std::to_string(s) + " outside the alphabet");
    return as_symbols(v);
  }
  if (n == 0) throw UsageError("--n is required without --stream");
  std::vector<Symbol> x;
  for (std::size_t i = 0; i < n; ++i) x.push_back(static_cast<Symbol>(lo + rng.below(hi - lo + 1)));
  return x;
}

json derivation_json(const std::optional<DerivedParams>& d) { return d ? d->to_json() : json(nullptr); }

json finish_app(json j, const AppResult& r) {
  j["result"] = r.to_json();
  j["decision"] = decision_name(r.decision);
  j["temporal_miss"] = r.temporal_miss();
  j["agrees_with_oracle"] = r.agrees();
  return j;
}

// A temporal miss only costs completeness, so it still counts as a pass.
int app_exit(const AppResult& r) { return r.agrees() || r.temporal_miss() ? 0 : 1; }

int run_app(const AppFlags& a, const ProtocolFlags& pf, std::uint64_t seed, const RunOptions& opt,
            const OutputFlags& out) {
  // Apps default to v = 4 q^m so a temporal miss rarely hides the decision.
  const ParamOverrides o = overrides(pf, 4);
  Rng rng(derive_seed(seed, role::input));
  json j{{"command", "run"}, {"app", a.app}, {"seed", seed}};
  AppResult r;

  if (a.app == "index") {
    const std::size_t n = a.stream.empty() ? a.n : parse_list(a.stream).size();
    const IndexApp app = IndexApp::derived(n, a.delta, o);
    const std::uint64_t alphabet = std::min<std::uint64_t>(app.params().q(), 256);
    const auto x = stream_or_random(a.stream, n, 0, alphabet - 1, rng);
    const std::size_t jj = a.j.value_or(1 + rng.below(n));
    app.point(jj);
    const std::uint64_t truth = static_cast<std::uint64_t>(x.at(jj - 1));
    const std::int64_t t = a.t.value_or(static_cast<std::int64_t>(truth));
    if (t < 0 || static_cast<std::uint64_t>(t) >= app.params().q()) throw UsageError("claim outside the field");
    r = app.run(x, jj, app.params().f().element(static_cast<std::uint64_t>(t)), seed, opt);
    j.update({{"params", app.params().to_json()}, {"derivation", derivation_json(app.derivation())},
              {"stream", x}, {"j", jj}, {"oracle", truth}, {"claim", t}});
  } else if (a.app == "point-query") {
    const std::size_t n = a.n ? a.n : 16;
    std::vector<Update> ups;
    if (!a.stream.empty()) {
      // Pairs k:u separated by commas, e.g. 3:-1,4:2.
      std::stringstream ss(a.stream);
      std::string item;
      while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw UsageError("point-query updates are k:u pairs");
        const auto k = parse_list(item.substr(0, colon));
        const auto u = parse_signed_list(item.substr(colon + 1));
        if (k.size() != 1 || u.size() != 1) throw UsageError("bad update '" + item + "'");
        ups.push_back({static_cast<std::int32_t>(u[0]), static_cast<std::size_t>(k[0])});
      }
    } else {
      for (std::size_t i = 0; i < 2 * n; ++i)
        ups.push_back({static_cast<std::int32_t>(rng.below(7)) - 3, static_cast<std::size_t>(1 + rng.below(n))});
    }
    std::int64_t bound = 0;
    for (const auto& u : ups) bound += std::abs(static_cast<std::int64_t>(u.u));
    const std::int64_t M = a.M.value_or(std::max<std::int64_t>(bound, 1));
    const PointQueryApp app = a.primes.empty() ? PointQueryApp::derived(n, M, a.delta, o)
                                               : PointQueryApp(parse_list(a.primes), n, 1, 1, M, o);
    const std::size_t jj = a.j.value_or(1 + rng.below(n));
    std::int64_t truth = 0;
    for (const auto& u : ups)
      if (u.k == jj) truth += u.u;
    const std::int64_t t = a.t.value_or(truth);
    r = app.run(ups, jj, t, seed, opt);
    json params = json::array(), updates = json::array();
    for (const auto& p : app.params()) params.push_back(p.to_json());
    for (const auto& u : ups) updates.push_back({{"k", u.k}, {"u", u.u}});
    j.update({{"params", params}, {"derivation", derivation_json(app.derivation())}, {"stream", updates},
              {"j", jj}, {"M", M}, {"oracle", truth}, {"claim", t}});
  } else if (a.app == "range-count") {
    const std::size_t l = a.universe ? a.universe : 8;
    const auto x = stream_or_random(a.stream, a.n, 1, l, rng);
    const RangeCountApp app = RangeCountApp::derived(RangeFamily::suffixes(l), x.size(), a.delta, o);
    const std::size_t ri = a.range.value_or(rng.below(l + 1));
    if (ri > l) throw UsageError("--range must be in [0, universe]");
    const auto& R = app.map().family().ranges[ri];
    const std::size_t truth = RangeCountApp::count(x, R);
    const std::int64_t t = a.t.value_or(static_cast<std::int64_t>(truth));
    if (t < 0) throw UsageError("negative count");
    r = app.run(x, R, static_cast<std::size_t>(t), seed, opt);
    j.update({{"params", app.params().to_json()}, {"derivation", derivation_json(app.derivation())},
              {"stream", x}, {"range", R}, {"range_index", ri}, {"oracle", truth}, {"claim", t}});
  } else if (a.app == "selection") {
    const std::size_t l = a.universe ? a.universe : 8;
    const auto x = stream_or_random(a.stream, a.n, 1, l, rng);
    const SelectionApp app = SelectionApp::derived(l, x.size(), a.delta, o);
    const std::int64_t n = static_cast<std::int64_t>(x.size());
    const std::int64_t rank = a.r.value_or((n + 1) / 2);
    // Default candidate: the element of that rank.
    std::size_t k = a.k.value_or(0);
    if (!a.k) {
      std::int64_t upto = 0;
      for (k = 1; k <= l; ++k) {
        for (auto s : x) upto += s == static_cast<Symbol>(k);
        if (upto >= rank) break;
      }
      k = std::min(k, l);
    }
    std::int64_t below = 0, upto = 0;
    for (auto s : x) {
      below += s < static_cast<Symbol>(k);
      upto += s <= static_cast<Symbol>(k);
    }
    const std::int64_t phi = a.phi.value_or(rank - below), phi2 = a.phi2.value_or(upto - rank);
    const auto so = app.run(x, k, rank, phi, phi2, seed, opt);
    r = so.result;
    j.update({{"params", app.params().to_json()}, {"derivation", derivation_json(app.derivation())},
              {"stream", x}, {"candidate", k}, {"rank", rank}, {"phi", phi}, {"phi_prime", phi2},
              {"oracle", {{"below", below}, {"up_to", upto}}}});
  } else if (a.app == "f2" || a.app == "fk") {
    const unsigned k = a.app == "f2" ? 2 : static_cast<unsigned>(a.k.value_or(2));
    if (a.app == "f2" && a.k && *a.k != 2) throw UsageError("f2 fixes k = 2");
    const std::size_t l = a.universe ? a.universe : 4;
    const auto x = stream_or_random(a.stream, a.n, 1, l, rng);
    const FrequencyMomentApp app = FrequencyMomentApp::derived(l, k, x.size(), a.delta, o);
    const std::uint64_t truth = moment(x, l, k);
    const std::int64_t t = a.t.value_or(static_cast<std::int64_t>(truth));
    if (t < 0) throw UsageError("negative moment");
    r = app.run(x, static_cast<std::uint64_t>(t), seed, opt);
    j.update({{"params", app.params().to_json()}, {"derivation", derivation_json(app.derivation())},
              {"stream", x}, {"k", k}, {"oracle", truth}, {"claim", t}});
  } else if (a.app == "inner-product") {
    const std::size_t l = a.universe ? a.universe : 4;
    const auto x = stream_or_random(a.stream, a.n, 1, l, rng);
    const auto y = stream_or_random(a.stream2, a.n ? a.n : x.size(), 1, l, rng);
    const InnerProductApp app = InnerProductApp::derived(l, std::max(x.size(), y.size()), a.delta, o);
    const std::uint64_t truth = inner_product(x, y, l);
    const std::int64_t t = a.t.value_or(static_cast<std::int64_t>(truth));
    if (t < 0) throw UsageError("negative inner product");
    r = app.run(x, y, static_cast<std::uint64_t>(t), seed, opt);
    j.update({{"params", app.params().to_json()}, {"derivation", derivation_json(app.derivation())},
              {"stream", x}, {"stream2", y}, {"oracle", truth}, {"claim", t}});
  } else {
    throw UsageError("unknown app '" + a.app + "'");
  }
  emit(finish_app(std::move(j), r), out);
  return app_exit(r);
}

int run_protocol(const ProtocolFlags& pf, const std::string& prover, std::size_t trials, std::uint64_t seed,
                 const RunOptions& opt, const OutputFlags& out) {
  const ProtocolConfig cfg = protocol_config(pf);
  json j = protocol_run_summary(cfg, prover, trials, seed, opt);
  const auto [bound, kind] = adversary_bound(cfg.params(), prover);
  const auto rep = make_report(std::string(protocol_name(cfg.kind)) + "/" + prover, trials, j["accepts"], j["rejects"],
                               j["aborts"], bound, kind);
  j["command"] = "run";
  j["protocol"] = protocol_name(cfg.kind);
  j["bound_rate"] = bound;
  j["bound_kind"] = bound_kind_name(kind);
  j["pass"] = rep.pass;
  emit(j, out);
  return rep.pass ? 0 : 1;
}

// ---------------------------------------------------------------- attack

int run_attack(const ProtocolFlags& pf, const std::string& adversary, std::size_t trials, std::uint64_t seed,
               bool list, const OutputFlags& out) {
  if (list) {
    json reg = json::array();
    for (const auto& a : adversary_registry())
      reg.push_back({{"protocol", protocol_name(a.kind)}, {"adversary", a.tag}, {"description", a.description}});
    emit({{"command", "attack"}, {"adversaries", reg}}, out);
    return 0;
  }
  if (pf.protocol.empty()) throw UsageError("--protocol is required");
  if (adversary.empty()) throw UsageError("--adversary is required");
  const ProtocolConfig cfg = protocol_config(pf);
  const auto rep = soundness_trial(cfg, adversary, trials, seed);
  json j = rep.to_json();
  j["command"] = "attack";
  j["params"] = cfg.params().to_json();
  j["seed"] = seed;
  emit(j, out);
  return rep.pass ? 0 : 1;
}

// ---------------------------------------------------------------- simulate

int run_simulate(const ProtocolFlags& pf, const std::string& verifier, std::size_t samples, std::uint64_t seed,
                 const std::string& dir, std::size_t views, const OutputFlags& out) {
  SimulationConfig c;
  c.protocol = protocol_config(pf, 4, true);
  c.verifier = verifier;
  c.samples = samples;
  c.seed = seed;
  const SimulationHarness h(c);
  json j = h.run();
  j["command"] = "simulate";
  if (!dir.empty()) {
    std::filesystem::create_directories(dir);
    const std::size_t count = std::min(views, samples);
    std::ofstream real(std::filesystem::path(dir) / "real_views.jsonl", std::ios::binary);
    std::ofstream sim(std::filesystem::path(dir) / "simulated_views.jsonl", std::ios::binary);
    if (!real || !sim) throw UsageError("cannot write views into " + dir);
    for (std::size_t i = 0; i < count; ++i) {
      const auto s = h.sample(i, true);
      real << s.real_view.to_json().dump() << "\n";
      sim << s.sim_view.to_json().dump() << "\n";
    }
    j["views_written"] = count;
    std::ofstream rep(std::filesystem::path(dir) / "report.json", std::ios::binary);
    rep << j.dump(2) << "\n";
  }
  emit(j, out);
  return j["pass"].get<bool>() ? 0 : 1;
}

// ---------------------------------------------------------------- sweep

int run_sweep(const std::string& protocol, const std::string& qs, const std::string& ds, const std::string& ms,
              const ProtocolFlags& base, std::size_t trials, std::uint64_t seed, const OutputFlags& out) {
  std::ostringstream csv;
  csv << "protocol,q,d,m,n,v,p,trials,accept_rate,peak_bits_max,peak_bits_mean,comm_setup_bits,"
         "comm_interactive_bits_mean,rounds_max\n";
  for (auto q : parse_list(qs))
    for (auto d : parse_list(ds))
      for (auto m : parse_list(ms)) {
        ProtocolFlags f = base;
        f.protocol = protocol;
        f.q = q;
        f.d = d;
        f.m = m;
        if (!f.n) f.n = 1;
        const ProtocolConfig cfg = protocol_config(f);
        const ProtocolParams P = cfg.params();
        const json s = protocol_run_summary(cfg, "honest", trials, seed);
        csv << protocol << ',' << q << ',' << d << ',' << m << ',' << P.n << ',' << P.v << ',' << P.p << ','
            << trials << ',' << s["accept_rate"].get<double>() << ',' << s["peak_bits_max"] << ','
            << s["peak_bits_mean"].get<double>() << ',' << s["comm_setup_bits"] << ','
            << s["comm_interactive_bits_mean"].get<double>() << ',' << s["rounds_max"] << '\n';
      }
  if (out.path.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream f(out.path, std::ios::binary);
    if (!f) throw UsageError("cannot write " + out.path);
    f << csv.str();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"streaming interactive proofs with zero knowledge"};
  app.require_subcommand(1);

  ProtocolFlags pf;
  MeterFlags mf;
  OutputFlags of;
  AppFlags af;
  std::uint64_t seed = 1;
  std::size_t trials = 1000, samples = 10000, views = 100;
  std::string prover = "honest", adversary, verifier = "honest", dir;
  std::string sweep_q = "64,256", sweep_d = "2,3", sweep_m = "2,3";
  bool list = false;

  auto* run = app.add_subcommand("run", "run a protocol or an application");
  auto* proto_opt = run->add_option("--protocol", pf.protocol, "pep | sumcheck | zk-pep | zk-sumcheck");
  auto* app_opt = run->add_option("--app", af.app, "index | point-query | range-count | selection | f2 | fk | inner-product");
  proto_opt->excludes(app_opt);
  add_protocol_flags(run, pf);
  add_meter_flags(run, mf);
  run->add_option("--trials", trials, "protocol trials")->capture_default_str();
  run->add_option("--prover", prover, "prover tag from the adversary registry")->capture_default_str();
  run->add_option("--seed", seed)->capture_default_str();
  run->add_option("--universe", af.universe, "symbol universe [1, universe]");
  run->add_option("--t", af.t, "claimed answer (default: the brute-force value)");
  run->add_option("--j", af.j, "queried index, 1-based");
  run->add_option("--k", af.k, "moment order, or selection candidate");
  run->add_option("--range", af.range, "suffix range index for range-count");
  run->add_option("--r", af.r, "selection rank");
  run->add_option("--phi", af.phi, "selection lower slack");
  run->add_option("--phi-prime", af.phi2, "selection upper slack");
  run->add_option("--M", af.M, "point-query magnitude bound");
  run->add_option("--primes", af.primes, "point-query moduli, comma separated");
  run->add_option("--stream", af.stream, "input stream, comma separated");
  run->add_option("--stream2", af.stream2, "second stream for inner-product");
  run->add_option("--delta", af.delta, "parameter trade-off in (0, 1]")->capture_default_str();
  run->add_option("--output", of.path, "write JSON here instead of stdout");

  auto* attack = app.add_subcommand("attack", "measure a cheating prover against its bound");
  attack->add_option("--protocol", pf.protocol, "pep | sumcheck | zk-pep | zk-sumcheck");
  attack->add_option("--adversary", adversary, "adversary tag");
  attack->add_option("--trials", trials)->capture_default_str();
  attack->add_option("--seed", seed)->capture_default_str();
  attack->add_flag("--list", list, "list registered adversaries");
  add_protocol_flags(attack, pf);
  attack->add_option("--output", of.path, "write JSON here instead of stdout");

  auto* simulate = app.add_subcommand("simulate", "compare real and simulated verifier views");
  simulate->add_option("--protocol", pf.protocol, "zk-pep (default) | zk-sumcheck");
  simulate->add_option("--verifier", verifier, "honest | j-plus-one | oblivious | opaque")->capture_default_str();
  simulate->add_option("--samples", samples)->capture_default_str();
  simulate->add_option("--seed", seed)->capture_default_str();
  simulate->add_option("--out", dir, "directory for view files and the report");
  simulate->add_option("--views", views, "views of each kind written to --out")->capture_default_str();
  add_protocol_flags(simulate, pf);

  auto* sweep = app.add_subcommand("sweep", "honest runs over a parameter grid, as CSV");
  sweep->add_option("--protocol", pf.protocol)->required();
  sweep->add_option("--q", sweep_q, "field orders")->capture_default_str();
  sweep->add_option("--d", sweep_d, "degrees")->capture_default_str();
  sweep->add_option("--m", sweep_m, "dimensions")->capture_default_str();
  sweep->add_option("--n", pf.n, "input length");
  sweep->add_option("--H", pf.H)->capture_default_str();
  sweep->add_option("--v-factor", pf.v_factor);
  sweep->add_flag("--allow-large-dm", pf.allow_large_dm);
  sweep->add_option("--trials", trials)->capture_default_str();
  sweep->add_option("--seed", seed)->capture_default_str();
  sweep->add_option("--output", of.path, "write CSV here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (run->parsed()) {
      const RunOptions opt = run_options(mf);
      if (!af.app.empty()) {
        af.n = pf.n.value_or(0);
        return run_app(af, pf, seed, opt, of);
      }
      if (pf.protocol.empty()) throw UsageError("run needs --protocol or --app");
      return run_protocol(pf, prover, trials, seed, opt, of);
    }
    if (attack->parsed()) {
      if (!attack->count("--trials")) trials = 10000;
      return run_attack(pf, adversary, trials, seed, list, of);
    }
    if (simulate->parsed()) {
      if (pf.protocol.empty()) pf.protocol = "zk-pep";
      return run_simulate(pf, verifier, samples, seed, dir, views, of);
    }
    if (sweep->parsed()) return run_sweep(pf.protocol, sweep_q, sweep_d, sweep_m, pf, trials, seed, of);
  } catch (const UnsupportedVerifier& e) {
    std::cerr << "unsupported verifier: " << e.what() << "\n";
    return 3;
  } catch (const SpaceBoundViolation& e) {
    std::cerr << "space bound exceeded: " << e.what() << "\n";
    return 4;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
