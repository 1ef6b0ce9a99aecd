#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "zksip/poly.hpp"

namespace zksip {

enum class ProtocolKind { pep, zk_pep, sumcheck, zk_sumcheck };

inline const char* protocol_name(ProtocolKind k) {
  switch (k) {
    case ProtocolKind::pep: return "pep";
    case ProtocolKind::zk_pep: return "zk-pep";
    case ProtocolKind::sumcheck: return "sumcheck";
    case ProtocolKind::zk_sumcheck: return "zk-sumcheck";
  }
  return "?";
}

struct ParamOverrides {
  std::optional<std::size_t> v{};  // temporal commitment length
  std::optional<std::size_t> v_per_q_power{};  // v = c * q^m, for multi-field instances
  std::optional<std::size_t> p{};  // algebraic commitment length
  // Skip the dm <= q/10 gate; only for tests that probe small fields.
  bool allow_large_dm = false;
};

// Public parameters of one protocol instance. The formula values of v and p
// are always reported; v uses the formula unless overridden, p is capped at
// (d+1)^m so the commitment LDE lives in the same dimension as f.
struct ProtocolParams {
  ProtocolKind kind = ProtocolKind::pep;
  const Field* field = nullptr;
  std::size_t d = 1, m = 1, n = 0;
  std::vector<Element> H;
  std::size_t v = 0, p = 0;
  double v_formula = 0, p_formula = 0;
  bool v_overridden = false, p_overridden = false;
  std::size_t mc = 1;  // commitment LDE dimension

  const Field& f() const { return *field; }
  std::uint64_t q() const { return field->order(); }
  unsigned b() const { return field->bits(); }
  std::size_t grid() const {
    std::size_t g = 1;
    for (std::size_t j = 0; j < m; ++j) g *= d + 1;
    return g;
  }

  LdeSpec f_spec() const { return LdeSpec(*field, n, d, m, DomainKind::one_based); }
  LdeSpec commitment_spec() const { return LdeSpec(*field, p, d, mc, DomainKind::one_based); }
  std::size_t opening_degree() const { return d * mc; }
  // zk-pep commits to f|L at 1..dm; zk-sumcheck to each round polynomial on [d+1].
  std::size_t commitment_rows() const { return kind == ProtocolKind::zk_pep ? d * m : d + 1; }
  // Labels excluded from each coordinate of z and rho (zk-sumcheck uses F \ [d+1]).
  std::size_t temporal_excluded() const { return kind == ProtocolKind::zk_sumcheck ? d + 1 : 0; }
  std::uint64_t temporal_alphabet() const { return q() - temporal_excluded(); }
  double temporal_space() const { return std::pow(static_cast<double>(temporal_alphabet()), static_cast<double>(m)); }
  // Exact probability that rho matches none of the v entries.
  double miss_probability() const { return std::pow(1.0 - 1.0 / temporal_space(), static_cast<double>(v)); }

  static ProtocolParams pep(const Field& f, std::size_t d, std::size_t m, std::size_t n) {
    ProtocolParams r;
    r.kind = ProtocolKind::pep;
    r.field = &f;
    r.d = d;
    r.m = m;
    r.n = n;
    r.validate();
    return r;
  }

  static ProtocolParams sumcheck(const Field& f, std::size_t d, std::size_t m, std::vector<Element> H) {
    ProtocolParams r;
    r.kind = ProtocolKind::sumcheck;
    r.field = &f;
    r.d = d;
    r.m = m;
    r.H = std::move(H);
    r.validate();
    return r;
  }

  static ProtocolParams zk_pep(const Field& f, std::size_t d, std::size_t m, std::size_t n, ParamOverrides o = {}) {
    ProtocolParams r;
    r.kind = ProtocolKind::zk_pep;
    r.field = &f;
    r.d = d;
    r.m = m;
    r.n = n;
    const double q = static_cast<double>(f.order());
    r.v_formula = std::pow(q, double(m)) * (std::log2(double(m)) + std::log2(std::log2(q))) / 32.0;
    r.p_formula = double(m) * std::pow(double(d * m) * q, 3.0);
    r.finish(o);
    return r;
  }

  static ProtocolParams zk_sumcheck(const Field& f, std::size_t d, std::size_t m, std::size_t n, std::vector<Element> H,
                                    ParamOverrides o = {}) {
    ProtocolParams r;
    r.kind = ProtocolKind::zk_sumcheck;
    r.field = &f;
    r.d = d;
    r.m = m;
    r.n = n;
    r.H = std::move(H);
    const double q = static_cast<double>(f.order());
    r.v_formula = std::pow(q, double(m)) * (std::log2(double(m)) + std::log2(std::log2(q))) / 96.0;
    r.p_formula = std::pow(q, std::log2(std::log2(q)));
    r.finish(o);
    return r;
  }

  void validate() const {
    if (!field) throw ParameterError("missing field");
    if (d < 1 || m < 1) throw ParameterError("d and m must be positive");
    const std::uint64_t q = field->order();
    if (n > grid()) throw ParameterError("n exceeds (d+1)^m");
    switch (kind) {
      case ProtocolKind::pep:
        if (q <= d * m) throw ParameterError("pep needs q > dm");
        if (q <= d + 1) throw ParameterError("pep needs q > d + 1");
        break;
      case ProtocolKind::sumcheck:
        if (q <= d + 1) throw ParameterError("sumcheck needs q > d + 1");
        if (H.empty()) throw ParameterError("empty summation set");
        break;
      case ProtocolKind::zk_pep:
      case ProtocolKind::zk_sumcheck:
        if (!allow_large_dm && 10 * d * m > q) throw ParameterError("dm must be at most q/10");
        if (q <= d * m + 1) throw ParameterError("no challenge outside {0} and [dm]");
        if (q <= opening_degree() + 1) throw ParameterError("opening degree too large for the field");
        if (q <= d + 1) throw ParameterError("field too small for the interpolation domain");
        if (v < 1 || p < 1) throw ParameterError("commitment lengths must be positive");
        if (kind == ProtocolKind::zk_sumcheck && H.empty()) throw ParameterError("empty summation set");
        break;
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json j{{"protocol", protocol_name(kind)}, {"field", field->to_json()}, {"d", d}, {"m", m}, {"n", n}};
    if (!H.empty()) {
      std::vector<std::uint32_t> h;
      for (const auto& e : H) h.push_back(e.repr());
      j["H"] = h;
    }
    if (kind == ProtocolKind::zk_pep || kind == ProtocolKind::zk_sumcheck) {
      j["v"] = v;
      j["p"] = p;
      j["v_formula"] = v_formula;
      j["p_formula"] = p_formula;
      j["v_overridden"] = v_overridden;
      j["p_overridden"] = p_overridden;
      j["commitment_dimension"] = mc;
    }
    return j;
  }

  bool allow_large_dm = false;

 private:
  void finish(const ParamOverrides& o) {
    allow_large_dm = o.allow_large_dm;
    if (o.v_per_q_power) {
      v = *o.v_per_q_power;
      for (std::size_t j = 0; j < m; ++j) v *= static_cast<std::size_t>(q());
    } else {
      v = o.v ? *o.v : static_cast<std::size_t>(std::max(1.0, std::ceil(v_formula)));
    }
    v_overridden = o.v.has_value() || o.v_per_q_power.has_value();
    const double cap = static_cast<double>(grid());
    p = o.p ? *o.p : static_cast<std::size_t>(std::max(1.0, std::min(std::ceil(p_formula), cap)));
    p_overridden = o.p.has_value();
    mc = 1;
    std::size_t g = d + 1;
    while (g < p) {
      g *= d + 1;
      ++mc;
    }
    validate();
  }
};

}  // namespace zksip
