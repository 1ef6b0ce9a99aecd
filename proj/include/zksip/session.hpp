#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "json.hpp"
#include "zksip/poly.hpp"
#include "zksip/stream.hpp"

namespace zksip {

enum class Decision { accept, reject };

inline const char* decision_name(Decision d) { return d == Decision::accept ? "accept" : "reject"; }

enum class Termination {
  completed,
  rejected_at_setup,    // verifier found no temporal match
  early_decision,       // rho coincided with the claimed point
  prover_abort,         // temporal certificate refused
  sim_abort_line,       // challenge line misses the claimed point
  sim_abort_temporal,   // certificate fails the prover-side checks
  sim_abort_capture,    // certificate outside the capture set
  sim_abort_opening,    // opening line misses k
};

inline const char* termination_name(Termination t) {
  switch (t) {
    case Termination::completed: return "completed";
    case Termination::rejected_at_setup: return "rejected-at-setup";
    case Termination::early_decision: return "early-decision";
    case Termination::prover_abort: return "prover-abort";
    case Termination::sim_abort_line: return "simulator-abort-line";
    case Termination::sim_abort_temporal: return "simulator-abort-temporal";
    case Termination::sim_abort_capture: return "simulator-abort-capture";
    case Termination::sim_abort_opening: return "simulator-abort-opening";
  }
  return "?";
}

inline bool is_simulator_abort(Termination t) {
  return t == Termination::sim_abort_line || t == Termination::sim_abort_temporal ||
         t == Termination::sim_abort_capture || t == Termination::sim_abort_opening;
}

struct RunOptions {
  bool record_view = true;
  // Compare the meter with the verifier's retained slots after every step.
  bool audit = false;
  std::optional<std::uint64_t> budget_bits;
  MeterMode meter_mode = MeterMode::record;
};

struct SessionMetrics {
  Decision decision = Decision::reject;
  std::uint64_t peak_bits = 0;
  std::uint64_t setup_bits = 0;
  std::uint64_t interactive_bits = 0;
  std::size_t rounds = 0;
  bool space_violation = false;

  nlohmann::json to_json() const {
    return {{"decision", decision_name(decision)},
            {"peak_bits", peak_bits},
            {"comm_setup_bits", setup_bits},
            {"comm_interactive_bits", interactive_bits},
            {"rounds", rounds},
            {"space_violation", space_violation}};
  }
};

// The verifier's coins. Every draw is also written to the view, where it is
// drawn, as a randomness entry.
class VerifierCoins {
 public:
  VerifierCoins(std::uint64_t seed, View* view) : rng_(seed), view_(view) {}

  Element element(const std::string& label, const Field& f, std::span<const Element> excluded = {}) {
    const Element e = excluded.empty() ? f.sample(rng_) : f.sample_excluding(rng_, excluded);
    if (view_) view_->record_elements(Origin::randomness, label, std::span<const Element>(&e, 1));
    return e;
  }

  EvalPoint point(const std::string& label, const Field& f, std::size_t m, std::span<const Element> excluded = {}) {
    EvalPoint p(m);
    for (auto& c : p) c = excluded.empty() ? f.sample(rng_) : f.sample_excluding(rng_, excluded);
    if (view_) view_->record_point(Origin::randomness, label, p);
    return p;
  }

  std::size_t index(const std::string& label, std::size_t n) {
    const auto i = static_cast<std::size_t>(rng_.below(n));
    if (view_) view_->record_index(Origin::randomness, label, i);
    return i;
  }

  Rng& rng() { return rng_; }

 private:
  Rng rng_;
  View* view_;
};

}  // namespace zksip
