#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "zksip/poly.hpp"

namespace zksip {

using Symbol = std::int64_t;

// ceil(log2 n), at least 1: bits for an index into [n].
inline unsigned index_bits(std::uint64_t n) {
  unsigned b = 1;
  while (b < 64 && (std::uint64_t{1} << b) < n) ++b;
  return b;
}

// One-pass sequential access. Symbols come from a generator so long tapes
// need not be materialized.
template <class T>
class Tape {
 public:
  Tape(std::size_t length, std::function<T(std::size_t)> source) : length_(length), source_(std::move(source)) {}
  explicit Tape(std::vector<T> items)
      : length_(items.size()), owned_(std::make_shared<std::vector<T>>(std::move(items))) {
    auto data = owned_;
    source_ = [data](std::size_t i) { return (*data)[i]; };
  }

  std::size_t length() const { return length_; }
  std::size_t position() const { return cursor_; }
  bool done() const { return cursor_ >= length_; }

  T next() {
    if (cursor_ >= length_) throw StreamOverflow("read past the end of the tape");
    return source_(cursor_++);
  }

  // Only the current position can be read.
  T read_at(std::size_t i) {
    if (i != cursor_) throw OnePassViolation("tape position " + std::to_string(i) + " is not the cursor");
    return next();
  }

  void rewind() {
    if (cursor_ != 0) throw OnePassViolation("tape cannot be rewound");
  }

 private:
  std::size_t length_;
  std::size_t cursor_ = 0;
  std::function<T(std::size_t)> source_;
  std::shared_ptr<std::vector<T>> owned_;
};

enum class MeterMode {
  hard_fail,  // exceeding the budget throws
  record,     // exceeding the budget sets the violation flag
};

// Retained-bit accounting for one verifier.
class SpaceMeter {
 public:
  SpaceMeter() = default;
  SpaceMeter(std::optional<std::uint64_t> budget, MeterMode mode) : budget_(budget), mode_(mode) {}

  void charge(std::uint64_t bits, const char* what = "") {
    current_ += bits;
    if (current_ > peak_) peak_ = current_;
    if (budget_ && current_ > *budget_) {
      violated_ = true;
      if (mode_ == MeterMode::hard_fail)
        throw SpaceBoundViolation(*what ? std::string("space budget exceeded while storing ") + what
                                         : std::string("space budget exceeded"));
    }
  }

  void release(std::uint64_t bits) {
    if (bits > current_) throw AccountingError("released more bits than charged");
    current_ -= bits;
  }

  std::uint64_t current() const { return current_; }
  std::uint64_t peak() const { return peak_; }
  bool violated() const { return violated_; }
  std::optional<std::uint64_t> budget() const { return budget_; }

  nlohmann::json to_json() const {
    nlohmann::json j{{"peak_bits", peak_}, {"current_bits", current_}, {"violated", violated_}};
    if (budget_) j["budget_bits"] = *budget_;
    return j;
  }

 private:
  std::optional<std::uint64_t> budget_;
  MeterMode mode_ = MeterMode::record;
  std::uint64_t current_ = 0, peak_ = 0;
  bool violated_ = false;
};

// A value held by a verifier across stream symbols, charged while present.
template <class T>
class Retained {
 public:
  Retained() = default;
  Retained(SpaceMeter& meter, std::uint64_t bits) : meter_(&meter), bits_(bits) {}
  Retained(const Retained&) = delete;
  Retained& operator=(const Retained&) = delete;
  Retained(Retained&& o) noexcept { *this = std::move(o); }
  Retained& operator=(Retained&& o) noexcept {
    if (this != &o) {
      reset();
      meter_ = o.meter_;
      bits_ = o.bits_;
      value_ = std::move(o.value_);
      o.value_.reset();
    }
    return *this;
  }
  ~Retained() { reset(); }

  void bind(SpaceMeter& meter, std::uint64_t bits) {
    reset();
    meter_ = &meter;
    bits_ = bits;
  }

  void set(T v) {
    if (!meter_) throw AccountingError("retained slot without a meter");
    if (!value_) meter_->charge(bits_);
    value_ = std::move(v);
  }
  void reset() {
    if (value_ && meter_) meter_->release(bits_);
    value_.reset();
  }

  bool has() const { return value_.has_value(); }
  const T& get() const {
    if (!value_) throw UsageError("retained slot is empty");
    return *value_;
  }
  T& mut() {
    if (!value_) throw UsageError("retained slot is empty");
    return *value_;
  }
  std::uint64_t charged_bits() const { return value_ ? bits_ : 0; }

 private:
  SpaceMeter* meter_ = nullptr;
  std::uint64_t bits_ = 0;
  std::optional<T> value_;
};

// Bit-exact opaque encoding of retained state.
class BitString {
 public:
  void push(std::uint64_t value, unsigned bits) {
    for (unsigned i = 0; i < bits; ++i) {
      if (len_ % 8 == 0) bytes_.push_back(0);
      if ((value >> i) & 1) bytes_.back() |= static_cast<std::uint8_t>(1u << (len_ % 8));
      ++len_;
    }
  }
  void push_element(const Element& e) { push(e.repr(), e.field().bits()); }
  void push_point(const EvalPoint& p) {
    for (const auto& c : p) push_element(c);
  }

  std::uint64_t read(std::size_t& pos, unsigned bits) const {
    if (pos + bits > len_) throw RangeError("snapshot read past its end");
    std::uint64_t v = 0;
    for (unsigned i = 0; i < bits; ++i, ++pos)
      if ((bytes_[pos / 8] >> (pos % 8)) & 1) v |= std::uint64_t{1} << i;
    return v;
  }
  Element read_element(std::size_t& pos, const Field& f) const { return f.element(read(pos, f.bits())); }
  EvalPoint read_point(std::size_t& pos, const Field& f, std::size_t m) const {
    EvalPoint p(m);
    for (auto& c : p) c = read_element(pos, f);
    return p;
  }

  std::size_t bit_length() const { return len_; }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }
  bool operator==(const BitString&) const = default;

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t len_ = 0;
};

using Snapshot = BitString;

enum class Origin { randomness, prover, input };

inline const char* origin_name(Origin o) {
  switch (o) {
    case Origin::randomness: return "randomness";
    case Origin::prover: return "prover";
    case Origin::input: return "input";
  }
  return "?";
}

inline Origin origin_from_name(const std::string& s) {
  if (s == "randomness") return Origin::randomness;
  if (s == "prover") return Origin::prover;
  if (s == "input") return Origin::input;
  throw UsageError("unknown view origin " + s);
}

struct ViewEntry {
  Origin origin = Origin::prover;
  std::string label;
  std::uint64_t position = 0;  // symbol offset within the whole view
  unsigned width = 1;          // bytes per symbol
  std::vector<std::uint64_t> symbols;

  bool operator==(const ViewEntry&) const = default;
};

struct ScheduleSlot {
  Origin origin;
  std::string label;
};

// Everything the verifier sees, in order: its randomness (interleaved where it
// is drawn), the input, and the prover's messages.
class View {
 public:
  View() = default;
  View(const Field& f, nlohmann::json params, std::vector<ScheduleSlot> schedule = {})
      : field_(&f), params_(std::move(params)), schedule_(std::move(schedule)) {}

  const Field& field() const { return *field_; }
  const nlohmann::json& params() const { return params_; }
  const std::vector<ViewEntry>& entries() const { return entries_; }
  const std::optional<std::string>& termination() const { return termination_; }
  std::size_t symbol_count() const { return next_position_; }

  // A disabled view drops every entry; bulk trials use it to skip copying z.
  void disable() { enabled_ = false; }
  bool enabled() const { return enabled_; }

  void record(Origin origin, const std::string& label, std::vector<std::uint64_t> symbols, unsigned width) {
    if (!enabled_) return;
    if (termination_) throw ScheduleViolation("view is already terminated");
    if (origin != Origin::randomness && !schedule_.empty()) {
      if (cursor_ >= schedule_.size() || schedule_[cursor_].origin != origin || schedule_[cursor_].label != label)
        throw ScheduleViolation("out-of-schedule " + std::string(origin_name(origin)) + " entry '" + label + "'");
      ++cursor_;
    }
    ViewEntry e{origin, label, next_position_, width, std::move(symbols)};
    next_position_ += e.symbols.size();
    entries_.push_back(std::move(e));
  }

  void record_elements(Origin origin, const std::string& label, std::span<const Element> xs) {
    if (!enabled_) return;
    std::vector<std::uint64_t> s;
    s.reserve(xs.size());
    for (const auto& x : xs) s.push_back(x.repr());
    record(origin, label, std::move(s), field_->bytes());
  }
  void record_point(Origin origin, const std::string& label, const EvalPoint& p) {
    record_elements(origin, label, std::span<const Element>(p.data(), p.size()));
  }
  void record_index(Origin origin, const std::string& label, std::uint64_t i) { record(origin, label, {i}, 8); }
  void record_symbols(Origin origin, const std::string& label, std::span<const Symbol> xs) {
    std::vector<std::uint64_t> s;
    for (auto x : xs) s.push_back(static_cast<std::uint64_t>(x));
    record(origin, label, std::move(s), 8);
  }

  void terminate(std::string reason) {
    if (!termination_) termination_ = std::move(reason);
  }

  bool schedule_complete() const { return schedule_.empty() || cursor_ == schedule_.size(); }

  std::vector<std::pair<Origin, std::string>> layout() const {
    std::vector<std::pair<Origin, std::string>> out;
    for (const auto& e : entries_) out.emplace_back(e.origin, e.label);
    return out;
  }

  const ViewEntry* find(const std::string& label, std::size_t occurrence = 0) const {
    for (const auto& e : entries_)
      if (e.label == label && occurrence-- == 0) return &e;
    return nullptr;
  }

  // All symbols in order, for distinguishers that read the view as a stream.
  Tape<std::uint64_t> as_tape() const {
    std::vector<std::uint64_t> flat;
    for (const auto& e : entries_) flat.insert(flat.end(), e.symbols.begin(), e.symbols.end());
    return Tape<std::uint64_t>(std::move(flat));
  }

  std::vector<std::uint8_t> serialize() const {
    std::vector<std::uint8_t> out{'Z', 'K', 'V', '1'};
    auto put = [&](std::uint64_t v, unsigned width) {
      for (unsigned i = width; i-- > 0;) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    };
    auto put_string = [&](const std::string& s) {
      put(s.size(), 4);
      out.insert(out.end(), s.begin(), s.end());
    };
    put_string(field_->to_json().dump());
    put_string(params_.dump());
    put_string(termination_.value_or(""));
    put(termination_ ? 1 : 0, 1);
    put(entries_.size(), 8);
    for (const auto& e : entries_) {
      put(static_cast<std::uint64_t>(e.origin), 1);
      put_string(e.label);
      put(e.position, 8);
      put(e.width, 1);
      put(e.symbols.size(), 8);
      for (auto s : e.symbols) put(s, e.width);
    }
    return out;
  }

  static View deserialize(std::span<const std::uint8_t> in) {
    std::size_t pos = 0;
    auto get = [&](unsigned width) {
      if (pos + width > in.size()) throw RangeError("truncated view");
      std::uint64_t v = 0;
      for (unsigned i = 0; i < width; ++i) v = (v << 8) | in[pos++];
      return v;
    };
    auto get_string = [&] {
      const auto n = get(4);
      if (pos + n > in.size()) throw RangeError("truncated view");
      std::string s(in.begin() + static_cast<std::ptrdiff_t>(pos), in.begin() + static_cast<std::ptrdiff_t>(pos + n));
      pos += n;
      return s;
    };
    if (get(4) != 0x5A4B5631) throw UsageError("not a serialized view");
    View v;
    v.field_ = &Field::from_json(nlohmann::json::parse(get_string()));
    v.params_ = nlohmann::json::parse(get_string());
    auto term = get_string();
    if (get(1)) v.termination_ = term;
    const auto count = get(8);
    for (std::uint64_t i = 0; i < count; ++i) {
      ViewEntry e;
      e.origin = static_cast<Origin>(get(1));
      e.label = get_string();
      e.position = get(8);
      e.width = static_cast<unsigned>(get(1));
      const auto n = get(8);
      for (std::uint64_t k = 0; k < n; ++k) e.symbols.push_back(get(e.width));
      v.next_position_ = e.position + e.symbols.size();
      v.entries_.push_back(std::move(e));
    }
    if (pos != in.size()) throw UsageError("trailing bytes after view");
    return v;
  }

  nlohmann::json to_json() const {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : entries_) {
      std::string hex;
      static const char* digits = "0123456789abcdef";
      for (auto s : e.symbols)
        for (unsigned i = e.width; i-- > 0;) {
          const auto byte = static_cast<unsigned>((s >> (8 * i)) & 0xFF);
          hex.push_back(digits[byte >> 4]);
          hex.push_back(digits[byte & 15]);
        }
      entries.push_back({{"origin", origin_name(e.origin)},
                         {"label", e.label},
                         {"position", e.position},
                         {"width_bytes", e.width},
                         {"payload-hex", hex}});
    }
    nlohmann::json j{{"entries", entries}, {"field", field_->to_json()}, {"params", params_}};
    if (termination_) j["termination"] = *termination_;
    return j;
  }

  bool operator==(const View& o) const {
    return field_ == o.field_ && params_ == o.params_ && entries_ == o.entries_ && termination_ == o.termination_;
  }

 private:
  const Field* field_ = nullptr;
  nlohmann::json params_;
  std::vector<ScheduleSlot> schedule_;
  std::size_t cursor_ = 0;
  std::vector<ViewEntry> entries_;
  std::uint64_t next_position_ = 0;
  std::optional<std::string> termination_;
  bool enabled_ = true;
};

}  // namespace zksip
