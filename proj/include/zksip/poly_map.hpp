#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "zksip/poly.hpp"
#include "zksip/stream.hpp"

namespace zksip {

// Streaming evaluation of f^x at a fixed point.
class StreamEvaluator {
 public:
  virtual ~StreamEvaluator() = default;
  virtual void consume(Symbol s) = 0;
  virtual Element value() const = 0;
};

// x -> f^x, an m-variate polynomial of individual degree d whose value at a
// point is computable in one pass with accumulators() field elements.
class StreamPolyMap {
 public:
  virtual ~StreamPolyMap() = default;
  virtual std::string name() const = 0;
  virtual const Field& field() const = 0;
  virtual std::size_t degree() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual std::size_t accumulators() const { return 1; }
  virtual std::unique_ptr<StreamEvaluator> evaluator(const EvalPoint& point) const = 0;
  // Offline evaluation with random access to x.
  virtual Element evaluate(std::span<const Symbol> x, const EvalPoint& point) const = 0;

  Element stream_evaluate(std::span<const Symbol> x, const EvalPoint& point) const {
    auto e = evaluator(point);
    for (auto s : x) e->consume(s);
    return e->value();
  }

  PointFunction bind(std::span<const Symbol> x) const {
    std::vector<Symbol> copy(x.begin(), x.end());
    return [this, copy](const EvalPoint& p) { return evaluate(copy, p); };
  }
};

// f^x = x-hat for x in F^n; symbols are element representatives.
class LdeMap : public StreamPolyMap {
 public:
  explicit LdeMap(LdeSpec spec) : spec_(std::move(spec)) {}

  std::string name() const override { return "lde"; }
  const Field& field() const override { return spec_.field(); }
  std::size_t degree() const override { return spec_.d(); }
  std::size_t dimension() const override { return spec_.m(); }
  const LdeSpec& spec() const { return spec_; }

  std::vector<Element> decode(std::span<const Symbol> x) const {
    std::vector<Element> out;
    for (auto s : x) out.push_back(field().element(static_cast<std::uint64_t>(s)));
    return out;
  }

  std::unique_ptr<StreamEvaluator> evaluator(const EvalPoint& point) const override {
    struct Eval : StreamEvaluator {
      Eval(const LdeSpec& s, const EvalPoint& p) : fp(s, p) {}
      void consume(Symbol s) override {
        if (s < 0) throw RangeError("negative field symbol");
        fp.update(fp.value().field().element(static_cast<std::uint64_t>(s)));
      }
      Element value() const override { return fp.value(); }
      Fingerprint fp;
    };
    return std::make_unique<Eval>(spec_, point);
  }

  Element evaluate(std::span<const Symbol> x, const EvalPoint& point) const override {
    const auto xs = decode(x);
    return lde_eval(spec_, xs, point);
  }

 private:
  LdeSpec spec_;
};

}  // namespace zksip
