#pragma once

#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "ccyopt/simulators.hpp"

namespace ccyopt {

// Runs an external executable speaking the row protocol: the child receives
// CSV on stdin with header x1,...,xd1,xi1,...,xid2 (one row per sample at
// %.17g precision) and answers on stdout with header m1,...,mn and one CSV
// row per input row in the same order. Anything on stderr is passed through;
// exit code 0 means success. Results are cached by the exact (x, xi) bytes.
class ExternalSimulator final : public Simulator {
 public:
  struct Options {
    std::string command;  // run through /bin/sh -c
    int design_dim = 0;
    int noise_dim = 0;
    std::vector<std::string> metric_names;
    double timeout_s = 300.0;
  };

  explicit ExternalSimulator(Options options);

  std::string name() const override { return "external"; }
  int design_dim() const override { return options_.design_dim; }
  int noise_dim() const override { return options_.noise_dim; }
  std::vector<std::string> metric_names() const override { return options_.metric_names; }

  Vector evaluate(const Vector& x, const Vector& xi) const override;
  Matrix evaluate_batch(const Matrix& xp) const override;

  void set_cache_enabled(bool enabled) { cache_enabled_ = enabled; }

 private:
  Matrix run_child(const Matrix& xp) const;

  Options options_;
  bool cache_enabled_ = true;
  mutable std::mutex mutex_;  // one child at a time; also guards the cache
  mutable std::unordered_map<std::string, Vector> cache_;
};

}  // namespace ccyopt
