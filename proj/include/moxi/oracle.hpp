#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <list>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "moxi/common.hpp"
#include "moxi/player_set.hpp"

namespace moxi {

/// A black-box set function f: 2^N -> R.
///
/// Implementations must be deterministic: equal coalitions return
/// bit-identical values, and every value (including f of the empty set) is
/// finite. Evaluation must be safe to call concurrently.
class RewardOracle {
 public:
  virtual ~RewardOracle() = default;

  virtual double value(const PlayerSet& s) const = 0;
  virtual PlayerSet grand_set() const = 0;
  virtual std::string name() const = 0;

  int player_count() const { return grand_set().player_count(); }
};

struct Prediction {
  int label = -1;
  double confidence = 0.0;
};

/// Classifier-style side channel next to the scalar reward. Stopping rules
/// and curve accuracies are defined through it.
class PredictionProbe {
 public:
  virtual ~PredictionProbe() = default;

  /// Predicted label and its confidence on the coalition s.
  virtual Prediction predict(const PlayerSet& s) const = 0;

  /// The label a correct prediction must match.
  virtual int expected_label() const = 0;
};

/// Full per-class confidence channel, required for class-discriminative
/// analyses where the reward switches between classes.
class ConfidenceProbe {
 public:
  virtual ~ConfidenceProbe() = default;

  virtual int player_count() const = 0;
  virtual int class_count() const = 0;

  /// Softmax confidences (sum to 1) on the coalition s.
  virtual std::vector<double> class_confidences(const PlayerSet& s) const = 0;
};

/// Wraps a callable (PlayerSet -> double) as an oracle; the workhorse for
/// fixture and table games.
template <typename Fn>
class FunctionOracle final : public RewardOracle {
 public:
  FunctionOracle(int n, std::string name, Fn fn)
      : n_(n), name_(std::move(name)), fn_(std::move(fn)) {}

  double value(const PlayerSet& s) const override { return fn_(s); }
  PlayerSet grand_set() const override { return PlayerSet::full_set(n_); }
  std::string name() const override { return name_; }

 private:
  int n_;
  std::string name_;
  Fn fn_;
};

template <typename Fn>
FunctionOracle<std::decay_t<Fn>> make_oracle(int n, std::string name, Fn&& fn) {
  return FunctionOracle<std::decay_t<Fn>>(n, std::move(name), std::forward<Fn>(fn));
}

/// Memoizing decorator with exact call accounting.
///
/// `call_count()` is the number of inner evaluations actually performed;
/// with sequential use that equals the number of distinct coalitions seen.
/// Lookups may run concurrently; two threads missing on the same coalition
/// may both evaluate (both are counted, the stored value is identical either
/// way). An optional capacity bounds the cache with least-recently-used
/// eviction; eviction can raise the call count but never changes values.
class CachedOracle final : public RewardOracle {
 public:
  explicit CachedOracle(const RewardOracle& inner, std::size_t capacity = 0)
      : inner_(&inner), capacity_(capacity), n_(inner.player_count()) {}

  CachedOracle(const CachedOracle&) = delete;
  CachedOracle& operator=(const CachedOracle&) = delete;

  double value(const PlayerSet& s) const override {
    check_universe(s);
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = cache_.find(s);
      if (it != cache_.end()) {
        if (capacity_ > 0) lru_.splice(lru_.begin(), lru_, it->second.pos);
        return it->second.value;
      }
    }
    // Miss: evaluate outside the lock so readers are never serialized
    // behind the inner oracle.
    const double v = inner_->value(s);
    if (!std::isfinite(v))
      throw ContractError(name() + ": non-finite reward for " + s.to_string());
    calls_.fetch_add(1, std::memory_order_relaxed);
    std::lock_guard<std::mutex> lock(mu_);
    store(s, v);
    return v;
  }

  /// Element-wise identical to sequential value(); output order matches
  /// input order. All coalitions are validated up front, so the first
  /// contract violation (lowest index) is reported deterministically.
  std::vector<double> value_batch(std::span<const PlayerSet> sets) const {
    for (const PlayerSet& s : sets) check_universe(s);
    std::vector<double> out;
    out.reserve(sets.size());
    for (const PlayerSet& s : sets) out.push_back(value(s));
    return out;
  }

  std::uint64_t call_count() const { return calls_.load(std::memory_order_relaxed); }

  std::size_t cache_size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return cache_.size();
  }

  PlayerSet grand_set() const override { return inner_->grand_set(); }
  std::string name() const override { return "cached(" + inner_->name() + ")"; }
  const RewardOracle& inner() const { return *inner_; }

 private:
  struct Entry {
    double value;
    std::list<PlayerSet>::iterator pos;  // valid only when capacity_ > 0
  };

  void check_universe(const PlayerSet& s) const {
    if (s.player_count() != n_)
      throw ContractError(name() + ": coalition over " +
                          std::to_string(s.player_count()) +
                          " players, oracle expects " + std::to_string(n_));
  }

  void store(const PlayerSet& s, double v) const {
    if (cache_.contains(s)) return;  // lost a race; values are identical
    Entry e{v, {}};
    if (capacity_ > 0) {
      lru_.push_front(s);
      e.pos = lru_.begin();
    }
    cache_.emplace(s, e);
    if (capacity_ > 0 && cache_.size() > capacity_) {
      cache_.erase(lru_.back());
      lru_.pop_back();
    }
  }

  const RewardOracle* inner_;
  std::size_t capacity_;
  int n_;
  mutable std::mutex mu_;
  mutable std::unordered_map<PlayerSet, Entry, PlayerSetHash> cache_;
  mutable std::list<PlayerSet> lru_;
  mutable std::atomic<std::uint64_t> calls_{0};
};

}  // namespace moxi
