#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "moxi/common.hpp"
#include "moxi/oracle.hpp"
#include "moxi/player_set.hpp"
#include "moxi/rng.hpp"
#include "moxi/shapley.hpp"

namespace moxi {

enum class Direction { insertion, deletion };

inline const char* to_string(Direction d) {
  return d == Direction::insertion ? "insertion" : "deletion";
}

enum class StopMode { full, on_correct, on_incorrect, threshold };

inline const char* to_string(StopMode m) {
  switch (m) {
    case StopMode::full: return "full";
    case StopMode::on_correct: return "on-correct";
    case StopMode::on_incorrect: return "on-incorrect";
    case StopMode::threshold: return "threshold";
  }
  return "unknown";
}

/// When a selection run halts. `threshold` stops once the prediction is
/// correct AND its confidence reaches tau; tau = 0 degenerates to
/// on_correct. Non-full modes require a PredictionProbe.
struct StoppingRule {
  StopMode mode = StopMode::full;
  double tau = 0.0;
};

/// Ordered player picks of one selection run, with per-step diagnostics.
/// step_rewards[k] is f(S_k) for insertion and f(N \ S_k) for deletion;
/// oracle_calls[k] is the cumulative evaluation count after step k.
struct SelectionTrace {
  Direction direction = Direction::insertion;
  std::string method;
  int players = 0;
  std::vector<int> order;
  std::vector<double> step_scores;
  std::vector<double> step_rewards;
  std::vector<int> step_predictions;  // empty when no probe was supplied
  std::vector<std::uint64_t> oracle_calls;
  bool exhausted = false;  // class-discriminative phase 1 never reached its target
};

namespace detail {

inline void check_stop_rule(const StoppingRule& stop, const PredictionProbe* probe) {
  if (stop.mode != StopMode::full && probe == nullptr)
    throw ContractError(std::string("stopping mode '") + to_string(stop.mode) +
                        "' requires a prediction probe");
  if (stop.tau < 0.0 || stop.tau > 1.0)
    throw ContractError("stopping threshold tau must lie in [0, 1]");
}

inline bool stop_here(const StoppingRule& stop, const Prediction& p, int expected) {
  switch (stop.mode) {
    case StopMode::full: return false;
    case StopMode::on_correct: return p.label == expected;
    case StopMode::on_incorrect: return p.label != expected;
    case StopMode::threshold:
      return p.label == expected && p.confidence >= stop.tau;
  }
  return false;
}

/// Shared trace assembly for static (precomputed-order) rankings.
inline SelectionTrace trace_from_ranking(const CachedOracle& oracle,
                                         std::vector<std::pair<double, int>> ranked,
                                         Direction direction, const StoppingRule& stop,
                                         const PredictionProbe* probe,
                                         std::string method) {
  check_stop_rule(stop, probe);
  const int n = oracle.player_count();
  // descending score, ties to the lowest player index
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });

  SelectionTrace trace;
  trace.direction = direction;
  trace.method = std::move(method);
  trace.players = n;

  const PlayerSet grand = oracle.grand_set();
  PlayerSet picked(n);
  for (const auto& [score, player] : ranked) {
    picked.add(player);
    const PlayerSet state =
        direction == Direction::insertion ? picked : grand.difference(picked);
    trace.order.push_back(player);
    trace.step_scores.push_back(score);
    trace.step_rewards.push_back(oracle.value(state));
    trace.oracle_calls.push_back(oracle.call_count());
    if (probe != nullptr) {
      const Prediction p = probe->predict(state);
      trace.step_predictions.push_back(p.label);
      if (stop_here(stop, p, probe->expected_label())) break;
    }
  }
  return trace;
}

/// Greedy deletion starting from an already-removed coalition; the public
/// entry point and class-discriminative phase 2 both land here.
inline SelectionTrace greedy_deletion_from(const CachedOracle& oracle,
                                           PlayerSet removed,
                                           const StoppingRule& stop,
                                           const PredictionProbe* probe,
                                           std::string method) {
  check_stop_rule(stop, probe);
  const int n = oracle.player_count();
  const PlayerSet grand = oracle.grand_set();
  const double reward_full = oracle.value(grand.difference(removed));

  SelectionTrace trace;
  trace.direction = Direction::deletion;
  trace.method = std::move(method);
  trace.players = n;

  while (removed.cardinality() < n) {
    double best_reward = std::numeric_limits<double>::infinity();
    int best_player = -1;
    const PlayerSet remaining = grand.difference(removed);
    remaining.for_each_member([&](int b) {
      const double r = oracle.value(remaining.without(b));
      if (r < best_reward) {  // strict: ties keep the lowest index
        best_reward = r;
        best_player = b;
      }
    });

    removed.add(best_player);
    // Winning score: the Eq.-(12)-style three-term sum collapses to
    // c * [f(N) - f(N \ (S+b))] with c = 1 / (#remaining players).
    const double c = 1.0 / static_cast<double>(remaining.cardinality());
    trace.order.push_back(best_player);
    trace.step_scores.push_back(c * (reward_full - best_reward));
    trace.step_rewards.push_back(best_reward);
    trace.oracle_calls.push_back(oracle.call_count());
    if (probe != nullptr) {
      const Prediction p = probe->predict(grand.difference(removed));
      trace.step_predictions.push_back(p.label);
      if (stop_here(stop, p, probe->expected_label())) break;
    }
  }
  return trace;
}

}  // namespace detail

/// Greedy insertion (the MoXI forward pass): step k adds the player
/// maximizing f(S + b), ties to the lowest index. The recorded step score is
/// the equivalent decomposition phi0(b) + I0(S, b).
inline SelectionTrace greedy_insertion(const CachedOracle& oracle,
                                       const StoppingRule& stop = {},
                                       const PredictionProbe* probe = nullptr) {
  detail::check_stop_rule(stop, probe);
  const int n = oracle.player_count();
  if (n < 1) throw ContractError("greedy_insertion: no players");
  const PlayerSet grand = oracle.grand_set();
  const double reward_empty = oracle.value(PlayerSet(n));

  SelectionTrace trace;
  trace.direction = Direction::insertion;
  trace.method = "moxi";
  trace.players = n;

  PlayerSet current(n);
  while (current.cardinality() < n) {
    double best_reward = -std::numeric_limits<double>::infinity();
    int best_player = -1;
    grand.difference(current).for_each_member([&](int b) {
      const double r = oracle.value(current.with(b));
      if (r > best_reward) {
        best_reward = r;
        best_player = b;
      }
    });

    // Decomposition of the winning margin into the self-context Shapley
    // value of b plus its interaction with the already-selected coalition;
    // all four evaluations are cache hits.
    const double phi0 = oracle.value(PlayerSet::single(n, best_player)) - reward_empty;
    const double inter = best_reward - oracle.value(current) -
                         oracle.value(PlayerSet::single(n, best_player)) + reward_empty;

    current.add(best_player);
    trace.order.push_back(best_player);
    trace.step_scores.push_back(phi0 + inter);
    trace.step_rewards.push_back(best_reward);
    trace.oracle_calls.push_back(oracle.call_count());
    if (probe != nullptr) {
      const Prediction p = probe->predict(current);
      trace.step_predictions.push_back(p.label);
      if (detail::stop_here(stop, p, probe->expected_label())) break;
    }
  }
  return trace;
}

/// Greedy deletion (the MoXI backward pass): step k removes the player
/// minimizing f(N \ (S + b)), ties to the lowest index.
inline SelectionTrace greedy_deletion(const CachedOracle& oracle,
                                      const StoppingRule& stop = {},
                                      const PredictionProbe* probe = nullptr) {
  const int n = oracle.player_count();
  if (n < 1) throw ContractError("greedy_deletion: no players");
  return detail::greedy_deletion_from(oracle, PlayerSet(n), stop, probe, "moxi");
}

/// MoXI(-) baseline: a static descending ranking by the self-context
/// Shapley value f({b}) - f(empty) alone, no interaction terms.
inline SelectionTrace moxi_minus_ranking(const CachedOracle& oracle,
                                         Direction direction = Direction::insertion,
                                         const StoppingRule& stop = {},
                                         const PredictionProbe* probe = nullptr) {
  const int n = oracle.player_count();
  if (n < 1) throw ContractError("moxi_minus_ranking: no players");
  std::vector<std::pair<double, int>> ranked;
  ranked.reserve(static_cast<std::size_t>(n));
  for (int b = 0; b < n; ++b)
    ranked.emplace_back(self_context_shapley(oracle, b).value, b);
  return detail::trace_from_ranking(oracle, std::move(ranked), direction, stop, probe,
                                    "moxi-minus");
}

/// Shapley-value baseline: static descending ranking by phi(b | N), exact
/// when the grand coalition is within the enumeration limit, otherwise the
/// permutation-sampling estimate under `cfg`.
inline SelectionTrace shapley_ranking(const CachedOracle& oracle,
                                      const SamplingConfig& cfg = {},
                                      Direction direction = Direction::insertion,
                                      const StoppingRule& stop = {},
                                      const PredictionProbe* probe = nullptr,
                                      int exact_limit = kExactEnumerationLimit) {
  const int n = oracle.player_count();
  if (n < 1) throw ContractError("shapley_ranking: no players");
  const PlayerSet grand = oracle.grand_set();
  std::vector<std::pair<double, int>> ranked;
  ranked.reserve(static_cast<std::size_t>(n));
  for (int b = 0; b < n; ++b) {
    const double score = n <= exact_limit
                             ? exact_shapley(oracle, grand, b, exact_limit).value
                             : mc_shapley(oracle, grand, b, cfg).value;
    ranked.emplace_back(score, b);
  }
  return detail::trace_from_ranking(oracle, std::move(ranked), direction, stop, probe,
                                    "shapley");
}

/// Seeded uniformly-random ordering baseline.
inline SelectionTrace random_ranking(const CachedOracle& oracle, std::uint64_t seed,
                                     Direction direction = Direction::insertion,
                                     const StoppingRule& stop = {},
                                     const PredictionProbe* probe = nullptr) {
  const int n = oracle.player_count();
  if (n < 1) throw ContractError("random_ranking: no players");
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int b = 0; b < n; ++b) order[static_cast<std::size_t>(b)] = b;
  Rng rng(seed);
  rng.shuffle(order);
  // Encode the drawn order as strictly decreasing pseudo-scores so the
  // shared ranking path preserves it.
  std::vector<std::pair<double, int>> ranked;
  ranked.reserve(order.size());
  for (std::size_t k = 0; k < order.size(); ++k)
    ranked.emplace_back(static_cast<double>(order.size() - k), order[k]);
  return detail::trace_from_ranking(oracle, std::move(ranked), direction, stop, probe,
                                    "random");
}

/// Class-discriminative targeting configuration. The paper's switched
/// reward prints its second term without a log; the default applies the log
/// (symmetric with the first term), the flag restores the printed raw-odds
/// form.
struct TargetClassConfig {
  int target_label = 0;
  bool use_log_on_second_term = true;
};

struct ClassDiscriminativeResult {
  SelectionTrace phase1;
  SelectionTrace phase2;
  bool target_reached = false;
};

namespace detail {

/// Reward + prediction adapter over a confidence probe for a fixed class.
class TargetClassOracle final : public RewardOracle, public PredictionProbe {
 public:
  TargetClassOracle(const ConfidenceProbe& probe, int target)
      : probe_(&probe), target_(target) {}

  double value(const PlayerSet& s) const override {
    return log_odds(probe_->class_confidences(s)[static_cast<std::size_t>(target_)]);
  }
  PlayerSet grand_set() const override {
    return PlayerSet::full_set(probe_->player_count());
  }
  std::string name() const override {
    return "target-class-" + std::to_string(target_);
  }
  Prediction predict(const PlayerSet& s) const override {
    const std::vector<double> conf = probe_->class_confidences(s);
    const int label = argmax_index(conf);
    return {label, conf[static_cast<std::size_t>(label)]};
  }
  int expected_label() const override { return target_; }

 private:
  const ConfidenceProbe* probe_;
  int target_;
};

}  // namespace detail

/// Two-phase class-discriminative deletion. Phase 1 removes, one at a time,
/// the patch whose removal most lowers [odds of the currently predicted
/// class] minus [odds of the target class], until the target becomes the
/// argmax class; the reward re-targets whenever the prediction drifts.
/// Phase 2 then greedily deletes under the plain target-class reward until
/// the prediction changes again. If phase 1 exhausts all players without
/// reaching the target, its trace is returned with the exhausted flag set.
inline ClassDiscriminativeResult class_discriminative_deletion(
    const ConfidenceProbe& model, const TargetClassConfig& cfg) {
  const int n = model.player_count();
  if (n < 1) throw ContractError("class_discriminative_deletion: no players");
  if (cfg.target_label < 0 || cfg.target_label >= model.class_count())
    throw ContractError("class_discriminative_deletion: target label " +
                        std::to_string(cfg.target_label) + " outside " +
                        std::to_string(model.class_count()) + " classes");

  const PlayerSet grand = PlayerSet::full_set(n);
  std::uint64_t forwards = 0;
  const auto confidences = [&](const PlayerSet& s) {
    ++forwards;
    return model.class_confidences(s);
  };
  const auto switched_reward = [&](const std::vector<double>& conf, int predicted) {
    const double first = log_odds(conf[static_cast<std::size_t>(predicted)]);
    const double p_target = conf[static_cast<std::size_t>(cfg.target_label)];
    const double second =
        cfg.use_log_on_second_term ? log_odds(p_target) : raw_odds(p_target);
    return first - second;
  };

  ClassDiscriminativeResult result;
  result.phase1.direction = Direction::deletion;
  result.phase1.method = "class-discriminative:phase1";
  result.phase1.players = n;

  PlayerSet removed(n);
  int predicted = argmax_index(confidences(grand));

  while (predicted != cfg.target_label && removed.cardinality() < n) {
    double best_reward = std::numeric_limits<double>::infinity();
    int best_player = -1;
    std::vector<double> best_conf;
    const PlayerSet remaining = grand.difference(removed);
    remaining.for_each_member([&](int b) {
      std::vector<double> conf = confidences(remaining.without(b));
      const double r = switched_reward(conf, predicted);
      if (r < best_reward) {
        best_reward = r;
        best_player = b;
        best_conf = std::move(conf);
      }
    });

    removed.add(best_player);
    predicted = argmax_index(best_conf);
    result.phase1.order.push_back(best_player);
    result.phase1.step_scores.push_back(best_reward);
    result.phase1.step_rewards.push_back(best_reward);
    result.phase1.step_predictions.push_back(predicted);
    result.phase1.oracle_calls.push_back(forwards);
  }

  result.target_reached = predicted == cfg.target_label;
  if (!result.target_reached) {
    result.phase1.exhausted = true;
    result.phase2.direction = Direction::deletion;
    result.phase2.method = "class-discriminative:phase2";
    result.phase2.players = n;
    return result;
  }

  const detail::TargetClassOracle target_oracle(model, cfg.target_label);
  const CachedOracle cached(target_oracle);
  result.phase2 = detail::greedy_deletion_from(cached, removed,
                                               {StopMode::on_incorrect, 0.0},
                                               &target_oracle,
                                               "class-discriminative:phase2");
  return result;
}

}  // namespace moxi
