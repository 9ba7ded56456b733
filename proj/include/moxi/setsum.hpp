#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "moxi/common.hpp"
#include "moxi/oracle.hpp"
#include "moxi/player_set.hpp"

namespace moxi {

/// The Set-Sum game: each player carries an integer value and a coalition's
/// reward is the sum of the *distinct* values present, so duplicated values
/// are pure information redundancy. The instance label is the reward of the
/// grand coalition.
struct SetSumGame {
  std::vector<int> values;
  int label = 0;

  static SetSumGame from_values(std::vector<int> values) {
    SetSumGame game;
    game.values = std::move(values);
    if (game.values.empty()) throw ContractError("SetSumGame: no players");
    game.label = game.distinct_sum_all();
    return game;
  }

  int player_count() const { return static_cast<int>(values.size()); }

  int distinct_sum(const PlayerSet& s) const {
    std::vector<int> seen;
    seen.reserve(static_cast<std::size_t>(s.cardinality()));
    s.for_each_member([&](int p) { seen.push_back(values[static_cast<std::size_t>(p)]); });
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    int total = 0;
    for (int v : seen) total += v;
    return total;
  }

 private:
  int distinct_sum_all() const {
    return distinct_sum(PlayerSet::full_set(player_count()));
  }
};

inline double setsum_reward(const SetSumGame& game, const PlayerSet& s) {
  if (s.player_count() != game.player_count())
    throw ContractError("setsum_reward: coalition universe does not match game");
  return static_cast<double>(game.distinct_sum(s));
}

/// Set-Sum as a reward oracle. The "prediction" of a coalition is its
/// rounded reward, so stopping rules and accuracies treat sum prediction as
/// classification.
class SetSumOracle final : public RewardOracle, public PredictionProbe {
 public:
  explicit SetSumOracle(SetSumGame game) : game_(std::move(game)) {}

  double value(const PlayerSet& s) const override { return setsum_reward(game_, s); }
  PlayerSet grand_set() const override {
    return PlayerSet::full_set(game_.player_count());
  }
  std::string name() const override { return "set-sum"; }

  Prediction predict(const PlayerSet& s) const override {
    return {static_cast<int>(std::llround(value(s))), 1.0};
  }
  int expected_label() const override { return game_.label; }

  const SetSumGame& game() const { return game_; }

 private:
  SetSumGame game_;
};

}  // namespace moxi
