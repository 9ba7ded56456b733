#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "moxi/common.hpp"
#include "moxi/oracle.hpp"
#include "moxi/player_set.hpp"
#include "moxi/rng.hpp"

namespace moxi {

enum class ScoreKind {
  shapley,
  deletion_shapley,
  interaction,
  self_context_shapley,
  self_context_interaction,
  full_context_deletion_shapley,
  full_context_deletion_interaction,
};

inline const char* to_string(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::shapley: return "shapley";
    case ScoreKind::deletion_shapley: return "deletion_shapley";
    case ScoreKind::interaction: return "interaction";
    case ScoreKind::self_context_shapley: return "self_context_shapley";
    case ScoreKind::self_context_interaction: return "self_context_interaction";
    case ScoreKind::full_context_deletion_shapley:
      return "full_context_deletion_shapley";
    case ScoreKind::full_context_deletion_interaction:
      return "full_context_deletion_interaction";
  }
  return "unknown";
}

struct AttributionScore {
  int player = -1;   // primary player (b in pair and merged forms)
  int partner = -1;  // second player of a pair form, else -1
  double value = 0.0;
  ScoreKind kind = ScoreKind::shapley;
  PlayerSet context;  // the coalition the score was computed against
};

struct SamplingConfig {
  int sample_size = 200;
  std::uint64_t seed = 0;
};

/// Exact enumeration is refused above this many context players; use the
/// Monte-Carlo estimator instead.
inline constexpr int kExactEnumerationLimit = 20;

namespace detail {

inline void check_exact_limit(int context_size, const char* op, int limit) {
  if (context_size > limit)
    throw EnumerationLimitError(
        std::string(op) + ": context of " + std::to_string(context_size) +
        " players exceeds the exact enumeration limit of " +
        std::to_string(limit) + "; use mc_shapley / sampling instead");
}

/// Binomial row C(m, 0..m); exact in 64 bits for every m this module allows.
inline std::vector<std::uint64_t> binomial_row(int m) {
  std::vector<std::uint64_t> row(static_cast<std::size_t>(m) + 1, 1);
  for (int a = 1; a <= m; ++a)
    row[static_cast<std::size_t>(a)] =
        row[static_cast<std::size_t>(a - 1)] *
        static_cast<std::uint64_t>(m - a + 1) / static_cast<std::uint64_t>(a);
  return row;
}

/// Weights of Eq.-(1)-style averages over subsets of m free players:
/// P(A|B) = (|B|-|A|)! |A|! / (|B|+1)!  ==  1 / ((m+1) * C(m, a)) at |B| = m.
inline std::vector<double> insertion_weights(int m) {
  const auto binom = binomial_row(m);
  std::vector<double> w(static_cast<std::size_t>(m) + 1);
  for (int a = 0; a <= m; ++a)
    w[static_cast<std::size_t>(a)] =
        1.0 / (static_cast<double>(m + 1) * static_cast<double>(binom[static_cast<std::size_t>(a)]));
  return w;
}

/// Deletion-form weights over a context of M players:
/// P_d(A|B) = (|B|-|A|-1)! |A|! / |B|!  ==  1 / (M * C(M-1, a)).
inline std::vector<double> deletion_weights(int M) {
  const auto binom = binomial_row(M - 1);
  std::vector<double> w(static_cast<std::size_t>(M));
  for (int a = 0; a < M; ++a)
    w[static_cast<std::size_t>(a)] =
        1.0 / (static_cast<double>(M) * static_cast<double>(binom[static_cast<std::size_t>(a)]));
  return w;
}

/// Visits every subset of `support` (including empty and full) as a
/// PlayerSet over the same universe, together with its cardinality.
template <typename Fn>
void for_each_subset(const PlayerSet& support, Fn&& fn) {
  const std::vector<int> idx = support.members();
  const int m = static_cast<int>(idx.size());
  const std::uint64_t count = std::uint64_t{1} << m;
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    PlayerSet s(support.player_count());
    for (int b = 0; b < m; ++b)
      if ((mask >> b) & 1u) s.add(idx[static_cast<std::size_t>(b)]);
    fn(s, std::popcount(mask));
  }
}

}  // namespace detail

/// Average marginal contribution of `block` joining subsets of `others`,
/// with `block` treated as a single (possibly merged) player. The plain
/// Shapley value is the block == {i} case.
inline double merged_shapley(const CachedOracle& oracle, const PlayerSet& others,
                             const PlayerSet& block,
                             int limit = kExactEnumerationLimit) {
  if (block.empty()) throw ContractError("merged_shapley: empty block");
  if (block.intersects(others))
    throw ContractError("merged_shapley: block overlaps the free players");
  const int m = others.cardinality();
  detail::check_exact_limit(m + 1, "merged_shapley", limit);
  const auto weights = detail::insertion_weights(m);
  double total = 0.0;
  detail::for_each_subset(others, [&](const PlayerSet& s, int size) {
    total += weights[static_cast<std::size_t>(size)] *
             (oracle.value(s.united(block)) - oracle.value(s));
  });
  return total;
}

/// Shapley value of player i within `context`, by exact enumeration.
inline AttributionScore exact_shapley(const CachedOracle& oracle,
                                      const PlayerSet& context, int i,
                                      int limit = kExactEnumerationLimit) {
  if (!context.contains(i))
    throw ContractError("exact_shapley: player " + std::to_string(i) +
                        " not in context " + context.to_string());
  detail::check_exact_limit(context.cardinality(), "exact_shapley", limit);
  const double v = merged_shapley(oracle, context.without(i),
                                  PlayerSet::single(context.player_count(), i), limit);
  return {i, -1, v, ScoreKind::shapley, context};
}

/// Pairwise interaction I(i, j | context): the joint Shapley value of the
/// merged pair minus each player's value in the other's absence.
inline AttributionScore exact_interaction(const CachedOracle& oracle,
                                          const PlayerSet& context, int i, int j,
                                          int limit = kExactEnumerationLimit) {
  if (i == j)
    throw ContractError(
        "exact_interaction: i == j; the self pair is -shapley(i), see "
        "self_interaction()");
  if (!context.contains(i) || !context.contains(j))
    throw ContractError("exact_interaction: players must lie in the context");
  detail::check_exact_limit(context.cardinality(), "exact_interaction", limit);

  const int n = context.player_count();
  const PlayerSet rest = context.without(i).without(j);
  const PlayerSet pair = PlayerSet::of(n, {i, j});
  const double joint = merged_shapley(oracle, rest, pair, limit);
  const double solo_i = merged_shapley(oracle, rest, PlayerSet::single(n, i), limit);
  const double solo_j = merged_shapley(oracle, rest, PlayerSet::single(n, j), limit);
  return {i, j, joint - solo_i - solo_j, ScoreKind::interaction, context};
}

/// The i == j diagonal of the interaction index: I(i, i | context) equals
/// -shapley(i | context) identically.
inline AttributionScore self_interaction(const CachedOracle& oracle,
                                         const PlayerSet& context, int i,
                                         int limit = kExactEnumerationLimit) {
  AttributionScore s = exact_shapley(oracle, context, i, limit);
  return {i, i, -s.value, ScoreKind::interaction, context};
}

/// Deletion-form Shapley value: average reward drop when i is removed from
/// coalitions containing it. Coincides with exact_shapley on every game.
inline AttributionScore deletion_shapley(const CachedOracle& oracle,
                                         const PlayerSet& context, int i,
                                         int limit = kExactEnumerationLimit) {
  if (!context.contains(i))
    throw ContractError("deletion_shapley: player " + std::to_string(i) +
                        " not in context " + context.to_string());
  const int M = context.cardinality();
  detail::check_exact_limit(M, "deletion_shapley", limit);
  const auto weights = detail::deletion_weights(M);
  const PlayerSet unit = PlayerSet::single(context.player_count(), i);
  double total = 0.0;
  detail::for_each_subset(context.without(i), [&](const PlayerSet& t, int size) {
    total += weights[static_cast<std::size_t>(size)] *
             (oracle.value(t.united(unit)) - oracle.value(t));
  });
  return {i, -1, total, ScoreKind::deletion_shapley, context};
}

struct McShapleyResult {
  AttributionScore score;
  double std_error = 0.0;  // sample standard deviation of marginals / sqrt(k)
  int samples = 0;
};

/// Permutation-sampling Shapley estimate: one random ordering per sample,
/// one marginal contribution each. Each sample draws from its own derived
/// sub-seed, so the estimate is identical however samples are scheduled.
inline McShapleyResult mc_shapley_detailed(const CachedOracle& oracle,
                                           const PlayerSet& context, int i,
                                           const SamplingConfig& cfg) {
  if (!context.contains(i))
    throw ContractError("mc_shapley: player " + std::to_string(i) +
                        " not in context " + context.to_string());
  if (cfg.sample_size < 1)
    throw ContractError("mc_shapley: sample_size must be >= 1");

  const std::vector<int> base = context.members();
  std::vector<double> marginals(static_cast<std::size_t>(cfg.sample_size));
  for (int k = 0; k < cfg.sample_size; ++k) {
    Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(k)));
    std::vector<int> perm = base;
    rng.shuffle(perm);
    PlayerSet before(context.player_count());
    for (int p : perm) {
      if (p == i) break;
      before.add(p);
    }
    marginals[static_cast<std::size_t>(k)] =
        oracle.value(before.with(i)) - oracle.value(before);
  }

  double mean = 0.0;
  for (double m : marginals) mean += m;
  mean /= static_cast<double>(cfg.sample_size);
  double var = 0.0;
  if (cfg.sample_size > 1) {
    for (double m : marginals) var += (m - mean) * (m - mean);
    var /= static_cast<double>(cfg.sample_size - 1);
  }
  McShapleyResult out;
  out.score = {i, -1, mean, ScoreKind::shapley, context};
  out.std_error = std::sqrt(var / static_cast<double>(cfg.sample_size));
  out.samples = cfg.sample_size;
  return out;
}

inline AttributionScore mc_shapley(const CachedOracle& oracle,
                                   const PlayerSet& context, int i,
                                   const SamplingConfig& cfg) {
  return mc_shapley_detailed(oracle, context, i, cfg).score;
}

/// Self-context Shapley value: f({a}) - f(empty).
inline AttributionScore self_context_shapley(const CachedOracle& oracle, int a) {
  const int n = oracle.player_count();
  const PlayerSet unit = PlayerSet::single(n, a);
  const double v = oracle.value(unit) - oracle.value(PlayerSet(n));
  return {a, -1, v, ScoreKind::self_context_shapley, unit};
}

/// Self-context interaction of the merged coalition s with newcomer b:
/// f(s + b) - f(s) - f({b}) + f(empty).
inline AttributionScore self_context_interaction(const CachedOracle& oracle,
                                                 const PlayerSet& s, int b) {
  if (s.contains(b))
    throw ContractError("self_context_interaction: player " + std::to_string(b) +
                        " already in " + s.to_string());
  const int n = oracle.player_count();
  const double v = oracle.value(s.with(b)) - oracle.value(s) -
                   oracle.value(PlayerSet::single(n, b)) + oracle.value(PlayerSet(n));
  return {b, -1, v, ScoreKind::self_context_interaction, s.with(b)};
}

/// Deletion value of `block` (treated as one merged player) inside
/// `context`: [f(context) - f(context \ block)] / m, where m counts the
/// context's players with the block merged.
inline double merged_deletion_value(const CachedOracle& oracle,
                                    const PlayerSet& context,
                                    const PlayerSet& block) {
  if (block.empty()) throw ContractError("merged_deletion_value: empty block");
  if (!block.is_subset_of(context))
    throw ContractError("merged_deletion_value: block not inside context");
  const int m = context.cardinality() - block.cardinality() + 1;
  return (oracle.value(context) - oracle.value(context.difference(block))) /
         static_cast<double>(m);
}

/// Full-context deletion Shapley value: [f(N) - f(N \ {a})] / |N|.
inline AttributionScore full_context_deletion_shapley(const CachedOracle& oracle,
                                                      int a) {
  const PlayerSet grand = oracle.grand_set();
  const double v =
      merged_deletion_value(oracle, grand, PlayerSet::single(grand.player_count(), a));
  return {a, -1, v, ScoreKind::full_context_deletion_shapley, grand};
}

/// Unscaled bracket of the full-context deletion interaction:
/// f(N) - f(N \ s) - f(N \ {b}) + f(N \ (s + b)).
inline double deletion_interaction_bracket(const CachedOracle& oracle,
                                           const PlayerSet& s, int b) {
  if (s.contains(b))
    throw ContractError("deletion_interaction_bracket: player " +
                        std::to_string(b) + " already in " + s.to_string());
  const PlayerSet grand = oracle.grand_set();
  const PlayerSet unit = PlayerSet::single(grand.player_count(), b);
  return oracle.value(grand) - oracle.value(grand.difference(s)) -
         oracle.value(grand.difference(unit)) +
         oracle.value(grand.difference(s.united(unit)));
}

/// Full-context deletion interaction between merged coalition s and player
/// b, scaled by c = 1 / (|N| - |s|). The scale reproduces 1/(|N|-1) at
/// |s| = 1 and, being a positive per-step constant, never moves an argmax;
/// deletion_interaction_bracket() exposes the raw unscaled value.
inline AttributionScore full_context_deletion_interaction(const CachedOracle& oracle,
                                                          const PlayerSet& s, int b) {
  const int n = oracle.player_count();
  const int free_players = n - s.cardinality();
  if (free_players <= 0)
    throw ContractError("full_context_deletion_interaction: nothing left to add");
  const double c = 1.0 / static_cast<double>(free_players);
  const double v = c * deletion_interaction_bracket(oracle, s, b);
  return {b, -1, v, ScoreKind::full_context_deletion_interaction, s.with(b)};
}

}  // namespace moxi
