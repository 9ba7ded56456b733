#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "moxi/common.hpp"

namespace moxi {

/// A coalition over a fixed universe of players [0, n).
///
/// Backed by a fixed-stride array of 64-bit words so sets stay cheap to copy,
/// hash and compare for any universe up to kMaxPlayers (enough for a 14x14
/// patch grid). No bit at index >= n is ever set; operations combining two
/// sets require matching universe sizes.
class PlayerSet {
 public:
  static constexpr int kMaxPlayers = 256;
  static constexpr int kWords = kMaxPlayers / 64;

  /// Empty set over an empty universe; usable only after assignment.
  PlayerSet() = default;

  /// Empty coalition over n players.
  explicit PlayerSet(int n) : n_(checked_universe(n)) {}

  static PlayerSet empty_set(int n) { return PlayerSet(n); }

  static PlayerSet full_set(int n) {
    PlayerSet s(n);
    for (int w = 0; w < kWords; ++w) {
      const int lo = w * 64;
      if (n <= lo) break;
      const int used = std::min(64, n - lo);
      s.words_[static_cast<std::size_t>(w)] =
          used == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << used) - 1;
    }
    return s;
  }

  static PlayerSet single(int n, int player) { return PlayerSet(n).with(player); }

  static PlayerSet of(int n, std::initializer_list<int> players) {
    PlayerSet s(n);
    for (int p : players) s.add(p);
    return s;
  }

  /// Convenience for universes of at most 64 players.
  static PlayerSet from_mask(int n, std::uint64_t mask) {
    if (n > 64) throw ContractError("from_mask: universe wider than 64 players");
    PlayerSet s(n);
    if (n < 64 && (mask >> n) != 0)
      throw ContractError("from_mask: mask has bits beyond the universe");
    s.words_[0] = mask;
    return s;
  }

  int player_count() const { return n_; }

  int cardinality() const {
    int total = 0;
    for (std::uint64_t w : words_) total += std::popcount(w);
    return total;
  }

  bool empty() const {
    for (std::uint64_t w : words_)
      if (w != 0) return false;
    return true;
  }

  bool is_full() const { return cardinality() == n_; }

  bool contains(int player) const {
    check_index(player);
    return (words_[word_of(player)] >> bit_of(player)) & 1u;
  }

  PlayerSet& add(int player) {
    check_index(player);
    words_[word_of(player)] |= std::uint64_t{1} << bit_of(player);
    return *this;
  }

  PlayerSet& remove(int player) {
    check_index(player);
    words_[word_of(player)] &= ~(std::uint64_t{1} << bit_of(player));
    return *this;
  }

  PlayerSet with(int player) const {
    PlayerSet s = *this;
    s.add(player);
    return s;
  }

  PlayerSet without(int player) const {
    PlayerSet s = *this;
    s.remove(player);
    return s;
  }

  PlayerSet united(const PlayerSet& o) const {
    PlayerSet s = checked_pair(o);
    for (int w = 0; w < kWords; ++w)
      s.words_[static_cast<std::size_t>(w)] =
          words_[static_cast<std::size_t>(w)] | o.words_[static_cast<std::size_t>(w)];
    return s;
  }

  PlayerSet intersected(const PlayerSet& o) const {
    PlayerSet s = checked_pair(o);
    for (int w = 0; w < kWords; ++w)
      s.words_[static_cast<std::size_t>(w)] =
          words_[static_cast<std::size_t>(w)] & o.words_[static_cast<std::size_t>(w)];
    return s;
  }

  PlayerSet difference(const PlayerSet& o) const {
    PlayerSet s = checked_pair(o);
    for (int w = 0; w < kWords; ++w)
      s.words_[static_cast<std::size_t>(w)] =
          words_[static_cast<std::size_t>(w)] & ~o.words_[static_cast<std::size_t>(w)];
    return s;
  }

  PlayerSet complement() const { return full_set(n_).difference(*this); }

  bool is_subset_of(const PlayerSet& o) const {
    checked_pair(o);
    for (int w = 0; w < kWords; ++w) {
      const auto i = static_cast<std::size_t>(w);
      if ((words_[i] & ~o.words_[i]) != 0) return false;
    }
    return true;
  }

  bool intersects(const PlayerSet& o) const {
    checked_pair(o);
    for (int w = 0; w < kWords; ++w) {
      const auto i = static_cast<std::size_t>(w);
      if ((words_[i] & o.words_[i]) != 0) return true;
    }
    return false;
  }

  /// Members in ascending order.
  std::vector<int> members() const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(cardinality()));
    for_each_member([&](int p) { out.push_back(p); });
    return out;
  }

  template <typename Fn>
  void for_each_member(Fn&& fn) const {
    for (int w = 0; w < kWords; ++w) {
      std::uint64_t bits = words_[static_cast<std::size_t>(w)];
      while (bits != 0) {
        const int p = w * 64 + std::countr_zero(bits);
        fn(p);
        bits &= bits - 1;
      }
    }
  }

  /// The low word; equals the whole set when n <= 64.
  std::uint64_t low_mask() const { return words_[0]; }

  friend bool operator==(const PlayerSet& a, const PlayerSet& b) {
    return a.n_ == b.n_ && a.words_ == b.words_;
  }
  friend bool operator!=(const PlayerSet& a, const PlayerSet& b) { return !(a == b); }

  std::size_t hash() const {
    std::uint64_t h = 0x9e3779b97f4a7c15ull ^ static_cast<std::uint64_t>(n_);
    for (std::uint64_t w : words_) {
      h ^= w + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
      h *= 0xbf58476d1ce4e5b9ull;
      h ^= h >> 29;
    }
    return static_cast<std::size_t>(h);
  }

  std::string to_string() const {
    std::string out = "{";
    bool first = true;
    for_each_member([&](int p) {
      if (!first) out += ",";
      out += std::to_string(p);
      first = false;
    });
    out += "}";
    return out;
  }

 private:
  static int checked_universe(int n) {
    if (n < 0 || n > kMaxPlayers)
      throw ContractError("PlayerSet: universe size " + std::to_string(n) +
                          " outside [0, " + std::to_string(kMaxPlayers) + "]");
    return n;
  }

  void check_index(int player) const {
    if (player < 0 || player >= n_)
      throw ContractError("PlayerSet: player " + std::to_string(player) +
                          " outside universe of " + std::to_string(n_));
  }

  PlayerSet checked_pair(const PlayerSet& o) const {
    if (n_ != o.n_)
      throw ContractError("PlayerSet: mixing universes of " + std::to_string(n_) +
                          " and " + std::to_string(o.n_) + " players");
    return PlayerSet(n_);
  }

  static std::size_t word_of(int player) { return static_cast<std::size_t>(player) / 64; }
  static int bit_of(int player) { return player % 64; }

  std::array<std::uint64_t, kWords> words_{};
  int n_ = 0;
};

struct PlayerSetHash {
  std::size_t operator()(const PlayerSet& s) const { return s.hash(); }
};

}  // namespace moxi
