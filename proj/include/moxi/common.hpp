#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace moxi {

/// Violated API precondition: bad player index, mismatched universes,
/// inconsistent shapes. Always a caller bug, never bad input data.
class ContractError : public std::logic_error {
 public:
  explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

/// An exact enumeration was requested over more players than the configured
/// limit allows. The message names the sampling alternative.
class EnumerationLimitError : public ContractError {
 public:
  explicit EnumerationLimitError(const std::string& msg) : ContractError(msg) {}
};

/// Unusable input: missing or malformed files, failed dataset screens.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Synthetic data generation could not satisfy its constraints in time.
class GenerationError : public std::runtime_error {
 public:
  explicit GenerationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Confidences are clamped away from {0,1} so log-odds rewards stay finite.
inline constexpr double kConfidenceEpsilon = 1e-7;

inline double clamp_confidence(double p) {
  return std::clamp(p, kConfidenceEpsilon, 1.0 - kConfidenceEpsilon);
}

/// log(p / (1 - p)) with the confidence clamp applied.
inline double log_odds(double p) {
  p = clamp_confidence(p);
  return std::log(p / (1.0 - p));
}

/// p / (1 - p) with the confidence clamp applied.
inline double raw_odds(double p) {
  p = clamp_confidence(p);
  return p / (1.0 - p);
}

/// Index of the largest element; ties resolve to the lowest index.
inline int argmax_index(std::span<const double> xs) {
  if (xs.empty()) throw ContractError("argmax_index: empty input");
  int best = 0;
  for (int i = 1; i < static_cast<int>(xs.size()); ++i) {
    if (xs[i] > xs[best]) best = i;
  }
  return best;
}

inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string to_hex(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

}  // namespace moxi
