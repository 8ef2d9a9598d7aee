#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace irsmith {

/// Seeded random stream. Built on std::mt19937_64, whose output sequence is
/// fixed by the standard; the derived draws are implemented here (rather than
/// with std::*_distribution) so results do not depend on the standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below(0)");
    // Lemire's multiply-shift with rejection.
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = -n % n;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(next_u64()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Uniform integer in [lo, hi] (inclusive).
  std::int64_t range(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
    if (span == ~std::uint64_t{0}) return static_cast<std::int64_t>(next_u64());
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + below(span + 1));
  }

  /// Uniform real in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  const T& pick(std::span<const T> items) {
    return items[below(items.size())];
  }
  template <typename T>
  const T& pick(const std::vector<T>& items) {
    return items[below(items.size())];
  }

  /// Index drawn with probability weights[i] / sum(weights). At least one
  /// weight must be positive.
  std::size_t weighted_index(std::span<const double> weights) {
    double total = 0;
    for (double w : weights) total += w;
    if (!(total > 0)) throw std::invalid_argument("weighted_index: no positive weight");
    double r = uniform() * total;
    std::size_t last = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] <= 0) continue;
      last = i;
      if (r < weights[i]) return i;
      r -= weights[i];
    }
    return last;
  }

  /// Permutation of the indices with positive weight, drawn as successive
  /// weighted picks without replacement (Efraimidis-Spirakis keys).
  std::vector<std::size_t> weighted_order(std::span<const double> weights) {
    std::vector<std::pair<double, std::size_t>> keys;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] <= 0) continue;
      double u = uniform();
      // key = u^(1/w); compare logs to stay accurate for large weights.
      double key = u > 0 ? std::log(u) / weights[i] : -INFINITY;
      keys.emplace_back(key, i);
    }
    std::stable_sort(keys.begin(), keys.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<std::size_t> order;
    order.reserve(keys.size());
    for (const auto& k : keys) order.push_back(k.second);
    return order;
  }

  /// Number of Bernoulli(p) trials up to and including the first success.
  std::size_t geometric(double p) {
    std::size_t k = 1;
    while (uniform() >= p) ++k;
    return k;
  }

 private:
  std::mt19937_64 engine_;
};

/// Draws indices one at a time, each with probability proportional to its
/// weight among the indices not drawn yet (weighted sampling without
/// replacement). Zero-weight indices are never drawn.
class WeightedSequence {
 public:
  WeightedSequence(Rng& rng, std::span<const double> weights) : rng_(rng), weights_(weights) {
    prefix_.reserve(weights.size());
    double total = 0;
    for (double w : weights) {
      total += w > 0 ? w : 0;
      prefix_.push_back(total);
    }
    remaining_ = total;
    taken_.assign(weights.size(), false);
    for (double w : weights) available_ += w > 0 ? 1 : 0;
  }

  std::optional<std::size_t> next() {
    if (available_ == 0) return std::nullopt;
    const double total = prefix_.empty() ? 0 : prefix_.back();
    // Rejection from the full distribution is exact and cheap while few
    // indices are taken; fall back to a scan over the rest otherwise.
    for (int tries = 0; tries < 8 && total > 0; ++tries) {
      double r = rng_.uniform() * total;
      auto it = std::upper_bound(prefix_.begin(), prefix_.end(), r);
      if (it == prefix_.end()) continue;
      auto i = static_cast<std::size_t>(it - prefix_.begin());
      if (!taken_[i] && weights_[i] > 0) return take(i);
    }
    double r = rng_.uniform() * remaining_;
    std::size_t last = weights_.size();
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      if (taken_[i] || !(weights_[i] > 0)) continue;
      last = i;
      if (r < weights_[i]) return take(i);
      r -= weights_[i];
    }
    return take(last);
  }

 private:
  std::size_t take(std::size_t i) {
    taken_[i] = true;
    remaining_ -= weights_[i];
    --available_;
    return i;
  }

  Rng& rng_;
  std::span<const double> weights_;
  std::vector<double> prefix_;
  std::vector<bool> taken_;
  double remaining_ = 0;
  std::size_t available_ = 0;
};

}  // namespace irsmith
