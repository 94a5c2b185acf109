#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "certree/errors.hpp"
#include "certree/rational.hpp"
#include "certree/tree.hpp"

namespace certree {

enum class Policy { BFS, DFS, LowerBound, Objective, Curiosity, Entropy, Gini };

inline constexpr std::array<Policy, 7> kAllPolicies = {Policy::BFS,       Policy::DFS,     Policy::LowerBound,
                                                       Policy::Objective, Policy::Curiosity, Policy::Entropy,
                                                       Policy::Gini};

inline std::string_view to_string(Policy p) {
  switch (p) {
    case Policy::BFS: return "bfs";
    case Policy::DFS: return "dfs";
    case Policy::LowerBound: return "lower_bound";
    case Policy::Objective: return "objective";
    case Policy::Curiosity: return "curiosity";
    case Policy::Entropy: return "entropy";
    case Policy::Gini: return "gini";
  }
  return "?";
}

inline Policy parse_policy(std::string_view name) {
  for (Policy p : kAllPolicies) {
    if (to_string(p) == name) return p;
  }
  throw UsageError("unknown policy '" + std::string(name) +
                   "' (expected bfs, dfs, lower_bound, objective, curiosity, entropy or gini)");
}

/// Smaller keys pop first; `sequence` breaks ties in insertion order.
/// Entropy keys are binary64 approximations; every other policy is exact.
struct PriorityKey {
  ExactValue exact;
  double approx = 0.0;
  bool approximate = false;
  std::uint64_t sequence = 0;

  friend bool operator<(const PriorityKey& a, const PriorityKey& b) noexcept {
    if (a.approximate) {
      if (a.approx != b.approx) return a.approx < b.approx;
    } else if (a.exact != b.exact) {
      return a.exact < b.exact;
    }
    return a.sequence < b.sequence;
  }
};

inline double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

/// b / supp(d_un); the lower bound itself when nothing is unchanged yet.
inline ExactValue curiosity(const TreeState& tree, std::size_t n) {
  const std::size_t captured = tree.unchanged_captured();
  if (captured == 0) return tree.lower_bound;
  return tree.lower_bound * ExactValue(static_cast<std::int64_t>(n), static_cast<std::int64_t>(captured));
}

inline PriorityKey priority(const TreeState& tree, Policy policy, std::size_t n) {
  PriorityKey key;
  key.sequence = tree.generation;
  switch (policy) {
    case Policy::BFS:
      key.exact = ExactValue(static_cast<std::int64_t>(tree.size()));
      break;
    case Policy::DFS:
      key.exact = ExactValue(-static_cast<std::int64_t>(tree.size()));
      break;
    case Policy::LowerBound:
      key.exact = tree.lower_bound;
      break;
    case Policy::Objective:
      key.exact = tree.objective;
      break;
    case Policy::Curiosity:
      key.exact = curiosity(tree, n);
      break;
    case Policy::Entropy: {
      key.approximate = true;
      double total = 0.0;
      for (std::size_t i = 0; i < tree.size(); ++i) {
        if (!tree.splittable[i]) continue;
        const Leaf& l = *tree.leaves[i];
        if (l.n_captured == 0) continue;
        const std::size_t ones = l.prediction ? l.n_correct : l.mistakes;
        const double p = static_cast<double>(ones) / static_cast<double>(l.n_captured);
        total += static_cast<double>(l.n_captured) / static_cast<double>(n) * binary_entropy(p);
      }
      key.approx = total;
      break;
    }
    case Policy::Gini: {
      // sum over splittable leaves of (n_l / N) * 2 p (1 - p) = 2 ones zeros / (n_l N)
      ExactValue total(0);
      for (std::size_t i = 0; i < tree.size(); ++i) {
        if (!tree.splittable[i]) continue;
        const Leaf& l = *tree.leaves[i];
        if (l.n_captured == 0) continue;
        total += ExactValue(static_cast<std::int64_t>(2 * l.n_correct * l.mistakes),
                            static_cast<std::int64_t>(l.n_captured * n));
      }
      key.exact = total;
      break;
    }
  }
  return key;
}

/// Binary min-heap of trees under one policy. Stale entries are discarded
/// at pop time by the caller-supplied liveness test.
class WorkQueue {
 public:
  struct Entry {
    PriorityKey key;
    TreeState tree;
  };

  WorkQueue(Policy policy, std::size_t n_samples) : policy_(policy), n_(n_samples) {}

  Policy policy() const noexcept { return policy_; }

  void push(TreeState tree) {
    if (tree.generation == 0) tree.generation = ++sequence_;
    PriorityKey key = priority(tree, policy_, n_);
    ++profile_[{tree.lower_bound, tree.size()}];
    heap_.push_back(Entry{std::move(key), std::move(tree)});
    std::push_heap(heap_.begin(), heap_.end(), greater);
    max_size_ = std::max(max_size_, heap_.size());
  }

  std::optional<TreeState> pop() {
    if (heap_.empty()) return std::nullopt;
    std::pop_heap(heap_.begin(), heap_.end(), greater);
    TreeState t = std::move(heap_.back().tree);
    heap_.pop_back();
    const auto it = profile_.find({t.lower_bound, t.size()});
    if (--it->second == 0) profile_.erase(it);
    return t;
  }

  /// Pops until an entry passes `live`; returns nothing once empty.
  template <class Live>
  std::optional<TreeState> pop_live(Live&& live) {
    while (auto t = pop()) {
      if (live(*t)) return t;
      ++discarded_;
    }
    return std::nullopt;
  }

  std::uint64_t next_sequence() noexcept { return ++sequence_; }

  bool empty() const noexcept { return heap_.empty(); }
  std::size_t size() const noexcept { return heap_.size(); }
  std::size_t max_size() const noexcept { return max_size_; }
  std::size_t discarded() const noexcept { return discarded_; }
  const std::vector<Entry>& entries() const noexcept { return heap_; }

  /// Entry counts per (lower bound, leaf count), ascending by lower bound.
  const std::map<std::pair<ExactValue, std::size_t>, std::size_t>& profile() const noexcept { return profile_; }

 private:
  static bool greater(const Entry& a, const Entry& b) noexcept { return b.key < a.key; }

  Policy policy_;
  std::size_t n_;
  std::vector<Entry> heap_;
  std::map<std::pair<ExactValue, std::size_t>, std::size_t> profile_;
  std::uint64_t sequence_ = 0;
  std::size_t max_size_ = 0;
  std::size_t discarded_ = 0;
};

}  // namespace certree
