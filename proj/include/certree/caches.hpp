#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <unordered_map>
#include <vector>

#include "certree/dataset.hpp"
#include "certree/rational.hpp"
#include "certree/tree.hpp"

namespace certree {

/// Clause set in canonical (ascending feature) order.
using LeafKey = std::vector<Clause>;

/// Leaf ids tagged with splittable flags, in the tree's canonical leaf order.
using TreeKey = std::vector<std::uint64_t>;

struct LeafKeyHash {
  std::size_t operator()(const LeafKey& key) const noexcept {
    std::size_t h = key.size();
    for (const auto& c : key) {
      const std::size_t v = (static_cast<std::size_t>(c.feature) << 1U) | static_cast<std::size_t>(c.polarity);
      h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6U) + (h >> 2U);
    }
    return h;
  }
};

struct TreeKeyHash {
  std::size_t operator()(const TreeKey& key) const noexcept {
    std::size_t h = key.size();
    for (auto v : key) h ^= std::hash<std::uint64_t>{}(v) + 0x9e3779b97f4a7c15ULL + (h << 6U) + (h >> 2U);
    return h;
  }
};

inline LeafKey canonical_leaf_key(LeafKey clauses) {
  std::sort(clauses.begin(), clauses.end());
  return clauses;
}

/// Interns leaves by clause set so each capture vector is computed once.
class LeafCache {
 public:
  using Builder = std::function<Leaf()>;

  LeafRef intern(const LeafKey& key, const Builder& build) {
    if (auto it = map_.find(key); it != map_.end()) {
      ++hits_;
      return it->second;
    }
    ++builds_;
    Leaf leaf = build();
    if (leaf.clauses != key) throw UsageError("LeafCache::intern: built leaf does not match its key");
    leaf.id = next_id_++;
    auto ref = std::make_shared<const Leaf>(std::move(leaf));
    map_.emplace(key, ref);
    return ref;
  }

  /// The child of `parent` extended by one literal, interned. A cached child
  /// picks up `parent`'s dead features as well, since every parent of a leaf
  /// captures a superset of it.
  LeafRef child(const Leaf& parent, std::size_t feature, bool polarity, const Dataset& ds, const EquivalenceIndex& eq,
                const ExactValue& lambda) {
    LeafKey key = parent.clauses;
    const Clause c{static_cast<std::uint32_t>(feature), polarity};
    key.insert(std::upper_bound(key.begin(), key.end(), c), c);
    LeafRef ref = intern(key, [&] { return make_child_leaf(parent, feature, polarity, ds, eq, lambda); });
    ref->inherit_dead_features(parent);
    return ref;
  }

  std::size_t size() const noexcept { return map_.size(); }
  std::size_t hits() const noexcept { return hits_; }
  std::size_t builds() const noexcept { return builds_; }

  double hit_rate() const noexcept {
    const auto total = hits_ + builds_;
    return total == 0 ? 0.0 : static_cast<double>(hits_) / static_cast<double>(total);
  }

 private:
  std::unordered_map<LeafKey, LeafRef, LeafKeyHash> map_;
  std::uint32_t next_id_ = 0;
  std::size_t hits_ = 0;
  std::size_t builds_ = 0;
};

inline TreeKey tree_key(const TreeState& tree) {
  TreeKey key;
  key.reserve(tree.size());
  for (std::size_t i = 0; i < tree.size(); ++i) {
    key.push_back((static_cast<std::uint64_t>(tree.leaves[i]->id) << 1U) | tree.splittable[i]);
  }
  return key;
}

struct PurgeStats {
  std::size_t tree_entries_dropped = 0;
  std::size_t tree_entries_kept = 0;
};

/// Trees already generated, keyed by leaf set plus splittable flags, with
/// the lower bound each was generated with.
class TreeCache {
 public:
  /// true if `key` was present (skip it); otherwise records it.
  bool seen_or_mark(const TreeKey& key, const ExactValue& lower_bound = ExactValue(0)) {
    auto [it, inserted] = map_.try_emplace(key, lower_bound);
    return !inserted;
  }

  bool contains(const TreeKey& key) const { return map_.contains(key); }

  /// Drops entries whose lower bound (plus lambda when lookahead is active)
  /// has reached `best`.
  PurgeStats garbage_collect(const ExactValue& best, const ExactValue& lambda, bool lookahead = true) {
    PurgeStats stats;
    for (auto it = map_.begin(); it != map_.end();) {
      const ExactValue reach = lookahead ? it->second + lambda : it->second;
      if (reach >= best) {
        it = map_.erase(it);
        ++stats.tree_entries_dropped;
      } else {
        ++it;
      }
    }
    stats.tree_entries_kept = map_.size();
    return stats;
  }

  std::size_t size() const noexcept { return map_.size(); }

 private:
  std::unordered_map<TreeKey, ExactValue, TreeKeyHash> map_;
};

}  // namespace certree
