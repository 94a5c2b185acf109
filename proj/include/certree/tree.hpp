#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "certree/bitvec.hpp"
#include "certree/dataset.hpp"
#include "certree/errors.hpp"
#include "certree/rational.hpp"

namespace certree {

/// One literal of a leaf's conjunction: feature == 1 (polarity true) or == 0.
struct Clause {
  std::uint32_t feature = 0;
  bool polarity = true;

  friend auto operator<=>(const Clause&, const Clause&) = default;
  friend bool operator==(const Clause&, const Clause&) = default;
};

namespace detail {

// count / N < factor * lambda, evaluated exactly.
inline bool fraction_below(std::size_t count, const ExactValue& lambda, std::size_t n, std::int64_t factor) {
  const __int128 lhs = static_cast<__int128>(count) * lambda.den();
  const __int128 rhs = static_cast<__int128>(factor) * lambda.num() * static_cast<__int128>(n);
  return lhs < rhs;
}

}  // namespace detail

/// A leaf: a conjunction of literals with its capture set and cached
/// statistics. Immutable once built, apart from the dead-feature memo which
/// only ever grows.
struct Leaf {
  static constexpr std::uint32_t kNoId = 0xffffffffU;

  std::vector<Clause> clauses;  // ascending by feature
  BitVector capture;
  std::size_t n_captured = 0;
  std::size_t n_correct = 0;
  std::size_t mistakes = 0;
  std::size_t b0_count = 0;
  bool prediction = false;
  bool dead = false;
  std::uint32_t id = kNoId;

  bool has_feature(std::size_t f) const noexcept {
    return std::any_of(clauses.begin(), clauses.end(), [f](const Clause& c) { return c.feature == f; });
  }

  bool is_dead_feature(std::size_t f) const noexcept {
    return f / 64 < dead_features_.size() && ((dead_features_[f / 64] >> (f % 64)) & 1U);
  }

  // Written only by the search thread that owns the leaf cache.
  void mark_dead_feature(std::size_t f) const {
    if (f / 64 >= dead_features_.size()) dead_features_.resize(f / 64 + 1, 0);
    dead_features_[f / 64] |= std::uint64_t{1} << (f % 64);
  }

  void inherit_dead_features(const Leaf& parent) const {
    if (dead_features_.size() < parent.dead_features_.size()) dead_features_.resize(parent.dead_features_.size(), 0);
    for (std::size_t i = 0; i < parent.dead_features_.size(); ++i) dead_features_[i] |= parent.dead_features_[i];
  }

  std::size_t dead_feature_count() const noexcept {
    std::size_t total = 0;
    for (auto w : dead_features_) total += static_cast<std::size_t>(std::popcount(w));
    return total;
  }

 private:
  mutable std::vector<std::uint64_t> dead_features_;
};

using LeafRef = std::shared_ptr<const Leaf>;

/// Computes counts, prediction and flags for a clause set with a known
/// capture vector. An even label split predicts 0.
inline Leaf build_leaf(std::vector<Clause> clauses, BitVector capture, const Dataset& ds, const EquivalenceIndex& eq,
                       const ExactValue& lambda) {
  std::sort(clauses.begin(), clauses.end());
  for (std::size_t i = 1; i < clauses.size(); ++i) {
    if (clauses[i].feature == clauses[i - 1].feature) {
      throw UsageError("leaf has two clauses on feature " + std::to_string(clauses[i].feature));
    }
  }
  Leaf leaf;
  leaf.clauses = std::move(clauses);
  leaf.n_captured = capture.count_ones();
  const std::size_t ones = BitVector::count_and(capture, ds.labels());
  const std::size_t zeros = leaf.n_captured - ones;
  leaf.prediction = ones > zeros;
  leaf.n_correct = std::max(ones, zeros);
  leaf.mistakes = leaf.n_captured - leaf.n_correct;
  leaf.b0_count = BitVector::count_and(capture, eq.z);
  leaf.dead = detail::fraction_below(leaf.n_captured, lambda, ds.n_samples(), 2);
  leaf.capture = std::move(capture);
  return leaf;
}

/// Capture vector of a clause set computed from scratch.
inline BitVector capture_of(std::span<const Clause> clauses, const Dataset& ds) {
  BitVector cap = BitVector::ones(ds.n_samples());
  for (const auto& c : clauses) {
    cap = c.polarity ? (cap & ds.column(c.feature)) : BitVector::and_not(cap, ds.column(c.feature));
  }
  return cap;
}

inline Leaf make_root_leaf(const Dataset& ds, const EquivalenceIndex& eq, const ExactValue& lambda) {
  return build_leaf({}, BitVector::ones(ds.n_samples()), ds, eq, lambda);
}

/// Extends `parent` by one literal. The child inherits the parent's dead
/// features.
inline Leaf make_child_leaf(const Leaf& parent, std::size_t feature, bool polarity, const Dataset& ds,
                            const EquivalenceIndex& eq, const ExactValue& lambda) {
  if (feature >= ds.n_features()) throw UsageError("make_child_leaf: feature out of range");
  if (parent.has_feature(feature)) {
    throw UsageError("make_child_leaf: feature " + std::to_string(feature) + " already on the leaf");
  }
  auto clauses = parent.clauses;
  clauses.push_back({static_cast<std::uint32_t>(feature), polarity});
  BitVector cap = polarity ? (parent.capture & ds.column(feature)) : BitVector::and_not(parent.capture, ds.column(feature));
  Leaf child = build_leaf(std::move(clauses), std::move(cap), ds, eq, lambda);
  child.inherit_dead_features(parent);
  return child;
}

/// Orders leaves by their clause sequences.
inline bool leaf_less(const Leaf& a, const Leaf& b) { return a.clauses < b.clauses; }

/// Number of leaves charged by the sparsity penalty: a lone root leaf is
/// charged nothing, any split tree pays for every leaf.
inline std::size_t penalized_leaf_count(std::size_t leaf_count) { return leaf_count <= 1 ? 0 : leaf_count; }

/// A tree as a set of leaves, each either unchanged (never split again in
/// descendants) or splittable.
struct TreeState {
  std::vector<LeafRef> leaves;          // canonical order (leaf_less)
  std::vector<std::uint8_t> splittable;  // parallel to leaves
  // Sibling pairs from a split whose accuracy gain fell short of lambda; the
  // two may not both end unchanged.
  std::vector<std::pair<const Leaf*, const Leaf*>> must_split_pairs;
  std::size_t H = 0;  // penalized leaf count
  std::size_t K = 0;  // unchanged leaves
  ExactValue objective;
  ExactValue lower_bound;
  std::uint64_t generation = 0;

  std::size_t size() const noexcept { return leaves.size(); }

  std::size_t splittable_count() const noexcept { return leaves.size() - K; }

  std::size_t unchanged_captured() const noexcept {
    std::size_t total = 0;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      if (!splittable[i]) total += leaves[i]->n_captured;
    }
    return total;
  }

  std::size_t splittable_b0() const noexcept {
    std::size_t total = 0;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      if (splittable[i]) total += leaves[i]->b0_count;
    }
    return total;
  }

  std::size_t total_mistakes() const noexcept {
    std::size_t total = 0;
    for (const auto& l : leaves) total += l->mistakes;
    return total;
  }

  bool in_must_split_pair(const Leaf* leaf, const Leaf** sibling) const noexcept {
    for (const auto& [a, b] : must_split_pairs) {
      if (a == leaf) {
        *sibling = b;
        return true;
      }
      if (b == leaf) {
        *sibling = a;
        return true;
      }
    }
    return false;
  }

  int index_of(const Leaf* leaf) const noexcept {
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      if (leaves[i].get() == leaf) return static_cast<int>(i);
    }
    return -1;
  }
};

inline ExactValue mistakes_fraction(std::size_t mistakes, std::size_t n) {
  return ExactValue(static_cast<std::int64_t>(mistakes), static_cast<std::int64_t>(n));
}

/// Initial search tree: one all-capturing splittable leaf, H = 0, b = 0.
inline TreeState root_tree(const Dataset& ds, const ExactValue& lambda, const EquivalenceIndex& eq) {
  TreeState t;
  t.leaves.push_back(std::make_shared<const Leaf>(make_root_leaf(ds, eq, lambda)));
  t.splittable = {1};
  t.H = 0;
  t.K = 0;
  t.lower_bound = ExactValue(0);
  t.objective = mistakes_fraction(t.leaves.front()->mistakes, ds.n_samples());
  return t;
}

/// R = total mistakes / N + lambda * H, recomputed from the leaves.
inline ExactValue objective(const TreeState& tree, const ExactValue& lambda, std::size_t n) {
  return mistakes_fraction(tree.total_mistakes(), n) +
         lambda * ExactValue(static_cast<std::int64_t>(penalized_leaf_count(tree.size())));
}

/// b = unchanged mistakes / N + lambda * H, recomputed from the leaves.
inline ExactValue lower_bound_from_scratch(const TreeState& tree, const ExactValue& lambda, std::size_t n) {
  std::size_t unchanged = 0;
  for (std::size_t i = 0; i < tree.size(); ++i) {
    if (!tree.splittable[i]) unchanged += tree.leaves[i]->mistakes;
  }
  return mistakes_fraction(unchanged, n) +
         lambda * ExactValue(static_cast<std::int64_t>(penalized_leaf_count(tree.size())));
}

inline ExactValue incremental_lower_bound(const ExactValue& parent_b, std::span<const LeafRef> newly_unchanged,
                                          const ExactValue& lambda, std::size_t delta_h, std::size_t n) {
  std::size_t added = 0;
  for (const auto& l : newly_unchanged) added += l->mistakes;
  return parent_b + lambda * ExactValue(static_cast<std::int64_t>(delta_h)) + mistakes_fraction(added, n);
}

inline ExactValue incremental_objective(const ExactValue& child_b, std::span<const LeafRef> splittable, std::size_t n) {
  std::size_t added = 0;
  for (const auto& l : splittable) added += l->mistakes;
  return child_b + mistakes_fraction(added, n);
}

inline ExactValue normalized_support(const BitVector& capture, std::size_t n) {
  if (n == 0) throw UsageError("normalized_support: N must be positive");
  if (capture.size() != n) throw UsageError("normalized_support: capture length differs from N");
  return ExactValue(static_cast<std::int64_t>(capture.count_ones()), static_cast<std::int64_t>(n));
}

/// Throws InvariantError unless the leaves partition the N samples.
inline void check_partition(const TreeState& tree, std::size_t n) {
  std::size_t total = 0;
  BitVector seen(n);
  for (const auto& l : tree.leaves) {
    total += l->n_captured;
    if (BitVector::count_and(seen, l->capture) != 0) throw InvariantError("leaf captures overlap");
    seen = seen | l->capture;
  }
  if (total != n || seen.count_ones() != n) throw InvariantError("leaves do not cover every sample");
}

}  // namespace certree
