#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "certree/bounds.hpp"
#include "certree/dataset.hpp"
#include "certree/errors.hpp"
#include "certree/rational.hpp"
#include "certree/tree.hpp"

namespace certree {

struct GreedyParams {
  std::size_t max_depth = 0;  // 0: ceil(log2(max_leaves_apriori))
  std::size_t min_leaf_samples = 1;
};

inline std::size_t default_greedy_depth(const ExactValue& lambda, std::size_t m) {
  const std::int64_t leaves = max_leaves_apriori(lambda, m);
  std::size_t depth = 0;
  while ((std::int64_t{1} << depth) < leaves && depth < 62) ++depth;
  return std::max<std::size_t>(depth, 1);
}

namespace detail {

// N times the weighted gini of one side: 2 * ones * zeros / n_side.
inline ExactValue scaled_gini(const Leaf& l) {
  if (l.n_captured == 0) return ExactValue(0);
  return ExactValue(static_cast<std::int64_t>(2 * l.n_correct * l.mistakes), static_cast<std::int64_t>(l.n_captured));
}

inline void greedy_grow(const Leaf& node, std::size_t depth, const GreedyParams& params, const Dataset& ds,
                        const EquivalenceIndex& eq, const ExactValue& lambda, std::vector<LeafRef>& out) {
  const ExactValue parent_impurity = scaled_gini(node);
  if (depth >= params.max_depth || parent_impurity.is_zero()) {
    out.push_back(std::make_shared<const Leaf>(node));
    return;
  }
  std::optional<std::size_t> best_feature;
  ExactValue best_impurity = parent_impurity;
  std::optional<Leaf> best_false, best_true;
  for (std::size_t f = 0; f < ds.n_features(); ++f) {
    if (node.has_feature(f)) continue;
    Leaf on = make_child_leaf(node, f, true, ds, eq, lambda);
    if (on.n_captured < params.min_leaf_samples || node.n_captured - on.n_captured < params.min_leaf_samples) continue;
    Leaf off = make_child_leaf(node, f, false, ds, eq, lambda);
    const ExactValue impurity = scaled_gini(on) + scaled_gini(off);
    if (impurity < best_impurity) {  // strict: lowest index wins ties
      best_impurity = impurity;
      best_feature = f;
      best_true = std::move(on);
      best_false = std::move(off);
    }
  }
  if (!best_feature) {
    out.push_back(std::make_shared<const Leaf>(node));
    return;
  }
  greedy_grow(*best_true, depth + 1, params, ds, eq, lambda, out);
  greedy_grow(*best_false, depth + 1, params, ds, eq, lambda, out);
}

}  // namespace detail

/// Top-down gini splitting. Returns a terminal tree (every leaf unchanged)
/// with its exact objective.
inline TreeState greedy_fit(const Dataset& ds, const GreedyParams& params_in, const ExactValue& lambda,
                            const EquivalenceIndex& eq) {
  GreedyParams params = params_in;
  if (params.max_depth == 0) params.max_depth = default_greedy_depth(lambda, ds.n_features());
  if (params.min_leaf_samples == 0) throw UsageError("greedy_fit: min_leaf_samples must be >= 1");

  std::vector<LeafRef> leaves;
  detail::greedy_grow(make_root_leaf(ds, eq, lambda), 0, params, ds, eq, lambda, leaves);
  std::sort(leaves.begin(), leaves.end(), [](const LeafRef& a, const LeafRef& b) { return leaf_less(*a, *b); });

  TreeState t;
  t.leaves = std::move(leaves);
  t.splittable.assign(t.leaves.size(), 0);
  t.K = t.leaves.size();
  t.H = penalized_leaf_count(t.leaves.size());
  t.objective = objective(t, lambda, ds.n_samples());
  t.lower_bound = t.objective;
  return t;
}

inline TreeState greedy_fit(const Dataset& ds, const GreedyParams& params, const ExactValue& lambda) {
  return greedy_fit(ds, params, lambda, build_equivalence_index(ds));
}

}  // namespace certree
