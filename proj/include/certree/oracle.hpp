#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "certree/caches.hpp"
#include "certree/dataset.hpp"
#include "certree/errors.hpp"
#include "certree/rational.hpp"
#include "certree/tree.hpp"

namespace certree {

struct OracleLimits {
  std::size_t max_features = 6;
  std::size_t max_leaves = 0;  // 0: 2^M
};

struct OracleResult {
  TreeState tree;  // every leaf unchanged
  ExactValue objective;
  std::size_t leaf_count = 0;
  std::size_t subproblems = 0;
};

namespace detail {

class ExhaustiveSolver {
 public:
  ExhaustiveSolver(const Dataset& ds, const EquivalenceIndex& eq, const ExactValue& lambda, std::size_t max_leaves)
      : ds_(ds), eq_(eq), lambda_(lambda), k_max_(max_leaves) {}

  static constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max();

  struct Solution {
    std::vector<std::size_t> mistakes;  // index k: fewest mistakes with exactly k leaves
    std::vector<std::pair<std::size_t, std::size_t>> arg;  // (feature, leaves on the off side)
  };

  const Solution& solve(const Leaf& node) {
    if (auto it = memo_.find(node.clauses); it != memo_.end()) return it->second;
    Solution sol;
    sol.mistakes.assign(k_max_ + 1, kInf);
    sol.arg.assign(k_max_ + 1, {0, 0});
    sol.mistakes[1] = node.mistakes;
    for (std::size_t f = 0; f < ds_.n_features(); ++f) {
      if (node.has_feature(f)) continue;
      const Leaf off = make_child_leaf(node, f, false, ds_, eq_, lambda_);
      const Leaf on = make_child_leaf(node, f, true, ds_, eq_, lambda_);
      // Copies: the memo may rehash during the recursive calls.
      const std::vector<std::size_t> a = solve(off).mistakes;
      const std::vector<std::size_t> b = solve(on).mistakes;
      for (std::size_t ka = 1; ka < k_max_; ++ka) {
        if (a[ka] == kInf) continue;
        for (std::size_t kb = 1; ka + kb <= k_max_; ++kb) {
          if (b[kb] == kInf) continue;
          const std::size_t total = a[ka] + b[kb];
          if (total < sol.mistakes[ka + kb]) {
            sol.mistakes[ka + kb] = total;
            sol.arg[ka + kb] = {f, ka};
          }
        }
      }
    }
    return memo_.emplace(node.clauses, std::move(sol)).first->second;
  }

  void collect(const Leaf& node, std::size_t k, std::vector<LeafRef>& out) {
    if (k == 1) {
      out.push_back(std::make_shared<const Leaf>(node));
      return;
    }
    const auto [f, ka] = solve(node).arg[k];
    collect(make_child_leaf(node, f, false, ds_, eq_, lambda_), ka, out);
    collect(make_child_leaf(node, f, true, ds_, eq_, lambda_), k - ka, out);
  }

  std::size_t subproblems() const noexcept { return memo_.size(); }

 private:
  const Dataset& ds_;
  const EquivalenceIndex& eq_;
  ExactValue lambda_;
  std::size_t k_max_;
  std::unordered_map<LeafKey, Solution, LeafKeyHash> memo_;
};

}  // namespace detail

/// Exact optimum by exhaustive enumeration of every tree over every feature
/// subset, with no pruning. Ties go to the smallest leaf count.
inline OracleResult exhaustive_optimum(const Dataset& ds, const ExactValue& lambda, const OracleLimits& limits = {}) {
  if (!lambda.is_positive()) throw UsageError("lambda must be > 0");
  if (ds.n_samples() == 0) throw UsageError("dataset has no samples");
  const std::size_t m = ds.n_features();
  if (m > limits.max_features) {
    throw ResourceError("exhaustive oracle limited to " + std::to_string(limits.max_features) + " features (got " +
                        std::to_string(m) + ")");
  }
  std::size_t k_max = std::size_t{1} << m;
  if (limits.max_leaves != 0) k_max = std::min(k_max, limits.max_leaves);

  const EquivalenceIndex eq = build_equivalence_index(ds);
  const std::size_t n = ds.n_samples();
  detail::ExhaustiveSolver solver(ds, eq, lambda, k_max);
  const Leaf root = make_root_leaf(ds, eq, lambda);
  const auto& table = solver.solve(root).mistakes;

  std::size_t best_k = 1;
  ExactValue best = mistakes_fraction(table[1], n);
  for (std::size_t k = 2; k <= k_max; ++k) {
    if (table[k] == detail::ExhaustiveSolver::kInf) continue;
    const ExactValue r = mistakes_fraction(table[k], n) + lambda * ExactValue(static_cast<std::int64_t>(k));
    if (r < best) {
      best = r;
      best_k = k;
    }
  }

  OracleResult out;
  solver.collect(root, best_k, out.tree.leaves);
  std::sort(out.tree.leaves.begin(), out.tree.leaves.end(),
            [](const LeafRef& a, const LeafRef& b) { return leaf_less(*a, *b); });
  out.tree.splittable.assign(out.tree.leaves.size(), 0);
  out.tree.K = out.tree.leaves.size();
  out.tree.H = penalized_leaf_count(out.tree.leaves.size());
  out.tree.objective = objective(out.tree, lambda, n);
  out.tree.lower_bound = out.tree.objective;
  if (out.tree.objective != best) throw InvariantError("oracle reconstruction disagrees with its table");
  out.objective = best;
  out.leaf_count = best_k;
  out.subproblems = solver.subproblems();
  return out;
}

}  // namespace certree
