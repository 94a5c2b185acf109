#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "certree/certree.hpp"

namespace certree::testkit {

// Random binary dataset; duplicate rows appear naturally when 2^m is small.
inline Dataset random_dataset(std::mt19937_64& rng, std::size_t n, std::size_t m, double noise = 0.2) {
  std::bernoulli_distribution coin(0.5);
  std::bernoulli_distribution flip(noise);
  std::uniform_int_distribution<std::size_t> pick(0, m == 0 ? 0 : m - 1);
  const std::size_t a = pick(rng), b = pick(rng);
  std::vector<std::vector<int>> rows(n, std::vector<int>(m));
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) rows[i][j] = coin(rng) ? 1 : 0;
    int y = m == 0 ? 0 : (rows[i][a] & (1 - rows[i][b])) | (rows[i][b] & rows[i][a]);
    if (flip(rng)) y = 1 - y;
    labels[i] = y;
  }
  return Dataset::from_rows(rows, labels);
}

// Four copies of (0,1) labelled 1 and a conflicting (1,0) pair.
inline Dataset six_sample_dataset() {
  return Dataset::from_rows({{0, 1}, {0, 1}, {0, 1}, {0, 1}, {1, 0}, {1, 0}}, {1, 1, 1, 1, 0, 1});
}

// N samples, feature 0 equals the label.
inline Dataset separable_dataset(std::size_t n) {
  std::vector<std::vector<int>> rows;
  std::vector<int> labels;
  for (std::size_t i = 0; i < n; ++i) {
    const int y = static_cast<int>(i % 2);
    rows.push_back({y});
    labels.push_back(y);
  }
  return Dataset::from_rows(rows, labels);
}

struct LeafSpec {
  std::vector<Clause> clauses;
  bool splittable = false;
};

// A TreeState built from scratch from clause sets.
inline TreeState make_tree(const Dataset& ds, const EquivalenceIndex& eq, const ExactValue& lambda,
                           const std::vector<LeafSpec>& specs) {
  TreeState t;
  std::vector<std::pair<LeafRef, bool>> leaves;
  for (const auto& s : specs) {
    auto leaf = std::make_shared<const Leaf>(build_leaf(s.clauses, capture_of(s.clauses, ds), ds, eq, lambda));
    leaves.emplace_back(std::move(leaf), s.splittable);
  }
  std::sort(leaves.begin(), leaves.end(), [](const auto& a, const auto& b) { return leaf_less(*a.first, *b.first); });
  for (auto& [l, s] : leaves) {
    t.leaves.push_back(l);
    t.splittable.push_back(s ? 1 : 0);
    if (!s) ++t.K;
  }
  t.H = penalized_leaf_count(t.size());
  t.lower_bound = lower_bound_from_scratch(t, lambda, ds.n_samples());
  t.objective = objective(t, lambda, ds.n_samples());
  return t;
}

struct IncrementalCheck {
  std::size_t pairs = 0;
  std::size_t mismatches = 0;
};

// Random parent -> child steps (split a random splittable leaf, or retire
// it), comparing incremental bound/objective against recomputation.
inline IncrementalCheck random_incremental_pairs(std::mt19937_64& rng, std::size_t pairs) {
  IncrementalCheck out;
  const ExactValue lambdas[] = {ExactValue(1, 100), ExactValue(1, 20), ExactValue(1, 10), ExactValue(3, 200)};
  while (out.pairs < pairs) {
    const std::size_t n = 5 + rng() % 60, m = 2 + rng() % 5;
    const Dataset ds = random_dataset(rng, n, m, 0.3);
    const auto eq = build_equivalence_index(ds);
    const ExactValue lambda = lambdas[rng() % 4];
    TreeState tree = root_tree(ds, lambda, eq);
    for (int step = 0; step < 8 && out.pairs < pairs; ++step) {
      std::vector<std::size_t> open;
      for (std::size_t i = 0; i < tree.size(); ++i) {
        if (tree.splittable[i]) open.push_back(i);
      }
      if (open.empty()) break;
      const std::size_t idx = open[rng() % open.size()];
      const LeafRef leaf = tree.leaves[idx];
      std::vector<std::size_t> features;
      for (std::size_t f = 0; f < m; ++f) {
        if (!leaf->has_feature(f)) features.push_back(f);
      }
      TreeState child;
      std::vector<LeafRef> moved;
      std::size_t delta_h = 0;
      if (features.empty() || rng() % 5 == 0) {
        child = tree;
        child.splittable[idx] = 0;
        ++child.K;
        moved.push_back(leaf);
      } else {
        const std::size_t f = features[rng() % features.size()];
        const bool s_off = rng() % 2, s_on = rng() % 2;
        auto off = std::make_shared<const Leaf>(make_child_leaf(*leaf, f, false, ds, eq, lambda));
        auto on = std::make_shared<const Leaf>(make_child_leaf(*leaf, f, true, ds, eq, lambda));
        std::vector<std::pair<LeafRef, bool>> ls;
        for (std::size_t i = 0; i < tree.size(); ++i) {
          if (i != idx) ls.emplace_back(tree.leaves[i], tree.splittable[i] != 0);
        }
        ls.emplace_back(off, s_off);
        ls.emplace_back(on, s_on);
        std::sort(ls.begin(), ls.end(), [](const auto& a, const auto& b) { return leaf_less(*a.first, *b.first); });
        for (auto& [l, s] : ls) {
          child.leaves.push_back(l);
          child.splittable.push_back(s ? 1 : 0);
          if (!s) ++child.K;
        }
        if (!s_off) moved.push_back(off);
        if (!s_on) moved.push_back(on);
        delta_h = tree.size() == 1 ? 2 : 1;
      }
      child.H = penalized_leaf_count(child.size());
      child.lower_bound = incremental_lower_bound(tree.lower_bound, moved, lambda, delta_h, n);
      std::vector<LeafRef> split_side;
      for (std::size_t i = 0; i < child.size(); ++i) {
        if (child.splittable[i]) split_side.push_back(child.leaves[i]);
      }
      child.objective = incremental_objective(child.lower_bound, split_side, n);
      ++out.pairs;
      if (child.lower_bound != lower_bound_from_scratch(child, lambda, n) ||
          child.objective != objective(child, lambda, n)) {
        ++out.mismatches;
      }
      tree = std::move(child);
    }
  }
  return out;
}

inline SearchConfig config_for(const ExactValue& lambda) {
  SearchConfig c;
  c.lambda = lambda;
  c.debug_checks = true;
  return c;
}

}  // namespace certree::testkit
