#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "certree/bounds.hpp"
#include "certree/caches.hpp"
#include "certree/dataset.hpp"
#include "certree/errors.hpp"
#include "certree/greedy.hpp"
#include "certree/rational.hpp"
#include "certree/scheduler.hpp"
#include "certree/tree.hpp"

namespace certree {

struct SearchConfig {
  ExactValue lambda = ExactValue(1, 100);
  Policy policy = Policy::Curiosity;
  BoundToggles toggles;
  bool warm_start = true;
  GreedyParams greedy;
  std::optional<double> time_limit_s;
  std::optional<std::uint64_t> max_trees;
  std::optional<std::size_t> max_cache_entries;
  std::uint64_t trace_interval = 1000;  // evaluations between trace records
  bool trace_remaining_bound = true;
  bool trace_remaining_exact = false;  // also keep the exact Gamma (small instances)
  bool debug_checks = false;  // partition + duplicate-expansion assertions

  void validate() const {
    if (!lambda.is_positive()) throw UsageError("lambda must be > 0 (got " + lambda.to_string() + ")");
    if (trace_interval == 0) throw UsageError("trace_interval must be >= 1");
    if (time_limit_s && *time_limit_s < 0) throw UsageError("time limit must be >= 0");
  }
};

enum class StopReason { Exhausted, TimeLimit, MaxTrees, MaxCacheEntries };

inline std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::Exhausted: return "exhausted";
    case StopReason::TimeLimit: return "time_limit";
    case StopReason::MaxTrees: return "max_trees";
    case StopReason::MaxCacheEntries: return "max_cache_entries";
  }
  return "?";
}

struct TraceRecord {
  double elapsed_s = 0.0;
  std::uint64_t trees_evaluated = 0;
  ExactValue best_objective;
  std::optional<ExactValue> min_queue_lower_bound;  // empty queue: none
  std::size_t queue_size = 0;
  std::optional<std::int64_t> log10_remaining;  // none: nothing remains
  std::optional<BigInt> remaining_exact;
};

struct SearchStats {
  std::uint64_t trees_evaluated = 0;
  std::uint64_t trees_to_optimum = 0;
  double time_to_optimum_s = 0.0;
  double total_time_s = 0.0;
  std::size_t max_queue_size = 0;
  std::uint64_t expansions = 0;
  std::uint64_t children_generated = 0;
  std::uint64_t stale_discarded = 0;
  std::uint64_t tree_cache_hits = 0;
  std::size_t tree_cache_size = 0;
  std::size_t leaf_cache_size = 0;
  std::size_t leaf_cache_hits = 0;
  std::uint64_t gc_runs = 0;
  std::uint64_t gc_dropped = 0;
  std::uint64_t best_updates = 0;
};

struct SearchResult {
  TreeState best_tree;
  ExactValue objective;
  bool certified = false;
  ExactValue gap;
  StopReason stop_reason = StopReason::Exhausted;
  SearchStats stats;
  std::vector<TraceRecord> trace;
};

/// Optional callbacks for instrumentation.
struct SearchHooks {
  std::function<void(const TreeState&)> on_expand;    // each tree popped and expanded
  std::function<void(const TreeState&)> on_evaluate;  // each tree whose objective was computed
  std::function<void(const TraceRecord&)> on_trace;
};

/// Branch-and-bound driver. One instance runs one search.
class Searcher {
 public:
  Searcher(const Dataset& ds, SearchConfig config, SearchHooks hooks = {})
      : ds_(ds),
        eq_(build_equivalence_index(ds)),
        config_(std::move(config)),
        hooks_(std::move(hooks)),
        n_(ds.n_samples()),
        m_(ds.n_features()),
        queue_(config_.policy, ds.n_samples()) {
    config_.validate();
    if (n_ == 0) throw UsageError("dataset has no samples");
  }

  const EquivalenceIndex& equivalence() const noexcept { return eq_; }
  const SearchConfig& config() const noexcept { return config_; }
  const ExactValue& best() const noexcept { return best_; }
  const TreeState& best_tree() const noexcept { return best_tree_; }
  LeafCache& leaf_cache() noexcept { return leaf_cache_; }
  const WorkQueue& queue() const noexcept { return queue_; }
  const SearchStats& stats() const noexcept { return stats_; }

  SearchResult run() {
    start_ = Clock::now();
    initialize();
    record_trace();
    while (!stopped_) {
      if (trace_due_) {
        trace_due_ = false;
        record_trace();
        check_time();
        if (stopped_) break;
      }
      auto popped = queue_.pop_live([this](const TreeState& t) { return is_live(t); });
      if (!popped) break;
      expand(*popped);
      if (stopped_) interrupted_b_ = popped->lower_bound;
    }
    return finish();
  }

  /// Sets up best/best_tree and enqueues the root. Called by run().
  void initialize() {
    TreeState root = root_tree(ds_, config_.lambda, eq_);
    root.leaves.front() = leaf_cache_.intern({}, [&] { return make_root_leaf(ds_, eq_, config_.lambda); });
    root.generation = queue_.next_sequence();
    best_ = root.objective;
    best_tree_ = root;
    note_evaluated(root);
    if (config_.warm_start) {
      TreeState warm = greedy_fit(ds_, config_.greedy, config_.lambda, eq_);
      if (warm.objective < best_) {
        best_ = warm.objective;
        best_tree_ = std::move(warm);
      }
    }
    if (config_.toggles.permutation_cache) tree_cache_.seen_or_mark(tree_key(root), root.lower_bound);
    if (designated_leaf(root)) queue_.push(std::move(root));
    stats_.max_queue_size = queue_.max_size();
  }

  /// Generates, evaluates and enqueues the admissible children of `tree`.
  /// Returns the children that were enqueued.
  std::vector<TreeState> expand(const TreeState& tree) {
    std::vector<TreeState> enqueued;
    ++stats_.expansions;
    if (hooks_.on_expand) hooks_.on_expand(tree);
    if (config_.debug_checks) {
      if (config_.toggles.permutation_cache && !expanded_keys_.insert(tree_key(tree)).second) {
        throw InvariantError("tree expanded twice under the permutation cache");
      }
    }
    const auto idx_opt = designated_leaf(tree);
    if (!idx_opt) return enqueued;
    const std::size_t idx = *idx_opt;
    const LeafRef& leaf = tree.leaves[idx];
    const auto& tg = config_.toggles;
    const ExactValue& lambda = config_.lambda;

    const std::int64_t cap = std::min(max_leaves_parent_specific(tree.lower_bound, tree.H, best_, lambda, m_),
                                      max_leaves_current(best_, lambda, m_));

    // Retire the designated leaf without splitting it.
    if (!retire_forbidden(tree, idx)) {
      TreeState child = tree;
      child.splittable[idx] = 0;
      child.K = tree.K + 1;
      child.generation = 0;
      const LeafRef moved[] = {leaf};
      child.lower_bound = incremental_lower_bound(tree.lower_bound, moved, lambda, 0, n_);
      consider(std::move(child), tree, enqueued, cap);
      if (stopped_) return enqueued;
    }

    struct Candidate {
      std::size_t feature;
      LeafRef off, on;
      bool must_split;
      bool admissible;
    };
    std::vector<Candidate> candidates;
    for (std::size_t f = 0; f < m_; ++f) {
      if (leaf->has_feature(f) || leaf->is_dead_feature(f)) continue;
      const std::size_t on_count = BitVector::count_and(leaf->capture, ds_.column(f));
      if (on_count == 0 || on_count == leaf->n_captured) {
        leaf->mark_dead_feature(f);  // one side empty: never useful
        continue;
      }
      LeafRef off = leaf_cache_.child(*leaf, f, false, ds_, eq_, lambda);
      LeafRef on = leaf_cache_.child(*leaf, f, true, ds_, eq_, lambda);
      bool admissible = true;
      if (tg.leaf_accuracy && (!child_accuracy_admissible(off->n_correct, lambda, n_) ||
                               !child_accuracy_admissible(on->n_correct, lambda, n_))) {
        leaf->mark_dead_feature(f);
        admissible = false;
        if (!tg.similar_support) continue;
      }
      const bool must = tg.incremental_accuracy && split_gain(*leaf, *off, *on, n_, lambda).must_split_further;
      candidates.push_back({f, std::move(off), std::move(on), must, admissible});
    }

    const std::size_t delta_h = tree.size() == 1 ? 2 : 1;

    // (off splittable, on splittable)
    static constexpr std::pair<bool, bool> kAssignments[] = {{false, false}, {false, true}, {true, false}, {true, true}};
    for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
      const Candidate& c = candidates[ci];
      if (!c.admissible) continue;
      for (const auto& [s_off, s_on] : kAssignments) {
        if (c.must_split && !s_off && !s_on) continue;
        if (tg.node_support && ((s_off && c.off->dead) || (s_on && c.on->dead))) continue;
        TreeState child = make_split_child(tree, idx, c.off, c.on, s_off, s_on, c.must_split);
        std::vector<LeafRef> moved;
        if (!s_off) moved.push_back(c.off);
        if (!s_on) moved.push_back(c.on);
        child.lower_bound = incremental_lower_bound(tree.lower_bound, moved, lambda, delta_h, n_);
        bool similar_pruned = false;
        if (tg.similar_support) similar_pruned = similar_support_prunes(tree, candidates, ci, s_off, s_on, delta_h);
        consider(std::move(child), tree, enqueued, cap, similar_pruned);
        if (stopped_) return enqueued;
      }
    }
    return enqueued;
  }

  /// The canonically-first splittable leaf that may be split.
  std::optional<std::size_t> designated_leaf(const TreeState& tree) const {
    for (std::size_t i = 0; i < tree.size(); ++i) {
      if (!tree.splittable[i]) continue;
      if (config_.toggles.node_support && tree.leaves[i]->dead) continue;
      return i;
    }
    return std::nullopt;
  }

  /// Pop-time revalidation against the current best objective.
  bool is_live(const TreeState& t) {
    const bool live = pruning_floor(t) < best_;
    if (!live) ++stats_.stale_discarded;
    return live;
  }

  /// (certified, gap) for the current state.
  std::pair<bool, ExactValue> certify() const {
    std::optional<ExactValue> min_b = interrupted_b_;
    for (const auto& e : queue_.entries()) {
      if (pruning_floor(e.tree) >= best_) continue;
      if (!min_b || e.tree.lower_bound < *min_b) min_b = e.tree.lower_bound;
    }
    if (!min_b) return {true, ExactValue(0)};
    return {false, best_ - min(*min_b, best_)};
  }

 private:
  using Clock = std::chrono::steady_clock;

  double elapsed() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

  // Smallest objective any strict extension of `t` can reach under the
  // active bounds.
  ExactValue pruning_floor(const TreeState& t) const {
    ExactValue floor = t.lower_bound;
    if (config_.toggles.equivalent_points) floor += equivalent_points_floor(t, n_);
    if (config_.toggles.lookahead) floor += config_.lambda;
    return floor;
  }

  bool retire_forbidden(const TreeState& tree, std::size_t idx) const {
    if (!config_.toggles.incremental_accuracy) return false;
    const Leaf* sibling = nullptr;
    if (!tree.in_must_split_pair(tree.leaves[idx].get(), &sibling)) return false;
    const int j = tree.index_of(sibling);
    return j >= 0 && !tree.splittable[static_cast<std::size_t>(j)];
  }

  TreeState make_split_child(const TreeState& tree, std::size_t idx, const LeafRef& off, const LeafRef& on, bool s_off,
                             bool s_on, bool must) const {
    TreeState child;
    child.leaves.reserve(tree.size() + 1);
    child.splittable.reserve(tree.size() + 1);
    for (std::size_t i = 0; i < tree.size(); ++i) {
      if (i == idx) continue;
      child.leaves.push_back(tree.leaves[i]);
      child.splittable.push_back(tree.splittable[i]);
    }
    for (const auto& [ref, flag] : {std::pair{off, s_off}, std::pair{on, s_on}}) {
      auto pos = std::upper_bound(child.leaves.begin(), child.leaves.end(), ref,
                                  [](const LeafRef& a, const LeafRef& b) { return leaf_less(*a, *b); });
      const auto at = static_cast<std::size_t>(pos - child.leaves.begin());
      child.leaves.insert(pos, ref);
      child.splittable.insert(child.splittable.begin() + static_cast<std::ptrdiff_t>(at), flag ? 1 : 0);
    }
    const Leaf* split_leaf = tree.leaves[idx].get();
    for (const auto& p : tree.must_split_pairs) {
      if (p.first != split_leaf && p.second != split_leaf) child.must_split_pairs.push_back(p);
    }
    if (must) child.must_split_pairs.emplace_back(off.get(), on.get());
    child.K = tree.K + (s_off ? 0 : 1) + (s_on ? 0 : 1);
    child.H = penalized_leaf_count(child.leaves.size());
    return child;
  }

  // Prunes a candidate (feature f1, assignment A) when a sibling candidate
  // (f2, A) already has lower bound >= best + omega.
  bool similar_support_prunes(const TreeState& tree, const auto& candidates, std::size_t ci, bool s_off, bool s_on,
                              std::size_t delta_h) const {
    const auto& mine = candidates[ci];
    for (std::size_t cj = 0; cj < candidates.size(); ++cj) {
      if (cj == ci) continue;
      const auto& other = candidates[cj];
      std::size_t moved = 0;
      if (!s_off) moved += other.off->mistakes;
      if (!s_on) moved += other.on->mistakes;
      const ExactValue other_b = tree.lower_bound + config_.lambda * ExactValue(static_cast<std::int64_t>(delta_h)) +
                                 mistakes_fraction(moved, n_);
      if (other_b < best_) continue;
      const ExactValue omega = similar_support_omega(mine.off->capture, other.off->capture, n_);
      if (other_b >= best_ + omega) return true;
    }
    return false;
  }

  void consider(TreeState child, const TreeState& parent, std::vector<TreeState>& enqueued,
                std::optional<std::int64_t> cap = std::nullopt, bool similar_pruned = false) {
    ++stats_.children_generated;
    if (child.lower_bound >= best_) return;
    if (config_.toggles.permutation_cache) {
      if (tree_cache_.seen_or_mark(tree_key(child), child.lower_bound)) {
        ++stats_.tree_cache_hits;
        return;
      }
      if (config_.max_cache_entries && tree_cache_.size() + leaf_cache_.size() > *config_.max_cache_entries) {
        stop(StopReason::MaxCacheEntries);
      }
    }
    child.H = penalized_leaf_count(child.size());
    if (child.leaves.size() == parent.leaves.size()) {
      child.objective = parent.objective;  // retire: same leaves
    } else {
      std::vector<LeafRef> split_side;
      for (std::size_t i = 0; i < child.size(); ++i) {
        if (child.splittable[i]) split_side.push_back(child.leaves[i]);
      }
      child.objective = incremental_objective(child.lower_bound, split_side, n_);
    }
    if (config_.debug_checks) {
      check_partition(child, n_);
      if (child.lower_bound != lower_bound_from_scratch(child, config_.lambda, n_) ||
          child.objective != objective(child, config_.lambda, n_)) {
        throw InvariantError("incremental bound disagrees with recomputation");
      }
      if (child.lower_bound < parent.lower_bound) throw InvariantError("child lower bound below parent's");
    }
    note_evaluated(child);
    if (child.objective < best_) improve(child);

    if (!designated_leaf(child)) return;  // terminal
    if (config_.toggles.lookahead && lookahead_prunes(child.lower_bound, config_.lambda, best_)) return;
    if (config_.toggles.equivalent_points && pruning_floor(child) >= best_) return;
    if (cap && static_cast<std::int64_t>(child.H) >= *cap) return;
    if (similar_pruned) return;
    if (stopped_) return;
    child.generation = queue_.next_sequence();
    enqueued.push_back(child);
    queue_.push(std::move(child));
    stats_.max_queue_size = std::max(stats_.max_queue_size, queue_.size());
  }

  void note_evaluated(const TreeState& t) {
    ++stats_.trees_evaluated;
    if (hooks_.on_evaluate) hooks_.on_evaluate(t);
    if (config_.max_trees && stats_.trees_evaluated >= *config_.max_trees) stop(StopReason::MaxTrees);
    if (stats_.trees_evaluated % config_.trace_interval == 0) trace_due_ = true;
  }

  void improve(const TreeState& t) {
    best_ = t.objective;
    best_tree_ = t;
    ++stats_.best_updates;
    stats_.trees_to_optimum = stats_.trees_evaluated;
    stats_.time_to_optimum_s = elapsed();
    if (config_.toggles.permutation_cache) {
      const auto purge = tree_cache_.garbage_collect(best_, config_.lambda, config_.toggles.lookahead);
      ++stats_.gc_runs;
      stats_.gc_dropped += purge.tree_entries_dropped;
    }
  }

  void check_time() {
    if (config_.time_limit_s && elapsed() >= *config_.time_limit_s) stop(StopReason::TimeLimit);
  }

  void stop(StopReason why) {
    if (!stopped_) {
      stopped_ = true;
      stop_reason_ = why;
    }
  }

  void record_trace() {
    TraceRecord r;
    r.elapsed_s = elapsed();
    r.trees_evaluated = stats_.trees_evaluated;
    r.best_objective = best_;
    r.queue_size = queue_.size();
    const auto& profile = queue_.profile();
    if (!profile.empty()) r.min_queue_lower_bound = profile.begin()->first.first;
    std::vector<QueueSummary> snapshot;
    snapshot.reserve(profile.size());
    for (const auto& [k, count] : profile) snapshot.push_back({k.first, k.second, count});
    if (config_.trace_remaining_bound) {
      r.log10_remaining = remaining_evaluations_log10(best_, snapshot, config_.lambda, m_);
    }
    if (config_.trace_remaining_exact) {
      r.remaining_exact = remaining_evaluations_exact(best_, snapshot, config_.lambda, m_);
    }
    if (hooks_.on_trace) hooks_.on_trace(r);
    trace_.push_back(std::move(r));
  }

  SearchResult finish() {
    record_trace();
    SearchResult out;
    const auto [certified, gap] = certify();
    out.certified = certified;
    out.gap = gap;
    out.stop_reason = certified ? StopReason::Exhausted : stop_reason_;
    out.best_tree = best_tree_;
    out.objective = best_;
    stats_.total_time_s = elapsed();
    stats_.max_queue_size = std::max(stats_.max_queue_size, queue_.max_size());
    stats_.tree_cache_size = tree_cache_.size();
    stats_.leaf_cache_size = leaf_cache_.size();
    stats_.leaf_cache_hits = leaf_cache_.hits();
    out.stats = stats_;
    out.trace = std::move(trace_);
    return out;
  }

  const Dataset& ds_;
  EquivalenceIndex eq_;
  SearchConfig config_;
  SearchHooks hooks_;
  std::size_t n_;
  std::size_t m_;
  WorkQueue queue_;
  LeafCache leaf_cache_;
  TreeCache tree_cache_;
  ExactValue best_;
  TreeState best_tree_;
  SearchStats stats_;
  std::vector<TraceRecord> trace_;
  std::set<TreeKey> expanded_keys_;
  Clock::time_point start_;
  bool trace_due_ = false;
  bool stopped_ = false;
  StopReason stop_reason_ = StopReason::Exhausted;
  std::optional<ExactValue> interrupted_b_;
};

/// Runs the branch-and-bound search to completion or to a configured limit.
inline SearchResult fit(const Dataset& ds, const SearchConfig& config, SearchHooks hooks = {}) {
  Searcher s(ds, config, std::move(hooks));
  return s.run();
}

}  // namespace certree
