#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "certree/bitvec.hpp"
#include "certree/errors.hpp"
#include "certree/rational.hpp"
#include "certree/tree.hpp"

namespace certree {

/// Which optional pruning rules are active. The hierarchical lower bound is
/// not listed: the search is wrong without it.
struct BoundToggles {
  bool lookahead = true;
  bool node_support = true;
  bool incremental_accuracy = true;
  bool leaf_accuracy = true;
  bool equivalent_points = true;
  bool permutation_cache = true;
  bool similar_support = false;

  static constexpr bool hierarchical = true;

  friend bool operator==(const BoundToggles&, const BoundToggles&) = default;
};

/// Support below 2*lambda: the leaf may exist but is never split.
inline bool leaf_is_dead(std::size_t n_captured, const ExactValue& lambda, std::size_t n) {
  if (n == 0) throw UsageError("leaf_is_dead: N must be positive");
  return detail::fraction_below(n_captured, lambda, n, 2);
}

/// n_correct / N >= lambda.
inline bool child_accuracy_admissible(std::size_t n_correct, const ExactValue& lambda, std::size_t n) {
  if (n == 0) throw UsageError("child_accuracy_admissible: N must be positive");
  return !detail::fraction_below(n_correct, lambda, n, 1);
}

struct SplitGain {
  ExactValue accuracy_gain;  // a_k
  bool must_split_further = false;
};

/// Accuracy gained by replacing `parent` with `left` and `right`. When the
/// gain is below lambda at least one of the two must be split again.
inline SplitGain split_gain(const Leaf& parent, const Leaf& left, const Leaf& right, std::size_t n,
                            const ExactValue& lambda) {
  if (left.n_captured + right.n_captured != parent.n_captured ||
      BitVector::count_and(left.capture, right.capture) != 0 ||
      BitVector::count_and(left.capture, parent.capture) != left.n_captured ||
      BitVector::count_and(right.capture, parent.capture) != right.n_captured) {
    throw UsageError("split_gain: children do not partition the parent's capture");
  }
  const auto gain = static_cast<std::int64_t>(left.n_correct + right.n_correct) -
                    static_cast<std::int64_t>(parent.n_correct);
  SplitGain out;
  out.accuracy_gain = ExactValue(gain, static_cast<std::int64_t>(n));
  out.must_split_further = out.accuracy_gain < lambda;
  return out;
}

/// One-step lookahead: every strict extension has objective >= b + lambda.
inline bool lookahead_prunes(const ExactValue& b, const ExactValue& lambda, const ExactValue& best) {
  return b + lambda >= best;
}

/// b_0: minority-label mass of equivalent points inside splittable leaves.
inline ExactValue equivalent_points_floor(const TreeState& tree, std::size_t n) {
  return mistakes_fraction(tree.splittable_b0(), n);
}

namespace detail {

inline std::int64_t pow2_saturating(std::size_t m) {
  return m >= 62 ? std::int64_t{1} << 62 : std::int64_t{1} << m;
}

inline void require_positive_lambda(const ExactValue& lambda, const char* who) {
  if (!lambda.is_positive()) throw UsageError(std::string(who) + ": lambda must be > 0");
}

}  // namespace detail

inline std::int64_t max_leaves_apriori(const ExactValue& lambda, std::size_t m) {
  detail::require_positive_lambda(lambda, "max_leaves_apriori");
  const std::int64_t by_lambda = (ExactValue(1) / (ExactValue(2) * lambda)).floor();
  return std::min(by_lambda, detail::pow2_saturating(m));
}

inline std::int64_t max_leaves_current(const ExactValue& best, const ExactValue& lambda, std::size_t m) {
  detail::require_positive_lambda(lambda, "max_leaves_current");
  return std::min((best / lambda).floor(), detail::pow2_saturating(m));
}

/// Strict cap on the leaf count of any child of a tree with lower bound
/// `parent_b` and `parent_h` leaves that could still be worth extending.
inline std::int64_t max_leaves_parent_specific(const ExactValue& parent_b, std::size_t parent_h,
                                               const ExactValue& best, const ExactValue& lambda, std::size_t m) {
  detail::require_positive_lambda(lambda, "max_leaves_parent_specific");
  const std::int64_t room = ((best - parent_b) / lambda).floor();
  return std::min(static_cast<std::int64_t>(parent_h) + room, detail::pow2_saturating(m));
}

/// Queue entry summary used by the remaining-evaluations bound.
struct QueueSummary {
  ExactValue lower_bound;
  std::size_t leaf_count = 0;
  std::size_t count = 1;  // entries sharing this (b, L)
};

namespace detail {

inline BigInt pow3(std::size_t m) {
  BigInt v = 1;
  for (std::size_t i = 0; i < m; ++i) v *= 3;
  return v;
}

// Sum_{k=0}^{f} T! / (T-k)!, exactly.
inline BigInt falling_factorial_sum(const BigInt& t, std::int64_t f) {
  BigInt total = 0;
  BigInt term = 1;
  for (std::int64_t k = 0; k <= f; ++k) {
    total += term;
    term *= (t - k);
  }
  return total;
}

// Natural log of Sum_{k=0}^{f} T!/(T-k)! for f >= 0, T >= f.
inline double ln_falling_factorial_sum(double t, std::int64_t f) {
  double ln_top = 0.0;  // ln P(T, f)
  for (std::int64_t i = 0; i < f; ++i) ln_top += std::log(t - static_cast<double>(i));
  // Sum relative to the top term: 1 + 1/(T-f+1) + 1/((T-f+1)(T-f+2)) + ...
  double rel = 1.0;
  double ratio = 1.0;
  for (std::int64_t k = f; k > 0; --k) {
    ratio /= (t - static_cast<double>(k) + 1.0);
    rel += ratio;
    if (ratio < 1e-18) break;
  }
  return ln_top + std::log(rel);
}

inline double ln_add(double a, double b) {
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

// Cap on f below which the exact path is used (keeps big integers small).
constexpr double kExactLog10Ceiling = 30.0;

inline std::int64_t floor_log10(const BigInt& v) {
  std::int64_t digits = 0;
  BigInt x = v;
  while (x >= 10) {
    x /= 10;
    ++digits;
  }
  return digits;
}

}  // namespace detail

/// Exact remaining-evaluations bound Gamma over a queue snapshot.
inline BigInt remaining_evaluations_exact(const ExactValue& best, std::span<const QueueSummary> queue,
                                          const ExactValue& lambda, std::size_t m) {
  detail::require_positive_lambda(lambda, "remaining_evaluations_exact");
  const BigInt three_m = detail::pow3(m);
  BigInt total = 0;
  for (const auto& e : queue) {
    const BigInt t = three_m - e.leaf_count;
    if (t < 0) continue;
    std::int64_t f = ((best - e.lower_bound) / lambda).floor();
    if (f < 0) continue;
    if (BigInt(f) > t) f = static_cast<std::int64_t>(t);
    total += detail::falling_factorial_sum(t, f) * e.count;
  }
  return total;
}

/// floor(log10 Gamma) over a queue snapshot; nullopt when Gamma = 0
/// (nothing remains). Small totals are computed exactly, large ones in the
/// log domain.
inline std::optional<std::int64_t> remaining_evaluations_log10(const ExactValue& best,
                                                               std::span<const QueueSummary> queue,
                                                               const ExactValue& lambda, std::size_t m) {
  detail::require_positive_lambda(lambda, "remaining_evaluations_log10");
  const double three_m = std::pow(3.0, static_cast<double>(m));
  std::map<std::pair<std::size_t, std::int64_t>, std::size_t> groups;  // (L, f) -> count
  for (const auto& e : queue) {
    if (static_cast<double>(e.leaf_count) > three_m) continue;
    std::int64_t f = ((best - e.lower_bound) / lambda).floor();
    if (f < 0) continue;
    const double t = three_m - static_cast<double>(e.leaf_count);
    if (static_cast<double>(f) > t) f = static_cast<std::int64_t>(t);
    groups[{e.leaf_count, f}] += e.count;
  }
  if (groups.empty()) return std::nullopt;
  double ln_total = -INFINITY;
  for (const auto& [key, count] : groups) {
    const double t = three_m - static_cast<double>(key.first);
    ln_total = detail::ln_add(ln_total, detail::ln_falling_factorial_sum(t, key.second) +
                                            std::log(static_cast<double>(count)));
  }
  const double log10_total = ln_total / std::log(10.0);
  if (log10_total < detail::kExactLog10Ceiling && m < 40) {
    return detail::floor_log10(remaining_evaluations_exact(best, queue, lambda, m));
  }
  return static_cast<std::int64_t>(std::floor(log10_total));
}

/// Sum_{k=0}^{K} P(3^M, k) with K = min(floor(1/(2 lambda)), 2^M).
inline BigInt total_evaluations_bound_exact(const ExactValue& lambda, std::size_t m) {
  const std::int64_t k = max_leaves_apriori(lambda, m);
  return detail::falling_factorial_sum(detail::pow3(m), k);
}

inline std::int64_t total_evaluations_bound_log10(const ExactValue& lambda, std::size_t m) {
  const std::int64_t k = max_leaves_apriori(lambda, m);
  const double three_m = std::pow(3.0, static_cast<double>(m));
  const double kk = std::min(static_cast<double>(k), three_m);
  const double log10_total = detail::ln_falling_factorial_sum(three_m, static_cast<std::int64_t>(kk)) / std::log(10.0);
  if (log10_total < detail::kExactLog10Ceiling && m < 40) {
    return detail::floor_log10(total_evaluations_bound_exact(lambda, m));
  }
  return static_cast<std::int64_t>(std::floor(log10_total));
}

inline BigInt permutations(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return 0;
  BigInt v = 1;
  for (std::int64_t i = 0; i < k; ++i) v *= (n - i);
  return v;
}

inline BigInt combinations(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  BigInt v = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    v *= (n - k + i);
    v /= i;
  }
  return v;
}

/// Evaluations saved by keeping one leaf ordering: Sum_{k=1}^{K} P(M,k) - C(M,k).
inline BigInt symmetry_savings(std::int64_t m, std::int64_t k_max) {
  if (k_max < 1) throw UsageError("symmetry_savings: K must be >= 1");
  BigInt total = 0;
  for (std::int64_t k = 1; k <= k_max; ++k) total += permutations(m, k) - combinations(m, k);
  return total;
}

namespace detail {

inline BigInt big_pow(BigInt base, std::uint64_t exp) {
  BigInt out = 1;
  while (exp > 0) {
    if (exp & 1U) out *= base;
    base *= base;
    exp >>= 1U;
  }
  return out;
}

// Nested sums over n_level = 1..2^{prev}; the innermost level collapses by
// the binomial theorem: Sum_{n=1}^{2^a} C(2^a, n) x^n = (1 + x)^{2^a} - 1.
inline BigInt count_trees_level(std::int64_t p, std::int64_t depth, std::int64_t level, std::int64_t prev) {
  const std::int64_t choices = std::max<std::int64_t>(p - level, 0);
  const std::uint64_t slots = std::uint64_t{1} << prev;
  if (level == depth - 1) return big_pow(BigInt(1 + choices), slots) - 1;
  BigInt total = 0;
  const BigInt x = choices;
  BigInt x_pow = 1;
  for (std::uint64_t n = 1; n <= slots; ++n) {
    x_pow *= x;
    if (x_pow == 0) break;
    total += combinations(static_cast<std::int64_t>(slots), static_cast<std::int64_t>(n)) * x_pow *
             count_trees_level(p, depth, level + 1, static_cast<std::int64_t>(n));
  }
  return total;
}

}  // namespace detail

/// Distinct full binary trees of exact depth d over p binary features.
inline BigInt count_trees_at_depth(std::int64_t p, std::int64_t d) {
  if (p < 1 || d < 1) throw UsageError("count_trees: p and d must be >= 1");
  if (d > 5) throw ResourceError("count_trees: depth above 5 is too large to evaluate exactly");
  if (d == 1) return p;
  return BigInt(p) * detail::count_trees_level(p, d, 1, 1);
}

/// Cumulative tree count for depths 1..d.
inline BigInt count_trees(std::int64_t p, std::int64_t d) {
  if (p < 1 || d < 1) throw UsageError("count_trees: p and d must be >= 1");
  BigInt total = 0;
  for (std::int64_t t = 1; t <= d; ++t) total += count_trees_at_depth(p, t);
  return total;
}

/// Normalized size of the symmetric difference of two capture sets.
inline ExactValue similar_support_omega(const BitVector& a, const BitVector& b, std::size_t n) {
  if (a.size() != b.size()) throw UsageError("similar_support_omega: length mismatch");
  if (n == 0) throw UsageError("similar_support_omega: N must be positive");
  return ExactValue(static_cast<std::int64_t>(BitVector::count_xor(a, b)), static_cast<std::int64_t>(n));
}

}  // namespace certree
