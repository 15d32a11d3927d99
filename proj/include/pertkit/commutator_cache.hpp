#pragma once

#include "pertkit/composition.hpp"
#include "pertkit/graded_operator.hpp"

#include <cstddef>
#include <map>
#include <utility>

namespace pertkit {

/// Operand a nested commutator chain starts from.
enum class BaseTag { H, V, dS, O };

const char* to_string(BaseTag tag);

/// Single-order operators indexed by order, e.g. H^(0), H^(1), ... or S^(1), S^(2), ...
using OrderSeries = std::map<int, GradedOperator>;

/// Splits a graded operator into its single-order pieces.
OrderSeries split_by_order(const GradedOperator& op);

/// Per-order anti-hermitian generator pieces S^(1..n).
struct GeneratorSeries {
  OrderSeries S;

  bool has(int order) const { return S.count(order) != 0; }
  const GradedOperator& at(int order) const;
  int max_order() const { return S.empty() ? 0 : S.rbegin()->first; }
  /// Sum of all stored orders.
  GradedOperator total(Eigen::Index dim) const;
};

struct CacheStats {
  std::size_t hits = 0;
  std::size_t misses = 0;
  std::size_t entries = 0;
};

/// Memo of nested commutators [...[base^(h), S^(s1)], ..., S^(sm)] keyed by
/// (base tag, composition). Confined to one transformation run.
class CommutatorCache {
 public:
  const GradedOperator* find(BaseTag tag, const Composition& comp);
  const GradedOperator& insert(BaseTag tag, const Composition& comp, GradedOperator value);

  CacheStats stats() const { return {hits_, misses_, entries_.size()}; }
  void clear();

 private:
  std::map<std::pair<BaseTag, Composition>, GradedOperator> entries_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

/// [...[base^(head), S^(s1)], ..., S^(sm)] for comp = (head; s1..sm).
///
/// Reuses the longest cached prefix and stores every intermediate level. A base
/// order absent from `base` yields the zero operator of dimension `dim`.
/// Throws OrderNotSolved when some s_i is missing from `generator`.
GradedOperator nested_commutator(const OrderSeries& base, BaseTag tag, const Composition& comp,
                                 const GeneratorSeries& generator, CommutatorCache& cache,
                                 Eigen::Index dim);

}  // namespace pertkit
