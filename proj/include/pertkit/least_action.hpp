#pragma once

#include "pertkit/transform.hpp"

#include <vector>

namespace pertkit {

/// Contiguous diagonal blocks, in order.
class BlockStructure {
 public:
  explicit BlockStructure(std::vector<int> sizes);

  /// A single block covering all of `dim`.
  static BlockStructure whole(Eigen::Index dim) { return BlockStructure({static_cast<int>(dim)}); }

  const std::vector<int>& sizes() const { return sizes_; }
  Eigen::Index dim() const { return static_cast<Eigen::Index>(membership_.size()); }
  int block_of(Eigen::Index i) const { return membership_[static_cast<std::size_t>(i)]; }
  bool same_block(Eigen::Index i, Eigen::Index j) const { return block_of(i) == block_of(j); }

 private:
  std::vector<int> sizes_;
  std::vector<int> membership_;
};

/// B(M): keeps in-block entries, zeroes every cross-block entry.
Matrix block_project(const Matrix& m, const BlockStructure& blocks);
GradedOperator block_project(const GradedOperator& m, const BlockStructure& blocks);

/// Left-to-right product series[c1] * series[c2] * ...; a missing order gives zero.
GradedOperator product_over_composition(const OrderSeries& series, const std::vector<int>& comp,
                                        Eigen::Index dim);

/// binomial(-1/2, m).
double binom_minus_half(int m);

/// Order-i term of B(X^dagger) B(X) - I for X = e^{-Z}.
GradedOperator compute_epsilon(int i, const OrderSeries& z, const BlockStructure& blocks);

struct LASeries {
  OrderSeries Z;
  OrderSeries epsilon;  // orders >= 2
  OrderSeries W;        // expansion terms of X^dagger B(X)
  OrderSeries U;        // expansion terms of U^dagger
  OrderSeries S;
};

/// Least-action generator through `max_order` from the full-diagonalization generator Z.
LASeries compute_la_generator(const OrderSeries& z, const BlockStructure& blocks, int max_order);

/// Full diagonalization followed by the least-action recursion; corrections are
/// the BCH series of e^{-S} H e^{S} with the resulting generator.
TransformResult run_la(const GradedOperator& h, const BlockStructure& blocks, int max_order,
                       const TransformOptions& options = {});

}  // namespace pertkit
