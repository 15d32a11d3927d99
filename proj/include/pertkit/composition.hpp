#pragma once

#include <compare>
#include <string>
#include <vector>

namespace pertkit {

/// Index of one nested-commutator or operator-product term: the base operator's
/// order followed by the orders of the successive generator factors.
struct Composition {
  int head = 0;
  std::vector<int> tail;

  int total() const;
  int nestedness() const { return static_cast<int>(tail.size()); }
  /// Length of the flattened tuple (head, tail...).
  int length() const { return 1 + nestedness(); }
  std::vector<int> as_tuple() const;
  std::string to_string() const;

  auto operator<=>(const Composition&) const = default;
};

/// All (head; tail) with head + sum(tail) = n and tail parts >= 1; head >= 1
/// unless allow_zero_head. Ordered by tuple length, then lexicographically.
std::vector<Composition> enumerate_compositions(int n, bool allow_zero_head);

/// Ordered tuples of positive integers summing to n (the set P(n)), same order.
std::vector<std::vector<int>> positive_compositions(int n);

/// Positive compositions of n with exactly `parts` parts (the set T(n, parts)).
std::vector<std::vector<int>> compositions_with_parts(int n, int parts);

}  // namespace pertkit
