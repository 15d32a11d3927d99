#include "pertkit/composition.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace pertkit {

int Composition::total() const { return head + std::accumulate(tail.begin(), tail.end(), 0); }

std::vector<int> Composition::as_tuple() const {
  std::vector<int> t{head};
  t.insert(t.end(), tail.begin(), tail.end());
  return t;
}

std::string Composition::to_string() const {
  std::string s = "(" + std::to_string(head);
  for (int p : tail) s += "," + std::to_string(p);
  return s + ")";
}

namespace {

void extend(int remaining, int parts_left, std::vector<int>& prefix,
            std::vector<std::vector<int>>& out) {
  if (parts_left == 0) {
    if (remaining == 0) out.push_back(prefix);
    return;
  }
  // Each later part needs at least 1.
  for (int p = 1; p <= remaining - (parts_left - 1); ++p) {
    prefix.push_back(p);
    extend(remaining - p, parts_left - 1, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

std::vector<std::vector<int>> compositions_with_parts(int n, int parts) {
  std::vector<std::vector<int>> out;
  if (n < 0 || parts < 0) return out;
  if (parts == 0) {
    if (n == 0) out.emplace_back();
    return out;
  }
  std::vector<int> prefix;
  extend(n, parts, prefix, out);
  return out;
}

std::vector<std::vector<int>> positive_compositions(int n) {
  std::vector<std::vector<int>> out;
  for (int parts = 1; parts <= n; ++parts) {
    auto block = compositions_with_parts(n, parts);
    out.insert(out.end(), block.begin(), block.end());
  }
  return out;
}

std::vector<Composition> enumerate_compositions(int n, bool allow_zero_head) {
  if (n < 1) throw std::invalid_argument("composition total must be at least 1");
  std::vector<Composition> out;
  const int lowest_head = allow_zero_head ? 0 : 1;
  // Tuple length L = 1 + tail size; tail size ranges over 0..n.
  for (int tail_size = 0; tail_size <= n; ++tail_size) {
    std::vector<Composition> level;
    for (int head = lowest_head; head <= n; ++head) {
      for (auto& tail : compositions_with_parts(n - head, tail_size)) {
        level.push_back({head, std::move(tail)});
      }
    }
    std::sort(level.begin(), level.end(),
              [](const Composition& a, const Composition& b) { return a.as_tuple() < b.as_tuple(); });
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

}  // namespace pertkit
