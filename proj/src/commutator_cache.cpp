#include "pertkit/commutator_cache.hpp"

#include "pertkit/errors.hpp"

namespace pertkit {

const char* to_string(BaseTag tag) {
  switch (tag) {
    case BaseTag::H: return "H";
    case BaseTag::V: return "V";
    case BaseTag::dS: return "dS";
    case BaseTag::O: return "O";
  }
  return "?";
}

OrderSeries split_by_order(const GradedOperator& op) {
  OrderSeries out;
  for (const auto& [key, m] : op.terms()) {
    auto it = out.try_emplace(key.order, op.dim(), op.omega_d()).first;
    it->second.set_term(key.order, key.harmonic, m);
  }
  return out;
}

const GradedOperator& GeneratorSeries::at(int order) const {
  auto it = S.find(order);
  if (it == S.end()) {
    throw OrderNotSolved("generator order " + std::to_string(order) + " has not been solved");
  }
  return it->second;
}

GradedOperator GeneratorSeries::total(Eigen::Index dim) const {
  GradedOperator sum(dim);
  for (const auto& [n, s] : S) sum += s;
  return sum;
}

const GradedOperator* CommutatorCache::find(BaseTag tag, const Composition& comp) {
  auto it = entries_.find({tag, comp});
  if (it == entries_.end()) {
    ++misses_;
    return nullptr;
  }
  ++hits_;
  return &it->second;
}

const GradedOperator& CommutatorCache::insert(BaseTag tag, const Composition& comp,
                                              GradedOperator value) {
  auto [it, inserted] = entries_.insert_or_assign({tag, comp}, std::move(value));
  return it->second;
}

void CommutatorCache::clear() {
  entries_.clear();
  hits_ = 0;
  misses_ = 0;
}

GradedOperator nested_commutator(const OrderSeries& base, BaseTag tag, const Composition& comp,
                                 const GeneratorSeries& generator, CommutatorCache& cache,
                                 Eigen::Index dim) {
  for (int s : comp.tail) (void)generator.at(s);

  if (const GradedOperator* hit = cache.find(tag, comp)) return *hit;

  // Walk back to the longest cached prefix.
  Composition prefix{comp.head, comp.tail};
  const GradedOperator* start = nullptr;
  while (!prefix.tail.empty()) {
    prefix.tail.pop_back();
    start = cache.find(tag, prefix);
    if (start) break;
  }

  GradedOperator current(dim);
  if (start) {
    current = *start;
  } else {
    auto it = base.find(comp.head);
    if (it != base.end()) current = it->second;
    cache.insert(tag, prefix, current);
  }

  for (std::size_t level = prefix.tail.size(); level < comp.tail.size(); ++level) {
    current = commutator(current, generator.at(comp.tail[level]));
    prefix.tail.push_back(comp.tail[level]);
    cache.insert(tag, prefix, current);
  }
  return current;
}

}  // namespace pertkit
