#include "pertkit/least_action.hpp"

#include "pertkit/errors.hpp"

#include <functional>

namespace pertkit {

namespace {

double factorial(int m) {
  double f = 1.0;
  for (int i = 2; i <= m; ++i) f *= i;
  return f;
}

double sign_of_length(std::size_t len) { return len % 2 == 0 ? 1.0 : -1.0; }

bool all_parts_at_least_two(const std::vector<int>& comp) {
  for (int p : comp) {
    if (p < 2) return false;
  }
  return true;
}

void require_orders(const OrderSeries& z, int n) {
  for (int j = 1; j <= n; ++j) {
    if (!z.count(j)) throw OrderNotSolved("Z^(" + std::to_string(j) + ") is missing");
  }
}

Eigen::Index series_dim(const OrderSeries& z) {
  if (z.empty()) throw PreconditionError("empty generator series");
  return z.begin()->second.dim();
}

// Memoized products Z^(theta) and their block projections.
class ProductTable {
 public:
  ProductTable(const OrderSeries& series, const BlockStructure& blocks)
      : series_(series), blocks_(blocks), dim_(series_dim(series)) {}

  const GradedOperator& product(const std::vector<int>& comp) {
    auto it = products_.find(comp);
    if (it != products_.end()) return it->second;
    GradedOperator value(dim_);
    if (comp.size() == 1) {
      auto s = series_.find(comp.front());
      if (s != series_.end()) value = s->second;
    } else {
      std::vector<int> prefix(comp.begin(), comp.end() - 1);
      const GradedOperator& left = product(prefix);
      auto s = series_.find(comp.back());
      if (s != series_.end() && !left.empty()) value = multiply(left, s->second);
    }
    return products_.emplace(comp, std::move(value)).first->second;
  }

  const GradedOperator& projected(const std::vector<int>& comp) {
    auto it = projected_.find(comp);
    if (it != projected_.end()) return it->second;
    return projected_.emplace(comp, block_project(product(comp), blocks_)).first->second;
  }

 private:
  const OrderSeries& series_;
  const BlockStructure& blocks_;
  Eigen::Index dim_;
  std::map<std::vector<int>, GradedOperator> products_;
  std::map<std::vector<int>, GradedOperator> projected_;
};

GradedOperator epsilon_from_table(int i, ProductTable& table, Eigen::Index dim) {
  GradedOperator e(dim);
  for (const auto& theta : positive_compositions(i)) {
    if (theta.size() % 2 == 0) e += scale(table.projected(theta), 2.0 / factorial(theta.size()));
  }
  for (int j = 1; j < i; ++j) {
    const int k = i - j;
    for (const auto& theta : positive_compositions(j)) {
      const GradedOperator& bt = table.projected(theta);
      if (bt.empty()) continue;
      for (const auto& phi : positive_compositions(k)) {
        const GradedOperator& bp = table.projected(phi);
        if (bp.empty()) continue;
        const double c = sign_of_length(phi.size()) / (factorial(theta.size()) * factorial(phi.size()));
        e += scale(multiply(bt, bp), c);
      }
    }
  }
  return e;
}

}  // namespace

BlockStructure::BlockStructure(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.empty()) throw PreconditionError("block structure needs at least one block");
  for (std::size_t b = 0; b < sizes_.size(); ++b) {
    if (sizes_[b] <= 0) throw PreconditionError("block sizes must be positive");
    membership_.insert(membership_.end(), static_cast<std::size_t>(sizes_[b]), static_cast<int>(b));
  }
}

Matrix block_project(const Matrix& m, const BlockStructure& blocks) {
  if (m.rows() != blocks.dim() || m.cols() != blocks.dim()) {
    throw DimensionMismatch("block structure does not match matrix dimension");
  }
  Matrix out = m;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (!blocks.same_block(i, j)) out(i, j) = 0.0;
    }
  }
  return out;
}

GradedOperator block_project(const GradedOperator& m, const BlockStructure& blocks) {
  return map_terms(m, [&](const GradeKey&, const Matrix& x) { return block_project(x, blocks); });
}

GradedOperator product_over_composition(const OrderSeries& series, const std::vector<int>& comp,
                                        Eigen::Index dim) {
  if (comp.empty()) return GradedOperator::identity(dim);
  GradedOperator out(dim);
  for (std::size_t i = 0; i < comp.size(); ++i) {
    auto it = series.find(comp[i]);
    if (it == series.end()) return GradedOperator(dim);
    out = i == 0 ? it->second : multiply(out, it->second);
    if (out.empty()) return out;
  }
  return out;
}

double binom_minus_half(int m) {
  double b = 1.0;
  for (int i = 1; i <= m; ++i) b *= (-0.5 - i + 1) / i;
  return b;
}

GradedOperator compute_epsilon(int i, const OrderSeries& z, const BlockStructure& blocks) {
  if (i < 2) throw PreconditionError("epsilon starts at order 2");
  require_orders(z, i);
  ProductTable table(z, blocks);
  return epsilon_from_table(i, table, series_dim(z));
}

LASeries compute_la_generator(const OrderSeries& z, const BlockStructure& blocks, int max_order) {
  require_orders(z, max_order);
  LASeries out;
  out.Z = z;
  if (max_order < 1) return out;
  const Eigen::Index d = series_dim(z);
  if (blocks.dim() != d) throw DimensionMismatch("block structure does not match generator");

  ProductTable zt(z, blocks);
  for (int i = 1; i <= max_order; ++i) {
    if (i >= 2) out.epsilon.insert_or_assign(i, epsilon_from_table(i, zt, d));

    GradedOperator w(d);
    for (const auto& theta : positive_compositions(i)) {
      const double c = 1.0 / factorial(theta.size());
      w += scale(zt.product(theta), c);
      w += scale(zt.projected(theta), c * sign_of_length(theta.size()));
    }
    for (int j = 1; j < i; ++j) {
      for (const auto& theta : positive_compositions(j)) {
        const GradedOperator& zth = zt.product(theta);
        if (zth.empty()) continue;
        for (const auto& phi : positive_compositions(i - j)) {
          const GradedOperator& bp = zt.projected(phi);
          if (bp.empty()) continue;
          const double c =
              sign_of_length(phi.size()) / (factorial(theta.size()) * factorial(phi.size()));
          w += scale(multiply(zth, bp), c);
        }
      }
    }
    out.W.insert_or_assign(i, w);

    GradedOperator u = w;
    for (const auto& theta : positive_compositions(i)) {
      if (!all_parts_at_least_two(theta)) continue;
      u += scale(product_over_composition(out.epsilon, theta, d),
                 binom_minus_half(static_cast<int>(theta.size())));
    }
    for (int j = 1; j < i; ++j) {
      const GradedOperator& wj = out.W.at(j);
      if (wj.empty()) continue;
      for (const auto& theta : positive_compositions(i - j)) {
        if (!all_parts_at_least_two(theta)) continue;
        GradedOperator e = product_over_composition(out.epsilon, theta, d);
        if (e.empty()) continue;
        u += scale(multiply(wj, e), binom_minus_half(static_cast<int>(theta.size())));
      }
    }
    out.U.insert_or_assign(i, u);

    GradedOperator s = u;
    for (const auto& theta : positive_compositions(i)) {
      if (theta.size() == 1) continue;
      s -= scale(product_over_composition(out.S, theta, d), 1.0 / factorial(theta.size()));
    }
    out.S.insert_or_assign(i, std::move(s));
  }
  return out;
}

TransformResult run_la(const GradedOperator& h, const BlockStructure& blocks, int max_order,
                       const TransformOptions& options) {
  if (!h.is_static()) throw PreconditionError("least-action routine supports static Hamiltonians only");
  if (blocks.dim() != h.dim()) throw DimensionMismatch("block structure does not match Hamiltonian");

  TransformResult fd = run_fd(h, max_order, options);
  LASeries la = compute_la_generator(fd.generator.S, blocks, max_order);

  TransformResult result;
  result.frame = fd.frame;
  result.mask = Mask::block_off_diagonal(blocks.sizes());
  result.method = Method::la;
  result.max_order = max_order;
  result.hbar = options.hbar;
  result.block_sizes = blocks.sizes();
  result.generator.S = std::move(la.S);

  const OrderSeries base = split_by_order(h);
  const std::vector<std::pair<BaseTag, const OrderSeries*>> bases{{BaseTag::H, &base}};
  CommutatorCache cache;
  result.corrections.emplace(0, h.at_order(0));
  for (int n = 1; n <= max_order; ++n) {
    result.corrections.emplace(
        n, detail::bch_order(bases, n, result.generator, cache, h.dim(), /*skip_unknown=*/false));
  }
  result.cache_stats = cache.stats();
  return result;
}

}  // namespace pertkit
