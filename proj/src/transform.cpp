#include "pertkit/transform.hpp"

#include "pertkit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pertkit {

namespace {

double factorial(int m) {
  double f = 1.0;
  for (int i = 2; i <= m; ++i) f *= i;
  return f;
}

void require_diagonal_static_order0(const GradedOperator& h) {
  for (const auto& [key, m] : h.terms()) {
    if (key.order == 0 && key.harmonic != 0) {
      throw PreconditionError("order-0 part must be time independent");
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// EigenFrame

EigenFrame EigenFrame::from_diagonal(const Matrix& h0, double degeneracy_tol) {
  if (h0.rows() != h0.cols()) throw DimensionMismatch("order-0 Hamiltonian must be square");
  const Eigen::Index d = h0.rows();
  const double scale = std::max(1.0, h0.size() ? h0.cwiseAbs().maxCoeff() : 0.0);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double tol = kZeroThreshold * scale;
      if (i != j && std::abs(h0(i, j)) > tol) {
        throw PreconditionError("order-0 Hamiltonian is not diagonal at (" + std::to_string(i) +
                                ", " + std::to_string(j) + ")");
      }
      if (i == j && std::abs(h0(i, i).imag()) > tol) {
        throw PreconditionError("order-0 Hamiltonian has a complex diagonal entry at " +
                                std::to_string(i));
      }
    }
  }

  EigenFrame frame;
  frame.energies = h0.diagonal().real();

  std::vector<int> idx(static_cast<std::size_t>(d));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return frame.energies(a) < frame.energies(b); });
  const double tol = degeneracy_tol * frame.energy_scale();
  for (int i : idx) {
    if (!frame.degeneracy_classes.empty() &&
        std::abs(frame.energies(i) - frame.energies(frame.degeneracy_classes.back().back())) <= tol) {
      frame.degeneracy_classes.back().push_back(i);
    } else {
      frame.degeneracy_classes.push_back({i});
    }
  }
  for (auto& cls : frame.degeneracy_classes) std::sort(cls.begin(), cls.end());
  return frame;
}

double EigenFrame::energy_scale() const {
  const double m = energies.size() ? energies.cwiseAbs().maxCoeff() : 0.0;
  return m > 0.0 ? m : 1.0;
}

// ---------------------------------------------------------------------------
// Mask

Mask::Mask(BoolMatrix eliminate) : eliminate_(std::move(eliminate)) {
  if (eliminate_.rows() != eliminate_.cols()) throw PreconditionError("mask must be square");
  for (Eigen::Index i = 0; i < eliminate_.rows(); ++i) {
    if (eliminate_(i, i)) {
      throw PreconditionError("mask targets diagonal entry " + std::to_string(i));
    }
    for (Eigen::Index j = i + 1; j < eliminate_.cols(); ++j) {
      if (eliminate_(i, j) != eliminate_(j, i)) {
        throw PreconditionError("mask is not symmetric at (" + std::to_string(i) + ", " +
                                std::to_string(j) + ")");
      }
    }
  }
}

Mask Mask::none(Eigen::Index dim) { return Mask(BoolMatrix::Constant(dim, dim, false)); }

Mask Mask::all_off_diagonal(Eigen::Index dim) {
  BoolMatrix m = BoolMatrix::Constant(dim, dim, true);
  m.diagonal().setConstant(false);
  return Mask(std::move(m));
}

Mask Mask::block_off_diagonal(const std::vector<int>& block_sizes) {
  std::vector<int> label;
  for (std::size_t b = 0; b < block_sizes.size(); ++b) {
    if (block_sizes[b] <= 0) throw PreconditionError("block sizes must be positive");
    label.insert(label.end(), static_cast<std::size_t>(block_sizes[b]), static_cast<int>(b));
  }
  const auto d = static_cast<Eigen::Index>(label.size());
  BoolMatrix m(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = label[i] != label[j];
  }
  return Mask(std::move(m));
}

Mask Mask::from_entries(Eigen::Index dim, const std::vector<std::pair<int, int>>& entries) {
  BoolMatrix m = BoolMatrix::Constant(dim, dim, false);
  for (auto [i, j] : entries) {
    if (i < 0 || j < 0 || i >= dim || j >= dim) {
      throw PreconditionError("mask entry (" + std::to_string(i) + ", " + std::to_string(j) +
                              ") out of range");
    }
    m(i, j) = true;
    m(j, i) = true;
  }
  return Mask(std::move(m));
}

std::size_t Mask::count() const { return static_cast<std::size_t>(eliminate_.count()); }

Matrix Mask::select(const Matrix& m) const {
  return eliminate_.select(m, Matrix::Zero(m.rows(), m.cols()));
}

Matrix Mask::reject(const Matrix& m) const {
  return eliminate_.select(Matrix::Zero(m.rows(), m.cols()), m);
}

GradedOperator Mask::select(const GradedOperator& op) const {
  if (op.dim() != dim()) throw DimensionMismatch("mask and operator dimensions differ");
  return map_terms(op, [this](const GradeKey&, const Matrix& m) { return select(m); });
}

GradedOperator Mask::reject(const GradedOperator& op) const {
  if (op.dim() != dim()) throw DimensionMismatch("mask and operator dimensions differ");
  return map_terms(op, [this](const GradeKey&, const Matrix& m) { return reject(m); });
}

// ---------------------------------------------------------------------------

const char* to_string(Method m) {
  switch (m) {
    case Method::swt: return "swt";
    case Method::fd: return "fd";
    case Method::ace: return "ace";
    case Method::la: return "la";
  }
  return "?";
}

Method method_from_string(const std::string& s) {
  if (s == "swt") return Method::swt;
  if (s == "fd") return Method::fd;
  if (s == "ace") return Method::ace;
  if (s == "la") return Method::la;
  throw ParseError("unknown method '" + s + "' (expected swt, fd, ace or la)");
}

GradedOperator TransformResult::effective_hamiltonian(int order) const {
  GradedOperator sum(dim(), omega_d);
  for (const auto& [n, c] : corrections) {
    if (order < 0 || n <= order) sum += c;
  }
  return sum;
}

// ---------------------------------------------------------------------------

GradedOperator solve_generator_order(const GradedOperator& target, const EigenFrame& frame,
                                     const Mask& mask, double hbar, std::optional<double> omega_d,
                                     const Tolerances& tol, bool degeneracy_is_error) {
  const Eigen::Index d = frame.dim();
  if (target.dim() != d || mask.dim() != d) {
    throw DimensionMismatch("generator target, frame and mask dimensions differ");
  }
  const double scale = frame.energy_scale();
  const double negligible = kZeroThreshold * scale;

  GradedOperator s(d, omega_d ? omega_d : target.omega_d());
  for (const auto& [key, t] : target.terms()) {
    const int k = key.harmonic;
    if (k != 0 && !omega_d) {
      throw PreconditionError("harmonic " + std::to_string(k) + " present but omega_d is unset");
    }
    const double shift = k == 0 ? 0.0 : hbar * k * *omega_d;
    const double threshold = (k == 0 ? tol.degeneracy : tol.resonance) * scale;

    Matrix out = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) {
        if (!mask(i, j) || t(i, j) == Complex(0.0)) continue;
        const double denom = frame.energies(j) - frame.energies(i) - shift;
        if (std::abs(denom) < threshold) {
          if (std::abs(t(i, j)) <= negligible) continue;
          if (k == 0 && degeneracy_is_error) {
            throw DegenerateSpectrum(static_cast<int>(i), static_cast<int>(j));
          }
          throw ResonantDenominator(static_cast<int>(i), static_cast<int>(j), k, std::abs(denom));
        }
        out(i, j) = t(i, j) / denom;
      }
    }
    if (out.cwiseAbs().maxCoeff() > 0.0) s.set_term(key.order, k, out);
  }
  return s;
}

namespace detail {

GradedOperator bch_order(const std::vector<std::pair<BaseTag, const OrderSeries*>>& bases, int n,
                         const GeneratorSeries& generator, CommutatorCache& cache, Eigen::Index dim,
                         bool skip_unknown) {
  GradedOperator sum(dim);
  for (const Composition& comp : enumerate_compositions(n, /*allow_zero_head=*/true)) {
    if (skip_unknown && comp.head == 0 && comp.nestedness() == 1) continue;
    for (const auto& [tag, series] : bases) {
      if (!series->count(comp.head)) continue;
      GradedOperator term = nested_commutator(*series, tag, comp, generator, cache, dim);
      if (term.empty()) continue;
      sum += scale(term, 1.0 / factorial(comp.nestedness()));
    }
  }
  return sum;
}

GradedOperator derivative_order(const OrderSeries& dS, int n, double hbar,
                                const GeneratorSeries& generator, CommutatorCache& cache,
                                Eigen::Index dim, bool skip_unknown) {
  GradedOperator sum(dim);
  for (const auto& parts : positive_compositions(n)) {
    if (skip_unknown && parts.size() == 1) continue;
    Composition comp{parts.front(), std::vector<int>(parts.begin() + 1, parts.end())};
    auto it = dS.find(comp.head);
    if (it == dS.end() || it->second.empty()) continue;
    GradedOperator term = nested_commutator(dS, BaseTag::dS, comp, generator, cache, dim);
    if (term.empty()) continue;
    sum += scale(term, Complex(0.0, -hbar / factorial(comp.nestedness() + 1)));
  }
  return sum;
}

}  // namespace detail

namespace {

struct LoopInput {
  std::vector<std::pair<BaseTag, OrderSeries>> bases;
  GradedOperator full;
  Mask mask;
  Method method;
  int max_order;
  TransformOptions options;
  std::vector<int> block_sizes;
};

TransformResult run_elimination_loop(LoopInput in) {
  if (in.max_order < 0) throw PreconditionError("max_order must be nonnegative");
  const Eigen::Index d = in.full.dim();
  require_diagonal_static_order0(in.full);
  if (!(in.options.hbar > 0.0)) throw PreconditionError("hbar must be positive");

  const bool time_dependent = !in.full.is_static();
  if (time_dependent && !in.full.omega_d()) {
    throw PreconditionError("harmonic terms present but omega_d is unset");
  }

  TransformResult result;
  result.frame = EigenFrame::from_diagonal(in.full.term(0, 0), in.options.tol.degeneracy);
  result.mask = in.mask;
  result.method = in.method;
  result.max_order = in.max_order;
  result.hbar = in.options.hbar;
  result.omega_d = in.full.omega_d();
  result.block_sizes = in.block_sizes;
  result.corrections.emplace(0, in.full.at_order(0));

  std::vector<std::pair<BaseTag, const OrderSeries*>> bases;
  for (const auto& [tag, series] : in.bases) bases.emplace_back(tag, &series);

  CommutatorCache cache;
  OrderSeries dS;
  const bool degeneracy_is_error = in.method == Method::fd;

  for (int n = 1; n <= in.max_order; ++n) {
    GradedOperator terms = detail::bch_order(bases, n, result.generator, cache, d, true);
    if (time_dependent) {
      terms += detail::derivative_order(dS, n, in.options.hbar, result.generator, cache, d, true);
    }
    terms.set_omega_d(result.omega_d);

    const GradedOperator target = in.mask.select(terms);
    GradedOperator s_n = solve_generator_order(target, result.frame, in.mask, in.options.hbar,
                                               result.omega_d, in.options.tol, degeneracy_is_error);
    s_n.set_omega_d(result.omega_d);
    dS.insert_or_assign(n, time_derivative(s_n));
    result.generator.S.insert_or_assign(n, std::move(s_n));
    result.corrections.insert_or_assign(n, in.mask.reject(terms));
  }
  result.cache_stats = cache.stats();
  return result;
}

}  // namespace

TransformResult run_swt(const GradedOperator& h_blocks, const GradedOperator& v,
                        const std::vector<int>& block_sizes, int max_order,
                        const TransformOptions& options) {
  if (h_blocks.dim() != v.dim()) throw DimensionMismatch("H and V dimensions differ");
  const int total = std::accumulate(block_sizes.begin(), block_sizes.end(), 0);
  if (total != h_blocks.dim()) {
    throw PreconditionError("block sizes sum to " + std::to_string(total) + ", dimension is " +
                            std::to_string(h_blocks.dim()));
  }
  Mask mask = Mask::block_off_diagonal(block_sizes);
  const GradedOperator leak = mask.select(h_blocks);
  if (leak.max_abs() > kZeroThreshold * std::max(1.0, h_blocks.max_abs())) {
    throw PreconditionError("H is not block diagonal with respect to the given blocks");
  }
  for (const auto& [key, m] : v.terms()) {
    if (key.order == 0) throw PreconditionError("perturbation V must start at order 1");
  }

  LoopInput in{{}, add(h_blocks, v), std::move(mask), Method::swt, max_order, options, block_sizes};
  in.bases.emplace_back(BaseTag::H, split_by_order(h_blocks));
  in.bases.emplace_back(BaseTag::V, split_by_order(v));
  return run_elimination_loop(std::move(in));
}

TransformResult run_fd(const GradedOperator& h, int max_order, const TransformOptions& options) {
  LoopInput in{{}, h, Mask::all_off_diagonal(h.dim()), Method::fd, max_order, options, {}};
  in.block_sizes.assign(static_cast<std::size_t>(h.dim()), 1);
  in.bases.emplace_back(BaseTag::H, split_by_order(h));
  return run_elimination_loop(std::move(in));
}

TransformResult run_ace(const GradedOperator& h, const Mask& mask, int max_order,
                        const TransformOptions& options) {
  if (mask.dim() != h.dim()) throw DimensionMismatch("mask and Hamiltonian dimensions differ");
  LoopInput in{{}, h, mask, Method::ace, max_order, options, {}};
  in.bases.emplace_back(BaseTag::H, split_by_order(h));
  return run_elimination_loop(std::move(in));
}

GradedOperator rotate_operator(const GradedOperator& op, const TransformResult& result,
                               int up_to_order) {
  if (op.dim() != result.dim()) throw DimensionMismatch("operator and frame dimensions differ");
  if (up_to_order > result.max_order) {
    throw OrderNotSolved("rotation order " + std::to_string(up_to_order) +
                         " exceeds solved order " + std::to_string(result.max_order));
  }
  const OrderSeries base = split_by_order(op);
  CommutatorCache cache;
  GradedOperator out = op;
  for (int n = 1; n <= up_to_order; ++n) {
    for (const Composition& comp : enumerate_compositions(n, true)) {
      if (comp.nestedness() == 0 || !base.count(comp.head)) continue;
      GradedOperator term =
          nested_commutator(base, BaseTag::O, comp, result.generator, cache, op.dim());
      if (!term.empty()) out += scale(term, 1.0 / factorial(comp.nestedness()));
    }
  }
  if (result.omega_d && !out.omega_d()) out.set_omega_d(result.omega_d);
  return out;
}

}  // namespace pertkit
