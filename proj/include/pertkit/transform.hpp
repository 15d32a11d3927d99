#pragma once

#include "pertkit/commutator_cache.hpp"
#include "pertkit/graded_operator.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pertkit {

struct Tolerances {
  /// Relative to max |E|: levels closer than this are degenerate.
  double degeneracy = 1e-9;
  /// Relative to the energy scale: |E_j - E_i - hbar k omega_d| below this is resonant.
  double resonance = 1e-9;
};

struct TransformOptions {
  double hbar = 1.0;
  Tolerances tol;
};

/// Unperturbed spectrum read off the (diagonal) order-0 Hamiltonian.
struct EigenFrame {
  Eigen::VectorXd energies;
  std::vector<std::vector<int>> degeneracy_classes;

  /// Requires `h0` diagonal with real diagonal; throws PreconditionError otherwise.
  static EigenFrame from_diagonal(const Matrix& h0, double degeneracy_tol = 1e-9);

  Eigen::Index dim() const { return energies.size(); }
  /// max |E_i|, or 1 when every level is zero.
  double energy_scale() const;
};

/// Symmetric boolean matrix of couplings to eliminate; the diagonal is never masked.
class Mask {
 public:
  using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

  Mask() = default;
  /// Validates symmetry and an all-false diagonal.
  explicit Mask(BoolMatrix eliminate);

  static Mask none(Eigen::Index dim);
  static Mask all_off_diagonal(Eigen::Index dim);
  /// Masks every entry connecting two different contiguous blocks.
  static Mask block_off_diagonal(const std::vector<int>& block_sizes);
  /// Masks the listed (i, j) pairs and their transposes.
  static Mask from_entries(Eigen::Index dim, const std::vector<std::pair<int, int>>& entries);

  Eigen::Index dim() const { return eliminate_.rows(); }
  bool operator()(Eigen::Index i, Eigen::Index j) const { return eliminate_(i, j); }
  const BoolMatrix& matrix() const { return eliminate_; }
  std::size_t count() const;

  /// Masked part of a matrix / graded operator (unmasked entries zeroed).
  Matrix select(const Matrix& m) const;
  Matrix reject(const Matrix& m) const;
  GradedOperator select(const GradedOperator& op) const;
  GradedOperator reject(const GradedOperator& op) const;

 private:
  BoolMatrix eliminate_;
};

enum class Method { swt, fd, ace, la };

const char* to_string(Method m);
Method method_from_string(const std::string& s);

struct TransformResult {
  std::map<int, GradedOperator> corrections;
  GeneratorSeries generator;
  EigenFrame frame;
  Mask mask;
  Method method = Method::swt;
  int max_order = 0;
  double hbar = 1.0;
  std::optional<double> omega_d;
  std::vector<int> block_sizes;
  CacheStats cache_stats;

  Eigen::Index dim() const { return frame.dim(); }
  /// Sum of corrections through `order` (all orders when negative).
  GradedOperator effective_hamiltonian(int order = -1) const;
};

/// Solves [H0, S] - i hbar dS/dt = -target elementwise in the eigenbasis:
/// S_ij,k = T_ij,k / (E_j - E_i - hbar k omega_d) on masked entries.
///
/// `target` must already be restricted to masked entries. Throws
/// ResonantDenominator (or DegenerateSpectrum when `degeneracy_is_error` and
/// k = 0) when a nonzero target meets a vanishing denominator.
GradedOperator solve_generator_order(const GradedOperator& target, const EigenFrame& frame,
                                     const Mask& mask, double hbar, std::optional<double> omega_d,
                                     const Tolerances& tol = {}, bool degeneracy_is_error = false);

/// Standard SWT: eliminates every entry connecting different blocks.
TransformResult run_swt(const GradedOperator& h_blocks, const GradedOperator& v,
                        const std::vector<int>& block_sizes, int max_order,
                        const TransformOptions& options = {});

/// Full diagonalization: eliminates every off-diagonal entry.
TransformResult run_fd(const GradedOperator& h, int max_order, const TransformOptions& options = {});

/// Arbitrary coupling elimination of the masked entries.
TransformResult run_ace(const GradedOperator& h, const Mask& mask, int max_order,
                        const TransformOptions& options = {});

/// e^{-S} O e^{S} with generator terms through total order `up_to_order`.
/// O itself is always returned whole.
GradedOperator rotate_operator(const GradedOperator& op, const TransformResult& result,
                               int up_to_order);

namespace detail {

/// Order-n BCH terms of e^{-S} B e^{S} over the given bases, excluding the
/// chain (0; n) when `skip_unknown` is set. Coefficient 1/m! per nestedness m.
GradedOperator bch_order(const std::vector<std::pair<BaseTag, const OrderSeries*>>& bases, int n,
                         const GeneratorSeries& generator, CommutatorCache& cache, Eigen::Index dim,
                         bool skip_unknown);

/// Order-n terms of -i hbar sum_m 1/(m+1)! [dS^(s0), S^(s1), ..., S^(sm)],
/// excluding the bare chain (n;) when `skip_unknown` is set.
GradedOperator derivative_order(const OrderSeries& dS, int n, double hbar,
                                const GeneratorSeries& generator, CommutatorCache& cache,
                                Eigen::Index dim, bool skip_unknown);

}  // namespace detail

}  // namespace pertkit
