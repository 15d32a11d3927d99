#pragma once

#include "pertkit/least_action.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace pertkit {

struct NumericHamiltonian {
  Matrix matrix;
  double lambda = 1.0;
  std::optional<double> t;
};

/// sum_{j,k} lambda^j e^{i k omega_d t} M[j,k]. `t` is required when harmonics are present.
NumericHamiltonian evaluate_at(const GradedOperator& g, double lambda,
                               std::optional<double> t = std::nullopt);

/// X H X^dagger = diag(eigenvalues), with row i of X the eigenvector labelled by basis index i.
struct OrderedEigensystem {
  Matrix X;
  Eigen::VectorXd eigenvalues;
};

/// Eigenvectors are assigned to basis indices greedily by descending |V_ij|^2,
/// then phased so the assigned diagonal entry is real positive.
OrderedEigensystem ordered_eigensystem(const Matrix& h);

struct BlockDiagonalization {
  Matrix U_dagger;
  Matrix U;
  Matrix H_block;  // U H U^dagger
};

/// Least-action block diagonalization U^dagger = X^dagger B(X) (B(X)^dagger B(X))^{-1/2}.
/// Throws IllConditionedBlocks when the smallest eigenvalue of B(X)^dagger B(X) is below 1e-8.
BlockDiagonalization exact_block_diagonalize(const Matrix& h, const BlockStructure& blocks);

double spectral_norm(const Matrix& a);
/// ||a - b|| / ||a|| in the spectral norm.
double spectral_distance(const Matrix& a, const Matrix& b);

struct ConvergenceRow {
  int n = 0;
  double lambda = 0.0;
  double eta = 0.0;
};

using Routine = std::function<TransformResult(const GradedOperator& h, int max_order)>;

/// eta(n, lambda) of the routine's truncated effective Hamiltonian against the exact
/// block diagonalization of H(lambda). Rows ordered by lambda, then n.
std::vector<ConvergenceRow> convergence_scan(const GradedOperator& h, const BlockStructure& blocks,
                                             const Routine& routine, const std::vector<int>& orders,
                                             const std::vector<double>& lambdas);

}  // namespace pertkit
