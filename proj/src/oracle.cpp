#include "pertkit/oracle.hpp"

#include "pertkit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace pertkit {

NumericHamiltonian evaluate_at(const GradedOperator& g, double lambda, std::optional<double> t) {
  if (!g.is_static() && !t) throw PreconditionError("time argument required for a driven operator");
  Matrix m = Matrix::Zero(g.dim(), g.dim());
  for (const auto& [key, term] : g.terms()) {
    Complex c = std::pow(lambda, key.order);
    if (key.harmonic != 0) {
      if (!g.omega_d()) throw PreconditionError("harmonic terms present but omega_d is unset");
      c *= std::polar(1.0, key.harmonic * *g.omega_d() * *t);
    }
    m += c * term;
  }
  return {std::move(m), lambda, t};
}

OrderedEigensystem ordered_eigensystem(const Matrix& h) {
  if (h.rows() != h.cols()) throw DimensionMismatch("matrix must be square");
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) throw Error("eigensolver failed");
  const Matrix& v = es.eigenvectors();
  const Eigen::Index d = h.rows();

  std::vector<std::tuple<double, Eigen::Index, Eigen::Index>> weights;
  weights.reserve(static_cast<std::size_t>(d * d));
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) weights.emplace_back(std::norm(v(i, j)), i, j);
  }
  // Descending weight; ties by index for determinism.
  std::sort(weights.begin(), weights.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    return std::tie(std::get<1>(a), std::get<2>(a)) < std::tie(std::get<1>(b), std::get<2>(b));
  });
  std::vector<Eigen::Index> column_for(static_cast<std::size_t>(d), -1);
  std::vector<bool> used(static_cast<std::size_t>(d), false);
  Eigen::Index assigned = 0;
  for (const auto& [w, i, j] : weights) {
    if (assigned == d) break;
    if (column_for[i] >= 0 || used[j]) continue;
    column_for[i] = j;
    used[j] = true;
    ++assigned;
  }

  OrderedEigensystem out;
  out.eigenvalues.resize(d);
  Matrix vp(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const Eigen::Index j = column_for[i];
    Eigen::VectorXcd col = v.col(j);
    const double mag = std::abs(col(i));
    if (mag > 0.0) col *= std::conj(col(i)) / mag;
    vp.col(i) = col;
    out.eigenvalues(i) = es.eigenvalues()(j);
  }
  out.X = vp.adjoint();
  return out;
}

BlockDiagonalization exact_block_diagonalize(const Matrix& h, const BlockStructure& blocks) {
  if (h.rows() != blocks.dim()) throw DimensionMismatch("block structure does not match matrix");
  const OrderedEigensystem es = ordered_eigensystem(h);
  const Matrix bx = block_project(es.X, blocks);
  const Matrix gram = bx.adjoint() * bx;
  Eigen::SelfAdjointEigenSolver<Matrix> gs(gram);
  const double smallest = gs.eigenvalues().minCoeff();
  if (!(smallest >= 1e-8)) {
    throw IllConditionedBlocks("B(X)^dagger B(X) has smallest eigenvalue " + std::to_string(smallest));
  }
  const Eigen::VectorXd inv_sqrt = gs.eigenvalues().cwiseSqrt().cwiseInverse();
  const Matrix gram_inv_sqrt =
      gs.eigenvectors() * inv_sqrt.cast<Complex>().asDiagonal() * gs.eigenvectors().adjoint();

  BlockDiagonalization out;
  out.U_dagger = es.X.adjoint() * bx * gram_inv_sqrt;
  out.U = out.U_dagger.adjoint();
  out.H_block = out.U * h * out.U_dagger;
  return out;
}

double spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

double spectral_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionMismatch("matrix shapes differ");
  const double ref = spectral_norm(a);
  if (ref == 0.0) throw PreconditionError("spectral distance against a zero reference");
  return spectral_norm(a - b) / ref;
}

std::vector<ConvergenceRow> convergence_scan(const GradedOperator& h, const BlockStructure& blocks,
                                             const Routine& routine, const std::vector<int>& orders,
                                             const std::vector<double>& lambdas) {
  if (orders.empty()) return {};
  const int top = *std::max_element(orders.begin(), orders.end());
  const TransformResult result = routine(h, top);
  std::vector<ConvergenceRow> rows;
  for (double lambda : lambdas) {
    const Matrix exact = exact_block_diagonalize(evaluate_at(h, lambda).matrix, blocks).H_block;
    for (int n : orders) {
      const Matrix approx = evaluate_at(result.effective_hamiltonian(n), lambda).matrix;
      rows.push_back({n, lambda, spectral_distance(exact, approx)});
    }
  }
  return rows;
}

}  // namespace pertkit
