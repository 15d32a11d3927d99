#pragma once

#include "pertkit/graded_operator.hpp"
#include "pertkit/io.hpp"
#include "pertkit/models.hpp"
#include "pertkit/transform.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <map>
#include <random>
#include <string>

namespace testing {

using pertkit::Complex;
using pertkit::GradedOperator;
using pertkit::Matrix;

inline std::string fixture(const std::string& name) { return std::string(PERTKIT_FIXTURE_DIR) + "/" + name; }

inline Matrix random_matrix(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = Complex(n(rng), n(rng));
  }
  return m;
}

inline Matrix random_hermitian(Eigen::Index d, std::mt19937_64& rng, bool zero_diagonal = false) {
  Matrix a = random_matrix(d, rng);
  Matrix h = 0.5 * (a + a.adjoint());
  if (zero_diagonal) h.diagonal().setZero();
  return h;
}

/// Strictly increasing real diagonal with spacings in [0.5, 1.5].
inline Matrix random_levels(Eigen::Index d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.5, 1.5);
  Eigen::VectorXd e(d);
  e(0) = 0.0;
  for (Eigen::Index i = 1; i < d; ++i) e(i) = e(i - 1) + u(rng);
  return e.cast<Complex>().asDiagonal();
}

/// Diagonal order 0 plus Hermitian off-diagonal couplings at order 1 scaled by `scale`.
inline GradedOperator random_problem(Eigen::Index d, std::mt19937_64& rng, double scale) {
  return GradedOperator::single(0, 0, random_levels(d, rng)) +
         GradedOperator::single(1, 0, scale * random_hermitian(d, rng, true));
}

/// Sum over orders of lambda^j M[j,0] for a static operator.
inline Matrix collapse(const GradedOperator& g, double lambda) {
  Matrix m = Matrix::Zero(g.dim(), g.dim());
  for (const auto& [key, term] : g.terms()) m += std::pow(lambda, key.order) * term;
  return m;
}

inline Matrix expm(const Matrix& m) { return m.exp(); }

inline double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

inline double norm2(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

using KeyValues = std::map<std::string, std::string>;

inline KeyValues sample_params() { return pertkit::io::read_key_value_file(fixture("params.kv")); }

inline double num(const KeyValues& kv, const std::string& key) { return std::stod(kv.at(key)); }

inline pertkit::models::EdsrParams edsr_params(const KeyValues& kv) {
  pertkit::models::EdsrParams p;
  p.omega = num(kv, "edsr.omega");
  p.omega_z = num(kv, "edsr.omega_z");
  p.b_sl = num(kv, "edsr.b_sl");
  p.e0 = num(kv, "edsr.e0");
  p.omega_d = num(kv, "edsr.omega_d");
  p.hbar = num(kv, "edsr.hbar");
  p.n_max = std::stoi(kv.at("edsr.n_max"));
  return p;
}

/// `set` is "a" or "b".
inline pertkit::models::TransmonParams transmon_params(const KeyValues& kv, const std::string& set) {
  const std::string k = "transmon." + set + ".";
  pertkit::models::TransmonParams p;
  p.omega_t = num(kv, k + "omega_t");
  p.omega_r = num(kv, k + "omega_r");
  p.alpha = num(kv, k + "alpha");
  p.g = num(kv, k + "g");
  p.n_t = p.n_r = std::stoi(kv.at("transmon.truncation"));
  return p;
}

/// Entries of the sigma_z part of M over Fock pairs (n, n') with both below `limit`
/// compared to coef * ((a + a^dagger)^2)_{n n'}.
inline double edsr_sigma_z_pattern_error(const pertkit::models::EdsrModel& m, const Matrix& c, double coef,
                                         int limit) {
  const auto bo = pertkit::models::boson_ops(m.params.n_max);
  const Matrix x = bo.a + bo.a_dagger;
  const Matrix pattern = x * x;
  double err = 0.0;
  for (int n = 0; n < limit; ++n) {
    for (int k = 0; k < limit; ++k) err = std::max(err, std::abs(m.sigma_z_component(c, n, k) - coef * pattern(n, k)));
  }
  return err;
}

}  // namespace testing
