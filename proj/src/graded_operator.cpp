#include "pertkit/graded_operator.hpp"

#include "pertkit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace pertkit {

namespace {

void check_dims(const GradedOperator& a, const GradedOperator& b) {
  if (a.dim() != b.dim()) {
    throw DimensionMismatch("graded operator dimensions differ: " + std::to_string(a.dim()) +
                            " vs " + std::to_string(b.dim()));
  }
}

std::optional<double> merge_omega(const GradedOperator& a, const GradedOperator& b) {
  if (a.omega_d() && b.omega_d()) {
    const double wa = *a.omega_d();
    const double wb = *b.omega_d();
    if (std::abs(wa - wb) > 1e-12 * std::max(std::abs(wa), std::abs(wb))) {
      throw PreconditionError("drive frequency mismatch: " + std::to_string(wa) + " vs " +
                              std::to_string(wb));
    }
    return wa;
  }
  return a.omega_d() ? a.omega_d() : b.omega_d();
}

double matrix_max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace

GradedOperator::GradedOperator(Eigen::Index dim, std::optional<double> omega_d)
    : dim_(dim), omega_d_(omega_d) {
  if (dim < 0) throw PreconditionError("graded operator dimension must be nonnegative");
  if (omega_d && !(*omega_d > 0.0)) throw PreconditionError("omega_d must be positive");
}

GradedOperator GradedOperator::single(int order, int harmonic, const Matrix& m,
                                      std::optional<double> omega_d) {
  if (m.rows() != m.cols()) throw DimensionMismatch("term matrix must be square");
  GradedOperator g(m.rows(), omega_d);
  g.set_term(order, harmonic, m);
  return g;
}

GradedOperator GradedOperator::identity(Eigen::Index dim) {
  return single(0, 0, Matrix::Identity(dim, dim));
}

bool GradedOperator::is_static() const {
  return std::all_of(terms_.begin(), terms_.end(),
                     [](const auto& kv) { return kv.first.harmonic == 0; });
}

Matrix GradedOperator::term(int order, int harmonic) const {
  auto it = terms_.find({order, harmonic});
  if (it == terms_.end()) return Matrix::Zero(dim_, dim_);
  return it->second;
}

bool GradedOperator::has_term(int order, int harmonic) const {
  return terms_.count({order, harmonic}) != 0;
}

void GradedOperator::add_term(int order, int harmonic, const Matrix& m) {
  if (m.rows() != dim_ || m.cols() != dim_) {
    throw DimensionMismatch("term is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                            ", operator dimension is " + std::to_string(dim_));
  }
  if (order < 0) throw PreconditionError("perturbative order must be nonnegative");
  auto [it, inserted] = terms_.try_emplace({order, harmonic}, m);
  if (!inserted) it->second += m;
}

void GradedOperator::set_term(int order, int harmonic, const Matrix& m) {
  if (m.rows() != dim_ || m.cols() != dim_) {
    throw DimensionMismatch("term is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                            ", operator dimension is " + std::to_string(dim_));
  }
  if (order < 0) throw PreconditionError("perturbative order must be nonnegative");
  terms_[{order, harmonic}] = m;
}

void GradedOperator::set_omega_d(std::optional<double> omega_d) {
  if (omega_d && !(*omega_d > 0.0)) throw PreconditionError("omega_d must be positive");
  omega_d_ = omega_d;
}

GradedOperator GradedOperator::at_order(int order) const {
  GradedOperator out(dim_, omega_d_);
  for (const auto& [key, m] : terms_) {
    if (key.order == order) out.terms_.emplace(key, m);
  }
  return out;
}

int GradedOperator::min_order() const {
  int lo = std::numeric_limits<int>::max();
  for (const auto& [key, m] : terms_) lo = std::min(lo, key.order);
  return terms_.empty() ? 0 : lo;
}

int GradedOperator::max_order() const {
  int hi = -1;
  for (const auto& [key, m] : terms_) hi = std::max(hi, key.order);
  return hi;
}

double GradedOperator::max_abs() const {
  double s = 0.0;
  for (const auto& [key, m] : terms_) s = std::max(s, matrix_max_abs(m));
  return s;
}

void GradedOperator::prune(double threshold) {
  std::erase_if(terms_, [threshold](const auto& kv) { return matrix_max_abs(kv.second) <= threshold; });
}

GradedOperator& GradedOperator::operator+=(const GradedOperator& other) {
  *this = add(*this, other);
  return *this;
}

GradedOperator& GradedOperator::operator-=(const GradedOperator& other) {
  *this = subtract(*this, other);
  return *this;
}

GradedOperator& GradedOperator::operator*=(Complex s) {
  *this = scale(*this, s);
  return *this;
}

GradedOperator add(const GradedOperator& a, const GradedOperator& b) {
  check_dims(a, b);
  GradedOperator out(a.dim(), merge_omega(a, b));
  for (const auto& [key, m] : a.terms()) out.add_term(key.order, key.harmonic, m);
  for (const auto& [key, m] : b.terms()) out.add_term(key.order, key.harmonic, m);
  out.prune(kZeroThreshold * std::max(a.max_abs(), b.max_abs()));
  return out;
}

GradedOperator subtract(const GradedOperator& a, const GradedOperator& b) {
  return add(a, scale(b, -1.0));
}

GradedOperator scale(const GradedOperator& a, Complex s) {
  GradedOperator out(a.dim(), a.omega_d());
  if (s == Complex(0.0)) return out;
  for (const auto& [key, m] : a.terms()) out.set_term(key.order, key.harmonic, s * m);
  return out;
}

GradedOperator multiply(const GradedOperator& a, const GradedOperator& b) {
  check_dims(a, b);
  GradedOperator out(a.dim(), merge_omega(a, b));
  for (const auto& [ka, ma] : a.terms()) {
    for (const auto& [kb, mb] : b.terms()) {
      out.add_term(ka.order + kb.order, ka.harmonic + kb.harmonic, ma * mb);
    }
  }
  out.prune(kZeroThreshold * a.max_abs() * b.max_abs() * static_cast<double>(a.dim()));
  return out;
}

GradedOperator commutator(const GradedOperator& a, const GradedOperator& b) {
  check_dims(a, b);
  GradedOperator out(a.dim(), merge_omega(a, b));
  for (const auto& [ka, ma] : a.terms()) {
    for (const auto& [kb, mb] : b.terms()) {
      out.add_term(ka.order + kb.order, ka.harmonic + kb.harmonic, ma * mb - mb * ma);
    }
  }
  out.prune(kZeroThreshold * a.max_abs() * b.max_abs() * static_cast<double>(a.dim()));
  return out;
}

GradedOperator adjoint(const GradedOperator& a) {
  GradedOperator out(a.dim(), a.omega_d());
  for (const auto& [key, m] : a.terms()) out.set_term(key.order, -key.harmonic, m.adjoint());
  return out;
}

GradedOperator time_derivative(const GradedOperator& a) {
  GradedOperator out(a.dim(), a.omega_d());
  for (const auto& [key, m] : a.terms()) {
    if (key.harmonic == 0) continue;
    if (!a.omega_d()) {
      throw PreconditionError("time derivative of a harmonic term requires omega_d");
    }
    out.set_term(key.order, key.harmonic, Complex(0.0, key.harmonic * *a.omega_d()) * m);
  }
  return out;
}

namespace {

double adjoint_defect(const GradedOperator& a, double sign) {
  double defect = 0.0;
  for (const auto& [key, m] : a.terms()) {
    const Matrix partner = a.term(key.order, -key.harmonic);
    defect = std::max(defect, matrix_max_abs(Matrix(m.adjoint()) - sign * partner));
  }
  return defect;
}

}  // namespace

double hermiticity_defect(const GradedOperator& a) { return adjoint_defect(a, 1.0); }

double anti_hermiticity_defect(const GradedOperator& a) { return adjoint_defect(a, -1.0); }

bool is_hermitian_graded(const GradedOperator& a, double tol) {
  return hermiticity_defect(a) <= tol * std::max(1.0, a.max_abs());
}

bool is_anti_hermitian_graded(const GradedOperator& a, double tol) {
  return anti_hermiticity_defect(a) <= tol * std::max(1.0, a.max_abs());
}

double max_abs_difference(const GradedOperator& a, const GradedOperator& b) {
  check_dims(a, b);
  double diff = 0.0;
  for (const auto& [key, m] : a.terms()) {
    diff = std::max(diff, matrix_max_abs(m - b.term(key.order, key.harmonic)));
  }
  for (const auto& [key, m] : b.terms()) {
    if (!a.has_term(key.order, key.harmonic)) diff = std::max(diff, matrix_max_abs(m));
  }
  return diff;
}

}  // namespace pertkit
