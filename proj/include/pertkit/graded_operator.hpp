#pragma once

#include <Eigen/Dense>

#include <compare>
#include <complex>
#include <map>
#include <optional>

namespace pertkit {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

// Relative magnitude below which a term is treated as an exact zero.
inline constexpr double kZeroThreshold = 1e-14;

struct GradeKey {
  int order = 0;
  int harmonic = 0;

  auto operator<=>(const GradeKey&) const = default;
};

/// Family of d x d matrices M[j,k] standing for sum_{j,k} M[j,k] lambda^j e^{i k omega_d t}.
///
/// Absent keys are zero matrices. Terms whose max-abs entry falls under
/// kZeroThreshold times the operand scale are pruned by the arithmetic below,
/// so an empty term map means an exact zero.
class GradedOperator {
 public:
  using TermMap = std::map<GradeKey, Matrix>;

  explicit GradedOperator(Eigen::Index dim = 0, std::optional<double> omega_d = std::nullopt);

  static GradedOperator single(int order, int harmonic, const Matrix& m,
                               std::optional<double> omega_d = std::nullopt);
  static GradedOperator identity(Eigen::Index dim);

  Eigen::Index dim() const { return dim_; }
  std::optional<double> omega_d() const { return omega_d_; }
  const TermMap& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  bool is_static() const;

  /// Zero matrix when the key is absent.
  Matrix term(int order, int harmonic = 0) const;
  bool has_term(int order, int harmonic = 0) const;

  /// Accumulates into the (order, harmonic) slot.
  void add_term(int order, int harmonic, const Matrix& m);
  void set_term(int order, int harmonic, const Matrix& m);
  void set_omega_d(std::optional<double> omega_d);

  GradedOperator at_order(int order) const;
  int min_order() const;
  int max_order() const;
  double max_abs() const;

  /// Drops terms with max-abs below `threshold`.
  void prune(double threshold);

  GradedOperator& operator+=(const GradedOperator& other);
  GradedOperator& operator-=(const GradedOperator& other);
  GradedOperator& operator*=(Complex scalar);

 private:
  Eigen::Index dim_;
  std::optional<double> omega_d_;
  TermMap terms_;
};

GradedOperator add(const GradedOperator& a, const GradedOperator& b);
GradedOperator subtract(const GradedOperator& a, const GradedOperator& b);
GradedOperator scale(const GradedOperator& a, Complex s);
GradedOperator multiply(const GradedOperator& a, const GradedOperator& b);
GradedOperator commutator(const GradedOperator& a, const GradedOperator& b);
GradedOperator adjoint(const GradedOperator& a);
GradedOperator time_derivative(const GradedOperator& a);

/// Applies f entrywise-per-term (e.g. masking); prunes exact zeros.
template <typename F>
GradedOperator map_terms(const GradedOperator& a, F&& f) {
  GradedOperator out(a.dim(), a.omega_d());
  for (const auto& [key, m] : a.terms()) {
    Matrix r = f(key, m);
    if (r.cwiseAbs().maxCoeff() > 0.0) out.set_term(key.order, key.harmonic, r);
  }
  return out;
}

inline GradedOperator operator+(const GradedOperator& a, const GradedOperator& b) { return add(a, b); }
inline GradedOperator operator-(const GradedOperator& a, const GradedOperator& b) {
  return subtract(a, b);
}
inline GradedOperator operator*(const GradedOperator& a, const GradedOperator& b) {
  return multiply(a, b);
}
inline GradedOperator operator*(Complex s, const GradedOperator& a) { return scale(a, s); }

/// max over stored keys of |M[j,k]^dagger - M[j,-k]|.
double hermiticity_defect(const GradedOperator& a);
/// max over stored keys of |M[j,k]^dagger + M[j,-k]|.
double anti_hermiticity_defect(const GradedOperator& a);

bool is_hermitian_graded(const GradedOperator& a, double tol = 1e-12);
bool is_anti_hermitian_graded(const GradedOperator& a, double tol = 1e-12);

/// Largest max-abs difference over the union of keys.
double max_abs_difference(const GradedOperator& a, const GradedOperator& b);

}  // namespace pertkit
