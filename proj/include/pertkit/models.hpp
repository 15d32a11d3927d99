#pragma once

#include "pertkit/least_action.hpp"
#include "pertkit/oracle.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace pertkit::models {

struct BosonOps {
  Matrix a;
  Matrix a_dagger;
};

/// Truncated ladder operators on Fock levels 0..n_max-1.
BosonOps boson_ops(int n_max);

struct Pauli {
  Matrix s0, sx, sy, sz;
};
Pauli pauli();

Matrix kron(const Matrix& a, const Matrix& b);

/// Identity, then symmetric, antisymmetric and diagonal generalized Gell-Mann matrices.
std::vector<Matrix> gell_mann_basis(int d);
/// c_i = tr(B_i^dagger M) / tr(B_i^dagger B_i).
Eigen::VectorXcd project_onto_basis(const Matrix& m, const std::vector<Matrix>& basis);

// ---------------------------------------------------------------------------
// Spin in a slanting field coupled to a driven oscillator

struct EdsrParams {
  double omega = 1.0;
  double omega_z = 0.3;
  double b_sl = 0.02;
  double e0 = 0.02;
  double omega_d = 0.25;
  double hbar = 1.0;
  int n_max = 20;
};

/// Basis ordered by boson parity: every even-n state first, then every odd-n
/// state; within a parity sector spin-up states precede spin-down, by n.
struct EdsrModel {
  EdsrParams params;
  GradedOperator h_blocks;  // order 0, diagonal
  GradedOperator v;         // order 1 spin-boson coupling
  GradedOperator drive;     // order 1, harmonics +-1
  std::vector<int> block_sizes;
  std::vector<int> spin;  // 0 = up (sigma_z = +1), 1 = down
  std::vector<int> fock;
  std::vector<std::string> warnings;

  Eigen::Index dim() const { return static_cast<Eigen::Index>(spin.size()); }
  Eigen::Index index(int s, int n) const;
  /// 2x2 spin block of `m` in the oscillator ground state.
  Matrix qubit_projection(const Matrix& m) const;
  /// (m_up,up - m_down,down) / 2 over the Fock pair (n, n').
  Complex sigma_z_component(const Matrix& m, int n, int n_prime) const;
  /// (m_up,up + m_down,down) / 2 over the Fock pair (n, n').
  Complex identity_component(const Matrix& m, int n, int n_prime) const;
  /// Undriven plus driven Hamiltonian.
  GradedOperator full() const;
};

EdsrModel build_edsr(const EdsrParams& p);

/// Closed forms for the effective qubit model.
double edsr_sigma_z_coefficient(const EdsrParams& p);  // hbar w_z b^2 / (4 (w^2 - w_z^2))
double edsr_static_drive_coefficient(const EdsrParams& p);
double edsr_driven_drive_coefficient(const EdsrParams& p);
double edsr_delta_z(const EdsrParams& p);

// ---------------------------------------------------------------------------
// Transmon coupled to a resonator

struct TransmonParams {
  double omega_t = 5.0;
  double omega_r = 7.0;
  double alpha = -0.3;
  double g = 0.05;
  int n_t = 8;
  int n_r = 8;
};

struct TransmonModel {
  TransmonParams params;
  GradedOperator h;  // order-0 diagonal plus order-1 coupling
  std::vector<std::string> warnings;

  Eigen::Index index(int nt, int nr) const { return static_cast<Eigen::Index>(nt) * params.n_r + nr; }
};

TransmonModel build_transmon_resonator(const TransmonParams& p);

enum class DispersiveReading {
  corrected,  // sign of omega_r, omega_t fixed in the non-linear cross-Kerr denominators
  printed,
};

struct DispersiveTerms {
  double omega_t_shift = 0.0;
  double omega_r_shift = 0.0;
  double alpha_shift = 0.0;
  double linear_cross_kerr = 0.0;
  double nonlinear_cross_kerr = 0.0;
};

/// Coefficient groups with N_t replaced by the eigenvalue n_t.
DispersiveTerms dispersive_terms(const TransmonParams& p, int n_t,
                                DispersiveReading reading = DispersiveReading::corrected);

/// Predicted second-order shift of |n_t, n_r> (c-number dropped).
double appendix_b_eval(const TransmonParams& p, int n_t, int n_r,
                       DispersiveReading reading = DispersiveReading::corrected);

/// Exact second-order Rayleigh-Schroedinger shift of |n_t, n_r> on the untruncated model.
double transmon_second_order_shift(const TransmonParams& p, int n_t, int n_r);

// ---------------------------------------------------------------------------
// Random ensembles

struct AceSpec {
  int dim = 10;
  double spacing_lo = 0.5;
  double spacing_hi = 1.5;
  double coupling = 0.05;
};

/// Ascending diagonal at order 0, dense Hermitian off-diagonal coupling at order 1.
GradedOperator random_ace_hamiltonian(const AceSpec& spec, std::uint64_t seed);

/// Entries with (i + j) odd.
Mask checkerboard_mask(Eigen::Index dim);

struct BdSpec {
  double spacing_lo = 0.5;
  double spacing_hi = 1.5;
  double gap_lo = 2.0;
  double gap_hi = 4.0;
  double in_block_coupling = 0.05;     // times the mean level spacing, order 1
  double cross_block_coupling = 0.02;  // times the mean level spacing, order 2
};

/// In-block couplings at order 1, cross-block couplings at order 2.
GradedOperator random_bd_hamiltonian(const BlockStructure& blocks, const BdSpec& spec,
                                     std::uint64_t seed);

struct EnsembleSpec {
  int count = 50;
  int dim_min = 6;
  int dim_max = 14;
  int blocks_min = 2;
  int blocks_max = 4;
  BdSpec bd;
  int max_order = 8;
  std::uint64_t seed = 7;
  double lambda = 1.0;
};

struct EnsembleInstance {
  BlockStructure blocks;
  GradedOperator h;
};

/// Deterministic in (spec, instance).
EnsembleInstance make_ensemble_instance(const EnsembleSpec& spec, int instance);

struct Fig3Row {
  int instance = 0;
  int n = 0;
  double lambda = 1.0;
  double eta = 0.0;
  std::uint64_t seed = 0;
};

struct Quantiles {
  int n = 0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
};

struct Fig3Result {
  std::vector<Fig3Row> rows;  // ordered by instance, then n
  std::vector<std::pair<int, std::string>> skipped;
  std::vector<Quantiles> summary;
};

/// Runs the least-action routine on every instance; `threads` workers (at least 1).
Fig3Result run_fig3_experiment(const EnsembleSpec& spec, int threads = 1);

void write_fig3_csv(std::ostream& out, const Fig3Result& result);

struct AceDemo {
  Matrix before;
  Matrix mask;  // 1.0 where eliminated
  Matrix after;
};

AceDemo run_ace_demo(const AceSpec& spec, std::uint64_t seed, int max_order, const Mask* mask = nullptr);

}  // namespace pertkit::models
