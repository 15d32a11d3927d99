#include "pertkit/models.hpp"

#include "pertkit/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <ostream>
#include <random>
#include <thread>

namespace pertkit::models {

BosonOps boson_ops(int n_max) {
  if (n_max < 2) throw PreconditionError("boson truncation must be at least 2");
  BosonOps ops;
  ops.a = Matrix::Zero(n_max, n_max);
  for (int n = 1; n < n_max; ++n) ops.a(n - 1, n) = std::sqrt(static_cast<double>(n));
  ops.a_dagger = ops.a.adjoint();
  return ops;
}

Pauli pauli() {
  const Complex i(0.0, 1.0);
  Pauli p;
  p.s0 = Matrix::Identity(2, 2);
  p.sx = Matrix::Zero(2, 2);
  p.sx << 0.0, 1.0, 1.0, 0.0;
  p.sy = Matrix::Zero(2, 2);
  p.sy << 0.0, -i, i, 0.0;
  p.sz = Matrix::Zero(2, 2);
  p.sz << 1.0, 0.0, 0.0, -1.0;
  return p;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

std::vector<Matrix> gell_mann_basis(int d) {
  if (d < 2) throw PreconditionError("Gell-Mann basis needs d >= 2");
  const Complex i(0.0, 1.0);
  std::vector<Matrix> basis;
  basis.push_back(Matrix::Identity(d, d));
  for (int j = 0; j < d; ++j) {
    for (int k = j + 1; k < d; ++k) {
      Matrix m = Matrix::Zero(d, d);
      m(j, k) = 1.0;
      m(k, j) = 1.0;
      basis.push_back(m);
    }
  }
  for (int j = 0; j < d; ++j) {
    for (int k = j + 1; k < d; ++k) {
      Matrix m = Matrix::Zero(d, d);
      m(j, k) = -i;
      m(k, j) = i;
      basis.push_back(m);
    }
  }
  for (int l = 1; l < d; ++l) {
    Matrix m = Matrix::Zero(d, d);
    const double c = std::sqrt(2.0 / (l * (l + 1.0)));
    for (int j = 0; j < l; ++j) m(j, j) = c;
    m(l, l) = -c * l;
    basis.push_back(m);
  }
  return basis;
}

Eigen::VectorXcd project_onto_basis(const Matrix& m, const std::vector<Matrix>& basis) {
  Eigen::VectorXcd c(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t k = 0; k < basis.size(); ++k) {
    if (basis[k].rows() != m.rows() || basis[k].cols() != m.cols()) {
      throw DimensionMismatch("basis element and matrix dimensions differ");
    }
    c(static_cast<Eigen::Index>(k)) =
        (basis[k].adjoint() * m).trace() / (basis[k].adjoint() * basis[k]).trace();
  }
  return c;
}

// ---------------------------------------------------------------------------

namespace {

Matrix permute(const Matrix& m, const std::vector<Eigen::Index>& perm) {
  const auto d = static_cast<Eigen::Index>(perm.size());
  Matrix out(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) out(i, j) = m(perm[i], perm[j]);
  }
  return out;
}

}  // namespace

Eigen::Index EdsrModel::index(int s, int n) const {
  for (Eigen::Index k = 0; k < dim(); ++k) {
    if (spin[k] == s && fock[k] == n) return k;
  }
  throw PreconditionError("no basis state with spin " + std::to_string(s) + " and n = " + std::to_string(n));
}

Matrix EdsrModel::qubit_projection(const Matrix& m) const {
  const Eigen::Index up = index(0, 0), down = index(1, 0);
  Matrix q(2, 2);
  q << m(up, up), m(up, down), m(down, up), m(down, down);
  return q;
}

Complex EdsrModel::sigma_z_component(const Matrix& m, int n, int n_prime) const {
  return 0.5 * (m(index(0, n), index(0, n_prime)) - m(index(1, n), index(1, n_prime)));
}

Complex EdsrModel::identity_component(const Matrix& m, int n, int n_prime) const {
  return 0.5 * (m(index(0, n), index(0, n_prime)) + m(index(1, n), index(1, n_prime)));
}

GradedOperator EdsrModel::full() const { return h_blocks + v + drive; }

EdsrModel build_edsr(const EdsrParams& p) {
  const int n_max = p.n_max;
  if (n_max < 4) throw PreconditionError("oscillator truncation must be at least 4");
  EdsrModel model;
  model.params = p;
  const double gap = std::min(std::abs(p.omega - p.omega_z), std::abs(p.omega + p.omega_z));
  if (std::abs(p.b_sl) > 0.1 * gap || std::abs(p.e0) > 0.1 * gap) {
    model.warnings.push_back("couplings are not small compared with |omega +- omega_z|");
  }

  const BosonOps b = boson_ops(n_max);
  const Pauli s = pauli();
  const Matrix id_n = Matrix::Identity(n_max, n_max);
  const Matrix x = b.a + b.a_dagger;
  const Matrix h0 = p.hbar * p.omega * kron(s.s0, b.a_dagger * b.a) - 0.5 * p.hbar * p.omega_z * kron(s.sz, id_n);
  const Matrix v = -0.5 * p.hbar * p.b_sl * kron(s.sx, x);
  const Matrix drive = -0.5 * p.e0 * kron(s.s0, x);

  std::vector<Eigen::Index> perm;
  int sizes[2] = {0, 0};
  for (int parity = 0; parity < 2; ++parity) {
    for (int sp = 0; sp < 2; ++sp) {
      for (int n = parity; n < n_max; n += 2) {
        perm.push_back(static_cast<Eigen::Index>(sp) * n_max + n);
        model.spin.push_back(sp);
        model.fock.push_back(n);
        ++sizes[parity];
      }
    }
  }
  model.block_sizes = {sizes[0], sizes[1]};
  model.h_blocks = GradedOperator::single(0, 0, permute(h0, perm));
  model.v = GradedOperator::single(1, 0, permute(v, perm));
  model.drive = GradedOperator(2 * n_max, p.omega_d);
  const Matrix dp = permute(drive, perm);
  model.drive.set_term(1, 1, dp);
  model.drive.set_term(1, -1, dp);
  return model;
}

double edsr_sigma_z_coefficient(const EdsrParams& p) {
  return p.hbar * p.omega_z * p.b_sl * p.b_sl / (4.0 * (p.omega * p.omega - p.omega_z * p.omega_z));
}

double edsr_static_drive_coefficient(const EdsrParams& p) {
  return -p.omega * p.e0 * p.b_sl / (p.omega * p.omega - p.omega_z * p.omega_z);
}

double edsr_driven_drive_coefficient(const EdsrParams& p) {
  const double w2 = p.omega * p.omega;
  return -0.5 * p.omega * p.e0 * p.b_sl *
         (1.0 / (w2 - p.omega_z * p.omega_z) + 1.0 / (w2 - p.omega_d * p.omega_d));
}

double edsr_delta_z(const EdsrParams& p) {
  return p.b_sl * p.b_sl / (2.0 * (p.omega * p.omega - p.omega_z * p.omega_z));
}

// ---------------------------------------------------------------------------

TransmonModel build_transmon_resonator(const TransmonParams& p) {
  if (p.n_t < 4 || p.n_r < 4) throw PreconditionError("truncations must be at least 4");
  TransmonModel model;
  model.params = p;
  double closest = std::numeric_limits<double>::infinity();
  for (int nt = 0; nt < p.n_t; ++nt) {
    closest = std::min(closest, std::abs(p.omega_r - p.omega_t - nt * p.alpha / 2.0));
  }
  if (std::abs(p.g) > 0.1 * closest) {
    model.warnings.push_back("coupling is not small compared with |omega_r - omega_t - n_t alpha / 2|");
  }

  const BosonOps t = boson_ops(p.n_t);
  const BosonOps r = boson_ops(p.n_r);
  const Matrix id_t = Matrix::Identity(p.n_t, p.n_t);
  const Matrix id_r = Matrix::Identity(p.n_r, p.n_r);
  const Matrix nt_op = t.a_dagger * t.a;
  const Matrix h0 = p.omega_t * kron(nt_op, id_r) + p.omega_r * kron(id_t, r.a_dagger * r.a) +
                    0.5 * p.alpha * kron(t.a_dagger * t.a_dagger * t.a * t.a, id_r);
  const Matrix v = -p.g * kron(t.a_dagger - t.a, r.a_dagger - r.a);
  model.h = GradedOperator::single(0, 0, h0) + GradedOperator::single(1, 0, v);
  return model;
}

DispersiveTerms dispersive_terms(const TransmonParams& p, int n_t, DispersiveReading reading) {
  const double a = p.alpha, wt = p.omega_t, wr = p.omega_r, g2 = p.g * p.g;
  const double n = n_t;
  const double d1 = n * a - a - wr + wt;  // N a - a - w_r + w_t
  const double d2 = n * a + wr + wt;
  const double d3 = n * a - wr + wt;
  const double d4 = n * a - a + wr + wt;
  for (double den : {d1, d2, d3, d4}) {
    if (den == 0.0) throw ResonantDenominator(n_t, n_t, 0, 0.0);
  }

  DispersiveTerms c;
  c.omega_t_shift = 2 * g2 / d1 - 2 * g2 / d2 + (a * g2 + g2 * wr - g2 * wt) / (d1 * d1) +
                    (a * g2 + g2 * wr + g2 * wt) / (d2 * d2);
  c.omega_r_shift = -2 * g2 / d2 - 2 * g2 / d3 + (-g2 * wr + g2 * wt) / (d3 * d3) +
                    (g2 * wr + g2 * wt) / (d2 * d2);
  c.alpha_shift = -a * g2 / (d1 * d1) + a * g2 / (d2 * d2);
  c.linear_cross_kerr =
      g2 * (2 / d4 + 2 / d1 - 2 / d2 - 2 / d3 + (a - wr - wt) / (d4 * d4) + (a + wr - wt) / (d1 * d1) +
            (a + wr + wt) / (d2 * d2) + (a - wr + wt) / (d3 * d3));
  if (reading == DispersiveReading::corrected) {
    c.nonlinear_cross_kerr = a * g2 * (-1 / (d1 * d1) - 1 / (d4 * d4) + 1 / (d3 * d3) + 1 / (d2 * d2));
  } else {
    const double e1 = n * a - a + wr - wt, e2 = n * a - a - wr - wt;
    const double e3 = n * a + wr - wt, e4 = n * a - wr - wt;
    for (double den : {e1, e2, e3, e4}) {
      if (den == 0.0) throw ResonantDenominator(n_t, n_t, 0, 0.0);
    }
    c.nonlinear_cross_kerr = a * g2 * (-1 / (e1 * e1) - 1 / (e2 * e2) + 1 / (e3 * e3) + 1 / (e4 * e4));
  }
  return c;
}

double appendix_b_eval(const TransmonParams& p, int n_t, int n_r, DispersiveReading reading) {
  const DispersiveTerms c = dispersive_terms(p, n_t, reading);
  const double nt = n_t, nr = n_r;
  return c.omega_t_shift * nt + c.omega_r_shift * nr + c.alpha_shift * nt * nt +
         c.linear_cross_kerr * nt * nr + c.nonlinear_cross_kerr * nt * nt * nr;
}

double transmon_second_order_shift(const TransmonParams& p, int n_t, int n_r) {
  auto energy = [&](int t, int r) {
    return p.omega_t * t + p.omega_r * r + 0.5 * p.alpha * t * (t - 1);
  };
  double shift = 0.0;
  for (int dt : {1, -1}) {
    for (int dr : {1, -1}) {
      const int t = n_t + dt, r = n_r + dr;
      if (t < 0 || r < 0) continue;
      const double mt = dt == 1 ? t : n_t;
      const double mr = dr == 1 ? r : n_r;
      shift += p.g * p.g * mt * mr / (energy(n_t, n_r) - energy(t, r));
    }
  }
  return shift;
}

// ---------------------------------------------------------------------------

namespace {

Matrix random_hermitian_offdiagonal(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix a(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double re = normal(rng);
      const double im = normal(rng);
      a(i, j) = Complex(re, im) / std::sqrt(2.0);
    }
  }
  Matrix h = 0.5 * (a + a.adjoint());
  h.diagonal().setZero();
  return h;
}

}  // namespace

GradedOperator random_ace_hamiltonian(const AceSpec& spec, std::uint64_t seed) {
  if (spec.dim < 2) throw PreconditionError("ACE instance needs dim >= 2");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> spacing(spec.spacing_lo, spec.spacing_hi);
  Eigen::VectorXd e(spec.dim);
  e(0) = 0.0;
  for (int i = 1; i < spec.dim; ++i) e(i) = e(i - 1) + spacing(rng);
  const Matrix h0 = e.cast<Complex>().asDiagonal();
  const Matrix v = spec.coupling * random_hermitian_offdiagonal(spec.dim, rng);
  return GradedOperator::single(0, 0, h0) + GradedOperator::single(1, 0, v);
}

Mask checkerboard_mask(Eigen::Index dim) {
  Mask::BoolMatrix m(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) m(i, j) = (i + j) % 2 == 1;
  }
  return Mask(std::move(m));
}

GradedOperator random_bd_hamiltonian(const BlockStructure& blocks, const BdSpec& spec,
                                     std::uint64_t seed) {
  const Eigen::Index d = blocks.dim();
  if (d < 2) throw PreconditionError("block-diagonalization instance needs dim >= 2");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> spacing(spec.spacing_lo, spec.spacing_hi);
  std::uniform_real_distribution<double> gap(spec.gap_lo, spec.gap_hi);

  Eigen::VectorXd e(d);
  e(0) = 0.0;
  double total = 0.0;
  for (Eigen::Index i = 1; i < d; ++i) {
    const double step = blocks.same_block(i - 1, i) ? spacing(rng) : gap(rng);
    e(i) = e(i - 1) + step;
    total += step;
  }
  const double mean_spacing = total / static_cast<double>(d - 1);
  const Matrix a = random_hermitian_offdiagonal(d, rng);
  Matrix in_block = Matrix::Zero(d, d), cross = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      (blocks.same_block(i, j) ? in_block : cross)(i, j) = a(i, j);
    }
  }
  GradedOperator h = GradedOperator::single(0, 0, e.cast<Complex>().asDiagonal());
  h += GradedOperator::single(1, 0, spec.in_block_coupling * mean_spacing * in_block);
  h += GradedOperator::single(2, 0, spec.cross_block_coupling * mean_spacing * cross);
  return h;
}

EnsembleInstance make_ensemble_instance(const EnsembleSpec& spec, int instance) {
  if (spec.blocks_min < 1 || spec.blocks_max < spec.blocks_min || spec.dim_max < spec.dim_min) {
    throw PreconditionError("invalid ensemble ranges");
  }
  std::mt19937_64 rng(spec.seed + static_cast<std::uint64_t>(instance));
  const int nb = std::uniform_int_distribution<int>(spec.blocks_min, spec.blocks_max)(rng);
  const int d = std::uniform_int_distribution<int>(std::max(spec.dim_min, std::max(nb, 2)),
                                                   std::max(spec.dim_max, std::max(nb, 2)))(rng);
  std::vector<int> points(static_cast<std::size_t>(d - 1));
  for (int i = 0; i < d - 1; ++i) points[static_cast<std::size_t>(i)] = i + 1;
  for (int i = 0; i < nb - 1; ++i) {
    const int j = std::uniform_int_distribution<int>(i, d - 2)(rng);
    std::swap(points[static_cast<std::size_t>(i)], points[static_cast<std::size_t>(j)]);
  }
  std::vector<int> cuts(points.begin(), points.begin() + (nb - 1));
  std::sort(cuts.begin(), cuts.end());
  std::vector<int> sizes;
  int prev = 0;
  for (int c : cuts) {
    sizes.push_back(c - prev);
    prev = c;
  }
  sizes.push_back(d - prev);

  BlockStructure blocks(std::move(sizes));
  GradedOperator h = random_bd_hamiltonian(blocks, spec.bd, rng());
  return {std::move(blocks), std::move(h)};
}

Fig3Result run_fig3_experiment(const EnsembleSpec& spec, int threads) {
  if (spec.count < 0 || spec.max_order < 1) throw PreconditionError("invalid ensemble size or order");
  const auto count = static_cast<std::size_t>(spec.count);
  std::vector<std::vector<Fig3Row>> per_instance(count);
  std::vector<std::string> failure(count);

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int i = next++; i < spec.count; i = next++) {
      const auto k = static_cast<std::size_t>(i);
      try {
        const EnsembleInstance inst = make_ensemble_instance(spec, i);
        std::vector<int> orders;
        for (int n = 1; n <= spec.max_order; ++n) orders.push_back(n);
        const auto rows = convergence_scan(
            inst.h, inst.blocks,
            [&](const GradedOperator& h, int n) { return run_la(h, inst.blocks, n); }, orders,
            {spec.lambda});
        for (const auto& r : rows) {
          per_instance[k].push_back({i, r.n, r.lambda, r.eta, spec.seed + static_cast<std::uint64_t>(i)});
        }
      } catch (const ResonantDenominator& e) {
        failure[k] = e.what();
      } catch (const DegenerateSpectrum& e) {
        failure[k] = e.what();
      } catch (const IllConditionedBlocks& e) {
        failure[k] = e.what();
      }
    }
  };
  const int n_threads = std::max(1, std::min(threads, std::max(1, spec.count)));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  Fig3Result result;
  for (std::size_t k = 0; k < count; ++k) {
    if (!failure[k].empty()) {
      result.skipped.emplace_back(static_cast<int>(k), failure[k]);
      continue;
    }
    result.rows.insert(result.rows.end(), per_instance[k].begin(), per_instance[k].end());
  }
  for (int n = 1; n <= spec.max_order; ++n) {
    std::vector<double> etas;
    for (const auto& r : result.rows) {
      if (r.n == n) etas.push_back(r.eta);
    }
    if (etas.empty()) continue;
    std::sort(etas.begin(), etas.end());
    auto quantile = [&](double q) {
      const double pos = q * static_cast<double>(etas.size() - 1);
      const auto lo = static_cast<std::size_t>(std::floor(pos));
      const auto hi = std::min(lo + 1, etas.size() - 1);
      return etas[lo] + (pos - static_cast<double>(lo)) * (etas[hi] - etas[lo]);
    };
    result.summary.push_back({n, quantile(0.25), quantile(0.5), quantile(0.75)});
  }
  return result;
}

void write_fig3_csv(std::ostream& out, const Fig3Result& result) {
  char buf[128];
  out << "instance,n,lambda,eta,seed\n";
  for (const auto& r : result.rows) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%llu\n", r.instance, r.n, r.lambda, r.eta,
                  static_cast<unsigned long long>(r.seed));
    out << buf;
  }
}

AceDemo run_ace_demo(const AceSpec& spec, std::uint64_t seed, int max_order, const Mask* mask) {
  const GradedOperator h = random_ace_hamiltonian(spec, seed);
  const Mask m = mask ? *mask : checkerboard_mask(h.dim());
  const TransformResult r = run_ace(h, m, max_order);
  AceDemo demo;
  demo.before = evaluate_at(h, 1.0).matrix;
  demo.mask = m.matrix().cast<double>().cast<Complex>();
  demo.after = evaluate_at(r.effective_hamiltonian(max_order), 1.0).matrix;
  return demo;
}

}  // namespace pertkit::models
