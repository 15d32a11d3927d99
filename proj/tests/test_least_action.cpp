#include "pertkit/errors.hpp"
#include "pertkit/least_action.hpp"
#include "pertkit/models.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace pertkit;
using testing::collapse;
using testing::max_abs;

namespace {

Matrix sum_series(const OrderSeries& s, double lambda, int up_to, Eigen::Index dim) {
  Matrix m = Matrix::Zero(dim, dim);
  for (const auto& [n, g] : s) {
    if (n > up_to) continue;
    m += std::pow(lambda, n) * g.term(n, 0);
  }
  return m;
}

// X^dagger B(X) (B(X)^dagger B(X))^{-1/2} for X = exp(-Z), computed densely.
Matrix closed_form_u_dagger(const Matrix& z, const BlockStructure& blocks) {
  const Matrix x = testing::expm(Matrix(-z));
  const Matrix bx = block_project(x, blocks);
  Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(bx.adjoint() * bx));
  return x.adjoint() * bx * es.operatorInverseSqrt();
}

OrderSeries fd_generator(const GradedOperator& h, int order) { return run_fd(h, order).generator.S; }

}  // namespace

TEST_SUITE("block structure") {
  TEST_CASE("projection examples") {
    const Matrix ones = Matrix::Ones(3, 3);
    const Matrix p = block_project(ones, BlockStructure({2, 1}));
    for (auto [i, j] : std::vector<std::pair<int, int>>{{0, 2}, {1, 2}, {2, 0}, {2, 1}}) CHECK(p(i, j) == Complex(0.0));
    CHECK(p(0, 1) == Complex(1.0));
    CHECK(p(2, 2) == Complex(1.0));

    std::mt19937_64 rng(30);
    const Matrix m = testing::random_matrix(4, rng);
    CHECK(max_abs(block_project(m, BlockStructure::whole(4)) - m) == 0.0);
    CHECK(max_abs(block_project(m, BlockStructure({1, 1, 1, 1})) - Matrix(m.diagonal().asDiagonal())) == 0.0);
  }

  TEST_CASE("membership") {
    const BlockStructure b({2, 3});
    CHECK(b.dim() == 5);
    CHECK(b.block_of(1) == 0);
    CHECK(b.block_of(2) == 1);
    CHECK(b.same_block(2, 4));
    CHECK_FALSE(b.same_block(1, 2));
    CHECK_THROWS_AS(BlockStructure({2, 0}), PreconditionError);
  }
}

TEST_SUITE("la products") {
  TEST_CASE("product over composition") {
    const auto px = models::pauli();
    OrderSeries s;
    s.emplace(1, GradedOperator::single(1, 0, px.sx));
    CHECK(max_abs_difference(product_over_composition(s, {1}, 2), s.at(1)) == 0.0);
    const auto sq = product_over_composition(s, {1, 1}, 2);
    CHECK(max_abs(sq.term(2, 0) - Matrix::Identity(2, 2)) < 1e-15);
    CHECK(product_over_composition(s, {1, 2}, 2).empty());
    CHECK(max_abs_difference(product_over_composition(s, {}, 2), GradedOperator::identity(2)) == 0.0);

    std::mt19937_64 rng(31);
    OrderSeries z;
    z.emplace(1, GradedOperator::single(1, 0, testing::random_matrix(3, rng)));
    z.emplace(2, GradedOperator::single(2, 0, testing::random_matrix(3, rng)));
    const Matrix a = z.at(1).term(1, 0), b = z.at(2).term(2, 0);
    const Matrix diff = product_over_composition(z, {1, 2}, 3).term(3, 0) - product_over_composition(z, {2, 1}, 3).term(3, 0);
    CHECK(max_abs(diff - (a * b - b * a)) < 1e-13);
    CHECK(max_abs(a * b - b * a) > 1e-3);
  }

  TEST_CASE("binomial(-1/2, m)") {
    CHECK(binom_minus_half(0) == 1.0);
    CHECK(binom_minus_half(1) == -0.5);
    CHECK(binom_minus_half(2) == 0.375);
    CHECK(binom_minus_half(3) == -0.3125);
    CHECK(binom_minus_half(4) == doctest::Approx(35.0 / 128.0).epsilon(1e-15));
    // (1 + x)^{-1/2} at x = 0.1
    double s = 0.0;
    for (int m = 0; m < 30; ++m) s += binom_minus_half(m) * std::pow(0.1, m);
    CHECK(s == doctest::Approx(1.0 / std::sqrt(1.1)).epsilon(1e-14));
  }
}

TEST_SUITE("epsilon") {
  TEST_CASE("second order by hand") {
    std::mt19937_64 rng(32);
    const BlockStructure blocks({2, 2});
    const auto z = fd_generator(testing::random_problem(4, rng, 0.1), 2);
    const Matrix z1 = z.at(1).term(1, 0);
    const Matrix bz = block_project(z1, blocks);
    const Matrix expected = block_project(Matrix(z1 * z1), blocks) - bz * bz;
    CHECK(max_abs(compute_epsilon(2, z, blocks).term(2, 0) - expected) < 1e-14);
  }

  TEST_CASE("block-diagonal first order cancels") {
    std::mt19937_64 rng(33);
    const BlockStructure blocks({2, 2});
    Matrix a = block_project(testing::random_matrix(4, rng), blocks);
    OrderSeries z;
    z.emplace(1, GradedOperator::single(1, 0, a - a.adjoint()));
    CHECK_THROWS_AS(compute_epsilon(2, z, blocks), OrderNotSolved);
    z.emplace(2, GradedOperator(4));
    CHECK(compute_epsilon(2, z, blocks).max_abs() < 1e-15);
  }

  TEST_CASE("hermitian, block-diagonal, and equal to the dense series") {
    std::mt19937_64 rng(34);
    const BlockStructure blocks({2, 2});
    const int n = 6;
    const auto z = fd_generator(testing::random_problem(4, rng, 1.0), n);
    OrderSeries eps;
    for (int i = 2; i <= n; ++i) {
      eps.emplace(i, compute_epsilon(i, z, blocks));
      CHECK(is_hermitian_graded(eps.at(i)));
      CHECK(max_abs_difference(block_project(eps.at(i), blocks), eps.at(i)) == 0.0);
    }
    auto residual = [&](double lambda) {
      const Matrix x = testing::expm(Matrix(-sum_series(z, lambda, n, 4)));
      const Matrix bx = block_project(x, blocks);
      const Matrix exact = block_project(Matrix(x.adjoint()), blocks) * bx - Matrix::Identity(4, 4);
      return max_abs(exact - sum_series(eps, lambda, n, 4));
    };
    const double ratio = residual(0.04) / residual(0.02);
    CAPTURE(ratio);
    CHECK(ratio > 0.8 * std::pow(2.0, n + 1));
  }
}

TEST_SUITE("la generator") {
  TEST_CASE("first order is the block-off-diagonal part of Z") {
    std::mt19937_64 rng(35);
    const BlockStructure blocks({1, 2, 2});
    const auto z = fd_generator(testing::random_problem(5, rng, 0.1), 3);
    const auto la = compute_la_generator(z, blocks, 3);
    const Matrix z1 = z.at(1).term(1, 0);
    CHECK(max_abs(la.S.at(1).term(1, 0) - (z1 - block_project(z1, blocks))) < 1e-15);
    CHECK(max_abs(la.U.at(1).term(1, 0) - la.S.at(1).term(1, 0)) < 1e-15);
    CHECK(!la.epsilon.count(1));
  }

  TEST_CASE("trivial inputs") {
    OrderSeries zero;
    for (int n = 1; n <= 4; ++n) zero.emplace(n, GradedOperator(3));
    const auto la = compute_la_generator(zero, BlockStructure({1, 2}), 4);
    for (int n = 1; n <= 4; ++n) CHECK(la.S.at(n).empty());

    std::mt19937_64 rng(36);
    const auto z = fd_generator(testing::random_problem(4, rng, 0.1), 3);
    const auto fd_blocks = compute_la_generator(z, BlockStructure({1, 1, 1, 1}), 3);
    CHECK(max_abs_difference(fd_blocks.S.at(1), z.at(1)) < 1e-15);
  }

  TEST_CASE("anti-hermitian and matches the closed-form unitary") {
    std::mt19937_64 rng(37);
    for (const auto& sizes : std::vector<std::vector<int>>{{2, 2}, {1, 2, 2}, {3, 2}}) {
      const BlockStructure blocks(sizes);
      const Eigen::Index d = blocks.dim();
      const int n = 5;
      const auto z = fd_generator(testing::random_problem(d, rng, 1.0), n);
      const auto la = compute_la_generator(z, blocks, n);
      for (int j = 1; j <= n; ++j) CHECK(is_anti_hermitian_graded(la.S.at(j), 1e-12));

      auto u_residual = [&](double lambda) {
        const Matrix exact = closed_form_u_dagger(sum_series(z, lambda, n, d), blocks);
        return max_abs(exact - Matrix::Identity(d, d) - sum_series(la.U, lambda, n, d));
      };
      auto exp_residual = [&](double lambda) {
        const Matrix e = testing::expm(sum_series(la.S, lambda, n, d));
        return max_abs(e - Matrix::Identity(d, d) - sum_series(la.U, lambda, n, d));
      };
      for (const auto& [label, f] : {std::pair<const char*, std::function<double(double)>>{"closed form", u_residual},
                                     {"exponential", exp_residual}}) {
        const double ratio = f(0.04) / f(0.02);
        CAPTURE(label);
        CAPTURE(ratio);
        CHECK(ratio > 0.8 * std::pow(2.0, n + 1));
      }
    }
  }
}

TEST_SUITE("run_la") {
  TEST_CASE("single block leaves the input untouched") {
    std::mt19937_64 rng(38);
    const auto h = testing::random_problem(4, rng, 0.1);
    const auto r = run_la(h, BlockStructure::whole(4), 4);
    for (int n = 1; n <= 4; ++n) CHECK(r.generator.at(n).max_abs() < 1e-15);
    CHECK(max_abs_difference(r.effective_hamiltonian(), h) < 1e-15);
  }

  TEST_CASE("agrees with SWT for two blocks and block-off-diagonal V") {
    std::mt19937_64 rng(39);
    const BlockStructure blocks({2, 2});
    const Mask off = Mask::block_off_diagonal({2, 2});
    for (int trial = 0; trial < 5; ++trial) {
      const Matrix h0 = testing::random_levels(4, rng);
      const Matrix v = off.select(testing::random_hermitian(4, rng));
      const auto la = run_la(GradedOperator::single(0, 0, h0) + GradedOperator::single(1, 0, v), blocks, 2);
      const auto swt = run_swt(GradedOperator::single(0, 0, h0), GradedOperator::single(1, 0, v), {2, 2}, 2);
      for (int n = 1; n <= 2; ++n) {
        CHECK(max_abs_difference(la.corrections.at(n), swt.corrections.at(n)) < 1e-12);
        CHECK(max_abs_difference(la.generator.at(n), swt.generator.at(n)) < 1e-12);
      }
    }
  }

  TEST_CASE("block diagonal output and rejection of driven input") {
    const auto inst = models::make_ensemble_instance(models::EnsembleSpec{}, 0);
    const auto r = run_la(inst.h, inst.blocks, 4);
    const Mask off = Mask::block_off_diagonal(inst.blocks.sizes());
    for (const auto& [n, c] : r.corrections) CHECK(off.select(c).max_abs() < 1e-12);

    GradedOperator driven(2, 1.0);
    driven.set_term(0, 0, Matrix::Identity(2, 2));
    driven.set_term(1, 1, Matrix::Ones(2, 2));
    driven.set_term(1, -1, Matrix::Ones(2, 2));
    CHECK_THROWS_AS(run_la(driven, BlockStructure({1, 1}), 2), PreconditionError);
  }
}
