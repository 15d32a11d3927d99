#include "pertkit/commutator_cache.hpp"
#include "pertkit/composition.hpp"
#include "pertkit/errors.hpp"
#include "pertkit/graded_operator.hpp"
#include "support.hpp"

#include <doctest.h>

#include <set>

using namespace pertkit;
using testing::random_hermitian;
using testing::random_matrix;

namespace {

Matrix sx() {
  Matrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}
Matrix sy() {
  Matrix m(2, 2);
  m << 0.0, Complex(0, -1), Complex(0, 1), 0.0;
  return m;
}
Matrix sz() {
  Matrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

// Random hermitian-graded operator with the given orders and harmonics in {-h..h}.
GradedOperator random_hermitian_graded(Eigen::Index d, std::mt19937_64& rng, int max_order, int h) {
  GradedOperator g(d, h ? std::optional<double>(0.7) : std::nullopt);
  for (int j = 0; j <= max_order; ++j) {
    g.set_term(j, 0, random_hermitian(d, rng));
    for (int k = 1; k <= h; ++k) {
      const Matrix m = random_matrix(d, rng);
      g.set_term(j, k, m);
      g.set_term(j, -k, m.adjoint());
    }
  }
  return g;
}

GradedOperator random_anti_hermitian_graded(Eigen::Index d, std::mt19937_64& rng, int max_order, int h) {
  return scale(random_hermitian_graded(d, rng, max_order, h), Complex(0, 1));
}

// Direct left-nested commutator without any cache.
GradedOperator naive_nested(const GradedOperator& base, const std::vector<GradedOperator>& factors) {
  GradedOperator acc = base;
  for (const auto& f : factors) acc = commutator(acc, f);
  return acc;
}

}  // namespace

TEST_SUITE("graded operator") {
  TEST_CASE("add: identity, disjoint keys, cancellation") {
    std::mt19937_64 rng(1);
    const Matrix m = random_matrix(3, rng);
    const auto a = GradedOperator::single(1, 0, m);
    CHECK(max_abs_difference(add(a, GradedOperator(3)), a) == 0.0);

    const auto b = GradedOperator::single(1, 1, m, 1.0) + GradedOperator::single(1, -1, m, 1.0);
    CHECK(b.terms().size() == 2);
    CHECK(b.has_term(1, 1));
    CHECK(b.has_term(1, -1));

    const auto c = GradedOperator::single(2, 0, m) + GradedOperator::single(2, 0, Matrix(-m));
    CHECK(c.empty());
  }

  TEST_CASE("add rejects dimension and drive mismatches") {
    CHECK_THROWS_AS(add(GradedOperator(2), GradedOperator(3)), DimensionMismatch);
    const auto a = GradedOperator::single(1, 1, Matrix::Identity(2, 2), 1.0);
    const auto b = GradedOperator::single(1, 1, Matrix::Identity(2, 2), 2.0);
    CHECK_THROWS_AS(add(a, b), PreconditionError);
  }

  TEST_CASE("multiply: identity, harmonic addition, noncommuting orders") {
    std::mt19937_64 rng(2);
    const auto x = GradedOperator::single(2, 1, random_matrix(3, rng), 0.5);
    CHECK(max_abs_difference(multiply(GradedOperator::identity(3), x), x) == 0.0);

    const Matrix a = random_matrix(2, rng), b = random_matrix(2, rng);
    const auto p = multiply(GradedOperator::single(1, 1, a, 1.0), GradedOperator::single(1, -1, b, 1.0));
    REQUIRE(p.terms().size() == 1);
    CHECK(testing::max_abs(p.term(2, 0) - a * b) < 1e-15);

    const auto ab = multiply(GradedOperator::single(1, 0, a), GradedOperator::single(2, 0, b));
    const auto ba = multiply(GradedOperator::single(2, 0, b), GradedOperator::single(1, 0, a));
    const Matrix diff = ab.term(3, 0) - ba.term(3, 0);
    CHECK(testing::max_abs(diff - (a * b - b * a)) < 1e-14);
  }

  TEST_CASE("commutator examples") {
    std::mt19937_64 rng(3);
    const auto x = GradedOperator::single(1, 0, random_matrix(3, rng));
    CHECK(commutator(x, x).empty());

    const auto c = commutator(GradedOperator::single(0, 0, sz()), GradedOperator::single(1, 0, sx()));
    CHECK(testing::max_abs(c.term(1, 0) - Complex(0, 2) * sy()) < 1e-15);

    const auto h = random_hermitian_graded(3, rng, 2, 1);
    const auto s = random_anti_hermitian_graded(3, rng, 2, 1);
    CHECK(is_hermitian_graded(commutator(h, s)));
    CHECK(is_anti_hermitian_graded(commutator(h, random_hermitian_graded(3, rng, 1, 1))));
  }

  TEST_CASE("adjoint examples") {
    std::mt19937_64 rng(4);
    const auto x = GradedOperator::single(1, 2, random_matrix(3, rng), 1.0);
    const auto y = adjoint(x);
    REQUIRE(y.terms().size() == 1);
    CHECK(y.has_term(1, -2));
    CHECK(max_abs_difference(adjoint(y), x) == 0.0);
    const auto h = random_hermitian_graded(3, rng, 2, 2);
    CHECK(max_abs_difference(adjoint(h), h) < 1e-15);
  }

  TEST_CASE("time derivative") {
    std::mt19937_64 rng(5);
    CHECK(time_derivative(GradedOperator::single(1, 0, random_matrix(2, rng))).empty());
    const Matrix m = random_matrix(2, rng);
    const auto d = time_derivative(GradedOperator::single(1, 1, m, 2.0));
    CHECK(testing::max_abs(d.term(1, 1) - Complex(0, 2) * m) < 1e-15);
    CHECK(is_anti_hermitian_graded(time_derivative(random_anti_hermitian_graded(3, rng, 2, 2))));
    CHECK_THROWS_AS(time_derivative(GradedOperator::single(1, 1, m)), PreconditionError);
  }

  TEST_CASE("property: grading closure and adjoint anti-homomorphism") {
    std::mt19937_64 rng(6);
    std::uniform_int_distribution<int> ord(0, 3), har(-2, 2);
    for (int trial = 0; trial < 50; ++trial) {
      GradedOperator a(3, 1.3), b(3, 1.3);
      std::set<std::pair<int, int>> expected;
      std::vector<GradeKey> ka, kb;
      for (int t = 0; t < 3; ++t) {
        ka.push_back({ord(rng), har(rng)});
        kb.push_back({ord(rng), har(rng)});
      }
      for (const auto& k : ka) a.set_term(k.order, k.harmonic, random_matrix(3, rng));
      for (const auto& k : kb) b.set_term(k.order, k.harmonic, random_matrix(3, rng));
      for (const auto& [x, mx] : a.terms()) {
        for (const auto& [y, my] : b.terms()) expected.emplace(x.order + y.order, x.harmonic + y.harmonic);
      }
      const auto prod = multiply(a, b);
      const auto comm = commutator(a, b);
      for (const auto& [k, m] : prod.terms()) CHECK(expected.count({k.order, k.harmonic}) == 1);
      for (const auto& [k, m] : comm.terms()) CHECK(expected.count({k.order, k.harmonic}) == 1);
      CHECK(max_abs_difference(adjoint(multiply(a, b)), multiply(adjoint(b), adjoint(a))) < 1e-12);
    }
  }

  TEST_CASE("property: commutator hermiticity classes") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 30; ++trial) {
      const auto h1 = random_hermitian_graded(4, rng, 2, 1);
      const auto h2 = random_hermitian_graded(4, rng, 1, 2);
      const auto s = random_anti_hermitian_graded(4, rng, 2, 1);
      CHECK(is_anti_hermitian_graded(commutator(h1, h2)));
      CHECK(is_hermitian_graded(commutator(h1, s)));
    }
  }
}

TEST_SUITE("compositions") {
  TEST_CASE("n = 3 with zero head, exact list and order") {
    const auto c = enumerate_compositions(3, true);
    std::vector<std::vector<int>> got;
    for (const auto& x : c) got.push_back(x.as_tuple());
    const std::vector<std::vector<int>> expected{{3},       {0, 3},    {1, 2},    {2, 1},
                                                 {0, 1, 2}, {0, 2, 1}, {1, 1, 1}, {0, 1, 1, 1}};
    CHECK(got == expected);
  }

  TEST_CASE("n = 1 and positive compositions of 3") {
    const auto c1 = enumerate_compositions(1, true);
    REQUIRE(c1.size() == 2);
    CHECK(c1[0].as_tuple() == std::vector<int>{1});
    CHECK(c1[1].as_tuple() == std::vector<int>{0, 1});

    std::set<std::vector<int>> p3;
    for (const auto& x : enumerate_compositions(3, false)) p3.insert(x.as_tuple());
    CHECK(p3 == std::set<std::vector<int>>{{3}, {2, 1}, {1, 2}, {1, 1, 1}});
    CHECK(positive_compositions(3).size() == 4);
  }

  TEST_CASE("property: counts against brute force") {
    for (int n = 1; n <= 10; ++n) {
      CHECK(enumerate_compositions(n, true).size() == static_cast<std::size_t>(1 << n));
      CHECK(positive_compositions(n).size() == static_cast<std::size_t>(1 << (n - 1)));

    }
    // Brute force over all tuples with entries 0..n for small n.
    for (int n = 1; n <= 6; ++n) {
      std::set<std::vector<int>> brute;
      for (int len = 1; len <= n + 1; ++len) {
        std::vector<int> t(static_cast<std::size_t>(len), 0);
        while (true) {
          int sum = 0;
          bool ok = true;
          for (int i = 0; i < len; ++i) {
            sum += t[i];
            if (i > 0 && t[i] == 0) ok = false;
          }
          if (ok && sum == n) brute.insert(t);
          int i = 0;
          while (i < len && ++t[i] > n) t[i++] = 0;
          if (i == len) break;
        }
      }
      std::set<std::vector<int>> got;
      for (const auto& x : enumerate_compositions(n, true)) got.insert(x.as_tuple());
      CHECK(got == brute);
    }
  }

  TEST_CASE("parts-restricted compositions and bad input") {
    CHECK(compositions_with_parts(4, 2).size() == 3);
    CHECK_THROWS(enumerate_compositions(0, true));
  }
}

TEST_SUITE("commutator cache") {
  TEST_CASE("nested commutator examples") {
    std::mt19937_64 rng(8);
    const Matrix h0 = testing::random_levels(3, rng);
    const Matrix h2 = random_hermitian(3, rng);
    OrderSeries base{{0, GradedOperator::single(0, 0, h0)}, {2, GradedOperator::single(2, 0, h2)}};
    GeneratorSeries gen;
    gen.S.emplace(1, scale(GradedOperator::single(1, 0, random_hermitian(3, rng)), Complex(0, 1)));
    CommutatorCache cache;

    const auto bare = nested_commutator(base, BaseTag::H, {2, {}}, gen, cache, 3);
    CHECK(max_abs_difference(bare, base.at(2)) == 0.0);

    const auto c01 = nested_commutator(base, BaseTag::H, {0, {1}}, gen, cache, 3);
    CHECK(max_abs_difference(c01, commutator(base.at(0), gen.at(1))) < 1e-15);

    CHECK_THROWS_AS(nested_commutator(base, BaseTag::H, {0, {2}}, gen, cache, 3), OrderNotSolved);
  }

  TEST_CASE("cache hits after order 3 then order 4, cold equals warm") {
    std::mt19937_64 rng(9);
    OrderSeries base;
    base.emplace(0, GradedOperator::single(0, 0, testing::random_levels(4, rng)));
    base.emplace(1, GradedOperator::single(1, 0, random_hermitian(4, rng)));
    GeneratorSeries gen;
    for (int j = 1; j <= 4; ++j) {
      gen.S.emplace(j, scale(GradedOperator::single(j, 0, random_hermitian(4, rng)), Complex(0, 1)));
    }
    CommutatorCache warm;
    for (int n : {3, 4}) {
      for (const auto& c : enumerate_compositions(n, true)) nested_commutator(base, BaseTag::H, c, gen, warm, 4);
    }
    CHECK(warm.stats().hits > 0);

    for (const auto& c : enumerate_compositions(4, true)) {
      CommutatorCache cold;
      const auto a = nested_commutator(base, BaseTag::H, c, gen, cold, 4);
      const auto b = nested_commutator(base, BaseTag::H, c, gen, warm, 4);
      std::vector<GradedOperator> factors;
      for (int s : c.tail) factors.push_back(gen.at(s));
      const auto naive = base.count(c.head) ? naive_nested(base.at(c.head), factors) : GradedOperator(4);
      REQUIRE(a.terms().size() == b.terms().size());
      for (auto ia = a.terms().begin(), ib = b.terms().begin(); ia != a.terms().end(); ++ia, ++ib) {
        CHECK(ia->first == ib->first);
      }
      CHECK(max_abs_difference(a, b) < 1e-14);
      CHECK(max_abs_difference(a, naive) < 1e-12);
    }
  }
}
