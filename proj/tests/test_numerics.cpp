#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "polyq/eig.hpp"
#include "polyq/matrix.hpp"
#include "support.hpp"

using Catch::Approx;
using namespace polyq;

TEST_CASE("matrix arithmetic basics", "[numerics][matrix]") {
  const Matrix a{{1.0, 2.0}, {3.0, 4.0}};
  const Matrix b{{5.0, 6.0}, {7.0, 8.0}};

  const Matrix sum = a + b;
  REQUIRE(sum(0, 0) == 6.0);
  REQUIRE(sum(1, 1) == 12.0);

  const Matrix prod = a * b;
  REQUIRE(prod(0, 0) == 19.0);  // 1*5 + 2*7
  REQUIRE(prod(0, 1) == 22.0);
  REQUIRE(prod(1, 0) == 43.0);
  REQUIRE(prod(1, 1) == 50.0);

  const Matrix at = transpose(a);
  REQUIRE(at(0, 1) == 3.0);
  REQUIRE(frobenius_norm(Matrix{{3.0, 4.0}}) == Approx(5.0));

  REQUIRE_THROWS_AS(a + Matrix(3, 3), InvalidInputError);
  REQUIRE_THROWS_AS(a * Matrix(3, 3), InvalidInputError);
  REQUIRE_THROWS_AS(Matrix(0, 2), InvalidInputError);
}

TEST_CASE("sym_part and asymmetry helpers", "[numerics][matrix]") {
  const Matrix m{{1.0, 2.0}, {4.0, 3.0}};
  const Matrix s = sym_part(m);
  REQUIRE(s(0, 1) == Approx(3.0));
  REQUIRE(s(1, 0) == Approx(3.0));
  REQUIRE(max_asymmetry(m) == Approx(2.0));
  REQUIRE(max_asymmetry(s) == 0.0);
}

TEST_CASE("SymMatrix validates symmetry", "[numerics][eig]") {
  REQUIRE_NOTHROW(SymMatrix(Matrix{{1.0, 2.0}, {2.0, 1.0}}));
  REQUIRE_THROWS_AS(SymMatrix(Matrix{{1.0, 2.0}, {2.5, 1.0}}), InvalidInputError);
  REQUIRE_THROWS_AS(SymMatrix(Matrix(2, 3)), InvalidInputError);
}

TEST_CASE("sym_eig on frozen fixtures", "[numerics][eig]") {
  SECTION("diagonal matrix keeps its entries, sorted ascending") {
    const EigResult eg = sym_eig(SymMatrix(Matrix{{2.0, 0.0}, {0.0, 1.0}}));
    REQUIRE(eg.eigenvalues[0] == Approx(1.0));
    REQUIRE(eg.eigenvalues[1] == Approx(2.0));
    // eigenvector of the smaller eigenvalue is e2, of the larger e1
    REQUIRE(std::abs(eg.eigenvectors(1, 0)) == Approx(1.0));
    REQUIRE(std::abs(eg.eigenvectors(0, 1)) == Approx(1.0));
  }

  SECTION("[[1,2],[2,1]] has eigenvalues -1 and 3") {
    const EigResult eg = sym_eig(SymMatrix(Matrix{{1.0, 2.0}, {2.0, 1.0}}));
    REQUIRE(eg.eigenvalues[0] == Approx(-1.0));
    REQUIRE(eg.eigenvalues[1] == Approx(3.0));
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    // canonical sign: largest-magnitude component positive (first on ties)
    REQUIRE(eg.eigenvectors(0, 0) == Approx(inv_sqrt2));
    REQUIRE(eg.eigenvectors(1, 0) == Approx(-inv_sqrt2));
    REQUIRE(eg.eigenvectors(0, 1) == Approx(inv_sqrt2));
    REQUIRE(eg.eigenvectors(1, 1) == Approx(inv_sqrt2));
  }

  SECTION("zero matrix has all-zero spectrum") {
    const EigResult eg = sym_eig(SymMatrix(Matrix::zeros(3, 3)));
    for (double lam : eg.eigenvalues) REQUIRE(lam == 0.0);
  }

  SECTION("1x1 is trivial") {
    const EigResult eg = sym_eig(SymMatrix(Matrix{{-4.5}}));
    REQUIRE(eg.eigenvalues[0] == -4.5);
    REQUIRE(eg.eigenvectors(0, 0) == 1.0);
  }
}

TEST_CASE("sym_eig reconstruction and orthonormality on random input", "[numerics][eig][property]") {
  auto rng = testsupport::make_rng(401);
  for (std::size_t n = 1; n <= 12; ++n) {
    for (int rep = 0; rep < 8; ++rep) {
      const Matrix m = testsupport::random_sym(rng, n, 3.0);
      const double scale = std::max(1.0, frobenius_norm(m));
      const EigResult eg = sym_eig(SymMatrix(m));

      // eigenvalues ascending
      for (std::size_t i = 1; i < n; ++i) {
        REQUIRE(eg.eigenvalues[i - 1] <= eg.eigenvalues[i]);
      }

      // V diag(lambda) V^T == M
      Matrix lam = Matrix::zeros(n, n);
      for (std::size_t i = 0; i < n; ++i) lam(i, i) = eg.eigenvalues[i];
      const Matrix rec = eg.eigenvectors * lam * transpose(eg.eigenvectors);
      REQUIRE(frobenius_norm(rec - m) <= 1e-9 * scale);

      // V^T V == I
      const Matrix vtv = transpose(eg.eigenvectors) * eg.eigenvectors;
      REQUIRE(frobenius_norm(vtv - Matrix::identity(n)) <= 1e-9);
    }
  }
}

TEST_CASE("is_pd fixtures", "[numerics][eig]") {
  REQUIRE(is_pd(SymMatrix(Matrix::identity(2)), 1e-9));
  REQUIRE_FALSE(is_pd(SymMatrix(Matrix::zeros(2, 2)), 1e-9));         // semidefinite only
  REQUIRE_FALSE(is_pd(SymMatrix(Matrix{{1.0, 2.0}, {2.0, 1.0}}), 0.0));  // lambda_min = -1
  REQUIRE(is_pd(SymMatrix(Matrix::zeros(2, 2)), 0.0));                // >= 0 at eps = 0
}

TEST_CASE("is_pd at eps=0 matches the sign of lambda_min", "[numerics][eig][property]") {
  auto rng = testsupport::make_rng(402);
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng() % 5);
    const Matrix m = testsupport::random_sym(rng, n, 2.0);
    const SymMatrix sm(m);
    const double lmin = min_eigenvalue(sm);
    if (std::abs(lmin) > 1e-12 * std::max(1.0, frobenius_norm(m))) {
      REQUIRE(is_pd(sm, 0.0) == (lmin >= 0.0));
    }
    REQUIRE(min_eigenvalue(sm) == sym_eig(sm).eigenvalues.front());
  }
}

TEST_CASE("cholesky factors SPD matrices and rejects indefinite ones", "[numerics][eig]") {
  auto rng = testsupport::make_rng(403);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng() % 6);
    const Matrix m = testsupport::random_spd(rng, n);
    const auto l = cholesky(m);
    REQUIRE(l.has_value());
    REQUIRE(frobenius_norm((*l) * transpose(*l) - m) <= 1e-10 * std::max(1.0, frobenius_norm(m)));
  }
  REQUIRE_FALSE(cholesky(Matrix{{1.0, 2.0}, {2.0, 1.0}}).has_value());
}

TEST_CASE("solve_spd scalar oracle and round trips", "[numerics][eig]") {
  SECTION("scalar 1.3 x = 1") {
    const Matrix x = solve_spd(SymMatrix(Matrix{{1.3}}), Matrix{{1.0}});
    REQUIRE(x(0, 0) == Approx(10.0 / 13.0).epsilon(1e-12));
  }

  SECTION("random SPD round trip") {
    auto rng = testsupport::make_rng(404);
    for (int rep = 0; rep < 20; ++rep) {
      const std::size_t n = 1 + static_cast<std::size_t>(rng() % 6);
      const Matrix m = testsupport::random_spd(rng, n);
      const Matrix rhs = testsupport::random_matrix(rng, n, 2);
      const Matrix x = solve_spd(SymMatrix(m), rhs);
      const double scale = std::max(1.0, frobenius_norm(m) * std::max(1.0, frobenius_norm(x)));
      REQUIRE(frobenius_norm(m * x - rhs) <= 1e-9 * scale);
    }
  }

  SECTION("indefinite input throws NotPositiveDefinite") {
    REQUIRE_THROWS_AS(solve_spd(SymMatrix(Matrix{{1.0, 2.0}, {2.0, 1.0}}), Matrix{{1.0}, {1.0}}),
                      NotPositiveDefiniteError);
    REQUIRE_THROWS_AS(solve_spd(SymMatrix(Matrix{{0.0}}), Matrix{{1.0}}),
                      NotPositiveDefiniteError);
  }

  SECTION("shape mismatch throws InvalidInput") {
    REQUIRE_THROWS_AS(solve_spd(SymMatrix(Matrix::identity(2)), Matrix{{1.0}}),
                      InvalidInputError);
  }
}

TEST_CASE("inverse_spd inverts", "[numerics][eig]") {
  auto rng = testsupport::make_rng(405);
  const Matrix m = testsupport::random_spd(rng, 4);
  const Matrix inv = inverse_spd(SymMatrix(m));
  REQUIRE(frobenius_norm(m * inv - Matrix::identity(4)) <= 1e-9);
}

TEST_CASE("spectral_norm oracles", "[numerics][eig]") {
  REQUIRE(spectral_norm(Matrix{{3.0, 0.0}, {0.0, -4.0}}) == Approx(4.0));
  REQUIRE(spectral_norm(Matrix{{0.0, 2.0}, {0.0, 0.0}}) == Approx(2.0));
  REQUIRE(spectral_norm(Matrix{{1.0}, {2.0}, {2.0}}) == Approx(3.0));
}

TEST_CASE("spectral_radius_estimate oracles", "[numerics][eig]") {
  // nilpotent: radius 0 even though the norm is 2
  REQUIRE(spectral_radius_estimate(Matrix{{0.0, 2.0}, {0.0, 0.0}}) == Approx(0.0).margin(1e-9));
  // highly non-normal upper triangular: radius is the largest |diagonal|
  REQUIRE(spectral_radius_estimate(Matrix{{0.5, 100.0}, {0.0, 0.6}}) ==
          Approx(0.6).epsilon(1e-5));
  // scaled rotation: radius equals the scale regardless of angle
  const double th = 0.7;
  const Matrix rot{{0.9 * std::cos(th), -0.9 * std::sin(th)},
                   {0.9 * std::sin(th), 0.9 * std::cos(th)}};
  REQUIRE(spectral_radius_estimate(rot) == Approx(0.9).epsilon(1e-6));
}
