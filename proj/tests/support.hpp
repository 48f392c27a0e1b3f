#pragma once

// Shared helpers for the test suite: seeded random matrices and systems.
// All randomness flows through mt19937_64 with explicit seeds and a hand
// rolled uniform so expected values stay stable across standard libraries.

#include <cstdint>
#include <random>

#include "polyq/eig.hpp"
#include "polyq/matrix.hpp"

namespace testsupport {

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

/// Uniform double in (0, 1), portable across standard libraries.
inline double unit_uniform(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Uniform double in [-scale, scale].
inline double sym_uniform(std::mt19937_64& rng, double scale = 1.0) {
  return scale * (2.0 * unit_uniform(rng) - 1.0);
}

inline polyq::Matrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c,
                                   double scale = 1.0) {
  polyq::Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) m(i, j) = sym_uniform(rng, scale);
  }
  return m;
}

inline polyq::Matrix random_sym(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
  return polyq::sym_part(random_matrix(rng, n, n, scale));
}

/// Comfortably positive definite: G^T G plus a unit diagonal bump.
inline polyq::Matrix random_spd(std::mt19937_64& rng, std::size_t n) {
  const polyq::Matrix g = random_matrix(rng, n, n);
  return polyq::sym_part(polyq::transpose(g) * g + 0.5 * polyq::Matrix::identity(n));
}

/// Random square matrix rescaled to a prescribed operator 2-norm.
inline polyq::Matrix random_with_norm(std::mt19937_64& rng, std::size_t n, double norm) {
  polyq::Matrix a = random_matrix(rng, n, n);
  const double cur = polyq::spectral_norm(a);
  if (cur > 0.0) a = (norm / cur) * a;
  return a;
}

}  // namespace testsupport
