#pragma once

// ============================================================================
// Symmetric eigenproblems, Cholesky factorisation and SPD solves.
//
// The eigensolver is the classic two-stage scheme: Householder reduction to
// tridiagonal form followed by the implicit-shift QL iteration, both with
// eigenvector accumulation. It is deterministic (no pivot randomisation, no
// threading) which the solver and the byte-identical CLI reruns rely on.
// Matrices here are desk-scale (a few dozen rows at most), so O(n^3) with
// dense accumulation is comfortable.
// ============================================================================

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "polyq/errors.hpp"
#include "polyq/matrix.hpp"

namespace polyq {

/// A square matrix validated to be symmetric within 1e-12 * max(1, ||M||_F).
/// The stored matrix is the symmetrised (M + M^T)/2 so downstream algorithms
/// can assume exact symmetry.
class SymMatrix {
 public:
  explicit SymMatrix(const Matrix& m) {
    if (m.rows() != m.cols()) {
      throw InvalidInputError("SymMatrix: matrix is " + std::to_string(m.rows()) + "x" +
                              std::to_string(m.cols()) + ", not square");
    }
    if (!all_finite(m)) throw InvalidInputError("SymMatrix: non-finite entries");
    const double tol = 1e-12 * std::max(1.0, frobenius_norm(m));
    if (max_asymmetry(m) > tol) {
      throw InvalidInputError("SymMatrix: asymmetry " + std::to_string(max_asymmetry(m)) +
                              " exceeds tolerance");
    }
    m_ = sym_part(m);
  }

  const Matrix& mat() const { return m_; }
  std::size_t dim() const { return m_.rows(); }

 private:
  Matrix m_;
};

struct EigResult {
  Vec eigenvalues;      ///< ascending
  Matrix eigenvectors;  ///< orthonormal columns, column j pairs with eigenvalues[j]
};

namespace detail {

// Householder reduction to tridiagonal form with accumulation (EISPACK tred2).
inline void tred2(Matrix& a, Vec& d, Vec& e) {
  const std::size_t n = a.rows();
  for (std::size_t i = n - 1; i >= 1; --i) {
    const std::size_t l = i - 1;
    double h = 0.0;
    double scale = 0.0;
    if (l > 0) {
      for (std::size_t k = 0; k <= l; ++k) scale += std::abs(a(i, k));
      if (scale == 0.0) {
        e[i] = a(i, l);
      } else {
        for (std::size_t k = 0; k <= l; ++k) {
          a(i, k) /= scale;
          h += a(i, k) * a(i, k);
        }
        double f = a(i, l);
        double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        a(i, l) = f - g;
        f = 0.0;
        for (std::size_t j = 0; j <= l; ++j) {
          a(j, i) = a(i, j) / h;
          g = 0.0;
          for (std::size_t k = 0; k <= j; ++k) g += a(j, k) * a(i, k);
          for (std::size_t k = j + 1; k <= l; ++k) g += a(k, j) * a(i, k);
          e[j] = g / h;
          f += e[j] * a(i, j);
        }
        const double hh = f / (h + h);
        for (std::size_t j = 0; j <= l; ++j) {
          f = a(i, j);
          e[j] = g = e[j] - hh * f;
          for (std::size_t k = 0; k <= j; ++k) a(j, k) -= f * e[k] + g * a(i, k);
        }
      }
    } else {
      e[i] = a(i, l);
    }
    d[i] = h;
  }
  d[0] = 0.0;
  e[0] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i] != 0.0) {
      for (std::size_t j = 0; j < i; ++j) {
        double g = 0.0;
        for (std::size_t k = 0; k < i; ++k) g += a(i, k) * a(k, j);
        for (std::size_t k = 0; k < i; ++k) a(k, j) -= g * a(k, i);
      }
    }
    d[i] = a(i, i);
    a(i, i) = 1.0;
    for (std::size_t j = 0; j < i; ++j) a(j, i) = a(i, j) = 0.0;
  }
}

// Implicit-shift QL on a tridiagonal matrix with eigenvector accumulation
// (EISPACK tql2). d holds the diagonal, e the subdiagonal (e[0] unused).
inline void tql2(Vec& d, Vec& e, Matrix& z) {
  const std::size_t n = d.size();
  if (n == 1) return;
  for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    std::size_t m;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= std::numeric_limits<double>::epsilon() * dd) break;
      }
      if (m != l) {
        if (iter++ == 64) {
          throw NumericalFailureError("sym_eig: QL iteration failed to converge");
        }
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        bool underflow = false;
        for (std::size_t ii = m; ii-- > l;) {
          const std::size_t i = ii;
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          for (std::size_t k = 0; k < n; ++k) {
            f = z(k, i + 1);
            z(k, i + 1) = s * z(k, i) + c * f;
            z(k, i) = c * z(k, i) - s * f;
          }
        }
        if (underflow) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

}  // namespace detail

/// Full symmetric eigendecomposition, eigenvalues ascending, eigenvector
/// columns orthonormal. Each eigenvector carries a canonical sign (its
/// largest-magnitude component is positive) so results are reproducible and
/// easy to pin in tests.
inline EigResult sym_eig(const SymMatrix& sm) {
  const std::size_t n = sm.dim();
  EigResult out;
  out.eigenvalues.assign(n, 0.0);
  if (n == 1) {
    out.eigenvalues[0] = sm.mat()(0, 0);
    out.eigenvectors = Matrix::identity(1);
    return out;
  }
  Matrix z = sm.mat();
  Vec d(n, 0.0), e(n, 0.0);
  detail::tred2(z, d, e);
  detail::tql2(d, e, z);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });

  Matrix vecs(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    out.eigenvalues[j] = d[src];
    std::size_t imax = 0;
    double vmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(z(i, src)) > vmax) {
        vmax = std::abs(z(i, src));
        imax = i;
      }
    }
    const double sign = (z(imax, src) < 0.0) ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) vecs(i, j) = sign * z(i, src);
  }
  out.eigenvectors = vecs;
  return out;
}

inline double min_eigenvalue(const SymMatrix& m) { return sym_eig(m).eigenvalues.front(); }

/// Spectral norm of a symmetric matrix: max |eigenvalue|.
inline double sym_spectral_norm(const SymMatrix& m) {
  const EigResult eg = sym_eig(m);
  return std::max(std::abs(eg.eigenvalues.front()), std::abs(eg.eigenvalues.back()));
}

/// Plain lower-triangular Cholesky. Empty result when the matrix is not
/// numerically positive definite (nonpositive pivot encountered).
inline std::optional<Matrix> cholesky(const Matrix& m) {
  const std::size_t n = m.rows();
  if (m.cols() != n) throw InvalidInputError("cholesky: matrix not square");
  Matrix l = Matrix::zeros(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = m(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0) || !std::isfinite(diag)) return std::nullopt;
    const double ljj = std::sqrt(diag);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

/// Relative positive-definiteness test:
///   true  iff  lambda_min(M) >= eps * max(1, ||M||_2).
/// A Cholesky attempt on a Frobenius-shifted copy settles clear cases
/// cheaply; only boundary cases pay for an eigendecomposition (the Frobenius
/// norm dominates the spectral norm, so a successful shifted factorisation is
/// conclusive).
inline bool is_pd(const SymMatrix& m, double eps) {
  if (eps < 0.0 || !std::isfinite(eps)) throw InvalidInputError("is_pd: bad eps");
  const double scale_f = std::max(1.0, frobenius_norm(m.mat()));
  Matrix shifted = m.mat();
  for (std::size_t i = 0; i < shifted.rows(); ++i) shifted(i, i) -= eps * scale_f;
  if (eps > 0.0 && cholesky(shifted).has_value()) return true;
  const EigResult eg = sym_eig(m);
  const double lmin = eg.eigenvalues.front();
  const double norm2 = std::max(std::abs(eg.eigenvalues.front()), std::abs(eg.eigenvalues.back()));
  return lmin >= eps * std::max(1.0, norm2);
}

/// Solve M X = RHS for symmetric positive definite M (is_pd with eps=1e-12).
/// Cholesky path with an eigendecomposition fallback for matrices that pass
/// the relative PD test but sit on the factorisation boundary.
inline Matrix solve_spd(const SymMatrix& m, const Matrix& rhs) {
  const std::size_t n = m.dim();
  if (rhs.rows() != n) {
    throw InvalidInputError("solve_spd: rhs has " + std::to_string(rhs.rows()) +
                            " rows, expected " + std::to_string(n));
  }
  // Mechanical gate: a successful Cholesky factorization is the PD test.
  // (is_pd's relative margin is a *classification* tool; using it here would
  // reject legitimately PD systems whose spread exceeds ~1e12.)
  const std::optional<Matrix> lo = cholesky(m.mat());
  if (lo.has_value()) {
    const Matrix& l = *lo;
    Matrix x = rhs;
    // forward substitution L y = rhs
    for (std::size_t c = 0; c < x.cols(); ++c) {
      for (std::size_t i = 0; i < n; ++i) {
        double s = x(i, c);
        for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * x(k, c);
        x(i, c) = s / l(i, i);
      }
      // back substitution L^T x = y
      for (std::size_t ii = n; ii-- > 0;) {
        double s = x(ii, c);
        for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x(k, c);
        x(ii, c) = s / l(ii, ii);
      }
    }
    return x;
  }
  // Boundary fallback: X = V diag(1/lambda) V^T RHS.
  const EigResult eg = sym_eig(m);
  for (double lam : eg.eigenvalues) {
    if (!(lam > 0.0)) {
      throw NotPositiveDefiniteError("solve_spd: nonpositive eigenvalue in fallback");
    }
  }
  Matrix vt_rhs = transpose(eg.eigenvectors) * rhs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < vt_rhs.cols(); ++c) vt_rhs(i, c) /= eg.eigenvalues[i];
  }
  return eg.eigenvectors * vt_rhs;
}

inline Matrix inverse_spd(const SymMatrix& m) {
  return solve_spd(m, Matrix::identity(m.dim()));
}

/// Operator 2-norm of a general rectangular matrix via sym_eig of A^T A.
inline double spectral_norm(const Matrix& a) {
  const Matrix ata = transpose(a) * a;
  const double lmax = sym_eig(SymMatrix(sym_part(ata))).eigenvalues.back();
  return std::sqrt(std::max(0.0, lmax));
}

/// Gelfand-formula estimate of the spectral radius of a general square
/// matrix: rho(M) = lim ||M^k||^(1/k), evaluated by repeated squaring with
/// norm bookkeeping so powers of 2^40-ish never overflow. Accurate to a few
/// parts in 1e6 for the contraction checks it backs; never used inside
/// certified computations.
inline double spectral_radius_estimate(const Matrix& m, int squarings = 40) {
  if (m.rows() != m.cols()) throw InvalidInputError("spectral_radius_estimate: not square");
  Matrix b = m;
  double log_scale = 0.0;  // log ||M^(2^j)|| ~ log_scale + log ||b||
  double pow2 = 1.0;
  for (int j = 0; j < squarings; ++j) {
    const double nb = frobenius_norm(b);
    if (nb == 0.0) return 0.0;  // nilpotent
    b = (1.0 / nb) * b;
    b = b * b;
    log_scale = 2.0 * (log_scale + std::log(nb));
    pow2 *= 2.0;
  }
  const double nb = frobenius_norm(b);
  if (nb == 0.0) return 0.0;
  return std::exp((log_scale + std::log(nb)) / pow2);
}

}  // namespace polyq
