#pragma once

// ============================================================================
// Dense row-major matrices sized for control-design work: dimensions are a
// handful, never thousands, so everything favours clarity and determinism
// over blocking or vectorisation tricks.
// ============================================================================

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "polyq/errors.hpp"

namespace polyq {

class Matrix {
 public:
  Matrix() = default;

  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), v_(rows * cols, fill) {
    if (rows == 0 || cols == 0) {
      throw InvalidInputError("Matrix dimensions must be at least 1x1");
    }
  }

  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    if (rows_ == 0 || cols_ == 0) {
      throw InvalidInputError("Matrix literal must be at least 1x1");
    }
    v_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) {
        throw InvalidInputError("ragged Matrix literal");
      }
      v_.insert(v_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix zeros(std::size_t rows, std::size_t cols) {
    return Matrix(rows, cols, 0.0);
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return v_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return v_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return v_[r * cols_ + c]; }

  const std::vector<double>& data() const { return v_; }
  std::vector<double>& data() { return v_; }

  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> v_;
};

inline void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (!a.same_shape(b)) {
    throw InvalidInputError(std::string(op) + ": shape mismatch (" +
                            std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " vs " +
                            std::to_string(b.rows()) + "x" + std::to_string(b.cols()) + ")");
  }
}

inline Matrix operator+(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "operator+");
  Matrix out = a;
  for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] += b.data()[i];
  return out;
}

inline Matrix operator-(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "operator-");
  Matrix out = a;
  for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] -= b.data()[i];
  return out;
}

inline Matrix operator*(double s, const Matrix& a) {
  Matrix out = a;
  for (double& x : out.data()) x *= s;
  return out;
}

inline Matrix operator*(const Matrix& a, double s) { return s * a; }

inline Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw InvalidInputError("operator*: inner dimension mismatch (" +
                            std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + ")");
  }
  Matrix out(a.rows(), b.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) {
        out(i, j) += aik * b(k, j);
      }
    }
  }
  return out;
}

inline Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  }
  return out;
}

/// (M + M^T)/2 — used wherever an expression is symmetric by construction
/// but floating point rounding may leave an asymmetric dust.
inline Matrix sym_part(const Matrix& a) {
  if (a.rows() != a.cols()) throw InvalidInputError("sym_part: matrix not square");
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = 0.5 * (a(i, j) + a(j, i));
  }
  return out;
}

inline double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double x : a.data()) s += x * x;
  return std::sqrt(s);
}

inline double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double x : a.data()) m = std::max(m, std::abs(x));
  return m;
}

inline double max_asymmetry(const Matrix& a) {
  if (a.rows() != a.cols()) throw InvalidInputError("max_asymmetry: matrix not square");
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = i + 1; j < a.cols(); ++j) {
      m = std::max(m, std::abs(a(i, j) - a(j, i)));
    }
  }
  return m;
}

inline bool all_finite(const Matrix& a) {
  for (double x : a.data()) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

/// Frobenius inner product <A, B>.
inline double inner(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "inner");
  double s = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) s += a.data()[i] * b.data()[i];
  return s;
}

// --- small vector helpers -------------------------------------------------

using Vec = std::vector<double>;

inline Vec apply(const Matrix& a, const Vec& x) {
  if (a.cols() != x.size()) {
    throw InvalidInputError("apply: vector length " + std::to_string(x.size()) +
                            " does not match matrix cols " + std::to_string(a.cols()));
  }
  Vec y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

/// x^T M x for square M.
inline double quad_form(const Matrix& m, const Vec& x) {
  return dot(x, apply(m, x));
}

}  // namespace polyq
