#pragma once

// ============================================================================
// Problem data: discrete-time polytopic systems
//
//   x_{k+1} = A(xi_k) x_k + B u_k,   y_k = C x_k,
//   A(xi)   = sum_i xi_i * A_i,      xi_k in the unit simplex.
//
// The vertex list A_1..A_N, the shared input/output maps B and C, and the
// declared strictly-polytopic flag (the scheduling point ranges over the
// whole simplex, every vertex reachable) are the entire model. Schedules are
// explicit simplex-point sequences; the generator below produces seeded
// reproducible ones for simulation studies.
// ============================================================================

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "polyq/errors.hpp"
#include "polyq/matrix.hpp"

namespace polyq {

/// A point of the unit simplex: nonnegative weights summing to one.
/// Construction clamps components above -1e-12 to zero and insists the sum
/// stays within 1e-10 of one.
class SimplexPoint {
 public:
  explicit SimplexPoint(Vec weights) : xi_(std::move(weights)) {
    if (xi_.empty()) throw InvalidInputError("SimplexPoint: empty weight vector");
    double sum = 0.0;
    for (double& w : xi_) {
      if (!std::isfinite(w)) throw InvalidInputError("SimplexPoint: non-finite weight");
      if (w < 0.0) {
        if (w < -1e-12) {
          throw InvalidInputError("SimplexPoint: negative weight " + std::to_string(w));
        }
        w = 0.0;
      }
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-10) {
      throw InvalidInputError("SimplexPoint: weights sum to " + std::to_string(sum));
    }
  }

  static SimplexPoint vertex(std::size_t i, std::size_t n) {
    Vec w(n, 0.0);
    w.at(i) = 1.0;
    return SimplexPoint(std::move(w));
  }

  const Vec& weights() const { return xi_; }
  std::size_t size() const { return xi_.size(); }
  double operator[](std::size_t i) const { return xi_[i]; }

 private:
  Vec xi_;
};

using Schedule = std::vector<SimplexPoint>;

struct Violation {
  std::string field;
  std::string reason;
};

struct PolytopicSystem {
  std::string name;  ///< optional display name, may be empty
  bool strictly_polytopic = false;
  std::vector<Matrix> A;  ///< N square vertices, all n_x by n_x
  Matrix B;               ///< n_x by n_u
  Matrix C;               ///< n_y by n_x

  std::size_t vertex_count() const { return A.size(); }
  std::size_t n_x() const { return A.empty() ? 0 : A.front().rows(); }
  std::size_t n_u() const { return B.cols(); }
  std::size_t n_y() const { return C.rows(); }
};

/// Structural validation; an empty list means every invariant holds.
inline std::vector<Violation> validate(const PolytopicSystem& sys) {
  std::vector<Violation> out;
  if (sys.A.empty()) {
    out.push_back({"A", "at least one vertex matrix is required"});
    return out;
  }
  const std::size_t n = sys.A.front().rows();
  for (std::size_t i = 0; i < sys.A.size(); ++i) {
    const Matrix& a = sys.A[i];
    const std::string field = "A[" + std::to_string(i) + "]";
    if (a.rows() != a.cols()) {
      out.push_back({field, "vertex matrix is not square"});
    } else if (a.rows() != n) {
      out.push_back({field, "vertex dimension differs from A[0]"});
    }
    if (!all_finite(a)) out.push_back({field, "non-finite entries"});
  }
  if (sys.B.empty()) {
    out.push_back({"B", "missing input matrix"});
  } else {
    if (sys.B.rows() != n) out.push_back({"B", "row count does not match the state dimension"});
    if (!all_finite(sys.B)) out.push_back({"B", "non-finite entries"});
  }
  if (sys.C.empty()) {
    out.push_back({"C", "missing output matrix"});
  } else {
    if (sys.C.cols() != n) out.push_back({"C", "column count does not match the state dimension"});
    if (!all_finite(sys.C)) out.push_back({"C", "non-finite entries"});
  }
  return out;
}

inline void require_valid(const PolytopicSystem& sys) {
  const auto v = validate(sys);
  if (!v.empty()) {
    throw InvalidInputError("invalid system: " + v.front().field + ": " + v.front().reason);
  }
}

/// A(xi) = sum_i xi_i A_i. Zero weights are skipped so vertex points return
/// the vertex matrix bit-exactly.
inline Matrix evaluate_A(const PolytopicSystem& sys, const SimplexPoint& xi) {
  if (xi.size() != sys.vertex_count()) {
    throw InvalidInputError("evaluate_A: simplex point has " + std::to_string(xi.size()) +
                            " weights for " + std::to_string(sys.vertex_count()) + " vertices");
  }
  std::optional<Matrix> acc;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    const double w = xi[i];
    if (w == 0.0) continue;
    if (!acc) {
      acc = (w == 1.0) ? sys.A[i] : w * sys.A[i];
    } else {
      *acc = *acc + w * sys.A[i];
    }
  }
  if (!acc) throw InvalidInputError("evaluate_A: all weights are zero");
  return *acc;
}

enum class ScheduleMode { VertexSwitching, InteriorDirichlet };

/// Length T+1 sequence of simplex points, deterministic in (N, T, mode, seed).
/// VertexSwitching draws vertices uniformly; InteriorDirichlet draws strictly
/// interior points via normalised unit-exponential variables (Dirichlet(1,..,1)).
inline Schedule random_schedule(std::size_t N, std::size_t T, ScheduleMode mode,
                                std::uint64_t seed) {
  if (N == 0) throw InvalidInputError("random_schedule: N must be positive");
  std::mt19937_64 rng(seed);
  // hand-rolled uniform in (0,1): identical values on every standard library
  const auto unit = [&rng]() { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; };
  Schedule sched;
  sched.reserve(T + 1);
  for (std::size_t k = 0; k <= T; ++k) {
    if (N == 1) {
      sched.push_back(SimplexPoint(Vec{1.0}));
    } else if (mode == ScheduleMode::VertexSwitching) {
      sched.push_back(SimplexPoint::vertex(static_cast<std::size_t>(rng() % N), N));
    } else {
      Vec w(N);
      double sum = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        w[i] = -std::log(unit());  // Exp(1), strictly positive
        sum += w[i];
      }
      for (double& x : w) x /= sum;
      sched.push_back(SimplexPoint(std::move(w)));
    }
  }
  return sched;
}

}  // namespace polyq
