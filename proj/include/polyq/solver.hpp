#pragma once

// ============================================================================
// Strict-feasibility engine.
//
// The solver maximizes the concave, piecewise-smooth margin function
//
//   t(x) = min over constraints c of lambda_min(F_c(x))
//
// over the per-block Frobenius ball ||X_b||_F <= R, by projected
// supergradient ascent with Polyak-style steps (level = best + slack, slack
// halved on sustained non-improvement) and seeded Gaussian restarts.
// Feasible means a point with t(x) >= target_margin was found *and* an
// independent re-evaluation confirms at least half that margin.
//
// When the ball search fails, a second, scale-pinned pass maximizes t over
// the joint unit Frobenius sphere. Positive-definiteness constraints have no
// constant part, so t's supremum over the ball is >= 0 for every problem
// (approach the origin); the sphere value is the meaningful, scale-free
// infeasibility measure and is reported as `normalized_margin`. A negative
// sphere optimum yields status MarginNegative — a numerical judgment, not a
// proof. Anything else inconclusive is Stalled.
// ============================================================================

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "polyq/eig.hpp"
#include "polyq/errors.hpp"
#include "polyq/lmi.hpp"
#include "polyq/matrix.hpp"

namespace polyq {

enum class SolveStatus { Feasible, MarginNegative, Stalled };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Feasible: return "Feasible";
    case SolveStatus::MarginNegative: return "MarginNegative";
    default: return "Stalled";
  }
}

struct SolverConfig {
  double target_margin = 1e-6;   ///< epsilon: accept once t(x) reaches this
  double radius = 1e3;           ///< Frobenius ball bound per decision block
  std::size_t max_iters = 20000; ///< global phase-1 iteration budget
  std::size_t stagnation_window = 500;
  double stagnation_tol = 1e-10;
  std::uint64_t seed = 1;        ///< drives restart perturbations only
  std::size_t max_restarts = 4;  ///< extra ball episodes after the first
  std::size_t polish_iters = 800;  ///< extra ascent after the target is crossed
  std::size_t sphere_iters = 1500; ///< phase-2 budget per start
  std::size_t sphere_starts = 4;   ///< seeded phase-2 starts beyond +/-identity

  void validate() const {
    if (!(target_margin > 0.0)) throw InvalidInputError("target_margin must be positive");
    if (!(radius > 0.0)) throw InvalidInputError("radius must be positive");
    if (max_iters == 0) throw InvalidInputError("max_iters must be at least 1");
    if (stagnation_window == 0) throw InvalidInputError("stagnation_window must be at least 1");
  }
};

struct Subgradient {
  double value = 0.0;          ///< t(x)
  std::size_t active_index = 0;
  std::string active_label;
  Assignment direction;        ///< supergradient, symmetrized on symmetric blocks
};

struct SolveOutcome {
  SolveStatus status = SolveStatus::Stalled;
  Assignment assignment;       ///< best point found
  double achieved_margin = -std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;  ///< phase-1 evaluations used
  std::size_t restarts = 0;    ///< ball episodes beyond the first
  double target_margin = 1e-6; ///< copied from the config (reverify contract)
  std::vector<double> best_history;  ///< best-so-far per phase-1 iteration
  std::optional<double> normalized_margin;  ///< unit-sphere best, when phase 2 ran
};

namespace solverimpl {

inline double unit_uniform(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline double gaussian(std::mt19937_64& rng) {
  // Box-Muller; hand-rolled so streams are identical across standard libraries.
  const double u = unit_uniform(rng);
  const double v = unit_uniform(rng);
  return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * 3.141592653589793238462643383279502884 * v);
}

inline Matrix outer(const Vec& u, const Vec& w) {
  Matrix m(u.size(), w.size(), 0.0);
  for (std::size_t i = 0; i < u.size(); ++i) {
    for (std::size_t j = 0; j < w.size(); ++j) m(i, j) = u[i] * w[j];
  }
  return m;
}

inline double joint_norm(const Assignment& x) {
  double s = 0.0;
  for (const Matrix& m : x) {
    const double f = frobenius_norm(m);
    s += f * f;
  }
  return std::sqrt(s);
}

inline double joint_inner(const Assignment& a, const Assignment& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += inner(a[i], b[i]);
  return s;
}

inline void add_scaled(Assignment& x, double a, const Assignment& d) {
  for (std::size_t b = 0; b < x.size(); ++b) x[b] = x[b] + a * d[b];
}

inline void scale(Assignment& x, double a) {
  for (Matrix& m : x) m = a * m;
}

inline void project_ball(Assignment& x, double radius) {
  for (Matrix& m : x) {
    const double f = frobenius_norm(m);
    if (f > radius) m = (radius / f) * m;
  }
}

inline void normalize_joint(Assignment& x) {
  const double n = joint_norm(x);
  if (n > 0.0) scale(x, 1.0 / n);
}

inline Assignment perturbed_start(const LmiProblem& prob, std::mt19937_64& rng, double scale_) {
  Assignment x = identity_assignment(prob);
  for (std::size_t b = 0; b < x.size(); ++b) {
    Matrix noise(x[b].rows(), x[b].cols(), 0.0);
    for (std::size_t r = 0; r < noise.rows(); ++r) {
      for (std::size_t c = 0; c < noise.cols(); ++c) noise(r, c) = scale_ * gaussian(rng);
    }
    if (prob.blocks[b].kind == BlockKind::Symmetric) noise = sym_part(noise);
    x[b] = x[b] + noise;
  }
  return x;
}

inline Assignment gaussian_direction(const LmiProblem& prob, std::mt19937_64& rng) {
  Assignment x;
  for (const DecisionBlock& b : prob.blocks) {
    Matrix m(b.rows, b.cols, 0.0);
    for (std::size_t r = 0; r < b.rows; ++r) {
      for (std::size_t c = 0; c < b.cols; ++c) m(r, c) = gaussian(rng);
    }
    if (b.kind == BlockKind::Symmetric) m = sym_part(m);
    x.push_back(std::move(m));
  }
  return x;
}

}  // namespace solverimpl

/// Margin value and a supergradient of t at the given assignment. The active
/// constraint is the minimizing one; ties within 1e-12 resolve to the lowest
/// constraint index so runs are deterministic.
inline Subgradient subgradient(const LmiProblem& prob, const Assignment& x) {
  require_assignment(prob, x);
  if (prob.constraints.empty()) throw InvalidInputError("problem has no constraints");

  std::vector<double> margins(prob.constraints.size());
  double tmin = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < prob.constraints.size(); ++c) {
    margins[c] = min_eigenvalue(SymMatrix(assemble_constraint(prob, c, x)));
    tmin = std::min(tmin, margins[c]);
  }
  std::size_t active = 0;
  while (margins[active] > tmin + 1e-12) ++active;

  const EigResult eig = sym_eig(SymMatrix(assemble_constraint(prob, active, x)));
  Vec v(eig.eigenvectors.rows());
  for (std::size_t r = 0; r < v.size(); ++r) v[r] = eig.eigenvectors(r, 0);

  Subgradient sg;
  sg.value = tmin;
  sg.active_index = active;
  sg.active_label = prob.constraints[active].label;
  for (const DecisionBlock& b : prob.blocks) sg.direction.push_back(Matrix::zeros(b.rows, b.cols));
  for (const ConstraintTerm& t : prob.constraints[active].terms) {
    const Vec lv = polyq::apply(transpose(t.left), v);
    const Vec rv = polyq::apply(transpose(t.right), v);
    // d/dX <vv^T, L X R^T> = L^T v v^T R; transposed blocks get the transpose.
    const Matrix g = t.transpose_block ? solverimpl::outer(rv, lv) : solverimpl::outer(lv, rv);
    sg.direction[t.block] = sg.direction[t.block] + t.sign * g;
  }
  for (std::size_t b = 0; b < sg.direction.size(); ++b) {
    if (prob.blocks[b].kind == BlockKind::Symmetric) sg.direction[b] = sym_part(sg.direction[b]);
  }
  return sg;
}

/// Independent double-check: true iff a fresh evaluation of every constraint
/// at the outcome's assignment clears half the target margin.
inline bool reverify(const LmiProblem& prob, const SolveOutcome& outcome) {
  if (outcome.assignment.size() != prob.blocks.size()) return false;
  const auto margins = evaluate_constraints(prob, outcome.assignment);
  return min_constraint_value(margins) >= outcome.target_margin / 2.0;
}

inline SolveOutcome solve(const LmiProblem& prob, SolverConfig cfg = {}) {
  cfg.validate();
  if (prob.constraints.empty() || prob.blocks.empty()) {
    throw InvalidInputError("cannot solve an empty problem");
  }

  std::mt19937_64 rng(cfg.seed);
  SolveOutcome out;
  out.target_margin = cfg.target_margin;

  const double eps = cfg.target_margin;
  double best = -std::numeric_limits<double>::infinity();
  Assignment best_x = identity_assignment(prob);
  solverimpl::project_ball(best_x, cfg.radius);

  // ---- Phase 1: ascent over the Frobenius ball -----------------------------
  std::size_t global_iter = 0;
  std::size_t episodes_started = 0;
  bool crossed = false;
  std::size_t polish_left = cfg.polish_iters;
  bool budget_exhausted = false;

  for (std::size_t ep = 0; ep <= cfg.max_restarts && !budget_exhausted; ++ep) {
    if (crossed && polish_left == 0) break;
    ++episodes_started;
    Assignment x = (ep == 0) ? identity_assignment(prob)
                             : solverimpl::perturbed_start(prob, rng, 0.1 * cfg.radius);
    solverimpl::project_ball(x, cfg.radius);

    double delta = std::numeric_limits<double>::quiet_NaN();
    double episode_best = -std::numeric_limits<double>::infinity();
    std::size_t nonimprove = 0;
    std::size_t ep_iter = 0;
    double window_baseline = -std::numeric_limits<double>::infinity();

    while (true) {
      if (global_iter >= cfg.max_iters) {
        budget_exhausted = true;
        break;
      }
      Subgradient sg;
      try {
        sg = subgradient(prob, x);
      } catch (const NumericalFailureError& e) {
        throw NumericalFailureError(std::string(e.what()) + " (solver iteration " +
                                    std::to_string(global_iter) + ")");
      }
      ++global_iter;
      ++ep_iter;
      const double t = sg.value;
      if (std::isnan(delta)) delta = 0.5 * std::max(1.0, std::abs(t));

      if (t > best) {
        best = t;
        best_x = x;
      }
      out.best_history.push_back(best);

      if (!crossed && best >= eps) crossed = true;
      if (crossed) {
        if (polish_left == 0) break;
        --polish_left;
      }

      if (t > episode_best) {
        episode_best = t;
        nonimprove = 0;
      } else {
        ++nonimprove;
      }
      if (nonimprove >= 40) {
        delta *= 0.5;
        nonimprove = 0;
      }
      if (delta < 1e-12) break;

      if (ep_iter % cfg.stagnation_window == 0) {
        if (best - window_baseline < cfg.stagnation_tol) break;
        window_baseline = best;
      }

      double gn2 = 0.0;
      for (const Matrix& g : sg.direction) {
        const double f = frobenius_norm(g);
        gn2 += f * f;
      }
      if (gn2 < 1e-300) break;

      const double level = std::max(best, t) + delta;
      const double alpha = (level - t) / gn2;
      solverimpl::add_scaled(x, alpha, sg.direction);
      solverimpl::project_ball(x, cfg.radius);
    }
  }

  out.iterations = global_iter;
  out.restarts = episodes_started > 0 ? episodes_started - 1 : 0;
  out.assignment = best_x;
  out.achieved_margin = best;

  if (best >= eps) {
    out.status = reverify(prob, out) ? SolveStatus::Feasible : SolveStatus::Stalled;
    return out;
  }

  // ---- Phase 2: scale-pinned ascent over the joint unit sphere -------------
  Assignment id_start = identity_assignment(prob);
  solverimpl::normalize_joint(id_start);
  std::vector<Assignment> starts;
  starts.push_back(id_start);
  Assignment neg = id_start;
  solverimpl::scale(neg, -1.0);
  starts.push_back(std::move(neg));
  for (std::size_t s = 0; s < cfg.sphere_starts; ++s) {
    Assignment g = solverimpl::gaussian_direction(prob, rng);
    solverimpl::normalize_joint(g);
    if (solverimpl::joint_norm(g) == 0.0) continue;
    starts.push_back(std::move(g));
  }

  double sphere_best = -std::numeric_limits<double>::infinity();
  Assignment sphere_x = id_start;
  for (const Assignment& start : starts) {
    Assignment x = start;
    double start_best = -std::numeric_limits<double>::infinity();
    double delta = std::numeric_limits<double>::quiet_NaN();
    std::size_t nonimprove = 0;
    for (std::size_t it = 0; it < cfg.sphere_iters; ++it) {
      const Subgradient sg = subgradient(prob, x);
      const double t = sg.value;
      if (std::isnan(delta)) delta = 0.5 * std::max(1.0, std::abs(t));
      if (t > sphere_best) {
        sphere_best = t;
        sphere_x = x;
      }
      if (t > start_best) {
        start_best = t;
        nonimprove = 0;
      } else {
        ++nonimprove;
      }
      if (nonimprove >= 40) {
        delta *= 0.5;
        nonimprove = 0;
      }
      if (delta < 1e-12) break;

      // Tangent step keeps the iterate on the sphere.
      Assignment tangent = sg.direction;
      const double radial = solverimpl::joint_inner(sg.direction, x);
      solverimpl::add_scaled(tangent, -radial, x);
      const double gn = solverimpl::joint_norm(tangent);
      if (gn < 1e-150) break;
      const double alpha = (start_best + delta - t) / (gn * gn);
      solverimpl::add_scaled(x, alpha, tangent);
      solverimpl::normalize_joint(x);
    }
  }

  out.normalized_margin = sphere_best;
  if (sphere_best >= eps) {
    // The sphere point itself is feasible; accept it.
    out.assignment = sphere_x;
    out.achieved_margin = sphere_best;
    out.status = reverify(prob, out) ? SolveStatus::Feasible : SolveStatus::Stalled;
  } else if (sphere_best < 0.0) {
    out.status = SolveStatus::MarginNegative;
    out.achieved_margin = sphere_best;  // scale-free judgment; ball best drifts to 0
    out.assignment = sphere_x;
  } else {
    out.status = SolveStatus::Stalled;
  }
  return out;
}

}  // namespace polyq
