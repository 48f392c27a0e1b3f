#pragma once

// ============================================================================
// Independent verification layer.
//
// Everything here re-derives its answers from the raw certificate blocks and
// the system data, deliberately not trusting the solver's own margin report:
//
//   * check_detect_certificate re-evaluates every detectability constraint
//     (P_i > 0 and P_i - A_i^T P_j A_i + C^T C > 0) directly from the blocks
//     and returns the full labelled margin list.
//
//   * grid_check_stab samples the parameter-dependent stabilizability
//     condition  S(xi+) - A(xi) S(xi) A(xi)^T + B B^T > 0  on a simplex grid,
//     with S(xi) = (sum_i xi_i S_i^{-1})^{-1} (harmonic interpolation: the
//     certificate stores S_i = P_i^{-1}, and it is P that is affine in xi).
//     The condition is semi-infinite and S(xi) non-affine, so no finite
//     vertex test is equivalent; a passing grid is evidence, not proof, and
//     the result says so via `pass` plus the sampled worst pair.
//
//   * simulate_error_system / simulate_closed_loop run the actual closed
//     loops and monitor the certified Lyapunov function V(xi, x) at every
//     step. A step is flagged when V fails the relative descent band
//     V_next <= V * (1 - 1e-12) while ||x|| > 1e-9; below that norm the
//     state is treated as numerically converged (near zero, V itself sits in
//     rounding noise and an absolute band would false-flag convergence).
//     A state norm above 1e12 aborts the trajectory and records it as a
//     violation (divergence cutoff).
//
//   * verdict_detect / verdict_stab run the decision ladders. Detectability:
//     a feasible certificate means Holds; an exhausted search on a strictly
//     polytopic system means FailsNecessary, because there the conditions
//     are necessary as well — with the numerical caveat recorded, since a
//     subgradient search can stall on feasible problems. Stabilizability:
//     the slack test is sufficient, the vertex test only necessary, and no
//     known proof closes the gap between them, so a system passing the
//     vertex test but not the slack test is reported Unknown on purpose.
//     FailsNecessary is never emitted unless `strictly_polytopic` is set,
//     and never from the slack test alone. Negative verdicts carry the
//     solver's best margin and budget so users can rerun with more effort.
// ============================================================================

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "polyq/eig.hpp"
#include "polyq/errors.hpp"
#include "polyq/lmi.hpp"
#include "polyq/matrix.hpp"
#include "polyq/solver.hpp"
#include "polyq/synthesis.hpp"
#include "polyq/system.hpp"

namespace polyq {

// --- simplex grids ----------------------------------------------------------

/// Uniform simplex grid: all points whose coordinates are k/m with the k
/// summing to m. Ordered pairs of grid points discretize the
/// parameter-dependent condition's "for all (xi, xi+)" quantifier.
struct GridSpec {
  std::size_t m = 20;  ///< resolution; grid size is C(m+N-1, N-1) per simplex
};

inline void require_valid(const GridSpec& g) {
  if (g.m < 1) throw InvalidInputError("GridSpec: resolution m must be >= 1");
}

/// C(m+N-1, N-1), the number of grid points for resolution m in N vertices.
inline std::size_t simplex_grid_size(std::size_t N, std::size_t m) {
  if (N == 0) throw InvalidInputError("simplex_grid_size: N must be positive");
  std::size_t count = 1;
  for (std::size_t i = 1; i < N; ++i) {  // product over (m+i)/i
    count = count * (m + i) / i;         // exact: prefix products are binomials
  }
  return count;
}

/// All grid points, lexicographically ascending in the leading counts
/// (k_1, ..., k_{N-1}); the last coordinate takes the remainder. For N=2 the
/// enumeration therefore starts at (0, m) = e_2 and ends at e_1. Vertex
/// points carry an exact 1.0 weight so downstream vertex shortcuts fire.
inline std::vector<SimplexPoint> simplex_grid(std::size_t N, std::size_t m) {
  if (N == 0) throw InvalidInputError("simplex_grid: N must be positive");
  if (m < 1) throw InvalidInputError("simplex_grid: resolution m must be >= 1");
  std::vector<SimplexPoint> pts;
  pts.reserve(simplex_grid_size(N, m));
  std::vector<std::size_t> counts(N, 0);
  const std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t pos,
                                                                std::size_t left) {
    if (pos + 1 == N) {
      counts[pos] = left;
      Vec w(N);
      for (std::size_t i = 0; i < N; ++i) {
        w[i] = static_cast<double>(counts[i]) / static_cast<double>(m);
      }
      pts.push_back(SimplexPoint(std::move(w)));
      return;
    }
    for (std::size_t c = 0; c <= left; ++c) {
      counts[pos] = c;
      rec(pos + 1, left - c);
    }
  };
  rec(0, m);
  return pts;
}

namespace verifyimpl {

/// S(xi) from precomputed P_i = S_i^{-1}; exact block at vertices.
inline Matrix harmonic_S(const std::vector<Matrix>& S_bar, const std::vector<Matrix>& P_bar,
                         const SimplexPoint& xi) {
  for (std::size_t i = 0; i < xi.size(); ++i) {
    if (xi[i] == 1.0) return S_bar[i];
  }
  Matrix p = Matrix::zeros(S_bar.front().rows(), S_bar.front().cols());
  for (std::size_t i = 0; i < xi.size(); ++i) {
    const double w = xi[i];
    if (w == 0.0) continue;
    p = p + w * P_bar[i];
  }
  return inverse_spd(SymMatrix(p));
}

}  // namespace verifyimpl

/// Harmonic interpolation S(xi) = (sum_i xi_i S_i^{-1})^{-1} of a
/// stabilizability certificate's blocks.
inline Matrix evaluate_S(const StabCertificate& cert, const PolytopicSystem& sys,
                         const SimplexPoint& xi) {
  require_valid(cert, sys);
  if (xi.size() != sys.vertex_count()) {
    throw InvalidInputError("evaluate_S: simplex point size does not match vertex count");
  }
  return verifyimpl::harmonic_S(cert.S_bar, inverted_blocks(cert), xi);
}

// --- certificate eigen-checks -------------------------------------------------

/// Labelled eigenvalue margins of every certificate condition.
struct CertificateCheck {
  std::vector<std::pair<std::string, double>> margins;  ///< label -> lambda_min
  double min_margin = 0.0;
  double eps = 0.0;
  bool pass = false;  ///< min_margin >= eps
};

/// Re-evaluates all N^2 + N detectability constraints directly from the
/// blocks (labels match the solver's constraint labels). The blocks are only
/// required to be well-shaped, not positive definite — positivity is exactly
/// what is being checked, so a violating certificate yields failing margins
/// rather than an exception.
inline CertificateCheck check_detect_certificate(const PolytopicSystem& sys,
                                                 const DetectCertificate& cert, double eps) {
  require_valid(sys);
  if (cert.P_bar.size() != sys.vertex_count()) {
    throw InvalidInputError("detect certificate: expected " +
                            std::to_string(sys.vertex_count()) + " blocks, got " +
                            std::to_string(cert.P_bar.size()));
  }
  synthimpl::require_square_blocks(cert.P_bar, sys.n_x(), "detect certificate");
  const std::size_t N = sys.vertex_count();
  const Matrix ctc = transpose(sys.C) * sys.C;
  CertificateCheck out;
  out.eps = eps;
  for (std::size_t i = 0; i < N; ++i) {
    out.margins.emplace_back("pd[i=" + std::to_string(i + 1) + "]",
                             min_eigenvalue(SymMatrix(cert.P_bar[i])));
  }
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = 0; j < N; ++j) {
      const Matrix f =
          cert.P_bar[i] - transpose(sys.A[i]) * cert.P_bar[j] * sys.A[i] + ctc;
      out.margins.emplace_back(
          "det[i=" + std::to_string(i + 1) + ",j=" + std::to_string(j + 1) + "]",
          min_eigenvalue(SymMatrix(f)));
    }
  }
  out.min_margin = out.margins.front().second;
  for (const auto& [label, value] : out.margins) {
    out.min_margin = std::min(out.min_margin, value);
  }
  out.pass = out.min_margin >= eps;
  return out;
}

// --- grid check of the parameter-dependent condition --------------------------

struct GridCheckResult {
  std::size_t m;            ///< resolution used
  std::size_t point_count;  ///< grid points per simplex
  std::size_t pair_count;   ///< ordered pairs evaluated
  SimplexPoint worst_xi;    ///< current parameter of the minimizing pair
  SimplexPoint worst_xi_next;
  double worst_value;       ///< smallest lambda_min over all pairs
  double eps;
  bool pass;                ///< worst_value >= eps — evidence, not proof
};

/// Evaluates S(xi+) - A(xi) S(xi) A(xi)^T + B B^T over every ordered grid
/// pair and returns the minimizing pair. Ties keep the first pair in grid
/// order (xi outer, xi+ inner; strict improvement to switch).
inline GridCheckResult grid_check_stab(const PolytopicSystem& sys, const StabCertificate& cert,
                                       const GridSpec& grid, double eps) {
  require_valid(cert, sys);
  require_valid(grid);
  const std::vector<SimplexPoint> pts = simplex_grid(sys.vertex_count(), grid.m);
  const std::vector<Matrix> p_bar = inverted_blocks(cert);
  std::vector<Matrix> a_at;
  std::vector<Matrix> s_at;
  a_at.reserve(pts.size());
  s_at.reserve(pts.size());
  for (const SimplexPoint& xi : pts) {
    a_at.push_back(evaluate_A(sys, xi));
    s_at.push_back(verifyimpl::harmonic_S(cert.S_bar, p_bar, xi));
  }
  const Matrix bbt = sys.B * transpose(sys.B);
  double best = std::numeric_limits<double>::infinity();
  std::size_t bi = 0;
  std::size_t bj = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Matrix asa = a_at[i] * s_at[i] * transpose(a_at[i]);
    for (std::size_t j = 0; j < pts.size(); ++j) {
      const double v = min_eigenvalue(SymMatrix(s_at[j] - asa + bbt));
      if (v < best) {
        best = v;
        bi = i;
        bj = j;
      }
    }
  }
  return GridCheckResult{grid.m,  pts.size(), pts.size() * pts.size(), pts[bi], pts[bj],
                         best,    eps,        best >= eps};
}

// --- Lyapunov-monitored simulation --------------------------------------------

struct DescentViolation {
  std::size_t trajectory = 0;
  std::size_t step = 0;  ///< transition step -> step+1
  double V_before = 0.0;
  double V_after = 0.0;
};

struct SimReport {
  std::size_t trajectories = 0;
  std::size_t steps = 0;  ///< planned steps per trajectory
  std::size_t aborted = 0;  ///< trajectories cut off by the divergence guard
  double worst_ratio = 0.0;  ///< max V_next/V over monitored steps (0 if none)
  double max_terminal_norm = 0.0;
  /// min (V - V_next)/||x||^2 over monitored steps: the empirical one-step
  /// decrease rate (NaN when no step had ||x|| above the band threshold).
  double a3_estimate = std::numeric_limits<double>::quiet_NaN();
  std::vector<DescentViolation> violations;
};

struct Trajectory {
  std::vector<Vec> states;  ///< length (actual steps)+1; short when aborted
  Vec lyapunov;             ///< V(xi_k, x_k), same length as states
  bool aborted = false;
};

struct SimRun {
  SimReport report;
  Trajectory trajectory;
};

namespace verifyimpl {

constexpr double kDescentBand = 1e-12;   ///< relative Lyapunov decrease band
constexpr double kStateFloor = 1e-9;     ///< below this norm: converged
constexpr double kDivergenceCutoff = 1e12;

inline void require_state(const Vec& x, std::size_t n, const char* what) {
  if (x.size() != n) {
    throw InvalidInputError(std::string(what) + ": state has " + std::to_string(x.size()) +
                            " entries for state dimension " + std::to_string(n));
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw InvalidInputError(std::string(what) + ": non-finite entry");
  }
}

inline void require_schedule(const Schedule& sched, std::size_t N, const char* what) {
  if (sched.size() < 2) {
    throw InvalidInputError(std::string(what) + ": schedule needs at least 2 points (got " +
                            std::to_string(sched.size()) + ")");
  }
  for (const SimplexPoint& xi : sched) {
    if (xi.size() != N) {
      throw InvalidInputError(std::string(what) + ": schedule point has " +
                              std::to_string(xi.size()) + " weights for " + std::to_string(N) +
                              " vertices");
    }
  }
}

/// Shared stepping loop: x_next = step_matrix(k) * x with V monitoring.
template <typename StepMatrixFn>
inline SimRun run_monitored(const std::vector<Matrix>& P_bar, const Schedule& sched,
                            const Vec& x0, StepMatrixFn&& step_matrix,
                            std::size_t trajectory_index) {
  const std::size_t steps = sched.size() - 1;
  SimRun run;
  run.report.trajectories = 1;
  run.report.steps = steps;
  run.trajectory.states.reserve(steps + 1);
  run.trajectory.lyapunov.reserve(steps + 1);
  run.trajectory.states.push_back(x0);
  run.trajectory.lyapunov.push_back(lyapunov_value(P_bar, sched[0], x0));
  Vec x = x0;
  for (std::size_t k = 0; k < steps; ++k) {
    const Matrix m = step_matrix(k);
    Vec x_next = polyq::apply(m, x);  // qualified: ADL would also see std::apply
    const double v_before = run.trajectory.lyapunov.back();
    const double v_after = lyapunov_value(P_bar, sched[k + 1], x_next);
    run.trajectory.states.push_back(x_next);
    run.trajectory.lyapunov.push_back(v_after);
    const double nx = norm2(x);
    bool flagged = false;
    if (nx > kStateFloor) {
      const double ratio = v_after / v_before;
      run.report.worst_ratio = std::max(run.report.worst_ratio, ratio);
      const double decrease = (v_before - v_after) / (nx * nx);
      if (std::isnan(run.report.a3_estimate)) {
        run.report.a3_estimate = decrease;
      } else {
        run.report.a3_estimate = std::min(run.report.a3_estimate, decrease);
      }
      if (v_after > v_before * (1.0 - kDescentBand)) {
        run.report.violations.push_back({trajectory_index, k, v_before, v_after});
        flagged = true;
      }
    }
    if (norm2(x_next) > kDivergenceCutoff) {
      run.trajectory.aborted = true;
      run.report.aborted = 1;
      if (!flagged) {
        run.report.violations.push_back({trajectory_index, k, v_before, v_after});
      }
      break;
    }
    x = std::move(x_next);
  }
  run.report.max_terminal_norm = norm2(run.trajectory.states.back());
  return run;
}

}  // namespace verifyimpl

/// Observer error recursion e_next = (A(xi_k) + L(xi_k) C) e_k, with
/// V(xi_k, e_k) monitored against the certificate's blocks.
inline SimRun simulate_error_system(const PolytopicSystem& sys, const DetectCertificate& cert,
                                    const ObserverGains& gains, const Schedule& sched,
                                    const Vec& e0) {
  require_valid(cert, sys);
  verifyimpl::require_schedule(sched, sys.vertex_count(), "simulate_error_system");
  verifyimpl::require_state(e0, sys.n_x(), "simulate_error_system");
  if (gains.L.size() != sys.vertex_count()) {
    throw InvalidInputError("simulate_error_system: gain count does not match vertex count");
  }
  for (const Matrix& l : gains.L) {
    if (l.rows() != sys.n_x() || l.cols() != sys.n_y()) {
      throw InvalidInputError("simulate_error_system: gain shape does not match the system");
    }
  }
  return verifyimpl::run_monitored(
      cert.P_bar, sched, e0,
      [&](std::size_t k) {
        return evaluate_A(sys, sched[k]) + evaluate_gain(gains, sched[k]) * sys.C;
      },
      0);
}

/// Closed-loop recursion x_next = (A(xi_k) + B K(xi_k, xi_{k+1})) x_k with
/// V monitored in the inverted blocks P_i = S_i^{-1}. The schedule supplies
/// xi_{k+1} for every step (the gain previews the next parameter).
inline SimRun simulate_closed_loop(const PolytopicSystem& sys, const StabCertificate& cert,
                                   const Schedule& sched, const Vec& x0) {
  require_valid(cert, sys);
  verifyimpl::require_schedule(sched, sys.vertex_count(), "simulate_closed_loop");
  verifyimpl::require_state(x0, sys.n_x(), "simulate_closed_loop");
  const std::vector<Matrix> p_bar = inverted_blocks(cert);
  return verifyimpl::run_monitored(
      p_bar, sched, x0,
      [&](std::size_t k) {
        const Matrix gain =
            synthimpl::controller_gain_core(cert, sys, sched[k], sched[k + 1], nullptr);
        return evaluate_A(sys, sched[k]) + sys.B * gain;
      },
      0);
}

// --- Monte-Carlo batches -------------------------------------------------------

struct MonteCarloConfig {
  std::size_t trajectories = 1000;
  std::size_t steps = 100;
  ScheduleMode mode = ScheduleMode::VertexSwitching;
  std::uint64_t seed = 1;
  double initial_scale = 1.0;  ///< components drawn uniformly from [-scale, scale]

  void validate() const {
    if (trajectories < 1) throw InvalidInputError("MonteCarloConfig: trajectories must be >= 1");
    if (steps < 1) throw InvalidInputError("MonteCarloConfig: steps must be >= 1");
    if (!(std::isfinite(initial_scale)) || initial_scale <= 0.0) {
      throw InvalidInputError("MonteCarloConfig: initial_scale must be positive");
    }
  }
};

namespace verifyimpl {

inline Vec random_state(std::size_t n, std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  const auto unit = [&rng]() { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; };
  Vec x(n);
  for (double& v : x) v = scale * (2.0 * unit() - 1.0);
  return x;
}

inline std::uint64_t state_seed(std::uint64_t seed, std::size_t t) {
  return seed ^ (0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(t) + 1));
}

inline void merge_into(SimReport& total, const SimRun& run, std::size_t t) {
  total.aborted += run.report.aborted;
  total.worst_ratio = std::max(total.worst_ratio, run.report.worst_ratio);
  total.max_terminal_norm = std::max(total.max_terminal_norm, run.report.max_terminal_norm);
  if (!std::isnan(run.report.a3_estimate)) {
    total.a3_estimate = std::isnan(total.a3_estimate)
                            ? run.report.a3_estimate
                            : std::min(total.a3_estimate, run.report.a3_estimate);
  }
  for (DescentViolation v : run.report.violations) {
    v.trajectory = t;
    total.violations.push_back(v);
  }
}

}  // namespace verifyimpl

/// Batch of seeded random error-system trajectories; per-trajectory schedule
/// seed is cfg.seed + index, so runs are reproducible and extendable.
inline SimReport monte_carlo_error(const PolytopicSystem& sys, const DetectCertificate& cert,
                                   const ObserverGains& gains, const MonteCarloConfig& cfg) {
  cfg.validate();
  SimReport total;
  total.trajectories = cfg.trajectories;
  total.steps = cfg.steps;
  for (std::size_t t = 0; t < cfg.trajectories; ++t) {
    const Schedule sched =
        random_schedule(sys.vertex_count(), cfg.steps, cfg.mode, cfg.seed + t);
    const Vec e0 = verifyimpl::random_state(sys.n_x(), verifyimpl::state_seed(cfg.seed, t),
                                            cfg.initial_scale);
    verifyimpl::merge_into(total, simulate_error_system(sys, cert, gains, sched, e0), t);
  }
  return total;
}

/// Batch of seeded random closed-loop trajectories (same seeding scheme).
inline SimReport monte_carlo_closed_loop(const PolytopicSystem& sys, const StabCertificate& cert,
                                         const MonteCarloConfig& cfg) {
  cfg.validate();
  SimReport total;
  total.trajectories = cfg.trajectories;
  total.steps = cfg.steps;
  for (std::size_t t = 0; t < cfg.trajectories; ++t) {
    const Schedule sched =
        random_schedule(sys.vertex_count(), cfg.steps, cfg.mode, cfg.seed + t);
    const Vec x0 = verifyimpl::random_state(sys.n_x(), verifyimpl::state_seed(cfg.seed, t),
                                            cfg.initial_scale);
    verifyimpl::merge_into(total, simulate_closed_loop(sys, cert, sched, x0), t);
  }
  return total;
}

/// Lyapunov function summary with the empirical decrease rate filled in from
/// a simulation report (the decrease constant has no closed form; we report
/// the observed worst case instead of inventing one).
inline PolyQLF polyqlf_with_a3(const std::vector<Matrix>& P_bar, const SimReport& report) {
  PolyQLF f = make_polyqlf(P_bar);
  f.a3 = report.a3_estimate;
  return f;
}

// --- verdict ladders -----------------------------------------------------------

enum class VerdictStatus { Holds, FailsNecessary, Unknown };

inline const char* to_string(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::Holds: return "Holds";
    case VerdictStatus::FailsNecessary: return "FailsNecessary";
    default: return "Unknown";
  }
}

enum class StabMethod { Auto, Slack, Vertex };

inline const char* to_string(StabMethod m) {
  switch (m) {
    case StabMethod::Slack: return "slack";
    case StabMethod::Vertex: return "vertex";
    default: return "auto";
  }
}

struct AnalysisOptions {
  SolverConfig solver;
  StabMethod method = StabMethod::Auto;  ///< stabilizability only
  bool common_block = false;  ///< single shared Lyapunov block (detect/vertex tests)
};

struct SolveAttempt {
  std::string which;  ///< "detect", "slack", "vertex" (+"-common" when shared)
  SolveDiagnostics diag;
};

struct Verdict {
  std::string property;  ///< "detectability" | "stabilizability"
  VerdictStatus status = VerdictStatus::Unknown;
  std::string note;      ///< strictness-aware explanation of the status
  std::optional<DetectCertificate> detect_certificate;
  std::optional<StabCertificate> stab_certificate;
  std::optional<ObserverGains> gains;  ///< filled for detectability Holds
  std::vector<SolveAttempt> attempts;  ///< every solver run, in order
};

namespace verifyimpl {

inline std::string budget_note(const SolveDiagnostics& d) {
  std::ostringstream os;
  os.precision(6);
  os << "solver status " << d.status << ", best margin " << d.achieved_margin << " (target "
     << d.target_margin << ") after " << d.iterations << " iterations and " << d.restarts
     << " restarts of a budget of " << d.max_iters << " iterations / " << d.max_restarts
     << " restarts";
  return os.str();
}

/// Replicates a common-block solution across all vertices so downstream
/// consumers always see N blocks.
inline std::vector<Matrix> expand_common(std::vector<Matrix> blocks, std::size_t N) {
  if (blocks.size() == 1 && N > 1) blocks.assign(N, blocks.front());
  return blocks;
}

}  // namespace verifyimpl

/// Detectability decision ladder; see the header comment.
inline Verdict verdict_detect(const PolytopicSystem& sys, const AnalysisOptions& opts = {}) {
  require_valid(sys);
  opts.solver.validate();
  Verdict v;
  v.property = "detectability";
  BuildOptions build;
  build.common_block = opts.common_block;
  const SolveOutcome out = solve(build_detectability(sys, build), opts.solver);
  const SolveDiagnostics diag = make_diagnostics(out, opts.solver);
  v.attempts.push_back({opts.common_block ? "detect-common" : "detect", diag});
  if (out.status == SolveStatus::Feasible) {
    DetectCertificate cert;
    cert.P_bar = verifyimpl::expand_common(out.assignment, sys.vertex_count());
    cert.margin = out.achieved_margin;
    cert.provenance = diag;
    require_valid(cert, sys);
    v.gains = observer_gains(cert, sys);
    v.detect_certificate = std::move(cert);
    v.status = VerdictStatus::Holds;
    v.note = sys.strictly_polytopic
                 ? "feasible certificate found; for strictly polytopic systems the conditions "
                   "are necessary and sufficient"
                 : "feasible certificate found; the conditions are sufficient (strictness not "
                   "declared, so they may be conservative)";
  } else if (sys.strictly_polytopic) {
    v.status = VerdictStatus::FailsNecessary;
    v.note = "no feasible certificate within budget (" + verifyimpl::budget_note(diag) +
             "); the conditions are necessary for strictly polytopic systems, so "
             "poly-quadratic detectability fails — numerical caveat: the search is not a "
             "completeness proof, rerun with a larger budget to confirm";
  } else {
    v.status = VerdictStatus::Unknown;
    v.note = "no feasible certificate within budget (" + verifyimpl::budget_note(diag) +
             "); without strict polytopicity the conditions are only sufficient, so "
             "infeasibility is inconclusive";
  }
  return v;
}

/// Stabilizability decision ladder; see the header comment.
inline Verdict verdict_stab(const PolytopicSystem& sys, const AnalysisOptions& opts = {}) {
  require_valid(sys);
  opts.solver.validate();
  Verdict v;
  v.property = "stabilizability";
  if (opts.method != StabMethod::Vertex) {
    const SolveOutcome out = solve(build_stab_slack(sys), opts.solver);
    const SolveDiagnostics diag = make_diagnostics(out, opts.solver);
    v.attempts.push_back({"slack", diag});
    if (out.status == SolveStatus::Feasible) {
      v.stab_certificate = make_stab_certificate(sys, out, opts.solver, StabKind::Slack);
      v.status = VerdictStatus::Holds;
      v.note = "slack certificate found; the condition is sufficient for poly-quadratic "
               "stabilizability";
      return v;
    }
    if (opts.method == StabMethod::Slack) {
      v.status = VerdictStatus::Unknown;
      v.note = "no slack certificate within budget (" + verifyimpl::budget_note(diag) +
               "); the slack condition is sufficient only, so its failure never refutes "
               "stabilizability";
      return v;
    }
  }
  BuildOptions build;
  build.common_block = opts.common_block;
  const SolveOutcome out = solve(build_stab_vertex(sys, build), opts.solver);
  const SolveDiagnostics diag = make_diagnostics(out, opts.solver);
  v.attempts.push_back({opts.common_block ? "vertex-common" : "vertex", diag});
  if (out.status == SolveStatus::Feasible) {
    StabCertificate cert;
    cert.kind = StabKind::Vertex;
    cert.S_bar = verifyimpl::expand_common(out.assignment, sys.vertex_count());
    cert.margin = out.achieved_margin;
    cert.provenance = diag;
    require_valid(cert, sys);
    v.stab_certificate = std::move(cert);
    v.status = VerdictStatus::Unknown;
    v.note = "necessary vertex conditions feasible; sufficiency not established (no known "
             "proof closes the gap between the vertex and slack tests)";
  } else if (sys.strictly_polytopic) {
    v.status = VerdictStatus::FailsNecessary;
    v.note = "necessary vertex conditions infeasible within budget (" +
             verifyimpl::budget_note(diag) +
             "); for strictly polytopic systems this refutes poly-quadratic stabilizability — "
             "numerical caveat: the search is not a completeness proof, rerun with a larger "
             "budget to confirm";
  } else {
    v.status = VerdictStatus::Unknown;
    v.note = "vertex conditions not established within budget (" +
             verifyimpl::budget_note(diag) +
             ") and the system is not declared strictly polytopic; inconclusive";
  }
  return v;
}

}  // namespace polyq
