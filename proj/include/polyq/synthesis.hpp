#pragma once

// ============================================================================
// Gain synthesis from certificates.
//
// A detectability certificate (blocks P_i) yields N observer vertex gains
//
//   L_i = -A_i (P_i + C^T C)^{-1} C^T,     L(xi) = sum_i xi_i L_i,
//
// which is genuinely polytopic. A stabilizability certificate (blocks S_i)
// yields a state-feedback law that is *not* polytopic: with P_i = S_i^{-1},
// P(xi) = sum_i xi_i P_i and S(xi) = P(xi)^{-1},
//
//   K(xi_now, xi_next) = -B^T (S(xi_next) + B B^T)^{-1} A(xi_now).
//
// The asymmetry is intentional and mirrors the underlying theory. LTI
// single-vertex special cases are provided in both algebraic forms and
// cross-checked against each other (Woodbury identity) on every call.
//
// All linear solves go through the SPD Cholesky path; condition estimates
// above 1e12 are surfaced as warning strings rather than silent results.
// ============================================================================

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "polyq/eig.hpp"
#include "polyq/errors.hpp"
#include "polyq/lmi.hpp"
#include "polyq/matrix.hpp"
#include "polyq/solver.hpp"
#include "polyq/system.hpp"

namespace polyq {

/// Serializable summary of how a certificate was obtained.
struct SolveDiagnostics {
  std::string status;            ///< Feasible | MarginNegative | Stalled
  double achieved_margin = 0.0;
  std::optional<double> normalized_margin;  ///< unit-sphere margin when computed
  std::size_t iterations = 0;
  std::size_t restarts = 0;
  double target_margin = 0.0;
  std::size_t max_iters = 0;
  std::size_t max_restarts = 0;
  std::uint64_t seed = 0;
};

inline SolveDiagnostics make_diagnostics(const SolveOutcome& out, const SolverConfig& cfg) {
  SolveDiagnostics d;
  d.status = to_string(out.status);
  d.achieved_margin = out.achieved_margin;
  d.normalized_margin = out.normalized_margin;
  d.iterations = out.iterations;
  d.restarts = out.restarts;
  d.target_margin = out.target_margin;
  d.max_iters = cfg.max_iters;
  d.max_restarts = cfg.max_restarts;
  d.seed = cfg.seed;
  return d;
}

struct DetectCertificate {
  std::vector<Matrix> P_bar;  ///< N symmetric PD blocks
  double margin = 0.0;
  SolveDiagnostics provenance;
};

enum class StabKind { Vertex, Slack };

inline const char* to_string(StabKind k) { return k == StabKind::Vertex ? "vertex" : "slack"; }

struct StabCertificate {
  std::vector<Matrix> S_bar;  ///< N symmetric PD blocks
  std::vector<Matrix> X;      ///< N slack blocks; empty for vertex certificates
  StabKind kind = StabKind::Vertex;
  double margin = 0.0;
  SolveDiagnostics provenance;
};

struct ObserverGains {
  std::vector<Matrix> L;  ///< N vertex gains, n_x x n_y
  std::vector<std::string> warnings;  ///< conditioning reports (kappa > 1e12)
};

/// Poly-quadratic Lyapunov data: V(xi, x) = x^T (sum_i xi_i P_i) x with
/// a1 ||x||^2 <= V <= a2 ||x||^2. a3 is the empirical worst-case one-step
/// decrease rate, filled in from simulation reports.
struct PolyQLF {
  std::vector<Matrix> P_bar;
  double a1 = 0.0;
  double a2 = 0.0;
  double a3 = std::numeric_limits<double>::quiet_NaN();
};

namespace synthimpl {

inline void require_square_blocks(const std::vector<Matrix>& blocks, std::size_t n,
                                  const char* what) {
  if (blocks.empty()) throw InvalidInputError(std::string(what) + ": no blocks");
  for (const Matrix& m : blocks) {
    if (m.rows() != n || m.cols() != n) {
      throw InvalidInputError(std::string(what) + ": block is not " + std::to_string(n) + "x" +
                              std::to_string(n));
    }
  }
}

inline void require_pd_blocks(const std::vector<Matrix>& blocks, const char* what) {
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (!is_pd(SymMatrix(blocks[i]), 1e-12)) {
      throw NotPositiveDefiniteError(std::string(what) + " block " + std::to_string(i + 1) +
                                     " is not positive definite");
    }
  }
}

inline double spd_condition_estimate(const SymMatrix& m) {
  const EigResult eig = sym_eig(m);
  const double lo = eig.eigenvalues.front();
  const double hi = eig.eigenvalues.back();
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

inline void warn_if_ill_conditioned(const SymMatrix& m, const std::string& name,
                                    std::vector<std::string>* warnings) {
  if (warnings == nullptr) return;
  const double kappa = spd_condition_estimate(m);
  if (kappa > 1e12) {
    warnings->push_back(name + " has condition estimate " + std::to_string(kappa));
  }
}

}  // namespace synthimpl

inline void require_valid(const DetectCertificate& cert, const PolytopicSystem& sys) {
  require_valid(sys);
  if (cert.P_bar.size() != sys.vertex_count()) {
    throw InvalidInputError("certificate has " + std::to_string(cert.P_bar.size()) +
                            " blocks for a system with " + std::to_string(sys.vertex_count()) +
                            " vertices");
  }
  synthimpl::require_square_blocks(cert.P_bar, sys.n_x(), "detect certificate");
  synthimpl::require_pd_blocks(cert.P_bar, "detect certificate");
}

inline void require_valid(const StabCertificate& cert, const PolytopicSystem& sys) {
  require_valid(sys);
  if (cert.S_bar.size() != sys.vertex_count()) {
    throw InvalidInputError("certificate has " + std::to_string(cert.S_bar.size()) +
                            " blocks for a system with " + std::to_string(sys.vertex_count()) +
                            " vertices");
  }
  synthimpl::require_square_blocks(cert.S_bar, sys.n_x(), "stab certificate");
  synthimpl::require_pd_blocks(cert.S_bar, "stab certificate");
  if (cert.kind == StabKind::Slack) {
    if (cert.X.size() != cert.S_bar.size()) {
      throw InvalidInputError("slack certificate must carry one X block per vertex");
    }
    synthimpl::require_square_blocks(cert.X, sys.n_x(), "stab certificate slack");
  }
}

/// Package a solved detectability problem into a certificate.
inline DetectCertificate make_detect_certificate(const PolytopicSystem& sys,
                                                 const SolveOutcome& out,
                                                 const SolverConfig& cfg) {
  DetectCertificate cert;
  cert.P_bar = out.assignment;
  cert.margin = out.achieved_margin;
  cert.provenance = make_diagnostics(out, cfg);
  require_valid(cert, sys);
  return cert;
}

/// Package a solved stabilizability problem (either family) into a certificate.
inline StabCertificate make_stab_certificate(const PolytopicSystem& sys, const SolveOutcome& out,
                                             const SolverConfig& cfg, StabKind kind) {
  StabCertificate cert;
  cert.kind = kind;
  const std::size_t N = sys.vertex_count();
  if (kind == StabKind::Slack) {
    if (out.assignment.size() != 2 * N) {
      throw InvalidInputError("slack solve should produce 2N blocks");
    }
    cert.S_bar.assign(out.assignment.begin(), out.assignment.begin() + static_cast<long>(N));
    cert.X.assign(out.assignment.begin() + static_cast<long>(N), out.assignment.end());
  } else {
    cert.S_bar = out.assignment;
  }
  cert.margin = out.achieved_margin;
  cert.provenance = make_diagnostics(out, cfg);
  require_valid(cert, sys);
  return cert;
}

/// Observer vertex gains L_i = -A_i (P_i + C^T C)^{-1} C^T.
inline ObserverGains observer_gains(const DetectCertificate& cert, const PolytopicSystem& sys) {
  require_valid(cert, sys);
  const Matrix ctc = transpose(sys.C) * sys.C;
  const Matrix ct = transpose(sys.C);
  ObserverGains gains;
  for (std::size_t i = 0; i < sys.vertex_count(); ++i) {
    const SymMatrix m(cert.P_bar[i] + ctc);
    synthimpl::warn_if_ill_conditioned(m, "P[" + std::to_string(i + 1) + "] + C^T C",
                                       &gains.warnings);
    gains.L.push_back(-1.0 * (sys.A[i] * solve_spd(m, ct)));
  }
  return gains;
}

/// Scheduled observer gain L(xi) = sum_i xi_i L_i (zero weights skipped so
/// vertex evaluations are bit-exact).
inline Matrix evaluate_gain(const ObserverGains& gains, const SimplexPoint& xi) {
  if (gains.L.size() != xi.size()) throw InvalidInputError("gain/simplex size mismatch");
  Matrix sum = Matrix::zeros(gains.L.front().rows(), gains.L.front().cols());
  for (std::size_t i = 0; i < gains.L.size(); ++i) {
    const double w = xi[i];
    if (w == 0.0) continue;
    if (w == 1.0) return gains.L[i];
    sum = sum + w * gains.L[i];
  }
  return sum;
}

/// Inverted Lyapunov blocks P_i = S_i^{-1} for a stabilizability certificate.
inline std::vector<Matrix> inverted_blocks(const StabCertificate& cert) {
  std::vector<Matrix> p;
  for (const Matrix& s : cert.S_bar) p.push_back(inverse_spd(SymMatrix(s)));
  return p;
}

namespace synthimpl {

/// Gain computation without revalidation; callers guarantee the
/// certificate/system pair is valid and the simplex points have size N.
/// Simulation loops call this directly so the per-step cost is the gain
/// formula alone, not N eigendecompositions of already-validated blocks.
inline Matrix controller_gain_core(const StabCertificate& cert, const PolytopicSystem& sys,
                                   const SimplexPoint& xi_now, const SimplexPoint& xi_next,
                                   std::vector<std::string>* warnings) {
  const std::size_t n = sys.n_x();
  Matrix s_next = Matrix::zeros(n, n);
  bool at_vertex = false;
  for (std::size_t i = 0; i < sys.vertex_count(); ++i) {
    if (xi_next[i] == 1.0) {  // S(e_i) = S_i exactly; skip the double inversion
      s_next = cert.S_bar[i];
      at_vertex = true;
      break;
    }
  }
  if (!at_vertex) {
    Matrix p_next = Matrix::zeros(n, n);
    for (std::size_t i = 0; i < sys.vertex_count(); ++i) {
      const double w = xi_next[i];
      if (w == 0.0) continue;
      p_next = p_next + w * inverse_spd(SymMatrix(cert.S_bar[i]));
    }
    s_next = inverse_spd(SymMatrix(p_next));
  }
  const SymMatrix inner_m(s_next + sys.B * transpose(sys.B));
  warn_if_ill_conditioned(inner_m, "S(xi_next) + B B^T", warnings);
  return -1.0 * (transpose(sys.B) * solve_spd(inner_m, evaluate_A(sys, xi_now)));
}

}  // namespace synthimpl

/// State-feedback gain K(xi_now, xi_next); see the header comment. The
/// optional warnings sink receives conditioning reports.
inline Matrix controller_gain(const StabCertificate& cert, const PolytopicSystem& sys,
                              const SimplexPoint& xi_now, const SimplexPoint& xi_next,
                              std::vector<std::string>* warnings = nullptr) {
  require_valid(cert, sys);
  if (xi_now.size() != sys.vertex_count() || xi_next.size() != sys.vertex_count()) {
    throw InvalidInputError("simplex point size does not match vertex count");
  }
  return synthimpl::controller_gain_core(cert, sys, xi_now, xi_next, warnings);
}

/// V(xi, x) = x^T (sum_i xi_i P_i) x.
inline double lyapunov_value(const std::vector<Matrix>& P_bar, const SimplexPoint& xi,
                             const Vec& x) {
  if (P_bar.size() != xi.size()) throw InvalidInputError("block/simplex size mismatch");
  double v = 0.0;
  for (std::size_t i = 0; i < P_bar.size(); ++i) {
    const double w = xi[i];
    if (w == 0.0) continue;
    if (P_bar[i].rows() != x.size() || P_bar[i].cols() != x.size()) {
      throw InvalidInputError("Lyapunov block does not match state dimension");
    }
    v += w * quad_form(P_bar[i], x);
  }
  return v;
}

/// LTI observer gain in the direct form, cross-checked against the Woodbury
/// form -A S C^T (I + C S C^T)^{-1} with S = P^{-1}.
inline Matrix lti_observer_gain(const Matrix& a, const Matrix& c, const Matrix& p) {
  if (a.rows() != a.cols() || p.rows() != p.cols() || a.rows() != p.rows() ||
      c.cols() != a.rows()) {
    throw InvalidInputError("lti_observer_gain: inconsistent dimensions");
  }
  const Matrix direct = -1.0 * (a * solve_spd(SymMatrix(p + transpose(c) * c), transpose(c)));
  const Matrix s = inverse_spd(SymMatrix(p));
  const Matrix csct = c * s * transpose(c);
  const Matrix alt = -1.0 * (a * s * transpose(c) *
                             inverse_spd(SymMatrix(Matrix::identity(c.rows()) + csct)));
  const double scale = std::max(1.0, frobenius_norm(direct));
  if (frobenius_norm(direct - alt) > 1e-10 * scale) {
    throw NumericalFailureError("observer gain forms disagree beyond 1e-10");
  }
  return direct;
}

/// LTI controller gain in the direct form, cross-checked against the
/// Woodbury form -(I + B^T P B)^{-1} B^T P A with P = S^{-1}.
inline Matrix lti_controller_gain(const Matrix& a, const Matrix& b, const Matrix& s) {
  if (a.rows() != a.cols() || s.rows() != s.cols() || a.rows() != s.rows() ||
      b.rows() != a.rows()) {
    throw InvalidInputError("lti_controller_gain: inconsistent dimensions");
  }
  const Matrix direct = -1.0 * (transpose(b) * solve_spd(SymMatrix(s + b * transpose(b)), a));
  const Matrix p = inverse_spd(SymMatrix(s));
  const Matrix btpb = transpose(b) * p * b;
  const Matrix alt = -1.0 * solve_spd(SymMatrix(Matrix::identity(b.cols()) + btpb),
                                      transpose(b) * p * a);
  const double scale = std::max(1.0, frobenius_norm(direct));
  if (frobenius_norm(direct - alt) > 1e-10 * scale) {
    throw NumericalFailureError("controller gain forms disagree beyond 1e-10");
  }
  return direct;
}

/// Eigenvalue envelope of the Lyapunov blocks; a3 stays NaN until a
/// simulation report fills it in.
inline PolyQLF make_polyqlf(const std::vector<Matrix>& P_bar) {
  if (P_bar.empty()) throw InvalidInputError("poly-QLF needs at least one block");
  PolyQLF qlf;
  qlf.P_bar = P_bar;
  qlf.a1 = std::numeric_limits<double>::infinity();
  qlf.a2 = -std::numeric_limits<double>::infinity();
  for (const Matrix& p : P_bar) {
    const EigResult eig = sym_eig(SymMatrix(p));
    qlf.a1 = std::min(qlf.a1, eig.eigenvalues.front());
    qlf.a2 = std::max(qlf.a2, eig.eigenvalues.back());
  }
  return qlf;
}

}  // namespace polyq
