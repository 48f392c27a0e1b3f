#pragma once

// ============================================================================
// Structural LMI assembly.
//
// Every feasibility test in the library is a list of affine matrix
// constraints over named decision blocks:
//
//   F_c(x) = K_c + sum_t sign_t * L_t * X_{b(t)}(^T) * R_t^T  which must be PD.
//
// The right factor is stored pre-transposed (the term contributes L X R^T),
// which keeps vertex constructions readable and gives the supergradient the
// tidy adjoint  sign * L^T v v^T R.  Constraints are built once per system;
// the solver and the independent certificate checks both evaluate the same
// structures, so what is optimised and what is verified cannot drift apart.
//
// Builders (vertex systems with N vertices, state dimension n):
//   build_detectability:  P_i > 0,  P_i - A_i^T P_j A_i + C^T C > 0
//   build_stab_vertex:    S_i > 0,  S_j - A_i S_i A_i^T + B B^T > 0
//   build_stab_slack:     S_i > 0,  [[X_i + X_i^T - A_i S_i A_i^T + B B^T, X_i^T],
//                                    [X_i,                               S_j]] > 0
// ============================================================================

#include <algorithm>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "polyq/eig.hpp"
#include "polyq/errors.hpp"
#include "polyq/matrix.hpp"
#include "polyq/system.hpp"

namespace polyq {

enum class BlockKind { Symmetric, Rectangular };

struct DecisionBlock {
  std::string name;
  BlockKind kind;
  std::size_t rows;
  std::size_t cols;
};

struct ConstraintTerm {
  std::size_t block;   ///< index into LmiProblem::blocks
  Matrix left;         ///< L
  Matrix right;        ///< R, contribution is sign * L * X * R^T
  double sign;         ///< +1 or -1
  bool transpose_block = false;  ///< use X^T instead of X
};

struct AffineConstraint {
  std::string label;
  Matrix constant;
  std::vector<ConstraintTerm> terms;
  std::size_t dim() const { return constant.rows(); }
};

struct LmiProblem {
  std::string family;  ///< "detect", "stab_vertex" or "stab_slack"
  std::vector<DecisionBlock> blocks;
  std::vector<AffineConstraint> constraints;
};

/// Decision-block values, aligned with LmiProblem::blocks.
using Assignment = std::vector<Matrix>;

struct BuildOptions {
  /// Tie all symmetric Lyapunov blocks to one shared value (common quadratic
  /// Lyapunov function, the regime where detect/stab duality holds). The
  /// problem then has a single block and one PD constraint, with all N^2
  /// cross constraints retained.
  bool common_block = false;
};

namespace lmiimpl {

inline Matrix upper_embed(std::size_t n) {  // E1 = [I; 0], 2n x n
  Matrix e(2 * n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) e(i, i) = 1.0;
  return e;
}

inline Matrix lower_embed(std::size_t n) {  // E2 = [0; I], 2n x n
  Matrix e(2 * n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) e(n + i, i) = 1.0;
  return e;
}

inline std::string idx2(const char* fam, std::size_t i, std::size_t j) {
  return std::string(fam) + "[i=" + std::to_string(i + 1) + ",j=" + std::to_string(j + 1) + "]";
}

}  // namespace lmiimpl

/// Coupled detectability LMIs on the vertices.
inline LmiProblem build_detectability(const PolytopicSystem& sys, BuildOptions opts = {}) {
  require_valid(sys);
  const std::size_t N = sys.vertex_count();
  const std::size_t n = sys.n_x();
  const Matrix eye = Matrix::identity(n);
  const Matrix ctc = transpose(sys.C) * sys.C;

  LmiProblem prob;
  prob.family = "detect";
  if (opts.common_block) {
    prob.blocks.push_back({"P", BlockKind::Symmetric, n, n});
  } else {
    for (std::size_t i = 0; i < N; ++i) {
      prob.blocks.push_back({"P[" + std::to_string(i + 1) + "]", BlockKind::Symmetric, n, n});
    }
  }
  const auto blk = [&](std::size_t i) { return opts.common_block ? 0 : i; };

  const std::size_t pd_count = opts.common_block ? 1 : N;
  for (std::size_t i = 0; i < pd_count; ++i) {
    AffineConstraint c;
    c.label = "pd[i=" + std::to_string(i + 1) + "]";
    c.constant = Matrix::zeros(n, n);
    c.terms.push_back({blk(i), eye, eye, +1.0, false});
    prob.constraints.push_back(std::move(c));
  }
  for (std::size_t i = 0; i < N; ++i) {
    const Matrix ait = transpose(sys.A[i]);
    for (std::size_t j = 0; j < N; ++j) {
      AffineConstraint c;
      c.label = lmiimpl::idx2("det", i, j);
      c.constant = ctc;
      c.terms.push_back({blk(i), eye, eye, +1.0, false});
      c.terms.push_back({blk(j), ait, ait, -1.0, false});  // -A_i^T P_j A_i
      prob.constraints.push_back(std::move(c));
    }
  }
  return prob;
}

/// Necessary-condition stabilizability LMIs on the vertices.
inline LmiProblem build_stab_vertex(const PolytopicSystem& sys, BuildOptions opts = {}) {
  require_valid(sys);
  const std::size_t N = sys.vertex_count();
  const std::size_t n = sys.n_x();
  const Matrix eye = Matrix::identity(n);
  const Matrix bbt = sys.B * transpose(sys.B);

  LmiProblem prob;
  prob.family = "stab_vertex";
  if (opts.common_block) {
    prob.blocks.push_back({"S", BlockKind::Symmetric, n, n});
  } else {
    for (std::size_t i = 0; i < N; ++i) {
      prob.blocks.push_back({"S[" + std::to_string(i + 1) + "]", BlockKind::Symmetric, n, n});
    }
  }
  const auto blk = [&](std::size_t i) { return opts.common_block ? 0 : i; };

  const std::size_t pd_count = opts.common_block ? 1 : N;
  for (std::size_t i = 0; i < pd_count; ++i) {
    AffineConstraint c;
    c.label = "pd[i=" + std::to_string(i + 1) + "]";
    c.constant = Matrix::zeros(n, n);
    c.terms.push_back({blk(i), eye, eye, +1.0, false});
    prob.constraints.push_back(std::move(c));
  }
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = 0; j < N; ++j) {
      AffineConstraint c;
      c.label = lmiimpl::idx2("stab", i, j);
      c.constant = bbt;
      c.terms.push_back({blk(j), eye, eye, +1.0, false});
      c.terms.push_back({blk(i), sys.A[i], sys.A[i], -1.0, false});  // -A_i S_i A_i^T
      prob.constraints.push_back(std::move(c));
    }
  }
  return prob;
}

/// Sufficient-condition stabilizability LMIs with slack blocks X_i. Each
/// cross constraint is the 2n x 2n block matrix listed in the header comment.
inline LmiProblem build_stab_slack(const PolytopicSystem& sys) {
  require_valid(sys);
  const std::size_t N = sys.vertex_count();
  const std::size_t n = sys.n_x();
  const Matrix eye = Matrix::identity(n);
  const Matrix bbt = sys.B * transpose(sys.B);
  const Matrix e1 = lmiimpl::upper_embed(n);
  const Matrix e2 = lmiimpl::lower_embed(n);

  LmiProblem prob;
  prob.family = "stab_slack";
  for (std::size_t i = 0; i < N; ++i) {
    prob.blocks.push_back({"S[" + std::to_string(i + 1) + "]", BlockKind::Symmetric, n, n});
  }
  for (std::size_t i = 0; i < N; ++i) {
    prob.blocks.push_back({"X[" + std::to_string(i + 1) + "]", BlockKind::Rectangular, n, n});
  }

  for (std::size_t i = 0; i < N; ++i) {
    AffineConstraint c;
    c.label = "pd[i=" + std::to_string(i + 1) + "]";
    c.constant = Matrix::zeros(n, n);
    c.terms.push_back({i, eye, eye, +1.0, false});
    prob.constraints.push_back(std::move(c));
  }

  Matrix constant = Matrix::zeros(2 * n, 2 * n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t cc = 0; cc < n; ++cc) constant(r, cc) = bbt(r, cc);
  }
  for (std::size_t i = 0; i < N; ++i) {
    const Matrix e1ai = e1 * sys.A[i];
    for (std::size_t j = 0; j < N; ++j) {
      AffineConstraint c;
      c.label = lmiimpl::idx2("slack", i, j);
      c.constant = constant;
      // (1,1): X_i + X_i^T - A_i S_i A_i^T + B B^T
      c.terms.push_back({N + i, e1, e1, +1.0, false});
      c.terms.push_back({N + i, e1, e1, +1.0, true});
      c.terms.push_back({i, e1ai, e1ai, -1.0, false});
      // (2,1): X_i   and (1,2): X_i^T
      c.terms.push_back({N + i, e2, e1, +1.0, false});
      c.terms.push_back({N + i, e1, e2, +1.0, true});
      // (2,2): S_j
      c.terms.push_back({j, e2, e2, +1.0, false});
      prob.constraints.push_back(std::move(c));
    }
  }
  return prob;
}

/// Shape-check an assignment against the problem's block list. Symmetric
/// blocks must actually be symmetric (within the SymMatrix tolerance).
inline void require_assignment(const LmiProblem& prob, const Assignment& x) {
  if (x.size() != prob.blocks.size()) {
    throw InvalidInputError("assignment has " + std::to_string(x.size()) + " blocks, expected " +
                            std::to_string(prob.blocks.size()));
  }
  for (std::size_t b = 0; b < x.size(); ++b) {
    const DecisionBlock& db = prob.blocks[b];
    if (x[b].rows() != db.rows || x[b].cols() != db.cols) {
      throw InvalidInputError("assignment block " + db.name + " has wrong shape");
    }
    if (!all_finite(x[b])) throw InvalidInputError("assignment block " + db.name + " not finite");
    if (db.kind == BlockKind::Symmetric) {
      const double tol = 1e-12 * std::max(1.0, frobenius_norm(x[b]));
      if (max_asymmetry(x[b]) > tol) {
        throw InvalidInputError("assignment block " + db.name + " is not symmetric");
      }
    }
  }
}

/// Raw affine sum for one constraint; symmetric up to rounding whenever the
/// assignment respects block kinds.
inline Matrix assemble_constraint(const LmiProblem& prob, std::size_t c, const Assignment& x) {
  const AffineConstraint& con = prob.constraints.at(c);
  Matrix f = con.constant;
  for (const ConstraintTerm& t : con.terms) {
    const Matrix& xb = x[t.block];
    const Matrix mid = t.transpose_block ? transpose(xb) : xb;
    f = f + t.sign * (t.left * mid * transpose(t.right));
  }
  return f;
}

/// Exact per-constraint minimum eigenvalues, in constraint order.
inline std::vector<std::pair<std::string, double>> evaluate_constraints(const LmiProblem& prob,
                                                                        const Assignment& x) {
  require_assignment(prob, x);
  std::vector<std::pair<std::string, double>> out;
  out.reserve(prob.constraints.size());
  for (std::size_t c = 0; c < prob.constraints.size(); ++c) {
    const Matrix f = assemble_constraint(prob, c, x);
    out.emplace_back(prob.constraints[c].label, min_eigenvalue(SymMatrix(f)));
  }
  return out;
}

inline double min_constraint_value(const std::vector<std::pair<std::string, double>>& margins) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& [label, v] : margins) m = std::min(m, v);
  return m;
}

/// Identity for symmetric blocks, zero for rectangular ones — the solver's
/// documented start point.
inline Assignment identity_assignment(const LmiProblem& prob) {
  Assignment x;
  x.reserve(prob.blocks.size());
  for (const DecisionBlock& b : prob.blocks) {
    if (b.kind == BlockKind::Symmetric) {
      x.push_back(Matrix::identity(b.rows));
    } else {
      x.push_back(Matrix::zeros(b.rows, b.cols));
    }
  }
  return x;
}

/// The dual system: vertices transposed, B and C swapped (B' = C^T,
/// C' = B^T). Detectability LMIs of the dual coincide with stabilizability
/// vertex LMIs of the original under a common block.
inline PolytopicSystem dual_system(const PolytopicSystem& sys) {
  PolytopicSystem dual;
  dual.name = sys.name.empty() ? std::string() : (sys.name + "-dual");
  dual.strictly_polytopic = sys.strictly_polytopic;
  for (const Matrix& a : sys.A) dual.A.push_back(transpose(a));
  dual.B = transpose(sys.C);
  dual.C = transpose(sys.B);
  return dual;
}

}  // namespace polyq
