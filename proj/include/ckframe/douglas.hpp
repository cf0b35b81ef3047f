#pragma once

// Constructive Douglas lemma for L1 in B(H1,H), L2 in B(H2,H):
//   R(L1) in R(L2)  <=>  L1 L1^* <= lambda L2 L2^*  <=>  L1 = L2 X.
// Each predicate is decided by its own computation: range inclusion through
// the projector onto R(L2), factorization through the residual of the
// minimal-norm solution X = L2^+ L1, and majorization through the PSD pencil.

#include <optional>

#include "ckframe/linalg.hpp"

namespace ckframe {

struct DouglasResult {
  bool included = false;
  std::optional<OperatorMatrix> factor;
  std::optional<double> lambda_min;
  double residual = 0.0;
  /// Inclusion residual fell inside (tol, 100 tol).
  bool marginal = false;
};

namespace detail {

inline void require_same_rows(const OperatorMatrix& l1, const OperatorMatrix& l2) {
  if (l1.rows() != l2.rows()) {
    throw Error(ErrorCode::DimMismatch, "L1 and L2 must share a codomain (" + std::to_string(l1.rows()) + " vs " +
                                            std::to_string(l2.rows()) + " rows)");
  }
}

inline double inclusion_residual(const OperatorMatrix& l1, const OperatorMatrix& l2, double rank_tol) {
  const OperatorMatrix proj = range_projector(l2, rank_tol);
  return op_norm(l1 - proj * l1) / std::max(1.0, op_norm(l1));
}

}  // namespace detail

inline bool range_included(const OperatorMatrix& l1, const OperatorMatrix& l2, const Tolerances& tol = {}) {
  detail::require_same_rows(l1, l2);
  return detail::inclusion_residual(l1, l2, tol.rank) <= tol.check;
}

/// Least lambda with L1 L1^* <= lambda L2 L2^*, absent when R(L1) is not in R(L2).
inline std::optional<double> minimal_multiplier(const OperatorMatrix& l1, const OperatorMatrix& l2,
                                                const Tolerances& tol = {}) {
  detail::require_same_rows(l1, l2);
  const OperatorMatrix c = l1 * l1.adjoint();
  const OperatorMatrix s = l2 * l2.adjoint();
  if (c.cwiseAbs().maxCoeff() == 0.0) return 0.0;

  const HermitianEig seig = hermitian_eig(s, tol.check);
  const detail::PsdRoot root = detail::psd_pseudo_inv_sqrt(seig, tol.rank);
  if (op_norm(c - root.projector * c) > tol.check * op_norm(c)) return std::nullopt;

  const OperatorMatrix whitened = root.inv_sqrt * c * root.inv_sqrt;
  Eigen::SelfAdjointEigenSolver<OperatorMatrix> solver(0.5 * (whitened + whitened.adjoint()), Eigen::EigenvaluesOnly);
  return std::max(0.0, solver.eigenvalues().maxCoeff());
}

inline DouglasResult douglas_factor(const OperatorMatrix& l1, const OperatorMatrix& l2, const Tolerances& tol = {}) {
  detail::require_same_rows(l1, l2);
  DouglasResult out;
  const OperatorMatrix x = pseudoinverse(l2, tol.rank) * l1;
  out.residual = op_norm(l1 - l2 * x) / std::max(1.0, op_norm(l1));
  if (out.residual <= tol.check) {
    out.included = true;
    out.factor = x;
    out.lambda_min = minimal_multiplier(l1, l2, tol);
    if (!out.lambda_min) {
      // L1 L1^* = L2 X X^* L2^*, and for the minimal-norm X the least
      // multiplier is exactly ||X||^2.
      const double xn = op_norm(x);
      out.lambda_min = xn * xn;
    }
  } else {
    out.marginal = out.residual < kRankGapFactor * tol.check;
  }
  return out;
}

}  // namespace ckframe
