#pragma once

// Synthesis, analysis and frame operators of a sample field, optimal c-frame
// and ck-frame bounds, and composition of a field with a bounded operator.
//
// Weights enter through the L^2(X) inner product only: analysis returns the
// raw coefficients <h, f(x_i)>, synthesis multiplies by w_i. With F the
// dim x N sample matrix and W = diag(w):
//
//   T_f = F W,   T_f^# = F^*  (adjoint in the weighted metric),   S_f = F W F^*.

#include <map>
#include <string>

#include "ckframe/measure_space.hpp"

namespace ckframe {

/// sum_i w_i g_i f(x_i)
inline Vector synthesis(const SampleField& f, const ScalarField& g) {
  require_same_space(f.space(), g.space());
  const RealVector& w = f.space()->weights();
  Vector out = Vector::Zero(f.dim());
  for (Index i = 0; i < f.atoms(); ++i) out += (w(i) * g.values()(i)) * f.sample(i);
  return out;
}

/// x_i -> <h, f(x_i)>
inline ScalarField analysis(const SampleField& f, const Vector& h) {
  if (h.size() != f.dim()) throw Error(ErrorCode::DimMismatch, "vector and field dimensions differ");
  return ScalarField(f.space(), f.samples().adjoint() * h);
}

/// dim x N matrix with column i equal to w_i f(x_i). Its adjoint with respect
/// to the weighted inner product on coefficient vectors is analysis.
inline OperatorMatrix synthesis_matrix(const SampleField& f) {
  return f.samples() * f.space()->weights().cast<Complex>().asDiagonal();
}

/// F W^{1/2}: synthesis expressed in an orthonormal basis of L^2(X), so that
/// Euclidean SVD machinery sees the weighted geometry. Same range as T_f and
/// S_f = T T^*.
inline OperatorMatrix whitened_synthesis(const SampleField& f) {
  return f.samples() * f.space()->weights().cwiseSqrt().cast<Complex>().asDiagonal();
}

/// S_f = sum_i w_i f_i f_i^*
inline OperatorMatrix frame_operator(const SampleField& f) {
  const RealVector& w = f.space()->weights();
  OperatorMatrix s = OperatorMatrix::Zero(f.dim(), f.dim());
  for (Index i = 0; i < f.atoms(); ++i) s += w(i) * f.sample(i) * f.sample(i).adjoint();
  return 0.5 * (s + s.adjoint());
}

/// x_i -> u f(x_i)
inline SampleField map_field(const OperatorMatrix& u, const SampleField& f) {
  if (u.cols() != f.dim()) throw Error(ErrorCode::DimMismatch, "operator columns do not match field dimension");
  return SampleField(f.space(), u * f.samples());
}

enum class BoundKind { CBessel, CFrame, CkFrame };

inline const char* bound_kind_name(BoundKind k) {
  switch (k) {
    case BoundKind::CBessel: return "cBessel";
    case BoundKind::CFrame: return "cFrame";
    case BoundKind::CkFrame: return "ckFrame";
  }
  return "unknown";
}

struct FrameBounds {
  Multiplier lower = Multiplier::finite(0.0);
  double upper = 0.0;
  BoundKind kind = BoundKind::CBessel;
};

/// Optimal A, B with A||h||^2 <= int |<f(x),h>|^2 dmu <= B||h||^2.
inline FrameBounds cframe_bounds(const SampleField& f, const Tolerances& tol = {}) {
  const HermitianEig eig = hermitian_eig(frame_operator(f), tol.check);
  const double upper = std::max(0.0, eig.eigenvalues.maxCoeff());
  const double lower = std::max(0.0, eig.eigenvalues.minCoeff());
  FrameBounds b{Multiplier::finite(lower), upper, BoundKind::CBessel};
  if (upper > 0.0 && lower > tol.check * upper) b.kind = BoundKind::CFrame;
  return b;
}

struct CkFrameReport {
  FrameBounds bounds;
  bool range_included = false;
  bool is_ck_frame = false;
  /// k = 0: the lower inequality is vacuous.
  bool degenerate = false;
  std::map<std::string, double> residuals;
};

/// Checks A||k^* h||^2 <= int |<h,f(x)>|^2 dmu <= B||h||^2 with optimal
/// constants, and R(k) in R(T_f).
///
/// The positivity test on the lower bound is made scale free by comparing
/// A ||k||^2 against tol * B.
inline CkFrameReport ckframe_check(const SampleField& f, const OperatorMatrix& k, const Tolerances& tol = {}) {
  if (k.rows() != f.dim()) {
    throw Error(ErrorCode::DimMismatch, "k has " + std::to_string(k.rows()) + " rows but the field has dimension " +
                                            std::to_string(f.dim()));
  }
  CkFrameReport report;
  report.bounds.kind = BoundKind::CkFrame;
  const OperatorMatrix s = frame_operator(f);
  report.bounds.upper = std::max(0.0, hermitian_eig(s, tol.check).eigenvalues.maxCoeff());

  const double knorm = op_norm(k);
  if (knorm == 0.0) {
    report.bounds.lower = Multiplier::unbounded();
    report.range_included = true;
    report.is_ck_frame = true;
    report.degenerate = true;
    report.residuals["range_residual"] = 0.0;
    return report;
  }

  const OperatorMatrix proj = range_projector(whitened_synthesis(f), tol.rank);
  const double range_residual = op_norm(k - proj * k) / knorm;
  report.residuals["range_residual"] = range_residual;
  report.range_included = range_residual <= tol.check;

  report.bounds.lower = max_psd_multiplier(s, k * k.adjoint(), tol.rank, tol.check);
  const double lower = report.bounds.lower.value();
  const double normalized = report.bounds.upper > 0.0 ? lower * knorm * knorm / report.bounds.upper : 0.0;
  report.residuals["normalized_lower"] = normalized;
  report.is_ck_frame = report.range_included && normalized > tol.check;
  return report;
}

}  // namespace ckframe
