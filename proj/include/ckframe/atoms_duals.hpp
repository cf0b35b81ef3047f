#pragma once

// Atomic decompositions and ck-duals.
//
//  * atom_coefficient_map: the minimal-norm M : H0 -> L^2(X) with T_f M = k.
//  * inverse_on_range:     G = U (S_f U)^+ with U an orthonormal basis of R(k);
//                          G inverts S_f on R(k) and annihilates S_f(R(k))^perp.
//  * verify_dual_pair:     the five equivalent dual-pair conditions, each by
//                          its own computation.
//  * canonical_dual:       g = k^* G f, dual to the projected field P_{R(k)} f.

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ckframe/frame_ops.hpp"

namespace ckframe {

struct CoefficientMap {
  /// atoms x dim H0; column j holds the coefficient field of the j-th basis vector.
  OperatorMatrix matrix;
  /// Operator norm of `matrix` from H0 into weighted L^2(X).
  double bound = 0.0;
};

namespace detail {

inline double weighted_field_norm(const RealVector& w, const Vector& values) {
  return std::sqrt((w.array() * values.array().abs2()).sum());
}

inline double weighted_op_norm(const RealVector& w, const OperatorMatrix& m) {
  return op_norm(w.cwiseSqrt().cast<Complex>().asDiagonal() * m);
}

}  // namespace detail

inline CoefficientMap atom_coefficient_map(const SampleField& f, const OperatorMatrix& k, const Tolerances& tol = {}) {
  const CkFrameReport report = ckframe_check(f, k, tol);
  if (!report.range_included) {
    throw Error(ErrorCode::RangeNotIncluded,
                "R(k) is not contained in R(T_f) (residual " + std::to_string(report.residuals.at("range_residual")) +
                    ")");
  }
  const RealVector& w = f.space()->weights();
  const OperatorMatrix coords = pseudoinverse(whitened_synthesis(f), tol.rank) * k;
  CoefficientMap out;
  out.matrix = w.cwiseSqrt().cwiseInverse().cast<Complex>().asDiagonal() * coords;
  out.bound = op_norm(coords);
  return out;
}

/// Worst reconstruction error max_j ||k g_j - T_f(m g_j)|| / max(1, ||k||)
/// over the standard basis g_j of H0. A violated boundedness constant is
/// folded into the returned value.
inline double verify_atomic_decomposition(const SampleField& f, const OperatorMatrix& k, const CoefficientMap& m,
                                          const Tolerances& tol = {}) {
  if (k.rows() != f.dim() || m.matrix.rows() != f.atoms() || m.matrix.cols() != k.cols()) {
    throw Error(ErrorCode::DimMismatch, "coefficient map, field and k are inconsistent");
  }
  const RealVector& w = f.space()->weights();
  const double scale = std::max(1.0, op_norm(k));
  const double a = detail::weighted_op_norm(w, m.matrix);
  double worst = 0.0;
  for (Index j = 0; j < k.cols(); ++j) {
    const ScalarField coeffs(f.space(), m.matrix.col(j));
    worst = std::max(worst, (k.col(j) - synthesis(f, coeffs)).norm() / scale);
    const double excess = detail::weighted_field_norm(w, m.matrix.col(j)) - a * (1.0 + tol.check);
    if (excess > 0.0) worst = std::max(worst, excess / scale);
  }
  if (m.bound < a * (1.0 - tol.check)) worst = std::max(worst, (a - m.bound) / std::max(1.0, a));
  return worst;
}

namespace detail {

// Shared data for the constructions that need a closed-range k with a
// genuine ck-frame inequality.
struct RangeData {
  CkFrameReport report;
  RankedSvd ksvd;
  OperatorMatrix range_basis;  // U
  OperatorMatrix frame_op;     // S_f
  OperatorMatrix inverse;      // G
  double lower = 0.0;          // A
  double upper = 0.0;          // B
  double kdag_norm = 0.0;      // ||k^+||
};

inline RangeData range_data(const SampleField& f, const OperatorMatrix& k, const Tolerances& tol) {
  RangeData d;
  d.report = ckframe_check(f, k, tol);
  if (d.report.degenerate) {
    throw Error(ErrorCode::DegenerateOperator, "k = 0 has no closed-range certificate");
  }
  if (!d.report.is_ck_frame) {
    throw Error(ErrorCode::RangeNotIncluded, "f is not a ck-frame for the given k");
  }
  d.ksvd = ranked_svd(k, tol.rank);
  d.range_basis = d.ksvd.range_basis();
  d.frame_op = frame_operator(f);
  const OperatorMatrix su = d.frame_op * d.range_basis;
  const RankedSvd susvd = ranked_svd(su, tol.rank);
  if (susvd.rank < d.range_basis.cols()) {
    throw Error(ErrorCode::NotInvertibleOnRange, "rank(S_f U) = " + std::to_string(susvd.rank) + " < rank(k) = " +
                                                     std::to_string(d.range_basis.cols()));
  }
  d.inverse = d.range_basis * pseudoinverse(su, tol.rank);
  d.lower = d.report.bounds.lower.value();
  d.upper = d.report.bounds.upper;
  d.kdag_norm = 1.0 / d.ksvd.sigma_min_nonzero();
  return d;
}

inline double min_eigenvalue(const OperatorMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<OperatorMatrix> solver(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

inline double max_eigenvalue(const OperatorMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<OperatorMatrix> solver(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(solver.eigenvalues().size() - 1);
}

}  // namespace detail

/// G = U (S_f U)^+, the inverse of S_f restricted to R(k) composed with the
/// projection onto S_f(R(k)).
inline OperatorMatrix inverse_on_range(const SampleField& f, const OperatorMatrix& k, const Tolerances& tol = {}) {
  return detail::range_data(f, k, tol).inverse;
}

struct SandwichReport {
  double lower_slack = 0.0;  // min <Gh,h> - 1/B
  double upper_slack = 0.0;  // ||k^+||^2 / A - max <Gh,h>
  double min_form = 0.0;
  double max_form = 0.0;
  double lower_bound = 0.0;  // 1/B
  double upper_bound = 0.0;  // ||k^+||^2 / A

  double slack() const { return std::min(lower_slack, upper_slack); }
};

/// Extremes of <G h, h> over unit h in S_f(R(k)) against [1/B, ||k^+||^2 / A].
inline SandwichReport sandwich_details(const SampleField& f, const OperatorMatrix& k, const Tolerances& tol = {}) {
  const detail::RangeData d = detail::range_data(f, k, tol);
  const OperatorMatrix q = ranked_svd(d.frame_op * d.range_basis, tol.rank).range_basis();
  const OperatorMatrix form = q.adjoint() * d.inverse * q;
  SandwichReport r;
  r.min_form = detail::min_eigenvalue(form);
  r.max_form = detail::max_eigenvalue(form);
  r.lower_bound = 1.0 / d.upper;
  r.upper_bound = d.kdag_norm * d.kdag_norm / d.lower;
  r.lower_slack = r.min_form - r.lower_bound;
  r.upper_slack = r.upper_bound - r.max_form;
  return r;
}

inline double sandwich_check(const SampleField& f, const OperatorMatrix& k, const Tolerances& tol = {}) {
  return sandwich_details(f, k, tol).slack();
}

struct CorollaryReport {
  double lower_slack = 0.0;  // min <S_f h,h> - A / ||k^+||^2
  double upper_slack = 0.0;  // B - max <S_f h,h>
  double lower_bound = 0.0;
  double upper_bound = 0.0;

  double slack() const { return std::min(lower_slack, upper_slack); }
};

/// f restricted to R(k) is a c-frame with bounds A ||k^+||^{-2} and B.
inline CorollaryReport corollary_details(const SampleField& f, const OperatorMatrix& k, const Tolerances& tol = {}) {
  const detail::RangeData d = detail::range_data(f, k, tol);
  const OperatorMatrix restricted = d.range_basis.adjoint() * d.frame_op * d.range_basis;
  CorollaryReport r;
  r.lower_bound = d.lower / (d.kdag_norm * d.kdag_norm);
  r.upper_bound = d.upper;
  r.lower_slack = detail::min_eigenvalue(restricted) - r.lower_bound;
  r.upper_slack = r.upper_bound - detail::max_eigenvalue(restricted);
  return r;
}

inline double corollary_bounds_check(const SampleField& f, const OperatorMatrix& k, const Tolerances& tol = {}) {
  return corollary_details(f, k, tol).slack();
}

struct DualPairReport {
  /// Residuals c1..c5, each normalized by max(||k||, sqrt(B_f B_g)).
  std::array<double, 5> residuals{};
  bool holds = false;
  /// Norm conditions under surjectivity of k (resp. k^*); absent when not applicable.
  std::optional<double> onto_k_residual;
  std::optional<double> onto_kstar_residual;
  /// 1 / B_f, the lower ck^*-frame bound guaranteed for g.
  double lower_bound_cert = 0.0;
  std::vector<std::string> notes;

  double max_residual() const { return *std::max_element(residuals.begin(), residuals.end()); }
};

namespace detail {

// Probe vectors e_j, e_j + e_l, e_j + i e_l (j < l). A sesquilinear form that
// vanishes on all of them vanishes identically.
inline std::vector<Vector> polarization_probes(Index n) {
  std::vector<Vector> probes;
  for (Index j = 0; j < n; ++j) probes.push_back(Vector::Unit(n, j));
  for (Index j = 0; j < n; ++j) {
    for (Index l = j + 1; l < n; ++l) {
      probes.push_back(Vector::Unit(n, j) + Vector::Unit(n, l));
      probes.push_back(Vector::Unit(n, j) + Complex(0.0, 1.0) * Vector::Unit(n, l));
    }
  }
  return probes;
}

}  // namespace detail

/// Checks that (f, g) is a ck-dual pair: f over H, g over H0, k : H0 -> H.
///
/// `h_basis` / `h0_basis` are the orthonormal bases used for c5;
/// the standard bases are used when they are empty.
inline DualPairReport verify_dual_pair(const SampleField& f, const SampleField& g, const OperatorMatrix& k,
                                       const Tolerances& tol = {}, const OperatorMatrix& h_basis = {},
                                       const OperatorMatrix& h0_basis = {}) {
  require_same_space(f.space(), g.space());
  if (k.rows() != f.dim() || k.cols() != g.dim()) {
    throw Error(ErrorCode::DimMismatch, "k must map dim g (" + std::to_string(g.dim()) + ") into dim f (" +
                                            std::to_string(f.dim()) + ")");
  }
  const Index n = f.dim();
  const Index n0 = g.dim();
  const OperatorMatrix e = h_basis.size() ? h_basis : identity(n);
  const OperatorMatrix gamma = h0_basis.size() ? h0_basis : identity(n0);
  if (e.rows() != n || e.cols() != n || gamma.rows() != n0 || gamma.cols() != n0) {
    throw Error(ErrorCode::DimMismatch, "orthonormal bases have the wrong shape");
  }
  const RealVector& w = f.space()->weights();

  const double bf = std::max(0.0, detail::max_eigenvalue(frame_operator(f)));
  const double bg = std::max(0.0, detail::max_eigenvalue(frame_operator(g)));
  const double knorm = op_norm(k);
  double scale = std::max(knorm, std::sqrt(bf * bg));
  if (scale == 0.0) scale = 1.0;

  DualPairReport r;

  // c1: k h0 = T_f(<h0, g>)
  for (Index j = 0; j < n0; ++j) {
    const Vector basis = Vector::Unit(n0, j);
    const Vector rec = synthesis(f, analysis(g, basis));
    r.residuals[0] = std::max(r.residuals[0], (k * basis - rec).norm() / scale);
  }
  // c2: k^* h = T_g(<h, f>)
  const OperatorMatrix kstar = k.adjoint();
  for (Index i = 0; i < n; ++i) {
    const Vector basis = Vector::Unit(n, i);
    const Vector rec = synthesis(g, analysis(f, basis));
    r.residuals[1] = std::max(r.residuals[1], (kstar * basis - rec).norm() / scale);
  }
  // c3: <k h0, h> = int <h0, g(x)> <f(x), h> dmu, as the sup over unit h, h0.
  OperatorMatrix phi = OperatorMatrix::Zero(n, n0);
  for (Index x = 0; x < f.atoms(); ++x) phi += w(x) * f.sample(x) * g.sample(x).adjoint();
  r.residuals[2] = op_norm(k - phi) / scale;
  // c4: <k^* h, h0> = int <h, f(x)> <g(x), h0> dmu
  OperatorMatrix psi = OperatorMatrix::Zero(n0, n);
  for (Index x = 0; x < f.atoms(); ++x) psi += w(x) * g.sample(x) * f.sample(x).adjoint();
  r.residuals[3] = op_norm(kstar - psi) / scale;
  // c5: entrywise on the orthonormal bases.
  for (Index i = 0; i < n; ++i) {
    const Vector ei = e.col(i);
    const Vector kei = kstar * ei;
    for (Index j = 0; j < n0; ++j) {
      const Vector gj = gamma.col(j);
      Complex integral{0.0, 0.0};
      for (Index x = 0; x < f.atoms(); ++x) {
        integral += w(x) * f.sample(x).dot(ei) * gj.dot(g.sample(x));
      }
      const Complex lhs = gj.dot(kei);
      r.residuals[4] = std::max(r.residuals[4], std::abs(lhs - integral) / scale);
    }
  }
  r.holds = r.max_residual() <= tol.check;

  // Surjectivity variants.
  const Index krank = ranked_svd(k, tol.rank).rank;
  const double qscale = std::max(knorm, 1e-300) * scale;
  if (krank == n && knorm > 0.0) {
    double worst = 0.0;
    for (const Vector& h0 : detail::polarization_probes(n0)) {
      const Vector kh0 = k * h0;
      Complex integral{0.0, 0.0};
      for (Index x = 0; x < f.atoms(); ++x) integral += w(x) * g.sample(x).dot(h0) * kh0.dot(f.sample(x));
      worst = std::max(worst, std::abs(kh0.squaredNorm() - integral) / (qscale * h0.squaredNorm()));
    }
    r.onto_k_residual = worst;
  }
  if (krank == n0 && knorm > 0.0) {
    double worst = 0.0;
    for (const Vector& h : detail::polarization_probes(n)) {
      const Vector ksh = kstar * h;
      Complex integral{0.0, 0.0};
      for (Index x = 0; x < f.atoms(); ++x) integral += w(x) * f.sample(x).dot(h) * ksh.dot(g.sample(x));
      worst = std::max(worst, std::abs(ksh.squaredNorm() - integral) / (qscale * h.squaredNorm()));
    }
    r.onto_kstar_residual = worst;
    r.notes.push_back("onto-k* condition evaluated with ||k^* h||^2 (squared form)");
  }

  r.lower_bound_cert = bf > 0.0 ? 1.0 / bf : std::numeric_limits<double>::infinity();
  return r;
}

struct CanonicalDual {
  SampleField projected_frame;  // P_{R(k)} f
  SampleField dual_field;       // k^* G f
  double lower_bound = 0.0;     // 1 / B
  double upper_bound = 0.0;     // ||k||^2 ||k^+||^2 / A
  /// Optimal ck^*-frame bounds of dual_field.
  double dual_lower = 0.0;
  double dual_upper = 0.0;
  /// dual_lower >= lower_bound - tol and dual_upper <= upper_bound + tol.
  bool bounds_hold = false;
  DualPairReport verification;
};

inline CanonicalDual canonical_dual(const SampleField& f, const OperatorMatrix& k, const Tolerances& tol = {}) {
  const detail::RangeData d = detail::range_data(f, k, tol);
  const OperatorMatrix proj = d.range_basis * d.range_basis.adjoint();
  SampleField projected = map_field(proj, f);
  SampleField dual = map_field(k.adjoint() * d.inverse, f);

  DualPairReport check = verify_dual_pair(projected, dual, k, tol);
  if (!check.holds) {
    throw Error(ErrorCode::CanonicalDualFailed,
                "constructed pair fails verification (max residual " + std::to_string(check.max_residual()) + ")");
  }

  const double knorm = d.ksvd.sigma_max();
  const OperatorMatrix sg = frame_operator(dual);
  const double dual_lower = max_psd_multiplier(sg, k.adjoint() * k, tol.rank, tol.check).value();
  const double dual_upper = std::max(0.0, detail::max_eigenvalue(sg));
  const double lower_bound = 1.0 / d.upper;
  const double upper_bound = knorm * knorm * d.kdag_norm * d.kdag_norm / d.lower;
  const bool bounds_hold = dual_lower >= lower_bound - tol.check * std::max(1.0, lower_bound) &&
                           dual_upper <= upper_bound + tol.check * std::max(1.0, upper_bound);
  return CanonicalDual{std::move(projected), std::move(dual), lower_bound, upper_bound,
                       dual_lower,           dual_upper,      bounds_hold, std::move(check)};
}

/// Margins of the lower frame inequalities implied by a dual pair:
///   g: int |<h0,g>|^2 >= B_f^{-1} ||k h0||^2,   f: int |<h,f>|^2 >= B_g^{-1} ||k^* h||^2.
/// Returns (margin_f, margin_g) as smallest eigenvalues of the differences.
inline std::pair<double, double> dual_frame_bounds_check(const SampleField& f, const SampleField& g,
                                                         const OperatorMatrix& k, const Tolerances& tol = {}) {
  const DualPairReport pair = verify_dual_pair(f, g, k, tol);
  if (!pair.holds) {
    throw Error(ErrorCode::NotADualPair, "max residual " + std::to_string(pair.max_residual()));
  }
  const OperatorMatrix sf = frame_operator(f);
  const OperatorMatrix sg = frame_operator(g);
  const double bf = std::max(0.0, detail::max_eigenvalue(sf));
  const double bg = std::max(0.0, detail::max_eigenvalue(sg));
  const OperatorMatrix kk = k * k.adjoint();
  const OperatorMatrix ksk = k.adjoint() * k;
  const double margin_g = detail::min_eigenvalue(bf > 0.0 ? OperatorMatrix(sg - ksk / bf) : sg);
  const double margin_f = detail::min_eigenvalue(bg > 0.0 ? OperatorMatrix(sf - kk / bg) : sf);
  return {margin_f, margin_g};
}

}  // namespace ckframe
