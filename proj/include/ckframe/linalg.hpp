#pragma once

// Dense complex linear algebra kernel: adjoints, Hermitian eigensystems,
// rank-aware SVD, Moore-Penrose pseudoinverses, range projectors and the
// extremal multiplier of a PSD pencil. Everything here is a pure function of
// its arguments.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "ckframe/error.hpp"

namespace ckframe {

using Complex = std::complex<double>;
using OperatorMatrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Numerical tolerances shared by every module.
///
/// `rank` is the relative singular-value cutoff; `check` is the relative
/// residual tolerance used by verification routines.
struct Tolerances {
  double rank = 1e-10;
  double check = 1e-8;
};

/// Width of the band above the rank cutoff in which a singular value is
/// considered ambiguous.
inline constexpr double kRankGapFactor = 100.0;

inline bool all_finite(const OperatorMatrix& m) {
  return m.unaryExpr([](const Complex& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); })
      .all();
}

inline OperatorMatrix adjoint(const OperatorMatrix& m) { return m.adjoint(); }

inline OperatorMatrix identity(Index n) { return OperatorMatrix::Identity(n, n); }

/// Spectral norm (largest singular value). Zero for empty matrices.
inline double op_norm(const OperatorMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<OperatorMatrix> svd(m);
  return svd.singularValues()(0);
}

namespace detail {

// Flip the phase of each column so its first non-negligible entry is real
// positive. Makes eigen/SVD bases reproducible for a fixed input.
inline void normalize_column_phases(OperatorMatrix& basis) {
  for (Index j = 0; j < basis.cols(); ++j) {
    for (Index i = 0; i < basis.rows(); ++i) {
      const double mag = std::abs(basis(i, j));
      if (mag > 1e-8) {
        basis.col(j) *= std::conj(basis(i, j)) / mag;
        basis(i, j) = Complex(basis(i, j).real(), 0.0);
        break;
      }
    }
  }
}

inline double max_abs_vec(const RealVector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace detail

struct HermitianEig {
  RealVector eigenvalues;     // ascending
  OperatorMatrix eigenvectors;  // columns, orthonormal
};

/// Eigendecomposition of a Hermitian matrix with ascending eigenvalues.
/// Throws NotHermitian when ||M - M*|| > tol * max(1, ||M||).
inline HermitianEig hermitian_eig(const OperatorMatrix& m, double tol = 1e-10) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::NotHermitian, "matrix is not square");
  }
  const double asym = op_norm(m - m.adjoint());
  if (asym > tol * std::max(1.0, op_norm(m))) {
    std::ostringstream os;
    os << "||M - M*|| = " << asym;
    throw Error(ErrorCode::NotHermitian, os.str());
  }
  const OperatorMatrix sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<OperatorMatrix> solver(sym);
  HermitianEig out{solver.eigenvalues(), solver.eigenvectors()};
  detail::normalize_column_phases(out.eigenvectors);
  return out;
}

/// Thin SVD truncated at a relative cutoff. Columns beyond `rank` are kept so
/// callers can reach kernel and cokernel directions.
struct RankedSvd {
  OperatorMatrix u;
  RealVector singular_values;
  OperatorMatrix v;
  Index rank = 0;

  double sigma_max() const { return singular_values.size() == 0 ? 0.0 : singular_values(0); }
  /// Smallest retained singular value; zero when rank is zero.
  double sigma_min_nonzero() const { return rank == 0 ? 0.0 : singular_values(rank - 1); }
  OperatorMatrix range_basis() const { return u.leftCols(rank); }
};

/// SVD with numerical rank. Singular values <= rank_tol * sigma_max count as
/// zero; values inside (rank_tol, 100 * rank_tol) * sigma_max raise
/// RankAmbiguous.
inline RankedSvd ranked_svd(const OperatorMatrix& m, double rank_tol) {
  RankedSvd out;
  if (m.size() == 0) {
    out.u = OperatorMatrix::Zero(m.rows(), 0);
    out.v = OperatorMatrix::Zero(m.cols(), 0);
    return out;
  }
  Eigen::JacobiSVD<OperatorMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  out.u = svd.matrixU();
  out.v = svd.matrixV();
  out.singular_values = svd.singularValues();
  const double smax = out.sigma_max();
  if (smax == 0.0) return out;
  const double cut = rank_tol * smax;
  for (Index i = 0; i < out.singular_values.size(); ++i) {
    const double s = out.singular_values(i);
    if (s > cut && s < kRankGapFactor * cut) {
      std::ostringstream os;
      os << "singular value " << s << " lies within the ambiguity band (" << cut << ", "
         << kRankGapFactor * cut << ")";
      throw Error(ErrorCode::RankAmbiguous, os.str());
    }
    if (s > cut) out.rank = i + 1;
  }
  return out;
}

inline Index numerical_rank(const OperatorMatrix& m, double rank_tol) { return ranked_svd(m, rank_tol).rank; }

inline OperatorMatrix pseudoinverse(const OperatorMatrix& m, double rank_tol = 1e-10) {
  const RankedSvd svd = ranked_svd(m, rank_tol);
  OperatorMatrix out = OperatorMatrix::Zero(m.cols(), m.rows());
  for (Index i = 0; i < svd.rank; ++i) {
    out += svd.v.col(i) * (1.0 / svd.singular_values(i)) * svd.u.col(i).adjoint();
  }
  return out;
}

/// Orthogonal projector onto the column space of `m`.
inline OperatorMatrix range_projector(const OperatorMatrix& m, double rank_tol = 1e-10) {
  const OperatorMatrix basis = ranked_svd(m, rank_tol).range_basis();
  return basis * basis.adjoint();
}

/// Largest constant of a PSD pencil; may be the distinguished unbounded value.
class Multiplier {
 public:
  static Multiplier finite(double v) { return Multiplier(v, false); }
  static Multiplier unbounded() { return Multiplier(0.0, true); }

  bool is_unbounded() const { return unbounded_; }
  /// Finite value; +inf when unbounded.
  double value() const { return unbounded_ ? std::numeric_limits<double>::infinity() : value_; }

  friend bool operator==(const Multiplier&, const Multiplier&) = default;

 private:
  Multiplier(double v, bool u) : value_(v), unbounded_(u) {}
  double value_;
  bool unbounded_;
};

namespace detail {

inline HermitianEig checked_psd(const OperatorMatrix& m, double check_tol, const char* label) {
  HermitianEig eig;
  try {
    eig = hermitian_eig(m, check_tol);
  } catch (const Error& e) {
    throw Error(ErrorCode::NotPSD, std::string(label) + " is not Hermitian");
  }
  const double scale = detail::max_abs_vec(eig.eigenvalues);
  if (eig.eigenvalues.size() > 0 && eig.eigenvalues(0) < -check_tol * std::max(scale, 1e-300)) {
    std::ostringstream os;
    os << label << " has eigenvalue " << eig.eigenvalues(0);
    throw Error(ErrorCode::NotPSD, os.str());
  }
  return eig;
}

// Pseudo square-root inverse and range projector of a PSD matrix from its
// eigensystem, using the same relative cutoff and ambiguity band as
// ranked_svd (eigenvalues of a PSD matrix are its singular values).
struct PsdRoot {
  OperatorMatrix inv_sqrt;
  OperatorMatrix projector;
  Index rank = 0;
};

inline PsdRoot psd_pseudo_inv_sqrt(const HermitianEig& eig, double rank_tol) {
  const Index n = eig.eigenvalues.size();
  PsdRoot out{OperatorMatrix::Zero(n, n), OperatorMatrix::Zero(n, n), 0};
  const double lmax = max_abs_vec(eig.eigenvalues);
  if (lmax == 0.0) return out;
  const double cut = rank_tol * lmax;
  for (Index i = 0; i < n; ++i) {
    const double l = eig.eigenvalues(i);
    if (l > cut && l < kRankGapFactor * cut) {
      std::ostringstream os;
      os << "eigenvalue " << l << " lies within the ambiguity band";
      throw Error(ErrorCode::RankAmbiguous, os.str());
    }
    if (l > cut) {
      const auto v = eig.eigenvectors.col(i);
      out.inv_sqrt += v * (1.0 / std::sqrt(l)) * v.adjoint();
      out.projector += v * v.adjoint();
      ++out.rank;
    }
  }
  return out;
}

}  // namespace detail

/// Largest A >= 0 with S - A*C PSD, for Hermitian PSD S and C.
///
/// Returns 0 when range(C) is not contained in range(S), and the unbounded
/// value when C is the zero matrix. Otherwise A = 1 / lambda_max(S^{+/2} C S^{+/2}).
inline Multiplier max_psd_multiplier(const OperatorMatrix& s, const OperatorMatrix& c, double rank_tol = 1e-10,
                                     double check_tol = 1e-8) {
  if (s.rows() != s.cols() || c.rows() != c.cols() || s.rows() != c.rows()) {
    throw Error(ErrorCode::DimMismatch, "pencil operands must be square and of equal size");
  }
  const HermitianEig seig = detail::checked_psd(s, check_tol, "S");
  detail::checked_psd(c, check_tol, "C");
  if (c.cwiseAbs().maxCoeff() == 0.0) return Multiplier::unbounded();

  const detail::PsdRoot root = detail::psd_pseudo_inv_sqrt(seig, rank_tol);
  const OperatorMatrix outside = c - root.projector * c;
  if (op_norm(outside) > check_tol * op_norm(c)) return Multiplier::finite(0.0);

  const OperatorMatrix whitened = root.inv_sqrt * c * root.inv_sqrt;
  Eigen::SelfAdjointEigenSolver<OperatorMatrix> solver(0.5 * (whitened + whitened.adjoint()),
                                                       Eigen::EigenvaluesOnly);
  const double lmax = solver.eigenvalues().maxCoeff();
  if (!(lmax > 0.0)) return Multiplier::finite(0.0);
  return Multiplier::finite(1.0 / lmax);
}

}  // namespace ckframe
