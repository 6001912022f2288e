#pragma once

#include <Eigen/Dense>

#include "sintheta/errors.hpp"

namespace sintheta {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Schatten-p norms used throughout; the formulas are stated for p in {2, inf}
/// only (Frobenius and spectral).
enum class SchattenP { two, inf };

struct SvdOptions {
  double tol_orth = 1e-10;
  double tol_recon = 1e-12;     // relative to ||A||_F
  double delta_gap_rel = 1e-8;  // delta_gap = delta_gap_rel * max(sigma_1, 1)
};

/// Full SVD of an n x m matrix partitioned at split rank r:
///   A = [U1 U2] diag(sigma) [V1 V2]^T
/// with U1: n x r, U2: n x (n-r), V1: m x r, V2: m x (m-r).
/// sigma1 holds the leading r singular values, sigma2 the remaining
/// min(n,m) - r. Complements are always materialized.
struct ConformalSvd {
  Index r = 0;
  Matrix u1, u2, v1, v2;
  Vector sigma1, sigma2;

  Index rows() const { return u1.rows(); }
  Index cols() const { return v1.rows(); }

  /// sigma_i with the zero-extension convention: indices past min(n,m)
  /// (and past the stored values) read as 0. 0-based.
  double sigma_or_zero(Index i) const {
    if (i < r) return sigma1(i);
    const Index j = i - r;
    return j < sigma2.size() ? sigma2(j) : 0.0;
  }

  double sigma_r() const { return sigma1(r - 1); }
  double sigma_r1() const { return sigma2.size() > 0 ? sigma2(0) : 0.0; }
  double sigma_max() const { return sigma1(0); }

  Matrix sigma1_diag() const { return sigma1.asDiagonal(); }

  /// Sigma2 as the (n-r) x (m-r) rectangular diagonal block.
  Matrix sigma2_rect() const;

  Matrix full_u() const;
  Matrix full_v() const;
  Matrix reconstruct() const;
};

/// Full conformal SVD at split rank r. Requires 1 <= r <= min(n,m)-1, or
/// r == min(n,m) when A has full rank (the exactly rank-r case). A
/// deterministic sign convention is applied: within each singular pair the
/// entry of largest magnitude of the U column is made positive (ties broken
/// by lowest index); unpaired complement columns are signed the same way
/// individually.
ConformalSvd conformal_svd(const Matrix& a, Index split_rank);

/// Checks the factorization invariants (orthogonality of [U1 U2], [V1 V2],
/// ordering of singular values, reconstruction residual). Throws
/// NumericalError on violation. Intended for tests and desk-scale inputs.
void validate_conformal_svd(const ConformalSvd& svd, const Matrix& a,
                            const SvdOptions& opts = {});

struct PrincipalAngles {
  Vector cosines;  // descending, clamped to [0, 1]
  Vector sines() const;
};

/// Principal angles between span(X) and span(Y) for orthonormal X (n x k)
/// and Y (n x l), k <= l: cosines are the singular values of X^T Y.
PrincipalAngles principal_angles(const Matrix& x, const Matrix& y,
                                 double tol_orth = 1e-10);

double spectral_norm(const Matrix& m);
double schatten_norm(const Matrix& m, SchattenP p);

/// Orthonormal basis of the orthogonal complement of span(X); X must have
/// orthonormal columns. Returns an n x (n-k) matrix.
Matrix orthonormal_complement(const Matrix& x);

/// ||sin Theta(X, Y)||_p = ||X_perp^T Y||_p for orthonormal n x r bases.
double sin_theta_norm(const Matrix& x, const Matrix& y, SchattenP p,
                      double tol_orth = 1e-10);

/// The five equivalent expressions of the spectral sin Theta distance between
/// the leading left singular subspaces, in the order
///   ||U1^T Ut2||, ||U2^T Ut1||, ||P_{Ut1} P_{U2}||,
///   ||P_{Ut1} P_{U2} - P_{Ut2} P_{U1}||, ||Ut1 Ut1^T - U1 U1^T||.
/// Used as a cross-validation oracle; all five agree for exact factorizations.
struct SinThetaEquivalents {
  double values[5];
  double max_value() const;
  double max_spread() const;
};

SinThetaEquivalents sin_theta_equivalents(const ConformalSvd& svd_a,
                                          const ConformalSvd& svd_b);

/// Maximum Euclidean row norm.
double two_to_infinity_norm(const Matrix& m);

/// Cross gaps between the two factorizations at their shared split rank.
/// gap12 = sigma_r(A) - sigma_{r+1}(B) guards the F^{12} blocks,
/// gap21 = sigma_r(B) - sigma_{r+1}(A) guards the F^{21} blocks.
/// Zero-extension applies to indices past min(n,m). Violations are reported,
/// not thrown.
struct GapReport {
  double gap12 = 0.0;
  double gap21 = 0.0;
  double delta_gap = 0.0;
  bool ok12 = false;
  bool ok21 = false;
  bool both_ok() const { return ok12 && ok21; }
  double min_gap() const { return gap12 < gap21 ? gap12 : gap21; }
};

double default_delta_gap(const ConformalSvd& svd_a,
                         double delta_gap_rel = 1e-8);

GapReport spectral_gap_check(const ConformalSvd& svd_a,
                             const ConformalSvd& svd_b, double delta_gap);

/// Singular values of an arbitrary matrix, descending.
Vector singular_values(const Matrix& m);

void require_finite(const Matrix& m, const char* what);

}  // namespace sintheta
