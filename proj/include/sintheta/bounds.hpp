#pragma once

#include <array>
#include <map>
#include <string>

#include "sintheta/angular.hpp"
#include "sintheta/linalg.hpp"

namespace sintheta {

/// Relative slack used by every dominance verdict:
/// dominated <=> measured <= bound * (1 + kDominanceSlack).
inline constexpr double kDominanceSlack = 1e-10;

/// One bound evaluation: the bound value, the measured quantity it must
/// dominate, and whether the theorem's assumptions held on this instance.
/// Assumption violations flag rather than throw so sweeps can chart where
/// bounds become vacuous.
struct BoundReport {
  std::string name;
  double bound = 0.0;
  double measured = 0.0;
  bool dominated = false;
  bool assumptions_met = false;
  std::map<std::string, double> metadata;
};

BoundReport make_report(std::string name, double bound, double measured,
                        bool assumptions_met,
                        std::map<std::string, double> metadata = {});

/// min(num/den, cap) with the degenerate cases resolved: a zero numerator
/// gives 0, a nonpositive denominator clamps to the cap.
double min_clamp(double num, double den, double cap);

/// Wedin's sin Theta theorem: with delta = sigma_r(B) - sigma_{r+1}(A) > 0,
///   max(sin U, sin V) <= max(||dA Vt1||, ||Ut1^T dA||) / delta.
BoundReport wedin_bound(const ConformalSvd& svd_a, const ConformalSvd& svd_b,
                        const Matrix& da);

struct OneSidedBounds {
  BoundReport u, v, uniform;
};

/// One-sided sin Theta bounds (min of the two cross-gap expressions per
/// side) plus the uniform min(1/gap12, 1/gap21) * ||dA|| bound.
OneSidedBounds one_sided_sin_theta_bounds(const ConformalSvd& svd_a,
                                          const ConformalSvd& svd_b,
                                          const Matrix& da);

/// User-friendly variants: no perturbed quantities appear in the bound
/// expressions, only clean-side singular values and alpha blocks. The
/// uniform bound min(2||dA||/(sigma_r - sigma_{r+1}), 1) is unconditional;
/// the 8/3-factor one-sided pair needs 4||dA|| <= sigma_r - sigma_{r+1}.
/// Measured values come from the true factorization of A + dA.
OneSidedBounds user_friendly_one_sided_bounds(const ConformalSvd& svd_a,
                                              const Matrix& da);

struct SubspaceBounds {
  BoundReport spectral, frobenius;
};

/// Distance from the leading right singular subspace of A to an arbitrary
/// r-dimensional subspace spanned by orthonormal W, assuming
/// sigma_r(AW) > sigma_{r+1}(A):
///   ||sin Theta(V1, W)||_p <= min(sigma_r(AW) ||P_{AW} A Wperp||_p /
///                                 (sigma_r(AW)^2 - sigma_{r+1}(A)^2), cap_p).
SubspaceBounds subspace_projection_bound(const Matrix& a, Index split_rank,
                                         const Matrix& w,
                                         double tol_orth = 1e-10);

/// Which cross product an alignment rotation was built from.
enum class AlignmentSource { u_side, v_side };

/// Orthogonal factor of the polar decomposition of the cross product
/// (U1^T Ut1 for the u side, Vt1^T V1 for the v side), plus its singular
/// values. s_minus_i = ||S - I|| and sin_theta_sq = ||sin Theta||^2 for the
/// matching subspace pair; s_minus_i never exceeds
/// sin_theta_sq.
struct AlignmentRotation {
  Matrix q;
  Vector s_diag;
  AlignmentSource source = AlignmentSource::u_side;
  double s_minus_i = 0.0;
  double sin_theta_sq = 0.0;
};

AlignmentRotation align_rotation_u(const ConformalSvd& svd_a,
                                   const ConformalSvd& svd_b);

/// V-side alignment used by the PCA bound (rotation from Vt1^T V1).
AlignmentRotation pca_align_rotation(const ConformalSvd& svd_a,
                                     const ConformalSvd& svd_b);

/// Exact four-term decomposition of Ut1 - U1 Q at the proof's rotation:
///   U2 U2^T dA V1 V1^T Vt1 Sb1^{-1} + U2 U2^T dA V2 V2^T Vt1 Sb1^{-1}
///   + U2 S2 V2^T Vt1 Sb1^{-1} + U1 Q1 (S - I) Q2^T.
struct TwoToInfinityDecomposition {
  std::array<Matrix, 4> parts;
  Matrix difference;   // Ut1 - U1 Q
  double residual;     // ||sum(parts) - difference||_F / ||Ut1||_F
};

TwoToInfinityDecomposition two_to_infinity_decomposition(
    const ConformalSvd& svd_a, const ConformalSvd& svd_b, const Matrix& da);

/// Gaussian-noise row-wise bound
///   c1 ||U1||_{2,inf} sigma^2 nbar / gap^2 + c2 sigma R(r,n) / gap
/// with R = sqrt(r) + sqrt(log n) for exactly rank-r A and r + sqrt(r log n)
/// otherwise; requires 21 sigma sqrt(nbar) < gap. The constants are free
/// parameters (calibrated empirically); measured is ||Ut1 - U1 Q||_{2,inf}
/// at the proof's rotation, which upper-bounds the minimum over rotations.
BoundReport two_to_infinity_bound(const ConformalSvd& svd_a,
                                  const ConformalSvd& svd_b, const Matrix& da,
                                  double sigma_noise, double c1 = 1.0,
                                  double c2 = 1.0, double rank_tol = 1e-12);

/// Same bound evaluated against only the perturbed leading block Ut1 (all
/// the measured side needs); avoids materializing complements at large n.
BoundReport two_to_infinity_bound_thin(const ConformalSvd& svd_a,
                                       const Matrix& u_tilde1,
                                       double sigma_noise, double c1 = 1.0,
                                       double c2 = 1.0,
                                       double rank_tol = 1e-12);

/// Hard singular value thresholding: keep the top r singular triplets.
Matrix svt_apply(const Matrix& a, Index keep_rank);

/// Residual of the two-block-matrix identity for A_r - B_r, relative to
/// max(1, ||A_r||_F). E is the additive noise with B = A + E.
double svt_decomposition_identity(const ConformalSvd& svd_a,
                                  const ConformalSvd& svd_b, const Matrix& e);

/// Thresholding stability: spectral and Frobenius bounds on ||A_r - B_r||,
/// unconditional thanks to the min clamps.
SubspaceBounds svt_bounds(const ConformalSvd& svd_a, const ConformalSvd& svd_b,
                          const Matrix& e);

/// PCA embedding stability: bounds on ||U1 S1 - Ut1 Sb1 Qhat|| at the
/// V-side alignment rotation.
SubspaceBounds pca_bounds(const ConformalSvd& svd_a, const ConformalSvd& svd_b,
                          const Matrix& e);

/// Square-root rotation identity: for ||B|| <= 1 with SVD B = Ub Sb Vb^T,
/// B equals sqrt(B B^T) Ub Vb^T. Returns the factors and the residual.
struct SqrtRotationFactor {
  Matrix sqrt_part;   // principal square root of B B^T
  Matrix rotation;    // Ub Vb^T
  double residual;    // ||sqrt_part * rotation - B||_F
};

SqrtRotationFactor sqrt_rotation_factor(const Matrix& b, double tol = 1e-10);

/// Classical inequality sanity checks on (A, E):
///  - Weyl: |sigma_i(A) - sigma_i(A+E)| <= ||E|| for all i;
///  - Thompson's specialization: partial sums of sigma_{r+i}(A+E) dominated
///    by partial sums of sigma_i(E) + sigma_{r+i}(A), for every split r;
///  - the power-sum inequality with p = 2 on the same sequences.
/// Margins are worst slack (negative = violation), relative slack 1e-10.
struct ClassicalChecks {
  bool weyl_ok = false;
  bool thompson_ok = false;
  bool power_sum_ok = false;
  double weyl_margin = 0.0;
  double thompson_margin = 0.0;
  double power_sum_margin = 0.0;
  bool all_ok() const { return weyl_ok && thompson_ok && power_sum_ok; }
};

ClassicalChecks classical_inequality_checks(const Matrix& a, const Matrix& e);

/// Frobenius norm of the top-k truncation of M (sqrt of the sum of its k
/// largest squared singular values).
double top_k_frobenius(const Matrix& m, Index k);

}  // namespace sintheta
