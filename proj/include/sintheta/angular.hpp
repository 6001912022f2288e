#pragma once

#include <vector>

#include "sintheta/linalg.hpp"

namespace sintheta {

/// Projected noise blocks alpha_ij = U_i^T dA V_j, partitioned at the split
/// rank of the clean factorization. These are the only noise statistics that
/// enter the bounds.
struct AlphaBlocks {
  Matrix a11, a12, a21, a22;

  /// [a11 a12; a21 a22], i.e. U^T dA V.
  Matrix assemble() const;
};

AlphaBlocks alpha_blocks(const Matrix& da, const ConformalSvd& svd_a);

/// Anti-diagonal reciprocal-gap blocks with entries 1/(sb_j^2 - sa_i^2),
/// where sa comes from the first factorization, sb from the second, indices
/// past min(n,m) read as zero. Diagonal blocks of the full reciprocal matrix
/// may be undefined, but these four always are once both cross gaps are
/// positive.
struct FBlocks {
  Matrix fu12;  // r x (n-r)
  Matrix fu21;  // (n-r) x r
  Matrix fv12;  // r x (m-r)
  Matrix fv21;  // (m-r) x r
};

FBlocks f_blocks(const ConformalSvd& svd_a, const ConformalSvd& svd_b,
                 double delta_gap);

/// The four sine-angle cross matrices between two conformal factorizations:
///   x = U1^T Ut2, y = U2^T Ut1, w = V1^T Vt2, z = V2^T Vt1.
/// ||x|| = ||y|| and ||w|| = ||z|| (each equals the respective sin Theta
/// spectral distance), and all four have spectral norm <= 1.
struct CrossTerms {
  Matrix x, y, w, z;
};

/// Literal products from the two factorizations; the oracle the formula
/// evaluations are checked against.
CrossTerms direct_cross_terms(const ConformalSvd& svd_a,
                              const ConformalSvd& svd_b);

/// The angular perturbation formulae: each cross term expressed as a Hadamard
/// product of an F block with first-order noise terms, e.g.
///   U1^T Ut2 = F_U^12 o (U1^T dA Vt2 St2^T + S1 V1^T dA^T Ut2).
/// Exact identities whenever the cross gaps are positive (gap12 for x and w,
/// gap21 for y and z); this evaluates all four, so both gaps are required.
CrossTerms exact_cross_terms(const ConformalSvd& svd_a,
                             const ConformalSvd& svd_b, const Matrix& da,
                             double delta_gap);

/// Worst absolute entry difference over the four blocks.
double max_abs_difference(const CrossTerms& a, const CrossTerms& b);

/// Absolute entry tolerance for the exact-formula identity:
///   base * max(1, 1/gap_min),
/// reflecting that the reciprocal-gap entries amplify rounding by 1/gap.
double identity_tolerance(double gap_min, double base = 1e-9);

/// Multiplicative factors of the Hadamard norm bounds, in variant order:
///   b1: sb_r / (sb_r^2 - sa_{r+1}^2)    for F_U^21 o (H Sb1)
///   b2: sa_{r+1} / (sb_r^2 - sa_{r+1}^2) for F_U^21 o (S2 H)
///   b3: sb_{r+1} / (sa_r^2 - sb_{r+1}^2) for F_U^12 o (H Sb2^T)
///   b4: sa_r / (sa_r^2 - sb_{r+1}^2)     for F_U^12 o (S1 H)
struct HadamardFactors {
  double b1, b2, b3, b4;
};

HadamardFactors hadamard_bound_factors(const ConformalSvd& svd_a,
                                       const ConformalSvd& svd_b);

enum class HadamardVariant { b1, b2, b3, b4 };

struct HadamardCheck {
  double lhs = 0.0;   // ||B_i||_p
  double rhs = 0.0;   // factor * ||H||_p
  bool dominated = false;
};

/// Evaluates B_i from H and reports ||B_i||_p against factor * ||H||_p.
/// Expected H shapes: b1 (n-r) x r, b2 (m-r) x r, b3 r x (m-r),
/// b4 r x (n-r).
HadamardCheck hadamard_bound_check(const Matrix& h, HadamardVariant which,
                                   const ConformalSvd& svd_a,
                                   const ConformalSvd& svd_b, SchattenP p);

/// The single-entry matrix that attains equality in the Hadamard bound:
/// eps in the top-right corner for b1/b2, bottom-left for b3/b4.
Matrix tightness_witness(HadamardVariant which, Index rows, Index cols,
                         double eps);

struct SeriesDiagnostics {
  double contraction = 0.0;    // certified upper bound on the series map norm
  int terms_used = 0;
  double tail_estimate = 0.0;
  std::vector<double> term_norms;  // paired norms sqrt(||t1||^2 + ||t2||^2)
};

struct SeriesCrossTerms {
  CrossTerms terms;
  SeriesDiagnostics yz;  // series for (y, z)
  SeriesDiagnostics xw;  // series for (x, w)
};

/// Neumann-series form of the cross terms: (y, z) = sum_k F^k (C1, C2) and
/// (x, w) = sum_k G^k (C3, C4). The contraction certificates are
/// ||a22|| / gap21 for F and ||a11|| / gap12 for G; both must be < 1.
/// Accumulation stops once c^{k+1}/(1-c) * ||(C1,C2)|| <= tol, else throws
/// TruncationError at k_max.
SeriesCrossTerms series_cross_terms(const ConformalSvd& svd_a,
                                    const ConformalSvd& svd_b,
                                    const Matrix& da, double tol = 1e-12,
                                    int k_max = 200, double delta_gap = 0.0);

struct LowRankSeries {
  Matrix y, z;
  SeriesDiagnostics diag;  // contraction = ||a22|| / sb_r; step factor is its square
};

/// Specialization of the series for exactly rank-r A:
///   y = sum_k (a22 a22^T)^k (a21 V1^T Vt1 Sb1^{-1} + a22 a12^T U1^T Ut1 Sb1^{-2}) Sb1^{-2k}
/// and the analogous expansion for z. Requires sigma_{r+1}(A) <= rank_tol *
/// sigma_1(A) and ||a22|| < sigma_r(B).
LowRankSeries low_rank_series_cross_terms(const ConformalSvd& svd_a,
                                          const ConformalSvd& svd_b,
                                          const Matrix& da, double tol = 1e-12,
                                          int k_max = 200,
                                          double rank_tol = 1e-12);

}  // namespace sintheta
