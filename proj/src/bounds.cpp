#include "sintheta/bounds.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace sintheta {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void require_pair(const ConformalSvd& svd_a, const ConformalSvd& svd_b,
                  const char* what) {
  if (svd_a.rows() != svd_b.rows() || svd_a.cols() != svd_b.cols() ||
      svd_a.r != svd_b.r) {
    throw DimensionError(std::string(what) + ": factorizations incompatible");
  }
}

double spectral_of_diag_minus_identity(const Vector& s) {
  double worst = 0.0;
  for (Index i = 0; i < s.size(); ++i)
    worst = std::max(worst, std::abs(s(i) - 1.0));
  return worst;
}

AlignmentRotation polar_alignment(const Matrix& cross, AlignmentSource src) {
  Eigen::JacobiSVD<Matrix> svd(cross,
                               Eigen::ComputeFullU | Eigen::ComputeFullV);
  AlignmentRotation rot;
  rot.q = svd.matrixU() * svd.matrixV().transpose();
  rot.s_diag = svd.singularValues();
  rot.source = src;
  rot.s_minus_i = spectral_of_diag_minus_identity(rot.s_diag);
  return rot;
}

}  // namespace

BoundReport make_report(std::string name, double bound, double measured,
                        bool assumptions_met,
                        std::map<std::string, double> metadata) {
  BoundReport rep;
  rep.name = std::move(name);
  rep.bound = bound;
  rep.measured = measured;
  rep.assumptions_met = assumptions_met;
  // NaN bounds compare false; +inf bounds dominate anything.
  rep.dominated = measured <= bound * (1.0 + kDominanceSlack);
  rep.metadata = std::move(metadata);
  return rep;
}

double min_clamp(double num, double den, double cap) {
  if (num == 0.0) return 0.0;
  if (den <= 0.0) return cap;
  return std::min(num / den, cap);
}

BoundReport wedin_bound(const ConformalSvd& svd_a, const ConformalSvd& svd_b,
                        const Matrix& da) {
  require_pair(svd_a, svd_b, "wedin_bound");
  const double delta = svd_b.sigma_r() - svd_a.sigma_r1();
  const bool ok = delta > 0.0;
  const double sin_u = spectral_norm(svd_a.u2.transpose() * svd_b.u1);
  const double sin_v = spectral_norm(svd_a.v2.transpose() * svd_b.v1);
  const double measured = std::max(sin_u, sin_v);
  const double num = std::max(spectral_norm(da * svd_b.v1),
                              spectral_norm(svd_b.u1.transpose() * da));
  const double bound = ok ? num / delta : kNan;
  return make_report("wedin", bound, measured, ok,
                     {{"delta", delta},
                      {"sin_u", sin_u},
                      {"sin_v", sin_v},
                      {"noise_norm", spectral_norm(da)}});
}

OneSidedBounds one_sided_sin_theta_bounds(const ConformalSvd& svd_a,
                                          const ConformalSvd& svd_b,
                                          const Matrix& da) {
  require_pair(svd_a, svd_b, "one_sided_sin_theta_bounds");
  const GapReport gaps = spectral_gap_check(svd_a, svd_b, 0.0);
  const bool ok = gaps.both_ok();
  const double sa_r = svd_a.sigma_r(), sa_r1 = svd_a.sigma_r1();
  const double sb_r = svd_b.sigma_r(), sb_r1 = svd_b.sigma_r1();
  const double d21 = sb_r * sb_r - sa_r1 * sa_r1;  // positive iff gap21 > 0
  const double d12 = sa_r * sa_r - sb_r1 * sb_r1;

  const double da_vt1 = spectral_norm(da * svd_b.v1);
  const double dat_ut1 = spectral_norm(da.transpose() * svd_b.u1);
  const double da_v1 = spectral_norm(da * svd_a.v1);
  const double u1t_da = spectral_norm(svd_a.u1.transpose() * da);
  const double da_norm = spectral_norm(da);

  const double sin_u = spectral_norm(svd_a.u2.transpose() * svd_b.u1);
  const double sin_v = spectral_norm(svd_a.v2.transpose() * svd_b.v1);

  double bound_u = kNan, bound_v = kNan, bound_uni = kNan;
  if (ok) {
    bound_u = std::min((sb_r * da_vt1 + sa_r1 * dat_ut1) / d21,
                       (sa_r * da_v1 + sb_r1 * u1t_da) / d12);
    bound_v = std::min((sb_r * dat_ut1 + sa_r1 * da_vt1) / d21,
                       (sa_r * u1t_da + sb_r1 * da_v1) / d12);
    bound_uni = std::min(1.0 / gaps.gap12, 1.0 / gaps.gap21) * da_norm;
  }

  std::map<std::string, double> meta = {{"gap12", gaps.gap12},
                                        {"gap21", gaps.gap21},
                                        {"noise_norm", da_norm}};
  OneSidedBounds out;
  out.u = make_report("one_sided_u", bound_u, sin_u, ok, meta);
  out.v = make_report("one_sided_v", bound_v, sin_v, ok, meta);
  out.uniform = make_report("one_sided_uniform", bound_uni,
                            std::max(sin_u, sin_v), ok, meta);
  return out;
}

OneSidedBounds user_friendly_one_sided_bounds(const ConformalSvd& svd_a,
                                              const Matrix& da) {
  if (da.rows() != svd_a.rows() || da.cols() != svd_a.cols()) {
    throw DimensionError("user_friendly_one_sided_bounds: shape mismatch");
  }
  const double sa_r = svd_a.sigma_r(), sa_r1 = svd_a.sigma_r1();
  const double gap = sa_r - sa_r1;
  const double da_norm = spectral_norm(da);
  const AlphaBlocks al = alpha_blocks(da, svd_a);
  const double a12n = spectral_norm(al.a12);
  const double a21n = spectral_norm(al.a21);
  const double a22n = spectral_norm(al.a22);

  // Measured quantities come from the true factorization of A + dA.
  const Matrix atilde = svd_a.reconstruct() + da;
  const ConformalSvd svd_b = conformal_svd(atilde, svd_a.r);
  const double sin_u = spectral_norm(svd_a.u2.transpose() * svd_b.u1);
  const double sin_v = spectral_norm(svd_a.v2.transpose() * svd_b.v1);

  const double bound_uni = min_clamp(2.0 * da_norm, gap, 1.0);

  const bool pair_ok = 4.0 * da_norm <= gap && gap > 0.0;
  const double denom = sa_r * sa_r - sa_r1 * sa_r1;
  const double bound_u =
      pair_ok ? (8.0 / 3.0) * (sa_r * a21n + sa_r1 * a12n + a22n * a12n) / denom
              : kNan;
  const double bound_v =
      pair_ok ? (8.0 / 3.0) * (sa_r * a12n + sa_r1 * a21n + a22n * a21n) / denom
              : kNan;

  std::map<std::string, double> meta = {{"gap", gap},
                                        {"noise_norm", da_norm},
                                        {"a12", a12n},
                                        {"a21", a21n},
                                        {"a22", a22n}};
  OneSidedBounds out;
  out.uniform = make_report("user_friendly_uniform", bound_uni,
                            std::max(sin_u, sin_v), true, meta);
  out.u = make_report("user_friendly_u", bound_u, sin_u, pair_ok, meta);
  out.v = make_report("user_friendly_v", bound_v, sin_v, pair_ok, meta);
  return out;
}

SubspaceBounds subspace_projection_bound(const Matrix& a, Index split_rank,
                                         const Matrix& w, double tol_orth) {
  const Index m = a.cols(), r = split_rank;
  if (w.rows() != m || w.cols() != r) {
    throw DimensionError("subspace_projection_bound: W must be m x r");
  }
  const ConformalSvd svd_a = conformal_svd(a, r);
  const Matrix aw = a * w;
  const Vector s_aw = singular_values(aw);
  const double sr_aw = s_aw(r - 1);
  const double sr1_a = svd_a.sigma_r1();
  const bool ok = sr_aw > sr1_a;

  const Matrix w_perp = orthonormal_complement(w);
  Eigen::HouseholderQR<Matrix> qr(aw);
  const Matrix q_aw = Matrix(qr.householderQ()).leftCols(r);
  const Matrix proj_term = q_aw * (q_aw.transpose() * (a * w_perp));

  const double denom = sr_aw * sr_aw - sr1_a * sr1_a;
  const double meas_spec = sin_theta_norm(svd_a.v1, w, SchattenP::inf, tol_orth);
  const double meas_frob = sin_theta_norm(svd_a.v1, w, SchattenP::two, tol_orth);

  double bound_spec = kNan, bound_frob = kNan;
  if (ok) {
    bound_spec = min_clamp(sr_aw * spectral_norm(proj_term), denom, 1.0);
    bound_frob = min_clamp(sr_aw * proj_term.norm(), denom,
                           std::sqrt(static_cast<double>(r)));
  }
  std::map<std::string, double> meta = {{"sigma_r_aw", sr_aw},
                                        {"sigma_r1_a", sr1_a}};
  SubspaceBounds out;
  out.spectral =
      make_report("subspace_spectral", bound_spec, meas_spec, ok, meta);
  out.frobenius =
      make_report("subspace_frobenius", bound_frob, meas_frob, ok, meta);
  return out;
}

AlignmentRotation align_rotation_u(const ConformalSvd& svd_a,
                                   const ConformalSvd& svd_b) {
  require_pair(svd_a, svd_b, "align_rotation_u");
  AlignmentRotation rot = polar_alignment(
      svd_a.u1.transpose() * svd_b.u1, AlignmentSource::u_side);
  const double sin_u = spectral_norm(svd_a.u2.transpose() * svd_b.u1);
  rot.sin_theta_sq = sin_u * sin_u;
  return rot;
}

AlignmentRotation pca_align_rotation(const ConformalSvd& svd_a,
                                     const ConformalSvd& svd_b) {
  require_pair(svd_a, svd_b, "pca_align_rotation");
  AlignmentRotation rot = polar_alignment(
      svd_b.v1.transpose() * svd_a.v1, AlignmentSource::v_side);
  const double sin_v = spectral_norm(svd_a.v2.transpose() * svd_b.v1);
  rot.sin_theta_sq = sin_v * sin_v;
  return rot;
}

TwoToInfinityDecomposition two_to_infinity_decomposition(
    const ConformalSvd& svd_a, const ConformalSvd& svd_b, const Matrix& da) {
  require_pair(svd_a, svd_b, "two_to_infinity_decomposition");
  if (svd_b.sigma_r() <= 0.0) {
    throw NumericalError("two_to_infinity_decomposition: singular Sb1");
  }
  const Matrix inv_sb1 = svd_b.sigma1.cwiseInverse().asDiagonal();
  const Matrix pu2 = svd_a.u2 * svd_a.u2.transpose();
  const Matrix pv1 = svd_a.v1 * svd_a.v1.transpose();
  const Matrix pv2 = svd_a.v2 * svd_a.v2.transpose();

  Eigen::JacobiSVD<Matrix> cross(svd_a.u1.transpose() * svd_b.u1,
                                 Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix q1 = cross.matrixU();
  const Matrix q2 = cross.matrixV();
  const Vector s = cross.singularValues();

  TwoToInfinityDecomposition out;
  out.parts[0] = pu2 * da * pv1 * svd_b.v1 * inv_sb1;
  out.parts[1] = pu2 * da * pv2 * svd_b.v1 * inv_sb1;
  out.parts[2] = svd_a.u2 * svd_a.sigma2_rect() * svd_a.v2.transpose() *
                 svd_b.v1 * inv_sb1;
  out.parts[3] = svd_a.u1 * q1 *
                 (s - Vector::Ones(s.size())).asDiagonal() * q2.transpose();
  out.difference = svd_b.u1 - svd_a.u1 * (q1 * q2.transpose());
  const Matrix sum = out.parts[0] + out.parts[1] + out.parts[2] + out.parts[3];
  out.residual = (sum - out.difference).norm() / svd_b.u1.norm();
  return out;
}

BoundReport two_to_infinity_bound_thin(const ConformalSvd& svd_a,
                                       const Matrix& u_tilde1,
                                       double sigma_noise, double c1, double c2,
                                       double rank_tol) {
  if (u_tilde1.rows() != svd_a.rows() || u_tilde1.cols() != svd_a.r) {
    throw DimensionError("two_to_infinity_bound: Ut1 must be n x r");
  }
  const double n = static_cast<double>(svd_a.rows());
  const double nbar = static_cast<double>(std::max(svd_a.rows(), svd_a.cols()));
  const double r = static_cast<double>(svd_a.r);
  const double gap = svd_a.sigma_r() - svd_a.sigma_r1();
  const bool rank_r = svd_a.sigma_r1() <= rank_tol * svd_a.sigma_max();
  const bool ok = 21.0 * sigma_noise * std::sqrt(nbar) < gap;

  const double log_n = std::log(std::max(n, 2.0));
  const double rfac = rank_r ? std::sqrt(r) + std::sqrt(log_n)
                             : r + std::sqrt(r * log_n);
  const double u1_2inf = two_to_infinity_norm(svd_a.u1);
  const double bound =
      gap > 0.0 ? c1 * u1_2inf * sigma_noise * sigma_noise * nbar / (gap * gap) +
                      c2 * sigma_noise * rfac / gap
                : kNan;

  const AlignmentRotation rot = polar_alignment(
      svd_a.u1.transpose() * u_tilde1, AlignmentSource::u_side);
  const double measured = two_to_infinity_norm(u_tilde1 - svd_a.u1 * rot.q);
  return make_report("two_to_infinity", bound, measured, ok,
                     {{"gap", gap},
                      {"rank_r_branch", rank_r ? 1.0 : 0.0},
                      {"r_factor", rfac},
                      {"u1_2inf", u1_2inf},
                      {"premise_lhs", 21.0 * sigma_noise * std::sqrt(nbar)},
                      {"c1", c1},
                      {"c2", c2}});
}

BoundReport two_to_infinity_bound(const ConformalSvd& svd_a,
                                  const ConformalSvd& svd_b, const Matrix& da,
                                  double sigma_noise, double c1, double c2,
                                  double rank_tol) {
  require_pair(svd_a, svd_b, "two_to_infinity_bound");
  BoundReport rep = two_to_infinity_bound_thin(svd_a, svd_b.u1, sigma_noise,
                                               c1, c2, rank_tol);
  rep.metadata["noise_norm"] = spectral_norm(da);
  return rep;
}

Matrix svt_apply(const Matrix& a, Index keep_rank) {
  const Index minnm = std::min(a.rows(), a.cols());
  if (keep_rank < 0 || keep_rank > minnm) {
    throw DimensionError("svt_apply: rank out of range");
  }
  if (keep_rank == 0) return Matrix::Zero(a.rows(), a.cols());
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU().leftCols(keep_rank) *
         svd.singularValues().head(keep_rank).asDiagonal() *
         svd.matrixV().leftCols(keep_rank).transpose();
}

double svt_decomposition_identity(const ConformalSvd& svd_a,
                                  const ConformalSvd& svd_b, const Matrix& e) {
  require_pair(svd_a, svd_b, "svt_decomposition_identity");
  const Index n = svd_a.rows(), m = svd_a.cols(), r = svd_a.r;
  const Matrix a = svd_a.reconstruct();
  const Matrix atilde = a + e;
  const Matrix a_r = svd_a.u1 * svd_a.sigma1_diag() * svd_a.v1.transpose();
  const Matrix b_r = svd_b.u1 * svd_b.sigma1_diag() * svd_b.v1.transpose();

  Matrix block1 = Matrix::Zero(n, m);
  block1.topLeftCorner(r, r) = -svd_a.u1.transpose() * e * svd_b.v1;
  block1.topRightCorner(r, m - r) = -svd_a.u1.transpose() * e * svd_b.v2;
  block1.bottomLeftCorner(n - r, r) =
      -svd_a.u2.transpose() * a * svd_a.v2 * svd_a.v2.transpose() * svd_b.v1;

  Matrix block2 = Matrix::Zero(n, m);
  block2.topRightCorner(r, m - r) = svd_a.u1.transpose() * svd_b.u2 *
                                    svd_b.u2.transpose() * atilde * svd_b.v2;
  block2.bottomLeftCorner(n - r, r) = -svd_a.u2.transpose() * e * svd_b.v1;

  const Matrix rhs =
      svd_a.full_u() * (block1 + block2) * svd_b.full_v().transpose();
  return (rhs - (a_r - b_r)).norm() / std::max(1.0, a_r.norm());
}

double top_k_frobenius(const Matrix& m, Index k) {
  if (k <= 0 || m.size() == 0) return 0.0;
  const Vector s = singular_values(m);
  const Index take = std::min(k, s.size());
  return s.head(take).norm();
}

namespace {

double tail_top_k_frobenius(const Vector& sigma2, Index k) {
  const Index take = std::min(k, sigma2.size());
  return take > 0 ? sigma2.head(take).norm() : 0.0;
}

}  // namespace

SubspaceBounds svt_bounds(const ConformalSvd& svd_a, const ConformalSvd& svd_b,
                          const Matrix& e) {
  require_pair(svd_a, svd_b, "svt_bounds");
  const Index r = svd_a.r;
  const double e_norm = spectral_norm(e);
  const double gap = svd_a.sigma_r() - svd_a.sigma_r1();
  const double clamp = min_clamp(2.0 * e_norm, gap, 1.0);
  const double er_f = top_k_frobenius(e, r);
  const double s2r_f = tail_top_k_frobenius(svd_a.sigma2, r);

  const Matrix a_r = svd_a.u1 * svd_a.sigma1_diag() * svd_a.v1.transpose();
  const Matrix b_r = svd_b.u1 * svd_b.sigma1_diag() * svd_b.v1.transpose();
  const Matrix diff = a_r - b_r;

  const double bound_spec = 2.0 * e_norm + 2.0 * svd_a.sigma_r1() * clamp;
  const double inner = er_f + s2r_f * clamp;
  const double bound_frob = std::sqrt(2.0 * er_f * er_f + 3.0 * inner * inner);

  std::map<std::string, double> meta = {{"noise_norm", e_norm},
                                        {"gap", gap},
                                        {"clamp", clamp},
                                        {"er_frobenius", er_f},
                                        {"sigma2r_frobenius", s2r_f}};
  SubspaceBounds out;
  out.spectral = make_report("svt_spectral", bound_spec, spectral_norm(diff),
                             true, meta);
  out.frobenius =
      make_report("svt_frobenius", bound_frob, diff.norm(), true, meta);
  return out;
}

SubspaceBounds pca_bounds(const ConformalSvd& svd_a, const ConformalSvd& svd_b,
                          const Matrix& e) {
  require_pair(svd_a, svd_b, "pca_bounds");
  const Index r = svd_a.r;
  const double e_norm = spectral_norm(e);
  const double gap = svd_a.sigma_r() - svd_a.sigma_r1();
  const double clamp = min_clamp(2.0 * e_norm, gap, 1.0);
  const double er_f = top_k_frobenius(e, r);
  const double s2r_f = tail_top_k_frobenius(svd_a.sigma2, r);

  const AlignmentRotation rot = pca_align_rotation(svd_a, svd_b);
  const Matrix diff = svd_a.u1 * svd_a.sigma1_diag() -
                      svd_b.u1 * svd_b.sigma1_diag() * rot.q;

  const double bound_spec = 3.0 * e_norm + 3.0 * svd_a.sigma_r1() * clamp;
  const double inner = er_f + s2r_f * clamp;
  const double bound_frob =
      std::sqrt(2.0 * er_f * er_f + 3.0 * inner * inner) + inner;

  std::map<std::string, double> meta = {{"noise_norm", e_norm},
                                        {"gap", gap},
                                        {"clamp", clamp},
                                        {"er_frobenius", er_f},
                                        {"sigma2r_frobenius", s2r_f}};
  SubspaceBounds out;
  out.spectral = make_report("pca_spectral", bound_spec, spectral_norm(diff),
                             true, meta);
  out.frobenius =
      make_report("pca_frobenius", bound_frob, diff.norm(), true, meta);
  return out;
}

SqrtRotationFactor sqrt_rotation_factor(const Matrix& b, double tol) {
  if (b.rows() != b.cols()) {
    throw DimensionError("sqrt_rotation_factor: square input required");
  }
  Eigen::JacobiSVD<Matrix> svd(b, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector s = svd.singularValues();
  if (s.size() > 0 && s(0) > 1.0 + tol) {
    throw NumericalError("sqrt_rotation_factor: spectral norm " +
                         std::to_string(s(0)) + " exceeds 1");
  }
  SqrtRotationFactor out;
  out.sqrt_part = svd.matrixU() * s.asDiagonal() * svd.matrixU().transpose();
  out.rotation = svd.matrixU() * svd.matrixV().transpose();
  out.residual = (out.sqrt_part * out.rotation - b).norm();
  return out;
}

ClassicalChecks classical_inequality_checks(const Matrix& a, const Matrix& e) {
  if (a.rows() != e.rows() || a.cols() != e.cols()) {
    throw DimensionError("classical_inequality_checks: shape mismatch");
  }
  const Vector sa = singular_values(a);
  const Vector se = singular_values(e);
  const Vector sc = singular_values(a + e);
  const double e_norm = se.size() > 0 ? se(0) : 0.0;
  const Index minnm = sa.size();
  const double slack = 1e-10 * std::max({1.0, sa(0), e_norm});

  ClassicalChecks out;
  out.weyl_margin = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < minnm; ++i) {
    out.weyl_margin = std::min(out.weyl_margin, e_norm - std::abs(sa(i) - sc(i)));
  }
  out.weyl_ok = out.weyl_margin >= -slack;

  out.thompson_margin = std::numeric_limits<double>::infinity();
  out.power_sum_margin = std::numeric_limits<double>::infinity();
  for (Index r = 1; r < minnm; ++r) {
    const Index kmax = std::min(r, minnm - r);
    double lhs = 0.0, rhs = 0.0, lhs2 = 0.0, rhs2 = 0.0;
    for (Index k = 1; k <= kmax; ++k) {
      const double x = sc(r + k - 1);
      const double y = se(k - 1) + sa(r + k - 1);
      lhs += x;
      rhs += y;
      lhs2 += x * x;
      rhs2 += y * y;
      out.thompson_margin = std::min(out.thompson_margin, rhs - lhs);
    }
    out.power_sum_margin = std::min(out.power_sum_margin, rhs2 - lhs2);
  }
  if (minnm < 2) {
    out.thompson_margin = 0.0;
    out.power_sum_margin = 0.0;
  }
  out.thompson_ok = out.thompson_margin >= -slack;
  out.power_sum_ok = out.power_sum_margin >= -slack * std::max(1.0, sa(0));
  return out;
}

}  // namespace sintheta
