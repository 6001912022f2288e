#include "sintheta/linalg.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>

namespace sintheta {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw NumericalError(std::string(what) + ": non-finite entries");
  }
}

Matrix ConformalSvd::sigma2_rect() const {
  const Index n = rows(), m = cols();
  Matrix s2 = Matrix::Zero(n - r, m - r);
  for (Index i = 0; i < sigma2.size(); ++i) s2(i, i) = sigma2(i);
  return s2;
}

Matrix ConformalSvd::full_u() const {
  Matrix u(rows(), rows());
  u << u1, u2;
  return u;
}

Matrix ConformalSvd::full_v() const {
  Matrix v(cols(), cols());
  v << v1, v2;
  return v;
}

Matrix ConformalSvd::reconstruct() const {
  Matrix a = u1 * sigma1.asDiagonal() * v1.transpose();
  const Index l = sigma2.size();
  if (l > 0) {
    a.noalias() +=
        u2.leftCols(l) * sigma2.asDiagonal() * v2.leftCols(l).transpose();
  }
  return a;
}

namespace {

// Sign convention: the largest-magnitude entry of each U column is made
// positive (ties broken by lowest index). Paired columns flip the matching V
// column as well so the factorization is preserved; complement-only columns
// flip independently.
Index dominant_row(const Eigen::Ref<const Vector>& col) {
  Index best = 0;
  double best_abs = std::abs(col(0));
  for (Index i = 1; i < col.size(); ++i) {
    const double a = std::abs(col(i));
    if (a > best_abs) {
      best_abs = a;
      best = i;
    }
  }
  return best;
}

void apply_sign_convention(Matrix& u, Matrix& v, Index paired) {
  for (Index j = 0; j < u.cols(); ++j) {
    if (u(dominant_row(u.col(j)), j) < 0.0) {
      u.col(j) = -u.col(j);
      if (j < paired) v.col(j) = -v.col(j);
    }
  }
  for (Index j = paired; j < v.cols(); ++j) {
    if (v(dominant_row(v.col(j)), j) < 0.0) v.col(j) = -v.col(j);
  }
}

}  // namespace

ConformalSvd conformal_svd(const Matrix& a, Index split_rank) {
  const Index n = a.rows(), m = a.cols();
  if (n < 1 || m < 1) throw DimensionError("conformal_svd: empty matrix");
  require_finite(a, "conformal_svd");
  const Index minnm = std::min(n, m);
  if (split_rank < 1 || split_rank > minnm) {
    throw DimensionError("conformal_svd: split rank " +
                         std::to_string(split_rank) + " out of range for " +
                         std::to_string(n) + "x" + std::to_string(m));
  }

  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) {
    throw NumericalError("conformal_svd: decomposition did not converge");
  }
  Matrix u = svd.matrixU();
  Matrix v = svd.matrixV();
  Vector s = svd.singularValues();

  if (split_rank == minnm && s(minnm - 1) <= 0.0) {
    throw DimensionError(
        "conformal_svd: split rank equals min(n,m) but the matrix is rank "
        "deficient");
  }

  apply_sign_convention(u, v, minnm);

  ConformalSvd out;
  out.r = split_rank;
  out.u1 = u.leftCols(split_rank);
  out.u2 = u.rightCols(n - split_rank);
  out.v1 = v.leftCols(split_rank);
  out.v2 = v.rightCols(m - split_rank);
  out.sigma1 = s.head(split_rank);
  out.sigma2 = s.tail(minnm - split_rank);
  return out;
}

void validate_conformal_svd(const ConformalSvd& svd, const Matrix& a,
                            const SvdOptions& opts) {
  const Index n = svd.rows(), m = svd.cols();
  const Matrix u = svd.full_u();
  const Matrix v = svd.full_v();
  const double orth_u = (u.transpose() * u - Matrix::Identity(n, n)).norm();
  const double orth_v = (v.transpose() * v - Matrix::Identity(m, m)).norm();
  if (orth_u > opts.tol_orth || orth_v > opts.tol_orth) {
    throw NumericalError("conformal_svd: factors are not orthogonal");
  }
  for (Index i = 1; i < svd.sigma1.size(); ++i) {
    if (svd.sigma1(i) > svd.sigma1(i - 1))
      throw NumericalError("conformal_svd: sigma1 not nonincreasing");
  }
  for (Index i = 1; i < svd.sigma2.size(); ++i) {
    if (svd.sigma2(i) > svd.sigma2(i - 1))
      throw NumericalError("conformal_svd: sigma2 not nonincreasing");
  }
  if (svd.sigma2.size() > 0 && svd.sigma1(svd.r - 1) < svd.sigma2(0)) {
    throw NumericalError("conformal_svd: blocks out of order");
  }
  const double resid = (a - svd.reconstruct()).norm();
  if (resid > opts.tol_recon * std::max(a.norm(), 1e-300)) {
    throw NumericalError("conformal_svd: reconstruction residual too large");
  }
}

Vector PrincipalAngles::sines() const {
  Vector s(cosines.size());
  for (Index i = 0; i < cosines.size(); ++i) {
    s(i) = std::sin(std::acos(cosines(i)));
  }
  return s;
}

namespace {

void require_orthonormal(const Matrix& x, double tol, const char* what) {
  const Matrix g = x.transpose() * x;
  const double dev = (g - Matrix::Identity(x.cols(), x.cols())).norm();
  if (dev > tol) {
    throw OrthonormalityError(std::string(what) +
                              ": columns not orthonormal (deviation " +
                              std::to_string(dev) + ")");
  }
}

}  // namespace

PrincipalAngles principal_angles(const Matrix& x, const Matrix& y,
                                 double tol_orth) {
  if (x.rows() != y.rows()) {
    throw DimensionError("principal_angles: ambient dimensions differ");
  }
  if (x.cols() > y.cols()) {
    throw DimensionError("principal_angles: need dim(X) <= dim(Y)");
  }
  require_orthonormal(x, tol_orth, "principal_angles: X");
  require_orthonormal(y, tol_orth, "principal_angles: Y");
  Vector s = singular_values(x.transpose() * y);
  for (Index i = 0; i < s.size(); ++i) s(i) = std::clamp(s(i), 0.0, 1.0);
  PrincipalAngles out;
  out.cosines = s;
  return out;
}

Vector singular_values(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return Vector();
  return Eigen::BDCSVD<Matrix>(m).singularValues();
}

double spectral_norm(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  return Eigen::BDCSVD<Matrix>(m).singularValues()(0);
}

double schatten_norm(const Matrix& m, SchattenP p) {
  return p == SchattenP::inf ? spectral_norm(m) : m.norm();
}

Matrix orthonormal_complement(const Matrix& x) {
  const Index n = x.rows(), k = x.cols();
  if (k > n) throw DimensionError("orthonormal_complement: more cols than rows");
  Eigen::HouseholderQR<Matrix> qr(x);
  Matrix q = qr.householderQ();
  return q.rightCols(n - k);
}

double sin_theta_norm(const Matrix& x, const Matrix& y, SchattenP p,
                      double tol_orth) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw DimensionError("sin_theta_norm: shapes differ");
  }
  require_orthonormal(x, tol_orth, "sin_theta_norm: X");
  require_orthonormal(y, tol_orth, "sin_theta_norm: Y");
  const Matrix xp = orthonormal_complement(x);
  return schatten_norm(xp.transpose() * y, p);
}

double SinThetaEquivalents::max_value() const {
  return *std::max_element(values, values + 5);
}

double SinThetaEquivalents::max_spread() const {
  const auto [lo, hi] = std::minmax_element(values, values + 5);
  return *hi - *lo;
}

SinThetaEquivalents sin_theta_equivalents(const ConformalSvd& svd_a,
                                          const ConformalSvd& svd_b) {
  if (svd_a.rows() != svd_b.rows() || svd_a.cols() != svd_b.cols() ||
      svd_a.r != svd_b.r) {
    throw DimensionError("sin_theta_equivalents: factorizations incompatible");
  }
  const Matrix pu1 = svd_a.u1 * svd_a.u1.transpose();
  const Matrix pu2 = svd_a.u2 * svd_a.u2.transpose();
  const Matrix pbu1 = svd_b.u1 * svd_b.u1.transpose();
  const Matrix pbu2 = svd_b.u2 * svd_b.u2.transpose();
  SinThetaEquivalents out;
  out.values[0] = spectral_norm(svd_a.u1.transpose() * svd_b.u2);
  out.values[1] = spectral_norm(svd_a.u2.transpose() * svd_b.u1);
  out.values[2] = spectral_norm(pbu1 * pu2);
  out.values[3] = spectral_norm(pbu1 * pu2 - pbu2 * pu1);
  out.values[4] = spectral_norm(pbu1 - pu1);
  return out;
}

double two_to_infinity_norm(const Matrix& m) {
  require_finite(m, "two_to_infinity_norm");
  if (m.rows() == 0) return 0.0;
  return m.rowwise().norm().maxCoeff();
}

double default_delta_gap(const ConformalSvd& svd_a, double delta_gap_rel) {
  return delta_gap_rel * std::max(svd_a.sigma_max(), 1.0);
}

GapReport spectral_gap_check(const ConformalSvd& svd_a,
                             const ConformalSvd& svd_b, double delta_gap) {
  if (svd_a.r != svd_b.r) {
    throw DimensionError("spectral_gap_check: split ranks differ");
  }
  GapReport rep;
  rep.delta_gap = delta_gap;
  rep.gap12 = svd_a.sigma_r() - svd_b.sigma_r1();
  rep.gap21 = svd_b.sigma_r() - svd_a.sigma_r1();
  rep.ok12 = rep.gap12 > delta_gap;
  rep.ok21 = rep.gap21 > delta_gap;
  return rep;
}

}  // namespace sintheta
