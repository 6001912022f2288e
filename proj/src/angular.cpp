#include "sintheta/angular.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace sintheta {

namespace {

void require_compatible(const ConformalSvd& svd_a, const ConformalSvd& svd_b,
                        const char* what) {
  if (svd_a.rows() != svd_b.rows() || svd_a.cols() != svd_b.cols() ||
      svd_a.r != svd_b.r) {
    throw DimensionError(std::string(what) + ": factorizations incompatible");
  }
}

void require_noise_shape(const ConformalSvd& svd_a, const Matrix& da,
                         const char* what) {
  if (da.rows() != svd_a.rows() || da.cols() != svd_a.cols()) {
    throw DimensionError(std::string(what) + ": noise shape mismatch");
  }
  require_finite(da, what);
}

GapReport checked_gaps(const ConformalSvd& svd_a, const ConformalSvd& svd_b,
                       double delta_gap, const char* what) {
  const GapReport gaps = spectral_gap_check(svd_a, svd_b, delta_gap);
  if (!gaps.both_ok()) {
    throw GapError(std::string(what) + ": cross gap not above " +
                   std::to_string(delta_gap) + " (gap12 = " +
                   std::to_string(gaps.gap12) + ", gap21 = " +
                   std::to_string(gaps.gap21) + ")");
  }
  return gaps;
}

double paired_norm(const Matrix& t1, const Matrix& t2) {
  return std::hypot(spectral_norm(t1), spectral_norm(t2));
}

}  // namespace

Matrix AlphaBlocks::assemble() const {
  Matrix full(a11.rows() + a21.rows(), a11.cols() + a12.cols());
  full << a11, a12, a21, a22;
  return full;
}

AlphaBlocks alpha_blocks(const Matrix& da, const ConformalSvd& svd_a) {
  require_noise_shape(svd_a, da, "alpha_blocks");
  AlphaBlocks out;
  out.a11 = svd_a.u1.transpose() * da * svd_a.v1;
  out.a12 = svd_a.u1.transpose() * da * svd_a.v2;
  out.a21 = svd_a.u2.transpose() * da * svd_a.v1;
  out.a22 = svd_a.u2.transpose() * da * svd_a.v2;
  return out;
}

FBlocks f_blocks(const ConformalSvd& svd_a, const ConformalSvd& svd_b,
                 double delta_gap) {
  require_compatible(svd_a, svd_b, "f_blocks");
  checked_gaps(svd_a, svd_b, delta_gap, "f_blocks");
  const Index n = svd_a.rows(), m = svd_a.cols(), r = svd_a.r;
  FBlocks f;
  f.fu12.resize(r, n - r);
  f.fv12.resize(r, m - r);
  for (Index i = 0; i < r; ++i) {
    const double sa2 = svd_a.sigma_or_zero(i) * svd_a.sigma_or_zero(i);
    for (Index j = 0; j < n - r; ++j) {
      const double sb = svd_b.sigma_or_zero(r + j);
      f.fu12(i, j) = 1.0 / (sb * sb - sa2);
    }
    for (Index j = 0; j < m - r; ++j) {
      const double sb = svd_b.sigma_or_zero(r + j);
      f.fv12(i, j) = 1.0 / (sb * sb - sa2);
    }
  }
  f.fu21.resize(n - r, r);
  f.fv21.resize(m - r, r);
  for (Index j = 0; j < r; ++j) {
    const double sb2 = svd_b.sigma_or_zero(j) * svd_b.sigma_or_zero(j);
    for (Index i = 0; i < n - r; ++i) {
      const double sa = svd_a.sigma_or_zero(r + i);
      f.fu21(i, j) = 1.0 / (sb2 - sa * sa);
    }
    for (Index i = 0; i < m - r; ++i) {
      const double sa = svd_a.sigma_or_zero(r + i);
      f.fv21(i, j) = 1.0 / (sb2 - sa * sa);
    }
  }
  return f;
}

CrossTerms direct_cross_terms(const ConformalSvd& svd_a,
                              const ConformalSvd& svd_b) {
  require_compatible(svd_a, svd_b, "direct_cross_terms");
  CrossTerms t;
  t.x = svd_a.u1.transpose() * svd_b.u2;
  t.y = svd_a.u2.transpose() * svd_b.u1;
  t.w = svd_a.v1.transpose() * svd_b.v2;
  t.z = svd_a.v2.transpose() * svd_b.v1;
  return t;
}

CrossTerms exact_cross_terms(const ConformalSvd& svd_a,
                             const ConformalSvd& svd_b, const Matrix& da,
                             double delta_gap) {
  require_compatible(svd_a, svd_b, "exact_cross_terms");
  require_noise_shape(svd_a, da, "exact_cross_terms");
  const FBlocks f = f_blocks(svd_a, svd_b, delta_gap);
  const Matrix s1 = svd_a.sigma1_diag();
  const Matrix s2 = svd_a.sigma2_rect();
  const Matrix sb1 = svd_b.sigma1_diag();
  const Matrix sb2 = svd_b.sigma2_rect();

  CrossTerms t;
  t.x = f.fu12.cwiseProduct(svd_a.u1.transpose() * da * svd_b.v2 *
                                sb2.transpose() +
                            s1 * svd_a.v1.transpose() * da.transpose() *
                                svd_b.u2);
  t.y = f.fu21.cwiseProduct(svd_a.u2.transpose() * da * svd_b.v1 *
                                sb1.transpose() +
                            s2 * svd_a.v2.transpose() * da.transpose() *
                                svd_b.u1);
  t.w = f.fv12.cwiseProduct(s1.transpose() * svd_a.u1.transpose() * da *
                                svd_b.v2 +
                            svd_a.v1.transpose() * da.transpose() * svd_b.u2 *
                                sb2);
  t.z = f.fv21.cwiseProduct(s2.transpose() * svd_a.u2.transpose() * da *
                                svd_b.v1 +
                            svd_a.v2.transpose() * da.transpose() * svd_b.u1 *
                                sb1);
  return t;
}

double max_abs_difference(const CrossTerms& a, const CrossTerms& b) {
  auto block = [](const Matrix& p, const Matrix& q) {
    return p.size() == 0 ? 0.0 : (p - q).cwiseAbs().maxCoeff();
  };
  double worst = block(a.x, b.x);
  worst = std::max(worst, block(a.y, b.y));
  worst = std::max(worst, block(a.w, b.w));
  worst = std::max(worst, block(a.z, b.z));
  return worst;
}

double identity_tolerance(double gap_min, double base) {
  return base * std::max(1.0, 1.0 / gap_min);
}

HadamardFactors hadamard_bound_factors(const ConformalSvd& svd_a,
                                       const ConformalSvd& svd_b) {
  const GapReport gaps = checked_gaps(svd_a, svd_b, 0.0, "hadamard_bound_factors");
  (void)gaps;
  const double sa_r = svd_a.sigma_r(), sa_r1 = svd_a.sigma_r1();
  const double sb_r = svd_b.sigma_r(), sb_r1 = svd_b.sigma_r1();
  HadamardFactors f;
  f.b1 = sb_r / (sb_r * sb_r - sa_r1 * sa_r1);
  f.b2 = sa_r1 / (sb_r * sb_r - sa_r1 * sa_r1);
  f.b3 = sb_r1 / (sa_r * sa_r - sb_r1 * sb_r1);
  f.b4 = sa_r / (sa_r * sa_r - sb_r1 * sb_r1);
  return f;
}

HadamardCheck hadamard_bound_check(const Matrix& h, HadamardVariant which,
                                   const ConformalSvd& svd_a,
                                   const ConformalSvd& svd_b, SchattenP p) {
  require_compatible(svd_a, svd_b, "hadamard_bound_check");
  const Index n = svd_a.rows(), m = svd_a.cols(), r = svd_a.r;
  const FBlocks f = f_blocks(svd_a, svd_b, 0.0);
  const HadamardFactors factors = hadamard_bound_factors(svd_a, svd_b);

  Matrix b;
  double factor = 0.0;
  switch (which) {
    case HadamardVariant::b1:
      if (h.rows() != n - r || h.cols() != r)
        throw DimensionError("hadamard_bound_check: b1 expects (n-r) x r");
      b = f.fu21.cwiseProduct(h * svd_b.sigma1_diag());
      factor = factors.b1;
      break;
    case HadamardVariant::b2:
      if (h.rows() != m - r || h.cols() != r)
        throw DimensionError("hadamard_bound_check: b2 expects (m-r) x r");
      b = f.fu21.cwiseProduct(svd_a.sigma2_rect() * h);
      factor = factors.b2;
      break;
    case HadamardVariant::b3:
      if (h.rows() != r || h.cols() != m - r)
        throw DimensionError("hadamard_bound_check: b3 expects r x (m-r)");
      b = f.fu12.cwiseProduct(h * svd_b.sigma2_rect().transpose());
      factor = factors.b3;
      break;
    case HadamardVariant::b4:
      if (h.rows() != r || h.cols() != n - r)
        throw DimensionError("hadamard_bound_check: b4 expects r x (n-r)");
      b = f.fu12.cwiseProduct(svd_a.sigma1_diag() * h);
      factor = factors.b4;
      break;
  }
  HadamardCheck check;
  check.lhs = schatten_norm(b, p);
  check.rhs = factor * schatten_norm(h, p);
  check.dominated = check.lhs <= check.rhs * (1.0 + 1e-10);
  return check;
}

Matrix tightness_witness(HadamardVariant which, Index rows, Index cols,
                         double eps) {
  if (eps <= 0.0) throw DimensionError("tightness_witness: eps must be > 0");
  if (rows < 1 || cols < 1)
    throw DimensionError("tightness_witness: empty shape");
  Matrix h = Matrix::Zero(rows, cols);
  if (which == HadamardVariant::b1 || which == HadamardVariant::b2) {
    h(0, cols - 1) = eps;
  } else {
    h(rows - 1, 0) = eps;
  }
  return h;
}

namespace {

struct PairSeriesResult {
  Matrix first, second;
  SeriesDiagnostics diag;
};

// Sums sum_k map^k(seed) with a geometric tail certificate
// c^{k+1}/(1-c) * ||seed|| <= tol.
template <typename MapFn>
PairSeriesResult run_pair_series(Matrix t1, Matrix t2, double contraction,
                                 double tol, int k_max, MapFn&& step,
                                 const char* what) {
  if (!(contraction < 1.0)) {
    throw NonContractionError(std::string(what) +
                              ": contraction certificate " +
                              std::to_string(contraction) + " >= 1");
  }
  PairSeriesResult out;
  out.diag.contraction = contraction;
  const double seed_norm = paired_norm(t1, t2);
  out.first = t1;
  out.second = t2;
  out.diag.term_norms.push_back(seed_norm);
  out.diag.terms_used = 1;
  double tail = contraction / (1.0 - contraction) * seed_norm;
  int k = 0;
  while (tail > tol) {
    if (k >= k_max) {
      throw TruncationError(std::string(what) + ": tail estimate " +
                            std::to_string(tail) + " > tol after " +
                            std::to_string(k_max) + " terms");
    }
    Matrix n1, n2;
    step(t1, t2, n1, n2);
    t1.swap(n1);
    t2.swap(n2);
    out.first += t1;
    out.second += t2;
    out.diag.term_norms.push_back(paired_norm(t1, t2));
    ++out.diag.terms_used;
    ++k;
    tail = std::pow(contraction, k + 1) / (1.0 - contraction) * seed_norm;
  }
  out.diag.tail_estimate = tail;
  return out;
}

}  // namespace

SeriesCrossTerms series_cross_terms(const ConformalSvd& svd_a,
                                    const ConformalSvd& svd_b,
                                    const Matrix& da, double tol, int k_max,
                                    double delta_gap) {
  require_compatible(svd_a, svd_b, "series_cross_terms");
  require_noise_shape(svd_a, da, "series_cross_terms");
  const GapReport gaps = checked_gaps(svd_a, svd_b, delta_gap,
                                      "series_cross_terms");
  const FBlocks f = f_blocks(svd_a, svd_b, delta_gap);
  const AlphaBlocks al = alpha_blocks(da, svd_a);

  const Matrix s1 = svd_a.sigma1_diag();
  const Matrix s2 = svd_a.sigma2_rect();
  const Matrix sb1 = svd_b.sigma1_diag();
  const Matrix sb2 = svd_b.sigma2_rect();
  const Matrix u1tub1 = svd_a.u1.transpose() * svd_b.u1;
  const Matrix v1tvb1 = svd_a.v1.transpose() * svd_b.v1;
  const Matrix u2tub2 = svd_a.u2.transpose() * svd_b.u2;
  const Matrix v2tvb2 = svd_a.v2.transpose() * svd_b.v2;

  const Matrix c1 = f.fu21.cwiseProduct(s2 * al.a12.transpose() * u1tub1 +
                                        al.a21 * v1tvb1 * sb1.transpose());
  const Matrix c2 = f.fv21.cwiseProduct(al.a12.transpose() * u1tub1 * sb1 +
                                        s2.transpose() * al.a21 * v1tvb1);
  const Matrix c3 = f.fu12.cwiseProduct(al.a12 * v2tvb2 * sb2.transpose() +
                                        s1 * al.a21.transpose() * u2tub2);
  const Matrix c4 = f.fv12.cwiseProduct(s1.transpose() * al.a12 * v2tvb2 +
                                        al.a21.transpose() * u2tub2 * sb2);

  const double contraction_f = spectral_norm(al.a22) / gaps.gap21;
  const double contraction_g = spectral_norm(al.a11) / gaps.gap12;

  auto f_step = [&](const Matrix& p1, const Matrix& p2, Matrix& o1,
                    Matrix& o2) {
    o1 = f.fu21.cwiseProduct(s2 * al.a22.transpose() * p1 +
                             al.a22 * p2 * sb1.transpose());
    o2 = f.fv21.cwiseProduct(al.a22.transpose() * p1 * sb1 +
                             s2.transpose() * al.a22 * p2);
  };
  auto g_step = [&](const Matrix& p3, const Matrix& p4, Matrix& o3,
                    Matrix& o4) {
    o3 = f.fu12.cwiseProduct(al.a11 * p4 * sb2.transpose() +
                             s1 * al.a11.transpose() * p3);
    o4 = f.fv12.cwiseProduct(s1.transpose() * al.a11 * p4 +
                             al.a11.transpose() * p3 * sb2);
  };

  PairSeriesResult yz = run_pair_series(c1, c2, contraction_f, tol, k_max,
                                        f_step, "series_cross_terms[F]");
  PairSeriesResult xw = run_pair_series(c3, c4, contraction_g, tol, k_max,
                                        g_step, "series_cross_terms[G]");

  SeriesCrossTerms out;
  out.terms.y = std::move(yz.first);
  out.terms.z = std::move(yz.second);
  out.terms.x = std::move(xw.first);
  out.terms.w = std::move(xw.second);
  out.yz = std::move(yz.diag);
  out.xw = std::move(xw.diag);
  return out;
}

LowRankSeries low_rank_series_cross_terms(const ConformalSvd& svd_a,
                                          const ConformalSvd& svd_b,
                                          const Matrix& da, double tol,
                                          int k_max, double rank_tol) {
  require_compatible(svd_a, svd_b, "low_rank_series_cross_terms");
  require_noise_shape(svd_a, da, "low_rank_series_cross_terms");
  if (svd_a.sigma_r1() > rank_tol * svd_a.sigma_max()) {
    throw RankError(
        "low_rank_series_cross_terms: input is not exactly rank r (sigma_{r+1}"
        " = " +
        std::to_string(svd_a.sigma_r1()) + ")");
  }
  const AlphaBlocks al = alpha_blocks(da, svd_a);
  const double sb_r = svd_b.sigma_r();
  const double lambda = sb_r > 0.0 ? spectral_norm(al.a22) / sb_r
                                   : std::numeric_limits<double>::infinity();
  if (!(lambda < 1.0)) {
    throw NonContractionError(
        "low_rank_series_cross_terms: ||a22|| / sigma_r(B) = " +
        std::to_string(lambda) + " >= 1");
  }

  const Matrix u1tub1 = svd_a.u1.transpose() * svd_b.u1;
  const Matrix v1tvb1 = svd_a.v1.transpose() * svd_b.v1;
  const Matrix inv_sb1 = svd_b.sigma1.cwiseInverse().asDiagonal();
  const Matrix inv_sb1_sq = inv_sb1 * inv_sb1;
  const Matrix left_y = al.a22 * al.a22.transpose();
  const Matrix left_z = al.a22.transpose() * al.a22;

  LowRankSeries out;
  out.diag.contraction = lambda;
  const double step_factor = lambda * lambda;

  Matrix ty = al.a21 * v1tvb1 * inv_sb1 +
              al.a22 * al.a12.transpose() * u1tub1 * inv_sb1_sq;
  Matrix tz = al.a12.transpose() * u1tub1 * inv_sb1 +
              al.a22.transpose() * al.a21 * v1tvb1 * inv_sb1_sq;
  out.y = ty;
  out.z = tz;
  const double seed_norm = paired_norm(ty, tz);
  out.diag.term_norms.push_back(seed_norm);
  out.diag.terms_used = 1;
  double tail = step_factor / (1.0 - step_factor) * seed_norm;
  int k = 0;
  while (tail > tol) {
    if (k >= k_max) {
      throw TruncationError("low_rank_series_cross_terms: tail estimate " +
                            std::to_string(tail) + " > tol after " +
                            std::to_string(k_max) + " terms");
    }
    ty = left_y * ty * inv_sb1_sq;
    tz = left_z * tz * inv_sb1_sq;
    out.y += ty;
    out.z += tz;
    out.diag.term_norms.push_back(paired_norm(ty, tz));
    ++out.diag.terms_used;
    ++k;
    tail = std::pow(step_factor, k + 1) / (1.0 - step_factor) * seed_norm;
  }
  out.diag.tail_estimate = tail;
  return out;
}

}  // namespace sintheta
