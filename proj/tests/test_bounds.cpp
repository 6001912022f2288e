#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sintheta/bounds.hpp"
#include "sintheta/rng.hpp"
#include "test_support.hpp"

using namespace sintheta;
using namespace sintheta::testing;

namespace {

struct PairUnderTest {
  TestInstance inst;
  ConformalSvd svd_b;
};

PairUnderTest make_pair(Index n, Index m, Index r, TailMode tail,
                        double noise_fraction, std::uint64_t seed) {
  PairUnderTest p{random_instance(n, m, r, tail, noise_fraction, seed), {}};
  p.svd_b = conformal_svd(p.inst.atilde, r);
  return p;
}

}  // namespace

TEST_CASE("min_clamp branches") {
  CHECK(min_clamp(0.0, 0.0, 1.0) == 0.0);
  CHECK(min_clamp(2.0, 0.0, 1.0) == 1.0);
  CHECK(min_clamp(1.0, 4.0, 1.0) == 0.25);
  CHECK(min_clamp(8.0, 4.0, 1.0) == 1.0);
  CHECK(min_clamp(8.0, 4.0, 1.5) == 1.5);
}

TEST_CASE("BoundReport dominance definition") {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const double bound = std::abs(rng.normal());
    const double measured = std::abs(rng.normal());
    const BoundReport rep = make_report("x", bound, measured, true);
    CHECK(rep.dominated == (measured <= bound * (1.0 + 1e-10)));
  }
  CHECK_FALSE(make_report("nan", std::nan(""), 0.0, false).dominated);
}

TEST_CASE("wedin bound") {
  SUBCASE("zero noise") {
    const PairUnderTest p = make_pair(6, 5, 2, TailMode::geometric, 0.0, 10);
    const BoundReport rep = wedin_bound(p.inst.planted.svd, p.svd_b, p.inst.da);
    CHECK(rep.assumptions_met);
    CHECK(rep.bound <= 1e-13);
    CHECK(rep.measured <= 1e-13);
  }
  SUBCASE("reference instance") {
    const ConformalSvd svd_a = conformal_svd(ref_clean(), 1);
    const ConformalSvd svd_b = conformal_svd(ref_perturbed(), 1);
    const BoundReport rep = wedin_bound(svd_a, svd_b, ref_noise());
    CHECK(rep.assumptions_met);
    // measured is the max over both sides; the V angle dominates here.
    const TwoByTwoOracle v_side = two_by_two_oracle(2.0, 0.0, 0.1, 0.5);
    CHECK(rep.metadata.at("sin_u") ==
          doctest::Approx(kRefSinTheta).epsilon(1e-10));
    CHECK(rep.measured == doctest::Approx(v_side.sin_theta).epsilon(1e-10));
    CHECK(rep.measured ==
          doctest::Approx(0.05324823018114085).epsilon(1e-12));
    CHECK(rep.metadata.at("delta") ==
          doctest::Approx(kRefWedinDelta).epsilon(1e-12));
    CHECK(rep.dominated);
  }
  SUBCASE("violated premise is flagged, not thrown") {
    Matrix a(2, 2);
    a << 2.0, 0.0, 0.0, 1.9;
    Matrix da(2, 2);
    da << -1.5, 0.0, 0.0, 0.0;  // sigma_r(B) collapses below sigma_2(A)
    const ConformalSvd svd_a = conformal_svd(a, 1);
    const ConformalSvd svd_b = conformal_svd(a + da, 1);
    const BoundReport rep = wedin_bound(svd_a, svd_b, da);
    CHECK_FALSE(rep.assumptions_met);
  }
}

TEST_CASE("one-sided bounds dominate and refine the uniform bound") {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const PairUnderTest p =
        make_pair(9, 7, 3, TailMode::geometric, 0.1, 900 + seed);
    const OneSidedBounds os =
        one_sided_sin_theta_bounds(p.inst.planted.svd, p.svd_b, p.inst.da);
    REQUIRE(os.u.assumptions_met);
    CHECK(os.u.dominated);
    CHECK(os.v.dominated);
    CHECK(os.uniform.dominated);
    CHECK(os.u.bound <= os.uniform.bound * (1.0 + 1e-12));
    CHECK(os.v.bound <= os.uniform.bound * (1.0 + 1e-12));
  }
}

TEST_CASE("user friendly bounds") {
  SUBCASE("zero noise gives zero bounds") {
    const TestInstance inst =
        random_instance(6, 5, 2, TailMode::geometric, 0.0, 21);
    const OneSidedBounds uf =
        user_friendly_one_sided_bounds(inst.planted.svd, inst.da);
    CHECK(uf.uniform.bound == 0.0);
    CHECK(uf.u.bound <= 1e-13);
    CHECK(uf.v.bound <= 1e-13);
    CHECK(uf.uniform.measured <= 1e-12);
  }
  SUBCASE("degenerate gap clamps the uniform bound to one") {
    Matrix u = Matrix::Identity(3, 3);
    Vector s(3);
    s << 2.0, 2.0, 2.0;
    const ConformalSvd svd_a = make_svd(1, u, u, s);
    Matrix da = Matrix::Zero(3, 3);
    da(0, 1) = 0.3;
    const OneSidedBounds uf = user_friendly_one_sided_bounds(svd_a, da);
    CHECK(uf.uniform.bound == 1.0);
    CHECK_FALSE(uf.u.assumptions_met);
  }
  SUBCASE("small noise keeps the 8/3 pair valid and dominant") {
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
      const TestInstance inst =
          random_instance(8, 10, 2, TailMode::geometric, 0.2, 400 + seed);
      const OneSidedBounds uf =
          user_friendly_one_sided_bounds(inst.planted.svd, inst.da);
      REQUIRE(uf.u.assumptions_met);  // 4 ||dA|| <= gap by construction
      CHECK(uf.u.dominated);
      CHECK(uf.v.dominated);
      CHECK(uf.uniform.dominated);
    }
  }
}

TEST_CASE("subspace projection bound") {
  SUBCASE("exact alignment on a rank-r matrix") {
    const TestInstance inst = random_instance(8, 6, 2, TailMode::zero, 0.0, 5);
    const SubspaceBounds sub =
        subspace_projection_bound(inst.planted.a, 2, inst.planted.svd.v1);
    CHECK(sub.spectral.assumptions_met);
    CHECK(sub.spectral.bound <= 1e-12);
    CHECK(sub.spectral.measured <= 1e-12);
    CHECK(sub.frobenius.measured <= 1e-12);
  }
  SUBCASE("perturbed subspace keeps dominance") {
    Rng rng(606);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const TestInstance inst =
          random_instance(9, 7, 3, TailMode::geometric, 0.0, 700 + seed);
      Eigen::HouseholderQR<Matrix> qr(inst.planted.svd.v1 +
                                      1e-3 * rng.gaussian(7, 3));
      const Matrix w = Matrix(qr.householderQ()).leftCols(3);
      const SubspaceBounds sub =
          subspace_projection_bound(inst.planted.a, 3, w);
      REQUIRE(sub.spectral.assumptions_met);
      CHECK(sub.spectral.dominated);
      CHECK(sub.frobenius.dominated);
      CHECK(sub.frobenius.bound <= std::sqrt(3.0) + 1e-12);
    }
  }
  SUBCASE("orthogonal subspace on a rank-r matrix is flagged") {
    const TestInstance inst = random_instance(8, 6, 2, TailMode::zero, 0.0, 6);
    const Matrix w = orthonormal_complement(inst.planted.svd.v1).leftCols(2);
    const SubspaceBounds sub =
        subspace_projection_bound(inst.planted.a, 2, w);
    CHECK_FALSE(sub.spectral.assumptions_met);
  }
}

TEST_CASE("alignment rotation, u side") {
  SUBCASE("identical subspaces give the identity") {
    const PairUnderTest p = make_pair(6, 5, 2, TailMode::geometric, 0.0, 31);
    const AlignmentRotation rot =
        align_rotation_u(p.inst.planted.svd, p.inst.planted.svd);
    CHECK((rot.q - Matrix::Identity(2, 2)).norm() <= 1e-12);
    CHECK(rot.s_minus_i <= 1e-12);
    CHECK(rot.source == AlignmentSource::u_side);
  }
  SUBCASE("pure rotation is recovered") {
    Rng rng(32);
    const TestInstance inst =
        random_instance(7, 5, 2, TailMode::geometric, 0.0, 33);
    const Matrix q0 = rng.haar_orthogonal(2);
    ConformalSvd rotated = inst.planted.svd;
    rotated.u1 = rotated.u1 * q0;
    const AlignmentRotation rot =
        align_rotation_u(inst.planted.svd, rotated);
    CHECK((rot.q - q0).norm() <= 1e-12);
    CHECK(two_to_infinity_norm(rotated.u1 - inst.planted.svd.u1 * rot.q) <=
          1e-12);
  }
  SUBCASE("reference instance obeys the S - I display") {
    const ConformalSvd svd_a = conformal_svd(ref_clean(), 1);
    const ConformalSvd svd_b = conformal_svd(ref_perturbed(), 1);
    const AlignmentRotation rot = align_rotation_u(svd_a, svd_b);
    CHECK(rot.s_minus_i == doctest::Approx(kRefSMinusI).epsilon(1e-9));
    CHECK(rot.sin_theta_sq == doctest::Approx(kRefSinSq).epsilon(1e-9));
    CHECK(rot.s_minus_i <= rot.sin_theta_sq + 1e-15);
  }
  SUBCASE("rotation factor invariants on random pairs") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const PairUnderTest p =
          make_pair(8, 7, 3, TailMode::geometric, 0.2, 3300 + seed);
      const AlignmentRotation rot =
          align_rotation_u(p.inst.planted.svd, p.svd_b);
      CHECK((rot.q.transpose() * rot.q - Matrix::Identity(3, 3)).norm() <=
            1e-10);
      for (Index i = 0; i < rot.s_diag.size(); ++i) {
        CHECK(rot.s_diag(i) >= 0.0);
        CHECK(rot.s_diag(i) <= 1.0 + 1e-12);
      }
    }
  }
}

TEST_CASE("two-to-infinity decomposition is an exact identity") {
  SUBCASE("zero noise") {
    const PairUnderTest p = make_pair(6, 5, 2, TailMode::geometric, 0.0, 41);
    const TwoToInfinityDecomposition dec =
        two_to_infinity_decomposition(p.inst.planted.svd, p.svd_b, p.inst.da);
    for (const Matrix& part : dec.parts) CHECK(part.norm() <= 1e-12);
    CHECK(dec.residual <= 1e-12);
  }
  SUBCASE("rank-r input kills the third summand") {
    const PairUnderTest p = make_pair(7, 6, 2, TailMode::zero, 0.1, 42);
    const TwoToInfinityDecomposition dec =
        two_to_infinity_decomposition(p.inst.planted.svd, p.svd_b, p.inst.da);
    CHECK(dec.parts[2].norm() == 0.0);  // Sigma_2 = 0 exactly in the planted svd
    CHECK(dec.residual <= 1e-10);
  }
  SUBCASE("random instances") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const PairUnderTest p =
          make_pair(9, 8, 3, TailMode::constant_level, 0.15, 800 + seed);
      const TwoToInfinityDecomposition dec = two_to_infinity_decomposition(
          p.inst.planted.svd, p.svd_b, p.inst.da);
      CHECK(dec.residual <= 1e-10);
    }
  }
}

TEST_CASE("two-to-infinity bound branches and trivial case") {
  SUBCASE("rank branch flips with the tail") {
    const PairUnderTest lo = make_pair(8, 8, 2, TailMode::zero, 0.01, 50);
    const BoundReport rep_lo = two_to_infinity_bound(
        lo.inst.planted.svd, lo.svd_b, lo.inst.da, 0.001);
    CHECK(rep_lo.metadata.at("rank_r_branch") == 1.0);
    const PairUnderTest hi =
        make_pair(8, 8, 2, TailMode::constant_level, 0.01, 51);
    const BoundReport rep_hi = two_to_infinity_bound(
        hi.inst.planted.svd, hi.svd_b, hi.inst.da, 0.001);
    CHECK(rep_hi.metadata.at("rank_r_branch") == 0.0);
    const double r = 2.0, n = 8.0;
    CHECK(rep_lo.metadata.at("r_factor") ==
          doctest::Approx(std::sqrt(r) + std::sqrt(std::log(n))));
    CHECK(rep_hi.metadata.at("r_factor") ==
          doctest::Approx(r + std::sqrt(r * std::log(n))));
  }
  SUBCASE("zero noise, zero sigma") {
    const PairUnderTest p = make_pair(8, 8, 2, TailMode::zero, 0.0, 52);
    const BoundReport rep =
        two_to_infinity_bound(p.inst.planted.svd, p.svd_b, p.inst.da, 0.0);
    CHECK(rep.bound == 0.0);
    CHECK(rep.measured <= 1e-12);
  }
}

TEST_CASE("svt apply") {
  Matrix d(2, 2);
  d << 3.0, 0.0, 0.0, 1.0;
  const Matrix t = svt_apply(d, 1);
  CHECK(t(0, 0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(std::abs(t(1, 1)) <= 1e-14);

  const TestInstance inst = random_instance(8, 6, 3, TailMode::zero, 0.0, 61);
  CHECK((svt_apply(inst.planted.a, 3) - inst.planted.a).norm() <=
        1e-12 * inst.planted.a.norm());

  Rng rng(62);
  const Matrix a = rng.gaussian(10, 7);
  const Vector sv = singular_values(a);
  const Matrix ar = svt_apply(a, 3);
  CHECK(spectral_norm(a - ar) == doctest::Approx(sv(3)).epsilon(1e-10));
  CHECK((a - ar).norm() ==
        doctest::Approx(sv.tail(sv.size() - 3).norm()).epsilon(1e-10));
  CHECK_THROWS_AS(svt_apply(a, 99), DimensionError);
}

TEST_CASE("svt decomposition identity") {
  SUBCASE("zero noise") {
    const PairUnderTest p = make_pair(6, 5, 2, TailMode::geometric, 0.0, 71);
    CHECK(svt_decomposition_identity(p.inst.planted.svd, p.svd_b, p.inst.da) <=
          1e-13);
  }
  SUBCASE("reference instance") {
    const ConformalSvd svd_a = conformal_svd(ref_clean(), 1);
    const ConformalSvd svd_b = conformal_svd(ref_perturbed(), 1);
    CHECK(svt_decomposition_identity(svd_a, svd_b, ref_noise()) <= 1e-12);
  }
  SUBCASE("random full-rank instances") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const PairUnderTest p =
          make_pair(10, 8, 3, TailMode::constant_level, 0.2, 7100 + seed);
      CHECK(svt_decomposition_identity(p.inst.planted.svd, p.svd_b,
                                       p.inst.da) <= 1e-10);
    }
  }
}

TEST_CASE("svt bounds") {
  SUBCASE("zero noise") {
    const PairUnderTest p = make_pair(6, 5, 2, TailMode::geometric, 0.0, 81);
    const SubspaceBounds b = svt_bounds(p.inst.planted.svd, p.svd_b, p.inst.da);
    CHECK(b.spectral.bound <= 1e-12);
    CHECK(b.spectral.measured <= 1e-12);
  }
  SUBCASE("rank-r reduction to 2||E|| and sqrt5 ||E_r||_F") {
    const PairUnderTest p = make_pair(8, 7, 2, TailMode::zero, 0.2, 82);
    const SubspaceBounds b = svt_bounds(p.inst.planted.svd, p.svd_b, p.inst.da);
    const double e_norm = spectral_norm(p.inst.da);
    const double er_f = top_k_frobenius(p.inst.da, 2);
    CHECK(b.spectral.bound == doctest::Approx(2.0 * e_norm).epsilon(1e-12));
    CHECK(b.frobenius.bound ==
          doctest::Approx(std::sqrt(5.0) * er_f).epsilon(1e-12));
    CHECK(b.spectral.dominated);
    CHECK(b.frobenius.dominated);
  }
  SUBCASE("random dominance in both norms") {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
      const PairUnderTest p =
          make_pair(9, 11, 3, TailMode::constant_level, 0.3, 8200 + seed);
      const SubspaceBounds b =
          svt_bounds(p.inst.planted.svd, p.svd_b, p.inst.da);
      CHECK(b.spectral.dominated);
      CHECK(b.frobenius.dominated);
    }
  }
}

TEST_CASE("pca alignment and bounds") {
  SUBCASE("identity alignment") {
    const PairUnderTest p = make_pair(6, 5, 2, TailMode::geometric, 0.0, 91);
    const AlignmentRotation rot =
        pca_align_rotation(p.inst.planted.svd, p.inst.planted.svd);
    CHECK((rot.q - Matrix::Identity(2, 2)).norm() <= 1e-12);
    CHECK(rot.source == AlignmentSource::v_side);
  }
  SUBCASE("pure rotation recovered") {
    Rng rng(92);
    const TestInstance inst =
        random_instance(7, 6, 2, TailMode::geometric, 0.0, 93);
    const Matrix q0 = rng.haar_orthogonal(2);
    ConformalSvd rotated = inst.planted.svd;
    rotated.v1 = rotated.v1 * q0.transpose();
    const AlignmentRotation rot =
        pca_align_rotation(inst.planted.svd, rotated);
    CHECK((rot.q - q0).norm() <= 1e-12);
    CHECK((rot.q.transpose() * rot.q - Matrix::Identity(2, 2)).norm() <=
          1e-10);
  }
  SUBCASE("zero noise bounds") {
    const PairUnderTest p = make_pair(6, 5, 2, TailMode::geometric, 0.0, 94);
    const SubspaceBounds b = pca_bounds(p.inst.planted.svd, p.svd_b, p.inst.da);
    CHECK(b.spectral.bound <= 1e-12);
    CHECK(b.spectral.measured <= 1e-11);
  }
  SUBCASE("rank-r reductions") {
    const PairUnderTest p = make_pair(8, 7, 2, TailMode::zero, 0.2, 95);
    const SubspaceBounds b = pca_bounds(p.inst.planted.svd, p.svd_b, p.inst.da);
    const double e_norm = spectral_norm(p.inst.da);
    const double er_f = top_k_frobenius(p.inst.da, 2);
    CHECK(b.spectral.bound == doctest::Approx(3.0 * e_norm).epsilon(1e-12));
    CHECK(b.frobenius.bound ==
          doctest::Approx((std::sqrt(5.0) + 1.0) * er_f).epsilon(1e-12));
    CHECK(b.spectral.dominated);
    CHECK(b.frobenius.dominated);
  }
  SUBCASE("random dominance") {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
      const PairUnderTest p =
          make_pair(10, 8, 3, TailMode::geometric, 0.25, 9500 + seed);
      const SubspaceBounds b =
          pca_bounds(p.inst.planted.svd, p.svd_b, p.inst.da);
      CHECK(b.spectral.dominated);
      CHECK(b.frobenius.dominated);
    }
  }
}

TEST_CASE("square-root rotation factorization") {
  CHECK(sqrt_rotation_factor(Matrix::Identity(3, 3)).residual <= 1e-14);
  CHECK(sqrt_rotation_factor(0.5 * Matrix::Identity(3, 3)).residual <= 1e-14);
  Rng rng(101);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix b = rng.gaussian(4, 4);
    b *= 0.99 / spectral_norm(b);
    CHECK(sqrt_rotation_factor(b).residual <= 1e-10);
  }
  Matrix big = 2.0 * Matrix::Identity(2, 2);
  CHECK_THROWS_AS(sqrt_rotation_factor(big), NumericalError);
}

TEST_CASE("classical inequality checks") {
  SUBCASE("zero noise passes with zero Weyl slack") {
    Rng rng(111);
    const Matrix a = rng.gaussian(6, 6);
    const ClassicalChecks c =
        classical_inequality_checks(a, Matrix::Zero(6, 6));
    CHECK(c.all_ok());
    CHECK(c.weyl_margin == doctest::Approx(0.0).epsilon(1e-14));
  }
  SUBCASE("diagonal example") {
    Matrix a(2, 2), e(2, 2);
    a << 3.0, 0.0, 0.0, 1.0;
    e << 0.5, 0.0, 0.0, 0.0;
    const ClassicalChecks c = classical_inequality_checks(a, e);
    CHECK(c.all_ok());
    const Vector sa = singular_values(a);
    const Vector sc = singular_values(a + e);
    for (Index i = 0; i < 2; ++i) CHECK(std::abs(sa(i) - sc(i)) <= 0.5 + 1e-14);
  }
  SUBCASE("random pairs always pass") {
    Rng rng(112);
    for (int trial = 0; trial < 100; ++trial) {
      const Matrix a = rng.gaussian(10, 10);
      const Matrix e = rng.gaussian(10, 10, 0.5);
      CHECK(classical_inequality_checks(a, e).all_ok());
    }
  }
}

TEST_CASE("top_k_frobenius matches a singular value oracle") {
  Rng rng(113);
  const Matrix m = rng.gaussian(6, 8);
  const Vector sv = singular_values(m);
  for (Index k : {Index{1}, Index{3}, Index{6}, Index{99}}) {
    double acc = 0.0;
    for (Index i = 0; i < std::min(k, sv.size()); ++i) acc += sv(i) * sv(i);
    CHECK(top_k_frobenius(m, k) == doctest::Approx(std::sqrt(acc)));
  }
  CHECK(top_k_frobenius(m, 0) == 0.0);
}
