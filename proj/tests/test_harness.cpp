#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "sintheta/csv.hpp"
#include "sintheta/rng.hpp"
#include "sintheta/suites.hpp"
#include "test_support.hpp"

using namespace sintheta;
using namespace sintheta::testing;

namespace {

GridRow small_row(Index n, Index m, Index r, TailMode tail, double noise_frac,
                  int trials) {
  GridRow row;
  row.spectrum.n = n;
  row.spectrum.m = m;
  row.spectrum.r = r;
  row.spectrum.top_values = linspace_top_values(r, 2.0, 3.0);
  row.spectrum.tail_mode = tail;
  row.spectrum.tail_param = 0.5;
  row.spectrum.gap_target = tail == TailMode::zero ? 2.0 : 1.0;
  row.noise_kind = NoiseLevelKind::gap_fraction;
  row.noise_level = noise_frac;
  row.trials = trials;
  return row;
}

}  // namespace

TEST_CASE("seed derivation produces decorrelated, stable streams") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(42, i));
  CHECK(seen.size() == 1000);
  CHECK(derive_seed(42, 7) == derive_seed(42, 7));
  CHECK(derive_seed(42, 7) != derive_seed(43, 7));
}

TEST_CASE("spectrum construction") {
  SpectrumSpec spec;
  spec.n = 10;
  spec.m = 8;
  spec.r = 3;
  spec.top_values = {3.0, 2.5, 2.0};
  spec.gap_target = 1.0;

  SUBCASE("zero tail is exactly rank r") {
    spec.tail_mode = TailMode::zero;
    spec.gap_target = 2.0;
    const Vector s = build_singular_values(spec);
    CHECK(s.size() == 8);
    CHECK(s(3) == 0.0);
    CHECK(s(2) - s(3) >= spec.gap_target);
  }
  SUBCASE("geometric tail decays from sigma_r - gap") {
    spec.tail_mode = TailMode::geometric;
    spec.tail_param = 0.5;
    const Vector s = build_singular_values(spec);
    CHECK(s(3) == doctest::Approx(1.0));
    CHECK(s(4) == doctest::Approx(0.5));
    CHECK(s(2) - s(3) == doctest::Approx(spec.gap_target));
  }
  SUBCASE("constant tail keeps the level") {
    spec.tail_mode = TailMode::constant_level;
    spec.tail_param = 0.75;
    const Vector s = build_singular_values(spec);
    CHECK(s(3) == 0.75);
    CHECK(s(7) == 0.75);
  }
  SUBCASE("validation failures carry field names") {
    spec.tail_mode = TailMode::geometric;
    spec.tail_param = 1.5;
    CHECK_THROWS_AS(build_singular_values(spec), ConfigError);
    spec.tail_param = 0.5;
    spec.top_values = {2.0, 2.5, 3.0};  // ascending
    CHECK_THROWS_AS(build_singular_values(spec), ConfigError);
    spec.top_values = {3.0, 2.5};  // wrong length
    CHECK_THROWS_AS(build_singular_values(spec), ConfigError);
    spec.top_values = {3.0, 2.5, 2.0};
    spec.tail_mode = TailMode::constant_level;
    spec.tail_param = 1.8;  // sigma_r - level < gap_target
    CHECK_THROWS_AS(build_singular_values(spec), ConfigError);
  }
}

TEST_CASE("gen_structured_matrix plants a valid factorization") {
  SpectrumSpec spec;
  spec.n = 30;
  spec.m = 20;
  spec.r = 3;
  spec.top_values = {3.0, 2.5, 2.0};
  spec.tail_mode = TailMode::geometric;
  spec.tail_param = 0.6;
  spec.gap_target = 1.0;

  const PlantedMatrix planted =
      gen_structured_matrix(spec, IncoherenceMode::haar, 2.0, 99);
  const Matrix u = planted.svd.full_u();
  const Matrix v = planted.svd.full_v();
  CHECK((u.transpose() * u - Matrix::Identity(30, 30)).norm() <= 1e-12);
  CHECK((v.transpose() * v - Matrix::Identity(20, 20)).norm() <= 1e-12);
  CHECK((planted.a - planted.svd.reconstruct()).norm() == 0.0);

  // Recomputed decomposition agrees up to the sign convention: singular
  // values match tightly.
  const ConformalSvd recomputed = conformal_svd(planted.a, 3);
  for (Index i = 0; i < 3; ++i) {
    CHECK(std::abs(recomputed.sigma1(i) - planted.svd.sigma1(i)) <= 1e-12);
  }
  for (Index i = 0; i < recomputed.sigma2.size(); ++i) {
    CHECK(std::abs(recomputed.sigma2(i) - planted.svd.sigma2(i)) <= 1e-12);
  }
  // Same seed, same matrix.
  const PlantedMatrix again =
      gen_structured_matrix(spec, IncoherenceMode::haar, 2.0, 99);
  CHECK((again.a - planted.a).norm() == 0.0);
}

TEST_CASE("incoherence modes") {
  SpectrumSpec spec;
  spec.n = 100;
  spec.m = 40;
  spec.r = 3;
  spec.top_values = {3.0, 2.5, 2.0};
  spec.tail_mode = TailMode::zero;
  spec.gap_target = 2.0;
  const double floor = std::sqrt(3.0 / 100.0);

  SUBCASE("haar row norms concentrate near sqrt(r/n) log factors") {
    std::vector<double> norms;
    for (std::uint64_t s = 0; s < 100; ++s) {
      const PlantedMatrix p =
          gen_structured_matrix(spec, IncoherenceMode::haar, 2.0, s);
      norms.push_back(two_to_infinity_norm(p.svd.u1));
    }
    const double med = median(norms);
    CHECK(med >= floor);
    CHECK(med <= floor * 4.0 * std::sqrt(std::log(100.0)));
  }
  SUBCASE("rejection sampling meets a loose budget") {
    const PlantedMatrix p =
        gen_structured_matrix(spec, IncoherenceMode::incoherent, 3.0, 7);
    CHECK(two_to_infinity_norm(p.svd.u1) <= 3.0 * floor);
  }
  SUBCASE("flat basis covers small mu") {
    const PlantedMatrix p =
        gen_structured_matrix(spec, IncoherenceMode::incoherent, 1.45, 8);
    CHECK(two_to_infinity_norm(p.svd.u1) <= 1.45 * floor);
  }
  SUBCASE("coordinate basis is maximally coherent") {
    const PlantedMatrix p =
        gen_structured_matrix(spec, IncoherenceMode::spiked_coordinate, 1.0, 9);
    CHECK(two_to_infinity_norm(p.svd.u1) == 1.0);
  }
  SUBCASE("mu below one is rejected") {
    CHECK_THROWS_AS(
        gen_structured_matrix(spec, IncoherenceMode::incoherent, 0.5, 10),
        ConfigError);
  }
}

TEST_CASE("gen_noise") {
  SUBCASE("determinism and basic moments") {
    const Matrix a = gen_noise({0.3, 77}, 50, 40);
    const Matrix b = gen_noise({0.3, 77}, 50, 40);
    CHECK((a - b).norm() == 0.0);
    const double count = 50.0 * 40.0;
    const double mean = a.sum() / count;
    const double var = (a.array() - mean).square().sum() / (count - 1.0);
    CHECK(std::abs(mean) <= 5.0 * 0.3 / std::sqrt(count));
    CHECK(std::abs(var - 0.09) <= 5.0 * 0.09 * std::sqrt(2.0 / count));
  }
  SUBCASE("sigma must be positive") {
    CHECK_THROWS_AS(gen_noise({0.0, 1}, 4, 4), ConfigError);
  }
  SUBCASE("spectral norm event holds on at least 99% of draws") {
    int ok = 0;
    const int draws = 1000;
    for (std::uint64_t s = 0; s < draws; ++s) {
      const Matrix g = gen_noise({1.0, 1000 + s}, 200, 200);
      if (spectral_norm(g) <= 3.0 * std::sqrt(200.0)) ++ok;
    }
    CHECK(ok >= 990);
  }
}

TEST_CASE("identity suite on a small grid") {
  SuiteConfig config;
  config.master_seed = 4242;
  config.grid = {small_row(8, 6, 2, TailMode::zero, 0.3, 6),
                 small_row(12, 16, 3, TailMode::geometric, 0.05, 6),
                 small_row(10, 9, 2, TailMode::constant_level, 0.0, 2)};
  const SuiteResult result = run_identity_suite(config);
  CHECK(result.summary.total == 14);
  CHECK(result.summary.failed == 0);
  CHECK(result.summary.skipped == 0);
  CHECK(result.summary.passed + result.summary.failed +
            result.summary.skipped ==
        result.summary.total);
  CHECK(result.summary.hard_pass());
  CHECK(result.summary.max_residuals.at("exact_formula") <= 1e-9);

  SUBCASE("gap-violating rows are skipped with a reason") {
    SuiteConfig degen = config;
    GridRow row = small_row(10, 10, 2, TailMode::constant_level, 0.1, 3);
    row.spectrum.tail_param = 2.0 - 1e-12;
    row.spectrum.gap_target = 1e-12;
    degen.grid = {row};
    const SuiteResult r2 = run_identity_suite(degen);
    CHECK(r2.summary.skipped == 3);
    CHECK(r2.records[0].note == "gap");
    CHECK(r2.summary.total == 3);
  }
}

TEST_CASE("bound suite on a small grid") {
  SuiteConfig config;
  config.master_seed = 777;
  GridRow row = small_row(10, 8, 2, TailMode::geometric, 0.0, 8);
  row.noise_kind = NoiseLevelKind::entry_sigma;
  row.noise_level = 1.0 / (16.0 * std::sqrt(10.0));
  config.grid = {row};
  const SuiteResult result = run_bound_suite(config);
  CHECK(result.summary.failed == 0);
  for (const auto& [name, stat] : result.summary.dominance) {
    if (name == "two_to_infinity") continue;  // calibration constants
    CHECK(stat.dominated == stat.met);
  }
  CHECK(result.summary.max_residuals.at("svt_decomposition") <= 1e-10);
  CHECK(result.summary.max_residuals.at("l2inf_decomposition") <= 1e-10);
}

TEST_CASE("suites are deterministic and stable under worker count") {
  SuiteConfig config;
  config.master_seed = 31337;
  config.grid = {small_row(9, 7, 2, TailMode::geometric, 0.1, 5),
                 small_row(8, 10, 3, TailMode::zero, 0.2, 5)};

  config.workers = 1;
  const SuiteResult serial = run_identity_suite(config);
  config.workers = 3;
  const SuiteResult parallel = run_identity_suite(config);
  CHECK(suite_csv_string(serial.records) ==
        suite_csv_string(parallel.records));

  SUBCASE("earlier trials do not depend on the trial count") {
    SuiteConfig more = config;
    more.grid[0].trials = 9;
    const SuiteResult extended = run_identity_suite(more);
    for (int i = 0; i < 5; ++i) {
      CHECK(extended.records[static_cast<std::size_t>(i)].seed ==
            parallel.records[static_cast<std::size_t>(i)].seed);
      CHECK(extended.records[static_cast<std::size_t>(i)].sigma ==
            parallel.records[static_cast<std::size_t>(i)].sigma);
    }
  }
}

TEST_CASE("tightness study prefers the one-sided bound when n << m") {
  TightnessConfig config;
  config.master_seed = 5;
  config.n = 24;
  config.m = 600;
  config.r = 2;
  config.trials = 12;
  const SuiteResult result = run_tightness_study(config);
  REQUIRE(result.summary.tightness.has_value());
  const TightnessResult& t = *result.summary.tightness;
  CHECK(t.trials == 12);
  CHECK(t.median_ratio_v_over_u >= 2.0);
  CHECK(t.frac_onesided_below_uniform >= 0.95);

  // The wide side carries more noise energy: the U-side one-sided bound
  // sits below the V-side bound on these instances.
  std::vector<double> bound_ratio;
  for (const TrialRecord& rec : result.records) {
    if (rec.reports.size() >= 2 && rec.reports[0].assumptions_met) {
      bound_ratio.push_back(rec.reports[0].bound / rec.reports[1].bound);
    }
  }
  CHECK(median(bound_ratio) < 1.0);
}

TEST_CASE("tightness study is symmetric at n == m") {
  TightnessConfig config;
  config.master_seed = 15;
  config.n = 48;
  config.m = 48;
  config.r = 2;
  config.trials = 16;
  const SuiteResult result = run_tightness_study(config);
  REQUIRE(result.summary.tightness.has_value());
  CHECK(result.summary.tightness->median_ratio_v_over_u ==
        doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("scaling study fits a slope with a confidence interval") {
  ScalingConfig config;
  config.master_seed = 6;
  config.n_grid = {64, 128, 256};
  config.trials = 6;
  const SuiteResult result = run_scaling_study(config);
  REQUIRE(result.summary.scaling.has_value());
  const ScalingResult& s = *result.summary.scaling;
  CHECK(s.points.size() == 3);
  CHECK(s.slope < 0.0);
  CHECK(s.ci_low <= s.slope);
  CHECK(s.ci_high >= s.slope);
  CHECK(s.rank_r_branch);
  for (const ScalingPoint& p : s.points) {
    CHECK(p.median_measured > 0.0);
    CHECK(std::isfinite(p.median_bound));
  }
}

TEST_CASE("scaling study with zero noise skips the regression") {
  ScalingConfig config;
  config.master_seed = 16;
  config.n_grid = {32, 64};
  config.trials = 2;
  config.sigma_factor = 0.0;
  const SuiteResult result = run_scaling_study(config);
  REQUIRE(result.summary.scaling.has_value());
  for (const ScalingPoint& p : result.summary.scaling->points) {
    CHECK(p.median_measured <= 1e-12);
  }
  CHECK(std::isnan(result.summary.scaling->slope));
}

TEST_CASE("coherent control gives a markedly shallower slope") {
  // At noise large enough for the row-wise floor of a coordinate basis to
  // bite within desk-scale n, the coherent control flattens while the
  // incoherent instances keep decaying.
  ScalingConfig config;
  config.master_seed = 17;
  config.n_grid = {256, 512, 1024};
  config.trials = 8;
  config.mode = IncoherenceMode::incoherent;
  config.mu = 1.5;
  config.sigma_factor = 3.5;
  const SuiteResult flat = run_scaling_study(config);
  config.mode = IncoherenceMode::spiked_coordinate;
  const SuiteResult spiked = run_scaling_study(config);
  REQUIRE(flat.summary.scaling.has_value());
  REQUIRE(spiked.summary.scaling.has_value());
  CHECK(flat.summary.scaling->slope < -0.35);
  CHECK(spiked.summary.scaling->slope >
        flat.summary.scaling->slope + 0.1);
}

TEST_CASE("calibration") {
  SUBCASE("deterministic bounds are rejected") {
    CalibrateConfig config;
    config.bound_id = "wedin";
    CHECK_THROWS_AS(calibrate_constants(config), ConfigError);
  }
  SUBCASE("feasible constants exist and tighten with the target") {
    CalibrateConfig config;
    config.master_seed = 8;
    GridRow row = small_row(60, 60, 2, TailMode::zero, 0.0, 60);
    row.mode = IncoherenceMode::incoherent;
    row.mu = 1.5;
    row.noise_kind = NoiseLevelKind::entry_sigma;
    row.noise_level = 2.0 / (42.0 * std::sqrt(60.0));
    config.grid = {row};
    config.target_rate = 0.5;
    const SuiteResult loose = calibrate_constants(config);
    REQUIRE(loose.summary.calibration.has_value());
    REQUIRE(loose.summary.calibration->feasible);
    config.target_rate = 0.95;
    const SuiteResult tight = calibrate_constants(config);
    REQUIRE(tight.summary.calibration->feasible);
    CHECK(tight.summary.calibration->c1 + tight.summary.calibration->c2 >=
          loose.summary.calibration->c1 + loose.summary.calibration->c2);
    CHECK(tight.summary.calibration->rate >= 0.95);
  }
}

TEST_CASE("median helper") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK(std::isnan(median({})));
}

TEST_CASE("parallel_for_indexed covers every index once") {
  std::vector<int> hits(257, 0);
  parallel_for_indexed(257, 4, [&](int i) { hits[static_cast<std::size_t>(i)]++; });
  for (int h : hits) CHECK(h == 1);
}
