#include "sintheta/generators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sintheta/rng.hpp"

namespace sintheta {

std::string to_string(TailMode mode) {
  switch (mode) {
    case TailMode::zero: return "zero";
    case TailMode::geometric: return "geometric";
    case TailMode::constant_level: return "constant";
  }
  return "?";
}

TailMode tail_mode_from_string(const std::string& s) {
  if (s == "zero") return TailMode::zero;
  if (s == "geometric") return TailMode::geometric;
  if (s == "constant") return TailMode::constant_level;
  throw ConfigError("tail_mode: expected one of zero|geometric|constant, got '" +
                    s + "'");
}

std::string to_string(IncoherenceMode mode) {
  switch (mode) {
    case IncoherenceMode::haar: return "haar";
    case IncoherenceMode::incoherent: return "incoherent";
    case IncoherenceMode::spiked_coordinate: return "spiked_coordinate";
  }
  return "?";
}

IncoherenceMode incoherence_mode_from_string(const std::string& s) {
  if (s == "haar") return IncoherenceMode::haar;
  if (s == "incoherent") return IncoherenceMode::incoherent;
  if (s == "spiked_coordinate") return IncoherenceMode::spiked_coordinate;
  throw ConfigError(
      "incoherence: expected one of haar|incoherent|spiked_coordinate, got '" +
      s + "'");
}

void validate_spectrum(const SpectrumSpec& spec) {
  if (spec.n < 1 || spec.m < 1) throw ConfigError("spectrum: n, m must be >= 1");
  const Index minnm = std::min(spec.n, spec.m);
  if (spec.r < 1 || spec.r > minnm - (spec.tail_mode == TailMode::zero ? 0 : 1))
    throw ConfigError("spectrum: r out of range for n, m, tail_mode");
  if (static_cast<Index>(spec.top_values.size()) != spec.r)
    throw ConfigError("spectrum: top_values must have exactly r entries");
  double prev = std::numeric_limits<double>::infinity();
  for (double v : spec.top_values) {
    if (!(v > 0.0)) throw ConfigError("spectrum: top_values must be positive");
    if (v > prev) throw ConfigError("spectrum: top_values must be descending");
    prev = v;
  }
  if (!(spec.gap_target > 0.0))
    throw ConfigError("spectrum: gap_target must be > 0");
  const double sr = spec.top_values.back();
  switch (spec.tail_mode) {
    case TailMode::zero:
      if (sr < spec.gap_target)
        throw ConfigError("spectrum: sigma_r below gap_target with zero tail");
      break;
    case TailMode::geometric:
      if (!(spec.tail_param > 0.0 && spec.tail_param < 1.0))
        throw ConfigError("spectrum: geometric tail needs ratio in (0,1)");
      if (sr - spec.gap_target < 0.0)
        throw ConfigError("spectrum: gap_target exceeds sigma_r");
      break;
    case TailMode::constant_level:
      if (!(spec.tail_param >= 0.0))
        throw ConfigError("spectrum: constant tail level must be >= 0");
      if (sr - spec.tail_param < spec.gap_target)
        throw ConfigError(
            "spectrum: sigma_r - level smaller than gap_target");
      break;
  }
}

Vector build_singular_values(const SpectrumSpec& spec) {
  validate_spectrum(spec);
  const Index minnm = std::min(spec.n, spec.m);
  Vector s = Vector::Zero(minnm);
  for (Index i = 0; i < spec.r; ++i)
    s(i) = spec.top_values[static_cast<std::size_t>(i)];
  const double sr = spec.top_values.back();
  switch (spec.tail_mode) {
    case TailMode::zero:
      break;
    case TailMode::geometric: {
      double v = sr - spec.gap_target;
      for (Index i = spec.r; i < minnm; ++i) {
        s(i) = v;
        v *= spec.tail_param;
      }
      break;
    }
    case TailMode::constant_level:
      for (Index i = spec.r; i < minnm; ++i) s(i) = spec.tail_param;
      break;
  }
  return s;
}

std::vector<double> linspace_top_values(Index r, double sigma_r,
                                        double sigma_top) {
  std::vector<double> v(static_cast<std::size_t>(r));
  if (r == 1) {
    v[0] = sigma_r;
    return v;
  }
  for (Index i = 0; i < r; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(r - 1);
    v[static_cast<std::size_t>(i)] = sigma_top + t * (sigma_r - sigma_top);
  }
  return v;
}

namespace {

// Orthonormal flat cosine basis (every entry has magnitude <= sqrt(2/n)),
// with random signs folded in on the left; rows stay flat, so the leading
// r columns satisfy ||U1||_{2,inf} <= sqrt(2 r / n).
Matrix flat_cosine_basis(Index n, Rng& rng) {
  Matrix c(n, n);
  const double pi = std::acos(-1.0);
  const double scale0 = std::sqrt(1.0 / static_cast<double>(n));
  const double scale = std::sqrt(2.0 / static_cast<double>(n));
  for (Index j = 0; j < n; ++j) {
    for (Index k = 0; k < n; ++k) {
      c(j, k) = k == 0 ? scale0
                       : scale * std::cos(pi * static_cast<double>(k) *
                                          (2.0 * static_cast<double>(j) + 1.0) /
                                          (2.0 * static_cast<double>(n)));
    }
  }
  const Vector signs = rng.rademacher(n);
  return signs.asDiagonal() * c;
}

Matrix incoherent_basis(Index n, Index r, double mu, Rng& rng) {
  if (mu < 1.0) {
    throw ConfigError("incoherence: mu must be >= 1 (mu sqrt(r/n) below the "
                      "flat-basis floor is infeasible)");
  }
  const double budget = mu * std::sqrt(static_cast<double>(r) /
                                       static_cast<double>(n));
  // Haar row norms concentrate near sqrt((r + 2 log n) / n); resample only
  // while acceptance is plausible.
  const double typical = std::sqrt(
      (static_cast<double>(r) + 3.0 * std::log(static_cast<double>(n))) /
      static_cast<double>(n));
  const bool rejection_viable = budget >= 1.05 * typical;
  if (rejection_viable) {
    for (int attempt = 0; attempt < 500; ++attempt) {
      Matrix u = rng.haar_orthogonal(n);
      if (two_to_infinity_norm(u.leftCols(r)) <= budget) return u;
    }
  }
  if (mu >= std::sqrt(2.0)) {
    Matrix u = flat_cosine_basis(n, rng);
    if (two_to_infinity_norm(u.leftCols(r)) <= budget) return u;
  }
  throw ConfigError("incoherence: could not construct a basis with "
                    "||U1||_{2,inf} <= mu sqrt(r/n) for mu = " +
                    std::to_string(mu));
}

}  // namespace

PlantedMatrix gen_structured_matrix(const SpectrumSpec& spec,
                                    IncoherenceMode mode, double mu,
                                    std::uint64_t seed) {
  validate_spectrum(spec);
  const Index n = spec.n, m = spec.m, r = spec.r;
  Rng u_rng(derive_seed(seed, 1));
  Rng v_rng(derive_seed(seed, 2));

  Matrix u;
  switch (mode) {
    case IncoherenceMode::haar:
      u = u_rng.haar_orthogonal(n);
      break;
    case IncoherenceMode::incoherent:
      u = incoherent_basis(n, r, mu, u_rng);
      break;
    case IncoherenceMode::spiked_coordinate:
      u = Matrix::Identity(n, n);
      break;
  }
  const Matrix v = v_rng.haar_orthogonal(m);
  const Vector s = build_singular_values(spec);

  PlantedMatrix out;
  out.svd.r = r;
  out.svd.u1 = u.leftCols(r);
  out.svd.u2 = u.rightCols(n - r);
  out.svd.v1 = v.leftCols(r);
  out.svd.v2 = v.rightCols(m - r);
  out.svd.sigma1 = s.head(r);
  out.svd.sigma2 = s.tail(std::min(n, m) - r);
  out.a = out.svd.reconstruct();
  return out;
}

Matrix gen_noise(const NoiseSpec& spec, Index n, Index m) {
  if (!(spec.sigma > 0.0)) {
    throw ConfigError("noise: sigma must be > 0");
  }
  Rng rng(derive_seed(spec.seed, 3));
  return rng.gaussian(n, m, spec.sigma);
}

}  // namespace sintheta
