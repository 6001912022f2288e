#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sintheta/linalg.hpp"

namespace sintheta {

enum class TailMode { zero, geometric, constant_level };

std::string to_string(TailMode mode);
TailMode tail_mode_from_string(const std::string& s);

/// Shape of a planted spectrum: r leading values, then a tail chosen so that
/// sigma_r - sigma_{r+1} >= gap_target.
///  - zero: sigma_{r+1} = ... = 0 (exactly rank r);
///  - geometric: sigma_{r+1} = sigma_r - gap_target, decaying by tail_param;
///  - constant_level: all tail values equal tail_param
///    (requires sigma_r - tail_param >= gap_target).
struct SpectrumSpec {
  Index n = 0, m = 0, r = 0;
  std::vector<double> top_values;
  TailMode tail_mode = TailMode::zero;
  double tail_param = 0.5;
  double gap_target = 0.0;
};

/// Throws ConfigError naming the offending field.
void validate_spectrum(const SpectrumSpec& spec);

/// Full vector of min(n,m) planted singular values, descending.
Vector build_singular_values(const SpectrumSpec& spec);

/// Convenience: r values linearly spaced from sigma_top down to sigma_r.
std::vector<double> linspace_top_values(Index r, double sigma_r,
                                        double sigma_top);

enum class IncoherenceMode { haar, incoherent, spiked_coordinate };

std::string to_string(IncoherenceMode mode);
IncoherenceMode incoherence_mode_from_string(const std::string& s);

struct PlantedMatrix {
  Matrix a;
  ConformalSvd svd;  // ground-truth factorization, not a re-decomposition
};

/// Random matrix with the planted spectrum. The left basis is Haar,
/// incoherence-controlled (||U1||_{2,inf} <= mu sqrt(r/n), mu >= 1), or the
/// coordinate basis (maximally coherent control case, ||U1||_{2,inf} = 1).
/// The right basis is always Haar. Incoherent construction: rejection
/// resampling of Haar bases while the row-norm budget makes that likely,
/// otherwise a sign-randomized flat cosine basis (feasible for mu >= sqrt 2).
PlantedMatrix gen_structured_matrix(const SpectrumSpec& spec,
                                    IncoherenceMode mode, double mu,
                                    std::uint64_t seed);

struct NoiseSpec {
  double sigma = 0.0;       // entrywise stddev, must be > 0
  std::uint64_t seed = 0;
};

/// Seeded i.i.d. N(0, sigma^2) matrix.
Matrix gen_noise(const NoiseSpec& spec, Index n, Index m);

}  // namespace sintheta
