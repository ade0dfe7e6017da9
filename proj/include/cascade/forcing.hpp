// Band-limited forcing: random shell forcing and solution-proportional
// (Lundgren-type) band forcing.
#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "cascade/grid.hpp"

namespace cascade {

enum class ForcingKind { none, shell, lundgren_band };
enum class AmplitudeLaw { fixed_input_rate, fixed_amplitude };

struct ForcingSpec {
  ForcingKind kind = ForcingKind::none;
  double k_f = 0.0;
  // Active shell k_lo <= |k| <= k_hi; zero means the full band [k_f/2, 2 k_f].
  double k_lo = 0.0;
  double k_hi = 0.0;
  AmplitudeLaw law = AmplitudeLaw::fixed_input_rate;
  double input_rate = 0.0;  // fixed_input_rate
  double amplitude = 0.0;   // fixed_amplitude: rms of f
  double alpha = 0.0;       // lundgren_band
  std::uint64_t seed = 1;

  double band_lo() const { return k_lo > 0.0 ? k_lo : 0.5 * k_f; }
  double band_hi() const { return k_hi > 0.0 ? k_hi : 2.0 * k_f; }
};

std::string to_string(ForcingKind k);
std::string to_string(AmplitudeLaw l);

/// Produces the force held constant over step `step`, given the velocity at
/// the start of that step. Samplers are immutable after construction, so the
/// same (u, step) always yields the same force.
class ForcingSampler {
 public:
  virtual ~ForcingSampler() = default;
  virtual SpectralField sample(const SpectralField& u, std::int64_t step) const = 0;
  /// Spectral indices carrying the force.
  virtual const std::vector<std::size_t>& support() const = 0;
  /// True when the last construction found a problem worth reporting
  /// (negative alpha, empty shell, ...).
  virtual std::string warning() const { return {}; }
};

/// Random solenoidal forcing on the shell. Phases are redrawn every step from
/// (seed, step); each mode's sign is chosen so that it does positive work on
/// the current velocity.
std::unique_ptr<ForcingSampler> make_shell_forcing(const Grid& g, const ForcingSpec& spec);

/// f = alpha * P_band u. Negative alpha is accepted and reported through
/// warning(); it acts as band damping.
std::unique_ptr<ForcingSampler> make_lundgren_forcing(const Grid& g, double alpha, double k_f,
                                                      double k_lo = 0.0, double k_hi = 0.0);

/// Dispatch on spec.kind; returns nullptr for ForcingKind::none.
std::unique_ptr<ForcingSampler> make_forcing(const Grid& g, const ForcingSpec& spec);

/// Indices of half-spectrum modes with k_lo <= |k| <= k_hi.
std::vector<std::size_t> band_modes(const Grid& g, double k_lo, double k_hi);

/// Band projection of a field.
SpectralField band_project(const SpectralField& u, double k_lo, double k_hi);

}  // namespace cascade
