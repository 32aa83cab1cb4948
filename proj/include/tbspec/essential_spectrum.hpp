#ifndef TBSPEC_ESSENTIAL_SPECTRUM_HPP
#define TBSPEC_ESSENTIAL_SPECTRUM_HPP

#include "tbspec/friedrichs.hpp"

#include <optional>
#include <vector>

namespace tbspec {

struct SpectralBand {
  double lo = 0.0, hi = 0.0;
};

// Placement of one coupling relative to its thresholds mu0 <= mu_max.
enum class CouplingRegime { AboveMuMax, Intermediate, AtOrBelowMuZero };

enum class SpectrumRegime { BothAboveMuMax, Intermediate, AtOrBelowMuZero, Mixed };

const char* to_string(CouplingRegime r);
const char* to_string(SpectrumRegime r);

// Classification with inclusive boundaries: mu = mu_max is Intermediate,
// mu = mu0 is AtOrBelowMuZero (relative tolerance 1e-10).
CouplingRegime coupling_regime(double mu, double mu0, double mu_max);

double global_max_energy(const ModelSpec& model, int grid_n = 12);

struct ChannelThresholds {
  double mu0 = 0.0;
  double mu_max = 0.0;
  TorusPoint mu_max_at;
};

ChannelThresholds channel_thresholds(const ModelSpec& model, Channel a, int grid_n, const FiberOptions& opts = {});

struct TwoParticleBand {
  Channel alpha = Channel::One;
  CouplingRegime regime = CouplingRegime::AtOrBelowMuZero;
  double mu = 0.0, mu0 = 0.0, mu_max = 0.0;
  std::optional<SpectralBand> band;
  TorusPoint argmin, argmax;
  // |refined - grid| for each end; the refinement-difference error bar
  double lo_refinement = 0.0, hi_refinement = 0.0;
  int grid_n = 0;
};

TwoParticleBand two_particle_band_detail(const ModelSpec& model, Channel a, double mu, int grid_n,
                                         const FiberOptions& opts = {},
                                         const std::optional<ChannelThresholds>& thresholds = std::nullopt);
inline std::optional<SpectralBand> two_particle_band(const ModelSpec& model, Channel a, double mu, int grid_n,
                                                     const FiberOptions& opts = {})
{
  return two_particle_band_detail(model, a, mu, grid_n, opts).band;
}

struct EssentialSpectrum {
  std::vector<SpectralBand> bands;  // sorted, pairwise disjoint
  SpectrumRegime regime = SpectrumRegime::AtOrBelowMuZero;
  double M = 0.0;
  std::optional<double> a1, b1, a2, b2;
  TwoParticleBand channel[2];

  double bottom() const { return bands.empty() ? 0.0 : bands.front().lo; }
};

// Sort and merge overlapping or touching bands.
std::vector<SpectralBand> merge_bands(std::vector<SpectralBand> bands);

EssentialSpectrum essential_spectrum(const ModelSpec& model, int grid_n, const FiberOptions& opts = {});
// Same, with mu0 / mu_max of both channels supplied (they do not depend on
// the couplings, so sweeps over mu can reuse them).
EssentialSpectrum essential_spectrum(const ModelSpec& model, int grid_n, const FiberOptions& opts,
                                     const ChannelThresholds& t1, const ChannelThresholds& t2);

}  // namespace tbspec

#endif
