#include "tbspec/essential_spectrum.hpp"
#include "tbspec/errors.hpp"
#include "tbspec/optimize.hpp"
#include "tbspec/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

namespace tbspec {

const char* to_string(CouplingRegime r)
{
  switch (r) {
    case CouplingRegime::AboveMuMax: return "above-mu-max";
    case CouplingRegime::Intermediate: return "intermediate";
    default: return "at-or-below-mu0";
  }
}

const char* to_string(SpectrumRegime r)
{
  switch (r) {
    case SpectrumRegime::BothAboveMuMax: return "both-above-mu-max";
    case SpectrumRegime::Intermediate: return "intermediate";
    case SpectrumRegime::AtOrBelowMuZero: return "at-or-below-mu0";
    default: return "mixed";
  }
}

CouplingRegime coupling_regime(double mu, double mu0, double mu_max)
{
  const double tol = 1e-10;
  if (mu <= mu0 * (1.0 + tol)) return CouplingRegime::AtOrBelowMuZero;
  if (mu <= mu_max * (1.0 + tol)) return CouplingRegime::Intermediate;
  return CouplingRegime::AboveMuMax;
}

double global_max_energy(const ModelSpec& model, int grid_n)
{
  if (grid_n < 8) throw DomainError("global_max_energy: grid_n must be at least 8");
  using V6 = Eigen::Matrix<double, 6, 1>;
  auto u = [&](const V6& x) { return model.dispersion(x.head<3>(), x.tail<3>()); };

  UniformGrid g(grid_n);
  const long N = g.size();
  std::vector<Vec3> nodes(N);
  for (long i = 0; i < N; ++i) nodes[i] = g.node(i);

  // best few grid pairs as ascent seeds
  const int keep = 4;
  std::vector<std::pair<double, V6>> seeds;
  for (long i = 0; i < N; ++i)
    for (long j = 0; j < N; ++j) {
      double v = model.dispersion(nodes[i], nodes[j]);
      if (seeds.size() < keep || v > seeds.back().first) {
        V6 x;
        x << nodes[i], nodes[j];
        seeds.emplace_back(v, x);
        std::sort(seeds.begin(), seeds.end(), [](auto& a, auto& b) { return a.first > b.first; });
        if (seeds.size() > keep) seeds.pop_back();
      }
    }

  double best = seeds.front().first;
  for (auto& s : seeds) {
    V6 x = s.second;
    if (newton_extremum<6>(u, -1.0, x)) best = std::max(best, u(x));
  }
  return best;
}

ChannelThresholds channel_thresholds(const ModelSpec& model, Channel a, int grid_n, const FiberOptions& opts)
{
  ChannelThresholds t;
  t.mu0 = mu_zero(model, a, opts);
  MuMaxResult mm = mu_max_detail(model, a, grid_n, opts);
  t.mu_max = std::max(mm.value, t.mu0);
  t.mu_max_at = mm.argmax;
  return t;
}

namespace {

// Compass search minimizing sign*f over the torus.
Vec3 compass(const std::function<double(const Vec3&)>& f, Vec3 x, double fx, double step, double sign,
             double* fbest)
{
  int evals = 0;
  while (step > 1e-6 && evals < 300) {
    bool moved = false;
    for (int i = 0; i < 3 && !moved; ++i)
      for (double s : {1.0, -1.0}) {
        Vec3 y = wrap(x + s * step * Vec3::Unit(i));
        double fy = f(y);
        ++evals;
        if (sign * fy < sign * fx) {
          x = y, fx = fy, moved = true;
          break;
        }
      }
    if (!moved) step *= 0.5;
  }
  *fbest = fx;
  return x;
}

}  // namespace

TwoParticleBand two_particle_band_detail(const ModelSpec& model, Channel a, double mu, int grid_n,
                                         const FiberOptions& opts, const std::optional<ChannelThresholds>& thresholds)
{
  if (grid_n < 8) throw DomainError("two_particle_band: grid_n must be at least 8");
  if (!(mu > 0.0)) throw DomainError("two_particle_band: mu must be positive");
  ChannelThresholds th = thresholds ? *thresholds : channel_thresholds(model, a, grid_n, opts);

  TwoParticleBand tb;
  tb.alpha = a;
  tb.mu = mu;
  tb.mu0 = th.mu0;
  tb.mu_max = th.mu_max;
  tb.grid_n = grid_n;
  tb.regime = coupling_regime(mu, th.mu0, th.mu_max);
  if (tb.regime == CouplingRegime::AtOrBelowMuZero) return tb;

  BoundStateBranch br = sample_branch(model, a, mu, grid_n, BranchScope::Negative, opts);
  long imin = -1, imax = -1;
  for (long i = 0; i < static_cast<long>(br.z.size()); ++i) {
    if (!br.z[i]) {
      if (tb.regime == CouplingRegime::AboveMuMax)
        throw NumericalFault("two_particle_band: branch missing at p = " + br.p[i].str() + " although mu > mu_max");
      continue;
    }
    if (imin < 0 || *br.z[i] < *br.z[imin]) imin = i;
    if (imax < 0 || *br.z[i] > *br.z[imax]) imax = i;
  }
  if (imin < 0) throw NumericalFault("two_particle_band: no bound state found although mu > mu0");

  // absent states sit at the threshold 0 of the negative branch
  auto zf = [&](const Vec3& p) { return bound_state(model, a, TorusPoint(p), mu, BranchScope::Negative, opts).value_or(0.0); };
  double h = 2.0 * std::numbers::pi / grid_n;

  SpectralBand band;
  double zlo = 0.0;
  Vec3 plo = compass(zf, br.p[imin].coords(), *br.z[imin], 0.5 * h, 1.0, &zlo);
  band.lo = zlo;
  tb.argmin = TorusPoint(plo);
  tb.lo_refinement = std::abs(zlo - *br.z[imin]);

  if (tb.regime == CouplingRegime::AboveMuMax) {
    double zhi = 0.0;
    Vec3 phi = compass(zf, br.p[imax].coords(), *br.z[imax], 0.5 * h, -1.0, &zhi);
    band.hi = zhi;
    tb.argmax = TorusPoint(phi);
    tb.hi_refinement = std::abs(zhi - *br.z[imax]);
  } else {
    band.hi = 0.0;
  }
  tb.band = band;
  return tb;
}

std::vector<SpectralBand> merge_bands(std::vector<SpectralBand> bands)
{
  std::sort(bands.begin(), bands.end(), [](const SpectralBand& x, const SpectralBand& y) { return x.lo < y.lo; });
  std::vector<SpectralBand> out;
  for (const SpectralBand& b : bands) {
    if (!out.empty() && b.lo <= out.back().hi)
      out.back().hi = std::max(out.back().hi, b.hi);
    else
      out.push_back(b);
  }
  return out;
}

EssentialSpectrum essential_spectrum(const ModelSpec& model, int grid_n, const FiberOptions& opts,
                                     const ChannelThresholds& t1, const ChannelThresholds& t2)
{
  if (grid_n < 8) throw DomainError("essential_spectrum: grid_n must be at least 8");
  EssentialSpectrum es;
  es.M = global_max_energy(model, std::max(grid_n, 12));
  es.channel[0] = two_particle_band_detail(model, Channel::One, model.mu1, grid_n, opts, t1);
  es.channel[1] = two_particle_band_detail(model, Channel::Two, model.mu2, grid_n, opts, t2);

  std::vector<SpectralBand> all{{0.0, es.M}};
  if (es.channel[0].band) {
    es.a1 = es.channel[0].band->lo;
    es.b1 = es.channel[0].band->hi;
    all.push_back(*es.channel[0].band);
  }
  if (es.channel[1].band) {
    es.a2 = es.channel[1].band->lo;
    es.b2 = es.channel[1].band->hi;
    all.push_back(*es.channel[1].band);
  }
  es.bands = merge_bands(all);
  if (es.bands.back().hi > es.M * (1.0 + 1e-12))
    throw NumericalFault("essential_spectrum: band content above the maximum of u");

  CouplingRegime r1 = es.channel[0].regime, r2 = es.channel[1].regime;
  if (r1 != r2)
    es.regime = SpectrumRegime::Mixed;
  else if (r1 == CouplingRegime::AboveMuMax)
    es.regime = SpectrumRegime::BothAboveMuMax;
  else if (r1 == CouplingRegime::Intermediate)
    es.regime = SpectrumRegime::Intermediate;
  else
    es.regime = SpectrumRegime::AtOrBelowMuZero;
  return es;
}

EssentialSpectrum essential_spectrum(const ModelSpec& model, int grid_n, const FiberOptions& opts)
{
  return essential_spectrum(model, grid_n, opts, channel_thresholds(model, Channel::One, grid_n, opts),
                            channel_thresholds(model, Channel::Two, grid_n, opts));
}

}  // namespace tbspec
