#ifndef TBSPEC_FRIEDRICHS_HPP
#define TBSPEC_FRIEDRICHS_HPP

#include "tbspec/model.hpp"
#include "tbspec/quadrature.hpp"

#include <optional>
#include <vector>

namespace tbspec {

struct FiberOptions {
  int scan_n = 24;  // grid for the initial scan of the slice q -> u_p(q)
  int quad_n = 24;  // quadrature grid for Lambda
  bool richardson = true;  // extrapolate the n and n/2 singular-route sums
};

struct SliceExtrema {
  Channel alpha = Channel::One;
  TorusPoint p;
  double m = 0.0;      // min_q u_p(q)
  double M_big = 0.0;  // max_q u_p(q)
  TorusPoint minimizer;
  TorusPoint maximizer;
  Mat3 hessian = Mat3::Zero();  // Hessian of u_p at the minimizer
};

SliceExtrema slice_extrema(const ModelSpec& model, Channel a, const TorusPoint& p, const FiberOptions& opts = {});

// Samples of u_p - m_alpha(p) and phi_alpha^2 on a grid centred at the slice
// minimizer. Lambda(p, z) for any z <= m is then a single weighted sum, so a
// profile is the unit of reuse for root finding and z-schedules.
class FiberProfile {
 public:
  FiberProfile(const ModelSpec& model, Channel a, const TorusPoint& p, const FiberOptions& opts = {});

  const SliceExtrema& extrema() const { return ext_; }
  double m() const { return ext_.m; }
  Channel alpha() const { return ext_.alpha; }
  // True if the threshold value Lambda(p, m) is finite and computed by
  // singular subtraction.
  bool singular_route() const { return singular_; }

  QuadratureResult lambda(double z) const;
  double lambda_value(double z) const;
  double delta(double z, double mu) const { return 1.0 - mu * lambda_value(z); }

 private:
  double shift_for(double z) const;
  double sum(double eps, bool coarse) const;

  SliceExtrema ext_;
  int n_ = 0;
  double w_ = 0.0;
  long center_ = 0;
  bool singular_ = false;
  bool richardson_ = true;
  double gc_ = 0.0;
  double resolved_shift_ = 0.0;
  double dmin_ = 1e300;  // smallest u_p - m away from the minimizer node
  QuadraticWindow window_;
  std::vector<double> d_, g_, q_, chi_;
  std::vector<long> coarse_;  // nodes of the stride-2 subgrid
};

double lambda_of(const ModelSpec& model, Channel a, const TorusPoint& p, double z, const FiberOptions& opts = {});
double delta(const ModelSpec& model, Channel a, const TorusPoint& p, double z, double mu,
             const FiberOptions& opts = {});

double mu_zero(const ModelSpec& model, Channel a, const FiberOptions& opts = {});

struct MuMaxResult {
  double value = 0.0;
  TorusPoint argmax;
  double grid_value = 0.0;  // best value on the scan grid, before refinement
  int grid_n = 0;
};
MuMaxResult mu_max_detail(const ModelSpec& model, Channel a, int grid_n, const FiberOptions& opts = {});
inline double mu_max(const ModelSpec& model, Channel a, int grid_n, const FiberOptions& opts = {})
{
  return mu_max_detail(model, a, grid_n, opts).value;
}

// Negative: eigenvalues of h_alpha(p) below min(0, m_alpha(p)) = 0, the
// branch of the two-particle bands. BelowBand: any eigenvalue below m_alpha(p).
enum class BranchScope { Negative, BelowBand };

constexpr double kRootTolerance = 1e-12;

std::optional<double> bound_state(const FiberProfile& prof, double mu, BranchScope scope = BranchScope::Negative);
std::optional<double> bound_state(const ModelSpec& model, Channel a, const TorusPoint& p, double mu,
                                  BranchScope scope = BranchScope::Negative, const FiberOptions& opts = {});

bool in_coupling_region(const FiberProfile& prof, double mu);
bool in_coupling_region(const ModelSpec& model, Channel a, const TorusPoint& p, double mu,
                        const FiberOptions& opts = {});

struct BoundStateBranch {
  Channel alpha = Channel::One;
  double mu = 0.0;
  int grid_n = 0;
  std::vector<TorusPoint> p;
  std::vector<std::optional<double>> z;
};

// Branch samples over the uniform p-grid, ordered by grid index.
BoundStateBranch sample_branch(const ModelSpec& model, Channel a, double mu, int grid_n,
                               BranchScope scope = BranchScope::Negative, const FiberOptions& opts = {});

enum class ThresholdKind { ZeroEnergyResonance, ZeroEigenvalue, Regular };

struct ThresholdClass {
  ThresholdKind kind = ThresholdKind::Regular;
  double phi0 = 0.0;
  double delta00 = 0.0;
  double mu0 = 0.0;
};

const char* to_string(ThresholdKind k);

ThresholdClass classify_threshold(const ModelSpec& model, Channel a, const FiberOptions& opts = {});

struct ExpansionReport {
  double predicted_slope = 0.0;      // coefficient with l_beta
  double predicted_slope_alt = 0.0;  // coefficient with l_alpha
  bool l_index_ambiguous = false;    // l1 != l2, the two readings differ
  double fitted_slope = 0.0;
  double linear_coefficient = 0.0;
  double relative_error = 0.0;
  double fit_residual = 0.0;  // rms residual / rms data
  std::vector<double> z, delta;
  // c|p| <= Delta(p,0) <= C|p| on small p
  std::vector<double> p_norm, delta_over_p;
  double ratio_min = 0.0, ratio_max = 0.0;
};

ExpansionReport threshold_expansion_check(const ModelSpec& model, Channel a, const FiberOptions& opts = {});

struct LambdaIdentity {
  double lhs = 0.0;           // Lambda(p,0) - Lambda(0,0), both with the same grid centred at 0
  double lhs_production = 0.0;  // same difference from the production route (grids centred at minimizers)
  double production_error = 0.0;  // two-grid error estimate of the production difference
  double first = 0.0, second = 0.0;  // the two integrals of the identity
  double rhs() const { return first + second; }
};

// Lambda(p) - Lambda(0) = int [2c-(a+b)](a+b) phi^2/(4abc) + int (a-b)^2 phi^2/(4abc),
// a = u_p, b = u_{-p}, c = u_0, at z = 0.
LambdaIdentity lambda_difference_identity(const ModelSpec& model, Channel a, const TorusPoint& p,
                                          const FiberOptions& opts = {});

struct QuadraticReport {
  double delta00 = 0.0;
  std::vector<double> p_norm, ratio;  // Delta(p,0)/|p|^2 on coordinate rays
  double c_min = 0.0;
  double floor = 0.0;  // min Delta(p,0) over grid points with |p| >= 0.5
  double identity_error = 0.0;  // max |Delta(p,0) - (1 - mu(Lambda(0) + rhs))|, matched grids
  double identity_error_production = 0.0;
  double identity_production_tolerance = 0.0;
};

QuadraticReport zero_eigenvalue_quadratic_check(const ModelSpec& model, Channel a, const FiberOptions& opts = {});

struct MinimumAsymptotics {
  std::vector<double> radius, m, quad_ratio, drift;
  double predicted = 0.0;      // (l1 l2 - l^2)/(2 l_alpha)
  double predicted_alt = 0.0;  // (l1 l2 - l^2)/(2 l_beta)
  double max_rel_error = 0.0;  // of quad_ratio against predicted, over radius <= 0.05
  double drift_slope = 0.0;    // log-log slope over drifts above the noise floor
  int drift_points_above_floor = 0;
  bool drift_ok = false;
};

// Drifts below kDriftNoiseFloor + 2 |p| (Hessian error of the predicted shift)
// are treated as exact.
constexpr double kDriftNoiseFloor = 1e-10;

MinimumAsymptotics minimum_asymptotics(const ModelSpec& model, Channel a, const Vec3& direction,
                                       const std::vector<double>& radii, const FiberOptions& opts = {});

}  // namespace tbspec

#endif
