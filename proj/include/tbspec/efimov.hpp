#ifndef TBSPEC_EFIMOV_HPP
#define TBSPEC_EFIMOV_HPP

#include "tbspec/birman_schwinger.hpp"
#include "tbspec/model.hpp"

#include <string>
#include <vector>

namespace tbspec {

struct SobolevParams {
  double u12 = 0.0;  // sqrt(l1 l2 / (l1 l2 - l^2))
  double r12 = 0.0;  // log(l1 / l2) / 2
  double s12 = 0.0;  // l / sqrt(l1 l2)
};

SobolevParams sobolev_params(double l1, double l2, double l);
inline SobolevParams sobolev_params(const HessianBlocks& hb) { return sobolev_params(hb.l1, hb.l2, hb.l); }

// Degree-l Legendre projection of the y-Fourier transform of the S_r kernel,
//   a_l(y) = u int_{-1}^{1} sinh(y theta)/(sinh(pi y) sin theta) P_l(t) dt,  theta = arccos(s t).
// The phase exp(i r y) is dropped; only |a_l| enters the spectrum.
// Computed with quad_n and 2 quad_n Gauss points; disagreement above 1e-8 faults.
double s_hat_channel(const SobolevParams& sp, double y, int l, int quad_n = 64);

// The closed form of the degree-0 channel, u sinh(y arcsin s)/(s y cosh(pi y / 2)).
double s_hat_degree0_closed_form(const SobolevParams& sp, double y);

struct SHatEigenvalue {
  double value = 0.0;
  int degree = 0;
  int multiplicity = 1;  // 2 l + 1
};

// Eigenvalues +-|a_l(y)|, l = 0..l_max, of the 2x2 block operator, descending.
std::vector<SHatEigenvalue> s_hat_spectrum(const SobolevParams& sp, double y, int l_max, int quad_n = 64);

struct YGrid {
  double lo = -50.0, hi = 50.0, step = 0.05;
  int points() const;
  double at(int i) const { return lo + i * step; }
};

struct DegreeMeasure {
  int degree = 0;
  double peak = 0.0;     // max |a_l| on the y-grid
  double measure = 0.0;  // |{y : |a_l(y)| > lambda}|, endpoints refined
  std::vector<double> crossings;
};

struct UResult {
  double lambda = 0.0;
  double value = 0.0;      // (4 pi)^-1 sum_l (2l+1) measure_l
  double trapezoid = 0.0;  // (4 pi)^-1 times the trapezoid integral of the grid counts
  YGrid grid;              // after widening
  int widenings = 0;
  std::vector<DegreeMeasure> degrees;
  std::vector<int> counts;  // n(lambda, S^(y_i)) with multiplicity
  bool top_degree_contributes = false;
};

struct UOptions {
  YGrid grid;
  int l_max = 8;
  int quad_n = 64;
  int max_widenings = 6;  // 0: a nonzero count at the boundary faults
};

UResult u_of_lambda_detail(const SobolevParams& sp, double lambda, const UOptions& opts = {});
inline double u_of_lambda(const SobolevParams& sp, double lambda, const UOptions& opts = {})
{
  return u_of_lambda_detail(sp, lambda, opts).value;
}

// Kernel of the degree-l channel of S_r as a function of x - x',
//   k_l(x) = (u / 2 pi) int_{-1}^{1} P_l(t) / (cosh(x + r12) + s t) dt.
double s_r_kernel(const SobolevParams& sp, double x, int l, int quad_n = 64);

struct SrCount {
  double r = 0.0;
  int n = 0;          // n(1, S_r) with multiplicity
  int nodes = 0;
  std::vector<int> per_degree;  // counts before the 2l+1 factor
  double ratio() const { return r > 0.0 ? 0.5 * n / r : 0.0; }
};

// Midpoint Nystrom discretization on (0, r) with grid_1d_n nodes.
SrCount s_r_count_detail(const SobolevParams& sp, double r, int grid_1d_n, int l_max = 8, int quad_n = 64);
inline int s_r_count(const SobolevParams& sp, double r, int grid_1d_n, int l_max = 8)
{
  return s_r_count_detail(sp, r, grid_1d_n, l_max).n;
}

struct NzFit {
  double slope = 0.0, intercept = 0.0;
  double residual = 0.0;  // rms of count - fit
  int points = 0;
  bool used_flagged_points = false;
  double log_range = 0.0;  // max - min of |log|z|| over the fitted points
  bool range_too_shallow = false;
  std::string note;
};

// Least-squares N = intercept + slope |log|z||. u0 is used to judge whether
// the range can resolve the slope at all.
NzFit fit_counts(const std::vector<double>& z, const std::vector<int>& counts, const std::vector<bool>& flagged,
                 double u0);

struct EfimovOptions {
  UOptions u;
  std::vector<double> r_schedule{25, 50, 100, 200};
  double nodes_per_unit = 8.0;  // S_r grid density
  bool compute_sr = true;
};

struct EfimovEstimate {
  SobolevParams params;
  double u0 = 0.0;
  double u0_trapezoid = 0.0;
  double lower_bound = 0.0;  // log(2 u12) / pi^2
  bool lower_bound_satisfied = false;
  double degree0_closed_form_error = 0.0;  // max over the y-grid
  UResult detail;
  std::vector<SrCount> sr_sequence;
  bool sr_error_nonincreasing = false;
  NzFit nz_fit;
  bool has_nz_fit = false;
};

EfimovEstimate efimov_estimate(const SobolevParams& sp, const EfimovOptions& opts = {});

// Estimate plus the N(z) fit of the given counts.
EfimovEstimate fit_nz_slope(const std::vector<CountResult>& counts, const SobolevParams& sp,
                            const EfimovOptions& opts = {});

}  // namespace tbspec

#endif
