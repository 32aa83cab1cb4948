#include "tbspec/efimov.hpp"
#include "tbspec/errors.hpp"
#include "tbspec/parallel.hpp"
#include "tbspec/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace tbspec {

using std::numbers::pi;

SobolevParams sobolev_params(double l1, double l2, double l)
{
  if (!(l1 > 0.0) || !(l2 > 0.0)) throw DomainError("sobolev_params: l1 and l2 must be positive");
  if (!(l != 0.0)) throw DomainError("sobolev_params: l must be nonzero");
  const double p = l1 * l2;
  if (!(p > l * l)) throw DomainError("sobolev_params: requires l1 l2 > l^2");
  SobolevParams sp;
  sp.u12 = std::sqrt(p / (p - l * l));
  sp.s12 = l / std::sqrt(p);
  sp.r12 = 0.5 * std::log(l1 / l2);
  return sp;
}

namespace {

struct Rule {
  std::vector<double> x, w;
};

const Rule& gauss_rule(int n)
{
  static std::mutex mtx;
  static std::map<int, std::unique_ptr<Rule>> cache;
  std::lock_guard<std::mutex> lk(mtx);
  auto& slot = cache[n];
  if (!slot) {
    slot = std::make_unique<Rule>();
    gauss_legendre<double>(n, slot->x, slot->w);
  }
  return *slot;
}

// sinh(y theta) / sinh(pi y), even in y, written to avoid overflow
double sinh_ratio(double y, double theta)
{
  const double a = std::abs(y);
  if (a < 1e-12) return theta / pi;
  return std::exp(a * (theta - pi)) * std::expm1(-2.0 * a * theta) / std::expm1(-2.0 * a * pi);
}

double project(const SobolevParams& sp, double y, int l, const Rule& rule)
{
  CompensatedSum<double> acc;
  for (size_t k = 0; k < rule.x.size(); ++k) {
    const double t = rule.x[k];
    const double st = sp.s12 * t;
    const double theta = std::acos(st);
    acc.add(rule.w[k] * sinh_ratio(y, theta) / std::sqrt(1.0 - st * st) * legendre(l, t));
  }
  return sp.u12 * acc.value();
}

void check_params(const SobolevParams& sp)
{
  if (!(std::abs(sp.s12) < 1.0) || !(sp.u12 > 0.0)) throw DomainError("Sobolev parameters out of range");
}

}  // namespace

double s_hat_channel(const SobolevParams& sp, double y, int l, int quad_n)
{
  check_params(sp);
  if (l < 0) throw DomainError("s_hat_channel: degree must be >= 0");
  if (quad_n < 32) throw DomainError("s_hat_channel: quad_n must be at least 32");
  const double a = project(sp, y, l, gauss_rule(quad_n));
  const double b = project(sp, y, l, gauss_rule(2 * quad_n));
  if (std::abs(a - b) > 1e-8)
    throw NumericalFault("s_hat_channel: Legendre projection not converged at y = " + std::to_string(y) +
                         ", degree " + std::to_string(l));
  return b;
}

double s_hat_degree0_closed_form(const SobolevParams& sp, double y)
{
  check_params(sp);
  const double s = sp.s12;
  const double as = std::asin(s);
  // sinh(y as)/(s y), with its s -> 0 and y -> 0 limits
  const double ratio0 = std::abs(s) < 1e-300 ? 1.0 : as / s;
  const double a = std::abs(y);
  if (a < 1e-12) return sp.u12 * ratio0;
  if (std::abs(s) < 1e-300) return sp.u12 / std::cosh(pi * a / 2);
  // sinh(a|as|)/cosh(pi a/2) = exp(a(|as| - pi/2)) (1 - e^{-2a|as|}) / (1 + e^{-pi a})
  const double aas = std::abs(as);
  const double q = std::exp(a * (aas - pi / 2)) * (-std::expm1(-2.0 * a * aas)) / (1.0 + std::exp(-pi * a));
  return sp.u12 * q / (std::abs(s) * a);
}

std::vector<SHatEigenvalue> s_hat_spectrum(const SobolevParams& sp, double y, int l_max, int quad_n)
{
  if (l_max < 0) throw DomainError("s_hat_spectrum: l_max must be >= 0");
  std::vector<SHatEigenvalue> out;
  for (int l = 0; l <= l_max; ++l) {
    double a = std::abs(s_hat_channel(sp, y, l, quad_n));
    out.push_back({a, l, 2 * l + 1});
    out.push_back({-a, l, 2 * l + 1});
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.value > b.value; });
  return out;
}

int YGrid::points() const { return static_cast<int>(std::lround((hi - lo) / step)) + 1; }

UResult u_of_lambda_detail(const SobolevParams& sp, double lambda, const UOptions& opts)
{
  if (!(lambda > 0.0)) throw DomainError("u_of_lambda: lambda must be positive");
  if (!(opts.grid.step > 0.0) || !(opts.grid.hi > opts.grid.lo)) throw DomainError("u_of_lambda: invalid y-grid");
  if (opts.l_max < 0) throw DomainError("u_of_lambda: l_max must be >= 0");
  check_params(sp);

  UResult res;
  res.lambda = lambda;
  res.grid = opts.grid;
  const int L = opts.l_max + 1;
  Eigen::MatrixXd vals;
  for (;;) {
    const int N = res.grid.points();
    vals.resize(L, N);
    const YGrid& g = res.grid;
    parallel_for(N, [&](long i) {
      for (int l = 0; l < L; ++l) vals(l, i) = std::abs(s_hat_channel(sp, g.at(static_cast<int>(i)), l, opts.quad_n));
    });
    bool boundary = false;
    for (int l = 0; l < L; ++l) boundary = boundary || vals(l, 0) > lambda || vals(l, N - 1) > lambda;
    if (!boundary) break;
    if (res.widenings >= opts.max_widenings)
      throw DomainError("u_of_lambda: nonzero count at the boundary of the y-grid; use a wider grid");
    const double half = 0.5 * (res.grid.hi - res.grid.lo);
    res.grid.lo -= half;
    res.grid.hi += half;
    ++res.widenings;
  }

  const int N = res.grid.points();
  const YGrid& g = res.grid;
  res.counts.assign(N, 0);
  double total = 0.0;
  for (int l = 0; l < L; ++l) {
    DegreeMeasure dm;
    dm.degree = l;
    dm.peak = vals.row(l).maxCoeff();
    auto f = [&](double y) { return std::abs(s_hat_channel(sp, y, l, opts.quad_n)) - lambda; };
    double entry = 0.0;
    for (int i = 0; i < N; ++i) {
      if (vals(l, i) > lambda) res.counts[i] += 2 * l + 1;
      if (i + 1 == N) break;
      const bool in0 = vals(l, i) > lambda, in1 = vals(l, i + 1) > lambda;
      if (in0 == in1) continue;
      double a = g.at(i), b = g.at(i + 1);
      for (int it = 0; it < 60 && b - a > 1e-14 * std::max(1.0, std::abs(a)); ++it) {
        const double m = 0.5 * (a + b);
        ((f(m) > 0.0) == in0 ? a : b) = m;
      }
      const double c = 0.5 * (a + b);
      dm.crossings.push_back(c);
      if (in1)
        entry = c;
      else
        dm.measure += c - entry;
    }
    total += (2 * l + 1) * dm.measure;
    res.degrees.push_back(dm);
  }
  res.top_degree_contributes = res.degrees.back().measure > 0.0;
  res.value = total / (4.0 * pi);

  CompensatedSum<double> trap;
  for (int i = 0; i < N; ++i) trap.add((i == 0 || i == N - 1 ? 0.5 : 1.0) * res.counts[i]);
  res.trapezoid = trap.value() * g.step / (4.0 * pi);
  return res;
}

double s_r_kernel(const SobolevParams& sp, double x, int l, int quad_n)
{
  check_params(sp);
  const Rule& rule = gauss_rule(quad_n);
  const double c = std::cosh(x + sp.r12);
  CompensatedSum<double> acc;
  for (size_t k = 0; k < rule.x.size(); ++k)
    acc.add(rule.w[k] * legendre(l, rule.x[k]) / (c + sp.s12 * rule.x[k]));
  return sp.u12 / (2.0 * pi) * acc.value();
}

SrCount s_r_count_detail(const SobolevParams& sp, double r, int grid_1d_n, int l_max, int quad_n)
{
  if (!(r > 0.0)) throw DomainError("s_r_count: r must be positive");
  if (grid_1d_n < 64) throw DomainError("s_r_count: grid_1d_n must be at least 64");
  if (l_max < 0) throw DomainError("s_r_count: l_max must be >= 0");
  check_params(sp);

  SrCount sc;
  sc.r = r;
  sc.nodes = grid_1d_n;
  const int N = grid_1d_n;
  const double h = r / N;
  for (int l = 0; l <= l_max; ++l) {
    // difference kernel, index d + N - 1 holds k_l(d h)
    std::vector<double> kd(2 * N - 1);
    parallel_for(2 * N - 1, [&](long i) { kd[i] = h * s_r_kernel(sp, (i - (N - 1)) * h, l, quad_n); });
    Eigen::MatrixXd K(N, N);
    for (int j = 0; j < N; ++j)
      for (int i = 0; i < N; ++i) K(i, j) = kd[i - j + N - 1];

    // ||K||_2 <= sqrt(||K||_1 ||K||_inf): nothing can exceed 1
    const double bound = std::sqrt(K.cwiseAbs().colwise().sum().maxCoeff() * K.cwiseAbs().rowwise().sum().maxCoeff());
    int count = 0;
    if (bound > 1.0) {
      Eigen::VectorXd sv;
      if (sp.r12 == 0.0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K, Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success) throw NumericalFault("s_r_count: eigensolver failed");
        sv = es.eigenvalues().cwiseAbs();
      } else {
        Eigen::BDCSVD<Eigen::MatrixXd> svd(K);
        if (svd.info() != Eigen::Success) throw NumericalFault("s_r_count: SVD failed");
        sv = svd.singularValues();
      }
      for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] > 1.0 + kCountTolerance) ++count;
    }
    sc.per_degree.push_back(count);
    sc.n += (2 * l + 1) * count;
  }
  return sc;
}

NzFit fit_counts(const std::vector<double>& z, const std::vector<int>& counts, const std::vector<bool>& flagged,
                 double u0)
{
  if (z.size() != counts.size() || z.size() != flagged.size())
    throw DomainError("fit_nz_slope: z, counts and flags differ in length");
  std::vector<size_t> use;
  for (size_t i = 0; i < z.size(); ++i)
    if (!flagged[i]) use.push_back(i);
  NzFit fit;
  if (use.size() < 3) {
    use.clear();
    for (size_t i = 0; i < z.size(); ++i) use.push_back(i);
    fit.used_flagged_points = std::any_of(flagged.begin(), flagged.end(), [](bool b) { return b; });
  }
  if (use.size() < 3) throw DomainError("fit_nz_slope: at least 3 count results are required");
  for (size_t i : use)
    if (!(z[i] < 0.0)) throw DomainError("fit_nz_slope: z values must be negative");

  const long n = static_cast<long>(use.size());
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd b(n);
  double xmin = 1e300, xmax = -1e300;
  bool constant = true;
  for (long k = 0; k < n; ++k) {
    const double x = std::abs(std::log(std::abs(z[use[k]])));
    A(k, 0) = 1.0;
    A(k, 1) = x;
    b[k] = counts[use[k]];
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    constant = constant && counts[use[k]] == counts[use[0]];
  }
  fit.points = static_cast<int>(n);
  fit.log_range = xmax - xmin;
  if (!(fit.log_range > 0.0)) throw DomainError("fit_nz_slope: all z values coincide");
  if (constant) {
    fit.slope = 0.0;
    fit.intercept = b[0];
  } else {
    Eigen::Vector2d c = A.colPivHouseholderQr().solve(b);
    fit.intercept = c[0];
    fit.slope = c[1];
  }
  fit.residual = std::sqrt((A * Eigen::Vector2d(fit.intercept, fit.slope) - b).squaredNorm() / n);

  const double expected = u0 * fit.log_range;
  fit.range_too_shallow = constant || expected < 3.0;
  if (fit.range_too_shallow)
    fit.note = "range too shallow: expected growth " + std::to_string(expected) +
               " eigenvalues over the fitted range; the slope is not a quantitative estimate";
  else
    fit.note = "slope fitted over " + std::to_string(fit.log_range) + " units of |log|z||";
  if (fit.used_flagged_points) fit.note += "; includes resolution-flagged points";
  return fit;
}

EfimovEstimate efimov_estimate(const SobolevParams& sp, const EfimovOptions& opts)
{
  EfimovEstimate est;
  est.params = sp;
  est.detail = u_of_lambda_detail(sp, 1.0, opts.u);
  est.u0 = est.detail.value;
  est.u0_trapezoid = est.detail.trapezoid;
  est.lower_bound = std::log(2.0 * sp.u12) / (pi * pi);
  est.lower_bound_satisfied = est.u0 >= est.lower_bound;

  for (int i = -200; i <= 200; ++i) {
    const double y = 0.05 * i;
    est.degree0_closed_form_error = std::max(
        est.degree0_closed_form_error, std::abs(s_hat_channel(sp, y, 0, opts.u.quad_n) - s_hat_degree0_closed_form(sp, y)));
  }

  if (opts.compute_sr) {
    for (double r : opts.r_schedule) {
      int nodes = std::max(64, static_cast<int>(std::lround(opts.nodes_per_unit * r)));
      est.sr_sequence.push_back(s_r_count_detail(sp, r, nodes, opts.u.l_max, opts.u.quad_n));
    }
    est.sr_error_nonincreasing = true;
    for (size_t k = 1; k < est.sr_sequence.size(); ++k) {
      double e0 = std::abs(est.sr_sequence[k - 1].ratio() - est.u0);
      double e1 = std::abs(est.sr_sequence[k].ratio() - est.u0);
      if (e1 > e0 + 1e-12) est.sr_error_nonincreasing = false;
    }
  }
  return est;
}

EfimovEstimate fit_nz_slope(const std::vector<CountResult>& counts, const SobolevParams& sp,
                            const EfimovOptions& opts)
{
  EfimovEstimate est = efimov_estimate(sp, opts);
  std::vector<double> z;
  std::vector<int> n;
  std::vector<bool> fl;
  for (const auto& c : counts) {
    z.push_back(c.z);
    n.push_back(c.count);
    fl.push_back(c.resolution_flag);
  }
  est.nz_fit = fit_counts(z, n, fl, est.u0);
  est.has_nz_fit = true;
  return est;
}

}  // namespace tbspec
