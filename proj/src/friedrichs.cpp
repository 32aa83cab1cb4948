#include "tbspec/friedrichs.hpp"
#include "tbspec/errors.hpp"
#include "tbspec/optimize.hpp"
#include "tbspec/parallel.hpp"

#include <cmath>
#include <functional>
#include <numbers>

namespace tbspec {

namespace {

using ScalarField = std::function<double(const Vec3&)>;

}  // namespace

SliceExtrema slice_extrema(const ModelSpec& model, Channel a, const TorusPoint& p, const FiberOptions& opts)
{
  SliceExtrema ex;
  ex.alpha = a;
  ex.p = p;
  const Vec3 pv = p.coords();
  ScalarField u = [&](const Vec3& q) { return model.fiber(a, pv, q); };

  UniformGrid grid(opts.scan_n);
  long imin = 0, imax = 0;
  double vmin = 1e300, vmax = -1e300;
  for (long i = 0; i < grid.size(); ++i) {
    double v = u(grid.node(i));
    if (v < vmin) vmin = v, imin = i;
    if (v > vmax) vmax = v, imax = i;
  }

  Vec3 xmin = grid.node(imin), xmax = grid.node(imax);
  if (!newton_extremum<3>(u, 1.0, xmin))
    throw NumericalFault("slice_extrema: Newton did not converge from grid point " + TorusPoint(grid.node(imin)).str());
  if (!newton_extremum<3>(u, -1.0, xmax))
    throw NumericalFault("slice_extrema: Newton did not converge from grid point " + TorusPoint(grid.node(imax)).str());

  double m = u(xmin), M = u(xmax);
  // never report worse than the scan
  if (m > vmin) m = vmin, xmin = grid.node(imin);
  if (M < vmax) M = vmax, xmax = grid.node(imax);

  ex.m = m;
  ex.M_big = M;
  ex.minimizer = TorusPoint(xmin);
  ex.maximizer = TorusPoint(xmax);
  ex.hessian = hessian_richardson<3>(u, xmin, 1e-3);
  ex.hessian = 0.5 * (ex.hessian + ex.hessian.transpose()).eval();
  return ex;
}

FiberProfile::FiberProfile(const ModelSpec& model, Channel a, const TorusPoint& p, const FiberOptions& opts)
  : ext_(slice_extrema(model, a, p, opts)), n_(opts.quad_n), richardson_(opts.richardson)
{
  Eigen::SelfAdjointEigenSolver<Mat3> es(ext_.hessian, Eigen::EigenvaluesOnly);
  double lmax = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  singular_ = es.eigenvalues().minCoeff() > 1e-8 * lmax;
  if (singular_) window_ = QuadraticWindow(ext_.hessian);
  // beyond this shift the nearest complex pole of 1/(u_p - z) sits two fine
  // spacings off the real torus and the plain trapezoid sum is already
  // exponentially accurate
  const double h = 2.0 * std::numbers::pi / std::max(n_, 1);
  resolved_shift_ = es.eigenvalues().maxCoeff() * 4.0 * h * h;

  const FormFactor& phi = model.phi(a);
  const Vec3 pv = p.coords();
  const Vec3 c = ext_.minimizer.coords();
  UniformGrid grid(n_, c);
  w_ = grid.weight();
  center_ = grid.center_linear();
  gc_ = singular_ ? std::pow(phi(c), 2) : 0.0;

  const long N = grid.size();
  d_.resize(N);
  g_.resize(N);
  q_.assign(N, 0.0);
  chi_.assign(N, 0.0);
  for (long i = 0; i < N; ++i) {
    Vec3 x = grid.displacement(i);
    Vec3 t = wrap(c + x);
    d_[i] = model.fiber(a, pv, t) - ext_.m;
    double f = phi(t);
    g_[i] = f * f;
    if (singular_) {
      q_[i] = window_.form(x);
      chi_[i] = window_.window(q_[i]);
    }
    long k = i % n_, j = (i / n_) % n_, l = i / (static_cast<long>(n_) * n_);
    if (i != center_) dmin_ = std::min(dmin_, d_[i]);
    if (grid.offset(static_cast<int>(k)) % 2 == 0 && grid.offset(static_cast<int>(j)) % 2 == 0 &&
        grid.offset(static_cast<int>(l)) % 2 == 0)
      coarse_.push_back(i);
  }
}

double FiberProfile::sum(double eps, bool coarse) const
{
  CompensatedSum<double> acc;
  auto term = [&](long i) {
    if (!singular_) return g_[i] / (d_[i] + eps);
    if (i == center_) return 0.0;
    return g_[i] / (d_[i] + eps) - gc_ * chi_[i] / (q_[i] + eps);
  };
  if (coarse) {
    for (long i : coarse_) acc.add(term(i));
  } else {
    const long N = static_cast<long>(d_.size());
    for (long i = 0; i < N; ++i) acc.add(term(i));
  }
  double w = coarse ? 8.0 * w_ : w_;
  return acc.value() * w + (singular_ ? gc_ * window_.integral(eps) : 0.0);
}

double FiberProfile::shift_for(double z) const
{
  double eps = ext_.m - z;
  if (eps < -1e-12 * (1.0 + std::abs(ext_.m)))
    throw DomainError("Lambda(p, z) requested above the slice minimum m(p)");
  eps = std::max(eps, 0.0);
  if (eps == 0.0) {
    if (!singular_) throw NumericalFault("threshold value diverges: degenerate slice minimum at p = " + ext_.p.str());
    if (dmin_ <= 1e-12)
      throw NumericalFault("threshold integrand: slice vanishes away from its minimizer at p = " + ext_.p.str());
  }
  return eps;
}

// With the singular part subtracted, the punctured-grid error of the
// remainder is c h^3 + O(h^5), so one Richardson step against the stride-2
// subgrid removes the leading term.
QuadratureResult FiberProfile::lambda(double z) const
{
  double eps = shift_for(z);
  QuadratureResult r;
  double fine = sum(eps, false);
  if (n_ < 8) {
    r.value = fine;
    return r;
  }
  double coarse = sum(eps, true);
  if (singular_ && richardson_ && eps < resolved_shift_) {
    r.value = fine + (fine - coarse) / 7.0;
    r.error_estimate = std::abs(fine - coarse) / 7.0;
  } else {
    r.value = fine;
    r.error_estimate = std::abs(fine - coarse);
  }
  return r;
}

double FiberProfile::lambda_value(double z) const
{
  double eps = shift_for(z);
  if (singular_ && richardson_ && n_ >= 8 && eps < resolved_shift_) return lambda(z).value;
  return sum(eps, false);
}

double lambda_of(const ModelSpec& model, Channel a, const TorusPoint& p, double z, const FiberOptions& opts)
{
  return FiberProfile(model, a, p, opts).lambda(z).value;
}

double delta(const ModelSpec& model, Channel a, const TorusPoint& p, double z, double mu, const FiberOptions& opts)
{
  return 1.0 - mu * lambda_of(model, a, p, z, opts);
}

double mu_zero(const ModelSpec& model, Channel a, const FiberOptions& opts)
{
  double L = lambda_of(model, a, TorusPoint(), 0.0, opts);
  if (!(L > 0.0)) throw NumericalFault("mu_zero: Lambda(0,0) is not positive (vanishing form factor?)");
  return 1.0 / L;
}

MuMaxResult mu_max_detail(const ModelSpec& model, Channel a, int grid_n, const FiberOptions& opts)
{
  if (grid_n < 8) throw DomainError("mu_max: grid_n must be at least 8");
  auto inv_lambda = [&](const Vec3& p) { return 1.0 / lambda_of(model, a, TorusPoint(p), 0.0, opts); };

  UniformGrid grid(grid_n);
  MuMaxResult r;
  r.grid_n = grid_n;
  r.grid_value = -1.0;
  Vec3 best = Vec3::Zero();
  for (long i = 0; i < grid.size(); ++i) {
    if (grid.mirror(i) < i) continue;
    Vec3 p = grid.node(i);
    double v = inv_lambda(p);
    if (v > r.grid_value) r.grid_value = v, best = p;
  }

  // compass search around the best node
  double fbest = r.grid_value;
  double step = 0.5 * grid.spacing();
  int evals = 0;
  while (step > 1e-6 && evals < 400) {
    bool moved = false;
    for (int i = 0; i < 3 && !moved; ++i)
      for (double sgn : {1.0, -1.0}) {
        Vec3 x = wrap(best + sgn * step * Vec3::Unit(i));
        double v = inv_lambda(x);
        ++evals;
        if (v > fbest) {
          fbest = v, best = x, moved = true;
          break;
        }
      }
    if (!moved) step *= 0.5;
  }
  r.value = fbest;
  r.argmax = TorusPoint(best);
  return r;
}

std::optional<double> bound_state(const FiberProfile& prof, double mu, BranchScope scope)
{
  if (!(mu > 0.0)) throw DomainError("bound_state: mu must be positive");
  const double m = prof.m();
  double zmax = scope == BranchScope::Negative ? std::min(0.0, m) : m;
  if (zmax >= m && !prof.singular_route()) zmax = m - 1e-8;

  auto D = [&](double z) { return prof.delta(z, mu); };
  if (D(zmax) >= 0.0) return std::nullopt;

  double gap = std::max(1.0, std::abs(zmax));
  double zlo = zmax - gap;
  int tries = 0;
  while (D(zlo) <= 0.0) {
    gap *= 2.0;
    zlo = zmax - gap;
    if (++tries > 60) throw NumericalFault("bound_state: no bracket with Delta > 0 found");
  }
  double lo = zlo, hi = zmax;
  for (int it = 0; it < 400 && hi - lo > kRootTolerance; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (D(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  double root = 0.5 * (lo + hi);
  if (zmax - root > 1e-9) {
    for (int k = 1; k <= 16; ++k) {
      double zk = root + (zmax - root) * k / 17.0;
      if (D(zk) >= 0.0) throw NumericalFault("bound_state: sign change after the root (quadrature inaccuracy)");
    }
  }
  return root;
}

std::optional<double> bound_state(const ModelSpec& model, Channel a, const TorusPoint& p, double mu,
                                  BranchScope scope, const FiberOptions& opts)
{
  return bound_state(FiberProfile(model, a, p, opts), mu, scope);
}

bool in_coupling_region(const FiberProfile& prof, double mu)
{
  return 1.0 / prof.lambda_value(0.0) < mu;
}

bool in_coupling_region(const ModelSpec& model, Channel a, const TorusPoint& p, double mu, const FiberOptions& opts)
{
  return in_coupling_region(FiberProfile(model, a, p, opts), mu);
}

BoundStateBranch sample_branch(const ModelSpec& model, Channel a, double mu, int grid_n, BranchScope scope,
                               const FiberOptions& opts)
{
  UniformGrid grid(grid_n);
  BoundStateBranch br;
  br.alpha = a;
  br.mu = mu;
  br.grid_n = grid_n;
  br.p.resize(grid.size());
  br.z.resize(grid.size());
  parallel_for(grid.size(), [&](long i) {
    if (grid.mirror(i) < i) return;
    TorusPoint p(grid.node(i));
    br.p[i] = p;
    br.z[i] = bound_state(model, a, p, mu, scope, opts);
  });
  for (long i = 0; i < grid.size(); ++i) {
    long j = grid.mirror(i);
    if (j < i) {
      br.p[i] = TorusPoint(grid.node(i));
      br.z[i] = br.z[j];
    }
  }
  return br;
}

const char* to_string(ThresholdKind k)
{
  switch (k) {
    case ThresholdKind::ZeroEnergyResonance: return "zero-energy-resonance";
    case ThresholdKind::ZeroEigenvalue: return "zero-eigenvalue";
    default: return "regular";
  }
}

ThresholdClass classify_threshold(const ModelSpec& model, Channel a, const FiberOptions& opts)
{
  FiberProfile prof(model, a, TorusPoint(), opts);
  double L = prof.lambda(0.0).value;
  if (!(L > 0.0)) throw NumericalFault("classify_threshold: Lambda(0,0) is not positive");
  ThresholdClass tc;
  tc.mu0 = 1.0 / L;
  tc.phi0 = model.phi(a).value_at_zero();
  double mu = model.mu(a);
  tc.delta00 = 1.0 - mu * L;
  bool at_threshold = std::abs(mu - tc.mu0) / tc.mu0 <= 1e-10;
  if (at_threshold)
    tc.kind = std::abs(tc.phi0) > 1e-10 ? ThresholdKind::ZeroEnergyResonance : ThresholdKind::ZeroEigenvalue;
  return tc;
}

ExpansionReport threshold_expansion_check(const ModelSpec& model, Channel a, const FiberOptions& opts)
{
  ThresholdClass tc = classify_threshold(model, a, opts);
  if (tc.kind != ThresholdKind::ZeroEnergyResonance)
    throw DomainError("threshold_expansion_check: channel is not at a zero-energy resonance");
  const double mu = model.mu(a);
  HessianBlocks hb = estimate_hessian_blocks(model);

  ExpansionReport rep;
  const double pi2 = std::numbers::pi * std::numbers::pi;
  double common = 4.0 * std::numbers::sqrt2 * pi2 * mu * tc.phi0 * tc.phi0 / std::sqrt(hb.U.determinant());
  rep.predicted_slope = common / std::pow(hb.l_of(other(a)), 1.5);
  rep.predicted_slope_alt = common / std::pow(hb.l_of(a), 1.5);
  rep.l_index_ambiguous = std::abs(hb.l1 - hb.l2) > 1e-8 * std::max(hb.l1, hb.l2);

  FiberProfile prof(model, a, TorusPoint(), opts);
  const int nz = 13;
  Eigen::MatrixXd A(nz, 2);
  Eigen::VectorXd y(nz);
  for (int k = 0; k < nz; ++k) {
    double z = std::pow(10.0, -6.0 + 3.0 * k / (nz - 1));
    double d = prof.delta(-z, mu);
    rep.z.push_back(z);
    rep.delta.push_back(d);
    A(k, 0) = std::sqrt(z);
    A(k, 1) = z;
    y[k] = d;
  }
  Eigen::Vector2d coef = A.colPivHouseholderQr().solve(y);
  rep.fitted_slope = coef[0];
  rep.linear_coefficient = coef[1];
  rep.fit_residual = (A * coef - y).norm() / y.norm();
  rep.relative_error = std::abs(rep.fitted_slope - rep.predicted_slope) / std::abs(rep.predicted_slope);
  if (rep.fit_residual > 0.1)
    throw NumericalFault("threshold_expansion_check: fit residual above 10%, expansion regime not reached");

  // c|p| <= Delta(p,0) <= C|p|
  const Vec3 dirs[] = {Vec3(1, 0, 0), Vec3(1, 1, 0).normalized(), Vec3(1, 1, 1).normalized(),
                       Vec3(1, -1, 0).normalized()};
  rep.ratio_min = 1e300;
  rep.ratio_max = -1e300;
  for (const Vec3& d : dirs)
    for (double r : {0.025, 0.05, 0.1, 0.2}) {
      double v = delta(model, a, TorusPoint(Vec3(r * d)), 0.0, mu, opts);
      rep.p_norm.push_back(r);
      rep.delta_over_p.push_back(v / r);
      rep.ratio_min = std::min(rep.ratio_min, v / r);
      rep.ratio_max = std::max(rep.ratio_max, v / r);
    }
  return rep;
}

LambdaIdentity lambda_difference_identity(const ModelSpec& model, Channel a, const TorusPoint& p,
                                          const FiberOptions& opts)
{
  const FormFactor& phi = model.phi(a);
  const Vec3 pv = p.coords(), mp = -pv, zero = Vec3::Zero();
  SliceExtrema ex0 = slice_extrema(model, a, TorusPoint(), opts);
  UniformGrid grid(opts.quad_n);

  auto fa = [&](const Vec3& t) { return model.fiber(a, pv, t); };
  auto fb = [&](const Vec3& t) { return model.fiber(a, mp, t); };
  auto fc = [&](const Vec3& t) { return model.fiber(a, zero, t); };
  auto phi2 = [&](const Vec3& t) { return std::pow(phi(t), 2); };

  PointFn G1 = [&](const Vec3& t) {
    double A = fa(t), B = fb(t), C = fc(t);
    return (2 * C - (A + B)) * (A + B) * phi2(t) / (4 * A * B);
  };
  PointFn G2 = [&](const Vec3& t) {
    double A = fa(t), B = fb(t);
    return (A - B) * (A - B) * phi2(t) / (4 * A * B);
  };
  PointFn den = fc;

  LambdaIdentity li;
  QuadratureResult r1 = integrate_with_quadratic_singularity(G1, den, TorusPoint(), ex0.hessian, grid);
  QuadratureResult r2 = integrate_with_quadratic_singularity(G2, den, TorusPoint(), ex0.hessian, grid);
  li.first = r1.value;
  li.second = r2.value;

  // same grid, centred at 0
  QuadratureResult la = integrate_smooth([&](const Vec3& t) { return phi2(t) / fa(t); }, grid);
  QuadratureResult lc = integrate_with_quadratic_singularity(phi2, den, TorusPoint(), ex0.hessian, grid);
  li.lhs = la.value - lc.value;

  FiberProfile pp(model, a, p, opts), p0(model, a, TorusPoint(), opts);
  QuadratureResult lp = pp.lambda(0.0), l0 = p0.lambda(0.0);
  li.lhs_production = lp.value - l0.value;
  li.production_error = lp.error_estimate + l0.error_estimate + r1.error_estimate + r2.error_estimate;
  return li;
}

QuadraticReport zero_eigenvalue_quadratic_check(const ModelSpec& model, Channel a, const FiberOptions& opts)
{
  ThresholdClass tc = classify_threshold(model, a, opts);
  if (tc.kind != ThresholdKind::ZeroEigenvalue)
    throw DomainError("zero_eigenvalue_quadratic_check: channel does not have a threshold eigenvalue");
  const double mu = model.mu(a);
  QuadraticReport rep;
  rep.delta00 = tc.delta00;

  rep.c_min = 1e300;
  for (int i = 0; i < 3; ++i)
    for (double sgn : {1.0, -1.0})
      for (double r : {0.05, 0.1, 0.2, 0.3}) {
        double v = delta(model, a, TorusPoint(Vec3(sgn * r * Vec3::Unit(i))), 0.0, mu, opts);
        rep.p_norm.push_back(r);
        rep.ratio.push_back(v / (r * r));
        rep.c_min = std::min(rep.c_min, v / (r * r));
      }
  if (!(rep.c_min > 0.0)) throw NumericalFault("zero_eigenvalue_quadratic_check: nonpositive quadratic constant");

  UniformGrid grid(8);
  rep.floor = 1e300;
  for (long i = 0; i < grid.size(); ++i) {
    if (grid.mirror(i) < i) continue;
    Vec3 p = grid.node(i);
    if (p.norm() < 0.5) continue;
    rep.floor = std::min(rep.floor, delta(model, a, TorusPoint(p), 0.0, mu, opts));
  }

  const Vec3 samples[] = {Vec3(0.3, 0, 0), Vec3(0.2, 0.1, -0.1), Vec3(1.0, 0.5, 0.0)};
  for (const Vec3& p : samples) {
    LambdaIdentity li = lambda_difference_identity(model, a, TorusPoint(p), opts);
    rep.identity_error = std::max(rep.identity_error, mu * std::abs(li.lhs - li.rhs()));
    rep.identity_error_production =
        std::max(rep.identity_error_production, mu * std::abs(li.lhs_production - li.rhs()));
    rep.identity_production_tolerance = std::max(rep.identity_production_tolerance, mu * li.production_error);
  }
  return rep;
}

MinimumAsymptotics minimum_asymptotics(const ModelSpec& model, Channel a, const Vec3& direction,
                                       const std::vector<double>& radii, const FiberOptions& opts)
{
  HessianBlocks hb = estimate_hessian_blocks(model);
  MinimumAsymptotics r;
  r.predicted = hb.det() / (2.0 * hb.l_of(a));
  r.predicted_alt = hb.det() / (2.0 * hb.l_of(other(a)));
  const Vec3 dir = direction.normalized();
  const double shift = -hb.l / hb.l_of(a);
  // the predicted shift inherits the finite-difference error of the Hessian,
  // which shows up as a drift linear in |p|
  const double shift_err = hb.residual * (1.0 + std::abs(shift)) / hb.l_of(a);

  std::vector<double> lx, ly;
  for (double rad : radii) {
    Vec3 p = rad * dir;
    SliceExtrema ex = slice_extrema(model, a, TorusPoint(p), opts);
    double upp = p.dot(hb.U * p);
    double ratio = ex.m / upp;
    double drift = wrap(Vec3(ex.minimizer.coords() - shift * p)).norm();
    r.radius.push_back(rad);
    r.m.push_back(ex.m);
    r.quad_ratio.push_back(ratio);
    r.drift.push_back(drift);
    if (rad <= 0.05 + 1e-12) r.max_rel_error = std::max(r.max_rel_error, std::abs(ratio - r.predicted) / r.predicted);
    if (drift > kDriftNoiseFloor + 2.0 * shift_err * rad) {
      lx.push_back(std::log(rad));
      ly.push_back(std::log(drift));
    }
  }
  r.drift_points_above_floor = static_cast<int>(lx.size());
  if (lx.size() >= 2) {
    Eigen::Map<Eigen::VectorXd> X(lx.data(), lx.size()), Y(ly.data(), ly.size());
    double mx = X.mean(), my = Y.mean();
    r.drift_slope = ((X.array() - mx) * (Y.array() - my)).sum() / (X.array() - mx).square().sum();
    r.drift_ok = r.drift_slope >= 2.7;
  } else {
    r.drift_ok = lx.empty();
  }
  return r;
}

}  // namespace tbspec
