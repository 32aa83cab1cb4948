#include "tbspec/quadrature.hpp"
#include "tbspec/errors.hpp"

#include <numbers>

namespace tbspec {

double erfcx(double x)
{
  if (x < 25.0) return std::exp(x * x) * std::erfc(x);
  double r = 1.0 / (x * x);
  return (1.0 - 0.5 * r * (1.0 - 1.5 * r * (1.0 - 2.5 * r))) / (x * std::sqrt(std::numbers::pi));
}

QuadraticWindow::QuadraticWindow(const Mat3& hessian) : H_(0.5 * (hessian + hessian.transpose()))
{
  Eigen::SelfAdjointEigenSolver<Mat3> es(H_, Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues().minCoeff() > 0.0))
    throw NumericalFault("quadratic singularity: Hessian is not positive definite");
  Mat3 Hinv = H_.inverse();
  double qb = 1e300;
  for (int i = 0; i < 3; ++i)
    qb = std::min(qb, std::numbers::pi * std::numbers::pi / (2.0 * Hinv(i, i)));
  // exp(-40) on the cell boundary
  sigma2_ = qb / 40.0;
  jac_ = 2.0 * std::numbers::sqrt2 / std::sqrt(H_.determinant());
}

double QuadraticWindow::integral(double eps) const
{
  double s = std::sqrt(sigma2_);
  double radial = 0.5 * s * std::sqrt(std::numbers::pi);
  if (eps > 0.0) {
    double r = std::sqrt(eps);
    radial -= 0.5 * std::numbers::pi * r * erfcx(r / s);
  }
  return jac_ * 4.0 * std::numbers::pi * radial;
}

QuadratureResult integrate_smooth(const PointFn& f, const UniformGrid& grid)
{
  auto sweep = [&](const UniformGrid& g, bool check) {
    CompensatedSum<double> acc;
    for (long i = 0; i < g.size(); ++i) {
      Vec3 t = g.node(i);
      double v = f(t);
      if (check && !std::isfinite(v))
        throw NumericalFault("integrate_smooth: non-finite integrand at node " + TorusPoint(t).str());
      acc.add(v);
    }
    return acc.value() * g.weight();
  };
  QuadratureResult r;
  r.value = sweep(grid, true);
  if (grid.n() >= 4) r.error_estimate = std::abs(r.value - sweep(UniformGrid(grid.n() / 2, grid.origin()), false));
  return r;
}

QuadratureResult integrate_with_quadratic_singularity(const PointFn& g, const PointFn& d, const TorusPoint& center,
                                                      const Mat3& hessian, const UniformGrid& grid, double shift)
{
  if (shift < 0.0) throw DomainError("integrate_with_quadratic_singularity: negative shift");
  QuadraticWindow win(hessian);
  const Vec3& c = center.coords();
  const double gc = g(c);

  auto sweep = [&](const UniformGrid& gr, bool check) {
    CompensatedSum<double> acc;
    const long ctr = gr.center_linear();
    for (long i = 0; i < gr.size(); ++i) {
      if (i == ctr) continue;
      Vec3 x = gr.displacement(i);
      Vec3 t = wrap(c + x);
      double den = d(t) + shift;
      if (check && den <= 1e-12)
        throw NumericalFault("quadratic singularity: denominator vanishes at node " + TorusPoint(t).str());
      double q = win.form(x);
      double v = g(t) / den - gc * win.window(q) / (q + shift);
      if (check && !std::isfinite(v))
        throw NumericalFault("quadratic singularity: non-finite integrand at node " + TorusPoint(t).str());
      acc.add(v);
    }
    return acc.value() * gr.weight() + gc * win.integral(shift);
  };

  UniformGrid fine = grid.recentered(c);
  QuadratureResult r;
  r.value = sweep(fine, true);
  if (grid.n() >= 4) r.error_estimate = std::abs(r.value - sweep(UniformGrid(grid.n() / 2, c), false));
  return r;
}

}  // namespace tbspec
