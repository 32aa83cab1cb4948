#ifndef TBSPEC_OPTIMIZE_HPP
#define TBSPEC_OPTIMIZE_HPP

#include <Eigen/Dense>
#include <cmath>

namespace tbspec {

// Finite-difference derivatives and a damped Newton iteration for smooth
// functions of a few variables. Function evaluations are assumed to carry
// rounding noise of order 1e-15 relative, which sets the stopping rules.

template <int D, typename F>
Eigen::Matrix<double, D, 1> gradient5(const F& f, const Eigen::Matrix<double, D, 1>& x, double h)
{
  using V = Eigen::Matrix<double, D, 1>;
  V g;
  for (int i = 0; i < D; ++i) {
    V e = V::Unit(i) * h;
    g[i] = (-f(V(x + 2 * e)) + 8 * f(V(x + e)) - 8 * f(V(x - e)) + f(V(x - 2 * e))) / (12 * h);
  }
  return g;
}

template <int D, typename F>
Eigen::Matrix<double, D, D> hessian_fd(const F& f, const Eigen::Matrix<double, D, 1>& x, double h)
{
  using V = Eigen::Matrix<double, D, 1>;
  Eigen::Matrix<double, D, D> H;
  double f0 = f(x);
  for (int i = 0; i < D; ++i) {
    V ei = V::Unit(i) * h;
    H(i, i) = (f(V(x + ei)) - 2 * f0 + f(V(x - ei))) / (h * h);
    for (int j = i + 1; j < D; ++j) {
      V ej = V::Unit(j) * h;
      H(i, j) = H(j, i) =
          (f(V(x + ei + ej)) - f(V(x + ei - ej)) - f(V(x - ei + ej)) + f(V(x - ei - ej))) / (4 * h * h);
    }
  }
  return H;
}

template <int D, typename F>
Eigen::Matrix<double, D, D> hessian_richardson(const F& f, const Eigen::Matrix<double, D, 1>& x, double h)
{
  return (4.0 * hessian_fd<D>(f, x, 0.5 * h) - hessian_fd<D>(f, x, h)) / 3.0;
}

// Damped Newton on sign*f from x (sign = +1 minimizes, -1 maximizes).
// Returns false if it did not settle within max_iter iterations.
template <int D, typename F>
bool newton_extremum(const F& f, double sign, Eigen::Matrix<double, D, 1>& x, int max_iter = 100)
{
  using V = Eigen::Matrix<double, D, 1>;
  auto fs = [&](const V& y) { return sign * f(y); };
  const double h = 1e-3;
  int stalled = 0;
  for (int it = 0; it < max_iter; ++it) {
    V g = gradient5<D>(fs, x, h);
    Eigen::Matrix<double, D, D> H = hessian_fd<D>(fs, x, h);
    // Newton along well-curved eigendirections, gradient steps along flat or
    // concave ones
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, D, D>> es(H);
    double lmax = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    V s = V::Zero();
    for (int k = 0; k < D; ++k) {
      double lam = es.eigenvalues()[k];
      V v = es.eigenvectors().col(k);
      s -= v * (v.dot(g) / (lam > 1e-8 * lmax ? lam : lmax));
    }
    double sn = s.norm();
    if (sn > 0.5) s *= 0.5 / sn, sn = 0.5;
    // gradient noise is ~1e-13 here, so a tiny Newton step is the fixed point
    if (sn < 1e-10) {
      x += s;
      return true;
    }
    double f0 = fs(x), t = 1.0;
    if (sn > 1e-6) {
      while (t > 1e-8 && fs(V(x + t * s)) > f0 + 1e-4 * t * g.dot(s)) t *= 0.5;
    }
    x += t * s;
    // nearly flat directions: stop once the value no longer moves
    if (f0 - fs(x) < 1e-14 * (1.0 + std::abs(f0))) {
      if (++stalled >= 3) return true;
    } else {
      stalled = 0;
    }
  }
  return false;
}

}  // namespace tbspec

#endif
