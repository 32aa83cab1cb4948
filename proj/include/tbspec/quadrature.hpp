#ifndef TBSPEC_QUADRATURE_HPP
#define TBSPEC_QUADRATURE_HPP

#include "tbspec/model.hpp"
#include "tbspec/torus.hpp"

#include <cmath>
#include <vector>

namespace tbspec {

// Neumaier-compensated running sum; order-fixed use keeps results
// reproducible.
template <typename Scalar>
class CompensatedSum {
 public:
  void add(Scalar x)
  {
    Scalar t = s_ + x;
    if (std::abs(s_) >= std::abs(x))
      c_ += (s_ - t) + x;
    else
      c_ += (x - t) + s_;
    s_ = t;
  }
  Scalar value() const { return s_ + c_; }

 private:
  Scalar s_ = 0, c_ = 0;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

// exp(x^2) erfc(x), x >= 0
double erfcx(double x);

// Local quadratic model Q(x) = x^T H x / 2 of a denominator near its zero,
// with a Gaussian window chi = exp(-Q/sigma^2) that is negligible on the
// boundary of the fundamental cell. The window integral over R^3 is known
// in closed form, so chi/(Q+eps) can be subtracted and added back exactly.
class QuadraticWindow {
 public:
  QuadraticWindow() = default;
  explicit QuadraticWindow(const Mat3& hessian);

  double form(const Vec3& x) const { return 0.5 * x.dot(H_ * x); }
  double window(double q) const { return std::exp(-q / sigma2_); }
  // int_{R^3} chi(x) / (Q(x) + eps) dx, eps >= 0
  double integral(double eps) const;
  const Mat3& hessian() const { return H_; }
  double sigma2() const { return sigma2_; }

 private:
  Mat3 H_ = Mat3::Identity();
  double sigma2_ = 1.0;
  double jac_ = 1.0;
};

QuadratureResult integrate_smooth(const PointFn& f, const UniformGrid& grid);

// Integral of g/(d + shift) where d >= 0 vanishes quadratically at `center`
// with Hessian `hessian`. The grid is translated so that `center` is a node;
// that node is punctured and the Gaussian-windowed quadratic model is
// subtracted and integrated analytically.
QuadratureResult integrate_with_quadratic_singularity(const PointFn& g, const PointFn& d, const TorusPoint& center,
                                                      const Mat3& hessian, const UniformGrid& grid,
                                                      double shift = 0.0);

// Gauss-Legendre nodes and weights on [-1, 1].
template <typename Scalar>
void gauss_legendre(int n, std::vector<Scalar>& x, std::vector<Scalar>& w)
{
  const Scalar pi = Scalar(3.14159265358979323846264338327950288L);
  x.assign(n, Scalar(0));
  w.assign(n, Scalar(0));
  // returns P_n(z), stores P_n'(z) in dp
  auto eval = [n](Scalar z, Scalar& dp) {
    Scalar p0 = 1, p1 = z;
    for (int k = 2; k <= n; ++k) {
      Scalar p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (z * p1 - p0) / (z * z - 1);
    return p1;
  };
  for (int i = 0; i < (n + 1) / 2; ++i) {
    Scalar z = std::cos(pi * (Scalar(i) + Scalar(0.75)) / (Scalar(n) + Scalar(0.5)));
    Scalar dp = 0;
    for (int it = 0; it < 100; ++it) {
      Scalar dz = eval(z, dp) / dp;
      z -= dz;
      if (std::abs(dz) < Scalar(1e-16)) break;
    }
    eval(z, dp);
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2 / ((1 - z * z) * dp * dp);
  }
}

// Legendre polynomial P_l(t) by the three-term recurrence.
template <typename Scalar>
Scalar legendre(int l, Scalar t)
{
  if (l == 0) return Scalar(1);
  Scalar p0 = 1, p1 = t;
  for (int k = 2; k <= l; ++k) {
    Scalar p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

}  // namespace tbspec

#endif
