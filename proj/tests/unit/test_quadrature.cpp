#include "oracles.hpp"
#include "tbspec/errors.hpp"
#include "tbspec/quadrature.hpp"

#include <doctest.h>

#include <numbers>

using namespace tbspec;
using std::numbers::pi;

TEST_CASE("erfcx matches exp(x^2) erfc(x)")
{
  for (double x : {0.0, 0.1, 0.5, 1.0, 3.0, 8.0})
    CHECK(erfcx(x) == doctest::Approx(std::exp(x * x) * std::erfc(x)).epsilon(1e-13));
  // asymptotic branch: erfcx(x) ~ 1/(x sqrt(pi))
  CHECK(erfcx(1e3) == doctest::Approx(1.0 / (1e3 * std::sqrt(pi))).epsilon(1e-6));
  CHECK(erfcx(30.0) == doctest::Approx(0.018795888861416751).epsilon(1e-12));
}

TEST_CASE("Gauss-Legendre and Legendre polynomials")
{
  std::vector<double> x, w;
  gauss_legendre<double>(12, x, w);
  double s0 = 0, s10 = 0, se = 0;
  for (size_t k = 0; k < x.size(); ++k) {
    s0 += w[k];
    s10 += w[k] * std::pow(x[k], 10);
    se += w[k] * std::exp(x[k]);
  }
  CHECK(s0 == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(s10 == doctest::Approx(2.0 / 11).epsilon(1e-14));
  CHECK(se == doctest::Approx(std::exp(1.0) - std::exp(-1.0)).epsilon(1e-14));

  CHECK(legendre(0, 0.3) == 1.0);
  CHECK(legendre(1, 0.3) == doctest::Approx(0.3));
  CHECK(legendre(2, 0.5) == doctest::Approx(-0.125));
  CHECK(legendre(3, 0.5) == doctest::Approx(-0.4375));
  // orthogonality
  gauss_legendre<double>(20, x, w);
  double o = 0, n = 0;
  for (size_t k = 0; k < x.size(); ++k) {
    o += w[k] * legendre(3, x[k]) * legendre(5, x[k]);
    n += w[k] * legendre(4, x[k]) * legendre(4, x[k]);
  }
  CHECK(std::abs(o) < 1e-14);
  CHECK(n == doctest::Approx(2.0 / 9));
}

TEST_CASE("smooth integration on the torus")
{
  UniformGrid g(16);
  QuadratureResult r = integrate_smooth([](const Vec3& t) { return std::pow(std::cos(t[0]), 2) + std::cos(t[1]); }, g);
  CHECK(r.value == doctest::Approx(4 * pi * pi * pi).epsilon(1e-13));
  CHECK(r.error_estimate < 1e-10);
  CHECK_THROWS_AS(integrate_smooth([](const Vec3& t) { return 1.0 / t[0]; }, g), NumericalFault);
}

TEST_CASE("window integral against a radial quadrature")
{
  QuadraticWindow win(Mat3::Identity());
  const double s2 = win.sigma2();
  for (double eps : {0.0, 1e-3, 0.1}) {
    // Q = r^2/2, chi = exp(-r^2/(2 sigma^2)); substitute r = v^2 to remove the endpoint behaviour
    const int n = 200000;
    const double vmax = std::sqrt(40.0 * std::sqrt(s2));
    double acc = 0;
    for (int i = 0; i < n; ++i) {
      double v = (i + 0.5) * vmax / n, r = v * v;
      acc += 2 * v * r * r * std::exp(-r * r / (2 * s2)) / (r * r / 2 + eps);
    }
    acc *= 4 * pi * vmax / n;
    CHECK(win.integral(eps) == doctest::Approx(acc).epsilon(1e-7));
  }
  Mat3 bad = Mat3::Identity();
  bad(2, 2) = -1;
  CHECK_THROWS_AS(QuadraticWindow{bad}, NumericalFault);
}

TEST_CASE("Watson integral from the singular quadrature")
{
  // int dt / u(0,t) with u(0,t) = 2 sum (1 - cos t_i)
  auto d = [](const Vec3& t) { return 2.0 * (3.0 - std::cos(t[0]) - std::cos(t[1]) - std::cos(t[2])); };
  auto one = [](const Vec3&) { return 1.0; };
  const double exact = std::pow(2 * pi, 3) * oracle::kWatson / 2;
  QuadratureResult r = integrate_with_quadratic_singularity(one, d, TorusPoint(), 2.0 * Mat3::Identity(), UniformGrid(32));
  CHECK(std::abs(r.value / exact - 1) < 1e-3);
  CHECK(std::abs(r.value - exact) < 2 * r.error_estimate + 1e-6 * exact);
}

TEST_CASE("shifted singular integral agrees with the smooth rule")
{
  auto d = [](const Vec3& t) { return 3.0 - std::cos(t[0]) - std::cos(t[1]) - std::cos(t[2]); };
  auto g = [](const Vec3& t) { return 1.0 + 0.5 * std::cos(t[0]); };
  const double shift = 0.5;
  QuadratureResult a = integrate_with_quadratic_singularity(g, d, TorusPoint(), Mat3::Identity(), UniformGrid(24), shift);
  QuadratureResult b = integrate_smooth([&](const Vec3& t) { return g(t) / (d(t) + shift); }, UniformGrid(48));
  CHECK(a.value == doctest::Approx(b.value).epsilon(1e-6));
}

TEST_CASE("singular integral with an off-origin centre")
{
  // translated denominator: the result does not depend on where the zero sits
  const Vec3 c(0.7, -1.3, 2.2);
  auto d0 = [](const Vec3& t) { return 3.0 - std::cos(t[0]) - std::cos(t[1]) - std::cos(t[2]); };
  auto dc = [&](const Vec3& t) { return d0(Vec3(t - c)); };
  auto one = [](const Vec3&) { return 1.0; };
  QuadratureResult a = integrate_with_quadratic_singularity(one, d0, TorusPoint(), Mat3::Identity(), UniformGrid(16));
  QuadratureResult b = integrate_with_quadratic_singularity(one, dc, TorusPoint(c), Mat3::Identity(), UniformGrid(16));
  CHECK(a.value == doctest::Approx(b.value).epsilon(1e-12));
}

TEST_CASE("compensated summation")
{
  CompensatedSum<double> s;
  s.add(1.0);
  for (int i = 0; i < 1000; ++i) s.add(1e-16);
  s.add(-1.0);
  CHECK(s.value() == doctest::Approx(1e-13).epsilon(1e-10));
}
