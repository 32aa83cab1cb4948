#include "oracles.hpp"
#include "tbspec/errors.hpp"
#include "tbspec/friedrichs.hpp"

#include <doctest.h>

#include <numbers>

using namespace tbspec;
using std::numbers::pi;

namespace {
ModelSpec cos_model(double mu = 1.0) { return make_reference_model(CosForm{}, mu, mu); }
ModelSpec sin_model(double mu = 1.0) { return make_reference_model(SinForm{}, mu, mu); }
}  // namespace

TEST_CASE("slice extrema of the reference fibers")
{
  ModelSpec m = cos_model();
  SliceExtrema e0 = slice_extrema(m, Channel::One, TorusPoint());
  CHECK(std::abs(e0.m) < 1e-14);
  CHECK(e0.minimizer.norm() < 1e-8);
  CHECK(e0.M_big == doctest::Approx(12.0).epsilon(1e-10));
  CHECK((e0.hessian - 2.0 * Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-6);

  // m(p) = 3/4 |p|^2 + O(|p|^4), minimizer p/2
  TorusPoint p(0.02, -0.01, 0.015);
  for (Channel a : {Channel::One, Channel::Two}) {
    SliceExtrema e = slice_extrema(m, a, p);
    CHECK(e.m / (p.norm() * p.norm()) == doctest::Approx(0.75).epsilon(1e-3));
    CHECK((e.minimizer.coords() - p.coords() / 2).norm() < 1e-9);
  }
  // the corner slice is flat
  SliceExtrema ec = slice_extrema(m, Channel::One, TorusPoint(pi, pi, pi));
  CHECK(ec.m == doctest::Approx(12.0));
  CHECK(ec.M_big == doctest::Approx(12.0));
}

TEST_CASE("threshold coupling for phi = 1")
{
  ModelSpec m = cos_model();
  CHECK(mu_zero(m, Channel::One) == doctest::Approx(oracle::mu0_constant_phi()).epsilon(1e-5));
  CHECK(mu_zero(m, Channel::Two) == doctest::Approx(oracle::mu0_constant_phi()).epsilon(1e-5));
  // rescaling phi by c divides mu0 by c^2
  ModelSpec m3 = make_reference_model(CosForm{3.0}, 1.0, 1.0);
  CHECK(mu_zero(m3, Channel::One) == doctest::Approx(mu_zero(m, Channel::One) / 9).epsilon(1e-12));
}

TEST_CASE("Lambda is increasing in z and rejects z above the band")
{
  ModelSpec m = cos_model();
  FiberProfile prof(m, Channel::One, TorusPoint(0.5, 0.2, -0.3));
  double prev = 0;
  for (double z : {-5.0, -1.0, -0.1, 0.0, prof.m()}) {
    double l = prof.lambda_value(z);
    CHECK(l > prev);
    prev = l;
  }
  CHECK_THROWS_AS(prof.lambda_value(prof.m() + 1e-3), DomainError);
  // Lambda(p, z) against a fine smooth rule for z well below the band
  const double z = -2.0;
  UniformGrid g(48);
  double ref = 0;
  for (long i = 0; i < g.size(); ++i) ref += 1.0 / (m.fiber(Channel::One, TorusPoint(0.5, 0.2, -0.3).coords(), g.node(i)) - z);
  ref *= g.weight();
  CHECK(prof.lambda_value(z) == doctest::Approx(ref).epsilon(1e-9));
}

TEST_CASE("mu_max is attained at the corner")
{
  ModelSpec m = cos_model();
  MuMaxResult r = mu_max_detail(m, Channel::One, 8);
  CHECK(r.value == doctest::Approx(12.0 / std::pow(2 * pi, 3)).epsilon(1e-8));
  CHECK(std::abs(std::abs(r.argmax[0]) - pi) < 1e-6);
  CHECK(mu_zero(m, Channel::One) < r.value);
}

TEST_CASE("bound states agree with the dense oracle")
{
  ModelSpec m = cos_model();
  const double mu = 2 * mu_max(m, Channel::One, 8);
  for (Vec3 pv : {Vec3(0, 0, 0), Vec3(1.0, -0.5, 2.0), Vec3(pi, pi, pi)}) {
    TorusPoint p(pv);
    auto z = bound_state(m, Channel::One, p, mu);
    REQUIRE(z.has_value());
    CHECK(std::abs(delta(m, Channel::One, p, *z, mu)) < 1e-9);
    CHECK(*z == doctest::Approx(oracle::dense_fiber_lowest(m, Channel::One, p, mu, 12)).epsilon(1e-2).scale(1));
  }
}

TEST_CASE("bound state presence matches the coupling region")
{
  ModelSpec m = cos_model();
  const double mu0 = mu_zero(m, Channel::One), mm = mu_max(m, Channel::One, 8);
  UniformGrid g(6);
  for (double mu : {2 * mm, 0.5 * (mu0 + mm)}) {
    int present = 0;
    for (long i = 0; i < g.size(); ++i) {
      TorusPoint p(g.node(i));
      FiberProfile prof(m, Channel::One, p);
      bool b = bound_state(prof, mu).has_value();
      CHECK(b == in_coupling_region(prof, mu));
      present += b;
    }
    if (mu > mm)
      CHECK(present == g.size());
    else
      CHECK((present > 0 && present < g.size()));
  }
  BoundStateBranch br = sample_branch(m, Channel::One, 0.5 * mu0, 6);
  for (const auto& z : br.z) CHECK_FALSE(z.has_value());
}

TEST_CASE("threshold classification")
{
  ModelSpec c = cos_model(), s = sin_model();
  double mc = mu_zero(c, Channel::One), ms = mu_zero(s, Channel::One);
  CHECK(classify_threshold(c.with_mu(mc, mc), Channel::One).kind == ThresholdKind::ZeroEnergyResonance);
  CHECK(classify_threshold(s.with_mu(ms, ms), Channel::One).kind == ThresholdKind::ZeroEigenvalue);
  CHECK(classify_threshold(c.with_mu(mc / 2, mc / 2), Channel::One).kind == ThresholdKind::Regular);
  CHECK(std::string(to_string(ThresholdKind::ZeroEigenvalue)).size() > 0);
}

TEST_CASE("square-root expansion at a resonance")
{
  ModelSpec m = cos_model();
  double mu0 = mu_zero(m, Channel::One);
  ExpansionReport r = threshold_expansion_check(m.with_mu(mu0, mu0), Channel::One);
  CHECK(r.relative_error < 0.02);
  CHECK(r.predicted_slope == doctest::Approx(4 * std::sqrt(2.0) * pi * pi * mu0 / std::pow(2.0, 1.5)));
  CHECK_FALSE(r.l_index_ambiguous);
  CHECK(r.ratio_min > 0.0);
  CHECK_THROWS_AS(threshold_expansion_check(m.with_mu(mu0 / 2, mu0 / 2), Channel::One), DomainError);
}

TEST_CASE("quadratic threshold behaviour for a zero eigenvalue")
{
  ModelSpec m = sin_model();
  double mu0 = mu_zero(m, Channel::One);
  QuadraticReport q = zero_eigenvalue_quadratic_check(m.with_mu(mu0, mu0), Channel::One);
  CHECK(std::abs(q.delta00) < 1e-12);
  CHECK(q.c_min > 0.0);
  CHECK(q.floor > 0.0);
  CHECK(q.identity_error < 1e-8);
  CHECK(q.identity_error_production <= q.identity_production_tolerance);
}

TEST_CASE("Lambda-difference identity holds on a common grid")
{
  ModelSpec m = sin_model();
  LambdaIdentity li = lambda_difference_identity(m, Channel::Two, TorusPoint(0.4, -0.2, 1.0));
  CHECK(li.lhs == doctest::Approx(li.rhs()).epsilon(1e-12));
  CHECK(li.second > 0.0);
}

TEST_CASE("minimum asymptotics")
{
  ModelSpec m = cos_model();
  MinimumAsymptotics a = minimum_asymptotics(m, Channel::One, Vec3(1, 2, -1), {0.01, 0.02, 0.05, 0.1, 0.2});
  CHECK(a.predicted == doctest::Approx(0.75));
  CHECK(a.max_rel_error < 0.01);
  CHECK(a.drift_ok);
}
