#include "tbspec/efimov.hpp"
#include "tbspec/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace tbspec;
using std::numbers::pi;

namespace {
SobolevParams ref() { return sobolev_params(2.0, 2.0, -1.0); }
}  // namespace

TEST_CASE("Sobolev parameters")
{
  SobolevParams sp = ref();
  CHECK(sp.u12 == doctest::Approx(2.0 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(sp.s12 == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(sp.r12 == 0.0);
  SobolevParams a = sobolev_params(3.0, 1.5, 0.7);
  CHECK(a.u12 > 1.0);
  CHECK(std::abs(a.s12) < 1.0);
  CHECK(a.r12 == doctest::Approx(0.5 * std::log(2.0)));
  CHECK_THROWS_AS(sobolev_params(1.0, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(sobolev_params(-1.0, 1.0, 0.5), DomainError);
  CHECK_THROWS_AS(sobolev_params(1.0, 1.0, 0.0), DomainError);
}

TEST_CASE("degree-0 channel against its closed form")
{
  SobolevParams sp = ref();
  CHECK(s_hat_channel(sp, 0.0, 0) == doctest::Approx(sp.u12 * std::asin(sp.s12) / sp.s12).epsilon(1e-12));
  for (double y : {-3.0, -0.4, 0.1, 0.7, 2.5, 10.0})
    CHECK(s_hat_channel(sp, y, 0) == doctest::Approx(s_hat_degree0_closed_form(sp, y)).epsilon(1e-11));
  SobolevParams b = sobolev_params(3.0, 1.5, 0.7);
  CHECK(s_hat_channel(b, 0.8, 0) == doctest::Approx(s_hat_degree0_closed_form(b, 0.8)).epsilon(1e-11));
}

TEST_CASE("S-hat spectrum structure")
{
  SobolevParams sp = ref();
  for (double y : {0.0, 0.5, 2.0, 8.0})
    CHECK(std::abs(s_hat_channel(sp, y, 5)) < std::abs(s_hat_channel(sp, y, 0)));
  auto ev = s_hat_spectrum(sp, 0.3, 3);
  REQUIRE(ev.size() == 8);
  CHECK(ev.front().value == doctest::Approx(std::abs(s_hat_channel(sp, 0.3, 0))));
  CHECK(ev.front().multiplicity == 1);
  CHECK(ev.back().value == -ev.front().value);
  for (size_t k = 1; k < ev.size(); ++k) CHECK(ev[k].value <= ev[k - 1].value);
  for (const auto& e : s_hat_spectrum(sp, 40.0, 6)) CHECK(std::abs(e.value) < 1e-6);
  CHECK_THROWS_AS(s_hat_channel(sp, 0.0, 0, 16), DomainError);
}

TEST_CASE("U(lambda)")
{
  SobolevParams sp = ref();
  UOptions o;
  UResult r = u_of_lambda_detail(sp, 1.0, o);
  CHECK(r.value == doctest::Approx(0.0658419744659).epsilon(1e-8));
  CHECK(r.trapezoid == doctest::Approx(r.value).epsilon(0.05));
  REQUIRE(r.degrees[0].crossings.size() == 2);
  CHECK(r.degrees[0].crossings[1] == doctest::Approx(0.41369732656).epsilon(1e-8));
  CHECK_FALSE(r.top_degree_contributes);

  CHECK(u_of_lambda(sp, 2.0) == 0.0);
  double prev = 1e300;
  for (double lam : {0.05, 0.1, 0.2, 0.5, 1.0, 1.2}) {
    double u = u_of_lambda(sp, lam);
    CHECK(u <= prev);
    prev = u;
  }
  CHECK_THROWS_AS(u_of_lambda(sp, 0.0), DomainError);

  UOptions narrow;
  narrow.grid = YGrid{-0.2, 0.2, 0.05};
  narrow.max_widenings = 0;
  CHECK_THROWS_AS(u_of_lambda(sp, 1.0, narrow), DomainError);
  narrow.max_widenings = 4;
  UResult w = u_of_lambda_detail(sp, 1.0, narrow);
  CHECK(w.widenings > 0);
  CHECK(w.value == doctest::Approx(r.value).epsilon(1e-8));
}

TEST_CASE("U0 depends only on the Sobolev parameters")
{
  SobolevParams a = sobolev_params(3.0, 1.5, -1.1), b = sobolev_params(1.5, 3.0, -1.1);
  CHECK(u_of_lambda(a, 1.0) == u_of_lambda(b, 1.0));
}

TEST_CASE("S_r counts")
{
  SobolevParams sp = ref();
  CHECK(s_r_count(sp, 0.01, 64) == 0);
  int prev = 0;
  for (double r : {5.0, 10.0, 20.0, 50.0, 100.0}) {
    int n = s_r_count(sp, r, std::max(64, int(8 * r)));
    CHECK(n >= prev);
    prev = n;
  }
  CHECK(prev > 0);
  CHECK_THROWS_AS(s_r_count(sp, 10.0, 32), DomainError);
  CHECK_THROWS_AS(s_r_count(sp, 0.0, 64), DomainError);
  // kernel normalisation: the degree-0 kernel integrates to a_0(0)
  double acc = 0;
  for (int i = -4000; i <= 4000; ++i) acc += 0.01 * s_r_kernel(sp, 0.01 * i, 0);
  CHECK(acc == doctest::Approx(s_hat_channel(sp, 0.0, 0)).epsilon(1e-6));
}

TEST_CASE("N(z) slope fitter")
{
  std::vector<double> z;
  std::vector<int> n;
  std::vector<bool> fl;
  for (int k = 4; k <= 60; ++k) {
    z.push_back(-std::pow(10.0, -k / 2.0));
    n.push_back(static_cast<int>(std::lround(0.0848 * std::abs(std::log(std::abs(z.back()))))));
    fl.push_back(false);
  }
  NzFit f = fit_counts(z, n, fl, 0.0848);
  CHECK(f.slope == doctest::Approx(0.0848).epsilon(0.05));
  CHECK_FALSE(f.range_too_shallow);

  NzFit zero = fit_counts({-1e-2, -1e-3, -1e-4}, {0, 0, 0}, {false, false, false}, 0.0658);
  CHECK(zero.slope == 0.0);
  CHECK(zero.range_too_shallow);

  NzFit flagged = fit_counts({-1e-2, -1e-3, -1e-4}, {1, 2, 2}, {true, true, true}, 0.0658);
  CHECK(flagged.used_flagged_points);
  CHECK(flagged.range_too_shallow);
  CHECK(flagged.slope > 0.0);

  CHECK_THROWS_AS(fit_counts({-1e-2, -1e-3}, {0, 0}, {false, false}, 0.06), DomainError);
}
