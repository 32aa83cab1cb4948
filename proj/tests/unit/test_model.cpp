#include "tbspec/errors.hpp"
#include "tbspec/hypotheses.hpp"
#include "tbspec/model.hpp"

#include <doctest.h>

#include <numbers>

using namespace tbspec;
using std::numbers::pi;

TEST_CASE("reference dispersion values")
{
  ModelSpec m = make_reference_model(CosForm{}, 1.0, 1.0);
  CHECK(eval_dispersion(m, TorusPoint(), TorusPoint()) == 0.0);
  CHECK(eval_dispersion(m, TorusPoint(pi, 0, 0), TorusPoint()) == doctest::Approx(4.0));
  TorusPoint p(0.3, -1.1, 2.5), q(-0.7, 0.2, 3.0);
  CHECK(eval_dispersion(m, p, q) == doctest::Approx(eval_dispersion(m, -p, -q)).epsilon(1e-15));
  CHECK(eval_dispersion(m, p, q) > 0.0);
}

TEST_CASE("reference form factors")
{
  FormFactor c = make_form_factor(CosForm{});
  CHECK(c.parity() == Parity::Even);
  CHECK(c.value_at_zero() == 1.0);
  CHECK(c(Vec3(0.4, 1.0, -2.0)) == 1.0);

  FormFactor s = make_form_factor(SinForm{1.0});
  CHECK(s.parity() == Parity::Odd);
  CHECK(s.value_at_zero() == 0.0);

  FormFactor c3 = make_form_factor(CosForm{0.0, 1.0, 1.0, 1.0});
  CHECK(c3.value_at_zero() == doctest::Approx(3.0));

  CHECK_THROWS_AS(make_form_factor(CosForm{0.0, 0.0, 0.0, 0.0}), DomainError);
  CHECK_THROWS_AS(make_form_factor(SinForm{0.0}), DomainError);
  CHECK_THROWS_AS(make_reference_model(CosForm{}, -1.0, 1.0), DomainError);
}

TEST_CASE("form factor parity is enforced")
{
  CHECK_THROWS_AS(FormFactor([](const Vec3& p) { return std::sin(p[0]); }, Parity::Even), DomainError);
  CHECK_THROWS_AS(FormFactor([](const Vec3& p) { return std::cos(p[0]); }, Parity::Odd), DomainError);
  CHECK_NOTHROW(FormFactor([](const Vec3& p) { return std::sin(p[0]) * std::cos(p[1]); }, Parity::Odd));
  FormFactor f([](const Vec3& p) { return 1.0 + std::cos(p[2]); }, Parity::Even);
  CHECK(f.scaled(3.0)(Vec3(0, 0, 0)) == doctest::Approx(6.0));
}

TEST_CASE("Hessian blocks of the reference model")
{
  ModelSpec m = make_reference_model(CosForm{}, 1.0, 1.0);
  HessianBlocks hb = estimate_hessian_blocks(m);
  CHECK(std::abs(hb.l1 - 2.0) < 1e-6);
  CHECK(std::abs(hb.l2 - 2.0) < 1e-6);
  CHECK(std::abs(hb.l + 1.0) < 1e-6);
  CHECK((hb.U - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(hb.det() == doctest::Approx(3.0).epsilon(1e-6));

  Mat6 H = dispersion_hessian(m, 1e-3);
  CHECK((H - H.transpose()).cwiseAbs().maxCoeff() < 1e-9);
  Mat6 ref;
  ref << 2 * Mat3::Identity(), -Mat3::Identity(), -Mat3::Identity(), 2 * Mat3::Identity();
  CHECK((H - ref).cwiseAbs().maxCoeff() < 1e-6);

  HessianBlocks half = estimate_hessian_blocks(m, 5e-4);
  const double tol = 10 * std::max(hb.residual, half.residual);
  CHECK(std::abs(hb.l1 - half.l1) < tol);
  CHECK(std::abs(hb.l2 - half.l2) < tol);
  CHECK(std::abs(hb.l - half.l) < tol);

  CHECK_THROWS_AS(estimate_hessian_blocks(m, 1e-7), DomainError);
  CHECK_THROWS_AS(estimate_hessian_blocks(m, 0.1), DomainError);
}

TEST_CASE("Hessian blocks of an anisotropic model")
{
  ModelSpec m = make_reference_model(CosForm{}, 1.0, 1.0);
  m.dispersion = [](const Vec3& p, const Vec3& q) {
    double s = 0;
    for (int i = 0; i < 3; ++i) s += 3.0 * (1 - std::cos(p[i])) + 1 - std::cos(q[i]) + 1 - std::cos(p[i] - q[i]);
    return s;
  };
  HessianBlocks hb = estimate_hessian_blocks(m);
  CHECK(hb.l1 == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(hb.l2 == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(hb.l == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("swap_channels exchanges the particles")
{
  ModelSpec m = make_reference_model(CosForm{1.0, 0.5, 0.0, 0.0}, SinForm{2.0}, 1.5, 2.5);
  ModelSpec s = swap_channels(m);
  Vec3 p(0.3, 1.0, -0.4), q(2.0, -1.0, 0.7);
  CHECK(s.dispersion(p, q) == m.dispersion(q, p));
  CHECK(s.mu1 == 2.5);
  CHECK(s.mu2 == 1.5);
  CHECK(s.phi1(p) == m.phi2(p));
  CHECK(s.fiber(Channel::One, p, q) == m.fiber(Channel::Two, p, q));
}

TEST_CASE("verify_hypotheses on the reference models")
{
  for (const ModelSpec& m : {make_reference_model(CosForm{}, 1.0, 1.0), make_reference_model(SinForm{}, 1.0, 1.0)}) {
    HypothesisReport r = verify_hypotheses(m, 8);
    for (const auto& c : r.checks) {
      INFO(m.name << " " << c.name << ": " << c.detail);
      CHECK(c.passed);
    }
  }
  HypothesisReport s = verify_hypotheses(make_reference_model(SinForm{}, 1.0, 1.0), 8);
  CHECK(s.at("lambda1-hessian-negative").applicable);
  CHECK(s.at("lambda1-hessian-negative").value < 0.0);
  CHECK(s.at("lambda1-difference-identity").value < 1e-8);
}

TEST_CASE("verify_hypotheses detects a broken symmetry")
{
  ModelSpec m = make_reference_model(CosForm{}, 1.0, 1.0);
  m.dispersion = [](const Vec3& p, const Vec3& q) { return reference_dispersion(p, q) + 0.1 * std::sin(p[0]); };
  HypothesisReport r = verify_hypotheses(m, 8);
  CHECK_FALSE(r.at("u-evenness").passed);
  CHECK_FALSE(r.all_passed());
  CHECK_THROWS_AS(verify_hypotheses(m, 6), DomainError);
}
