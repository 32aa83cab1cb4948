#include "tbspec/model.hpp"
#include "tbspec/errors.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace tbspec {

namespace {

const std::vector<Vec3>& parity_samples()
{
  static const std::vector<Vec3> pts = [] {
    std::vector<Vec3> v;
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> U(-std::numbers::pi, std::numbers::pi);
    for (int i = 0; i < 96; ++i) v.emplace_back(U(rng), U(rng), U(rng));
    UniformGrid g(4);
    for (long i = 0; i < g.size(); ++i) v.push_back(g.node(i));
    return v;
  }();
  return pts;
}

}  // namespace

double parity_violation(const PointFn& f, Parity parity)
{
  double sign = parity == Parity::Even ? 1.0 : -1.0;
  double worst = 0.0, scale = 0.0;
  for (const Vec3& p : parity_samples()) {
    double a = f(p), b = f(Vec3(-p));
    scale = std::max(scale, std::abs(a));
    worst = std::max(worst, std::abs(b - sign * a));
  }
  return worst / (1.0 + scale);
}

FormFactor::FormFactor(PointFn f, Parity parity) : f_(std::move(f)), parity_(parity)
{
  if (!f_) throw DomainError("FormFactor: empty evaluator");
  if (parity_violation(f_, parity_) > 1e-12)
    throw DomainError(std::string("FormFactor: sampled values contradict declared ") +
                      (parity_ == Parity::Even ? "even" : "odd") + " parity");
  phi0_ = parity_ == Parity::Odd ? 0.0 : f_(Vec3::Zero());
}

FormFactor FormFactor::scaled(double c) const
{
  PointFn g = [f = f_, c](const Vec3& p) { return c * f(p); };
  return FormFactor(std::move(g), parity_);
}

ModelSpec ModelSpec::with_mu(double m1, double m2) const
{
  ModelSpec m = *this;
  m.mu1 = m1;
  m.mu2 = m2;
  return m;
}

ModelSpec swap_channels(const ModelSpec& model)
{
  ModelSpec m;
  DispersionFn u = model.dispersion;
  m.dispersion = [u](const Vec3& p, const Vec3& q) { return u(q, p); };
  m.phi1 = model.phi2;
  m.phi2 = model.phi1;
  m.mu1 = model.mu2;
  m.mu2 = model.mu1;
  m.name = model.name + "-swapped";
  return m;
}

double eval_dispersion(const ModelSpec& model, const TorusPoint& p, const TorusPoint& q)
{
  return model.dispersion(p.coords(), q.coords());
}

double reference_dispersion(const Vec3& p, const Vec3& q)
{
  double s = 9.0;
  for (int i = 0; i < 3; ++i) s -= std::cos(p[i]) + std::cos(q[i]) + std::cos(p[i] - q[i]);
  return s;
}

FormFactor make_form_factor(const FormFamily& f)
{
  if (const auto* c = std::get_if<CosForm>(&f)) {
    if (c->a0 == 0.0 && c->a1 == 0.0 && c->a2 == 0.0 && c->a3 == 0.0)
      throw DomainError("CosForm: form factor vanishes identically");
    CosForm k = *c;
    return FormFactor(
        [k](const Vec3& p) {
          return k.a0 + k.a1 * std::cos(p[0]) + k.a2 * std::cos(p[1]) + k.a3 * std::cos(p[2]);
        },
        Parity::Even);
  }
  double a = std::get<SinForm>(f).a;
  if (a == 0.0) throw DomainError("SinForm: amplitude must be nonzero");
  return FormFactor([a](const Vec3& p) { return a * (std::sin(p[0]) + std::sin(p[1]) + std::sin(p[2])); },
                    Parity::Odd);
}

ModelSpec make_reference_model(const FormFamily& f1, const FormFamily& f2, double mu1, double mu2)
{
  if (!(mu1 > 0.0) || !(mu2 > 0.0)) throw DomainError("couplings must be positive");
  ModelSpec m;
  m.dispersion = reference_dispersion;
  m.phi1 = make_form_factor(f1);
  m.phi2 = make_form_factor(f2);
  m.mu1 = mu1;
  m.mu2 = mu2;
  auto tag = [](const FormFamily& f) { return std::holds_alternative<CosForm>(f) ? "cos" : "sin"; };
  m.name = std::string("reference-") + tag(f1) + (f1.index() == f2.index() ? "" : std::string("/") + tag(f2));
  return m;
}

namespace {

Mat6 second_differences(const ModelSpec& model, double h)
{
  auto f = [&](const Eigen::Matrix<double, 6, 1>& x) {
    return model.dispersion(x.head<3>(), x.tail<3>());
  };
  using V6 = Eigen::Matrix<double, 6, 1>;
  Mat6 D;
  for (int a = 0; a < 6; ++a)
    for (int b = a; b < 6; ++b) {
      V6 ea = V6::Unit(a) * h, eb = V6::Unit(b) * h;
      double v = (f(ea + eb) - f(ea - eb) - f(-ea + eb) + f(-ea - eb)) / (4.0 * h * h);
      D(a, b) = D(b, a) = v;
    }
  return D;
}

}  // namespace

Mat6 dispersion_hessian(const ModelSpec& model, double step, double* err)
{
  Mat6 D1 = second_differences(model, step);
  Mat6 D2 = second_differences(model, 0.5 * step);
  if (err) *err = (D2 - D1).cwiseAbs().maxCoeff();
  return (4.0 * D2 - D1) / 3.0;
}

HessianBlocks estimate_hessian_blocks(const ModelSpec& model, double step)
{
  if (!(step >= 1e-6 && step <= 1e-2)) throw DomainError("estimate_hessian_blocks: step outside [1e-6, 1e-2]");
  double fd_err = 0.0;
  Mat6 H = dispersion_hessian(model, step, &fd_err);
  Mat3 A = H.topLeftCorner<3, 3>(), B = H.topRightCorner<3, 3>();
  Mat3 Bt = H.bottomLeftCorner<3, 3>(), C = H.bottomRightCorner<3, 3>();

  auto min_eig = [](const Mat3& M) {
    return Eigen::SelfAdjointEigenSolver<Mat3>(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly)
        .eigenvalues()
        .minCoeff();
  };
  if (min_eig(A) <= 0.0) throw DomainError("Hessian pp-block is not positive definite");
  if (min_eig(C) <= 0.0) throw DomainError("Hessian qq-block is not positive definite");

  HessianBlocks hb;
  hb.l1 = A.diagonal().maxCoeff();
  hb.U = A / hb.l1;
  double uu = hb.U.squaredNorm();
  hb.l = 0.5 * ((B.cwiseProduct(hb.U)).sum() + (Bt.cwiseProduct(hb.U)).sum()) / uu;
  hb.l2 = (C.cwiseProduct(hb.U)).sum() / uu;

  double fact = std::max({(B - hb.l * hb.U).cwiseAbs().maxCoeff(), (Bt - hb.l * hb.U).cwiseAbs().maxCoeff(),
                          (C - hb.l2 * hb.U).cwiseAbs().maxCoeff()});
  hb.residual = fact + fd_err;
  double scale = H.cwiseAbs().maxCoeff();
  if (fact > 1e-5 * scale) throw DomainError("no common U factors the Hessian blocks");
  if (std::abs(hb.l) <= 1e-8 * scale) throw DomainError("mixed Hessian block vanishes (l = 0)");
  if (hb.det() <= 0.0) throw DomainError("Hessian of u at the origin is not positive definite");
  return hb;
}

}  // namespace tbspec
