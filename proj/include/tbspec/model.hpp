#ifndef TBSPEC_MODEL_HPP
#define TBSPEC_MODEL_HPP

#include "tbspec/torus.hpp"

#include <functional>
#include <string>
#include <variant>

namespace tbspec {

using Mat6 = Eigen::Matrix<double, 6, 6>;

// Dispersion u(p,q) and form factors act on raw coordinates; they must be
// 2 pi-periodic in every argument so no reduction is needed in hot loops.
using DispersionFn = std::function<double(const Vec3& p, const Vec3& q)>;
using PointFn = std::function<double(const Vec3& p)>;

enum class Parity { Even, Odd };

// Channel index alpha. The fiber of channel 1 at p is q -> u(q,p), the
// fiber of channel 2 is q -> u(p,q).
enum class Channel { One = 1, Two = 2 };

inline int index(Channel a) { return a == Channel::One ? 0 : 1; }
inline Channel other(Channel a) { return a == Channel::One ? Channel::Two : Channel::One; }

// Largest |phi(-p) -/+ phi(p)| over a fixed sample of points.
double parity_violation(const PointFn& f, Parity parity);

class FormFactor {
 public:
  FormFactor() = default;
  // Throws DomainError if the sampled parity contradicts the tag.
  FormFactor(PointFn f, Parity parity);

  double operator()(const Vec3& p) const { return f_(p); }
  double operator()(const TorusPoint& p) const { return f_(p.coords()); }
  Parity parity() const { return parity_; }
  double value_at_zero() const { return phi0_; }
  const PointFn& function() const { return f_; }

  FormFactor scaled(double c) const;

 private:
  PointFn f_;
  Parity parity_ = Parity::Even;
  double phi0_ = 0.0;
};

struct ModelSpec {
  DispersionFn dispersion;
  FormFactor phi1, phi2;
  double mu1 = 1.0, mu2 = 1.0;
  std::string name;

  const FormFactor& phi(Channel a) const { return a == Channel::One ? phi1 : phi2; }
  double mu(Channel a) const { return a == Channel::One ? mu1 : mu2; }
  void set_mu(Channel a, double mu) { (a == Channel::One ? mu1 : mu2) = mu; }
  ModelSpec with_mu(double m1, double m2) const;

  // u_p^{(alpha)}(q)
  double fiber(Channel a, const Vec3& p, const Vec3& q) const
  {
    return a == Channel::One ? dispersion(q, p) : dispersion(p, q);
  }
};

// Exchange the roles of the two particles: u'(p,q) = u(q,p), phi1' = phi2,
// phi2' = phi1, couplings swapped.
ModelSpec swap_channels(const ModelSpec& model);

double eval_dispersion(const ModelSpec& model, const TorusPoint& p, const TorusPoint& q);

// Reference models: u(p,q) = sum_i 3 - cos p_i - cos q_i - cos(p_i - q_i)
double reference_dispersion(const Vec3& p, const Vec3& q);

struct CosForm {
  double a0 = 1.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
};
struct SinForm {
  double a = 1.0;
};
using FormFamily = std::variant<CosForm, SinForm>;

FormFactor make_form_factor(const FormFamily& f);
ModelSpec make_reference_model(const FormFamily& f1, const FormFamily& f2, double mu1, double mu2);
inline ModelSpec make_reference_model(const FormFamily& f, double mu1, double mu2)
{
  return make_reference_model(f, f, mu1, mu2);
}

// Hessian of u at (0,0) in the block form [[l1 U, l U], [l U, l2 U]].
struct HessianBlocks {
  double l1 = 0.0, l2 = 0.0, l = 0.0;
  Mat3 U = Mat3::Identity();
  double residual = 0.0;

  double l_of(Channel a) const { return a == Channel::One ? l1 : l2; }
  double det() const { return l1 * l2 - l * l; }
};

// Central-difference Hessian of u at (0,0), ordered (p1,p2,p3,q1,q2,q3),
// with one Richardson step. If err is given it receives the entrywise
// difference between the step h and h/2 estimates.
Mat6 dispersion_hessian(const ModelSpec& model, double step, double* err = nullptr);

HessianBlocks estimate_hessian_blocks(const ModelSpec& model, double step = 1e-3);

}  // namespace tbspec

#endif
