#include "tbspec/torus.hpp"
#include "tbspec/errors.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace tbspec {

double wrap_angle(double x)
{
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::remainder(x, two_pi);
  if (r <= -std::numbers::pi) r += two_pi;
  return r;
}

Vec3 wrap(const Vec3& v)
{
  return Vec3(wrap_angle(v[0]), wrap_angle(v[1]), wrap_angle(v[2]));
}

std::string TorusPoint::str() const
{
  std::ostringstream os;
  os.precision(17);
  os << "(" << v_[0] << ", " << v_[1] << ", " << v_[2] << ")";
  return os.str();
}

UniformGrid::UniformGrid(int n, const Vec3& origin)
  : n_(n), h_(2.0 * std::numbers::pi / n), origin_(wrap(origin))
{
  if (n < 2) throw DomainError("UniformGrid: need at least 2 points per axis");
}

Vec3 UniformGrid::displacement(long idx) const
{
  long k = idx % n_;
  long j = (idx / n_) % n_;
  long i = idx / (static_cast<long>(n_) * n_);
  return h_ * Vec3(offset(static_cast<int>(i)), offset(static_cast<int>(j)),
                   offset(static_cast<int>(k)));
}

Vec3 UniformGrid::node(long idx) const
{
  return wrap(origin_ + displacement(idx));
}

long UniformGrid::mirror(long idx) const
{
  auto refl = [this](long a) {
    long o = a - n_ / 2;
    long m = -o + n_ / 2;
    return ((m % n_) + n_) % n_;
  };
  long k = idx % n_;
  long j = (idx / n_) % n_;
  long i = idx / (static_cast<long>(n_) * n_);
  return linear(static_cast<int>(refl(i)), static_cast<int>(refl(j)), static_cast<int>(refl(k)));
}

}  // namespace tbspec
