#ifndef TBSPEC_TORUS_HPP
#define TBSPEC_TORUS_HPP

#include <Eigen/Dense>
#include <string>

namespace tbspec {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Reduce an angle into (-pi, pi].
double wrap_angle(double x);
Vec3 wrap(const Vec3& v);

// A point of the 3-torus, coordinates kept in (-pi, pi].
class TorusPoint {
 public:
  TorusPoint() : v_(Vec3::Zero()) {}
  TorusPoint(double a, double b, double c) : v_(wrap(Vec3(a, b, c))) {}
  explicit TorusPoint(const Vec3& v) : v_(wrap(v)) {}

  const Vec3& coords() const { return v_; }
  double operator[](int i) const { return v_[i]; }

  // Euclidean length of the minimal-image representative.
  double norm() const { return v_.norm(); }

  TorusPoint operator-() const { return TorusPoint(Vec3(-v_)); }
  TorusPoint operator+(const TorusPoint& o) const { return TorusPoint(Vec3(v_ + o.v_)); }
  TorusPoint operator-(const TorusPoint& o) const { return TorusPoint(Vec3(v_ - o.v_)); }
  bool operator==(const TorusPoint& o) const { return v_ == o.v_; }

  std::string str() const;

 private:
  Vec3 v_;
};

// Uniform product grid with n points per axis, shifted so that `origin`
// is a node. With origin 0 the node set is {2 pi i/n - pi} reduced into
// (-pi, pi], which is closed under negation.
class UniformGrid {
 public:
  explicit UniformGrid(int n, const Vec3& origin = Vec3::Zero());

  int n() const { return n_; }
  long size() const { return static_cast<long>(n_) * n_ * n_; }
  double spacing() const { return h_; }
  double weight() const { return h_ * h_ * h_; }
  const Vec3& origin() const { return origin_; }

  // Integer offset of axis index i relative to the origin node.
  int offset(int i) const { return i - n_ / 2; }
  // Index of the origin node along each axis.
  int center_index() const { return n_ / 2; }

  long linear(int i, int j, int k) const { return (static_cast<long>(i) * n_ + j) * n_ + k; }
  // Unwrapped displacement from the origin, components in [-pi, pi).
  Vec3 displacement(long idx) const;
  // Node coordinates reduced to the torus.
  Vec3 node(long idx) const;
  long center_linear() const { return linear(n_ / 2, n_ / 2, n_ / 2); }
  // Linear index of the node -x (reflection through the origin).
  long mirror(long idx) const;

  UniformGrid recentered(const Vec3& c) const { return UniformGrid(n_, c); }

 private:
  int n_;
  double h_;
  Vec3 origin_;
};

}  // namespace tbspec

#endif
