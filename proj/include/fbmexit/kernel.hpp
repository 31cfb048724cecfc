#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace fbmexit {

class DimensionMismatch : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Hurst index of the field, validated to lie in the open interval (0, 1).
class HurstIndex {
public:
  explicit HurstIndex(double value);
  double value() const noexcept { return value_; }

private:
  double value_;
};

/// A time point in R^d.
class Point {
public:
  Point() = default;
  explicit Point(Eigen::VectorXd coords);
  Point(std::initializer_list<double> coords);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(coords_.size()); }
  const Eigen::VectorXd& coords() const noexcept { return coords_; }
  double operator[](std::size_t i) const { return coords_(static_cast<Eigen::Index>(i)); }
  double norm() const { return coords_.norm(); }

  Point scaled(double lambda) const { return Point(coords_ * lambda); }

private:
  Eigen::VectorXd coords_;
};

/// |x|^{2H}, with |x| = 0 short-circuited to 0.
double pow_2h(double norm, const HurstIndex& H);

/// E w_H(t) w_H(s) = (|t|^{2H} + |s|^{2H} - |t - s|^{2H}) / 2.
double cov(const Point& t, const Point& s, const HurstIndex& H);

using CovMatrix = Eigen::MatrixXd;

/// Dense covariance of the field over an ordered point set. The origin must not be
/// among the points; see Net.
CovMatrix cov_matrix(std::span<const Point> points, const HurstIndex& H);

/// Throws std::invalid_argument unless Q is square and Q^T Q = I within tol (max-abs).
void validate_orthogonal(const Eigen::MatrixXd& Q, double tol = 1e-10);

struct PointPair {
  Point t;
  Point s;
};

struct StructuralReport {
  double stationary_increments = 0.0;  ///< max |Var(w(t)-w(s)) - |t-s|^{2H}| / scale
  double self_similarity = 0.0;        ///< max |cov(lt, ls) - l^{2H} cov(t, s)| / scale
  double isotropy = 0.0;               ///< max |cov(Ut, Us) - cov(t, s)| / scale
  std::size_t trials = 0;
};

/// Maximum relative deviations of the three structural identities of the kernel over
/// all supplied point pairs, rotations and scales. Deviations are normalised by
/// max(1, |value|) so exact zeros do not blow up.
StructuralReport structural_identity_report(const HurstIndex& H,
                                            std::span<const PointPair> pairs,
                                            std::span<const Eigen::MatrixXd> rotations,
                                            std::span<const double> scales);

}  // namespace fbmexit
