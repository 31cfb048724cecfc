#include "fbmexit/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fbmexit {

HurstIndex::HurstIndex(double value) : value_(value) {
  if (!(value > 0.0 && value < 1.0))
    throw std::invalid_argument("Hurst index must lie in (0,1), got " + std::to_string(value));
}

Point::Point(Eigen::VectorXd coords) : coords_(std::move(coords)) {
  if (coords_.size() < 1) throw std::invalid_argument("point dimension must be >= 1");
}

Point::Point(std::initializer_list<double> coords)
    : Point(Eigen::Map<const Eigen::VectorXd>(coords.begin(), static_cast<Eigen::Index>(coords.size()))) {}

double pow_2h(double norm, const HurstIndex& H) {
  if (norm == 0.0) return 0.0;
  return std::exp(2.0 * H.value() * std::log(norm));
}

double cov(const Point& t, const Point& s, const HurstIndex& H) {
  if (t.dim() != s.dim())
    throw DimensionMismatch("cov: dimensions " + std::to_string(t.dim()) + " and " +
                            std::to_string(s.dim()) + " differ");
  const double a = pow_2h(t.norm(), H);
  const double b = pow_2h(s.norm(), H);
  const double c = pow_2h((t.coords() - s.coords()).norm(), H);
  return 0.5 * (a + b - c);
}

CovMatrix cov_matrix(std::span<const Point> points, const HurstIndex& H) {
  if (points.empty()) throw std::invalid_argument("cov_matrix: empty point set");
  const auto n = static_cast<Eigen::Index>(points.size());
  const std::size_t d = points.front().dim();

  Eigen::VectorXd self(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Point& p = points[static_cast<std::size_t>(i)];
    if (p.dim() != d) throw DimensionMismatch("cov_matrix: mixed point dimensions");
    if (p.norm() == 0.0) throw std::invalid_argument("cov_matrix: the origin is excluded from nets");
    self(i) = pow_2h(p.norm(), H);
  }

  CovMatrix C(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& xj = points[static_cast<std::size_t>(j)].coords();
    C(j, j) = self(j);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double dist = (points[static_cast<std::size_t>(i)].coords() - xj).norm();
      const double v = 0.5 * (self(i) + self(j) - pow_2h(dist, H));
      C(i, j) = v;
      C(j, i) = v;
    }
  }
  return C;
}

void validate_orthogonal(const Eigen::MatrixXd& Q, double tol) {
  if (Q.rows() != Q.cols()) throw std::invalid_argument("orthogonal map must be square");
  const Eigen::MatrixXd gram = Q.transpose() * Q - Eigen::MatrixXd::Identity(Q.rows(), Q.cols());
  const double dev = gram.cwiseAbs().maxCoeff();
  if (dev > tol)
    throw std::invalid_argument("map is not orthogonal: Gram deviation " + std::to_string(dev));
}

namespace {

double rel_dev(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

}  // namespace

StructuralReport structural_identity_report(const HurstIndex& H,
                                            std::span<const PointPair> pairs,
                                            std::span<const Eigen::MatrixXd> rotations,
                                            std::span<const double> scales) {
  for (const auto& U : rotations) validate_orthogonal(U);
  for (double l : scales)
    if (!(l > 0.0)) throw std::invalid_argument("scales must be positive");

  StructuralReport rep;
  for (const auto& [t, s] : pairs) {
    if (t.dim() != s.dim()) throw DimensionMismatch("structural_identity_report: pair dimension mismatch");
    const double c = cov(t, s, H);

    const double var_incr = cov(t, t, H) + cov(s, s, H) - 2.0 * c;
    rep.stationary_increments =
        std::max(rep.stationary_increments, rel_dev(var_incr, pow_2h((t.coords() - s.coords()).norm(), H)));

    for (double l : scales) {
      const double want = std::pow(l, 2.0 * H.value()) * c;
      rep.self_similarity = std::max(rep.self_similarity, rel_dev(cov(t.scaled(l), s.scaled(l), H), want));
    }
    for (const auto& U : rotations) {
      if (static_cast<std::size_t>(U.rows()) != t.dim())
        throw DimensionMismatch("structural_identity_report: rotation dimension mismatch");
      const double rot = cov(Point(U * t.coords()), Point(U * s.coords()), H);
      rep.isotropy = std::max(rep.isotropy, rel_dev(rot, c));
    }
    ++rep.trials;
  }
  return rep;
}

}  // namespace fbmexit
