#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fbmexit/kernel.hpp"

namespace fbmexit {

enum class DomainKind { BallTouchingOrigin, CenteredBall, CenteredCube, Interval, HalfCube };

std::string to_string(DomainKind kind);
DomainKind domain_kind_from_string(const std::string& name);

/// Exit domain of scale T in R^d.
///
///   BallTouchingOrigin  {t : |t + T e| <= T}, e = (0,...,0,1); 0 is on the boundary
///   CenteredBall        {t : |t| <= T}
///   CenteredCube        [-T, T]^d
///   Interval            (0, T], d = 1
///   HalfCube            [0, T]^k x [-T, T]^(d-k)
struct DomainSpec {
  DomainKind kind = DomainKind::BallTouchingOrigin;
  double scale = 1.0;
  int dim = 1;
  int half_dims = 0;  ///< k, HalfCube only

  void validate() const;
  bool contains(const Eigen::VectorXd& t, double tol = 1e-12) const;
  /// Axis-aligned bounding box, lower and upper corners.
  std::pair<Eigen::VectorXd, Eigen::VectorXd> bounding_box() const;
  /// Largest |t| over the domain.
  double max_radius() const;
  /// Diameter of the unit-scale domain.
  double unit_diameter() const;
  DomainSpec scaled_to(double T) const;
};

struct ShellLabel {
  int shell = 0;  ///< k, 1-based; 0 for nets without shell structure
  int index = 0;  ///< alpha, 1-based
};

/// Finite ordered point set. The origin is never a member.
struct Net {
  std::vector<Point> points;
  std::vector<double> shell_radii;  ///< r_k, only for shell-structured nets
  std::vector<ShellLabel> labels;   ///< one per point
  double min_separation = 0.0;      ///< smallest pairwise distance, measured
  double spacing = 0.0;             ///< generation parameter
  bool chain_ordered = false;

  std::size_t size() const noexcept { return points.size(); }
  int dim() const { return points.empty() ? 0 : static_cast<int>(points.front().dim()); }
  Net scaled(double lambda) const;
  /// Largest distance between consecutive points in net order.
  double max_chain_step() const;
};

double min_pairwise_distance(const std::vector<Point>& points);

/// spacing * Z^d intersected with the domain, origin removed. With spacing 2/sqrt(d)
/// it covers the interior within distance 1; see make_one_net for a full 1-net.
Net make_grid_net(const DomainSpec& domain, double spacing);

/// 1-net of the domain: the grid of spacing 2/sqrt(d), completed greedily with probe
/// points (lattice of the given resolution) that lie farther than 1 from the net, so the
/// measured covering radius is at most 1 also near the origin and curved boundaries.
Net make_one_net(const DomainSpec& domain, double probe_resolution = 0.1);

struct ShellNetOptions {
  double epsilon = 0.01;       ///< separation and shell gap are 1 + epsilon
  bool single_ray_1d = false;  ///< in d = 1 use only the positive ray
};

struct ShellNet {
  Net net;
  double count_constant = 0.0;  ///< C with N = C T^d
  bool chain_adjacent = false;  ///< consecutive points within distance 2
};

/// Separated set on spheres of radii 1 < r_1 < ... <= T, listed as a chain. In
/// d >= 2 consecutive points are within distance 2; in d = 1 with both rays the two
/// points of a shell are 2 r_k apart so adjacency cannot hold and is reported false.
/// Supports d in {1, 2, 3}.
ShellNet make_shell_net(double T, int d, const ShellNetOptions& opts = {});

struct RadialNetOptions {
  double r_min = 1e-4;
  double ratio = 1.1;          ///< geometric growth of ring radii
  double angular_step = 0.1;   ///< radians between neighbours on a ring
  bool fit_arcs = false;       ///< d = 2: spread points over each in-domain arc, endpoints included
  bool stagger = false;        ///< d = 2: rotate alternate rings by half a step
};

/// Log-polar net of the domain: rings r_min * ratio^j out to the domain's max radius,
/// points every angular_step on each ring, kept where inside the domain. The net is
/// scale-invariant near the origin, so discretisation error is uniform across scales.
/// Supports d in {1, 2, 3}.
Net make_radial_net(const DomainSpec& domain, const RadialNetOptions& opts);

/// Orthogonal O with O x = |x| e (e the last basis vector). For d >= 2 a proper
/// rotation built from two Householder reflections; for d = 1 it is sign(x).
Eigen::MatrixXd rotate_to_axis(const Point& x);

/// Checks that every chain prefix, rotated so its last point lands on r_k e and then
/// shifted to the origin, lies in {|t + T e| <= T} outside the closed unit ball.
/// Also requires every net point to lie in the centered ball of radius T.
bool inclusion_check(const Net& net, double T);

/// Max over probe points of the domain's closure of the distance to the nearest net
/// point. Probes form a lattice of the given resolution.
double covering_radius(const Net& net, const DomainSpec& domain, double probe_resolution);

/// CSV: header "shell,index,x1,...,xd", one point per row.
void write_net_csv(const Net& net, std::ostream& os);
Net read_net_csv(std::istream& is);

}  // namespace fbmexit
