#include "fbmexit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

namespace fbmexit {

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::VectorXd axis(int d) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
  e(d - 1) = 1.0;
  return e;
}

// Calls f(v) for every integer vector v with lo <= v <= hi componentwise.
template <class F>
void for_each_lattice(const Eigen::VectorXi& lo, const Eigen::VectorXi& hi, F&& f) {
  const auto d = lo.size();
  Eigen::VectorXi v = lo;
  while (true) {
    f(v);
    Eigen::Index i = 0;
    while (i < d) {
      if (v(i) < hi(i)) {
        ++v(i);
        break;
      }
      v(i) = lo(i);
      ++i;
    }
    if (i == d) return;
  }
}

// Points on a sphere of radius r in R^3 arranged in latitude rings around `pole`.
// Ring spacing and in-ring spacing both give chords >= step_chord; each ring is a
// closed loop and the walk starts every ring at the azimuth where the previous one ended.
std::vector<Eigen::Vector3d> sphere_chain(double r, double step_chord, const Eigen::Vector3d& pole) {
  const double dtheta = 2.0 * std::asin(std::min(1.0, step_chord / (2.0 * r)));
  const int rings = static_cast<int>(std::floor(kPi / dtheta));

  // Orthonormal frame (u, v, pole).
  Eigen::Vector3d helper = std::abs(pole(0)) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
  const Eigen::Vector3d u = (helper - helper.dot(pole) * pole).normalized();
  const Eigen::Vector3d v = pole.cross(u);

  std::vector<Eigen::Vector3d> out;
  out.push_back(r * pole);
  double phase = 0.0;
  for (int i = 1; i <= rings; ++i) {
    const double theta = i * dtheta;
    const double rho = r * std::sin(theta);
    int m = 1;
    if (2.0 * rho >= step_chord) m = static_cast<int>(std::floor(kPi / std::asin(step_chord / (2.0 * rho))));
    for (int j = 0; j < m; ++j) {
      const double phi = phase + 2.0 * kPi * j / m;
      out.push_back(r * (std::cos(theta) * pole + std::sin(theta) * (std::cos(phi) * u + std::sin(phi) * v)));
    }
    phase += 2.0 * kPi * (m - 1) / m;
  }
  return out;
}

void finalize(Net& net) { net.min_separation = min_pairwise_distance(net.points); }

}  // namespace

std::string to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::BallTouchingOrigin: return "ball-touching-origin";
    case DomainKind::CenteredBall: return "centered-ball";
    case DomainKind::CenteredCube: return "centered-cube";
    case DomainKind::Interval: return "interval";
    case DomainKind::HalfCube: return "half-cube";
  }
  return "unknown";
}

DomainKind domain_kind_from_string(const std::string& name) {
  for (auto k : {DomainKind::BallTouchingOrigin, DomainKind::CenteredBall, DomainKind::CenteredCube,
                 DomainKind::Interval, DomainKind::HalfCube})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown domain kind '" + name + "'");
}

void DomainSpec::validate() const {
  if (!(scale > 0.0)) throw std::invalid_argument("domain scale must be positive");
  if (dim < 1) throw std::invalid_argument("domain dimension must be >= 1");
  if (kind == DomainKind::Interval && dim != 1) throw std::invalid_argument("interval domain requires d = 1");
  if (kind == DomainKind::HalfCube && (half_dims < 0 || half_dims > dim))
    throw std::invalid_argument("half-cube requires 0 <= k <= d");
}

bool DomainSpec::contains(const Eigen::VectorXd& t, double tol) const {
  const double T = scale;
  const double slack = tol * std::max(1.0, T);
  switch (kind) {
    case DomainKind::BallTouchingOrigin: return (t + T * axis(dim)).norm() <= T + slack;
    case DomainKind::CenteredBall: return t.norm() <= T + slack;
    case DomainKind::CenteredCube: return t.cwiseAbs().maxCoeff() <= T + slack;
    case DomainKind::Interval: return t(0) >= -slack && t(0) <= T + slack;
    case DomainKind::HalfCube:
      for (int i = 0; i < dim; ++i) {
        const double lo = i < half_dims ? 0.0 : -T;
        if (t(i) < lo - slack || t(i) > T + slack) return false;
      }
      return true;
  }
  return false;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> DomainSpec::bounding_box() const {
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(dim, -scale);
  Eigen::VectorXd hi = Eigen::VectorXd::Constant(dim, scale);
  switch (kind) {
    case DomainKind::BallTouchingOrigin:
      lo(dim - 1) = -2.0 * scale;
      hi(dim - 1) = 0.0;
      break;
    case DomainKind::Interval: lo(0) = 0.0; break;
    case DomainKind::HalfCube:
      for (int i = 0; i < half_dims; ++i) lo(i) = 0.0;
      break;
    default: break;
  }
  return {lo, hi};
}

double DomainSpec::max_radius() const {
  switch (kind) {
    case DomainKind::BallTouchingOrigin: return 2.0 * scale;
    case DomainKind::CenteredBall:
    case DomainKind::Interval: return scale;
    case DomainKind::CenteredCube:
    case DomainKind::HalfCube: return scale * std::sqrt(static_cast<double>(dim));
  }
  return scale;
}

double DomainSpec::unit_diameter() const {
  switch (kind) {
    case DomainKind::BallTouchingOrigin:
    case DomainKind::CenteredBall: return 2.0;
    case DomainKind::CenteredCube: return 2.0 * std::sqrt(static_cast<double>(dim));
    case DomainKind::Interval: return 1.0;
    case DomainKind::HalfCube: return std::sqrt(static_cast<double>(half_dims + 4 * (dim - half_dims)));
  }
  return 2.0;
}

DomainSpec DomainSpec::scaled_to(double T) const {
  DomainSpec out = *this;
  out.scale = T;
  out.validate();
  return out;
}

Net Net::scaled(double lambda) const {
  Net out = *this;
  for (auto& p : out.points) p = p.scaled(lambda);
  for (auto& r : out.shell_radii) r *= lambda;
  out.min_separation *= lambda;
  out.spacing *= lambda;
  return out;
}

double Net::max_chain_step() const {
  double worst = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i)
    worst = std::max(worst, (points[i].coords() - points[i - 1].coords()).norm());
  return worst;
}

double min_pairwise_distance(const std::vector<Point>& points) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      best = std::min(best, (points[i].coords() - points[j].coords()).squaredNorm());
  return std::sqrt(best);
}

Net make_grid_net(const DomainSpec& domain, double spacing) {
  domain.validate();
  if (!(spacing > 0.0)) throw std::invalid_argument("grid spacing must be positive");
  const auto [lo, hi] = domain.bounding_box();
  const Eigen::VectorXi ilo = (lo / spacing).array().ceil().cast<int>();
  const Eigen::VectorXi ihi = (hi / spacing).array().floor().cast<int>();

  Net net;
  net.spacing = spacing;
  for_each_lattice(ilo, ihi, [&](const Eigen::VectorXi& v) {
    if (v.isZero()) return;
    Eigen::VectorXd t = spacing * v.cast<double>();
    if (!domain.contains(t)) return;
    if (domain.kind == DomainKind::Interval && t(0) <= 0.0) return;
    net.points.emplace_back(std::move(t));
    net.labels.push_back({0, static_cast<int>(net.points.size())});
  });
  if (net.points.empty()) throw std::invalid_argument("grid net is empty: domain too small for spacing");
  finalize(net);
  return net;
}

Net make_one_net(const DomainSpec& domain, double probe_resolution) {
  domain.validate();
  if (!(probe_resolution > 0.0) || probe_resolution > 0.25)
    throw std::invalid_argument("probe_resolution must be in (0, 0.25]");
  const int d = domain.dim;
  Net net = make_grid_net(domain, 2.0 / std::sqrt(static_cast<double>(d)));
  const double reach = 1.0 - 0.5 * probe_resolution * std::sqrt(static_cast<double>(d));

  std::vector<Eigen::VectorXd> pts;
  for (const auto& p : net.points) pts.push_back(p.coords());
  auto covered = [&](const Eigen::VectorXd& t) {
    for (const auto& p : pts)
      if ((p - t).squaredNorm() <= reach * reach) return true;
    return false;
  };
  auto add = [&](Eigen::VectorXd t) {
    pts.push_back(t);
    net.points.emplace_back(std::move(t));
    net.labels.push_back({0, static_cast<int>(net.points.size())});
  };

  const auto [lo, hi] = domain.bounding_box();
  const Eigen::VectorXi counts = ((hi - lo) / probe_resolution).array().ceil().cast<int>();
  for_each_lattice(Eigen::VectorXi::Zero(d), counts, [&](const Eigen::VectorXi& v) {
    Eigen::VectorXd t = (lo + probe_resolution * v.cast<double>()).cwiseMin(hi);
    if (!domain.contains(t)) {
      // Probes just outside a curved boundary stand in for the boundary strip.
      const Eigen::VectorXd c = domain.kind == DomainKind::BallTouchingOrigin
                                    ? Eigen::VectorXd(-domain.scale * axis(d))
                                    : Eigen::VectorXd::Zero(d);
      const bool round = domain.kind == DomainKind::BallTouchingOrigin || domain.kind == DomainKind::CenteredBall;
      if (!round || (t - c).norm() > domain.scale + probe_resolution * std::sqrt(static_cast<double>(d))) return;
      t = c + (t - c) * (domain.scale * (1.0 - 1e-12) / (t - c).norm());
    }
    if (covered(t)) return;
    if (t.norm() < 0.5 * probe_resolution) {
      // The origin is not a net point; cover it from a nearby domain point instead.
      for (double sgn : {-1.0, 1.0}) {
        const Eigen::VectorXd s = sgn * probe_resolution * axis(d);
        if (domain.contains(s) && !(domain.kind == DomainKind::Interval && s(0) <= 0.0)) {
          add(s);
          return;
        }
      }
      return;
    }
    if (domain.kind == DomainKind::Interval && t(0) <= 0.0) return;
    add(std::move(t));
  });
  finalize(net);
  return net;
}

ShellNet make_shell_net(double T, int d, const ShellNetOptions& opts) {
  if (!(T > 3.0)) throw std::invalid_argument("shell net requires T > 3");
  if (d < 1 || d > 3) throw std::invalid_argument("shell net supports d in {1,2,3}");
  const double sep = 1.0 + opts.epsilon;

  ShellNet out;
  Net& net = out.net;
  net.spacing = sep;
  net.chain_ordered = true;

  Eigen::VectorXd last_dir = axis(d);
  for (int k = 1;; ++k) {
    const double r = 1.0 + k * sep;
    if (r > T) break;
    net.shell_radii.push_back(r);
    std::vector<Eigen::VectorXd> shell;
    if (d == 1) {
      shell.push_back(Eigen::VectorXd::Constant(1, r));
      if (!opts.single_ray_1d) shell.push_back(Eigen::VectorXd::Constant(1, -r));
    } else if (d == 2) {
      const int m = static_cast<int>(std::floor(kPi / std::asin(std::min(1.0, sep / (2.0 * r)))));
      const double phase = std::atan2(last_dir(1), last_dir(0));
      for (int j = 0; j < m; ++j) {
        const double phi = phase + 2.0 * kPi * j / m;
        Eigen::VectorXd p(2);
        p << r * std::cos(phi), r * std::sin(phi);
        shell.push_back(std::move(p));
      }
    } else {
      for (const auto& p : sphere_chain(r, sep, Eigen::Vector3d(last_dir))) shell.emplace_back(p);
    }
    for (std::size_t a = 0; a < shell.size(); ++a) {
      net.points.emplace_back(shell[a]);
      net.labels.push_back({k, static_cast<int>(a + 1)});
    }
    last_dir = shell.back().normalized();
  }
  if (net.points.empty()) throw std::invalid_argument("shell net is empty");
  finalize(net);
  if (!(net.min_separation > 1.0))
    throw std::runtime_error("shell net construction failed: separation " + std::to_string(net.min_separation));

  out.chain_adjacent = true;
  for (std::size_t i = 1; i < net.points.size(); ++i) {
    if ((net.points[i].coords() - net.points[i - 1].coords()).norm() > 2.0) {
      if (d >= 2)
        throw std::runtime_error("shell net construction failed: adjacency broken entering shell " +
                                 std::to_string(net.labels[i].shell) + " index " +
                                 std::to_string(net.labels[i].index));
      out.chain_adjacent = false;
    }
  }
  out.count_constant = static_cast<double>(net.size()) / std::pow(T, d);
  return out;
}

namespace {

// In-domain angular intervals of the circle of radius r, angle measured from -e.
// Located on a fine scan and refined by bisection at each crossing.
std::vector<std::pair<double, double>> domain_arcs(const DomainSpec& domain, double r) {
  auto inside = [&](double phi) {
    Eigen::VectorXd p(2);
    p << r * std::sin(phi), -r * std::cos(phi);
    return domain.contains(p, 0.0);
  };
  constexpr int kScan = 4096;
  std::vector<bool> in(kScan);
  for (int i = 0; i < kScan; ++i) in[static_cast<std::size_t>(i)] = inside(-kPi + 2.0 * kPi * (i + 0.5) / kScan);
  if (std::all_of(in.begin(), in.end(), [](bool b) { return b; })) return {{-kPi, kPi}};
  auto refine = [&](double lo, double hi) {  // inside(lo) != inside(hi)
    const bool lo_in = inside(lo);
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (inside(mid) == lo_in ? lo : hi) = mid;
    }
    return lo_in ? lo : hi;
  };
  // Start the sweep at an outside sample so arcs do not wrap.
  const int start = static_cast<int>(std::find(in.begin(), in.end(), false) - in.begin());
  std::vector<std::pair<double, double>> arcs;
  auto angle = [&](int i) { return -kPi + 2.0 * kPi * (i + 0.5) / kScan; };
  double open = 0.0;
  for (int k = 1; k <= kScan; ++k) {
    const int i = start + k;
    const bool prev = in[static_cast<std::size_t>((i - 1) % kScan)];
    const bool cur = in[static_cast<std::size_t>(i % kScan)];
    const double a0 = angle(i - 1), a1 = angle(i);  // continuous past pi
    if (!prev && cur) open = refine(a0, a1);
    if (prev && !cur) arcs.emplace_back(open, refine(a0, a1));
  }
  return arcs;
}

}  // namespace

Net make_radial_net(const DomainSpec& domain, const RadialNetOptions& opts) {
  domain.validate();
  const int d = domain.dim;
  if (d > 3) throw std::invalid_argument("radial net supports d in {1,2,3}");
  if (!(opts.r_min > 0.0) || !(opts.ratio > 1.0) || !(opts.angular_step > 0.0))
    throw std::invalid_argument("radial net: r_min > 0, ratio > 1, angular_step > 0 required");

  Net net;
  net.spacing = opts.angular_step;
  const double r_max = domain.max_radius();
  int ring = 0;
  for (double r = opts.r_min; r <= r_max * (1.0 + 1e-12); r *= opts.ratio) {
    ++ring;
    std::vector<Eigen::VectorXd> cands;
    if (d == 1) {
      cands.push_back(Eigen::VectorXd::Constant(1, r));
      cands.push_back(Eigen::VectorXd::Constant(1, -r));
    } else if (d == 2 && opts.fit_arcs) {
      for (const auto& [a, b] : domain_arcs(domain, r)) {
        const int m = std::max(1, static_cast<int>(std::ceil((b - a) / opts.angular_step)));
        const bool full = b - a > 2.0 * kPi - 1e-9;
        const int count = full ? m : m + 1;
        const double shift = opts.stagger && ring % 2 == 0 ? 0.5 * (b - a) / m : 0.0;
        for (int j = 0; j < count; ++j) {
          double phi = j == m ? b : a + (b - a) * j / m;
          if (full) phi += shift;
          Eigen::VectorXd p(2);
          p << r * std::sin(phi), -r * std::cos(phi);
          cands.push_back(std::move(p));
        }
      }
    } else if (d == 2) {
      const int m = std::max(4, static_cast<int>(std::ceil(2.0 * kPi / opts.angular_step)));
      for (int j = 0; j < m; ++j) {
        const double phi = 2.0 * kPi * (j + (opts.stagger && ring % 2 == 0 ? 0.5 : 0.0)) / m;
        Eigen::VectorXd p(2);
        p << r * std::sin(phi), -r * std::cos(phi);
        cands.push_back(std::move(p));
      }
    } else {
      const int bands = std::max(2, static_cast<int>(std::ceil(kPi / opts.angular_step)));
      for (int i = 0; i <= bands; ++i) {
        const double theta = kPi * i / bands;
        const int m = std::max(1, static_cast<int>(std::ceil(2.0 * kPi * std::sin(theta) / opts.angular_step)));
        for (int j = 0; j < m; ++j) {
          const double phi = 2.0 * kPi * j / m;
          Eigen::VectorXd p(3);
          p << r * std::sin(theta) * std::cos(phi), r * std::sin(theta) * std::sin(phi), -r * std::cos(theta);
          cands.push_back(std::move(p));
        }
      }
    }
    int alpha = 0;
    for (auto& c : cands) {
      if (!domain.contains(c)) continue;
      net.points.emplace_back(std::move(c));
      net.labels.push_back({ring, ++alpha});
    }
    if (alpha > 0) net.shell_radii.push_back(r);
  }
  if (net.points.empty()) throw std::invalid_argument("radial net is empty");
  finalize(net);
  return net;
}

Eigen::MatrixXd rotate_to_axis(const Point& x) {
  const double n = x.norm();
  if (n == 0.0) throw std::invalid_argument("rotate_to_axis: zero vector");
  const auto d = static_cast<Eigen::Index>(x.dim());
  if (d == 1) return Eigen::MatrixXd::Constant(1, 1, x[0] > 0 ? 1.0 : -1.0);

  const Eigen::VectorXd e = axis(static_cast<int>(d));
  const Eigen::VectorXd u = x.coords() / n;
  const Eigen::VectorXd v = u - e;
  if (v.norm() < 1e-15) return Eigen::MatrixXd::Identity(d, d);

  // First reflection sends u to e; the second fixes e and restores det = +1.
  const Eigen::MatrixXd H1 = Eigen::MatrixXd::Identity(d, d) - 2.0 * v * v.transpose() / v.squaredNorm();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  w(0) = 1.0;
  const Eigen::MatrixXd H2 = Eigen::MatrixXd::Identity(d, d) - 2.0 * w * w.transpose();
  return H2 * H1;
}

bool inclusion_check(const Net& net, double T) {
  if (net.points.empty()) return false;
  const int d = net.dim();
  const Eigen::VectorXd e = axis(d);
  const double slack = 1e-12 * std::max(1.0, T);

  for (const auto& p : net.points)
    if (p.norm() > T + slack || p.norm() <= 1.0) return false;

  for (std::size_t j = 1; j < net.points.size(); ++j) {
    const Eigen::MatrixXd O = rotate_to_axis(net.points[j]);
    const double r = net.points[j].norm();
    for (std::size_t i = 0; i < j; ++i) {
      const Eigen::VectorXd y = O * net.points[i].coords() - r * e;
      if ((y + T * e).norm() > T + slack) return false;
      if (y.norm() <= 1.0) return false;
    }
  }
  return true;
}

double covering_radius(const Net& net, const DomainSpec& domain, double probe_resolution) {
  domain.validate();
  if (!(probe_resolution > 0.0) || probe_resolution > 0.25)
    throw std::invalid_argument("probe_resolution must be in (0, 0.25]");
  if (net.points.empty()) throw std::invalid_argument("covering_radius: empty net");

  const auto n = static_cast<Eigen::Index>(net.size());
  const int d = domain.dim;
  Eigen::MatrixXd P(d, n);
  for (Eigen::Index i = 0; i < n; ++i) P.col(i) = net.points[static_cast<std::size_t>(i)].coords();

  const auto [lo, hi] = domain.bounding_box();
  const Eigen::VectorXi counts = ((hi - lo) / probe_resolution).array().ceil().cast<int>();
  double worst = 0.0;
  for_each_lattice(Eigen::VectorXi::Zero(d), counts, [&](const Eigen::VectorXi& v) {
    const Eigen::VectorXd t = (lo + probe_resolution * v.cast<double>()).cwiseMin(hi);
    if (!domain.contains(t)) return;
    const double best = (P.colwise() - t).colwise().squaredNorm().minCoeff();
    worst = std::max(worst, best);
  });
  return std::sqrt(worst);
}

void write_net_csv(const Net& net, std::ostream& os) {
  const int d = net.dim();
  os << "shell,index";
  for (int i = 1; i <= d; ++i) os << ",x" << i;
  os << '\n';
  os.precision(17);
  for (std::size_t i = 0; i < net.size(); ++i) {
    const ShellLabel lab = i < net.labels.size() ? net.labels[i] : ShellLabel{0, static_cast<int>(i + 1)};
    os << lab.shell << ',' << lab.index;
    for (int c = 0; c < d; ++c) os << ',' << net.points[i][static_cast<std::size_t>(c)];
    os << '\n';
  }
}

Net read_net_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("shell,index", 0) != 0)
    throw std::invalid_argument("net CSV: missing header");
  Net net;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    if (vals.size() < 3) throw std::invalid_argument("net CSV: row needs shell, index and >= 1 coordinate");
    net.labels.push_back({static_cast<int>(vals[0]), static_cast<int>(vals[1])});
    net.points.emplace_back(Eigen::Map<const Eigen::VectorXd>(vals.data() + 2, static_cast<Eigen::Index>(vals.size() - 2)));
  }
  if (net.points.empty()) throw std::invalid_argument("net CSV: no points");
  int last_shell = 0;
  for (const auto& lab : net.labels) {
    if (lab.shell > 0) net.chain_ordered = true;
    if (lab.shell > last_shell) {
      net.shell_radii.push_back(net.points[&lab - net.labels.data()].norm());
      last_shell = lab.shell;
    }
  }
  finalize(net);
  return net;
}

}  // namespace fbmexit
