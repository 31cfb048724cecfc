#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "fbmexit/kernel.hpp"

using namespace fbmexit;

namespace {

Point random_point(std::mt19937_64& rng, int d, double scale = 3.0) {
  std::normal_distribution<double> g(0.0, scale);
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v(i) = g(rng);
  return Point(v);
}

Eigen::MatrixXd random_rotation(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd A(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) A(i, j) = g(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  return qr.householderQ();
}

double rel(double got, double want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

}  // namespace

TEST_SUITE("kernel") {
  TEST_CASE("hurst index range") {
    CHECK_THROWS_AS(HurstIndex(0.0), std::invalid_argument);
    CHECK_THROWS_AS(HurstIndex(1.0), std::invalid_argument);
    CHECK_THROWS_AS(HurstIndex(-0.2), std::invalid_argument);
    CHECK(HurstIndex(0.3).value() == 0.3);
  }

  TEST_CASE("cov examples") {
    for (double h : {0.1, 0.5, 0.9}) CHECK(cov({1, 0}, {1, 0}, HurstIndex(h)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(cov({0, 0}, {0.3, -2.0}, HurstIndex(0.7)) == 0.0);
    CHECK(cov({1, 0}, {0, 1}, HurstIndex(0.5)) == doctest::Approx(1.0 - std::sqrt(2.0) / 2.0).epsilon(1e-15));
    CHECK_THROWS_AS(cov({1, 0}, {1, 0, 0}, HurstIndex(0.5)), DimensionMismatch);
  }

  TEST_CASE("cov_matrix examples") {
    const HurstIndex H(0.5);
    std::vector<Point> one{{1.0}};
    CHECK(cov_matrix(one, H)(0, 0) == doctest::Approx(1.0));

    std::vector<Point> bm{{1.0}, {2.0}};
    const CovMatrix C = cov_matrix(bm, H);
    CHECK(C(0, 0) == doctest::Approx(1.0));
    CHECK(C(0, 1) == doctest::Approx(1.0));
    CHECK(C(1, 0) == doctest::Approx(1.0));
    CHECK(C(1, 1) == doctest::Approx(2.0));

    std::vector<Point> three{{1.0, 0.0}, {0.0, 2.0}, {-1.5, 0.5}};
    const CovMatrix C3 = cov_matrix(three, HurstIndex(0.75));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C3);
    CHECK(eig.eigenvalues().minCoeff() > 0.0);

    std::vector<Point> with_origin{{1.0}, {0.0}};
    CHECK_THROWS_AS(cov_matrix(with_origin, H), std::invalid_argument);
    std::vector<Point> mixed{{1.0}, {1.0, 2.0}};
    CHECK_THROWS_AS(cov_matrix(mixed, H), DimensionMismatch);
    CHECK_THROWS_AS(cov_matrix(std::vector<Point>{}, H), std::invalid_argument);
  }

  TEST_CASE("kernel identities on random pairs") {
    std::mt19937_64 rng(12345);
    for (double h : {0.1, 0.25, 0.5, 0.75, 0.95}) {
      const HurstIndex H(h);
      for (int d = 1; d <= 3; ++d) {
        const Eigen::MatrixXd U = random_rotation(rng, d);
        for (int trial = 0; trial < 50; ++trial) {
          const Point t = random_point(rng, d), s = random_point(rng, d);
          const double c = cov(t, s, H);
          CHECK(cov(s, t, H) == c);
          CHECK(rel(cov(t, t, H), std::pow(t.norm(), 2 * h)) < 1e-12);
          CHECK(std::abs(cov(Point(Eigen::VectorXd::Zero(d)), s, H)) < 1e-12);
          const double incr = cov(t, t, H) + cov(s, s, H) - 2 * c;
          CHECK(rel(incr, std::pow((t.coords() - s.coords()).norm(), 2 * h)) < 1e-10);
          for (double lambda : {0.5, 2.0, 10.0})
            CHECK(rel(cov(t.scaled(lambda), s.scaled(lambda), H), std::pow(lambda, 2 * h) * c) < 1e-10);
          CHECK(rel(cov(Point(U * t.coords()), Point(U * s.coords()), H), c) < 1e-10);
        }
      }
    }
  }

  TEST_CASE("covariance matrices of small nets are PSD") {
    std::mt19937_64 rng(77);
    for (int rep = 0; rep < 20; ++rep) {
      const int d = 1 + rep % 3;
      const int n = 2 + static_cast<int>(rng() % 49);
      std::vector<Point> pts;
      for (int i = 0; i < n; ++i) pts.push_back(random_point(rng, d));
      const HurstIndex H(0.05 + 0.9 * static_cast<double>(rng() % 1000) / 1000.0);
      const CovMatrix C = cov_matrix(pts, H);
      CHECK((C - C.transpose()).cwiseAbs().maxCoeff() == 0.0);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C);
      CHECK(eig.eigenvalues().minCoeff() >= -1e-8 * C.trace());
    }
  }

  TEST_CASE("structural identity report") {
    const HurstIndex H(0.5);
    std::vector<PointPair> pairs{{{1.0}, {2.0}}};
    std::vector<Eigen::MatrixXd> id{Eigen::MatrixXd::Identity(1, 1)};
    std::vector<double> unit{1.0};
    auto r = structural_identity_report(H, pairs, id, unit);
    CHECK(r.stationary_increments == 0.0);
    CHECK(r.self_similarity == 0.0);
    CHECK(r.isotropy == 0.0);

    // lambda = 2 with 2H = 1: cov(2, 4) = 2 cov(1, 2) = 2 exactly.
    CHECK(cov({2.0}, {4.0}, H) == doctest::Approx(2.0).epsilon(1e-15));
    std::vector<double> two{2.0};
    r = structural_identity_report(H, pairs, id, two);
    CHECK(r.self_similarity < 1e-15);

    std::mt19937_64 rng(2024);
    std::vector<PointPair> many;
    for (int i = 0; i < 100; ++i) many.push_back({random_point(rng, 3), random_point(rng, 3)});
    std::vector<Eigen::MatrixXd> rots{random_rotation(rng, 3), random_rotation(rng, 3)};
    std::vector<double> scales{0.5, 2.0, 10.0};
    r = structural_identity_report(HurstIndex(0.3), many, rots, scales);
    CHECK(r.stationary_increments < 1e-10);
    CHECK(r.self_similarity < 1e-10);
    CHECK(r.isotropy < 1e-10);
    CHECK(r.trials > 0);

    Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(3, 3);
    bad(0, 1) = 1e-6;
    std::vector<Eigen::MatrixXd> bads{bad};
    CHECK_THROWS_AS(structural_identity_report(H, many, bads, scales), std::invalid_argument);
    CHECK_THROWS_AS(validate_orthogonal(Eigen::MatrixXd::Ones(2, 3)), std::invalid_argument);
  }
}
