#include "doctest.h"

#include <cmath>
#include <mutex>
#include <sstream>
#include <vector>

#include "fbmexit/geometry.hpp"
#include "fbmexit/sampler.hpp"

using namespace fbmexit;

TEST_SUITE("sampler") {
  TEST_CASE("factorize examples") {
    const Factor I = factorize(Eigen::MatrixXd::Identity(3, 3));
    CHECK(I.jitter_used == 0.0);
    CHECK((I.lower - Eigen::MatrixXd::Identity(3, 3)).norm() == 0.0);

    Eigen::MatrixXd bm(2, 2);
    bm << 1, 1, 1, 2;
    const Factor B = factorize(bm);
    CHECK(B.jitter_used == 0.0);
    CHECK(B.lower(0, 0) == doctest::Approx(1.0));
    CHECK(B.lower(0, 1) == 0.0);
    CHECK(B.lower(1, 0) == doctest::Approx(1.0));
    CHECK(B.lower(1, 1) == doctest::Approx(1.0));

    // Q diag(1, 2, -1e-10 * trace) Q^T with a fixed rotation.
    Eigen::MatrixXd A(3, 3);
    A << 1, 2, 0, -1, 1, 3, 2, 0, 1;
    const Eigen::MatrixXd Q = Eigen::HouseholderQR<Eigen::MatrixXd>(A).householderQ();
    Eigen::Vector3d ev(1.0, 2.0, 0.0);
    ev(2) = -1e-10 * 3.0;
    const Eigen::MatrixXd C = Q * ev.asDiagonal() * Q.transpose();
    const Factor P = factorize(0.5 * (C + C.transpose()));
    CHECK(P.jitter_used > 0.0);
    CHECK(P.jitter_used <= 1e-8 * C.trace() / 3.0 * (1 + 1e-12));
    const Eigen::MatrixXd back = P.lower * P.lower.transpose();
    CHECK((back - C).cwiseAbs().maxCoeff() <= 1e-8 * C.trace() / 3.0 + 1e-15);

    Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(2, 2);
    bad(1, 1) = -0.5;
    CHECK_THROWS_AS(factorize(bad), NotPsd);
  }

  TEST_CASE("philox known answers") {
    using A4 = std::array<std::uint32_t, 4>;
    using A2 = std::array<std::uint32_t, 2>;
    CHECK(philox4x32(A4{0, 0, 0, 0}, A2{0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32(A4{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, A2{0xa4093822, 0x299f31d0}) ==
          A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
  }

  TEST_CASE("normals are well formed") {
    CHECK(std::isfinite(normal_from_bits(0)));
    CHECK(std::isfinite(normal_from_bits(~std::uint64_t{0})));
    CHECK(normal_from_bits(std::uint64_t{1} << 63) == doctest::Approx(0.0).epsilon(1e-12));
    std::vector<double> a(7), b(7);
    standard_normals(3, 11, a);
    standard_normals(3, 11, b);
    CHECK(a == b);
    std::vector<double> c(3);
    standard_normals(3, 11, c);
    for (int j = 0; j < 3; ++j) CHECK(c[static_cast<std::size_t>(j)] == a[static_cast<std::size_t>(j)]);
    standard_normals(3, 12, b);
    CHECK(a != b);
  }

  TEST_CASE("sample variance concentration") {
    const double sigma = 1.7;
    Factor F;
    F.lower = Eigen::MatrixXd::Constant(1, 1, sigma);
    const std::size_t n = 1'000'000;
    const SampleBatch s = sample(F, n, 42);
    const auto& v = s.values.col(0);
    const double mean = v.mean();
    const double var = (v.array() - mean).square().sum() / static_cast<double>(n - 1);
    CHECK(std::abs(var - sigma * sigma) <= 3.0 * sigma * sigma * std::sqrt(2.0 / n));
  }

  TEST_CASE("determinism and thread independence") {
    const std::vector<Point> pts{{1.0, 0.0}, {0.0, 2.0}, {-1.0, -1.0}, {0.5, 0.5}};
    const Factor F = factorize(cov_matrix(pts, HurstIndex(0.4)));
    CHECK(sample(F, 1, 9).values == sample(F, 1, 9).values);
    const SampleBatch ref = sample(F, 2000, 9);
    CHECK(ref.values == sample(F, 2000, 9).values);
    CHECK(ref.values != sample(F, 2000, 10).values);

    for (unsigned threads : {1u, 2u, 4u}) {
      for (std::size_t rows : {std::size_t{64}, std::size_t{512}, std::size_t{700}}) {
        StreamOptions o;
        o.threads = threads;
        o.block_rows = rows;
        Eigen::MatrixXd got(static_cast<Eigen::Index>(pts.size()), 2000);
        std::mutex m;
        std::size_t calls = 0;
        stream_samples(F, 2000, 9, [&](std::size_t, const SampleBlock& b) {
          std::lock_guard lock(m);
          ++calls;
          got.middleCols(static_cast<Eigen::Index>(b.first_row), b.values->cols()) = *b.values;
        }, o);
        CHECK(calls == block_count(2000, o));
        CHECK(got.transpose() == ref.values);
      }
    }
  }

  TEST_CASE("empirical covariance converges") {
    Eigen::MatrixXd bm(2, 2);
    bm << 1, 1, 1, 2;
    const std::size_t n = 100'000;
    const SampleBatch s = sample(factorize(bm), n, 7);
    const Eigen::MatrixXd emp = s.values.transpose() * s.values / static_cast<double>(n);
    CHECK((emp - bm).cwiseAbs().maxCoeff() < 4.0 / std::sqrt(static_cast<double>(n)));

    const Net net = make_shell_net(4.0, 2).net;
    const CovMatrix C = cov_matrix(net.points, HurstIndex(0.7));
    const SampleBatch t = sample(factorize(C), n, 8);
    const Eigen::MatrixXd e2 = t.values.transpose() * t.values / static_cast<double>(n);
    CHECK((e2 - C).cwiseAbs().maxCoeff() < 5.0 * C.diagonal().maxCoeff() / std::sqrt(static_cast<double>(n)));
  }

  TEST_CASE("scaled nets give scaled samples") {
    const Net net = make_shell_net(5.0, 2).net;
    for (double h : {0.3, 0.5, 0.8}) {
      const HurstIndex H(h);
      const Factor F = factorize(cov_matrix(net.points, H));
      for (double lambda : {0.25, 4.0}) {
        const Net big = net.scaled(lambda);
        const Factor G = factorize(cov_matrix(big.points, H));
        CHECK(F.jitter_used == 0.0);
        CHECK(G.jitter_used == 0.0);
        const auto a = sample(F, 300, 5).values;
        const auto b = sample(G, 300, 5).values;
        const double f = std::pow(lambda, h);
        CHECK(((b - f * a).cwiseAbs().maxCoeff()) <= 1e-8 * f * a.cwiseAbs().maxCoeff());
      }
    }
  }

  TEST_CASE("batch binary round trip") {
    const std::vector<Point> pts{{1.0}, {2.0}, {3.0}};
    SampleBatch s = sample(factorize(cov_matrix(pts, HurstIndex(0.5))), 17, 1234, 0.5);
    std::stringstream ss;
    write_batch_binary(s, ss);
    CHECK(ss.str().size() == 32 + 8 * 17 * 3);
    CHECK(ss.str().substr(0, 8) == "FBMXBAT1");
    const SampleBatch back = read_batch_binary(ss);
    CHECK(back.values == s.values);
    CHECK(back.seed == 1234);
    std::stringstream junk("NOTABATCH_______________________________");
    CHECK_THROWS(read_batch_binary(junk));
  }
}
