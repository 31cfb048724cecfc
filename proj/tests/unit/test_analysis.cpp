#include "doctest.h"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include "fbmexit/analysis.hpp"

using namespace fbmexit;

namespace {

constexpr double kPi = std::numbers::pi;

McEstimate exact(double v) {
  McEstimate e;
  e.value = v;
  return e;
}

McEstimate noisy(double v, double se, std::int64_t hits = 1000) {
  McEstimate e;
  e.value = v;
  e.std_error = se;
  e.n_hits = hits;
  e.n_samples = 100000;
  return e;
}

// Smoothstep transitions written out independently of the library: f(r) = S(2(1 - r))
// on [1/2, 1]. Returns (f', f'') in r.
struct Derivs {
  double d1, d2;
};
Derivs bump_derivs(bool quintic, double r) {
  const double x = 2.0 * (1.0 - r);
  double s1, s2;
  if (quintic) {
    s1 = 30.0 * x * x * (1 - x) * (1 - x);
    s2 = 60.0 * x * (1 - x) * (1 - 2 * x);
  } else {
    s1 = 6.0 * x * (1 - x);
    s2 = 6.0 - 12.0 * x;
  }
  return {-2.0 * s1, 4.0 * s2};
}

template <class F>
double integrate(F f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-13);
}

}  // namespace

TEST_SUITE("analysis") {
  TEST_CASE("exact power law fit") {
    std::vector<ScaledEstimate> data;
    for (double s : {1.0, 2.0, 4.0, 8.0, 16.0}) data.push_back({s, exact(3.0 * std::pow(s, -2.0))});
    const ExponentFit f = fit_exponent(data);
    CHECK(std::abs(f.slope + 2.0) < 1e-10);
    CHECK(f.theta() == doctest::Approx(2.0));
    CHECK(f.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::exp(f.intercept) == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(f.points_used == 5);
    CHECK(f.slope_stderr < 1e-10);
  }

  TEST_CASE("weighted fit") {
    std::vector<ScaledEstimate> data;
    for (double s : {1.0, 2.0, 4.0, 8.0}) {
      const double v = std::pow(s, -0.5);
      data.push_back({s, noisy(v, 0.01 * v)});
    }
    const ExponentFit f = fit_exponent(data);
    CHECK(std::abs(f.slope + 0.5) < 1e-10);
    // Floor of unit residual variance: the error is that of the stated stderrs.
    double sxx = 0.0, mx = 0.0;
    for (const auto& p : data) mx += std::log(p.scale) / 4.0;
    for (const auto& p : data) sxx += 1e4 * std::pow(std::log(p.scale) - mx, 2);
    CHECK(f.slope_stderr == doctest::Approx(std::sqrt(1.0 / sxx)).epsilon(1e-10));
  }

  TEST_CASE("insufficient data") {
    std::vector<ScaledEstimate> two{{1.0, exact(1.0)}, {2.0, exact(0.5)}};
    CHECK_THROWS_AS(fit_exponent(two), InsufficientData);
    std::vector<ScaledEstimate> unordered{{1.0, exact(1.0)}, {3.0, exact(0.5)}, {2.0, exact(0.2)}};
    CHECK_THROWS_AS(fit_exponent(unordered), InsufficientData);
    std::vector<ScaledEstimate> few_hits{{1.0, noisy(0.5, 0.01)}, {2.0, noisy(0.25, 0.01)}, {4.0, noisy(1e-4, 1e-4, 3)}};
    CHECK_THROWS_AS(fit_exponent(few_hits), InsufficientData);
    std::vector<ScaledEstimate> mixed{{1.0, exact(1.0)}, {2.0, noisy(0.5, 0.01)}, {4.0, exact(0.25)}};
    CHECK_THROWS_AS(fit_exponent(mixed), InsufficientData);
  }

  TEST_CASE("level sweep conversion") {
    const std::vector<double> levels{1.0, 0.5, 0.25, 0.125};
    std::vector<McEstimate> est;
    // p behaves like level^{theta / H} with theta = 1.5, H = 0.5.
    for (double a : levels) est.push_back(exact(std::pow(a, 3.0)));
    const ExponentFit lf = fit_level_sweep(levels, est);
    CHECK(lf.slope == doctest::Approx(-3.0).epsilon(1e-10));
    const ExponentFit sf = level_fit_to_scale(lf, HurstIndex(0.5));
    CHECK(sf.theta() == doctest::Approx(1.5).epsilon(1e-10));
    CHECK_THROWS_AS(fit_level_sweep({1.0, 0.5}, est), std::invalid_argument);
    CHECK_THROWS_AS(fit_level_sweep({0.5, 1.0, 2.0, 4.0}, est), InsufficientData);
  }

  TEST_CASE("fernique constant") {
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= 20; ++i) {
      const HurstIndex H(0.0475 * i);
      const FerniqueConstant c = fernique_constant(H);
      CHECK(std::abs(c.value - fernique_constant_closed_form(H)) < 1e-8);
      CHECK(c.value > 1.0);
      CHECK(c.value < prev);
      CHECK(c.quadrature_error < 1e-10);
      prev = c.value;
    }
    CHECK(fernique_constant(HurstIndex(0.5)).value == doctest::Approx(3.0820723180).epsilon(1e-10));
    CHECK(fernique_threshold(HurstIndex(0.5), 16.0, 1) == doctest::Approx(10.264).epsilon(1e-4));
    CHECK_THROWS_AS(fernique_threshold(HurstIndex(0.5), 1.0, 1), std::invalid_argument);
  }

  TEST_CASE("spectral constant") {
    CHECK(fbm_spectral_constant(HurstIndex(0.5), 1) == doctest::Approx(1.0 / (2.0 * kPi)).epsilon(1e-14));
    // Var w(e) = (1 / ((2 pi)^{2d} c)) int |e^{i lambda.e} - 1|^2 |lambda|^{-d-2H} d lambda must be 1.
    // In d = 2 the angular integral gives 4 pi int_0^inf (1 - J0(rho)) rho^{-1-2H} d rho.
    for (double h : {0.25, 0.5, 0.75}) {
      const double R = 4000.0;
      double K = integrate([h](double r) {
        return r == 0.0 ? 0.0 : (1.0 - boost::math::cyl_bessel_j(0, r)) * std::pow(r, -1.0 - 2.0 * h);
      }, 0.0, 1.0);
      for (double a = 1.0; a < R; a += 4.0)
        K += integrate([h](double r) { return (1.0 - boost::math::cyl_bessel_j(0, r)) * std::pow(r, -1.0 - 2.0 * h); },
                       a, a + 4.0);
      K += std::pow(R, -2.0 * h) / (2.0 * h);
      K *= 4.0 * kPi;
      const double c = K / std::pow(2.0 * kPi, 4);
      CHECK(fbm_spectral_constant(HurstIndex(h), 2) == doctest::Approx(c).epsilon(2e-4));
    }
  }

  TEST_CASE("bump profiles and their transforms") {
    for (auto p : {BumpProfile::QuinticSmoothstep, BumpProfile::CubicSmoothstep}) {
      CHECK(bump(p, 0.0) == 1.0);
      CHECK(bump(p, 0.5) == 1.0);
      CHECK(bump(p, 0.75) == doctest::Approx(0.5).epsilon(1e-15));
      CHECK(bump(p, 1.0) == 0.0);
      CHECK(bump(p, 3.0) == 0.0);
      for (double rho : {0.0, 0.7, 5.0, 23.0}) {
        const auto f = [p](double r) { return bump(p, r); };
        const double one = 2.0 * integrate([&](double r) { return f(r) * std::cos(rho * r); }, 0.0, 0.5) +
                           2.0 * integrate([&](double r) { return f(r) * std::cos(rho * r); }, 0.5, 1.0);
        CHECK(radial_fourier(p, 1, rho) == doctest::Approx(one).epsilon(1e-9));
        auto k3 = [rho](double r) { return rho == 0.0 ? r * r : r * std::sin(rho * r) / rho; };
        const double three = 4.0 * kPi * (integrate([&](double r) { return f(r) * k3(r); }, 0.0, 0.5) +
                                          integrate([&](double r) { return f(r) * k3(r); }, 0.5, 1.0));
        CHECK(radial_fourier(p, 3, rho) == doctest::Approx(three).epsilon(1e-9));
        auto k2 = [rho](double r) { return r * boost::math::cyl_bessel_j(0, rho * r); };
        const double two = 2.0 * kPi * (integrate([&](double r) { return f(r) * k2(r); }, 0.0, 0.5) +
                                        integrate([&](double r) { return f(r) * k2(r); }, 0.5, 1.0));
        CHECK(radial_fourier(p, 2, rho) == doctest::Approx(two).epsilon(1e-9));
      }
    }
  }

  TEST_CASE("RKHS norms against real-space integrals") {
    // With the field's own spectral constant and H = 1/2: d = 1 gives int f'^2 and
    // d = 3 gives (1 / 4 pi) int (Laplacian f)^2.
    const double q1 = 2.0 * integrate([](double r) { return std::pow(bump_derivs(true, r).d1, 2); }, 0.5, 1.0);
    const double c1 = 2.0 * integrate([](double r) { return std::pow(bump_derivs(false, r).d1, 2); }, 0.5, 1.0);
    const double q3 = integrate([](double r) {
      const Derivs g = bump_derivs(true, r);
      return std::pow(g.d2 + 2.0 * g.d1 / r, 2) * r * r;
    }, 0.5, 1.0);
    CHECK(q1 == doctest::Approx(40.0 / 7.0).epsilon(1e-12));
    CHECK(c1 == doctest::Approx(24.0 / 5.0).epsilon(1e-12));

    ShiftFunction sh;
    sh.T = 8.0;
    sh.d = 1;
    RkhsNorm r = rkhs_shift_norm(sh);
    CHECK(r.norm_f * r.norm_f == doctest::Approx(q1).epsilon(1e-7));
    CHECK(r.spectral_constant == doctest::Approx(1.0 / (2.0 * kPi)));

    sh.bump_profile = BumpProfile::CubicSmoothstep;
    r = rkhs_shift_norm(sh);
    CHECK(r.norm_f * r.norm_f == doctest::Approx(c1).epsilon(1e-7));
    // d = 1, H = 1/2: the norm is ||phi'||_2, and the derivatives of f(./s) and f have
    // disjoint supports for s = 32, so ||phi||^2 = ||f||^2 (1 + 1/s).
    CHECK(r.norm_phi * r.norm_phi == doctest::Approx(c1 * (1.0 + 1.0 / 32.0)).epsilon(1e-7));
    CHECK(r.bound_holds);

    sh.bump_profile = BumpProfile::QuinticSmoothstep;
    sh.d = 3;
    sh.T = 4.0;
    r = rkhs_shift_norm(sh);
    CHECK(r.norm_f * r.norm_f == doctest::Approx(q3).epsilon(1e-6));
    CHECK(q3 == doctest::Approx(600.0 / 7.0).epsilon(1e-10));

    sh.unit_constant = true;
    const RkhsNorm u = rkhs_shift_norm(sh);
    CHECK(u.spectral_constant == 1.0);
    CHECK(u.norm_f / r.norm_f == doctest::Approx(1.0 / std::sqrt(r.spectral_constant)).epsilon(1e-10));
  }

  TEST_CASE("RKHS scaling identity and triangle bound") {
    for (double h : {0.3, 0.5, 0.8}) {
      ShiftFunction sh;
      sh.H = HurstIndex(h);
      sh.d = 1;
      sh.T = 4.0;
      const RkhsNorm a = rkhs_shift_norm(sh);
      CHECK(a.scaling_deviation < 1e-8);
      CHECK(a.bound_holds);
      CHECK(a.norm_phi <= a.norm_bound);
      CHECK(a.norm_bound < 2.0 * a.norm_f);
      CHECK(a.refinement_change <= 1e-6);
      sh.T = 8.0;
      const RkhsNorm b = rkhs_shift_norm(sh);
      CHECK(b.norm_scaled / a.norm_scaled == doctest::Approx(std::pow(2.0, -h)).epsilon(1e-8));
      CHECK(b.norm_f == doctest::Approx(a.norm_f).epsilon(1e-10));
    }
    ShiftFunction sh2;
    sh2.d = 2;
    sh2.T = 2.0;
    const RkhsNorm c = rkhs_shift_norm(sh2);
    CHECK(c.scaling_deviation < 1e-8);
    CHECK(c.bound_holds);
  }

  TEST_CASE("RKHS literal reading and unsupported inputs") {
    ShiftFunction sh;
    sh.T = 4.0;
    sh.reading = NormReading::Literal;
    const RkhsNorm r = rkhs_shift_norm(sh);
    const double s = sh.outer_scale();
    CHECK(r.scaling_expected == doctest::Approx(std::pow(s, -1.0)));
    CHECK(r.norm_scaled / r.norm_f == doctest::Approx(std::pow(s, -1.0)).epsilon(1e-8));
    CHECK(r.norm_f == doctest::Approx(40.0 / 7.0).epsilon(1e-7));

    ShiftFunction bad;
    bad.d = 4;
    CHECK_THROWS_AS(rkhs_shift_norm(bad), std::invalid_argument);
    bad.d = 1;
    bad.T = 0.2;
    CHECK_THROWS_AS(rkhs_shift_norm(bad), std::invalid_argument);

    // The cubic profile is only C^1, so in d = 3 the spectral integral diverges.
    ShiftFunction cubic3;
    cubic3.bump_profile = BumpProfile::CubicSmoothstep;
    cubic3.d = 3;
    cubic3.T = 4.0;
    CHECK_THROWS_AS(rkhs_shift_norm(cubic3), QuadratureNotConverged);
  }

  TEST_CASE("gap check") {
    const McEstimate p = noisy(0.2, 0.001);
    const AdGapReport same = ad_gap_check(p, p, 0.0);
    CHECK(same.gap == 0.0);
    CHECK(same.holds);

    const McEstimate pm = noisy(0.01, 0.0003, 1000);
    double prev = -1.0;
    for (double norm : {0.0, 0.5, 1.0, 2.0}) {
      const AdGapReport r = ad_gap_check(p, pm, norm);
      CHECK(r.bound == doctest::Approx(norm * std::numbers::sqrt2));
      CHECK(r.bound > prev);
      prev = r.bound;
      CHECK(r.gap == doctest::Approx(std::sqrt(std::log(100.0)) - std::sqrt(std::log(5.0))));
    }
    CHECK_FALSE(ad_gap_check(p, pm, 0.0).holds);
    CHECK(ad_gap_check(p, pm, 2.0).holds);
    CHECK_THROWS_AS(ad_gap_check(noisy(0.001, 0.001, 5), pm, 1.0), DegenerateEstimate);
    CHECK_THROWS_AS(ad_gap_check(noisy(1.0, 0.0, 100000), pm, 1.0), DegenerateEstimate);
    CHECK_THROWS_AS(ad_gap_check(p, pm, -1.0), std::invalid_argument);
  }

  TEST_CASE("net-to-continuum bridge") {
    const HurstIndex H(0.5);
    const BridgeReport r = net_to_continuum_check(H, 16.0, 1, 0.5, 4000, 11);
    CHECK(r.threshold == doctest::Approx(10.264).epsilon(1e-4));
    CHECK(r.holds);
    CHECK(r.dense_net_size > r.one_net_size);
    CHECK(net_to_continuum_check(H, 16.0, 1, 1e-9, 2000, 12).holds);
    CHECK_THROWS_AS(net_to_continuum_check(H, 4.0, 1, 0.5, 2000, 1), std::invalid_argument);
    CHECK_THROWS_AS(net_to_continuum_check(H, 16.0, 1, 1.5, 2000, 1), std::invalid_argument);
  }

  TEST_CASE("expected maximum equivalence") {
    const HurstIndex H(0.5);
    const ExpectedMaxReport rep = expected_max_equivalence(H, {16.0, 32.0, 64.0}, 1, 4000, 3);
    REQUIRE(rep.rows.size() == 3);
    for (const auto& row : rep.rows) {
      CHECK(row.ratio > 0.95);
      CHECK(row.ratio <= row.ratio_bound);
      CHECK(row.dense_net_size > row.one_net_size);
    }
    CHECK(rep.dense_fit.slope == doctest::Approx(0.5).epsilon(0.2));
    CHECK_THROWS_AS(expected_max_equivalence(H, {16.0, 32.0}, 1, 1000, 1), InsufficientData);
    CHECK_THROWS_AS(expected_max_equivalence(H, {16.0, 64.0, 32.0}, 1, 1000, 1), InsufficientData);
  }

  TEST_CASE("bound summary targets") {
    ExponentFit f;
    f.slope = -0.55;
    f.slope_stderr = 0.01;
    const BoundSummary a = bound_summary(HurstIndex(0.5), 1, {f});
    CHECK(a.target == doctest::Approx(0.5));
    REQUIRE(a.rows.size() == 1);
    CHECK(a.rows[0].within_acceptance_band);
    CHECK_FALSE(a.rows[0].within_3_sigma);
    CHECK_FALSE(a.note.empty());
    CHECK(bound_summary(HurstIndex(0.5), 2, {}).target == doctest::Approx(1.5));
    CHECK(bound_summary(HurstIndex(0.25), 2, {}).target == doctest::Approx(1.75));
    f.slope = -2.5;
    CHECK_FALSE(bound_summary(HurstIndex(0.5), 2, {f}).rows[0].within_acceptance_band);
  }

  TEST_CASE("json and plot output") {
    const auto j = to_json(noisy(0.25, 0.01, 250));
    for (const char* key : {"value", "stderr", "n_samples", "seed", "n_hits", "degenerate"}) CHECK(j.contains(key));
    ExponentFit f;
    f.slope = -0.5;
    CHECK(to_json(f)["theta"].get<double>() == 0.5);
    std::ostringstream os;
    write_plot_data(os, {{1.0, 0.5, 0.01}, {2.0, 0.25, 0.02}}, "T p stderr");
    CHECK(os.str() == "# T p stderr\n1 0.5 0.01\n2 0.25 0.02\n");
  }
}
