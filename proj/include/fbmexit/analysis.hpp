#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "fbmexit/geometry.hpp"
#include "fbmexit/kernel.hpp"
#include "fbmexit/mc.hpp"

namespace fbmexit {

class InsufficientData : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class QuadratureNotConverged : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised when an estimate with fewer than kMinHits hits is fed to a check.
class DegenerateEstimate : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- exponent fits

struct ScaledEstimate {
  double scale = 0.0;
  McEstimate estimate;
};

struct ExponentFit {
  double slope = 0.0;  ///< -theta
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double r_squared = 0.0;
  int points_used = 0;

  double theta() const { return -slope; }
};

/// Weighted least squares of log(value) on log(scale), weights (value / stderr)^2.
/// Degenerate estimates are dropped. If every remaining estimate has stderr 0 (exact
/// data) the fit is unweighted and slope_stderr comes from the residuals.
/// Throws InsufficientData with fewer than 3 usable points or non-increasing scales.
ExponentFit fit_exponent(std::span<const ScaledEstimate> data);

/// Level sweep on one unit-scale net: levels are converted to scales 1/level, so the
/// fitted slope is -theta/H. Levels must be decreasing.
ExponentFit fit_level_sweep(const std::vector<double>& levels, const std::vector<McEstimate>& estimates);

/// Converts a level-sweep fit (slope -theta/H) to scale coordinates (slope -theta).
ExponentFit level_fit_to_scale(const ExponentFit& level_fit, const HurstIndex& H);

// ---------------------------------------------------------------- Fernique constant

struct FerniqueConstant {
  double H = 0.0;
  double value = 0.0;
  double quadrature_error = 0.0;
};

/// 1 + (2 + sqrt 2) * int_1^inf 2^{-H v^2} dv by adaptive Gauss-Kronrod.
FerniqueConstant fernique_constant(const HurstIndex& H);

/// Same constant through the complementary error function.
double fernique_constant_closed_form(const HurstIndex& H);

/// 2 c_H sqrt(d ln T).
double fernique_threshold(const HurstIndex& H, double T, int d);

// ---------------------------------------------------------------- net-to-continuum

struct BridgeOptions {
  double T0 = 8.0;
  double dense_spacing = 0.25;
  DomainKind domain = DomainKind::BallTouchingOrigin;
  McOptions mc{};
};

struct BridgeReport {
  McEstimate lhs;  ///< P(max over dense net < b_T)
  McEstimate rhs;  ///< P(max over 1-net < 0)
  double threshold = 0.0;
  double q = 0.0;
  std::size_t one_net_size = 0;
  std::size_t dense_net_size = 0;
  bool holds = false;
};

BridgeReport net_to_continuum_check(const HurstIndex& H, double T, int d, double q, std::size_t n,
                                    std::uint64_t seed, const BridgeOptions& opts = {});

// ---------------------------------------------------------------- E max scaling

struct ExpectedMaxRow {
  double T = 0.0;
  McEstimate one_net;
  McEstimate dense;
  double ratio = 0.0;        ///< dense / one_net
  double ratio_bound = 0.0;  ///< 1 + 2 b_T / E M(U_T)
  std::size_t one_net_size = 0;
  std::size_t dense_net_size = 0;
};

struct ExpectedMaxReport {
  std::vector<ExpectedMaxRow> rows;
  ExponentFit dense_fit;    ///< log E M(dense) vs log T
  ExponentFit one_net_fit;  ///< log E M(U_T) vs log T
};

struct ExpectedMaxOptions {
  double dense_spacing = 0.25;
  DomainKind domain = DomainKind::BallTouchingOrigin;
  McOptions mc{};
};

ExpectedMaxReport expected_max_equivalence(const HurstIndex& H, const std::vector<double>& T_list, int d,
                                           std::size_t n, std::uint64_t seed, const ExpectedMaxOptions& opts = {});

// ---------------------------------------------------------------- RKHS shift norm

enum class BumpProfile { QuinticSmoothstep, CubicSmoothstep };

/// f(r) = 1 on [0, 1/2], smoothstep down to 0 on [1/2, 1], 0 beyond.
double bump(BumpProfile p, double r);

enum class NormReading { Squared, Literal };

struct ShiftFunction {
  BumpProfile bump_profile = BumpProfile::QuinticSmoothstep;
  double diameter_k = 2.0;  ///< diameter of the unit-scale domain
  /// The outer bump is f(|t| / (dilation * T * k)). With dilation 2 the shift is 1 on all
  /// of the domain outside B_1 (|t| <= T k), with dilation 1 only up to T k / 2.
  double dilation = 2.0;
  double T = 1.0;
  HurstIndex H{0.5};
  int d = 1;
  NormReading reading = NormReading::Squared;
  /// Spectral constant. Default: the one of the field's own spectral representation,
  /// which makes the norm the reproducing-kernel norm.
  bool unit_constant = false;

  double outer_scale() const { return dilation * T * diameter_k; }
};

struct RkhsNorm {
  double norm_phi = 0.0;     ///< ||phi_T||
  double norm_f = 0.0;       ///< ||f||
  double norm_scaled = 0.0;  ///< ||f(. / s)||, s = outer_scale
  double norm_bound = 0.0;   ///< s^{-H} ||f|| + ||f|| (squared reading)
  double scaling_expected = 0.0;   ///< s^{-H} (squared) or s^{-2H} (literal)
  double scaling_deviation = 0.0;  ///< |norm_scaled / norm_f - scaling_expected| / scaling_expected
  double refinement_change = 0.0;  ///< relative change of norm_phi on the last refinement
  double spectral_constant = 0.0;
  bool bound_holds = false;  ///< norm_phi <= norm_bound < 2 norm_f
};

/// Fourier transform of the radial profile in R^d at frequency magnitude rho.
double radial_fourier(BumpProfile p, int d, double rho);

/// c * int_{R^d} |psi^(lambda)|^2 |lambda|^{d+2H} d lambda for psi = f, f(./s) and phi_T,
/// computed by radial quadrature in frequency. Throws QuadratureNotConverged.
RkhsNorm rkhs_shift_norm(const ShiftFunction& shift);

/// Spectral normalisation constant of H-FBM in R^d for the Fourier convention
/// psi^(lambda) = int psi(t) e^{i lambda t} dt.
double fbm_spectral_constant(const HurstIndex& H, int d);

// ---------------------------------------------------------------- gap check

struct AdGapReport {
  double gap = 0.0;
  double bound = 0.0;
  double gap_stderr = 0.0;
  bool holds = false;
};

/// gap = |sqrt(ln 1/p+) - sqrt(ln 1/p-)|, bound = 2 shift_norm / sqrt 2,
/// holds iff gap <= bound + 3 gap_stderr (delta method).
AdGapReport ad_gap_check(const McEstimate& p_plus, const McEstimate& p_minus, double shift_norm);

// ---------------------------------------------------------------- summaries

struct BoundRow {
  double theta_hat = 0.0;
  double theta_stderr = 0.0;
  double target = 0.0;
  bool within_3_sigma = false;
  bool within_acceptance_band = false;  ///< target in [theta - 3s - 0.1, theta + 3s + 0.35]
};

struct BoundSummary {
  double target = 0.0;  ///< d - H
  std::vector<BoundRow> rows;
  std::string note;
};

BoundSummary bound_summary(const HurstIndex& H, int d, const std::vector<ExponentFit>& fits);

// ---------------------------------------------------------------- output

nlohmann::json to_json(const McEstimate& e);
nlohmann::json to_json(const ExponentFit& f);
nlohmann::json to_json(const RecordStats& r);
nlohmann::json to_json(const BridgeReport& r);
nlohmann::json to_json(const ExpectedMaxReport& r);
nlohmann::json to_json(const RkhsNorm& r);
nlohmann::json to_json(const AdGapReport& r);
nlohmann::json to_json(const BoundSummary& r);

struct PlotPoint {
  double x = 0.0;
  double value = 0.0;
  double std_error = 0.0;
};

/// Whitespace-separated "x value stderr" rows with a '#' header line.
void write_plot_data(std::ostream& os, const std::vector<PlotPoint>& points, const std::string& header);

}  // namespace fbmexit
