#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fbmexit/geometry.hpp"
#include "fbmexit/kernel.hpp"
#include "fbmexit/sampler.hpp"

namespace fbmexit {

/// Estimates with fewer hits than this are flagged degenerate and kept out of fits.
inline constexpr std::int64_t kMinHits = 10;

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  std::int64_t n_hits = -1;  ///< -1 for non-probability estimates
  bool degenerate = false;   ///< probability estimate with n_hits < kMinHits

  static McEstimate probability(std::int64_t hits, std::size_t n, std::uint64_t seed);
};

struct McOptions {
  StreamOptions stream{};
};

/// Per-sample maximum of the field over the net, in row order.
std::vector<double> sample_maxima(const Factor& F, std::size_t n, std::uint64_t seed, const McOptions& opts = {});
std::vector<double> sample_maxima(const Net& net, const HurstIndex& H, std::size_t n, std::uint64_t seed,
                                  const McOptions& opts = {});

/// P(max over the net < level).
McEstimate persistence_prob(const Net& net, const HurstIndex& H, double level, std::size_t n, std::uint64_t seed,
                            const McOptions& opts = {});

/// All levels are estimated from one shared batch, so neighbouring estimates are
/// positively correlated. Levels must be sorted in decreasing order.
std::vector<McEstimate> persistence_curve_by_level(const Net& net, const HurstIndex& H,
                                                   const std::vector<double>& levels, std::size_t n,
                                                   std::uint64_t seed, const McOptions& opts = {});

/// Same as persistence_curve_by_level but from precomputed maxima.
std::vector<McEstimate> persistence_curve_from_maxima(const std::vector<double>& maxima,
                                                      const std::vector<double>& levels, std::uint64_t seed);

/// Level on the unit-scale domain equivalent to `level_at_T` on the domain of scale T:
/// level_at_T * T^{-H}.
double equivalent_level(double T, const HurstIndex& H, double level_at_T);

/// Scale T at which level 1 is equivalent to `level` at unit scale: level^{-1/H}.
double equivalent_scale(double level, const HurstIndex& H);

/// k / (c sqrt(ln k))^{1/H}: the scale on which level 1 matches level c sqrt(ln k) on Delta_k.
double reduced_scale(double k, double c, const HurstIndex& H);

McEstimate expected_max(const Net& net, const HurstIndex& H, std::size_t n, std::uint64_t seed,
                        const McOptions& opts = {});

McEstimate mean_estimate(const std::vector<double>& values, std::uint64_t seed);

struct RecordStats {
  double nu_mean = 0.0;
  double nu_stderr = 0.0;
  McEstimate p_minus;              ///< P(every net point < -gap)
  double max_mean = 0.0;           ///< E M(U)
  double max_stderr = 0.0;
  double first_mean = 0.0;         ///< E xi(x_1)
  double excess_mean = 0.0;        ///< E (M(U) - xi(x_1))
  double excess_stderr = 0.0;
  double chain_increment_max_mean = 0.0;  ///< E max_j (xi(x_j) - xi(x_{j-1}))
  double chain_increment_max_stderr = 0.0;
  /// Paired stderrs for the two record inequalities:
  /// (N-1) 1{all < -gap} - nu  and  nu - (M - xi(x_1)).
  double lower_gap_stderr = 0.0;
  double upper_gap_stderr = 0.0;
  std::int64_t nu_max = 0;
  std::size_t net_size = 0;
};

/// Records in net order: index j >= 2 is a record when xi(x_j) > max(xi(x_1..x_{j-1})) + gap.
RecordStats record_stats(const Net& net, const HurstIndex& H, double gap, std::size_t n, std::uint64_t seed,
                         const McOptions& opts = {});

/// P(max over a grid of the closed unit ball of spacing net_spacing > threshold).
McEstimate tail_prob_unit_ball_max(const HurstIndex& H, double threshold, double net_spacing, std::size_t n,
                                   std::uint64_t seed, int d = 1, const McOptions& opts = {});

}  // namespace fbmexit
