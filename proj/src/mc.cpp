#include "fbmexit/mc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fbmexit {

namespace {

// Mean and sum of squared deviations; merged in block order so the result is
// independent of how blocks were scheduled.
struct Moments {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    n += 1.0;
    const double delta = x - mean;
    mean += delta / n;
    m2 += delta * (x - mean);
  }
  void merge(const Moments& o) {
    if (o.n == 0.0) return;
    const double total = n + o.n;
    const double delta = o.mean - mean;
    mean += delta * o.n / total;
    m2 += o.m2 + delta * delta * n * o.n / total;
    n = total;
  }
  double variance() const { return n > 1.0 ? m2 / (n - 1.0) : 0.0; }
  double std_error() const { return n > 0.0 ? std::sqrt(variance() / n) : 0.0; }
};

Factor factor_for(const Net& net, const HurstIndex& H) {
  if (net.points.empty()) throw std::invalid_argument("net is empty");
  return factorize(cov_matrix(net.points, H));
}

void check_n(std::size_t n) {
  if (n < 100) throw std::invalid_argument("Monte Carlo estimates need n >= 100 samples");
}

}  // namespace

McEstimate McEstimate::probability(std::int64_t hits, std::size_t n, std::uint64_t seed) {
  McEstimate e;
  e.n_samples = n;
  e.seed = seed;
  e.n_hits = hits;
  e.value = static_cast<double>(hits) / static_cast<double>(n);
  // Sample variance of the indicator.
  const double var = n > 1 ? e.value * (1.0 - e.value) * static_cast<double>(n) / static_cast<double>(n - 1) : 0.0;
  e.std_error = std::sqrt(var / static_cast<double>(n));
  e.degenerate = hits < kMinHits;
  return e;
}

std::vector<double> sample_maxima(const Factor& F, std::size_t n, std::uint64_t seed, const McOptions& opts) {
  std::vector<double> out(n);
  stream_samples(
      F, n, seed,
      [&](std::size_t, const SampleBlock& blk) {
        const Eigen::MatrixXd& X = *blk.values;
        for (Eigen::Index c = 0; c < X.cols(); ++c) out[blk.first_row + static_cast<std::size_t>(c)] = X.col(c).maxCoeff();
      },
      opts.stream);
  return out;
}

std::vector<double> sample_maxima(const Net& net, const HurstIndex& H, std::size_t n, std::uint64_t seed,
                                  const McOptions& opts) {
  return sample_maxima(factor_for(net, H), n, seed, opts);
}

McEstimate persistence_prob(const Net& net, const HurstIndex& H, double level, std::size_t n, std::uint64_t seed,
                            const McOptions& opts) {
  check_n(n);
  return persistence_curve_from_maxima(sample_maxima(net, H, n, seed, opts), {level}, seed).front();
}

std::vector<McEstimate> persistence_curve_from_maxima(const std::vector<double>& maxima,
                                                      const std::vector<double>& levels, std::uint64_t seed) {
  std::vector<McEstimate> out;
  out.reserve(levels.size());
  for (double level : levels) {
    const auto hits = std::count_if(maxima.begin(), maxima.end(), [level](double m) { return m < level; });
    out.push_back(McEstimate::probability(hits, maxima.size(), seed));
  }
  return out;
}

std::vector<McEstimate> persistence_curve_by_level(const Net& net, const HurstIndex& H,
                                                   const std::vector<double>& levels, std::size_t n,
                                                   std::uint64_t seed, const McOptions& opts) {
  check_n(n);
  if (!std::is_sorted(levels.begin(), levels.end(), std::greater<>()))
    throw std::invalid_argument("persistence_curve_by_level: levels must be sorted decreasing");
  return persistence_curve_from_maxima(sample_maxima(net, H, n, seed, opts), levels, seed);
}

double equivalent_level(double T, const HurstIndex& H, double level_at_T) {
  if (!(T > 0.0)) throw std::invalid_argument("equivalent_level: T must be positive");
  return level_at_T * std::pow(T, -H.value());
}

double equivalent_scale(double level, const HurstIndex& H) {
  if (!(level > 0.0)) throw std::invalid_argument("equivalent_scale: level must be positive");
  return std::pow(level, -1.0 / H.value());
}

double reduced_scale(double k, double c, const HurstIndex& H) {
  if (!(k > 1.0) || !(c > 0.0)) throw std::invalid_argument("reduced_scale: k > 1 and c > 0 required");
  return k / std::pow(c * std::sqrt(std::log(k)), 1.0 / H.value());
}

McEstimate mean_estimate(const std::vector<double>& values, std::uint64_t seed) {
  Moments m;
  for (double v : values) m.add(v);
  McEstimate e;
  e.value = m.mean;
  e.std_error = m.std_error();
  e.n_samples = values.size();
  e.seed = seed;
  return e;
}

McEstimate expected_max(const Net& net, const HurstIndex& H, std::size_t n, std::uint64_t seed,
                        const McOptions& opts) {
  check_n(n);
  return mean_estimate(sample_maxima(net, H, n, seed, opts), seed);
}

RecordStats record_stats(const Net& net, const HurstIndex& H, double gap, std::size_t n, std::uint64_t seed,
                         const McOptions& opts) {
  check_n(n);
  if (!(gap > 0.0)) throw std::invalid_argument("record_stats: gap must be positive");
  if (!net.chain_ordered) throw std::invalid_argument("record_stats: net must carry a chain order");
  const Factor F = factor_for(net, H);
  const auto N = static_cast<double>(net.size());

  struct Partial {
    Moments nu, max, first, excess, incr, lower_gap, upper_gap;
    std::int64_t below = 0;
    std::int64_t nu_max = 0;
  };
  std::vector<Partial> parts(block_count(n, opts.stream));

  stream_samples(
      F, n, seed,
      [&](std::size_t b, const SampleBlock& blk) {
        Partial& p = parts[b];
        const Eigen::MatrixXd& X = *blk.values;
        for (Eigen::Index c = 0; c < X.cols(); ++c) {
          const double* xi = X.col(c).data();
          double running = xi[0];
          double incr = -std::numeric_limits<double>::infinity();
          std::int64_t nu = 0;
          bool all_below = xi[0] < -gap;
          for (Eigen::Index j = 1; j < X.rows(); ++j) {
            if (xi[j] > running + gap) ++nu;
            running = std::max(running, xi[j]);
            incr = std::max(incr, xi[j] - xi[j - 1]);
            all_below = all_below && xi[j] < -gap;
          }
          if (X.rows() == 1) incr = 0.0;
          const double nud = static_cast<double>(nu);
          p.nu.add(nud);
          p.max.add(running);
          p.first.add(xi[0]);
          p.excess.add(running - xi[0]);
          p.incr.add(incr);
          p.lower_gap.add((N - 1.0) * (all_below ? 1.0 : 0.0) - nud);
          p.upper_gap.add(nud - (running - xi[0]));
          p.below += all_below ? 1 : 0;
          p.nu_max = std::max(p.nu_max, nu);
        }
      },
      opts.stream);

  Partial total;
  for (const auto& p : parts) {
    total.nu.merge(p.nu);
    total.max.merge(p.max);
    total.first.merge(p.first);
    total.excess.merge(p.excess);
    total.incr.merge(p.incr);
    total.lower_gap.merge(p.lower_gap);
    total.upper_gap.merge(p.upper_gap);
    total.below += p.below;
    total.nu_max = std::max(total.nu_max, p.nu_max);
  }

  RecordStats rs;
  rs.nu_mean = total.nu.mean;
  rs.nu_stderr = total.nu.std_error();
  rs.p_minus = McEstimate::probability(total.below, n, seed);
  rs.max_mean = total.max.mean;
  rs.max_stderr = total.max.std_error();
  rs.first_mean = total.first.mean;
  rs.excess_mean = total.excess.mean;
  rs.excess_stderr = total.excess.std_error();
  rs.chain_increment_max_mean = total.incr.mean;
  rs.chain_increment_max_stderr = total.incr.std_error();
  rs.lower_gap_stderr = total.lower_gap.std_error();
  rs.upper_gap_stderr = total.upper_gap.std_error();
  rs.nu_max = total.nu_max;
  rs.net_size = net.size();
  return rs;
}

McEstimate tail_prob_unit_ball_max(const HurstIndex& H, double threshold, double net_spacing, std::size_t n,
                                   std::uint64_t seed, int d, const McOptions& opts) {
  check_n(n);
  if (!(threshold >= 0.0)) throw std::invalid_argument("tail_prob_unit_ball_max: threshold must be >= 0");
  if (!(net_spacing > 0.0) || net_spacing > 0.25)
    throw std::invalid_argument("tail_prob_unit_ball_max: net_spacing must be in (0, 0.25]");
  const Net net = make_grid_net(DomainSpec{DomainKind::CenteredBall, 1.0, d, 0}, net_spacing);
  const auto maxima = sample_maxima(net, H, n, seed, opts);
  const auto hits = std::count_if(maxima.begin(), maxima.end(), [&](double m) { return m > threshold; });
  return McEstimate::probability(hits, n, seed);
}

}  // namespace fbmexit
