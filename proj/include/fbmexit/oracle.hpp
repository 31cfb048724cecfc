#pragma once

#include <stdexcept>
#include <vector>

#include "fbmexit/kernel.hpp"

namespace fbmexit {

class DegenerateCovariance : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct OrthantSpec {
  CovMatrix cov;  ///< n x n, n <= 3
  double level = 0.0;
};

struct OrthantResult {
  double value = 0.0;
  double error_estimate = 0.0;  ///< |difference| between the last two node counts
  int nodes = 0;                ///< per dimension, final rule
};

/// P(X_i < level for all i), X ~ N(0, cov), n <= 3. Sequential conditioning after
/// Cholesky maps the problem to the unit cube in n - 1 variables, integrated with a
/// tensor Gauss-Legendre rule whose size is doubled until two successive values
/// agree to 1e-9 (or the node cap is reached).
OrthantResult small_orthant(const OrthantSpec& spec);
double small_orthant_prob(const OrthantSpec& spec);

/// P(max_{k=1..T} W_k < level) for the Gaussian random walk with N(0,1) steps.
/// The sub-level density is propagated by FFT convolution on the grid
/// [level - grid_step * M, level] with the lower end at -8 sqrt(T) below min(level, 0).
double discrete_bm_max_cdf(int T, double level, double grid_step);

/// Same recursion returning P(max_{k=1..t} W_k < level) for every t = 1..T_max.
std::vector<double> discrete_bm_max_curve(int T_max, double level, double grid_step);

}  // namespace fbmexit
