#pragma once

#include <vector>

namespace fbmexit {

struct GaussRule {
  std::vector<double> nodes;    ///< on [-1, 1]
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule, computed by Newton iteration on P_n. Cached per n.
const GaussRule& gauss_legendre(int n);

/// Standard normal CDF and density.
double normal_cdf(double x);
double normal_pdf(double x);
double normal_quantile(double p);

}  // namespace fbmexit
