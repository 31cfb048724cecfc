#include "fbmexit/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>

#include <fftw3.h>

#include "fbmexit/quadrature.hpp"

namespace fbmexit {

namespace {

constexpr int kMaxNodes = 512;

// Genz's sequential transform: value of the n-dim orthant integral with the given
// per-dimension Gauss-Legendre rule on [0,1].
double genz_tensor(const Eigen::MatrixXd& L, double b, int m) {
  const auto n = L.rows();
  const GaussRule& g = gauss_legendre(m);
  const double e1 = normal_cdf(b / L(0, 0));
  if (n == 1) return e1;

  auto quantile = [](double p) {
    p = std::clamp(p, 1e-300, 1.0 - 1e-16);
    return normal_quantile(p);
  };

  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    const double w1 = 0.5 * (g.nodes[static_cast<std::size_t>(i)] + 1.0);
    const double z1 = quantile(e1 * w1);
    const double e2 = normal_cdf((b - L(1, 0) * z1) / L(1, 1));
    double inner = 1.0;
    if (n == 3) {
      inner = 0.0;
      for (int j = 0; j < m; ++j) {
        const double w2 = 0.5 * (g.nodes[static_cast<std::size_t>(j)] + 1.0);
        const double z2 = quantile(e2 * w2);
        inner += 0.5 * g.weights[static_cast<std::size_t>(j)] * normal_cdf((b - L(2, 0) * z1 - L(2, 1) * z2) / L(2, 2));
      }
    }
    total += 0.5 * g.weights[static_cast<std::size_t>(i)] * e2 * inner;
  }
  return e1 * total;
}

struct FftwPlanDeleter {
  void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

}  // namespace

OrthantResult small_orthant(const OrthantSpec& spec) {
  const auto n = spec.cov.rows();
  if (n < 1 || n > 3 || spec.cov.cols() != n) throw std::invalid_argument("small_orthant_prob: need 1 <= n <= 3");
  const double trace = spec.cov.trace();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(spec.cov);
  if (!(eig.eigenvalues().minCoeff() > 1e-10 * trace))
    throw DegenerateCovariance("small_orthant_prob: covariance is (nearly) singular");
  const Eigen::MatrixXd L = spec.cov.llt().matrixL();

  OrthantResult r;
  r.nodes = 8;
  r.value = genz_tensor(L, spec.level, r.nodes);
  r.error_estimate = 1.0;
  if (n == 1) {
    r.error_estimate = 0.0;
    return r;
  }
  while (r.nodes < kMaxNodes) {
    const int next = r.nodes * 2;
    const double v = genz_tensor(L, spec.level, next);
    r.error_estimate = std::abs(v - r.value);
    r.value = v;
    r.nodes = next;
    if (r.error_estimate < 1e-9) break;
  }
  return r;
}

double small_orthant_prob(const OrthantSpec& spec) { return small_orthant(spec).value; }

std::vector<double> discrete_bm_max_curve(int T_max, double level, double grid_step) {
  if (T_max < 1 || T_max > 4096) throw std::invalid_argument("discrete_bm_max_cdf: T must be in [1, 4096]");
  if (!(grid_step > 0.0) || grid_step > 0.01) throw std::invalid_argument("discrete_bm_max_cdf: grid_step must be in (0, 0.01]");

  const double h = grid_step;
  const double lower = std::min(level, 0.0) - 8.0 * std::sqrt(static_cast<double>(T_max));
  const int M = static_cast<int>(std::ceil((level - lower) / h));  // grid x_i = level - (M - i) h
  const int K = static_cast<int>(std::ceil(8.5 / h));              // kernel half-width
  const int len = M + 1;

  int P = 1;
  while (P < len + 2 * K) P *= 2;
  const int Pc = P / 2 + 1;

  std::unique_ptr<double, FftwFree> buf(static_cast<double*>(fftw_malloc(sizeof(double) * static_cast<std::size_t>(P))));
  std::unique_ptr<fftw_complex, FftwFree> spec(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * static_cast<std::size_t>(Pc))));
  std::unique_ptr<fftw_complex, FftwFree> kern(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * static_cast<std::size_t>(Pc))));
  std::unique_ptr<fftw_plan_s, FftwPlanDeleter> fwd(fftw_plan_dft_r2c_1d(P, buf.get(), spec.get(), FFTW_ESTIMATE));
  std::unique_ptr<fftw_plan_s, FftwPlanDeleter> inv(fftw_plan_dft_c2r_1d(P, spec.get(), buf.get(), FFTW_ESTIMATE));

  // Kernel phi(m h), m = -K..K, stored circularly.
  std::fill(buf.get(), buf.get() + P, 0.0);
  for (int m = -K; m <= K; ++m) buf.get()[(m + P) % P] = normal_pdf(m * h);
  fftw_execute_dft_r2c(fwd.get(), buf.get(), kern.get());

  std::vector<double> f(static_cast<std::size_t>(len));
  for (int i = 0; i < len; ++i) f[static_cast<std::size_t>(i)] = normal_pdf(level - (M - i) * h);

  auto mass = [&] {
    // Trapezoid over [x_0, level].
    double s = 0.5 * (f.front() + f.back());
    for (int i = 1; i < len - 1; ++i) s += f[static_cast<std::size_t>(i)];
    return s * h;
  };

  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(T_max));
  out.push_back(std::min(1.0, mass()));
  const double scale = h / P;
  for (int t = 2; t <= T_max; ++t) {
    std::fill(buf.get(), buf.get() + P, 0.0);
    for (int i = 0; i < len; ++i) buf.get()[i] = f[static_cast<std::size_t>(i)];
    buf.get()[0] *= 0.5;
    buf.get()[len - 1] *= 0.5;
    fftw_execute_dft_r2c(fwd.get(), buf.get(), spec.get());
    for (int k = 0; k < Pc; ++k) {
      const std::complex<double> a(spec.get()[k][0], spec.get()[k][1]);
      const std::complex<double> b(kern.get()[k][0], kern.get()[k][1]);
      const auto c = a * b;
      spec.get()[k][0] = c.real();
      spec.get()[k][1] = c.imag();
    }
    fftw_execute_dft_c2r(inv.get(), spec.get(), buf.get());
    for (int i = 0; i < len; ++i) f[static_cast<std::size_t>(i)] = std::max(0.0, buf.get()[i] * scale);
    out.push_back(std::min(1.0, mass()));
  }
  return out;
}

double discrete_bm_max_cdf(int T, double level, double grid_step) {
  return discrete_bm_max_curve(T, level, grid_step).back();
}

}  // namespace fbmexit
