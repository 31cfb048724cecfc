#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>

#include <Eigen/Dense>

#include "fbmexit/kernel.hpp"

namespace fbmexit {

class NotPsd : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Lower-triangular L with L L^T = C + jitter_used * I.
struct Factor {
  Eigen::MatrixXd lower;
  double jitter_used = 0.0;

  Eigen::Index size() const noexcept { return lower.rows(); }
};

/// Cholesky with escalating diagonal jitter: 0, then 1e-12 * trace/N, x10 per retry,
/// up to 1e-8 * trace/N. Throws NotPsd past that.
Factor factorize(const CovMatrix& C);

/// Philox4x32-10 counter-based generator; every call is a pure function of
/// (key, counter).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// Standard normal by inverse CDF of a 53-bit uniform in (0, 1).
double normal_from_bits(std::uint64_t bits);

/// Fills z with the i.i.d. standard normals of row `row` of the stream keyed by seed.
/// Entry j depends only on (seed, row, j).
void standard_normals(std::uint64_t seed, std::uint64_t row, std::span<double> z);

/// Field values, one joint draw of (w(x_1), ..., w(x_N)) per row.
struct SampleBatch {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> values;
  std::uint64_t seed = 0;
  double hurst = 0.0;
};

SampleBatch sample(const Factor& F, std::size_t n_samples, std::uint64_t seed, double hurst = 0.0);

/// A block of consecutive rows; column c is the draw for row first_row + c.
struct SampleBlock {
  std::size_t first_row = 0;
  const Eigen::MatrixXd* values = nullptr;  ///< N x rows
};

struct StreamOptions {
  std::size_t block_rows = 512;
  unsigned threads = 1;  ///< 0 = hardware concurrency
};

/// Streams n_samples draws through `consume` in fixed blocks of consecutive rows.
/// Blocks are processed concurrently when threads > 1, and `consume` is then called
/// from worker threads, one block at a time per thread. Draws do not depend on the
/// thread count.
void stream_samples(const Factor& F, std::size_t n_samples, std::uint64_t seed,
                    const std::function<void(std::size_t block_index, const SampleBlock&)>& consume,
                    const StreamOptions& opts = {});

/// Number of blocks stream_samples will produce.
std::size_t block_count(std::size_t n_samples, const StreamOptions& opts = {});

/// Binary dump: 32-byte header (magic "FBMXBAT1", u64 N, u64 n_samples, u64 seed),
/// then row-major little-endian float64 values.
void write_batch_binary(const SampleBatch& batch, std::ostream& os);
SampleBatch read_batch_binary(std::istream& is);

}  // namespace fbmexit
