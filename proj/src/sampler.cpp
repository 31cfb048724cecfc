#include "fbmexit/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <numbers>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <thread>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

namespace fbmexit {

Factor factorize(const CovMatrix& C) {
  if (C.rows() != C.cols() || C.rows() == 0) throw std::invalid_argument("factorize: matrix must be square, non-empty");
  const double asym = (C - C.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(1.0, C.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("factorize: matrix is not symmetric");

  const auto n = C.rows();
  const double unit = C.trace() / static_cast<double>(n);
  const double max_jitter = 1e-8 * unit;

  double jitter = 0.0;
  while (true) {
    Eigen::LLT<Eigen::MatrixXd> llt(C + jitter * Eigen::MatrixXd::Identity(n, n));
    if (llt.info() == Eigen::Success) {
      Factor F;
      F.lower = llt.matrixL();
      if (F.lower.allFinite()) {
        F.jitter_used = jitter;
        return F;
      }
    }
    jitter = jitter == 0.0 ? 1e-12 * unit : jitter * 10.0;
    if (jitter > max_jitter * (1.0 + 1e-9))
      throw NotPsd("factorize: covariance is not positive semidefinite within jitter 1e-8*trace/N");
  }
}

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c, std::array<std::uint32_t, 2> k) {
  constexpr std::uint64_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
  constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = M0 * c[0];
    const std::uint64_t p1 = M1 * c[2];
    c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
         static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
    k[0] += W0;
    k[1] += W1;
  }
  return c;
}

double normal_from_bits(std::uint64_t bits) {
  using namespace boost::math::policies;
  static const auto pol = make_policy(promote_double<false>());
  // u = (k + 1/2) 2^-53; the upper half uses 1 - u, which is exact, so neither tail
  // rounds to 0 or 1.
  const std::uint64_t k = bits >> 11;
  if (k < (std::uint64_t{1} << 52))
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * ((static_cast<double>(k) + 0.5) * 0x1.0p-53), pol);
  const double upper = (static_cast<double>((std::uint64_t{1} << 53) - k) - 0.5) * 0x1.0p-53;
  return std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * upper, pol);
}

void standard_normals(std::uint64_t seed, std::uint64_t row, std::span<double> z) {
  const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  for (std::size_t j = 0; j < z.size(); j += 2) {
    const std::uint64_t pair = j / 2;
    const auto r = philox4x32({static_cast<std::uint32_t>(pair), static_cast<std::uint32_t>(pair >> 32),
                               static_cast<std::uint32_t>(row), static_cast<std::uint32_t>(row >> 32)},
                              key);
    z[j] = normal_from_bits((static_cast<std::uint64_t>(r[0]) << 32) | r[1]);
    if (j + 1 < z.size()) z[j + 1] = normal_from_bits((static_cast<std::uint64_t>(r[2]) << 32) | r[3]);
  }
}

std::size_t block_count(std::size_t n_samples, const StreamOptions& opts) {
  const std::size_t b = std::max<std::size_t>(1, opts.block_rows);
  return (n_samples + b - 1) / b;
}

void stream_samples(const Factor& F, std::size_t n_samples, std::uint64_t seed,
                    const std::function<void(std::size_t, const SampleBlock&)>& consume,
                    const StreamOptions& opts) {
  if (n_samples == 0) throw std::invalid_argument("stream_samples: n_samples must be >= 1");
  const std::size_t B = std::max<std::size_t>(1, opts.block_rows);
  const std::size_t blocks = block_count(n_samples, opts);
  const Eigen::Index N = F.size();

  auto run_block = [&](std::size_t b, Eigen::MatrixXd& Z, Eigen::MatrixXd& X) {
    const std::size_t first = b * B;
    const std::size_t rows = std::min(B, n_samples - first);
    Z.resize(N, static_cast<Eigen::Index>(rows));
    for (std::size_t c = 0; c < rows; ++c)
      standard_normals(seed, first + c, std::span<double>(Z.col(static_cast<Eigen::Index>(c)).data(), static_cast<std::size_t>(N)));
    X.noalias() = F.lower.triangularView<Eigen::Lower>() * Z;
    consume(b, SampleBlock{first, &X});
  };

  unsigned threads = opts.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : opts.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, blocks));
  if (threads <= 1) {
    Eigen::MatrixXd Z, X;
    for (std::size_t b = 0; b < blocks; ++b) run_block(b, Z, X);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      Eigen::MatrixXd Z, X;
      try {
        for (std::size_t b = next++; b < blocks; b = next++) run_block(b, Z, X);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = blocks;
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

SampleBatch sample(const Factor& F, std::size_t n_samples, std::uint64_t seed, double hurst) {
  if (n_samples == 0) throw std::invalid_argument("sample: n_samples must be >= 1");
  SampleBatch out;
  out.seed = seed;
  out.hurst = hurst;
  out.values.resize(static_cast<Eigen::Index>(n_samples), F.size());
  stream_samples(F, n_samples, seed, [&](std::size_t, const SampleBlock& blk) {
    out.values.middleRows(static_cast<Eigen::Index>(blk.first_row), blk.values->cols()) = blk.values->transpose();
  });
  return out;
}

namespace {

constexpr char kMagic[8] = {'F', 'B', 'M', 'X', 'B', 'A', 'T', '1'};

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char buf[8];
  if (!is.read(reinterpret_cast<char*>(buf), 8)) throw std::runtime_error("batch file truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

}  // namespace

void write_batch_binary(const SampleBatch& batch, std::ostream& os) {
  os.write(kMagic, 8);
  put_u64(os, static_cast<std::uint64_t>(batch.values.cols()));
  put_u64(os, static_cast<std::uint64_t>(batch.values.rows()));
  put_u64(os, batch.seed);
  for (Eigen::Index i = 0; i < batch.values.size(); ++i) {
    std::uint64_t bits;
    const double v = batch.values.data()[i];
    std::memcpy(&bits, &v, 8);
    put_u64(os, bits);
  }
}

SampleBatch read_batch_binary(std::istream& is) {
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw std::runtime_error("not a sample batch file");
  const auto N = get_u64(is);
  const auto n = get_u64(is);
  SampleBatch out;
  out.seed = get_u64(is);
  out.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(N));
  for (Eigen::Index i = 0; i < out.values.size(); ++i) {
    const std::uint64_t bits = get_u64(is);
    std::memcpy(out.values.data() + i, &bits, 8);
  }
  return out;
}

}  // namespace fbmexit
