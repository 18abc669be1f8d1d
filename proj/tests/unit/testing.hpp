#pragma once

// Small seeded generators and brute-force oracles shared by the unit tests.
// The oracles deliberately avoid the library's own evaluation routines.

#include "annealfolio/marketdata.hpp"
#include "annealfolio/model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

namespace annealfolio::testing {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Dense upper-triangular QUBO with coefficients uniform in [lo, hi].
inline QuboModel random_qubo(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  QuboModel m(n);
  for (std::size_t i = 0; i < n; ++i) m.linear[i] = uniform(rng, lo, hi);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) m.quadratic[{i, j}] = uniform(rng, lo, hi);
  }
  m.offset = uniform(rng, lo, hi);
  return m;
}

/// Coefficients on a 1/64 grid in [-range, range]: sums of these are exact in
/// double, so kernels that add in different orders still agree bit for bit.
inline QuboModel dyadic_qubo(std::mt19937_64& rng, std::size_t n, int range = 2) {
  std::uniform_int_distribution<int> d(-64 * range, 64 * range);
  QuboModel m(n);
  for (std::size_t i = 0; i < n; ++i) m.linear[i] = d(rng) / 64.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng() % 3 != 0) m.quadratic[{i, j}] = d(rng) / 64.0;
    }
  }
  return m;
}

inline Bits bits_of(std::uint64_t mask, std::size_t n) {
  Bits x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<std::uint8_t>((mask >> i) & 1U);
  return x;
}

/// Dense-matrix energy: x'Qx with the linear terms on the diagonal.
inline double dense_energy(const QuboModel& m, const Bits& x) {
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.n), static_cast<Eigen::Index>(m.n));
  for (std::size_t i = 0; i < m.n; ++i) q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = m.linear[i];
  for (const auto& [k, b] : m.quadratic) q(static_cast<Eigen::Index>(k.first), static_cast<Eigen::Index>(k.second)) = b;
  Eigen::VectorXd v(static_cast<Eigen::Index>(m.n));
  for (std::size_t i = 0; i < m.n; ++i) v(static_cast<Eigen::Index>(i)) = x[i];
  return m.offset + v.dot(q * v);
}

inline double spin_energy(const IsingModel& m, const std::vector<int>& s) {
  double e = m.offset;
  for (std::size_t i = 0; i < m.n; ++i) e += m.h[i] * s[i];
  for (const auto& [k, j] : m.J) e += j * s[k.first] * s[k.second];
  return e;
}

/// Global minimum by plain enumeration.
inline double brute_min(const QuboModel& m) {
  double best = 1e300;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m.n); ++mask) {
    best = std::min(best, dense_energy(m, bits_of(mask, m.n)));
  }
  return best;
}

/// Random positive-definite covariance (scaled) with a slight ridge.
inline Eigen::MatrixXd random_covariance(std::mt19937_64& rng, std::size_t n, double scale = 0.05) {
  Eigen::MatrixXd a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = uniform(rng, -1.0, 1.0);
  }
  Eigen::MatrixXd s = scale * (a * a.transpose()) / static_cast<double>(n);
  s.diagonal().array() += 0.01 * scale;
  return s;
}

inline AssetStats make_stats(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma) {
  AssetStats s;
  for (Eigen::Index i = 0; i < mu.size(); ++i) s.tickers.push_back("A" + std::to_string(i));
  s.mu = mu;
  s.sigma = sigma;
  return s;
}

inline AssetStats random_stats(std::mt19937_64& rng, std::size_t n) {
  Eigen::VectorXd mu(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < mu.size(); ++i) mu(i) = uniform(rng, -0.05, 0.30);
  return make_stats(mu, random_covariance(rng, n));
}

}  // namespace annealfolio::testing
