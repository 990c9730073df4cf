#pragma once

// Wyner-model channel generation for the two-cell and three-cell
// cooperative setups, with seeded, splittable complex-Gaussian sampling.

#include <cstdint>
#include <random>
#include <stdexcept>

#include "rsma/streams.hpp"

namespace rsma {

namespace detail {
// splitmix64; used to derive independent per-realization seeds so that
// realization i is reproducible regardless of execution order.
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}
}  // namespace detail

/// Seedable generator; split(i) yields an independent stream for
/// realization i of the same master seed.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(detail::mix64(seed)) {}

  static Rng split(uint64_t seed, uint64_t stream) {
    return Rng(detail::mix64(seed ^ detail::mix64(stream + 1)));
  }

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// Circularly-symmetric complex Gaussian with E|h|^2 = variance.
inline std::complex<double> sample_complex_gaussian(double variance, Rng& rng) {
  if (variance < 0.0)
    throw std::invalid_argument("sample_complex_gaussian: negative variance");
  if (variance == 0.0) return {0.0, 0.0};
  const double s = std::sqrt(variance / 2.0);
  return {s * rng.normal(), s * rng.normal()};
}

/// Channel draw: row k of H is the aggregate channel h_k^T from all M base
/// stations to user k, plus the variance profile it was drawn from.
struct ChannelState {
  CMat H;                 // K x M
  Eigen::MatrixXd variance;  // K x M
  uint64_t seed = 0;
  uint64_t draw = 0;

  int num_users() const { return static_cast<int>(H.rows()); }
  int num_bs() const { return static_cast<int>(H.cols()); }

  CVec h(int user) const { return H.row(user - 1).transpose(); }
};

inline ChannelState draw_from_profile(const Eigen::MatrixXd& variance, Rng& rng) {
  ChannelState ch;
  ch.variance = variance;
  ch.H.resize(variance.rows(), variance.cols());
  for (Eigen::Index k = 0; k < variance.rows(); ++k)
    for (Eigen::Index m = 0; m < variance.cols(); ++m)
      ch.H(k, m) = sample_complex_gaussian(variance(k, m), rng);
  return ch;
}

inline void check_disparity(double alpha, double beta) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("wyner: alpha must be in (0,1]");
  if (!(beta > 0.0 && beta <= 1.0))
    throw std::invalid_argument("wyner: beta must be in (0,1]");
}

/// Two-cell, two-user variance profile: alpha is the inter-cell and beta
/// the inter-user channel strength disparity.
inline Eigen::MatrixXd wyner_two_cell_profile(double alpha, double beta) {
  check_disparity(alpha, beta);
  Eigen::MatrixXd v(2, 2);
  v << 1.0, alpha,
       alpha * beta, beta;
  return v;
}

inline ChannelState wyner_two_cell(double alpha, double beta, Rng& rng) {
  return draw_from_profile(wyner_two_cell_profile(alpha, beta), rng);
}

/// Three-cell linear array: interference only from immediate neighbours, so
/// h_{1,3} and h_{3,1} are structural zeros.
inline Eigen::MatrixXd wyner_three_cell_profile(double alpha, double beta) {
  check_disparity(alpha, beta);
  Eigen::MatrixXd v(3, 3);
  v << 1.0, alpha, 0.0,
       alpha * beta, beta, alpha * beta,
       0.0, alpha, 1.0;
  return v;
}

inline ChannelState wyner_three_cell(double alpha, double beta, Rng& rng) {
  return draw_from_profile(wyner_three_cell_profile(alpha, beta), rng);
}

}  // namespace rsma
