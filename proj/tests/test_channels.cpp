#include <catch2/catch_amalgamated.hpp>

#include "rsma/channels.hpp"

using namespace rsma;

TEST_CASE("complex Gaussian sampling") {
  Rng rng(42);
  SECTION("zero variance gives exactly zero") {
    CHECK(sample_complex_gaussian(0.0, rng) == std::complex<double>(0.0, 0.0));
  }
  SECTION("negative variance rejected") {
    CHECK_THROWS_AS(sample_complex_gaussian(-1.0, rng), std::invalid_argument);
  }
  SECTION("unit variance empirically") {
    double acc = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) acc += std::norm(sample_complex_gaussian(1.0, rng));
    acc /= n;
    CHECK(acc > 0.98);
    CHECK(acc < 1.02);
  }
  SECTION("fixed seed reproduces the draw sequence") {
    Rng a(7), b(7);
    for (int i = 0; i < 50; ++i)
      CHECK(sample_complex_gaussian(1.0, a) == sample_complex_gaussian(1.0, b));
  }
}

TEST_CASE("two-cell Wyner profile") {
  SECTION("alpha=beta=1 gives unit variances") {
    CHECK(wyner_two_cell_profile(1.0, 1.0).isApprox(Eigen::MatrixXd::Ones(2, 2)));
  }
  SECTION("alpha=0.05, beta=0.1") {
    Eigen::MatrixXd expect(2, 2);
    expect << 1.0, 0.05, 0.005, 0.1;
    CHECK(wyner_two_cell_profile(0.05, 0.1).isApprox(expect));
  }
  SECTION("beta=1: expected channel norms match across users") {
    for (double alpha : {0.1, 0.5, 1.0}) {
      const auto v = wyner_two_cell_profile(alpha, 1.0);
      CHECK(v.row(0).sum() == Catch::Approx(1.0 + alpha));
      CHECK(v.row(1).sum() == Catch::Approx(1.0 + alpha));
    }
  }
  SECTION("out-of-range parameters rejected") {
    Rng rng(1);
    CHECK_THROWS_AS(wyner_two_cell(0.0, 1.0, rng), std::invalid_argument);
    CHECK_THROWS_AS(wyner_two_cell(1.0, 1.5, rng), std::invalid_argument);
  }
}

TEST_CASE("three-cell Wyner profile") {
  SECTION("alpha=beta=1") {
    Eigen::MatrixXd expect(3, 3);
    expect << 1, 1, 0, 1, 1, 1, 0, 1, 1;
    CHECK(wyner_three_cell_profile(1.0, 1.0).isApprox(expect));
  }
  SECTION("alpha=0.5, beta=0.3 cross terms") {
    const auto v = wyner_three_cell_profile(0.5, 0.3);
    CHECK(v(1, 0) == Catch::Approx(0.15));
    CHECK(v(1, 2) == Catch::Approx(0.15));
  }
  SECTION("structural zeros hold for every draw") {
    for (int r = 0; r < 20; ++r) {
      Rng rng = Rng::split(3, r);
      const auto ch = wyner_three_cell(0.7, 0.4, rng);
      CHECK(ch.H(0, 2) == std::complex<double>(0.0, 0.0));
      CHECK(ch.H(2, 0) == std::complex<double>(0.0, 0.0));
    }
  }
}

TEST_CASE("empirical variance and independence") {
  const auto profile = wyner_two_cell_profile(0.5, 0.25);
  const int n = 10000;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(2, 2);
  std::vector<ChannelState> draws;
  for (int r = 0; r < n; ++r) {
    Rng rng = Rng::split(99, r);
    draws.push_back(draw_from_profile(profile, rng));
    acc += draws.back().H.cwiseAbs2();
  }
  acc /= n;
  for (int k = 0; k < 2; ++k)
    for (int m = 0; m < 2; ++m)
      CHECK(std::abs(acc(k, m) - profile(k, m)) < 0.05 * profile(k, m));

  // cross-correlation between distinct entries stays small
  std::complex<double> cc = 0.0;
  for (const auto& d : draws) cc += d.H(0, 0) * std::conj(d.H(1, 1));
  cc /= static_cast<double>(n);
  CHECK(std::abs(cc) / std::sqrt(profile(0, 0) * profile(1, 1)) < 0.05);
}

TEST_CASE("split generators are order-independent") {
  Rng a = Rng::split(5, 3);
  // consume another stream first; stream 3 must be unaffected
  Rng other = Rng::split(5, 2);
  (void)other.normal();
  Rng b = Rng::split(5, 3);
  for (int i = 0; i < 10; ++i) CHECK(a.normal() == b.normal());
}
