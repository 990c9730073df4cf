#include <catch2/catch_amalgamated.hpp>

#include "rsma/schemes.hpp"
#include "rsma/wmmse.hpp"

using namespace rsma;
using Catch::Approx;

namespace {

ChannelState random_channel(int K, int M, uint64_t seed) {
  Rng rng(seed);
  return draw_from_profile(Eigen::MatrixXd::Ones(K, M), rng);
}

}  // namespace

TEST_CASE("stream counts per scheme") {
  for (int K : {1, 2, 3, 4}) {
    CHECK(build_scheme(GeneralizedRS{}, K).num_streams() == (1 << K) - 1);
    CHECK(build_scheme(MULP{}, K).num_streams() == K);
    CHECK(build_scheme(OneLayerRS{}, K).num_streams() == (K == 1 ? 1 : K + 1));
    std::vector<int> order(K);
    std::iota(order.begin(), order.end(), 1);
    CHECK(build_scheme(SCSIC{order}, K).num_streams() == K);
  }
}

TEST_CASE("SC-SIC layout for K=3, order 1->2->3") {
  const auto layout = build_scheme(SCSIC{{1, 2, 3}}, 3);
  REQUIRE(layout.num_streams() == 3);
  CHECK(layout.streams[0] == UserSet({1, 2, 3}));
  CHECK(layout.streams[1] == UserSet({2, 3}));
  CHECK(layout.streams[2] == UserSet({3}));
  // each nested stream carries exactly the first user of its tail
  CHECK(layout.allocation_mask[0] == std::vector<int>{1});
  CHECK(layout.allocation_mask[1] == std::vector<int>{2});
  CHECK(layout.allocation_mask[2].empty());  // order-1 streams carry no share
  // user 3 decodes everything, user 1 only the top stream
  CHECK(decode_sequence(3, layout) == std::vector<int>{0, 1, 2});
  CHECK(decode_sequence(1, layout) == std::vector<int>{0});
}

TEST_CASE("SC-SIC layout depends on the order") {
  const auto layout = build_scheme(SCSIC{{3, 1, 2}}, 3);
  CHECK(layout.streams[0] == UserSet({1, 2, 3}));
  CHECK(layout.streams[1] == UserSet({1, 2}));
  CHECK(layout.streams[2] == UserSet({2}));
  CHECK(layout.allocation_mask[0] == std::vector<int>{3});
  CHECK(layout.allocation_mask[1] == std::vector<int>{1});
  CHECK_THROWS_AS(build_scheme(SCSIC{{1, 1, 2}}, 3), std::invalid_argument);
  CHECK_THROWS_AS(build_scheme(SCSIC{{1, 2}}, 3), std::invalid_argument);
}

TEST_CASE("SC-SIC per group for K=3, groups {1},{2,3}") {
  const auto layout = build_scheme(SCSICPerGroup{{{1}, {2, 3}}}, 3);
  REQUIRE(layout.num_streams() == 3);
  CHECK(layout.streams[0] == UserSet({2, 3}));
  CHECK(layout.streams[1] == UserSet({1}));
  CHECK(layout.streams[2] == UserSet({3}));
  CHECK(layout.allocation_mask[0] == std::vector<int>{2});
  // user 1's single stream is interference-free of its own group only
  CHECK(decode_sequence(1, layout) == std::vector<int>{1});
  CHECK(decode_sequence(3, layout) == std::vector<int>{0, 2});
  CHECK_THROWS_AS(build_scheme(SCSICPerGroup{{{1}, {2}}}, 3), std::invalid_argument);
  CHECK_THROWS_AS(build_scheme(SCSICPerGroup{{{1}, {}, {2, 3}}}, 3),
                  std::invalid_argument);
}

TEST_CASE("MU-LP and 1-layer RS layouts") {
  const auto mulp = build_scheme(MULP{}, 2);
  REQUIRE(mulp.num_streams() == 2);
  CHECK(mulp.streams[0] == UserSet({1}));
  CHECK(mulp.streams[1] == UserSet({2}));
  const auto rs1 = build_scheme(OneLayerRS{}, 3);
  REQUIRE(rs1.num_streams() == 4);
  CHECK(rs1.streams[0] == UserSet({1, 2, 3}));
  CHECK(rs1.allocation_mask[0] == std::vector<int>{1, 2, 3});
}

TEST_CASE("embedding keeps relative decode order and zero-pads") {
  const auto restricted = build_scheme(SCSIC{{2, 1, 3}}, 3);
  auto p = PrecoderSet::zero(2, 3);
  p.P(0, 0) = 1.0;
  p.P(1, 1) = 2.0;
  auto alloc = CommonRateAllocation::zero(restricted);
  alloc.share(0, 2) = 0.25;
  const auto emb = embed_in_full(restricted, p, alloc, 2);

  CHECK(emb.layout.num_streams() == 7);
  const int f0 = emb.layout.stream_index(UserSet({1, 2, 3}));
  const int f1 = emb.layout.stream_index(UserSet({1, 3}));
  CHECK(emb.precoders.P(0, f0) == std::complex<double>(1.0, 0.0));
  CHECK(emb.precoders.P(1, f1) == std::complex<double>(2.0, 0.0));
  CHECK(emb.allocation.share(f0, 2) == Approx(0.25));
  // absent streams carry zero power
  const int dead = emb.layout.stream_index(UserSet({1, 2}));
  CHECK(emb.precoders.P.col(dead).norm() == 0.0);
  emb.layout.validate();
}

TEST_CASE("restricted optima reproduce their WSR inside the full space") {
  const int K = 3, M = 3;
  const auto inst = ProblemInstance::make(M, K, Vec::Constant(M, 10.0 / M),
                                          Vec::Zero(K), Vec::Ones(K));
  const auto ch = random_channel(K, M, 99);
  const std::vector<SchemeKind> kinds = {
      MULP{}, OneLayerRS{}, SCSIC{{1, 2, 3}}, SCSICPerGroup{{{1}, {2, 3}}}};
  for (const auto& kind : kinds) {
    const auto layout = build_scheme(kind, K);
    const auto sol = ao_solve(inst, layout, ch);
    REQUIRE(sol.status == ConvergeStatus::converged);
    CHECK(reduction_check(inst, layout, sol.precoders, sol.allocation, ch, 1e-9));
  }
}

TEST_CASE("all_user_orders") {
  CHECK(all_user_orders(1).size() == 1);
  CHECK(all_user_orders(3).size() == 6);
  CHECK(all_user_orders(3).front() == std::vector<int>{1, 2, 3});
  CHECK_THROWS_AS(all_user_orders(5), std::invalid_argument);
}
