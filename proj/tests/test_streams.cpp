#include <catch2/catch_amalgamated.hpp>

#include "rsma/streams.hpp"

using namespace rsma;

TEST_CASE("enumerate_streams full rate-splitting") {
  SECTION("K=2: all three subsets, highest order first") {
    const auto s = enumerate_streams(2);
    REQUIRE(s.size() == 3);
    CHECK(s[0] == UserSet({1, 2}));
    CHECK(s[1] == UserSet({1}));
    CHECK(s[2] == UserSet({2}));
  }
  SECTION("K=3: seven subsets") {
    const auto s = enumerate_streams(3);
    REQUIRE(s.size() == 7);
    CHECK(s.front() == UserSet({1, 2, 3}));
    CHECK(s.back() == UserSet({3}));
  }
  SECTION("1-layer filter keeps the K-order stream and the singletons") {
    const auto s = enumerate_streams(
        3, [](const UserSet& a) { return a.order() == 3 || a.order() == 1; });
    REQUIRE(s.size() == 4);
    CHECK(s[0] == UserSet({1, 2, 3}));
    CHECK(s[1] == UserSet({1}));
    CHECK(s[2] == UserSet({2}));
    CHECK(s[3] == UserSet({3}));
  }
  SECTION("K=0 rejected") {
    CHECK_THROWS_AS(enumerate_streams(0), std::invalid_argument);
  }
  SECTION("deterministic") {
    CHECK(enumerate_streams(4) == enumerate_streams(4));
  }
}

TEST_CASE("full layout counts") {
  for (int K = 1; K <= 4; ++K) {
    const auto layout = full_layout(K);
    CHECK(layout.num_streams() == (1 << K) - 1);
    for (int k = 1; k <= K; ++k)
      CHECK(streams_for_user(k, layout).size() == (1u << (K - 1)));
  }
}

TEST_CASE("streams_for_user follows the decoding orders") {
  SECTION("K=2 full layout, user 1") {
    const auto seq = streams_for_user(1, full_layout(2));
    REQUIRE(seq.size() == 2);
    CHECK(seq[0] == UserSet({1, 2}));
    CHECK(seq[1] == UserSet({1}));
  }
  SECTION("K=3 full layout with pi_2 = 12->13->23") {
    auto layout = full_layout(3);
    // canonical pi_2 already lists 12, 13, 23
    const auto seq = streams_for_user(1, layout);
    REQUIRE(seq.size() == 4);
    CHECK(seq[0] == UserSet({1, 2, 3}));
    CHECK(seq[1] == UserSet({1, 2}));
    CHECK(seq[2] == UserSet({1, 3}));
    CHECK(seq[3] == UserSet({1}));
  }
  SECTION("pi_2 reversal reorders the same-order group") {
    auto layout = full_layout(3);
    std::reverse(layout.decoding_orders[1].begin(), layout.decoding_orders[1].end());
    layout.validate();
    const auto seq = streams_for_user(1, layout);
    CHECK(seq[1] == UserSet({1, 3}));
    CHECK(seq[2] == UserSet({1, 2}));
  }
  SECTION("restricted layout: user 2 only decodes its nested stream") {
    // SC-SIC per group streams {1},{2,3},{3}
    auto layout = make_layout(3, {UserSet({1}), UserSet({2, 3}), UserSet({3})},
                              {{}, {2}, {}});
    const auto seq = streams_for_user(2, layout);
    REQUIRE(seq.size() == 1);
    CHECK(seq[0] == UserSet({2, 3}));
  }
  SECTION("unknown user rejected") {
    CHECK_THROWS_AS(streams_for_user(5, full_layout(2)), std::invalid_argument);
  }
}

TEST_CASE("enumerate_decoding_orders") {
  const auto layout = full_layout(3);
  CHECK(enumerate_decoding_orders(layout, 2).size() == 6);
  CHECK(enumerate_decoding_orders(layout, 3).size() == 1);
  CHECK(enumerate_decoding_orders(full_layout(2), 1).size() == 2);
  SECTION("empty when no stream of that order is active") {
    const auto mulp = make_layout(2, {UserSet({1}), UserSet({2})});
    CHECK(enumerate_decoding_orders(mulp, 2).empty());
  }
  SECTION("factorial blowup rejected") {
    CHECK_THROWS_AS(enumerate_decoding_orders(full_layout(5), 2),
                    std::invalid_argument);
  }
}

TEST_CASE("layout validation") {
  CHECK_THROWS_AS(UserSet(std::vector<int>{}), std::invalid_argument);
  CHECK_THROWS_AS(UserSet({1, 1}), std::invalid_argument);
  SECTION("duplicate streams rejected") {
    CHECK_THROWS_AS(make_layout(2, {UserSet({1}), UserSet({1})}),
                    std::invalid_argument);
  }
  SECTION("multi-user stream without enabled share rejected") {
    CHECK_THROWS_AS(make_layout(2, {UserSet({1, 2})}, {{}}), std::invalid_argument);
  }
}
