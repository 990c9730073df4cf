#include <catch2/catch_amalgamated.hpp>

#include "rsma/rate_engine.hpp"

using namespace rsma;
using Catch::Approx;

namespace {

ChannelState channel_from(const CMat& H) {
  ChannelState ch;
  ch.H = H;
  ch.variance = Eigen::MatrixXd::Ones(H.rows(), H.cols());
  return ch;
}

// K=2 hand instance: streams {12},{1},{2}, h1=[1,0], h2=[0,1]
struct HandInstance {
  StreamLayout layout = full_layout(2);
  ChannelState channel;
  PrecoderSet precoders;
  Vec noise = Vec::Ones(2);

  HandInstance() {
    CMat H(2, 2);
    H << 1.0, 0.0, 0.0, 1.0;
    channel = channel_from(H);
    precoders = PrecoderSet::zero(2, 3);
    precoders.P.col(0) << 1.0, 0.0;   // p_12
    precoders.P.col(1) << 0.5, 0.0;   // p_1
    precoders.P.col(2) << 0.0, 1.0;   // p_2
  }
};

ChannelState random_channel(int K, int M, uint64_t seed) {
  Rng rng(seed);
  return draw_from_profile(Eigen::MatrixXd::Ones(K, M), rng);
}

PrecoderSet random_precoders(int M, int S, uint64_t seed) {
  Rng rng(seed);
  PrecoderSet p = PrecoderSet::zero(M, S);
  for (int s = 0; s < S; ++s)
    for (int m = 0; m < M; ++m) p.P(m, s) = sample_complex_gaussian(1.0, rng);
  return p;
}

}  // namespace

TEST_CASE("interference under SIC") {
  HandInstance hi;
  SECTION("decoding the common stream sees both lower streams") {
    // only p_1 interferes with weight 0.25; p_2 is orthogonal to h_1
    CHECK(interference(1, 0, hi.layout, hi.precoders, hi.channel) == Approx(0.25));
  }
  SECTION("after SIC the private stream sees nothing") {
    CHECK(interference(1, 1, hi.layout, hi.precoders, hi.channel) == Approx(0.0));
  }
  SECTION("all-zero precoders give zero interference") {
    const auto zero = PrecoderSet::zero(2, 3);
    CHECK(interference(1, 0, hi.layout, zero, hi.channel) == 0.0);
  }
  SECTION("non-member decode rejected") {
    CHECK_THROWS_AS(interference(2, 1, hi.layout, hi.precoders, hi.channel),
                    std::invalid_argument);
  }
}

TEST_CASE("sinr") {
  HandInstance hi;
  SECTION("interference-free unit channel") {
    auto p = PrecoderSet::zero(2, 3);
    p.P.col(0) << 1.0, 0.0;
    CHECK(sinr(1, 0, hi.layout, p, hi.channel, hi.noise) == Approx(1.0));
  }
  SECTION("hand instance common stream at user 1") {
    CHECK(sinr(1, 0, hi.layout, hi.precoders, hi.channel, hi.noise) == Approx(0.8));
  }
  SECTION("zero precoder") {
    auto p = hi.precoders;
    p.P.col(0).setZero();
    CHECK(sinr(1, 0, hi.layout, p, hi.channel, hi.noise) == 0.0);
  }
}

TEST_CASE("stream rates") {
  HandInstance hi;
  auto p = PrecoderSet::zero(2, 3);
  p.P.col(0) << 1.0, 0.0;
  CHECK(stream_rate(1, 0, hi.layout, p, hi.channel, hi.noise) == Approx(1.0));
  CHECK(stream_rate(1, 0, hi.layout, hi.precoders, hi.channel, hi.noise) ==
        Approx(std::log2(1.8)).epsilon(1e-12));
  p.P.col(0).setZero();
  CHECK(stream_rate(1, 0, hi.layout, p, hi.channel, hi.noise) == 0.0);
}

TEST_CASE("common stream rate is the decoding minimum") {
  SECTION("explicit minimum") {
    HandInstance hi;
    const double r1 = stream_rate(1, 0, hi.layout, hi.precoders, hi.channel, hi.noise);
    const double r2 = stream_rate(2, 0, hi.layout, hi.precoders, hi.channel, hi.noise);
    CHECK(common_stream_rate(0, hi.layout, hi.precoders, hi.channel, hi.noise) ==
          Approx(std::min(r1, r2)));
  }
  SECTION("symmetric users share the same decode rate") {
    CMat H(2, 2);
    H << 1.0, 0.5, 1.0, 0.5;
    const auto ch = channel_from(H);
    const auto layout = full_layout(2);
    auto p = PrecoderSet::zero(2, 3);
    p.P.col(0) << 1.0, 1.0;
    const Vec noise = Vec::Ones(2);
    CHECK(stream_rate(1, 0, layout, p, ch, noise) ==
          Approx(stream_rate(2, 0, layout, p, ch, noise)));
  }
  SECTION("random K=3 instance matches a recomputation oracle") {
    const auto layout = full_layout(3);
    const auto ch = random_channel(3, 3, 11);
    const auto p = random_precoders(3, 7, 12);
    const Vec noise = Vec::Ones(3);
    for (int s = 0; s < layout.num_streams(); ++s) {
      double expect = std::numeric_limits<double>::infinity();
      for (int k : layout.streams[s].members) {
        // independent recomputation straight from the SIC definition
        const CVec hk = ch.h(k);
        double interf = 0.0;
        bool after = false;
        for (int b = 0; b < layout.num_streams(); ++b) {
          if (b == s) continue;
          if (!layout.streams[b].contains(k)) {
            interf += std::norm(hk.dot(p.P.col(b)));
            continue;
          }
          // intended stream: interferes iff decoded after s
          const auto seq = decode_sequence(k, layout);
          const auto pos_s = std::find(seq.begin(), seq.end(), s);
          const auto pos_b = std::find(seq.begin(), seq.end(), b);
          if (pos_b > pos_s) interf += std::norm(hk.dot(p.P.col(b)));
        }
        const double gamma = std::norm(hk.dot(p.P.col(s))) / (interf + 1.0);
        expect = std::min(expect, std::log2(1.0 + gamma));
      }
      CHECK(common_stream_rate(s, layout, p, ch, noise) ==
            Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("user totals and weighted sum rate") {
  HandInstance hi;
  const auto inst = ProblemInstance::make(2, 2, Vec::Constant(2, 10.0), Vec::Zero(2),
                                          Vec::Ones(2));
  SECTION("zero common allocation leaves the private rate") {
    const auto alloc = CommonRateAllocation::zero(hi.layout);
    const auto rep = evaluate(inst, hi.layout, hi.precoders, hi.channel, alloc);
    CHECK(rep.user_total(0) == Approx(rep.private_rate(0)));
  }
  SECTION("full share to user 1") {
    auto alloc = CommonRateAllocation::zero(hi.layout);
    const double r12 =
        common_stream_rate(0, hi.layout, hi.precoders, hi.channel, hi.noise);
    alloc.share(0, 1) = r12;
    const auto rep = evaluate(inst, hi.layout, hi.precoders, hi.channel, alloc);
    CHECK(rep.user_total(0) == Approx(r12 + rep.private_rate(0)));
    CHECK(rep.user_total(1) == Approx(rep.private_rate(1)));
  }
  SECTION("unit weights make WSR the plain sum") {
    const auto alloc = greedy_allocation(inst, hi.layout, hi.precoders, hi.channel);
    const auto rep = evaluate(inst, hi.layout, hi.precoders, hi.channel, alloc);
    CHECK(rep.wsr == Approx(rep.user_total.sum()));
  }
  SECTION("over-allocation rejected") {
    auto alloc = CommonRateAllocation::zero(hi.layout);
    alloc.share(0, 1) = 100.0;
    CHECK_THROWS_AS(evaluate(inst, hi.layout, hi.precoders, hi.channel, alloc),
                    std::invalid_argument);
  }
}

TEST_CASE("global phase invariance") {
  const auto layout = full_layout(3);
  const auto ch = random_channel(3, 3, 21);
  auto p = random_precoders(3, 7, 22);
  const Vec noise = Vec::Ones(3);
  const double before = common_stream_rate(0, layout, p, ch, noise);
  const double ib = interference(2, 3, layout, p, ch);
  p.P.col(0) *= std::polar(1.0, 1.234);
  p.P.col(3) *= std::polar(1.0, -2.1);
  CHECK(common_stream_rate(0, layout, p, ch, noise) == Approx(before).epsilon(1e-12));
  CHECK(interference(2, 3, layout, p, ch) == Approx(ib).epsilon(1e-12));
}

TEST_CASE("scaling a non-intended stream only hurts") {
  const auto layout = full_layout(2);
  const auto ch = random_channel(2, 2, 31);
  auto p = random_precoders(2, 3, 32);
  const Vec noise = Vec::Ones(2);
  const double before = sinr(1, 1, layout, p, ch, noise);
  p.P.col(2) *= 2.0;  // user 2's private stream
  CHECK(sinr(1, 1, layout, p, ch, noise) < before);
}

TEST_CASE("zeroed common streams reduce to linear precoding") {
  const int K = 3, M = 3;
  const auto layout = full_layout(K);
  const auto ch = random_channel(K, M, 41);
  auto p = random_precoders(M, layout.num_streams(), 42);
  for (int s = 0; s < layout.num_streams(); ++s)
    if (layout.streams[s].order() >= 2) p.P.col(s).setZero();
  const auto inst =
      ProblemInstance::make(M, K, Vec::Constant(M, 10.0), Vec::Zero(K), Vec::Ones(K));
  const auto rep =
      evaluate(inst, layout, p, ch, CommonRateAllocation::zero(layout));
  for (int k = 1; k <= K; ++k) {
    // standalone MU-LP formula: all other private streams are noise
    const CVec hk = ch.h(k);
    double interf = 0.0;
    for (int j = 1; j <= K; ++j)
      if (j != k)
        interf += std::norm(hk.dot(p.P.col(layout.stream_index(UserSet({j})))));
    const double gamma =
        std::norm(hk.dot(p.P.col(layout.stream_index(UserSet({k}))))) / (interf + 1.0);
    CHECK(rep.user_total(k - 1) == Approx(std::log2(1.0 + gamma)).epsilon(1e-12));
  }
}

TEST_CASE("moving a stream later in pi never helps earlier decodes") {
  const auto ch = random_channel(3, 3, 51);
  const auto p = random_precoders(3, 7, 52);
  auto layout = full_layout(3);
  const double i_first = interference(1, 1, layout, p, ch);  // {1,2} decoded first in pi_2
  std::swap(layout.decoding_orders[1][0], layout.decoding_orders[1][1]);
  layout.validate();
  const double i_later = interference(1, 1, layout, p, ch);
  CHECK(i_later <= i_first + 1e-12);
}
