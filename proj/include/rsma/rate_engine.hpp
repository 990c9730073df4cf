#pragma once

// Ground-truth rate evaluation for any precoder and stream layout:
// interference under successive cancellation, SINR, per-stream decode
// rates, shared stream rates, per-user totals and the weighted sum rate.

#include <cmath>
#include <limits>

#include "rsma/channels.hpp"
#include "rsma/streams.hpp"

namespace rsma {

// Feasibility tolerance for the shared-rate constraint sum_k C_k^A <= R_A.
inline constexpr double kAllocationTol = 1e-7;

/// Shares C_k^A >= 0 for allocation-enabled (stream, user) pairs with
/// |A| >= 2. Stored dense (num_streams x K); disabled pairs stay zero.
struct CommonRateAllocation {
  Eigen::MatrixXd shares;

  static CommonRateAllocation zero(const StreamLayout& layout) {
    CommonRateAllocation a;
    a.shares = Eigen::MatrixXd::Zero(layout.num_streams(), layout.num_users);
    return a;
  }

  double share(int stream, int user) const { return shares(stream, user - 1); }
  double& share(int stream, int user) { return shares(stream, user - 1); }
};

/// Interference power I at user k when decoding stream A (Eq.-style SIC
/// accounting): everything except already-cancelled intended streams, i.e.
/// total received power minus the decoded prefix of the user's sequence.
inline double interference(int user, int stream, const StreamLayout& layout,
                           const PrecoderSet& precoders, const ChannelState& channel) {
  if (!layout.streams[stream].contains(user))
    throw std::invalid_argument("interference: user does not decode this stream");
  const CVec hk = channel.h(user);
  double total = 0.0;
  for (int s = 0; s < layout.num_streams(); ++s)
    total += std::norm(hk.dot(precoders.P.col(s)));
  // subtract the stream itself and every intended stream decoded no later
  double cancelled = 0.0;
  for (int s : decode_sequence(user, layout)) {
    cancelled += std::norm(hk.dot(precoders.P.col(s)));
    if (s == stream) break;
  }
  return std::max(0.0, total - cancelled);
}

inline double sinr(int user, int stream, const StreamLayout& layout,
                   const PrecoderSet& precoders, const ChannelState& channel,
                   const Vec& noise_variance) {
  const CVec hk = channel.h(user);
  const double sig = std::norm(hk.dot(precoders.P.col(stream)));
  const double denom = interference(user, stream, layout, precoders, channel) +
                       noise_variance(user - 1);
  return sig / denom;
}

/// R_k^A = log2(1 + gamma).
inline double stream_rate(int user, int stream, const StreamLayout& layout,
                          const PrecoderSet& precoders, const ChannelState& channel,
                          const Vec& noise_variance) {
  return std::log2(1.0 + sinr(user, stream, layout, precoders, channel, noise_variance));
}

/// Shared rate R_A = min over decoding users of R_k^A.
inline double common_stream_rate(int stream, const StreamLayout& layout,
                                 const PrecoderSet& precoders, const ChannelState& channel,
                                 const Vec& noise_variance) {
  double r = std::numeric_limits<double>::infinity();
  for (int user : layout.streams[stream].members)
    r = std::min(r, stream_rate(user, stream, layout, precoders, channel, noise_variance));
  return r;
}

/// Per-stream decode rates, shared rates, per-user totals and WSR for one
/// (precoder, allocation) pair.
struct RateReport {
  Eigen::MatrixXd decode_rate;  // (stream, user-1); NaN when user not in A
  Vec shared_rate;              // R_A per stream
  Vec private_rate;             // R_k (0 when the singleton is absent)
  Vec user_total;               // R_{k,tot}
  double wsr = 0.0;
};

inline double user_total_rate(int user, const CommonRateAllocation& allocation,
                              const StreamLayout& layout, const PrecoderSet& precoders,
                              const ChannelState& channel, const Vec& noise_variance) {
  double total = 0.0;
  for (int s = 0; s < layout.num_streams(); ++s) {
    if (layout.streams[s].order() < 2) continue;
    const double c = allocation.shares(s, user - 1);
    if (c < -kAllocationTol)
      throw std::invalid_argument("user_total_rate: negative rate share");
    if (layout.allocation_enabled(s, user)) total += std::max(0.0, c);
  }
  const int priv = layout.stream_index(UserSet({user}));
  if (priv >= 0)
    total += stream_rate(user, priv, layout, precoders, channel, noise_variance);
  return total;
}

/// Full evaluation; throws when the allocation exceeds a shared stream rate
/// beyond tolerance.
inline RateReport evaluate(const ProblemInstance& instance, const StreamLayout& layout,
                           const PrecoderSet& precoders, const ChannelState& channel,
                           const CommonRateAllocation& allocation) {
  const int S = layout.num_streams();
  const int K = layout.num_users;
  RateReport rep;
  rep.decode_rate = Eigen::MatrixXd::Constant(S, K, std::numeric_limits<double>::quiet_NaN());
  rep.shared_rate.resize(S);
  rep.private_rate = Vec::Zero(K);
  rep.user_total = Vec::Zero(K);

  for (int s = 0; s < S; ++s) {
    double rmin = std::numeric_limits<double>::infinity();
    for (int user : layout.streams[s].members) {
      const double r = stream_rate(user, s, layout, precoders, channel,
                                   instance.noise_variance);
      rep.decode_rate(s, user - 1) = r;
      rmin = std::min(rmin, r);
    }
    rep.shared_rate(s) = rmin;
    if (layout.streams[s].order() == 1)
      rep.private_rate(layout.streams[s].members[0] - 1) = rmin;
    if (layout.streams[s].order() >= 2) {
      double allocated = 0.0;
      for (int user : layout.streams[s].members)
        allocated += std::max(0.0, allocation.shares(s, user - 1));
      if (allocated > rmin + kAllocationTol)
        throw std::invalid_argument("evaluate: allocation exceeds shared rate of " +
                                    layout.streams[s].label());
    }
  }
  for (int k = 1; k <= K; ++k) {
    rep.user_total(k - 1) = user_total_rate(k, allocation, layout, precoders, channel,
                                            instance.noise_variance);
    rep.wsr += instance.weights(k - 1) * rep.user_total(k - 1);
  }
  return rep;
}

/// Greedy allocation that is WSR-optimal for fixed precoders: each shared
/// stream's full rate goes to its heaviest-weight enabled user.
inline CommonRateAllocation greedy_allocation(const ProblemInstance& instance,
                                              const StreamLayout& layout,
                                              const PrecoderSet& precoders,
                                              const ChannelState& channel) {
  auto alloc = CommonRateAllocation::zero(layout);
  for (int s = 0; s < layout.num_streams(); ++s) {
    if (layout.streams[s].order() < 2) continue;
    int best = layout.allocation_mask[s].front();
    for (int user : layout.allocation_mask[s])
      if (instance.weights(user - 1) > instance.weights(best - 1)) best = user;
    alloc.shares(s, best - 1) = common_stream_rate(s, layout, precoders, channel,
                                                   instance.noise_variance);
  }
  return alloc;
}

inline double wsr(const ProblemInstance& instance, const StreamLayout& layout,
                  const PrecoderSet& precoders, const ChannelState& channel,
                  const CommonRateAllocation& allocation) {
  return evaluate(instance, layout, precoders, channel, allocation).wsr;
}

}  // namespace rsma
