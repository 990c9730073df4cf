#pragma once

// Multiple-access strategies realized as restrictions of the generalized
// rate-splitting stream space: stream layouts plus allocation masks for
// generalized RS, 1-layer RS, multi-user linear precoding, SC-SIC and
// SC-SIC per group.

#include <numeric>
#include <variant>

#include "rsma/rate_engine.hpp"
#include "rsma/streams.hpp"

namespace rsma {

struct GeneralizedRS {};
struct OneLayerRS {};
struct MULP {};
struct SCSIC {
  std::vector<int> order;  // permutation of {1..K}; order[0] decoded first
};
struct SCSICPerGroup {
  // each group lists its users in intra-group decode order
  std::vector<std::vector<int>> groups;
};

using SchemeKind = std::variant<GeneralizedRS, OneLayerRS, MULP, SCSIC, SCSICPerGroup>;

namespace detail {

inline void check_permutation(const std::vector<int>& order, int K, const char* what) {
  std::vector<int> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> expect(K);
  std::iota(expect.begin(), expect.end(), 1);
  if (sorted != expect) throw std::invalid_argument(std::string(what) + ": not a permutation of {1..K}");
}

// Nested streams of one SC-SIC chain: {o_i,...,o_n} for i = 1..n, each
// carrying the whole message of user o_i.
inline void append_scsic_chain(const std::vector<int>& chain, std::vector<UserSet>& streams,
                               std::vector<std::pair<UserSet, int>>& carriers) {
  for (size_t i = 0; i < chain.size(); ++i) {
    std::vector<int> tail(chain.begin() + static_cast<long>(i), chain.end());
    UserSet s(tail);
    streams.push_back(s);
    carriers.emplace_back(s, chain[i]);
  }
}

}  // namespace detail

/// Build the stream layout realizing one strategy for K users.
inline StreamLayout build_scheme(const SchemeKind& kind, int K) {
  if (K < 1) throw std::invalid_argument("build_scheme: K must be >= 1");
  return std::visit(
      [K](const auto& s) -> StreamLayout {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GeneralizedRS>) {
          return full_layout(K);
        } else if constexpr (std::is_same_v<T, OneLayerRS>) {
          auto streams = enumerate_streams(
              K, [K](const UserSet& a) { return a.order() == K || a.order() == 1; });
          return make_layout(K, std::move(streams));
        } else if constexpr (std::is_same_v<T, MULP>) {
          auto streams =
              enumerate_streams(K, [](const UserSet& a) { return a.order() == 1; });
          return make_layout(K, std::move(streams));
        } else if constexpr (std::is_same_v<T, SCSIC>) {
          detail::check_permutation(s.order, K, "SCSIC");
          std::vector<UserSet> streams;
          std::vector<std::pair<UserSet, int>> carriers;
          detail::append_scsic_chain(s.order, streams, carriers);
          StreamLayout layout = make_layout(K, streams);
          // each user's entire message rides its own nested stream
          layout.allocation_mask.assign(layout.num_streams(), {});
          for (const auto& [stream, user] : carriers) {
            const int idx = layout.stream_index(stream);
            if (stream.order() >= 2) layout.allocation_mask[idx] = {user};
          }
          layout.validate();
          return layout;
        } else {
          std::vector<int> all;
          for (const auto& g : s.groups) all.insert(all.end(), g.begin(), g.end());
          detail::check_permutation(all, K, "SCSICPerGroup");
          std::vector<UserSet> streams;
          std::vector<std::pair<UserSet, int>> carriers;
          for (const auto& g : s.groups) {
            if (g.empty()) throw std::invalid_argument("SCSICPerGroup: empty group");
            detail::append_scsic_chain(g, streams, carriers);
          }
          StreamLayout layout = make_layout(K, streams);
          layout.allocation_mask.assign(layout.num_streams(), {});
          for (const auto& [stream, user] : carriers) {
            const int idx = layout.stream_index(stream);
            if (stream.order() >= 2) layout.allocation_mask[idx] = {user};
          }
          layout.validate();
          return layout;
        }
      },
      kind);
}

/// Embed a restricted layout's precoders and allocation into the full
/// 2^K - 1 stream space with zero columns for the absent streams. The full
/// layout's decoding orders keep the relative order of the active streams.
struct EmbeddedSolution {
  StreamLayout layout;
  PrecoderSet precoders;
  CommonRateAllocation allocation;
};

inline EmbeddedSolution embed_in_full(const StreamLayout& restricted,
                                      const PrecoderSet& precoders,
                                      const CommonRateAllocation& allocation, int M) {
  const int K = restricted.num_users;
  StreamLayout full = full_layout(K);
  // place the restricted scheme's active streams first within each pi_l,
  // keeping their relative order; zero-power streams follow in canonical order
  for (int l = 1; l <= K; ++l) {
    std::vector<int> pi;
    for (int ridx : restricted.decoding_orders[l - 1])
      pi.push_back(full.stream_index(restricted.streams[ridx]));
    for (int fidx : full.decoding_orders[l - 1])
      if (std::find(pi.begin(), pi.end(), fidx) == pi.end()) pi.push_back(fidx);
    full.decoding_orders[l - 1] = pi;
  }
  full.validate();

  EmbeddedSolution out;
  out.precoders = PrecoderSet::zero(M, full.num_streams());
  out.allocation = CommonRateAllocation::zero(full);
  for (int r = 0; r < restricted.num_streams(); ++r) {
    const int f = full.stream_index(restricted.streams[r]);
    out.precoders.P.col(f) = precoders.P.col(r);
    out.allocation.shares.row(f) = allocation.shares.row(r);
  }
  out.layout = std::move(full);
  return out;
}

/// Validate the reduction claim: the restricted solution, zero-padded into
/// the full stream space, stays feasible and reproduces the same WSR.
inline bool reduction_check(const ProblemInstance& instance, const StreamLayout& restricted,
                            const PrecoderSet& precoders,
                            const CommonRateAllocation& allocation,
                            const ChannelState& channel, double tol = 1e-9) {
  const auto emb = embed_in_full(restricted, precoders, allocation, instance.num_bs);
  for (int m = 0; m < instance.num_bs; ++m)
    if (emb.precoders.per_bs_power()(m) > instance.per_bs_power(m) + 1e-8) return false;
  try {
    const double w_restricted =
        evaluate(instance, restricted, precoders, channel, allocation).wsr;
    const double w_full =
        evaluate(instance, emb.layout, emb.precoders, channel, emb.allocation).wsr;
    return std::abs(w_restricted - w_full) <= tol;
  } catch (const std::invalid_argument&) {
    return false;
  }
}

/// All K! SC-SIC decoding orders (K <= 4).
inline std::vector<std::vector<int>> all_user_orders(int K) {
  if (K > 4) throw std::invalid_argument("all_user_orders: K > 4 not supported");
  std::vector<int> order(K);
  std::iota(order.begin(), order.end(), 1);
  std::vector<std::vector<int>> out;
  do {
    out.push_back(order);
  } while (std::next_permutation(order.begin(), order.end()));
  return out;
}

}  // namespace rsma
