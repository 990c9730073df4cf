#pragma once

// Core domain types for multi-cell rate-splitting transmission: problem
// instances, user-subset streams, stream layouts with per-order decoding
// orders, and precoder sets.

#include <Eigen/Dense>
#include <algorithm>
#include <complex>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace rsma {

using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

/// Weighted sum-rate problem data for M cooperating single-antenna base
/// stations serving K single-antenna users.
struct ProblemInstance {
  int num_bs = 0;            // M
  int num_users = 0;         // K
  Vec per_bs_power;          // P_m, Watt
  Vec qos;                   // R_k^th, bit/s/Hz
  Vec weights;               // u_k
  Vec noise_variance;        // sigma^2_{n,k}, normalized to 1 by default

  static ProblemInstance make(int M, int K, const Vec& power, const Vec& qos,
                              const Vec& weights) {
    ProblemInstance p;
    p.num_bs = M;
    p.num_users = K;
    p.per_bs_power = power;
    p.qos = qos;
    p.weights = weights;
    p.noise_variance = Vec::Ones(K);
    p.validate();
    return p;
  }

  void validate() const {
    if (num_bs < 1 || num_users < 1)
      throw std::invalid_argument("ProblemInstance: M and K must be >= 1");
    if (per_bs_power.size() != num_bs || qos.size() != num_users ||
        weights.size() != num_users || noise_variance.size() != num_users)
      throw std::invalid_argument("ProblemInstance: dimension mismatch");
    if ((per_bs_power.array() <= 0.0).any())
      throw std::invalid_argument("ProblemInstance: all P_m must be > 0");
    if ((qos.array() < 0.0).any())
      throw std::invalid_argument("ProblemInstance: QoS thresholds must be >= 0");
    if ((weights.array() <= 0.0).any())
      throw std::invalid_argument("ProblemInstance: weights must be > 0");
  }

  double total_power() const { return per_bs_power.sum(); }
};

/// A nonempty subset of users {1..K}, canonicalized to ascending order.
/// Streams are identified with the user set that decodes them.
struct UserSet {
  std::vector<int> members;  // sorted ascending, 1-based user ids

  UserSet() = default;
  explicit UserSet(std::vector<int> users) : members(std::move(users)) {
    if (members.empty())
      throw std::invalid_argument("UserSet: must be nonempty");
    std::sort(members.begin(), members.end());
    if (std::adjacent_find(members.begin(), members.end()) != members.end())
      throw std::invalid_argument("UserSet: duplicate user id");
  }

  int order() const { return static_cast<int>(members.size()); }

  bool contains(int user) const {
    return std::binary_search(members.begin(), members.end(), user);
  }

  bool operator==(const UserSet& o) const { return members == o.members; }
  bool operator!=(const UserSet& o) const { return members != o.members; }

  std::string label() const {
    std::string s = "{";
    for (size_t i = 0; i < members.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(members[i]);
    }
    return s + "}";
  }
};

/// Descending stream order, then lexicographic members. The canonical
/// ordering used for stream enumeration and default decoding orders.
inline bool stream_less(const UserSet& a, const UserSet& b) {
  if (a.order() != b.order()) return a.order() > b.order();
  return a.members < b.members;
}

using StreamFilter = std::function<bool(const UserSet&)>;

/// All nonempty subsets of {1..K} passing the filter, sorted by descending
/// order then lexicographically. The default filter passes everything
/// (full rate-splitting: 2^K - 1 streams).
inline std::vector<UserSet> enumerate_streams(int K,
                                              const StreamFilter& filter = {}) {
  if (K < 1) throw std::invalid_argument("enumerate_streams: K must be >= 1");
  std::vector<UserSet> out;
  for (unsigned mask = 1; mask < (1u << K); ++mask) {
    std::vector<int> users;
    for (int k = 1; k <= K; ++k)
      if (mask & (1u << (k - 1))) users.push_back(k);
    UserSet s(std::move(users));
    if (!filter || filter(s)) out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end(), stream_less);
  return out;
}

/// Active streams plus per-order decoding orders pi_l and the allocation
/// mask saying which (stream, user) pairs may carry a nonzero rate share.
struct StreamLayout {
  int num_users = 0;
  std::vector<UserSet> streams;
  // decoding_orders[l-1]: stream indices of the active l-order streams,
  // in decode order (a permutation of exactly those streams).
  std::vector<std::vector<int>> decoding_orders;
  // allocation_mask[s]: users of streams[s] with an enabled share C_k^A.
  // Always empty for 1-order streams (they carry no shared rate).
  std::vector<std::vector<int>> allocation_mask;

  int num_streams() const { return static_cast<int>(streams.size()); }

  int stream_index(const UserSet& s) const {
    for (int i = 0; i < num_streams(); ++i)
      if (streams[i] == s) return i;
    return -1;
  }

  bool allocation_enabled(int stream, int user) const {
    const auto& m = allocation_mask[stream];
    return std::find(m.begin(), m.end(), user) != m.end();
  }

  void validate() const {
    if (num_users < 1) throw std::invalid_argument("StreamLayout: K must be >= 1");
    for (int i = 0; i < num_streams(); ++i)
      for (int j = i + 1; j < num_streams(); ++j)
        if (streams[i] == streams[j])
          throw std::invalid_argument("StreamLayout: duplicate stream");
    if (static_cast<int>(decoding_orders.size()) != num_users ||
        static_cast<int>(allocation_mask.size()) != num_streams())
      throw std::invalid_argument("StreamLayout: dimension mismatch");
    for (int l = 1; l <= num_users; ++l) {
      std::vector<int> active;
      for (int i = 0; i < num_streams(); ++i)
        if (streams[i].order() == l) active.push_back(i);
      std::vector<int> pi = decoding_orders[l - 1];
      std::sort(pi.begin(), pi.end());
      if (pi != active)
        throw std::invalid_argument(
            "StreamLayout: pi_" + std::to_string(l) +
            " is not a permutation of the active l-order streams");
    }
    for (int i = 0; i < num_streams(); ++i) {
      for (int u : allocation_mask[i])
        if (!streams[i].contains(u))
          throw std::invalid_argument("StreamLayout: allocation user not in stream");
      if (streams[i].order() == 1 && !allocation_mask[i].empty())
        throw std::invalid_argument("StreamLayout: 1-order stream carries no shares");
      if (streams[i].order() >= 2 && allocation_mask[i].empty())
        throw std::invalid_argument(
            "StreamLayout: multi-user stream needs an allocation-enabled user");
    }
  }
};

/// Build a layout from a stream list with canonical decoding orders
/// (pi_l = canonical enumeration order within each l) and, by default,
/// all shares enabled on multi-user streams.
inline StreamLayout make_layout(int K, std::vector<UserSet> streams,
                                std::vector<std::vector<int>> allocation_mask = {}) {
  StreamLayout layout;
  layout.num_users = K;
  const bool with_mask = !allocation_mask.empty();
  if (with_mask && allocation_mask.size() != streams.size())
    throw std::invalid_argument("make_layout: allocation mask length mismatch");
  // sort streams (and the parallel mask) into canonical order
  std::vector<size_t> perm(streams.size());
  std::iota(perm.begin(), perm.end(), size_t{0});
  std::sort(perm.begin(), perm.end(),
            [&](size_t a, size_t b) { return stream_less(streams[a], streams[b]); });
  layout.streams.reserve(streams.size());
  layout.allocation_mask.resize(streams.size());
  for (size_t i = 0; i < perm.size(); ++i) {
    layout.streams.push_back(std::move(streams[perm[i]]));
    if (with_mask) layout.allocation_mask[i] = std::move(allocation_mask[perm[i]]);
  }
  layout.decoding_orders.assign(K, {});
  for (int i = 0; i < layout.num_streams(); ++i)
    layout.decoding_orders[layout.streams[i].order() - 1].push_back(i);
  if (!with_mask) {
    for (int i = 0; i < layout.num_streams(); ++i)
      if (layout.streams[i].order() >= 2)
        layout.allocation_mask[i] = layout.streams[i].members;
  }
  layout.validate();
  return layout;
}

/// Full generalized rate-splitting layout: all 2^K - 1 streams.
inline StreamLayout full_layout(int K) {
  return make_layout(K, enumerate_streams(K));
}

/// The streams user k decodes, in SIC order: grouped by stream order
/// descending, each group following pi_l. The last entry is the private
/// stream when present.
inline std::vector<int> decode_sequence(int user, const StreamLayout& layout) {
  if (user < 1 || user > layout.num_users)
    throw std::invalid_argument("decode_sequence: unknown user id");
  std::vector<int> seq;
  for (int l = layout.num_users; l >= 1; --l)
    for (int idx : layout.decoding_orders[l - 1])
      if (layout.streams[idx].contains(user)) seq.push_back(idx);
  return seq;
}

inline std::vector<UserSet> streams_for_user(int user, const StreamLayout& layout) {
  std::vector<UserSet> out;
  for (int idx : decode_sequence(user, layout)) out.push_back(layout.streams[idx]);
  return out;
}

/// All permutations of the active l-order streams (as index lists).
/// Factorial growth: rejected beyond 4 streams per order.
inline std::vector<std::vector<int>> enumerate_decoding_orders(
    const StreamLayout& layout, int l) {
  if (l < 1 || l > layout.num_users)
    throw std::invalid_argument("enumerate_decoding_orders: order out of range");
  std::vector<int> active;
  for (int i = 0; i < layout.num_streams(); ++i)
    if (layout.streams[i].order() == l) active.push_back(i);
  if (active.empty()) return {};
  if (active.size() > 4)
    throw std::invalid_argument(
        "enumerate_decoding_orders: more than 4 same-order streams");
  std::sort(active.begin(), active.end());
  std::vector<std::vector<int>> out;
  do {
    out.push_back(active);
  } while (std::next_permutation(active.begin(), active.end()));
  return out;
}

/// One complex M-vector per active stream; column s of `P` precodes
/// layout.streams[s].
struct PrecoderSet {
  CMat P;  // M x num_streams

  static PrecoderSet zero(int M, int num_streams) {
    PrecoderSet p;
    p.P = CMat::Zero(M, num_streams);
    return p;
  }

  int num_bs() const { return static_cast<int>(P.rows()); }
  int num_streams() const { return static_cast<int>(P.cols()); }

  /// [P P^H]_{m,m} for each base station.
  Vec per_bs_power() const {
    return P.cwiseAbs2().rowwise().sum();
  }
};

}  // namespace rsma
