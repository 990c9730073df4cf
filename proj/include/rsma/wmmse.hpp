#pragma once

// WMMSE reformulation of the weighted-sum-rate problem and the
// alternating-optimization driver: closed-form MMSE equalizer/weight
// updates, assembly of the convex inner subproblem in (x, P), and the
// outer loop with QoS feasibility handling.

#include <algorithm>
#include <optional>

#include "rsma/rate_engine.hpp"
#include "rsma/socp.hpp"

namespace rsma {

/// Streams whose power enters T_k^A when user k decodes stream A: the
/// stream itself plus everything not yet cancelled.
inline std::vector<int> coupled_streams(int user, int stream, const StreamLayout& layout) {
  std::vector<int> decoded_before;
  for (int s : decode_sequence(user, layout)) {
    if (s == stream) break;
    decoded_before.push_back(s);
  }
  std::vector<int> out;
  for (int s = 0; s < layout.num_streams(); ++s)
    if (std::find(decoded_before.begin(), decoded_before.end(), s) == decoded_before.end())
      out.push_back(s);
  return out;
}

inline double effective_power_T(int user, int stream, const StreamLayout& layout,
                                const PrecoderSet& precoders, const ChannelState& channel,
                                const Vec& noise_variance) {
  const CVec hk = channel.h(user);
  return std::norm(hk.dot(precoders.P.col(stream))) +
         interference(user, stream, layout, precoders, channel) +
         noise_variance(user - 1);
}

/// g^MMSE = p_A^H h_k / T_k^A.
inline std::complex<double> mmse_equalizer(int user, int stream, const StreamLayout& layout,
                                           const PrecoderSet& precoders,
                                           const ChannelState& channel,
                                           const Vec& noise_variance) {
  const CVec hk = channel.h(user);
  const double T = effective_power_T(user, stream, layout, precoders, channel, noise_variance);
  return std::conj(hk.dot(precoders.P.col(stream))) / T;
}

/// w^MMSE = T / (T - |h^H p|^2) >= 1; equals 1 + SINR.
inline double mmse_weight(int user, int stream, const StreamLayout& layout,
                          const PrecoderSet& precoders, const ChannelState& channel,
                          const Vec& noise_variance) {
  const CVec hk = channel.h(user);
  const double T = effective_power_T(user, stream, layout, precoders, channel, noise_variance);
  return T / (T - std::norm(hk.dot(precoders.P.col(stream))));
}

/// Augmented weighted MSE xi = w*eps - log2(w) with
/// eps = |g|^2 T - 2 Re{g h^H p} + 1.
inline double augmented_wmse(int user, int stream, std::complex<double> g, double w,
                             const StreamLayout& layout, const PrecoderSet& precoders,
                             const ChannelState& channel, const Vec& noise_variance) {
  if (w <= 0.0) throw std::domain_error("augmented_wmse: weight must be positive");
  const CVec hk = channel.h(user);
  const double T = effective_power_T(user, stream, layout, precoders, channel, noise_variance);
  const double eps = std::norm(g) * T -
                     2.0 * std::real(g * hk.dot(precoders.P.col(stream))) + 1.0;
  return w * eps - std::log2(w);
}

/// Equalizers and weights for every decode pair plus the current precoders
/// and trace; the matrices are indexed (stream, user-1) and only entries
/// with user in the stream are meaningful.
struct WmmseState {
  Eigen::MatrixXcd g;
  Eigen::MatrixXd w;
  PrecoderSet precoders;
  int iteration = 0;
  std::vector<double> wsr_trace;
};

inline WmmseState mmse_update(const ProblemInstance& instance, const StreamLayout& layout,
                              const PrecoderSet& precoders, const ChannelState& channel) {
  WmmseState st;
  st.precoders = precoders;
  st.g = Eigen::MatrixXcd::Zero(layout.num_streams(), layout.num_users);
  st.w = Eigen::MatrixXd::Ones(layout.num_streams(), layout.num_users);
  for (int s = 0; s < layout.num_streams(); ++s)
    for (int user : layout.streams[s].members) {
      st.g(s, user - 1) = mmse_equalizer(user, s, layout, precoders, channel,
                                         instance.noise_variance);
      st.w(s, user - 1) = mmse_weight(user, s, layout, precoders, channel,
                                      instance.noise_variance);
    }
  return st;
}

/// Variable layout of the inner subproblem: stacked Re/Im precoder parts,
/// then the negated common-rate shares x, then per-user WMSE epigraph
/// variables, then (feasibility phase only) one QoS slack.
struct SubproblemMap {
  int num_bs = 0;
  int num_streams = 0;
  int n = 0;
  std::vector<std::vector<int>> x_index;  // [stream], parallel to allocation_mask
  std::vector<int> t_index;               // [user-1], -1 when no private stream
  int slack_index = -1;
  double objective_offset = 0.0;  // constant WMSE of users without a private stream

  int precoder_offset(int stream) const { return 2 * num_bs * stream; }

  PrecoderSet extract_precoders(const Vec& z) const {
    PrecoderSet p = PrecoderSet::zero(num_bs, num_streams);
    for (int s = 0; s < num_streams; ++s)
      for (int m = 0; m < num_bs; ++m)
        p.P(m, s) = {z(precoder_offset(s) + m), z(precoder_offset(s) + num_bs + m)};
    return p;
  }
};

struct Subproblem {
  socp::ConvexProgram program;
  SubproblemMap map;
};

namespace detail {

// Real/imag pick-off rows: h^H p = c1.v + i c2.v on the stream's 2M block.
inline void channel_rows(const CVec& hk, int offset, int M, Vec& c1, Vec& c2, int n) {
  c1 = Vec::Zero(n);
  c2 = Vec::Zero(n);
  for (int m = 0; m < M; ++m) {
    c1(offset + m) = hk(m).real();
    c1(offset + M + m) = hk(m).imag();
    c2(offset + m) = -hk(m).imag();
    c2(offset + M + m) = hk(m).real();
  }
}

// Quadratic constraint for xi_k^A <= rhs-linear-part: fills F and the
// precoder portion of q; returns the constant part of xi.
inline double wmse_quadratic(int user, int stream, const WmmseState& state,
                             const ProblemInstance& instance, const StreamLayout& layout,
                             const ChannelState& channel, const SubproblemMap& map,
                             socp::QuadConstraint& qc) {
  const CVec hk = channel.h(user);
  const std::complex<double> g = state.g(stream, user - 1);
  const double w = state.w(stream, user - 1);
  const double sw = std::sqrt(w);
  const auto coupled = coupled_streams(user, stream, layout);

  qc.F = Eigen::MatrixXd::Zero(2 * static_cast<int>(coupled.size()), map.n);
  qc.f = Vec::Zero(qc.F.rows());
  qc.q = Vec::Zero(map.n);
  Vec c1, c2;
  int row = 0;
  const double gmag = std::abs(g);
  for (int b : coupled) {
    channel_rows(hk, map.precoder_offset(b), map.num_bs, c1, c2, map.n);
    qc.F.row(row++) = sw * gmag * c1.transpose();
    qc.F.row(row++) = sw * gmag * c2.transpose();
  }
  channel_rows(hk, map.precoder_offset(stream), map.num_bs, c1, c2, map.n);
  // -2 w Re{g h^H p} = -2w (Re g c1.v - Im g c2.v)
  qc.q = -2.0 * w * (g.real() * c1 - g.imag() * c2);
  return w * std::norm(g) * instance.noise_variance(user - 1) + w - std::log2(w);
}

}  // namespace detail

/// Build the convex inner problem at fixed (w, g). In the feasibility phase
/// the objective becomes the QoS slack and the WMSE objective is dropped.
inline Subproblem assemble_subproblem(const WmmseState& state, const ProblemInstance& instance,
                                      const StreamLayout& layout, const ChannelState& channel,
                                      bool feasibility_phase = false) {
  if (state.g.rows() != layout.num_streams() || state.w.rows() != layout.num_streams())
    throw std::invalid_argument("assemble_subproblem: state does not match layout");
  const int S = layout.num_streams();
  const int K = layout.num_users;
  const int M = instance.num_bs;

  Subproblem sp;
  auto& map = sp.map;
  map.num_bs = M;
  map.num_streams = S;
  map.x_index.resize(S);
  map.t_index.assign(K, -1);
  int n = 2 * M * S;
  for (int s = 0; s < S; ++s)
    for (size_t i = 0; i < layout.allocation_mask[s].size(); ++i)
      map.x_index[s].push_back(n++);
  for (int k = 1; k <= K; ++k)
    if (layout.stream_index(UserSet({k})) >= 0) map.t_index[k - 1] = n++;
  if (feasibility_phase) map.slack_index = n++;
  map.n = n;

  auto& prog = sp.program;
  prog.n = n;
  prog.c = Vec::Zero(n);
  if (feasibility_phase) {
    prog.c(map.slack_index) = 1.0;
  } else {
    for (int k = 1; k <= K; ++k) {
      const double u = instance.weights(k - 1);
      if (map.t_index[k - 1] >= 0)
        prog.c(map.t_index[k - 1]) = u;
      else
        map.objective_offset += u;  // xi_k^k == 1 for a zero private stream
      for (int s = 0; s < S; ++s)
        for (size_t i = 0; i < layout.allocation_mask[s].size(); ++i)
          if (layout.allocation_mask[s][i] == k) prog.c(map.x_index[s][i]) += u;
    }
  }

  // shared-stream WMSE constraints: xi_k^A <= 1 + sum_{k' enabled} X_{k'}^A
  for (int s = 0; s < S; ++s) {
    if (layout.streams[s].order() < 2) continue;
    for (int user : layout.streams[s].members) {
      socp::QuadConstraint qc;
      const double cst =
          detail::wmse_quadratic(user, s, state, instance, layout, channel, map, qc);
      for (int xi : map.x_index[s]) qc.q(xi) -= 1.0;
      qc.r = 1.0 - cst;
      prog.quadratic.push_back(std::move(qc));
    }
  }
  // private-stream epigraphs: xi_k^k <= t_k
  for (int k = 1; k <= K; ++k) {
    const int s = layout.stream_index(UserSet({k}));
    if (s < 0) continue;
    socp::QuadConstraint qc;
    const double cst =
        detail::wmse_quadratic(k, s, state, instance, layout, channel, map, qc);
    qc.q(map.t_index[k - 1]) -= 1.0;
    qc.r = -cst;
    prog.quadratic.push_back(std::move(qc));
  }
  // per-BS power
  for (int m = 0; m < M; ++m) {
    socp::QuadConstraint qc;
    qc.F = Eigen::MatrixXd::Zero(2 * S, n);
    for (int s = 0; s < S; ++s) {
      qc.F(2 * s, map.precoder_offset(s) + m) = 1.0;
      qc.F(2 * s + 1, map.precoder_offset(s) + M + m) = 1.0;
    }
    qc.f = Vec::Zero(2 * S);
    qc.q = Vec::Zero(n);
    qc.r = instance.per_bs_power(m);
    prog.quadratic.push_back(std::move(qc));
  }
  // QoS: sum_A X_k^A + xi_k^k epigraph <= 1 - R_th (minus slack in phase 1)
  for (int k = 1; k <= K; ++k) {
    socp::LinearConstraint lc;
    lc.a = Vec::Zero(n);
    double rhs = 1.0 - instance.qos(k - 1);
    if (map.t_index[k - 1] >= 0)
      lc.a(map.t_index[k - 1]) = 1.0;
    else
      rhs -= 1.0;
    for (int s = 0; s < S; ++s)
      for (size_t i = 0; i < layout.allocation_mask[s].size(); ++i)
        if (layout.allocation_mask[s][i] == k) lc.a(map.x_index[s][i]) = 1.0;
    if (feasibility_phase) lc.a(map.slack_index) = -1.0;
    lc.b = rhs;
    prog.linear.push_back(std::move(lc));
  }
  // x <= 0
  for (int s = 0; s < S; ++s)
    for (int xi : map.x_index[s]) {
      socp::LinearConstraint lc;
      lc.a = Vec::Zero(n);
      lc.a(xi) = 1.0;
      lc.b = 0.0;
      prog.linear.push_back(std::move(lc));
    }
  return sp;
}

enum class ConvergeStatus { converged, max_iter, infeasible };

struct TraceRecord {
  int iteration = 0;
  double wsr = 0.0;
  double max_power_residual = 0.0;  // max_m ([PP^H]_mm - P_m)
  double max_qos_residual = 0.0;    // max_k (R_th - R_tot), negative when slack
};

struct Solution {
  PrecoderSet precoders;
  CommonRateAllocation allocation;
  RateReport report;
  ConvergeStatus status = ConvergeStatus::max_iter;
  int iterations = 0;
  Vec per_bs_power;
  std::vector<TraceRecord> trace;
  bool monotone_warning = false;  // a step decreased WSR beyond 1e-6
  int solver_failures = 0;
};

struct AoOptions {
  double eps_conv = 1e-4;  // |WSR^n - WSR^{n-1}| stop threshold, bit/s/Hz
  int max_iters = 300;
  socp::SolverOptions solver;
};

/// Matched-filter private precoders plus dominant-singular-direction common
/// precoders, half the budget on the highest-order stream, rescaled so the
/// most loaded BS meets its power limit with equality.
inline PrecoderSet init_precoders(const ProblemInstance& instance, const StreamLayout& layout,
                                  const ChannelState& channel) {
  const int S = layout.num_streams();
  const int M = instance.num_bs;
  PrecoderSet pre = PrecoderSet::zero(M, S);

  int max_order = 0;
  for (const auto& s : layout.streams) max_order = std::max(max_order, s.order());
  Vec q(S);
  if (S == 1) {
    q(0) = instance.total_power();
  } else if (max_order >= 2) {
    q.setConstant(0.5 * instance.total_power() / (S - 1));
    q(0) = 0.5 * instance.total_power();  // canonical order puts the top stream first
  } else {
    q.setConstant(instance.total_power() / S);
  }

  for (int s = 0; s < S; ++s) {
    const auto& members = layout.streams[s].members;
    CVec dir;
    if (members.size() == 1) {
      dir = channel.h(members[0]);
    } else {
      CMat stacked(M, static_cast<Eigen::Index>(members.size()));
      for (size_t i = 0; i < members.size(); ++i)
        stacked.col(static_cast<Eigen::Index>(i)) = channel.h(members[i]);
      Eigen::JacobiSVD<CMat> svd(stacked, Eigen::ComputeThinU);
      dir = svd.matrixU().col(0);
    }
    const double nrm = dir.norm();
    if (nrm < 1e-30) {
      dir = CVec::Zero(M);
      dir(0) = 1.0;
    } else {
      dir /= nrm;
    }
    pre.P.col(s) = std::sqrt(q(s)) * dir;
  }
  const Vec used = pre.per_bs_power();
  double scale = std::numeric_limits<double>::infinity();
  for (int m = 0; m < M; ++m)
    if (used(m) > 0.0)
      scale = std::min(scale, std::sqrt(instance.per_bs_power(m) / used(m)));
  if (std::isfinite(scale)) pre.P *= scale;
  return pre;
}

namespace detail {

// Scale the precoders down so every per-BS power limit holds exactly (guards
// against solver-tolerance overshoot).
inline void enforce_power(PrecoderSet& pre, const ProblemInstance& instance) {
  const Vec used = pre.per_bs_power();
  double scale = 1.0;
  for (int m = 0; m < instance.num_bs; ++m)
    if (used(m) > instance.per_bs_power(m))
      scale = std::min(scale, std::sqrt(instance.per_bs_power(m) / used(m)));
  if (scale < 1.0) pre.P *= scale;
}

// Clip a subproblem allocation so it stays within the shared-rate budget of
// every stream (guards against solver-tolerance overshoot).
inline CommonRateAllocation clip_allocation(const Vec& z, const SubproblemMap& map,
                                            const ProblemInstance& instance,
                                            const StreamLayout& layout,
                                            const PrecoderSet& precoders,
                                            const ChannelState& channel) {
  auto alloc = CommonRateAllocation::zero(layout);
  for (int s = 0; s < layout.num_streams(); ++s) {
    if (map.x_index[s].empty()) continue;
    double sum = 0.0;
    for (size_t i = 0; i < map.x_index[s].size(); ++i) {
      const double c = std::max(0.0, -z(map.x_index[s][i]));
      alloc.shares(s, layout.allocation_mask[s][i] - 1) = c;
      sum += c;
    }
    const double cap = common_stream_rate(s, layout, precoders, channel,
                                          instance.noise_variance);
    if (sum > cap && sum > 0.0) {
      const double f = std::max(0.0, cap) / sum;
      for (int user : layout.allocation_mask[s]) alloc.shares(s, user - 1) *= f;
    }
  }
  return alloc;
}

}  // namespace detail

/// Move shares from users with surplus toward users below their QoS target
/// wherever the stream's allocation mask allows. With equal weights the
/// transfers are WSR-neutral; in general they trade a little WSR for
/// feasibility.
inline CommonRateAllocation repair_allocation_for_qos(const ProblemInstance& instance,
                                                      const StreamLayout& layout,
                                                      const PrecoderSet& precoders,
                                                      const ChannelState& channel,
                                                      CommonRateAllocation alloc) {
  Vec total = evaluate(instance, layout, precoders, channel, alloc).user_total;
  for (int pass = 0; pass < layout.num_users; ++pass) {
    bool moved = false;
    for (int k = 1; k <= layout.num_users; ++k) {
      double deficit = instance.qos(k - 1) - total(k - 1);
      if (deficit <= 1e-12) continue;
      for (int s = 0; s < layout.num_streams() && deficit > 1e-12; ++s) {
        const auto& mask = layout.allocation_mask[s];
        if (layout.streams[s].order() < 2 ||
            std::find(mask.begin(), mask.end(), k) == mask.end())
          continue;
        for (int j : mask) {
          if (j == k) continue;
          const double surplus = total(j - 1) - instance.qos(j - 1);
          const double take =
              std::min({deficit, alloc.shares(s, j - 1), std::max(0.0, surplus)});
          if (take <= 1e-12) continue;
          alloc.shares(s, j - 1) -= take;
          alloc.shares(s, k - 1) += take;
          total(j - 1) -= take;
          total(k - 1) += take;
          deficit -= take;
          moved = true;
          if (deficit <= 1e-12) break;
        }
      }
    }
    if (!moved) break;
  }
  return alloc;
}

inline CommonRateAllocation qos_aware_allocation(const ProblemInstance& instance,
                                                 const StreamLayout& layout,
                                                 const PrecoderSet& precoders,
                                                 const ChannelState& channel) {
  auto alloc = greedy_allocation(instance, layout, precoders, channel);
  if (instance.qos.maxCoeff() <= 0.0) return alloc;
  return repair_allocation_for_qos(instance, layout, precoders, channel, std::move(alloc));
}

/// Algorithm: alternate closed-form (w, g) updates with the convex (x, P)
/// subproblem until the WSR settles. Returns `infeasible` when the QoS
/// targets are unreachable even after a max-slack feasibility phase.
inline Solution ao_solve(const ProblemInstance& instance, const StreamLayout& layout,
                         const ChannelState& channel, const PrecoderSet& init,
                         const AoOptions& options = {}) {
  instance.validate();
  layout.validate();
  const Vec init_power = init.per_bs_power();
  for (int m = 0; m < instance.num_bs; ++m)
    if (init_power(m) > instance.per_bs_power(m) + 1e-6)
      throw std::invalid_argument("ao_solve: init violates per-BS power");

  Solution sol;
  sol.precoders = init;
  sol.allocation = qos_aware_allocation(instance, layout, sol.precoders, channel);
  sol.report = evaluate(instance, layout, sol.precoders, channel, sol.allocation);

  auto residuals = [&](TraceRecord& rec) {
    rec.max_power_residual =
        (sol.precoders.per_bs_power() - instance.per_bs_power).maxCoeff();
    rec.max_qos_residual = (instance.qos - sol.report.user_total).maxCoeff();
  };

  double wsr_prev = sol.report.wsr;
  {
    TraceRecord rec;
    rec.iteration = 0;
    rec.wsr = wsr_prev;
    residuals(rec);
    sol.trace.push_back(rec);
  }

  bool need_feasibility = (instance.qos - sol.report.user_total).maxCoeff() > 1e-9;
  double slack_prev = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= options.max_iters; ++it) {
    sol.iterations = it;
    WmmseState state = mmse_update(instance, layout, sol.precoders, channel);

    Subproblem sp = assemble_subproblem(state, instance, layout, channel,
                                        /*feasibility_phase=*/need_feasibility);
    auto inner = socp::solve(sp.program, options.solver);

    if (need_feasibility) {
      if (inner.status != socp::SolveStatus::optimal) {
        sol.status = ConvergeStatus::infeasible;
        sol.per_bs_power = sol.precoders.per_bs_power();
        return sol;
      }
      if (inner.objective > 1e-6) {
        // the slack bound holds only at the current (w, g); keep alternating
        // slack minimization with fresh MMSE weights while it still improves
        if (inner.objective < 0.99 * slack_prev) {
          slack_prev = inner.objective;
          sol.precoders = sp.map.extract_precoders(inner.z);
          detail::enforce_power(sol.precoders, instance);
          continue;
        }
        sol.status = ConvergeStatus::infeasible;
        sol.per_bs_power = sol.precoders.per_bs_power();
        return sol;
      }
      need_feasibility = false;
      sol.precoders = sp.map.extract_precoders(inner.z);
      detail::enforce_power(sol.precoders, instance);
      sol.allocation = detail::clip_allocation(inner.z, sp.map, instance, layout,
                                               sol.precoders, channel);
      sol.report = evaluate(instance, layout, sol.precoders, channel, sol.allocation);
      wsr_prev = sol.report.wsr;
      TraceRecord rec;
      rec.iteration = it;
      rec.wsr = wsr_prev;
      residuals(rec);
      sol.trace.push_back(rec);
      continue;
    }

    if (inner.status == socp::SolveStatus::infeasible) {
      // QoS unreachable at the current (w, g); try the slack phase next
      need_feasibility = true;
      slack_prev = std::numeric_limits<double>::infinity();
      continue;
    }
    if (inner.status == socp::SolveStatus::max_iter) ++sol.solver_failures;

    PrecoderSet cand_pre = sp.map.extract_precoders(inner.z);
    detail::enforce_power(cand_pre, instance);
    auto cand_alloc = detail::clip_allocation(inner.z, sp.map, instance, layout,
                                              cand_pre, channel);
    auto cand_report = evaluate(instance, layout, cand_pre, channel, cand_alloc);
    if (instance.qos.maxCoeff() > 0.0 &&
        (instance.qos - cand_report.user_total).maxCoeff() > 1e-5) {
      // solver-tolerance slop can leak through the surrogate QoS constraints;
      // try shifting shared rate onto the short users first
      cand_alloc = repair_allocation_for_qos(instance, layout, cand_pre, channel,
                                             std::move(cand_alloc));
      cand_report = evaluate(instance, layout, cand_pre, channel, cand_alloc);
      if ((instance.qos - cand_report.user_total).maxCoeff() > 1e-5) {
        // unrepairable: keep the last feasible iterate
        sol.status = ConvergeStatus::converged;
        sol.per_bs_power = sol.precoders.per_bs_power();
        return sol;
      }
    }

    if (cand_report.wsr < wsr_prev - 1e-9) {
      // reject a non-monotone step (solver noise); stop here
      if (cand_report.wsr < wsr_prev - 1e-6) sol.monotone_warning = true;
      sol.status = ConvergeStatus::converged;
      sol.per_bs_power = sol.precoders.per_bs_power();
      return sol;
    }

    sol.precoders = cand_pre;
    sol.allocation = cand_alloc;
    sol.report = cand_report;
    sol.per_bs_power = sol.precoders.per_bs_power();

    TraceRecord rec;
    rec.iteration = it;
    rec.wsr = sol.report.wsr;
    residuals(rec);
    sol.trace.push_back(rec);

    if (std::abs(sol.report.wsr - wsr_prev) <= options.eps_conv) {
      sol.status = ConvergeStatus::converged;
      break;
    }
    wsr_prev = sol.report.wsr;
  }
  sol.per_bs_power = sol.precoders.per_bs_power();
  return sol;
}

/// Convenience overload with the default initialization.
inline Solution ao_solve(const ProblemInstance& instance, const StreamLayout& layout,
                         const ChannelState& channel, const AoOptions& options = {}) {
  return ao_solve(instance, layout, channel, init_precoders(instance, layout, channel),
                  options);
}

}  // namespace rsma
