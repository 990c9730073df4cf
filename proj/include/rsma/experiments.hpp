#pragma once

// Experiment pipelines: rate-region boundaries via weight sweeps with a
// convex hull over decoding orders, and sum-rate-vs-SNR tables with QoS
// schedules, averaged over seeded Monte Carlo channel draws.

#include <array>
#include <atomic>
#include <cmath>
#include <map>
#include <thread>

#include "rsma/channels.hpp"
#include "rsma/schemes.hpp"
#include "rsma/wmmse.hpp"

namespace rsma {

struct ExperimentConfig {
  std::string topology = "two-cell";  // two-cell | three-cell
  double alpha = 1.0;
  double beta = 1.0;
  std::vector<double> snr_db = {20.0};
  std::vector<std::string> schemes = {"rs", "mulp", "scsic"};
  int realizations = 25;
  uint64_t seed = 1;
  std::vector<double> u2_exponents;   // empty -> default grid
  std::vector<double> qos_schedule;   // parallel to snr_db (sum-rate runs)
  double tolerance = 1e-4;
  int max_iters = 300;
  int threads = 1;

  int num_users() const { return topology == "three-cell" ? 3 : 2; }

  void validate() const {
    if (topology != "two-cell" && topology != "three-cell")
      throw std::invalid_argument("ExperimentConfig: unknown topology " + topology);
    check_disparity(alpha, beta);
    if (snr_db.empty()) throw std::invalid_argument("ExperimentConfig: empty SNR grid");
    if (realizations < 1)
      throw std::invalid_argument("ExperimentConfig: realizations must be >= 1");
    if (!qos_schedule.empty() && qos_schedule.size() != snr_db.size())
      throw std::invalid_argument("ExperimentConfig: QoS schedule length mismatch");
    if (schemes.empty()) throw std::invalid_argument("ExperimentConfig: no schemes");
    for (const auto& s : schemes)
      if (s != "rs" && s != "1layer" && s != "mulp" && s != "scsic" && s != "scsicgroup")
        throw std::invalid_argument("ExperimentConfig: unknown scheme " + s);
    if (threads < 1) throw std::invalid_argument("ExperimentConfig: threads must be >= 1");
  }

  Eigen::MatrixXd variance_profile() const {
    return topology == "three-cell" ? wyner_three_cell_profile(alpha, beta)
                                    : wyner_two_cell_profile(alpha, beta);
  }

  ChannelState channel(int realization) const {
    Rng rng = Rng::split(seed, static_cast<uint64_t>(realization));
    ChannelState ch = draw_from_profile(variance_profile(), rng);
    ch.seed = seed;
    ch.draw = static_cast<uint64_t>(realization);
    return ch;
  }

  AoOptions ao_options() const {
    AoOptions opt;
    opt.eps_conv = tolerance;
    opt.max_iters = max_iters;
    return opt;
  }
};

/// u2 = 10^x with x in {-3} + {-1, -0.95, ..., 0.95, 1} + {3}.
inline std::vector<double> default_weight_grid() {
  std::vector<double> x;
  x.push_back(-3.0);
  for (int i = 0; i <= 40; ++i) x.push_back((5 * i - 100) / 100.0);
  x.push_back(3.0);
  return x;
}

struct Average {
  double mean = 0.0;
  double halfwidth = 0.0;  // 95% normal-approximation; NaN for n == 1
  int count = 0;
};

inline Average monte_carlo_average(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("monte_carlo_average: no samples");
  Average a;
  a.count = static_cast<int>(values.size());
  for (double v : values) a.mean += v;
  a.mean /= a.count;
  if (a.count == 1) {
    a.halfwidth = std::numeric_limits<double>::quiet_NaN();
    return a;
  }
  double ss = 0.0;
  for (double v : values) ss += (v - a.mean) * (v - a.mean);
  const double sd = std::sqrt(ss / (a.count - 1));
  a.halfwidth = 1.96 * sd / std::sqrt(static_cast<double>(a.count));
  return a;
}

using Point2 = std::array<double, 2>;

/// Upper-right Pareto hull of a 2-D rate cloud: the dominant part of the
/// convex hull, vertices ordered by increasing first rate.
inline std::vector<Point2> convex_hull_2d(std::vector<Point2> pts) {
  if (pts.empty()) throw std::invalid_argument("convex_hull_2d: no points");
  std::sort(pts.begin(), pts.end());
  // keep one point per x: the highest
  std::vector<Point2> uniq;
  for (const auto& p : pts) {
    if (!uniq.empty() && uniq.back()[0] == p[0])
      uniq.back()[1] = std::max(uniq.back()[1], p[1]);
    else
      uniq.push_back(p);
  }
  auto cross = [](const Point2& o, const Point2& a, const Point2& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
  };
  std::vector<Point2> hull;
  for (const auto& p : uniq) {
    while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), p) >= 0.0)
      hull.pop_back();
    hull.push_back(p);
  }
  // dominant boundary starts at the peak rate of user 2
  size_t peak = 0;
  for (size_t i = 1; i < hull.size(); ++i)
    if (hull[i][1] >= hull[peak][1]) peak = i;
  hull.erase(hull.begin(), hull.begin() + static_cast<long>(peak));
  return hull;
}

/// One solved scheme variant (e.g. a particular SC-SIC decoding order).
struct SchemeVariant {
  std::string scheme;  // rs | 1layer | mulp | scsic | scsicgroup
  std::string order;   // decoding-order label, empty when unique
  StreamLayout layout;
};

inline std::string order_label(const std::vector<int>& order) {
  std::string s;
  for (size_t i = 0; i < order.size(); ++i) {
    if (i) s += "->";
    s += std::to_string(order[i]);
  }
  return s;
}

/// Expand a scheme name into its solved variants (SC-SIC: all user orders).
inline std::vector<SchemeVariant> scheme_variants(const std::string& name, int K) {
  std::vector<SchemeVariant> out;
  if (name == "rs") {
    out.push_back({name, "", build_scheme(GeneralizedRS{}, K)});
  } else if (name == "1layer") {
    out.push_back({name, "", build_scheme(OneLayerRS{}, K)});
  } else if (name == "mulp") {
    out.push_back({name, "", build_scheme(MULP{}, K)});
  } else if (name == "scsic") {
    for (const auto& order : all_user_orders(K))
      out.push_back({name, order_label(order), build_scheme(SCSIC{order}, K)});
  } else if (name == "scsicgroup") {
    if (K != 3)
      throw std::invalid_argument("scsicgroup: fixed grouping defined for K = 3");
    // fixed grouping: user-1 alone, users 2 and 3 share a group; both
    // intra-group orders are tried
    out.push_back({name, "2->3", build_scheme(SCSICPerGroup{{{1}, {2, 3}}}, 3)});
    out.push_back({name, "3->2", build_scheme(SCSICPerGroup{{{1}, {3, 2}}}, 3)});
  } else {
    throw std::invalid_argument("unknown scheme " + name);
  }
  return out;
}

namespace detail {

inline double initial_wsr(const ProblemInstance& inst, const StreamLayout& layout,
                          const PrecoderSet& pre, const ChannelState& ch) {
  return evaluate(inst, layout, pre, ch, greedy_allocation(inst, layout, pre, ch)).wsr;
}

// AO from the best of several candidate initializations (by initial WSR
// under the greedy allocation). Restriction-derived candidates make the
// nesting guarantees hold: the monotone AO can only improve on them.
inline Solution ao_best_init(const ProblemInstance& inst, const StreamLayout& layout,
                             const ChannelState& ch,
                             const std::vector<PrecoderSet>& candidates,
                             const AoOptions& opt) {
  const PrecoderSet* best = &candidates.front();
  const PrecoderSet* best_feas = nullptr;  // best candidate already meeting QoS
  double best_wsr = -1.0, best_feas_wsr = -1.0;
  for (const auto& c : candidates) {
    const auto rep =
        evaluate(inst, layout, c, ch, qos_aware_allocation(inst, layout, c, ch));
    if (rep.wsr > best_wsr) {
      best_wsr = rep.wsr;
      best = &c;
    }
    const bool meets_qos = (inst.qos - rep.user_total).maxCoeff() <= 1e-9;
    if (meets_qos && rep.wsr > best_feas_wsr) {
      best_feas_wsr = rep.wsr;
      best_feas = &c;
    }
  }
  Solution sol = ao_solve(inst, layout, ch, *best, opt);
  // A QoS-feasible start skips the slack phase and the monotone AO can only
  // improve on it; fall back to it when the best-WSR start fails the QoS
  // targets or the slack phase lands below the feasible candidate.
  if (best_feas != nullptr && best_feas != best &&
      (sol.status == ConvergeStatus::infeasible ||
       sol.report.wsr < best_feas_wsr - 1e-9)) {
    Solution alt = ao_solve(inst, layout, ch, *best_feas, opt);
    if (sol.status == ConvergeStatus::infeasible ||
        (alt.status != ConvergeStatus::infeasible && alt.report.wsr > sol.report.wsr))
      sol = std::move(alt);
  }
  return sol;
}

// One scheme variant entering a two-user weight sweep. rank orders the
// solves: 0 = restriction, 1 = 1-layer RS, 2 = generalized RS; higher ranks
// draw initial candidates from every solution of the lower ranks.
struct SweepVariant {
  StreamLayout layout;
  int rank = 0;
};

// Map a solved precoder set into a finer layout by stream identity,
// zero-padding the streams the source does not use. Returns nothing when a
// source stream is absent from the destination.
inline std::optional<PrecoderSet> map_precoders(const StreamLayout& src,
                                                const PrecoderSet& pre,
                                                const StreamLayout& dst, int M) {
  PrecoderSet out = PrecoderSet::zero(M, dst.num_streams());
  for (int s = 0; s < src.num_streams(); ++s) {
    const int t = dst.stream_index(src.streams[s]);
    if (t < 0) return std::nullopt;
    out.P.col(t) = pre.P.col(s);
  }
  return out;
}

// Solve every variant at every weight point of a two-user sweep for one
// channel draw. Restrictions run first with a forward warm start; the
// rate-splitting variants then pick each start from a cross-weight pool of
// all earlier solutions (the AO is local, and a restriction's solution at a
// neighboring weight is often the best available start), followed by a
// backward refinement pass along the sweep.
inline std::vector<std::vector<Solution>> weight_sweep_solve(
    int M, double ptot, const std::vector<double>& grid,
    const std::vector<SweepVariant>& vars, const ChannelState& ch,
    const AoOptions& opt) {
  const int K = 2;
  const int W = static_cast<int>(grid.size());
  auto inst_at = [&](int w) {
    Vec u(2);
    u << 1.0, std::pow(10.0, grid[w]);
    return ProblemInstance::make(M, K, Vec::Constant(M, ptot / M), Vec::Zero(K), u);
  };
  std::vector<size_t> order(vars.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return vars[a].rank < vars[b].rank; });

  std::vector<std::vector<Solution>> sols(vars.size(), std::vector<Solution>(W));
  for (size_t oi = 0; oi < order.size(); ++oi) {
    const size_t v = order[oi];
    const StreamLayout& layout = vars[v].layout;
    std::vector<PrecoderSet> pool;
    if (vars[v].rank > 0)
      for (size_t oj = 0; oj < oi; ++oj)
        for (int w = 0; w < W; ++w)
          if (auto m = map_precoders(vars[order[oj]].layout,
                                     sols[order[oj]][w].precoders, layout, M))
            pool.push_back(std::move(*m));
    std::optional<PrecoderSet> warmp;
    for (int w = 0; w < W; ++w) {
      const auto inst = inst_at(w);
      std::vector<PrecoderSet> inits;
      if (warmp) inits.push_back(*warmp);
      inits.push_back(init_precoders(inst, layout, ch));
      for (const auto& p : pool) inits.push_back(p);
      for (int w2 = 0; w2 < w; ++w2) inits.push_back(sols[v][w2].precoders);
      sols[v][w] = ao_best_init(inst, layout, ch, inits, opt);
      warmp = sols[v][w].precoders;
    }
    if (vars[v].rank > 0)
      for (int w = W - 2; w >= 0; --w) {
        Solution alt = ao_best_init(inst_at(w), layout, ch,
                                    {sols[v][w + 1].precoders, sols[v][w].precoders},
                                    opt);
        if (alt.report.wsr > sols[v][w].report.wsr) sols[v][w] = std::move(alt);
      }
  }
  return sols;
}

// Achievable rate pair of a solved precoder set when every shared stream's
// full common rate goes to one user (its carrier when that user is not
// eligible). These allocation corners are achievable by definition and trace
// the slope -1 segment the WSR-optimal split collapses to a single point of.
inline Point2 corner_allocation_rates(const ProblemInstance& inst,
                                      const StreamLayout& layout, const Solution& sol,
                                      const ChannelState& ch, int user) {
  auto alloc = CommonRateAllocation::zero(layout);
  for (int s = 0; s < layout.num_streams(); ++s) {
    if (layout.streams[s].order() < 2) continue;
    const auto& mask = layout.allocation_mask[s];
    const int to =
        std::find(mask.begin(), mask.end(), user) != mask.end() ? user : mask.front();
    alloc.shares(s, to - 1) = common_stream_rate(s, layout, sol.precoders, ch,
                                                 inst.noise_variance);
  }
  const auto rep = evaluate(inst, layout, sol.precoders, ch, alloc);
  return {rep.user_total(0), rep.user_total(1)};
}

template <typename Fn>
void parallel_realizations(int count, int threads, Fn&& fn) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int r = 0; r < count; ++r) fn(r);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&]() {
      for (int r = next.fetch_add(1); r < count; r = next.fetch_add(1)) fn(r);
    });
  for (auto& th : pool) th.join();
}

}  // namespace detail

struct RegionPoint {
  std::string scheme;
  std::string order;
  double u2_exponent = 0.0;
  Vec avg_rates;           // averaged per-user rates across realizations
  double halfwidth = 0.0;  // of the weighted objective proxy (sum of rates)
  int realization_count = 0;
};

struct RegionResult {
  std::vector<RegionPoint> points;
  std::map<std::string, std::vector<Point2>> hulls;  // per scheme, over all orders
};

/// Weight-sweep rate region for the two-user topology: per realization and
/// decoding order, solve every weight point (warm-started along the sweep);
/// average rates per point across realizations, then hull per scheme.
inline RegionResult rate_region(const ExperimentConfig& config) {
  config.validate();
  if (config.num_users() != 2)
    throw std::invalid_argument("rate_region: two-user topology required");
  const int K = 2;
  const int M = 2;
  const double ptot = std::pow(10.0, config.snr_db.front() / 10.0);
  const auto grid = config.u2_exponents.empty() ? default_weight_grid() : config.u2_exponents;
  const AoOptions opt = config.ao_options();

  std::vector<SchemeVariant> variants;
  for (const auto& name : config.schemes)
    for (auto& v : scheme_variants(name, K)) variants.push_back(std::move(v));

  const int R = config.realizations;
  const int W = static_cast<int>(grid.size());
  // rates[v][w][r] = (R1, R2)
  std::vector<std::vector<std::vector<Point2>>> rates(
      variants.size(), std::vector<std::vector<Point2>>(W, std::vector<Point2>(R)));

  std::vector<detail::SweepVariant> sweep_vars;
  for (const auto& vr : variants) {
    int rank = 0;
    if (vr.scheme == "1layer") rank = 1;
    if (vr.scheme == "rs") rank = 2;
    sweep_vars.push_back({vr.layout, rank});
  }
  // corners[v][w][r][k]: rates when all common rate goes to user k+1
  std::vector<std::vector<std::vector<std::array<Point2, 2>>>> corners(
      variants.size(),
      std::vector<std::vector<std::array<Point2, 2>>>(
          W, std::vector<std::array<Point2, 2>>(R)));
  detail::parallel_realizations(R, config.threads, [&](int r) {
    const ChannelState ch = config.channel(r);
    const auto sols = detail::weight_sweep_solve(M, ptot, grid, sweep_vars, ch, opt);
    const auto inst0 = ProblemInstance::make(M, K, Vec::Constant(M, ptot / M),
                                             Vec::Zero(K), Vec::Ones(K));
    for (size_t v = 0; v < variants.size(); ++v)
      for (int w = 0; w < W; ++w) {
        rates[v][w][r] = {sols[v][w].report.user_total(0),
                          sols[v][w].report.user_total(1)};
        for (int k = 0; k < 2; ++k)
          corners[v][w][r][k] = detail::corner_allocation_rates(
              inst0, variants[v].layout, sols[v][w], ch, k + 1);
      }
  });

  RegionResult out;
  for (size_t v = 0; v < variants.size(); ++v) {
    std::vector<Point2> scheme_points;
    for (int w = 0; w < W; ++w) {
      std::vector<double> r1, r2, sum;
      for (int r = 0; r < R; ++r) {
        r1.push_back(rates[v][w][r][0]);
        r2.push_back(rates[v][w][r][1]);
        sum.push_back(rates[v][w][r][0] + rates[v][w][r][1]);
      }
      RegionPoint pt;
      pt.scheme = variants[v].scheme;
      pt.order = variants[v].order;
      pt.u2_exponent = grid[w];
      pt.avg_rates = Vec(2);
      pt.avg_rates << monte_carlo_average(r1).mean, monte_carlo_average(r2).mean;
      pt.halfwidth = monte_carlo_average(sum).halfwidth;
      pt.realization_count = R;
      out.points.push_back(pt);
    }
  }
  // hull per scheme over all of its orders' averaged points, including the
  // averaged allocation corners of every solution
  std::map<std::string, std::vector<Point2>> clouds;
  for (const auto& pt : out.points)
    clouds[pt.scheme].push_back({pt.avg_rates(0), pt.avg_rates(1)});
  for (size_t v = 0; v < variants.size(); ++v)
    for (int w = 0; w < W; ++w)
      for (int k = 0; k < 2; ++k) {
        Point2 acc{0.0, 0.0};
        for (int r = 0; r < R; ++r) {
          acc[0] += corners[v][w][r][k][0];
          acc[1] += corners[v][w][r][k][1];
        }
        clouds[variants[v].scheme].push_back({acc[0] / R, acc[1] / R});
      }
  // A variant realizes every lower-rank variant whose streams embed into its
  // layout (zero-padded precoders), so those averaged points are achievable by
  // it as well and belong in its hull cloud.
  for (size_t v = 0; v < variants.size(); ++v)
    for (size_t u = 0; u < variants.size(); ++u) {
      if (sweep_vars[u].rank >= sweep_vars[v].rank) continue;
      bool embeds = true;
      for (const auto& s : variants[u].layout.streams)
        if (variants[v].layout.stream_index(s) < 0) embeds = false;
      if (!embeds) continue;
      for (int w = 0; w < W; ++w) {
        Point2 acc{0.0, 0.0};
        for (int r = 0; r < R; ++r) {
          acc[0] += rates[u][w][r][0];
          acc[1] += rates[u][w][r][1];
        }
        clouds[variants[v].scheme].push_back({acc[0] / R, acc[1] / R});
        for (int k = 0; k < 2; ++k) {
          Point2 cor{0.0, 0.0};
          for (int r = 0; r < R; ++r) {
            cor[0] += corners[u][w][r][k][0];
            cor[1] += corners[u][w][r][k][1];
          }
          clouds[variants[v].scheme].push_back({cor[0] / R, cor[1] / R});
        }
      }
    }
  for (auto& [scheme, cloud] : clouds) out.hulls[scheme] = convex_hull_2d(cloud);
  return out;
}

struct SumRateRow {
  std::string scheme;
  double snr_db = 0.0;
  double qos = 0.0;
  Vec avg_rates;
  double sum_rate = 0.0;
  double halfwidth = 0.0;
  int realization_count = 0;  // feasible realizations entering the average
  int infeasible_count = 0;
};

/// Sum rate vs SNR with the per-SNR QoS schedule, all-ones weights,
/// P_m = P_tot / M. SC-SIC style schemes keep their best decoding order
/// per realization.
inline std::vector<SumRateRow> sum_rate_vs_snr(const ExperimentConfig& config) {
  config.validate();
  const int K = config.num_users();
  const int M = K;  // one BS per cell in both topologies
  const AoOptions opt = config.ao_options();
  const int R = config.realizations;
  const int N = static_cast<int>(config.snr_db.size());

  std::vector<std::string> ordered_schemes = config.schemes;
  // restrictions first; rs/1layer may start from their embedded solutions
  std::stable_sort(ordered_schemes.begin(), ordered_schemes.end(),
                   [](const std::string& a, const std::string& b) {
                     auto rank = [](const std::string& s) {
                       return (s == "rs") ? 2 : (s == "1layer") ? 1 : 0;
                     };
                     return rank(a) < rank(b);
                   });

  struct Cell {
    Vec rates;
    bool feasible = false;
  };
  // results[scheme][snr][r]
  std::map<std::string, std::vector<std::vector<Cell>>> results;
  for (const auto& s : config.schemes)
    results[s] = std::vector<std::vector<Cell>>(N, std::vector<Cell>(R));

  detail::parallel_realizations(R, config.threads, [&](int r) {
    const ChannelState ch = config.channel(r);
    std::map<std::string, std::vector<std::optional<PrecoderSet>>> warm;
    for (const auto& name : config.schemes) {
      const auto vars = scheme_variants(name, K);
      warm[name] = std::vector<std::optional<PrecoderSet>>(vars.size());
    }
    for (int i = 0; i < N; ++i) {
      const double ptot = std::pow(10.0, config.snr_db[i] / 10.0);
      const double qos = config.qos_schedule.empty() ? 0.0 : config.qos_schedule[i];
      const auto inst = ProblemInstance::make(M, K, Vec::Constant(M, ptot / M),
                                              Vec::Constant(K, qos), Vec::Ones(K));
      std::map<std::string, Solution> best_restriction;
      std::map<std::string, StreamLayout> best_layout;
      for (const auto& name : ordered_schemes) {
        const auto vars = scheme_variants(name, K);
        Solution best;
        const StreamLayout* best_var_layout = nullptr;
        bool have = false;
        for (size_t v = 0; v < vars.size(); ++v) {
          std::vector<PrecoderSet> inits;
          if (warm[name][v]) inits.push_back(*warm[name][v]);
          inits.push_back(init_precoders(inst, vars[v].layout, ch));
          if (name == "rs" || name == "1layer") {
            for (const auto& [rname, rsol] : best_restriction) {
              // usable only when the restriction's streams all exist here
              bool subset = true;
              for (const auto& s : best_layout.at(rname).streams)
                if (vars[v].layout.stream_index(s) < 0) subset = false;
              if (!subset) continue;
              PrecoderSet init = PrecoderSet::zero(M, vars[v].layout.num_streams());
              for (int si = 0; si < best_layout.at(rname).num_streams(); ++si)
                init.P.col(vars[v].layout.stream_index(best_layout.at(rname).streams[si])) =
                    rsol.precoders.P.col(si);
              inits.push_back(init);
            }
          }
          Solution sol = detail::ao_best_init(inst, vars[v].layout, ch, inits, opt);
          warm[name][v] = sol.precoders;
          if (sol.status == ConvergeStatus::infeasible) continue;
          if (!have || sol.report.wsr > best.report.wsr) {
            best = sol;
            best_var_layout = &vars[v].layout;
            have = true;
          }
        }
        Cell cell;
        if (have) {
          cell.feasible = true;
          cell.rates = best.report.user_total;
          best_restriction[name] = best;
          best_layout[name] = *best_var_layout;
        }
        results[name][i][r] = cell;
      }
    }
  });

  std::vector<SumRateRow> rows;
  for (const auto& name : config.schemes)
    for (int i = 0; i < N; ++i) {
      SumRateRow row;
      row.scheme = name;
      row.snr_db = config.snr_db[i];
      row.qos = config.qos_schedule.empty() ? 0.0 : config.qos_schedule[i];
      std::vector<double> sums;
      Vec acc = Vec::Zero(K);
      for (int r = 0; r < R; ++r) {
        const auto& cell = results[name][i][r];
        if (!cell.feasible) {
          ++row.infeasible_count;
          continue;
        }
        sums.push_back(cell.rates.sum());
        acc += cell.rates;
      }
      row.realization_count = static_cast<int>(sums.size());
      if (!sums.empty()) {
        const auto avg = monte_carlo_average(sums);
        row.sum_rate = avg.mean;
        row.halfwidth = avg.halfwidth;
        row.avg_rates = acc / static_cast<double>(sums.size());
      } else {
        row.avg_rates = Vec::Zero(K);
        row.sum_rate = 0.0;
        row.halfwidth = std::numeric_limits<double>::quiet_NaN();
      }
      rows.push_back(std::move(row));
    }
  return rows;
}

}  // namespace rsma
