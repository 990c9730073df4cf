#pragma once

// Result serialization: fixed-column CSV (9 significant digits) and the
// JSON experiment manifest that makes any result file reproducible.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "rsma/experiments.hpp"

#define RSMA_VERSION "0.1.0"

namespace rsma::io {

inline std::string num(double v) {
  if (std::isnan(v)) return "na";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

inline std::string csv_header(int K) {
  std::string h = "scheme,alpha,beta,snr_db,u2_exponent,realization_count";
  for (int k = 1; k <= K; ++k) h += ",rate_user_" + std::to_string(k);
  return h + ",sum_rate,halfwidth";
}

inline std::string region_csv(const RegionResult& result, const ExperimentConfig& config) {
  std::ostringstream os;
  os << csv_header(2) << "\n";
  for (const auto& pt : result.points) {
    std::string scheme = pt.scheme;
    if (!pt.order.empty()) scheme += "(" + pt.order + ")";
    os << scheme << "," << num(config.alpha) << "," << num(config.beta) << ","
       << num(config.snr_db.front()) << "," << num(pt.u2_exponent) << ","
       << pt.realization_count << "," << num(pt.avg_rates(0)) << ","
       << num(pt.avg_rates(1)) << "," << num(pt.avg_rates.sum()) << ","
       << num(pt.halfwidth) << "\n";
  }
  return os.str();
}

inline std::string hull_csv(const RegionResult& result) {
  std::ostringstream os;
  os << "scheme,rate_user_1,rate_user_2\n";
  for (const auto& [scheme, hull] : result.hulls)
    for (const auto& p : hull)
      os << scheme << "," << num(p[0]) << "," << num(p[1]) << "\n";
  return os.str();
}

inline std::string sumrate_csv(const std::vector<SumRateRow>& rows,
                               const ExperimentConfig& config) {
  std::ostringstream os;
  const int K = config.num_users();
  os << csv_header(K) << "\n";
  for (const auto& row : rows) {
    os << row.scheme << "," << num(config.alpha) << "," << num(config.beta) << ","
       << num(row.snr_db) << ",-," << row.realization_count;
    for (int k = 0; k < K; ++k) os << "," << num(row.avg_rates(k));
    os << "," << num(row.sum_rate) << "," << num(row.halfwidth) << "\n";
  }
  return os.str();
}

/// Channel replay dump: (realization, user, bs, re, im).
inline std::string channels_csv(const ExperimentConfig& config) {
  std::ostringstream os;
  os << "realization,user,bs,re,im\n";
  for (int r = 0; r < config.realizations; ++r) {
    const ChannelState ch = config.channel(r);
    for (int k = 1; k <= ch.num_users(); ++k)
      for (int m = 1; m <= ch.num_bs(); ++m)
        os << r << "," << k << "," << m << "," << num(ch.H(k - 1, m - 1).real())
           << "," << num(ch.H(k - 1, m - 1).imag()) << "\n";
  }
  return os.str();
}

inline nlohmann::json manifest(const ExperimentConfig& config,
                               const std::string& subcommand) {
  nlohmann::json j;
  j["library_version"] = RSMA_VERSION;
  j["subcommand"] = subcommand;
  j["topology"] = config.topology;
  j["alpha"] = config.alpha;
  j["beta"] = config.beta;
  j["snr_db"] = config.snr_db;
  j["schemes"] = config.schemes;
  j["realizations"] = config.realizations;
  j["seed"] = config.seed;
  j["u2_exponents"] =
      config.u2_exponents.empty() ? default_weight_grid() : config.u2_exponents;
  j["qos_schedule"] = config.qos_schedule;
  j["tolerances"] = {{"ao_eps_conv", config.tolerance},
                     {"ao_max_iters", config.max_iters},
                     {"solver_feas_tol", 1e-8},
                     {"solver_gap_tol", 1e-8},
                     {"allocation_tol", kAllocationTol}};
  return j;
}

inline void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << contents;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace rsma::io
