#include "clustervar/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "clustervar/error.hpp"

namespace clustervar {

json ReportEnvelope::to_json() const {
  json j;
  j["command"] = command;
  j["version"] = version;
  j["config"] = config;
  j["seed"] = seed ? json(*seed) : json(nullptr);
  j["results"] = results;
  j["warnings"] = warnings;
  return j;
}

ReportEnvelope ReportEnvelope::from_json(const json& j) {
  ReportEnvelope env;
  env.command = j.at("command").get<std::string>();
  env.version = j.at("version").get<std::string>();
  env.config = j.at("config");
  if (!j.at("seed").is_null()) env.seed = j.at("seed").get<std::uint64_t>();
  env.results = j.at("results");
  env.warnings = j.at("warnings").get<std::vector<std::string>>();
  return env;
}

std::string ReportEnvelope::dump() const { return to_json().dump(2) + "\n"; }

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = static_cast<Index>(j.size());
  const Index cols = rows > 0 ? static_cast<Index>(j.at(0).size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index c = 0; c < cols; ++c) m(i, c) = j.at(i).at(c).get<double>();
  return m;
}

json to_json(const CovEstimate& cov) {
  json j;
  j["kind"] = std::string(to_string(cov.kind));
  j["matrix"] = matrix_to_json(cov.matrix);
  j["min_eigenvalue"] = cov.min_eigenvalue;
  j["is_psd"] = cov.is_psd;
  json diag = json::object();
  for (const auto& [k, v] : cov.diagnostics) diag[k] = v;
  j["diagnostics"] = diag;
  return j;
}

json to_json(const TestResult& t) {
  json j;
  j["estimate"] = t.estimate;
  j["std_error"] = t.std_error;
  j["statistic"] = t.statistic;
  j["p_value"] = t.p_value;
  j["df_rule"] = std::string(to_string(t.df_rule));
  return j;
}

json to_json(const std::vector<HistogramBin>& bins) {
  json out = json::array();
  for (const auto& b : bins) out.push_back({{"lower", b.lower}, {"upper", b.upper}, {"count", b.count}});
  return out;
}

json to_json(const GershgorinChain& c) {
  return json{{"bias_max", c.bias_max},
              {"bias_min", c.bias_min},
              {"spread_max", c.spread_max},
              {"cross_min", c.cross_min},
              {"cross_max", c.cross_max},
              {"hat_max", c.hat_max},
              {"omega_max", c.omega_max},
              {"weyl_upper", c.weyl_upper},
              {"weyl_lower", c.weyl_lower},
              {"cross_disc_lower", c.cross_disc_lower},
              {"cross_disc_upper", c.cross_disc_upper},
              {"hat_disc_upper", c.hat_disc_upper},
              {"spread_product", c.spread_product},
              {"spread_disc_upper", c.spread_disc_upper},
              {"chain_upper", c.chain_upper},
              {"chain_lower", c.chain_lower}};
}

json to_json(const BiasReport& report, const ClusterPartition& partition, bool include_blocks) {
  json j;
  j["pb"] = report.pb;
  j["lower_bound"] = report.lower_bound;
  j["upper_bound"] = report.upper_bound;
  json dir = json::array();
  for (double v : report.direction) dir.push_back(v);
  j["direction"] = dir;
  json clusters = json::array();
  for (std::size_t g = 0; g < report.clusters.size(); ++g) {
    const auto& cb = report.clusters[g];
    json c;
    c["cluster"] = partition.label(static_cast<Index>(g));
    c["definiteness"] = std::string(to_string(cb.definiteness));
    c["ratio_min"] = cb.ratio_min;
    c["ratio_max"] = cb.ratio_max;
    c["gershgorin"] = to_json(cb.chain);
    if (include_blocks) c["bias"] = matrix_to_json(cb.bias);
    clusters.push_back(std::move(c));
  }
  j["clusters"] = clusters;
  return j;
}

json config_to_json(const McConfig& config) {
  json est = json::array();
  for (auto k : config.estimators) est.push_back(std::string(to_string(k)));
  return json{{"n_units", config.n_units},
              {"n_periods", config.n_periods},
              {"dim_w", config.dim_w},
              {"beta", config.beta},
              {"ar_coef", config.ar_coef},
              {"innov_coef", config.innov_coef},
              {"gamma_range", {config.gamma_range.first, config.gamma_range.second}},
              {"reps", config.reps},
              {"null_value", config.null_value},
              {"nominal_size", config.nominal_size},
              {"estimators", est},
              {"bm_adjustment", std::string(to_string(config.bm_adjustment))},
              {"df_rule", std::string(to_string(config.df_rule))},
              {"scale_by_abs_x", config.scale_by_abs_x},
              {"freeze_gamma", config.freeze_gamma}};
}

json to_json(const McSummary& summary) {
  json j;
  j["rep_count"] = summary.rep_count;
  j["failed_reps"] = summary.failed_reps;
  j["true_variance"] = summary.true_variance;
  j["mean_beta"] = summary.mean_beta;
  const double n = static_cast<double>(summary.config.n_units * summary.config.n_periods);
  const double p = static_cast<double>(1 + summary.config.n_periods * summary.config.dim_w);
  j["n"] = static_cast<long>(n);
  j["p"] = static_cast<long>(p);
  j["p_over_n"] = p / n;
  json est = json::array();
  for (const auto& s : summary.estimators) {
    est.push_back({{"estimator", std::string(to_string(s.kind))},
                   {"bias", s.bias},
                   {"bias_se", s.bias_se},
                   {"variance", s.variance},
                   {"mse", s.mse},
                   {"mean_estimate", s.mean_estimate},
                   {"rejection_rate", s.rejection_rate},
                   {"valid_tests", s.valid_tests}});
  }
  j["estimators"] = est;
  return j;
}

std::string histogram_csv(const std::vector<HistogramBin>& bins) {
  std::ostringstream os;
  os.precision(17);
  os << "lower,upper,count\n";
  for (const auto& b : bins) os << b.lower << ',' << b.upper << ',' << b.count << '\n';
  return os.str();
}

std::string summary_csv(const McSummary& summary) {
  std::ostringstream os;
  os.precision(17);
  os << "estimator,bias,bias_se,variance,mse,rejection_rate\n";
  for (const auto& s : summary.estimators)
    os << to_string(s.kind) << ',' << s.bias << ',' << s.bias_se << ',' << s.variance << ','
       << s.mse << ',' << s.rejection_rate << '\n';
  return os.str();
}

void write_atomic(const std::string& path, std::string_view content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw DataError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw DataError("cannot move report into place at '" + path + "': " + ec.message());
  }
}

}  // namespace clustervar
