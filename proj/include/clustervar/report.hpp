#ifndef CLUSTERVAR_REPORT_HPP
#define CLUSTERVAR_REPORT_HPP

#include <json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "clustervar/bias.hpp"
#include "clustervar/estimators.hpp"
#include "clustervar/montecarlo.hpp"
#include "clustervar/ols.hpp"

namespace clustervar {

using json = nlohmann::ordered_json;

/// Top-level record every CLI command emits.
struct ReportEnvelope {
  std::string command;
  json config = json::object();
  std::string version = CLUSTERVAR_VERSION;
  std::optional<std::uint64_t> seed;
  json results = json::object();
  std::vector<std::string> warnings;

  json to_json() const;
  static ReportEnvelope from_json(const json& j);
  /// Pretty-printed JSON with a trailing newline.
  std::string dump() const;
};

json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const json& j);

json to_json(const CovEstimate& cov);
json to_json(const TestResult& t);
json to_json(const std::vector<HistogramBin>& bins);
json to_json(const GershgorinChain& c);
json to_json(const BiasReport& report, const ClusterPartition& partition, bool include_blocks);
json to_json(const McSummary& summary);
json config_to_json(const McConfig& config);

/// "lower,upper,count" rows with a header line.
std::string histogram_csv(const std::vector<HistogramBin>& bins);
/// One row per estimator: bias, variance, mse, rejection rate.
std::string summary_csv(const McSummary& summary);

/// Writes to a sibling temporary file and renames it over `path`.
void write_atomic(const std::string& path, std::string_view content);

}  // namespace clustervar

#endif  // CLUSTERVAR_REPORT_HPP
