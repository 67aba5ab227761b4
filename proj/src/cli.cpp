#include "clustervar/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <iostream>
#include <set>
#include <sstream>

#include "clustervar/bias.hpp"
#include "clustervar/dataset.hpp"
#include "clustervar/error.hpp"
#include "clustervar/estimators.hpp"
#include "clustervar/montecarlo.hpp"
#include "clustervar/ols.hpp"
#include "clustervar/report.hpp"

namespace clustervar {

namespace {

// Annihilator blocks below this (but above the hard leave-out tolerance) earn a warning.
constexpr double kNearSingularTol = 1e-6;

std::vector<std::string> split_list(const std::string& text, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

double parse_double(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw InvalidArgument("cannot parse " + what + " from '" + text + "'");
  }
}

struct DatasetFlags {
  std::string data, y, x, controls, cluster, absorb, interact_time;

  void add(CLI::App* cmd) {
    cmd->add_option("--data", data, "CSV file")->required();
    cmd->add_option("--y", y, "response column")->required();
    cmd->add_option("--x", x, "focal regressor columns, comma separated")->required();
    cmd->add_option("--controls", controls, "control columns, comma separated");
    cmd->add_option("--cluster", cluster, "cluster column")->required();
    cmd->add_option("--absorb", absorb, "fixed-effect column to sweep out by demeaning");
    cmd->add_option("--interact-time", interact_time,
                    "period column; controls get one slope per period");
  }

  DatasetSpec spec() const {
    DatasetSpec s;
    s.path = data;
    s.y_col = y;
    s.x_cols = split_list(x);
    s.w_cols = split_list(controls);
    s.cluster_col = cluster;
    if (!absorb.empty()) s.absorb_col = absorb;
    if (!interact_time.empty()) s.interact_time_col = interact_time;
    return s;
  }

  json echo() const {
    json j;
    j["data"] = data;
    j["y"] = y;
    j["x"] = split_list(x);
    j["controls"] = split_list(controls);
    j["cluster"] = cluster;
    j["absorb"] = absorb.empty() ? json(nullptr) : json(absorb);
    j["interact_time"] = interact_time.empty() ? json(nullptr) : json(interact_time);
    return j;
  }
};

LoadedDataset load(const DatasetFlags& flags, std::vector<std::string>& warnings) {
  LoadedDataset data = load_csv(flags.spec());
  for (auto& w : absorb_fixed_effects(data)) warnings.push_back(std::move(w));
  return data;
}

std::vector<EstimatorKind> parse_estimators(const std::string& text) {
  std::vector<EstimatorKind> out;
  for (auto item : split_list(text)) {
    std::transform(item.begin(), item.end(), item.begin(), ::tolower);
    EstimatorKind k;
    if (item == "lz")
      k = EstimatorKind::LZ;
    else if (item == "bm")
      k = EstimatorKind::BM;
    else if (item == "lcoc")
      k = EstimatorKind::LCOC;
    else
      throw InvalidArgument("unknown estimator '" + item + "'");
    if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
  }
  if (out.empty()) throw InvalidArgument("no estimator selected");
  return out;
}

BmAdjustment parse_bm(const std::string& text) {
  if (text == "cr2") return BmAdjustment::CR2;
  if (text == "cr3") return BmAdjustment::CR3;
  throw InvalidArgument("--bm-adjust must be cr2 or cr3");
}

std::vector<DfRule> parse_df(const std::string& text) {
  if (text.empty()) return {DfRule::Normal, DfRule::GMinus1};
  if (text == "normal") return {DfRule::Normal};
  if (text == "g-1") return {DfRule::GMinus1};
  throw InvalidArgument("--df must be normal or g-1");
}

json leverage_json(const OlsFit& fit, int bins) {
  json j;
  j["mean"] = fit.leverage.mean();
  j["max"] = fit.leverage.maxCoeff();
  j["histogram"] = to_json(leverage_histogram(fit, bins));
  return j;
}

json design_json(const OlsFit& fit, const RegressionProblem& problem) {
  json j;
  j["n"] = problem.n();
  j["p"] = problem.p();
  j["rank"] = fit.rank;
  j["clusters"] = problem.partition.num_clusters();
  j["p_over_n"] = static_cast<double>(fit.rank) / static_cast<double>(problem.n());
  return j;
}

void emit(const ReportEnvelope& env, const std::string& path, std::ostream& out) {
  if (path.empty())
    out << env.dump();
  else
    write_atomic(path, env.dump());
}

struct FitFlags {
  DatasetFlags data;
  std::string estimators = "lz,bm,lcoc";
  std::string bm_adjust = "cr2";
  std::string df;
  std::string out;
  std::string hist_csv;
  double null_value = 0.0;
  int bins = 20;
  bool lz_small_sample = false;
};

int cmd_fit(const FitFlags& f, Exec exec, std::ostream& out) {
  ReportEnvelope env;
  env.command = "fit";
  const auto kinds = parse_estimators(f.estimators);
  const BmAdjustment adj = parse_bm(f.bm_adjust);
  const auto rules = parse_df(f.df);
  env.config = f.data.echo();
  env.config["estimators"] = split_list(f.estimators);
  env.config["bm_adjust"] = f.bm_adjust;
  env.config["df"] = f.df.empty() ? json("both") : json(f.df);
  env.config["null_value"] = f.null_value;
  env.config["bins"] = f.bins;
  env.config["lz_small_sample"] = f.lz_small_sample;

  const LoadedDataset data = load(f.data, env.warnings);
  const RegressionProblem& problem = data.problem;
  const OlsFit fit = fit_ols(problem);

  env.results = design_json(fit, problem);
  json coefs = json::object();
  for (Index j = 0; j < problem.r(); ++j)
    coefs[data.x_names[static_cast<std::size_t>(j)]] = fit.beta(j);
  env.results["coefficients"] = coefs;

  const bool needs_leave_out =
      std::find_if(kinds.begin(), kinds.end(), [](EstimatorKind k) {
        return k != EstimatorKind::LZ;
      }) != kinds.end();
  if (needs_leave_out) {
    const Eigen::VectorXd lows = annihilator_min_eigenvalues(fit, problem, exec);
    for (Index g = 0; g < lows.size(); ++g)
      if (lows(g) > kLeaveOutTol && lows(g) < kNearSingularTol)
        env.warnings.push_back("cluster '" + problem.partition.label(g) +
                               "' is nearly unidentified when left out (min eigenvalue " +
                               std::to_string(lows(g)) + ")");
  }

  json estimates = json::object();
  for (EstimatorKind kind : kinds) {
    CovEstimate cov;
    switch (kind) {
      case EstimatorKind::LZ: cov = lz_cov(fit, problem, {f.lz_small_sample}, exec); break;
      case EstimatorKind::BM: cov = bm_cov(fit, problem, adj, exec); break;
      default: cov = lcoc_cov(fit, problem, {}, exec); break;
    }
    const std::string name(to_string(kind));
    if (!cov.is_psd)
      env.warnings.push_back(name + " covariance is not positive semidefinite (min eigenvalue " +
                             std::to_string(cov.min_eigenvalue) + ")");
    json e;
    e["covariance"] = to_json(cov);
    json coords = json::array();
    for (Index j = 0; j < problem.r(); ++j) {
      const std::string& coef = data.x_names[static_cast<std::size_t>(j)];
      const double var = cov.matrix(j, j);
      json c;
      c["coefficient"] = coef;
      c["estimate"] = fit.beta(j);
      c["std_error"] = var >= 0.0 ? json(std::sqrt(var)) : json(nullptr);
      json tests = json::object();
      for (DfRule rule : rules) {
        try {
          tests[std::string(to_string(rule))] = to_json(t_test(cov, fit, j, f.null_value, rule));
        } catch (const NonPositiveVariance&) {
          tests[std::string(to_string(rule))] = nullptr;
          if (rule == rules.front())
            env.warnings.push_back(name + " variance of '" + coef +
                                   "' is not positive; t-test skipped");
        }
      }
      c["tests"] = tests;
      coords.push_back(std::move(c));
    }
    e["coefficients"] = coords;
    estimates[name] = e;
  }
  env.results["estimators"] = estimates;
  env.results["leverage"] = leverage_json(fit, f.bins);
  if (!f.hist_csv.empty()) write_atomic(f.hist_csv, histogram_csv(leverage_histogram(fit, f.bins)));
  emit(env, f.out, out);
  return kExitOk;
}

struct McFlags {
  McConfig config;
  std::string estimators = "lz,bm,lcoc";
  std::string bm_adjust = "cr2";
  std::string df = "normal";
  std::string out;
  std::string summary_csv_path;
};

int cmd_mc(McFlags f, Exec exec, std::ostream& out, std::ostream& err) {
  f.config.estimators = parse_estimators(f.estimators);
  f.config.bm_adjustment = parse_bm(f.bm_adjust);
  const auto rules = parse_df(f.df);
  if (rules.size() != 1) throw InvalidArgument("mc needs a single --df rule");
  f.config.df_rule = rules.front();
  f.config.validate();

  ReportEnvelope env;
  env.command = "mc";
  env.config = config_to_json(f.config);
  env.seed = f.config.seed;
  const McSummary summary = run_experiment(f.config, exec);
  env.results = to_json(summary);
  for (std::size_t rep : summary.failed_reps)
    env.warnings.push_back("replication " + std::to_string(rep) +
                           " dropped: a cluster is not identified when left out");
  for (const auto& s : summary.estimators)
    if (s.valid_tests < summary.rep_count)
      env.warnings.push_back(std::string(to_string(s.kind)) + ": " +
                             std::to_string(summary.rep_count - s.valid_tests) +
                             " replications with non-positive variance excluded from rejection rate");
  err << "mc: " << summary.rep_count << " replications in " << summary.elapsed_seconds << " s\n";
  if (!f.summary_csv_path.empty()) write_atomic(f.summary_csv_path, summary_csv(summary));
  emit(env, f.out, out);
  return kExitOk;
}

struct BiasFlags {
  DatasetFlags data;
  std::string omega;
  std::string direction = "coord:0";
  std::string out;
  bool emit_blocks = false;
};

int cmd_bias(const BiasFlags& f, Exec exec, std::ostream& out) {
  ReportEnvelope env;
  env.command = "bias";
  env.config = f.data.echo();
  env.config["omega"] = f.omega;
  env.config["direction"] = f.direction;

  if (!f.direction.starts_with("coord:"))
    throw InvalidArgument("--direction must look like coord:INDEX");
  const double idx = parse_double(f.direction.substr(6), "direction index");
  if (idx < 0 || idx != std::floor(idx)) throw InvalidArgument("direction index must be >= 0");

  const LoadedDataset data = load(f.data, env.warnings);
  const RegressionProblem& problem = data.problem;
  const OlsFit fit = fit_ols(problem);
  const OmegaSpec omega = parse_omega(f.omega, problem.partition);
  const BiasAnalyzer analyzer(fit, problem, omega);
  const BiasReport report =
      analyzer.report(focal_direction(problem, static_cast<Index>(idx)), exec);

  env.results = design_json(fit, problem);
  env.results["coefficient"] = data.x_names.at(static_cast<std::size_t>(idx));
  env.results["bias"] = to_json(report, problem.partition, f.emit_blocks);
  for (std::size_t g = 0; g < report.clusters.size(); ++g)
    if (report.clusters[g].definiteness == Definiteness::Indefinite)
      env.warnings.push_back("bias block of cluster '" +
                             problem.partition.label(static_cast<Index>(g)) +
                             "' is indefinite");
  emit(env, f.out, out);
  return kExitOk;
}

struct LeverageFlags {
  DatasetFlags data;
  int bins = 20;
  std::string out;
  std::string hist_csv;
};

int cmd_leverage(const LeverageFlags& f, std::ostream& out) {
  ReportEnvelope env;
  env.command = "leverage";
  env.config = f.data.echo();
  env.config["bins"] = f.bins;
  const LoadedDataset data = load(f.data, env.warnings);
  const OlsFit fit = fit_ols(data.problem);
  env.results = design_json(fit, data.problem);
  env.results["leverage"] = leverage_json(fit, f.bins);
  if (!f.hist_csv.empty()) write_atomic(f.hist_csv, histogram_csv(leverage_histogram(fit, f.bins)));
  emit(env, f.out, out);
  return kExitOk;
}

}  // namespace

OmegaSpec parse_omega(const std::string& text, const ClusterPartition& partition) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw InvalidArgument("--omega must look like iid:s2, equi:s2,rho or ar1:s2,rho");
  const std::string family = text.substr(0, colon);
  const auto params = split_list(text.substr(colon + 1));
  std::vector<double> v;
  for (const auto& p : params) v.push_back(parse_double(p, "--omega parameter"));
  if (family == "iid" && v.size() == 1) return OmegaSpec::scaled_identity(partition, v[0]);
  if (family == "equi" && v.size() == 2) return OmegaSpec::equicorrelated(partition, v[0], v[1]);
  if (family == "ar1" && v.size() == 2) return OmegaSpec::ar1(partition, v[0], v[1]);
  throw InvalidArgument("unrecognized --omega '" + text + "'");
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cluster-robust variance estimation with many regressors", "clustervar"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker count (default: CLUSTERVAR_THREADS or all cores)");
  app.set_version_flag("--version", std::string(CLUSTERVAR_VERSION));

  FitFlags fit;
  auto* fit_cmd = app.add_subcommand("fit", "estimate coefficients and covariance estimators");
  fit.data.add(fit_cmd);
  fit_cmd->add_option("--estimator", fit.estimators, "lz,bm,lcoc (any subset)");
  fit_cmd->add_option("--bm-adjust", fit.bm_adjust, "cr2 or cr3");
  fit_cmd->add_option("--df", fit.df, "normal or g-1 (default: report both)");
  fit_cmd->add_option("--null", fit.null_value, "null value for t-tests");
  fit_cmd->add_option("--bins", fit.bins, "leverage histogram bins")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--hist-csv", fit.hist_csv, "write the leverage histogram as CSV");
  fit_cmd->add_flag("--lz-small-sample", fit.lz_small_sample,
                    "scale LZ by G/(G-1) (n-1)/(n-p)");
  fit_cmd->add_option("--out", fit.out, "report path (default: stdout)");

  McFlags mc;
  auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo comparison of the estimators");
  mc_cmd->add_option("--reps", mc.config.reps)->check(CLI::PositiveNumber);
  mc_cmd->add_option("--seed", mc.config.seed);
  mc_cmd->add_option("--n-units", mc.config.n_units)->check(CLI::PositiveNumber);
  mc_cmd->add_option("--t", mc.config.n_periods)->check(CLI::PositiveNumber);
  mc_cmd->add_option("--dim-w", mc.config.dim_w)->check(CLI::PositiveNumber);
  mc_cmd->add_option("--beta", mc.config.beta);
  mc_cmd->add_option("--ar", mc.config.ar_coef);
  mc_cmd->add_option("--innov", mc.config.innov_coef);
  mc_cmd->add_option("--null", mc.config.null_value);
  mc_cmd->add_option("--size", mc.config.nominal_size, "nominal test size");
  mc_cmd->add_option("--estimator", mc.estimators);
  mc_cmd->add_option("--bm-adjust", mc.bm_adjust);
  mc_cmd->add_option("--df", mc.df);
  mc_cmd->add_flag("--freeze-gamma", mc.config.freeze_gamma);
  mc_cmd->add_flag("!--heteroskedastic,!--homoskedastic", mc.config.scale_by_abs_x);
  mc_cmd->add_option("--summary-csv", mc.summary_csv_path);
  mc_cmd->add_option("--out", mc.out);

  BiasFlags bias;
  auto* bias_cmd = app.add_subcommand("bias", "finite-sample bias of the plug-in estimator");
  bias.data.add(bias_cmd);
  bias_cmd->add_option("--omega", bias.omega, "iid:s2 | equi:s2,rho | ar1:s2,rho")->required();
  bias_cmd->add_option("--direction", bias.direction, "coord:INDEX (focal coefficient)");
  bias_cmd->add_flag("--emit-blocks", bias.emit_blocks, "include every B_g matrix");
  bias_cmd->add_option("--out", bias.out);

  LeverageFlags lev;
  auto* lev_cmd = app.add_subcommand("leverage", "leverage summary and histogram");
  lev.data.add(lev_cmd);
  lev_cmd->add_option("--bins", lev.bins)->check(CLI::PositiveNumber);
  lev_cmd->add_option("--hist-csv", lev.hist_csv);
  lev_cmd->add_option("--out", lev.out);

  try {
    std::vector<std::string> rest(args.rbegin(), args.rend());
    if (!rest.empty()) rest.pop_back();
    app.parse(rest);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  Exec exec{threads > 0 ? threads : workers_from_env()};
  try {
    if (*fit_cmd) return cmd_fit(fit, exec, out);
    if (*mc_cmd) return cmd_mc(mc, exec, out, err);
    if (*bias_cmd) return cmd_bias(bias, exec, out);
    if (*lev_cmd) return cmd_leverage(lev, out);
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const InvalidArgument& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace clustervar
