#ifndef CLUSTERVAR_MONTECARLO_HPP
#define CLUSTERVAR_MONTECARLO_HPP

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "clustervar/estimators.hpp"
#include "clustervar/omega.hpp"
#include "clustervar/parallel.hpp"
#include "clustervar/problem.hpp"

namespace clustervar {

/// Panel design with N units observed for T periods, one cluster per unit:
///   y_it = x_it beta + w_it' gamma_t + e_it,
///   e_it = (ar_coef e_i,t-1 + innov_coef u_it) |x_it|,   e_i,0 = 0,
/// with x_it, w_it, u_it iid N(0, 1) and gamma_t iid U[gamma_range]. The controls
/// enter as T * dim_w period-specific columns (w_it active only in period t).
struct McConfig {
  Index n_units = 50;
  Index n_periods = 20;
  Index dim_w = 9;
  double beta = 0.5;
  double ar_coef = 0.8;
  double innov_coef = 0.2;
  std::pair<double, double> gamma_range{-0.5, 0.5};
  std::size_t reps = 1000;
  std::uint64_t seed = 20220101;
  double null_value = 0.5;
  double nominal_size = 0.05;
  std::vector<EstimatorKind> estimators{EstimatorKind::LZ, EstimatorKind::BM,
                                        EstimatorKind::LCOC};
  BmAdjustment bm_adjustment = BmAdjustment::CR2;
  DfRule df_rule = DfRule::Normal;
  /// Scale each error by |x_it| (heteroskedastic). Off gives a homoskedastic AR(1).
  bool scale_by_abs_x = true;
  /// Draw gamma_t once from the base seed instead of once per replication.
  bool freeze_gamma = false;

  /// Throws InvalidArgument when an invariant fails.
  void validate() const;
};

struct SimulatedSample {
  RegressionProblem problem;
  Eigen::VectorXd errors;  ///< the realized e_it
  OmegaSpec omega;         ///< exact Cov(e | x) per unit
};

/// Random stream for replication `rep`; the same (seed, rep) always yields the
/// same stream regardless of scheduling.
std::mt19937_64 replication_stream(std::uint64_t seed, std::uint64_t rep);

SimulatedSample simulate_dgp(const McConfig& config, std::size_t rep);

/// Per-replication record for one estimator.
struct RepOutcome {
  double estimate = 0.0;     ///< estimated Var(beta-hat)
  double truth = 0.0;        ///< exact conditional Var(beta-hat)
  bool test_valid = false;   ///< t-test computable (positive variance)
  bool rejected = false;
};

struct EstimatorSummary {
  EstimatorKind kind = EstimatorKind::LZ;
  double bias = 0.0;           ///< mean of estimate - truth
  double bias_se = 0.0;        ///< Monte Carlo standard error of bias
  double variance = 0.0;       ///< population variance of estimate - truth
  double mse = 0.0;            ///< mean of (estimate - truth)^2
  double mean_estimate = 0.0;
  double rejection_rate = 0.0; ///< over replications with a valid test
  std::size_t valid_tests = 0;
  std::vector<RepOutcome> outcomes;  ///< by replication index
};

struct McSummary {
  McConfig config;
  std::vector<EstimatorSummary> estimators;
  double true_variance = 0.0;  ///< mean over replications of the exact variance
  double mean_beta = 0.0;
  std::size_t rep_count = 0;
  std::vector<std::size_t> failed_reps;  ///< leave-out unidentified, by index
  double elapsed_seconds = 0.0;

  const EstimatorSummary& get(EstimatorKind kind) const;
};

/// Runs every replication (in parallel over `exec`) and reduces in
/// replication order; the summary does not depend on the worker count apart
/// from elapsed_seconds.
McSummary run_experiment(const McConfig& config, Exec exec = {});

struct NormalityResult {
  double coverage = 0.0;      ///< share of |z| <= 1.959964
  double ks_distance = 0.0;   ///< sup |F_n - Phi|
  std::vector<double> statistics;
};

/// Collects z = (beta-hat - beta) / sqrt(exact variance) for focal coordinate
/// `coord` over the replications.
NormalityResult normality_check(const McConfig& config, Index coord = 0, Exec exec = {});

/// Kolmogorov-Smirnov distance between the empirical CDF of `sample` and N(0, 1).
double ks_distance_normal(std::vector<double> sample);

}  // namespace clustervar

#endif  // CLUSTERVAR_MONTECARLO_HPP
