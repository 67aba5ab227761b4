#include "clustervar/montecarlo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "clustervar/error.hpp"
#include "clustervar/ols.hpp"

namespace clustervar {

void McConfig::validate() const {
  if (n_units < 1 || n_periods < 1 || dim_w < 1)
    throw InvalidArgument("n_units, n_periods and dim_w must be positive");
  if (!(std::abs(ar_coef) < 1.0)) throw InvalidArgument("|ar_coef| must be < 1");
  if (reps < 1) throw InvalidArgument("reps must be >= 1");
  if (!(nominal_size > 0.0 && nominal_size < 1.0))
    throw InvalidArgument("nominal_size must lie in (0, 1)");
  if (!(gamma_range.first <= gamma_range.second))
    throw InvalidArgument("gamma_range must be ordered");
  if (estimators.empty()) throw InvalidArgument("no estimators requested");
}

std::mt19937_64 replication_stream(std::uint64_t seed, std::uint64_t rep) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(rep), static_cast<std::uint32_t>(rep >> 32),
                    0x636c7573u};
  return std::mt19937_64(seq);
}

SimulatedSample simulate_dgp(const McConfig& config, std::size_t rep) {
  config.validate();
  const Index N = config.n_units;
  const Index T = config.n_periods;
  const Index D = config.dim_w;
  const Index n = N * T;

  auto rng = replication_stream(config.seed, rep);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(config.gamma_range.first,
                                                 config.gamma_range.second);

  Eigen::MatrixXd gamma(T, D);
  {
    auto gamma_rng =
        config.freeze_gamma ? replication_stream(config.seed, ~std::uint64_t{0}) : rng;
    for (Index t = 0; t < T; ++t)
      for (Index d = 0; d < D; ++d) gamma(t, d) = uniform(gamma_rng);
    if (!config.freeze_gamma) rng = gamma_rng;
  }

  RegressionProblem problem;
  problem.y.resize(n);
  problem.X.resize(n, 1);
  problem.W = Eigen::MatrixXd::Zero(n, T * D);
  Eigen::VectorXd errors(n);
  std::vector<Eigen::MatrixXd> blocks;
  blocks.reserve(static_cast<std::size_t>(N));
  std::vector<long> unit(static_cast<std::size_t>(n));

  for (Index i = 0; i < N; ++i) {
    // eps = L u, row t of L: L(t, t) = c s_t, L(t, s) = a s_t L(t-1, s).
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(T, T);
    double prev = 0.0;
    for (Index t = 0; t < T; ++t) {
      const Index obs = i * T + t;
      unit[static_cast<std::size_t>(obs)] = static_cast<long>(i);
      const double x = normal(rng);
      double signal = x * config.beta;
      for (Index d = 0; d < D; ++d) {
        const double w = normal(rng);
        problem.W(obs, t * D + d) = w;
        signal += w * gamma(t, d);
      }
      const double u = normal(rng);
      const double s = config.scale_by_abs_x ? std::abs(x) : 1.0;
      const double e = (config.ar_coef * prev + config.innov_coef * u) * s;
      if (t > 0) L.row(t).head(t) = config.ar_coef * s * L.row(t - 1).head(t);
      L(t, t) = config.innov_coef * s;
      prev = e;
      problem.X(obs, 0) = x;
      problem.y(obs) = signal + e;
      errors(obs) = e;
    }
    blocks.push_back(L * L.transpose());
  }
  problem.partition = ClusterPartition::from_codes(unit);
  OmegaSpec omega(problem.partition, std::move(blocks));
  return SimulatedSample{std::move(problem), std::move(errors), std::move(omega)};
}

const EstimatorSummary& McSummary::get(EstimatorKind kind) const {
  for (const auto& e : estimators)
    if (e.kind == kind) return e;
  throw InvalidArgument("estimator " + std::string(to_string(kind)) + " was not run");
}

namespace {

struct RepResult {
  bool failed = false;
  double beta = 0.0;
  double truth = 0.0;
  std::vector<RepOutcome> outcomes;
};

CovEstimate estimate(EstimatorKind kind, const McConfig& config, const OlsFit& fit,
                     const RegressionProblem& problem) {
  switch (kind) {
    case EstimatorKind::LZ: return lz_cov(fit, problem, {}, Exec::serial());
    case EstimatorKind::BM: return bm_cov(fit, problem, config.bm_adjustment, Exec::serial());
    case EstimatorKind::LCOC: return lcoc_cov(fit, problem, {}, Exec::serial());
    case EstimatorKind::ORACLE: break;
  }
  throw InvalidArgument("ORACLE is not a feasible estimator");
}

RepResult run_replication(const McConfig& config, std::size_t rep) {
  const SimulatedSample sample = simulate_dgp(config, rep);
  const OlsFit fit = fit_ols(sample.problem);
  RepResult res;
  res.beta = fit.beta(0);
  res.truth = oracle_cov(fit, sample.problem, sample.omega).matrix(0, 0);
  try {
    for (EstimatorKind kind : config.estimators) {
      const CovEstimate cov = estimate(kind, config, fit, sample.problem);
      RepOutcome out;
      out.estimate = cov.matrix(0, 0);
      out.truth = res.truth;
      if (out.estimate > 0.0) {
        const double stat = (fit.beta(0) - config.null_value) / std::sqrt(out.estimate);
        const double p = two_sided_p_value(stat, config.df_rule, fit.num_clusters);
        out.test_valid = true;
        out.rejected = p < config.nominal_size;
      }
      res.outcomes.push_back(out);
    }
  } catch (const ClusterNotLeaveOutIdentified&) {
    res.failed = true;
    res.outcomes.clear();
  }
  return res;
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : pairwise_sum(v) / static_cast<double>(v.size());
}

}  // namespace

McSummary run_experiment(const McConfig& config, Exec exec) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto results =
      parallel_map<RepResult>(config.reps, exec, [&](std::size_t rep) {
        try {
          return run_replication(config, rep);
        } catch (const ReplicationFailed&) {
          throw;
        } catch (const std::exception& e) {
          throw ReplicationFailed(rep, e.what());
        }
      });

  McSummary summary;
  summary.config = config;
  std::vector<double> truths;
  std::vector<double> betas;
  for (std::size_t rep = 0; rep < results.size(); ++rep) {
    if (results[rep].failed) {
      summary.failed_reps.push_back(rep);
      continue;
    }
    truths.push_back(results[rep].truth);
    betas.push_back(results[rep].beta);
  }
  summary.rep_count = truths.size();
  summary.true_variance = mean_of(truths);
  summary.mean_beta = mean_of(betas);

  for (std::size_t e = 0; e < config.estimators.size(); ++e) {
    EstimatorSummary s;
    s.kind = config.estimators[e];
    std::vector<double> errs;
    std::vector<double> ests;
    std::vector<double> rejects;
    for (const auto& r : results) {
      if (r.failed) continue;
      const RepOutcome& out = r.outcomes[e];
      s.outcomes.push_back(out);
      errs.push_back(out.estimate - out.truth);
      ests.push_back(out.estimate);
      if (out.test_valid) rejects.push_back(out.rejected ? 1.0 : 0.0);
    }
    const auto R = static_cast<double>(errs.size());
    s.bias = mean_of(errs);
    s.mean_estimate = mean_of(ests);
    std::vector<double> centered;
    std::vector<double> squared;
    for (double d : errs) {
      centered.push_back((d - s.bias) * (d - s.bias));
      squared.push_back(d * d);
    }
    s.variance = mean_of(centered);
    s.mse = mean_of(squared);
    s.bias_se = R > 1.0 ? std::sqrt(s.variance / (R - 1.0)) : 0.0;
    s.valid_tests = rejects.size();
    s.rejection_rate = mean_of(rejects);
    summary.estimators.push_back(std::move(s));
  }
  summary.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return summary;
}

double ks_distance_normal(std::vector<double> sample) {
  if (sample.empty()) throw InvalidArgument("empty sample");
  std::sort(sample.begin(), sample.end());
  const auto n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double cdf = 0.5 * std::erfc(-sample[i] / std::sqrt(2.0));
    d = std::max(d, static_cast<double>(i + 1) / n - cdf);
    d = std::max(d, cdf - static_cast<double>(i) / n);
  }
  return d;
}

NormalityResult normality_check(const McConfig& config, Index coord, Exec exec) {
  config.validate();
  const auto stats = parallel_map<double>(config.reps, exec, [&](std::size_t rep) {
    const SimulatedSample sample = simulate_dgp(config, rep);
    const OlsFit fit = fit_ols(sample.problem);
    if (coord < 0 || coord >= fit.beta.size())
      throw InvalidArgument("coordinate out of range");
    const double var = oracle_cov(fit, sample.problem, sample.omega).matrix(coord, coord);
    if (!(var > 0.0))
      throw DegenerateDistribution("exact variance of beta-hat is zero in replication " +
                                   std::to_string(rep));
    return (fit.beta(coord) - config.beta) / std::sqrt(var);
  });
  NormalityResult res;
  std::size_t covered = 0;
  for (double z : stats)
    if (std::abs(z) <= 1.959963984540054) ++covered;
  res.coverage = static_cast<double>(covered) / static_cast<double>(stats.size());
  res.ks_distance = ks_distance_normal(stats);
  res.statistics = stats;
  return res;
}

}  // namespace clustervar
