#include "clustervar/estimators.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>

#include "clustervar/error.hpp"

namespace clustervar {

std::string_view to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::LZ: return "LZ";
    case EstimatorKind::BM: return "BM";
    case EstimatorKind::LCOC: return "LCOC";
    case EstimatorKind::ORACLE: return "ORACLE";
  }
  return "?";
}

std::string_view to_string(BmAdjustment adj) {
  return adj == BmAdjustment::CR2 ? "CR2" : "CR3";
}

std::string_view to_string(DfRule rule) {
  return rule == DfRule::Normal ? "normal" : "G-1";
}

namespace {

struct BlockEig {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

void require_residual_df(const OlsFit& fit) {
  if (fit.n() <= fit.p()) throw InsufficientDegreesOfFreedom(fit.n(), fit.p());
}

// Eigendecomposition of M_gg; throws when the cluster is not identified when left out.
BlockEig annihilator_eig(const OlsFit& fit, const RegressionProblem& problem, Index g) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(annihilator_block(fit, problem, g));
  const double lo = eig.eigenvalues()(0);
  if (!(lo > kLeaveOutTol))
    throw ClusterNotLeaveOutIdentified(problem.partition.label(g), lo);
  return {eig.eigenvalues(), eig.eigenvectors()};
}

// U f(L) U' x for the spectral function f.
template <typename F>
Eigen::VectorXd apply_spectral(const BlockEig& e, const Eigen::VectorXd& x, F&& f) {
  Eigen::VectorXd c = e.vectors.transpose() * x;
  for (Index i = 0; i < c.size(); ++i) c(i) *= f(e.values(i));
  return e.vectors * c;
}

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& m, const std::vector<Index>& rows) {
  return m(rows, Eigen::all);
}

Eigen::VectorXd rows_of(const Eigen::VectorXd& v, const std::vector<Index>& rows) {
  return v(rows);
}

// Bread^{-1} meat Bread^{-1} with Bread = V'V, via a Cholesky solve.
Eigen::MatrixXd apply_bread(const OlsFit& fit, const Eigen::MatrixXd& meat) {
  const Eigen::MatrixXd bread = fit.vhat.transpose() * fit.vhat;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(bread);
  const Eigen::MatrixXd left = ldlt.solve(meat);
  return ldlt.solve(left.transpose()).transpose();
}

struct MeatTerms {
  std::vector<Eigen::MatrixXd> terms;
  double min_lambda = std::numeric_limits<double>::infinity();
  double max_condition = 0.0;
};

// Per-cluster score outer products s_g s_g' with s_g = V_g' A_g u_g.
template <typename Adjust>
MeatTerms score_terms(const OlsFit& fit, const RegressionProblem& problem, Exec exec,
                      Adjust&& adjust) {
  struct Item {
    Eigen::MatrixXd term;
    double lo = std::numeric_limits<double>::infinity();
    double cond = 0.0;
  };
  const auto& part = problem.partition;
  auto items = parallel_map<Item>(
      static_cast<std::size_t>(part.num_clusters()), exec, [&](std::size_t gi) {
        const auto g = static_cast<Index>(gi);
        const auto& rows = part.members(g);
        Item item;
        Eigen::VectorXd u = rows_of(fit.residuals, rows);
        adjust(g, u, item.lo, item.cond);
        const Eigen::VectorXd s = rows_of(fit.vhat, rows).transpose() * u;
        item.term = s * s.transpose();
        return item;
      });
  MeatTerms out;
  out.terms.reserve(items.size());
  for (auto& it : items) {
    out.terms.push_back(std::move(it.term));
    out.min_lambda = std::min(out.min_lambda, it.lo);
    out.max_condition = std::max(out.max_condition, it.cond);
  }
  return out;
}

}  // namespace

CovEstimate CovEstimate::make(Eigen::MatrixXd m, EstimatorKind kind,
                              std::map<std::string, double> diagnostics) {
  CovEstimate c;
  c.matrix = 0.5 * (m + m.transpose());
  c.kind = kind;
  c.diagnostics = std::move(diagnostics);
  if (c.matrix.size() == 0) return c;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c.matrix, Eigen::EigenvaluesOnly);
  c.min_eigenvalue = eig.eigenvalues()(0);
  const double scale = eig.eigenvalues().cwiseAbs().maxCoeff();
  c.is_psd = c.min_eigenvalue >= -1e-10 * scale;
  return c;
}

CovEstimate lz_cov(const OlsFit& fit, const RegressionProblem& problem, LzOptions opts,
                   Exec exec) {
  require_residual_df(fit);
  auto meat = score_terms(fit, problem, exec, [](Index, Eigen::VectorXd&, double&, double&) {});
  Eigen::MatrixXd cov = apply_bread(fit, pairwise_sum(meat.terms));
  std::map<std::string, double> diag;
  if (opts.small_sample) {
    const double G = static_cast<double>(problem.partition.num_clusters());
    const double n = static_cast<double>(fit.n());
    const double p = static_cast<double>(fit.p());
    const double factor = G / (G - 1.0) * (n - 1.0) / (n - p);
    cov *= factor;
    diag["small_sample_factor"] = factor;
  }
  return CovEstimate::make(std::move(cov), EstimatorKind::LZ, std::move(diag));
}

CovEstimate bm_cov(const OlsFit& fit, const RegressionProblem& problem, BmAdjustment adjustment,
                   Exec exec) {
  require_residual_df(fit);
  auto meat = score_terms(
      fit, problem, exec, [&](Index g, Eigen::VectorXd& u, double& lo, double& cond) {
        const BlockEig e = annihilator_eig(fit, problem, g);
        lo = e.values(0);
        cond = e.values(e.values.size() - 1) / lo;
        if (adjustment == BmAdjustment::CR2)
          u = apply_spectral(e, u, [](double l) { return 1.0 / std::sqrt(l); });
        else
          u = apply_spectral(e, u, [](double l) { return 1.0 / l; });
      });
  Eigen::MatrixXd cov = apply_bread(fit, pairwise_sum(meat.terms));
  return CovEstimate::make(std::move(cov), EstimatorKind::BM,
                           {{"min_annihilator_eigenvalue", meat.min_lambda},
                            {"max_annihilator_condition", meat.max_condition}});
}

Eigen::VectorXd leave_cluster_out_residuals(const OlsFit& fit, const RegressionProblem& problem,
                                            Index g) {
  const BlockEig e = annihilator_eig(fit, problem, g);
  return apply_spectral(e, rows_of(fit.residuals, problem.partition.members(g)),
                        [](double l) { return 1.0 / l; });
}

Eigen::VectorXd leave_cluster_out_beta(const OlsFit& fit, const RegressionProblem& problem,
                                       Index g) {
  // beta_{-g} = beta - (X'X)^{-1} X_g' M_gg^{-1} u_g
  const auto& rows = problem.partition.members(g);
  const Eigen::VectorXd e = leave_cluster_out_residuals(fit, problem, g);
  const Eigen::VectorXd projected = fit.q_rows(rows).transpose() * e;
  return fit.coefficients - fit.solve_r(projected);
}

Eigen::MatrixXd lcoc_sigma(const OlsFit& fit, const RegressionProblem& problem, LcocOptions opts,
                           Exec exec, std::map<std::string, double>* diagnostics) {
  require_residual_df(fit);
  struct Item {
    Eigen::MatrixXd term;
    double lo = 0.0;
    double cond = 0.0;
  };
  const auto& part = problem.partition;
  auto items = parallel_map<Item>(
      static_cast<std::size_t>(part.num_clusters()), exec, [&](std::size_t gi) {
        const auto g = static_cast<Index>(gi);
        const auto& rows = part.members(g);
        const BlockEig eig = annihilator_eig(fit, problem, g);
        const Eigen::VectorXd e = apply_spectral(eig, rows_of(fit.residuals, rows),
                                                 [](double l) { return 1.0 / l; });
        const Eigen::MatrixXd vg = rows_of(fit.vhat, rows);
        const Eigen::VectorXd a = vg.transpose() * rows_of(problem.y, rows);
        const Eigen::VectorXd b = vg.transpose() * e;
        Item item;
        item.term = a * b.transpose() + b * a.transpose();
        item.lo = eig.values(0);
        item.cond = eig.values(eig.values.size() - 1) / item.lo;
        return item;
      });

  std::vector<Eigen::MatrixXd> terms;
  terms.reserve(items.size());
  double lo = std::numeric_limits<double>::infinity();
  double cond = 0.0;
  for (auto& it : items) {
    terms.push_back(std::move(it.term));
    lo = std::min(lo, it.lo);
    cond = std::max(cond, it.cond);
  }
  if (diagnostics != nullptr) {
    (*diagnostics)["min_annihilator_eigenvalue"] = lo;
    (*diagnostics)["max_annihilator_condition"] = cond;
  }
  const double scale = (opts.halve_kernel ? 0.5 : 1.0) / static_cast<double>(fit.n());
  return scale * pairwise_sum(terms);
}

Eigen::MatrixXd sandwich(const OlsFit& fit, const Eigen::MatrixXd& sigma) {
  // Gamma^{-1} Sigma Gamma^{-1} / n = (V'V)^{-1} (n Sigma) (V'V)^{-1}
  return apply_bread(fit, static_cast<double>(fit.n()) * sigma);
}

CovEstimate lcoc_cov(const OlsFit& fit, const RegressionProblem& problem, LcocOptions opts,
                     Exec exec) {
  std::map<std::string, double> diag;
  const Eigen::MatrixXd sigma = lcoc_sigma(fit, problem, opts, exec, &diag);
  return CovEstimate::make(sandwich(fit, sigma), EstimatorKind::LCOC, std::move(diag));
}

namespace {

Eigen::MatrixXd oracle_meat(const OlsFit& fit, const RegressionProblem& problem,
                            const OmegaSpec& omega) {
  const auto& part = problem.partition;
  if (omega.num_blocks() != part.num_clusters())
    throw BlockShapeMismatch("covariance has " + std::to_string(omega.num_blocks()) +
                             " blocks, partition has " + std::to_string(part.num_clusters()) +
                             " clusters");
  std::vector<Eigen::MatrixXd> terms;
  terms.reserve(static_cast<std::size_t>(part.num_clusters()));
  for (Index g = 0; g < part.num_clusters(); ++g) {
    const auto& rows = part.members(g);
    const auto& block = omega.block(g);
    if (block.rows() != static_cast<Index>(rows.size()))
      throw BlockShapeMismatch("covariance block size mismatch for cluster '" + part.label(g) +
                               "'");
    const Eigen::MatrixXd vg = rows_of(fit.vhat, rows);
    terms.push_back(vg.transpose() * block * vg);
  }
  return pairwise_sum(terms) / static_cast<double>(fit.n());
}

}  // namespace

CovEstimate sigma_oracle(const OlsFit& fit, const RegressionProblem& problem,
                         const OmegaSpec& omega) {
  return CovEstimate::make(oracle_meat(fit, problem, omega), EstimatorKind::ORACLE);
}

CovEstimate oracle_cov(const OlsFit& fit, const RegressionProblem& problem,
                       const OmegaSpec& omega) {
  return CovEstimate::make(sandwich(fit, oracle_meat(fit, problem, omega)),
                           EstimatorKind::ORACLE);
}

double two_sided_p_value(double statistic, DfRule rule, Index num_clusters) {
  const double t = std::abs(statistic);
  if (rule == DfRule::Normal) return std::erfc(t / std::sqrt(2.0));
  if (num_clusters < 2)
    throw InvalidArgument("G-1 degrees of freedom need at least two clusters");
  const boost::math::students_t dist(static_cast<double>(num_clusters - 1));
  return 2.0 * boost::math::cdf(boost::math::complement(dist, t));
}

TestResult t_test(const CovEstimate& cov, const OlsFit& fit, Index coord, double null_value,
                  DfRule rule) {
  if (coord < 0 || coord >= fit.beta.size())
    throw InvalidArgument("coordinate " + std::to_string(coord) + " out of range");
  const double var = cov.matrix(coord, coord);
  if (!(var > 0.0)) throw NonPositiveVariance(coord, var);
  TestResult res;
  res.estimate = fit.beta(coord);
  res.std_error = std::sqrt(var);
  res.statistic = (res.estimate - null_value) / res.std_error;
  res.p_value = std::clamp(two_sided_p_value(res.statistic, rule, fit.num_clusters), 0.0, 1.0);
  res.df_rule = rule;
  return res;
}

Eigen::VectorXd annihilator_min_eigenvalues(const OlsFit& fit, const RegressionProblem& problem,
                                            Exec exec) {
  const auto los = parallel_map<double>(
      static_cast<std::size_t>(problem.partition.num_clusters()), exec, [&](std::size_t g) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
            annihilator_block(fit, problem, static_cast<Index>(g)), Eigen::EigenvaluesOnly);
        return eig.eigenvalues()(0);
      });
  return Eigen::Map<const Eigen::VectorXd>(los.data(), static_cast<Index>(los.size()));
}

}  // namespace clustervar
