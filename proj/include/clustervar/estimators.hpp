#ifndef CLUSTERVAR_ESTIMATORS_HPP
#define CLUSTERVAR_ESTIMATORS_HPP

#include <Eigen/Dense>
#include <map>
#include <string>
#include <string_view>

#include "clustervar/ols.hpp"
#include "clustervar/omega.hpp"
#include "clustervar/parallel.hpp"

namespace clustervar {

enum class EstimatorKind { LZ, BM, LCOC, ORACLE };
enum class BmAdjustment { CR2, CR3 };
enum class DfRule { Normal, GMinus1 };

std::string_view to_string(EstimatorKind kind);
std::string_view to_string(BmAdjustment adj);
std::string_view to_string(DfRule rule);

/// Annihilator blocks with smallest eigenvalue at or below this are treated
/// as singular: the cluster is not identified when left out.
inline constexpr double kLeaveOutTol = 1e-10;

/// An r x r covariance matrix tagged with the estimator that produced it.
struct CovEstimate {
  Eigen::MatrixXd matrix;
  EstimatorKind kind = EstimatorKind::LZ;
  double min_eigenvalue = 0.0;
  bool is_psd = true;
  std::map<std::string, double> diagnostics;

  /// Symmetrizes m and fills min_eigenvalue / is_psd.
  static CovEstimate make(Eigen::MatrixXd m, EstimatorKind kind,
                          std::map<std::string, double> diagnostics = {});
};

struct TestResult {
  double estimate = 0.0;
  double std_error = 0.0;
  double statistic = 0.0;
  double p_value = 1.0;
  DfRule df_rule = DfRule::Normal;
};

struct LzOptions {
  /// Multiply by G/(G-1) * (n-1)/(n-p), as common software does. Off by default.
  bool small_sample = false;
};

struct LcocOptions {
  /// Average the two orderings of the cross-fit kernel (y u' + u y') / 2.
  /// Turning this off doubles the estimate; it exists for the unbiasedness check.
  bool halve_kernel = true;
};

/// Liang-Zeger plug-in: (V'V)^{-1} [sum_g V_g' u_g u_g' V_g] (V'V)^{-1}.
CovEstimate lz_cov(const OlsFit& fit, const RegressionProblem& problem, LzOptions opts = {},
                   Exec exec = {});

/// Bell-McCaffrey: residual blocks premultiplied by M_gg^{-1/2} (CR2) or
/// M_gg^{-1} (CR3) before the plug-in sandwich.
CovEstimate bm_cov(const OlsFit& fit, const RegressionProblem& problem,
                   BmAdjustment adjustment = BmAdjustment::CR2, Exec exec = {});

/// Residuals at cluster g of the fit that excludes cluster g, M_gg^{-1} u_g.
Eigen::VectorXd leave_cluster_out_residuals(const OlsFit& fit, const RegressionProblem& problem,
                                            Index g);

/// Coefficients (design order: gamma then beta) of the fit excluding cluster g,
/// by a rank-|g| downdate of the full fit.
Eigen::VectorXd leave_cluster_out_beta(const OlsFit& fit, const RegressionProblem& problem,
                                       Index g);

/// The leave-cluster-out cross-fit meat
///   (1/2n) sum_g [V_g' y_g e_g' V_g + V_g' e_g y_g' V_g],   e_g = M_gg^{-1} u_g,
/// whose conditional expectation is (1/n) sum_g V_g' Omega_g V_g. May be indefinite.
Eigen::MatrixXd lcoc_sigma(const OlsFit& fit, const RegressionProblem& problem,
                           LcocOptions opts = {}, Exec exec = {},
                           std::map<std::string, double>* diagnostics = nullptr);

/// Covariance of beta-hat from the cross-fit meat: Gamma^{-1} Sigma Gamma^{-1} / n.
CovEstimate lcoc_cov(const OlsFit& fit, const RegressionProblem& problem, LcocOptions opts = {},
                     Exec exec = {});

/// The infeasible meat (1/n) sum_g V_g' Omega_g V_g for a known Omega.
CovEstimate sigma_oracle(const OlsFit& fit, const RegressionProblem& problem,
                         const OmegaSpec& omega);

/// Exact conditional covariance of beta-hat for a known Omega.
CovEstimate oracle_cov(const OlsFit& fit, const RegressionProblem& problem,
                       const OmegaSpec& omega);

/// Gamma^{-1} sigma Gamma^{-1} / n.
Eigen::MatrixXd sandwich(const OlsFit& fit, const Eigen::MatrixXd& sigma);

/// Wald t-test of beta[coord] = null_value. The G-1 rule uses Student-t with
/// (number of clusters - 1) degrees of freedom.
TestResult t_test(const CovEstimate& cov, const OlsFit& fit, Index coord, double null_value = 0.0,
                  DfRule rule = DfRule::Normal);

/// Two-sided p-value of a t statistic.
double two_sided_p_value(double statistic, DfRule rule, Index num_clusters);

/// Smallest eigenvalue of each annihilator block, in cluster order.
Eigen::VectorXd annihilator_min_eigenvalues(const OlsFit& fit, const RegressionProblem& problem,
                                            Exec exec = {});

}  // namespace clustervar

#endif  // CLUSTERVAR_ESTIMATORS_HPP
