#ifndef CLUSTERVAR_BIAS_HPP
#define CLUSTERVAR_BIAS_HPP

#include <Eigen/Dense>
#include <string_view>
#include <vector>

#include "clustervar/ols.hpp"
#include "clustervar/omega.hpp"
#include "clustervar/parallel.hpp"

namespace clustervar {

/// Finite-sample bias of the plug-in cluster covariance for a known Omega.
///
/// For cluster g the plug-in residual outer product u_g u_g' has bias
///   B_g = H_g Omega H_g' - (H_gg Omega_g + Omega_g H_gg),
/// where H_g is the g row block of the hat matrix. The first term is assembled
/// as Q_g C Q_g' with C = sum_h Q_h' Omega_h Q_h (p x p), computed once.

enum class Definiteness {
  Zero,
  PositiveDefinite,
  PositiveSemidefinite,
  NegativeDefinite,
  NegativeSemidefinite,
  Indefinite,
};

std::string_view to_string(Definiteness d);

/// Classifies a symmetric matrix from its extreme eigenvalues, with tolerance
/// tol relative to the largest absolute eigenvalue.
Definiteness classify(const Eigen::MatrixXd& symmetric, double tol = 1e-10);

/// Bounds on the largest (and smallest) eigenvalue of B_g obtained by Weyl's
/// inequality and Gershgorin discs, next to the exact eigenvalues they bound.
struct GershgorinChain {
  // exact quantities
  double bias_max = 0.0;     ///< lambda_max(B_g)
  double bias_min = 0.0;     ///< lambda_min(B_g)
  double spread_max = 0.0;   ///< lambda_max(H_g Omega H_g')
  double spread_min = 0.0;   ///< lambda_min(H_g Omega H_g')
  double cross_min = 0.0;    ///< lambda_min(H_gg Omega_g + Omega_g H_gg)
  double cross_max = 0.0;    ///< lambda_max(H_gg Omega_g + Omega_g H_gg)
  double hat_max = 0.0;      ///< lambda_max(H_gg)
  double omega_max = 0.0;    ///< lambda_max(Omega), over all clusters

  // bounds
  double weyl_upper = 0.0;          ///< spread_max - cross_min >= bias_max
  double weyl_lower = 0.0;          ///< spread_min - cross_max <= bias_min
  double cross_disc_lower = 0.0;    ///< Gershgorin lower bound on cross_min
  double cross_disc_upper = 0.0;    ///< Gershgorin upper bound on cross_max
  double hat_disc_upper = 0.0;      ///< max_i (H_ii + sum_{j!=i} |H_ij|) >= hat_max
  double spread_product = 0.0;      ///< hat_max * omega_max >= spread_max
  double spread_disc_upper = 0.0;   ///< hat_disc_upper * omega_max >= spread_product
  double chain_upper = 0.0;         ///< spread_disc_upper - cross_disc_lower >= weyl_upper
  double chain_lower = 0.0;         ///< -cross_disc_upper <= weyl_lower
};

struct ClusterBias {
  Eigen::MatrixXd bias;              ///< B_g
  Definiteness definiteness = Definiteness::Zero;
  double ratio_min = 0.0;            ///< lambda_min(B_g Omega_g^{-1})
  double ratio_max = 0.0;            ///< lambda_max(B_g Omega_g^{-1})
  GershgorinChain chain;
};

struct BiasReport {
  std::vector<ClusterBias> clusters;  ///< in cluster order
  Eigen::VectorXd direction;          ///< w, in design column order
  double pb = 0.0;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
};

/// Holds the p x p middle matrix C so per-cluster quantities cost O(|g| p^2).
/// Keeps references to fit, problem and omega; they must outlive it.
class BiasAnalyzer {
 public:
  BiasAnalyzer(const OlsFit& fit, const RegressionProblem& problem, const OmegaSpec& omega);

  Eigen::MatrixXd cluster_bias(Index g) const;
  /// Ratio of sum_g z_g' B_g z_g to sum_g z_g' Omega_g z_g, z = X (X'X)^{-1} w.
  double proportionate_bias(const Eigen::VectorXd& w) const;
  /// Extreme eigenvalues of B_g Omega_g^{-1}, via Omega_g^{-1/2} B_g Omega_g^{-1/2}.
  std::pair<double, double> ratio_eigen_range(Index g) const;
  /// (min over clusters of the smallest, max over clusters of the largest).
  std::pair<double, double> bounds(Exec exec = {}) const;
  GershgorinChain gershgorin_chain(Index g) const;
  BiasReport report(const Eigen::VectorXd& w, Exec exec = {}) const;

 private:
  const OlsFit& fit_;
  const RegressionProblem& problem_;
  const OmegaSpec& omega_;
  Eigen::MatrixXd middle_;
};

Eigen::MatrixXd cluster_bias(const OlsFit& fit, const RegressionProblem& problem,
                             const OmegaSpec& omega, Index g);
double proportionate_bias(const OlsFit& fit, const RegressionProblem& problem,
                          const OmegaSpec& omega, const Eigen::VectorXd& w);
std::pair<double, double> bias_bounds(const OlsFit& fit, const RegressionProblem& problem,
                                      const OmegaSpec& omega, Exec exec = {});
GershgorinChain gershgorin_chain(const OlsFit& fit, const RegressionProblem& problem,
                                 const OmegaSpec& omega, Index g);

/// Unit vector selecting focal coefficient `coord` in design column order.
Eigen::VectorXd focal_direction(const RegressionProblem& problem, Index coord);

}  // namespace clustervar

#endif  // CLUSTERVAR_BIAS_HPP
