#ifndef CLUSTERVAR_OLS_HPP
#define CLUSTERVAR_OLS_HPP

#include <Eigen/Dense>
#include <vector>

#include "clustervar/problem.hpp"

namespace clustervar {

/// OLS of y on the stacked design (W, X), with everything the covariance
/// estimators need kept alongside the coefficients.
///
/// The design is factored once as (W, X) P = Q R with column pivoting. All
/// hat-matrix quantities are products of row blocks of the thin factor Q:
///   H_{g,h} = Q_g Q_h',   h_ii = |q_i|^2,   (X'X)^{-1} X_g' = P R^{-1} Q_g'.
/// No n x n matrix and no explicit inverse is ever formed.
struct OlsFit {
  Eigen::VectorXd beta;          ///< focal coefficients (r)
  Eigen::VectorXd gamma;         ///< control coefficients (k)
  Eigen::VectorXd coefficients;  ///< (gamma, beta), in design column order
  Eigen::VectorXd residuals;     ///< full-sample residuals
  Eigen::MatrixXd vhat;          ///< X with the controls partialled out
  Eigen::VectorXd y_partialled;  ///< y with the controls partialled out
  Eigen::MatrixXd gamma_gram;    ///< vhat' vhat / n
  Eigen::VectorXd leverage;      ///< diagonal of the hat matrix of (W, X)
  Index rank = 0;
  Index num_clusters = 0;

  Eigen::MatrixXd q;  ///< n x p, orthonormal columns
  Eigen::MatrixXd r;  ///< p x p upper triangular
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic> perm;

  Index n() const { return q.rows(); }
  Index p() const { return q.cols(); }

  /// Rows of Q for the given observations.
  Eigen::MatrixXd q_rows(const std::vector<Index>& rows) const { return q(rows, Eigen::all); }

  /// (X'X)^{-1} X_rows' m, given Q_rows' m (p x c). Returns p x c in design order.
  Eigen::MatrixXd solve_r(const Eigen::MatrixXd& projected) const;

  /// (X'X)^{-1} w for a coefficient-space vector w (design order).
  Eigen::VectorXd gram_solve(const Eigen::VectorXd& w) const;
};

/// Throws RankDeficient when the numerical rank of (W, X) is below r + k. The
/// rank tolerance is max(n, p) * eps relative to the largest column norm.
OlsFit fit_ols(const RegressionProblem& problem);

/// I - H_{g,g}, the within-cluster block of the residual maker.
Eigen::MatrixXd annihilator_block(const OlsFit& fit, const RegressionProblem& problem, Index g);
Eigen::MatrixXd annihilator_block(const OlsFit& fit, const RegressionProblem& problem,
                                  const std::string& label);

/// H_{g,h} = X_g (X'X)^{-1} X_h'.
Eigen::MatrixXd hat_block(const OlsFit& fit, const RegressionProblem& problem, Index g,
                          Index h);
Eigen::MatrixXd hat_block(const OlsFit& fit, const RegressionProblem& problem,
                          const std::string& g, const std::string& h);

struct HistogramBin {
  double lower = 0.0;
  double upper = 0.0;
  Index count = 0;
};

/// Equal-width bins over [0, max h_ii]; bins are left-closed, the last one
/// also includes its right edge.
std::vector<HistogramBin> leverage_histogram(const OlsFit& fit, int bins);
std::vector<HistogramBin> histogram(const Eigen::VectorXd& values, int bins);

}  // namespace clustervar

#endif  // CLUSTERVAR_OLS_HPP
