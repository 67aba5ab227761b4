#ifndef CLUSTERVAR_PROBLEM_HPP
#define CLUSTERVAR_PROBLEM_HPP

#include <Eigen/Dense>

#include "clustervar/partition.hpp"

namespace clustervar {

/// y = X beta + W gamma + u with cluster-dependent errors.
///
/// X holds the r focal regressors whose coefficients are the inference target;
/// W holds the k nuisance controls. The stacked design is (W, X).
struct RegressionProblem {
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  Eigen::MatrixXd W;
  ClusterPartition partition;

  Index n() const { return y.size(); }
  Index r() const { return X.cols(); }
  Index k() const { return W.cols(); }
  Index p() const { return X.cols() + W.cols(); }

  /// (W, X), n x (k + r).
  Eigen::MatrixXd design() const;

  /// Throws InvalidArgument on shape mismatch, NonFinite on NaN/Inf.
  void validate() const;

  /// The problem restricted to the given rows (in the given order).
  RegressionProblem subset(std::span<const Index> rows) const;
};

}  // namespace clustervar

#endif  // CLUSTERVAR_PROBLEM_HPP
