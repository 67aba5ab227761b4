#ifndef CLUSTERVAR_OMEGA_HPP
#define CLUSTERVAR_OMEGA_HPP

#include <Eigen/Dense>
#include <vector>

#include "clustervar/partition.hpp"

namespace clustervar {

/// Block-diagonal error covariance: one symmetric PSD |g| x |g| block per
/// cluster, indexed like the partition's clusters. Within a block, rows follow
/// the cluster's member order (ascending observation index).
class OmegaSpec {
 public:
  /// Validates sizes (BlockShapeMismatch), symmetry and PSD-ness (NonPsdBlock).
  OmegaSpec(const ClusterPartition& partition, std::vector<Eigen::MatrixXd> blocks);

  static OmegaSpec scaled_identity(const ClusterPartition& partition, double sigma2);
  /// sigma2 on the diagonal, sigma2 * rho off it.
  static OmegaSpec equicorrelated(const ClusterPartition& partition, double sigma2, double rho);
  /// sigma2 * rho^|i - j| by within-cluster position.
  static OmegaSpec ar1(const ClusterPartition& partition, double sigma2, double rho);

  const Eigen::MatrixXd& block(Index g) const { return blocks_.at(static_cast<std::size_t>(g)); }
  Index num_blocks() const { return static_cast<Index>(blocks_.size()); }
  const std::vector<Eigen::MatrixXd>& blocks() const { return blocks_; }

  /// Largest eigenvalue over all blocks (= largest eigenvalue of the full Omega).
  double max_eigenvalue() const { return max_eigenvalue_; }

 private:
  std::vector<Eigen::MatrixXd> blocks_;
  double max_eigenvalue_ = 0.0;
};

}  // namespace clustervar

#endif  // CLUSTERVAR_OMEGA_HPP
