#include "clustervar/omega.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "clustervar/error.hpp"

namespace clustervar {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kPsdTol = 1e-10;

template <typename Entry>
OmegaSpec from_entries(const ClusterPartition& partition, Entry&& entry) {
  std::vector<Eigen::MatrixXd> blocks;
  blocks.reserve(static_cast<std::size_t>(partition.num_clusters()));
  for (Index g = 0; g < partition.num_clusters(); ++g) {
    const Index m = partition.cluster_size(g);
    Eigen::MatrixXd b(m, m);
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < m; ++j) b(i, j) = entry(i, j);
    blocks.push_back(std::move(b));
  }
  return OmegaSpec(partition, std::move(blocks));
}

}  // namespace

OmegaSpec::OmegaSpec(const ClusterPartition& partition, std::vector<Eigen::MatrixXd> blocks)
    : blocks_(std::move(blocks)) {
  if (static_cast<Index>(blocks_.size()) != partition.num_clusters())
    throw BlockShapeMismatch("expected " + std::to_string(partition.num_clusters()) +
                             " covariance blocks, got " + std::to_string(blocks_.size()));
  for (Index g = 0; g < partition.num_clusters(); ++g) {
    const auto& b = blocks_[static_cast<std::size_t>(g)];
    const Index m = partition.cluster_size(g);
    if (b.rows() != m || b.cols() != m)
      throw BlockShapeMismatch("block for cluster '" + partition.label(g) + "' is " +
                               std::to_string(b.rows()) + "x" + std::to_string(b.cols()) +
                               ", cluster has " + std::to_string(m) + " members");
    if (!b.allFinite()) throw NonFinite("covariance block '" + partition.label(g) + "'");
    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    if ((b - b.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale)
      throw BlockShapeMismatch("block for cluster '" + partition.label(g) +
                               "' is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues()(0);
    if (lo < -kPsdTol * scale) throw NonPsdBlock(partition.label(g), lo);
    max_eigenvalue_ = std::max(max_eigenvalue_, eig.eigenvalues()(m - 1));
  }
}

OmegaSpec OmegaSpec::scaled_identity(const ClusterPartition& partition, double sigma2) {
  return from_entries(partition, [=](Index i, Index j) { return i == j ? sigma2 : 0.0; });
}

OmegaSpec OmegaSpec::equicorrelated(const ClusterPartition& partition, double sigma2,
                                    double rho) {
  return from_entries(partition,
                      [=](Index i, Index j) { return i == j ? sigma2 : sigma2 * rho; });
}

OmegaSpec OmegaSpec::ar1(const ClusterPartition& partition, double sigma2, double rho) {
  return from_entries(partition, [=](Index i, Index j) {
    return sigma2 * std::pow(rho, static_cast<double>(std::abs(i - j)));
  });
}

}  // namespace clustervar
