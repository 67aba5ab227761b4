#ifndef CLUSTERVAR_PARTITION_HPP
#define CLUSTERVAR_PARTITION_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace clustervar {

using Index = std::ptrdiff_t;

/// Assignment of observations 0..n-1 to clusters.
///
/// Clusters are numbered 0..G-1 in a fixed order (lexicographic by label for
/// string labels, numeric for integer codes). Every per-cluster reduction in
/// the library walks clusters in this order, so results do not depend on the
/// row order of the input. Member lists are ascending in observation index.
class ClusterPartition {
 public:
  ClusterPartition() = default;

  /// One label per observation; cluster order is lexicographic by label.
  explicit ClusterPartition(std::span<const std::string> labels);

  /// Integer cluster codes, ordered numerically.
  static ClusterPartition from_codes(std::span<const long> codes);

  /// Consecutive blocks of the given sizes (0..s0-1, s0..s0+s1-1, ...).
  static ClusterPartition from_sizes(std::span<const Index> sizes);

  Index num_observations() const { return static_cast<Index>(cluster_of_.size()); }
  Index num_clusters() const { return static_cast<Index>(members_.size()); }

  const std::vector<Index>& members(Index g) const;
  Index cluster_size(Index g) const { return static_cast<Index>(members(g).size()); }
  Index max_cluster_size() const;
  const std::string& label(Index g) const;
  /// Cluster number of observation i.
  Index cluster_of(Index i) const { return cluster_of_.at(static_cast<std::size_t>(i)); }

  std::optional<Index> find(const std::string& label) const;
  /// Like find(), but throws UnknownCluster.
  Index index_of(const std::string& label) const;

  /// Restriction to the listed observations, renumbered 0..m-1 in list order.
  ClusterPartition subset(std::span<const Index> rows) const;

 private:
  std::vector<Index> cluster_of_;
  std::vector<std::vector<Index>> members_;
  std::vector<std::string> labels_;
};

}  // namespace clustervar

#endif  // CLUSTERVAR_PARTITION_HPP
