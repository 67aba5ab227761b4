#include "clustervar/partition.hpp"

#include <algorithm>
#include <map>

#include "clustervar/error.hpp"

namespace clustervar {

namespace {

struct Grouping {
  std::vector<Index> cluster_of;
  std::vector<std::vector<Index>> members;
  std::vector<std::string> labels;
};

// keys[i] is the cluster key of observation i; Key's operator< fixes cluster order.
template <typename Key>
Grouping group_by(std::span<const Key> keys, auto&& to_label) {
  std::map<Key, Index> number;
  for (const auto& k : keys) number.emplace(k, 0);
  Grouping out;
  Index next = 0;
  for (auto& [k, g] : number) {
    g = next++;
    out.labels.push_back(to_label(k));
  }
  out.members.resize(number.size());
  out.cluster_of.reserve(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const Index g = number.at(keys[i]);
    out.cluster_of.push_back(g);
    out.members[static_cast<std::size_t>(g)].push_back(static_cast<Index>(i));
  }
  return out;
}

}  // namespace

ClusterPartition::ClusterPartition(std::span<const std::string> labels) {
  auto grouping = group_by<std::string>(labels, [](const std::string& s) { return s; });
  cluster_of_ = std::move(grouping.cluster_of);
  members_ = std::move(grouping.members);
  labels_ = std::move(grouping.labels);
}

ClusterPartition ClusterPartition::from_codes(std::span<const long> codes) {
  auto grouping = group_by<long>(codes, [](long c) { return std::to_string(c); });
  ClusterPartition p;
  p.cluster_of_ = std::move(grouping.cluster_of);
  p.members_ = std::move(grouping.members);
  p.labels_ = std::move(grouping.labels);
  return p;
}

ClusterPartition ClusterPartition::from_sizes(std::span<const Index> sizes) {
  std::vector<long> codes;
  long g = 0;
  for (Index s : sizes) {
    if (s <= 0) throw InvalidArgument("cluster sizes must be positive");
    codes.insert(codes.end(), static_cast<std::size_t>(s), g++);
  }
  return from_codes(codes);
}

const std::vector<Index>& ClusterPartition::members(Index g) const {
  if (g < 0 || g >= num_clusters()) throw UnknownCluster("#" + std::to_string(g));
  return members_[static_cast<std::size_t>(g)];
}

const std::string& ClusterPartition::label(Index g) const {
  if (g < 0 || g >= num_clusters()) throw UnknownCluster("#" + std::to_string(g));
  return labels_[static_cast<std::size_t>(g)];
}

Index ClusterPartition::max_cluster_size() const {
  std::size_t m = 0;
  for (const auto& mem : members_) m = std::max(m, mem.size());
  return static_cast<Index>(m);
}

std::optional<Index> ClusterPartition::find(const std::string& label) const {
  // labels_ is sorted for string partitions but not necessarily for numeric codes.
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<Index>(it - labels_.begin());
}

Index ClusterPartition::index_of(const std::string& label) const {
  if (auto g = find(label)) return *g;
  throw UnknownCluster(label);
}

ClusterPartition ClusterPartition::subset(std::span<const Index> rows) const {
  std::vector<long> codes;
  codes.reserve(rows.size());
  for (Index i : rows) codes.push_back(static_cast<long>(cluster_of(i)));
  auto grouping = group_by<long>(std::span<const long>(codes), [this](long c) {
    return labels_[static_cast<std::size_t>(c)];
  });
  ClusterPartition p;
  p.cluster_of_ = std::move(grouping.cluster_of);
  p.members_ = std::move(grouping.members);
  p.labels_ = std::move(grouping.labels);
  return p;
}

}  // namespace clustervar
