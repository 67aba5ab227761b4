#ifndef CLUSTERVAR_DATASET_HPP
#define CLUSTERVAR_DATASET_HPP

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clustervar/problem.hpp"

namespace clustervar {

/// Which CSV columns play which role.
struct DatasetSpec {
  std::string path;
  std::string y_col;
  std::vector<std::string> x_cols;
  std::vector<std::string> w_cols;
  std::string cluster_col;
  std::optional<std::string> absorb_col;
  /// Expand every control into one column per period of this column, zero
  /// outside its own period (period-specific slopes).
  std::optional<std::string> interact_time_col;

  /// Throws InvalidArgument if a column is named in two roles.
  void validate() const;
};

/// Header plus string cells, as read.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Throws MissingColumn.
  std::size_t column(const std::string& name) const;
};

/// RFC 4180-style reader: comma separated, double-quoted fields, first row is
/// the header. Throws EmptyFile, DuplicateHeader, DataError (ragged rows).
CsvTable parse_csv(std::istream& in, const std::string& source = "<stream>");
CsvTable read_csv(const std::string& path);

struct LoadedDataset {
  RegressionProblem problem;
  std::vector<std::string> x_names;
  std::vector<std::string> w_names;
  /// Per-row absorb labels, empty unless the spec names an absorb column.
  std::vector<std::string> absorb_labels;
};

/// Rows stay in file order; cluster labels are taken verbatim.
LoadedDataset load_csv(const DatasetSpec& spec);
LoadedDataset load_table(const CsvTable& table, const DatasetSpec& spec);

struct WithinTransformed {
  RegressionProblem problem;
  std::vector<Index> kept_x;     ///< surviving columns of the input X
  std::vector<Index> kept_w;
  std::vector<Index> dropped_x;  ///< columns that demeaned to zero
  std::vector<Index> dropped_w;
  std::vector<std::string> singleton_groups;  ///< groups of size 1 (rows become zero)
};

/// Subtracts absorb-group means from y and every column of X and W. Columns
/// whose norm falls below 1e-12 times their original norm are dropped.
WithinTransformed within_transform(const RegressionProblem& problem,
                                   std::span<const std::string> absorb);

/// Applies within_transform to a loaded dataset, keeping column names in step.
/// Returns human-readable warnings for dropped columns and singleton groups.
std::vector<std::string> absorb_fixed_effects(LoadedDataset& data);

}  // namespace clustervar

#endif  // CLUSTERVAR_DATASET_HPP
