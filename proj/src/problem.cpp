#include "clustervar/problem.hpp"

#include <string>

#include "clustervar/error.hpp"

namespace clustervar {

Eigen::MatrixXd RegressionProblem::design() const {
  Eigen::MatrixXd d(n(), p());
  d.leftCols(k()) = W;
  d.rightCols(r()) = X;
  return d;
}

void RegressionProblem::validate() const {
  const Index rows = n();
  if (rows == 0) throw InvalidArgument("empty problem");
  if (X.rows() != rows || W.rows() != rows)
    throw InvalidArgument("row count mismatch: y has " + std::to_string(rows) + ", X has " +
                          std::to_string(X.rows()) + ", W has " + std::to_string(W.rows()));
  if (partition.num_observations() != rows)
    throw InvalidArgument("partition covers " + std::to_string(partition.num_observations()) +
                          " observations, expected " + std::to_string(rows));
  if (r() == 0) throw InvalidArgument("no focal regressors");
  if (!y.allFinite()) throw NonFinite("y");
  if (!X.allFinite()) throw NonFinite("X");
  if (!W.allFinite()) throw NonFinite("W");
}

RegressionProblem RegressionProblem::subset(std::span<const Index> rows) const {
  RegressionProblem out;
  const auto m = static_cast<Index>(rows.size());
  out.y.resize(m);
  out.X.resize(m, r());
  out.W.resize(m, k());
  for (Index i = 0; i < m; ++i) {
    const Index src = rows[static_cast<std::size_t>(i)];
    out.y(i) = y(src);
    out.X.row(i) = X.row(src);
    out.W.row(i) = W.row(src);
  }
  out.partition = partition.subset(rows);
  return out;
}

}  // namespace clustervar
