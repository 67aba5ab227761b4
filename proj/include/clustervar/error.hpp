#ifndef CLUSTERVAR_ERROR_HPP
#define CLUSTERVAR_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace clustervar {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed caller input (shapes, ranges, flags).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Problems with an input dataset; the CLI maps these to exit code 2.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Numerical failures; the CLI maps these to exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class NonFinite : public DataError {
 public:
  explicit NonFinite(const std::string& where)
      : DataError("non-finite value in " + where) {}
};

class MissingColumn : public DataError {
 public:
  explicit MissingColumn(const std::string& column)
      : DataError("missing column '" + column + "'"), column_(column) {}
  const std::string& column() const { return column_; }

 private:
  std::string column_;
};

class NonNumericCell : public DataError {
 public:
  NonNumericCell(std::size_t row, const std::string& column, const std::string& text)
      : DataError("non-numeric cell at row " + std::to_string(row) + ", column '" +
                  column + "': '" + text + "'"),
        row_(row),
        column_(column) {}
  std::size_t row() const { return row_; }
  const std::string& column() const { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

class EmptyFile : public DataError {
 public:
  explicit EmptyFile(const std::string& path) : DataError("empty file: " + path) {}
};

class DuplicateHeader : public DataError {
 public:
  explicit DuplicateHeader(const std::string& column)
      : DataError("duplicate header '" + column + "'") {}
};

class UnknownCluster : public InvalidArgument {
 public:
  explicit UnknownCluster(const std::string& label)
      : InvalidArgument("unknown cluster '" + label + "'") {}
};

class BlockShapeMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class NonPsdBlock : public InvalidArgument {
 public:
  NonPsdBlock(const std::string& cluster, double min_eigenvalue)
      : InvalidArgument("covariance block for cluster '" + cluster +
                        "' is not positive semidefinite (min eigenvalue " +
                        std::to_string(min_eigenvalue) + ")") {}
};

class RankDeficient : public NumericalError {
 public:
  RankDeficient(long rank, long needed)
      : NumericalError("design is rank deficient: rank " + std::to_string(rank) +
                       " < " + std::to_string(needed)),
        rank_(rank),
        needed_(needed) {}
  long rank() const { return rank_; }
  long needed() const { return needed_; }

 private:
  long rank_;
  long needed_;
};

class InsufficientDegreesOfFreedom : public NumericalError {
 public:
  InsufficientDegreesOfFreedom(long n, long p)
      : NumericalError("covariance estimation needs n > p, got n = " + std::to_string(n) +
                       ", p = " + std::to_string(p)) {}
};

/// The leave-cluster-out design is singular for this cluster: the annihilator
/// block has (numerically) zero eigenvalue.
class ClusterNotLeaveOutIdentified : public NumericalError {
 public:
  ClusterNotLeaveOutIdentified(const std::string& cluster, double lambda_min)
      : NumericalError("cluster '" + cluster +
                       "' is not identified when left out (min eigenvalue of annihilator "
                       "block = " +
                       std::to_string(lambda_min) + ")"),
        cluster_(cluster),
        lambda_min_(lambda_min) {}
  const std::string& cluster() const { return cluster_; }
  double lambda_min() const { return lambda_min_; }

 private:
  std::string cluster_;
  double lambda_min_;
};

class NonPositiveVariance : public NumericalError {
 public:
  NonPositiveVariance(long coord, double value)
      : NumericalError("variance of coordinate " + std::to_string(coord) +
                       " is not positive (" + std::to_string(value) + ")") {}
};

class ZeroDenominator : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SingularOmegaBlock : public NumericalError {
 public:
  SingularOmegaBlock(const std::string& cluster, double lambda_min)
      : NumericalError("covariance block for cluster '" + cluster +
                       "' is singular (min eigenvalue " + std::to_string(lambda_min) +
                       ")") {}
};

class DegenerateDistribution : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Wraps a failure raised inside one Monte Carlo replication.
class ReplicationFailed : public NumericalError {
 public:
  ReplicationFailed(std::size_t rep, const std::string& what)
      : NumericalError("replication " + std::to_string(rep) + ": " + what), rep_(rep) {}
  std::size_t rep() const { return rep_; }

 private:
  std::size_t rep_;
};

}  // namespace clustervar

#endif  // CLUSTERVAR_ERROR_HPP
