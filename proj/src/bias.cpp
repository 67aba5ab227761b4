#include "clustervar/bias.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "clustervar/error.hpp"

namespace clustervar {

std::string_view to_string(Definiteness d) {
  switch (d) {
    case Definiteness::Zero: return "zero";
    case Definiteness::PositiveDefinite: return "positive_definite";
    case Definiteness::PositiveSemidefinite: return "positive_semidefinite";
    case Definiteness::NegativeDefinite: return "negative_definite";
    case Definiteness::NegativeSemidefinite: return "negative_semidefinite";
    case Definiteness::Indefinite: return "indefinite";
  }
  return "?";
}

Definiteness classify(const Eigen::MatrixXd& symmetric, double tol) {
  if (symmetric.size() == 0) return Definiteness::Zero;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetric, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues()(0);
  const double hi = eig.eigenvalues()(eig.eigenvalues().size() - 1);
  const double scale = std::max(std::abs(lo), std::abs(hi));
  if (scale == 0.0) return Definiteness::Zero;
  const double eps = tol * scale;
  if (lo > eps) return Definiteness::PositiveDefinite;
  if (hi < -eps) return Definiteness::NegativeDefinite;
  if (lo >= -eps) return Definiteness::PositiveSemidefinite;
  if (hi <= eps) return Definiteness::NegativeSemidefinite;
  return Definiteness::Indefinite;
}

namespace {

constexpr double kSingularTol = 1e-10;

std::pair<double, double> extreme_eigenvalues(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return {0.0, 0.0};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (m + m.transpose()),
                                                     Eigen::EigenvaluesOnly);
  return {eig.eigenvalues()(0), eig.eigenvalues()(eig.eigenvalues().size() - 1)};
}

// Gershgorin disc extremes: (min_i a_ii - R_i, max_i a_ii + R_i).
std::pair<double, double> disc_range(const Eigen::MatrixXd& a) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < a.rows(); ++i) {
    const double radius = a.row(i).cwiseAbs().sum() - std::abs(a(i, i));
    lo = std::min(lo, a(i, i) - radius);
    hi = std::max(hi, a(i, i) + radius);
  }
  return {lo, hi};
}

}  // namespace

BiasAnalyzer::BiasAnalyzer(const OlsFit& fit, const RegressionProblem& problem,
                           const OmegaSpec& omega)
    : fit_(fit), problem_(problem), omega_(omega) {
  const auto& part = problem.partition;
  if (omega.num_blocks() != part.num_clusters())
    throw BlockShapeMismatch("covariance has " + std::to_string(omega.num_blocks()) +
                             " blocks, partition has " + std::to_string(part.num_clusters()) +
                             " clusters");
  std::vector<Eigen::MatrixXd> terms;
  terms.reserve(static_cast<std::size_t>(part.num_clusters()));
  for (Index h = 0; h < part.num_clusters(); ++h) {
    if (omega.block(h).rows() != part.cluster_size(h))
      throw BlockShapeMismatch("covariance block size mismatch for cluster '" + part.label(h) +
                               "'");
    const Eigen::MatrixXd qh = fit.q_rows(part.members(h));
    terms.push_back(qh.transpose() * omega.block(h) * qh);
  }
  middle_ = pairwise_sum(terms);
}

Eigen::MatrixXd BiasAnalyzer::cluster_bias(Index g) const {
  const Eigen::MatrixXd qg = fit_.q_rows(problem_.partition.members(g));
  const Eigen::MatrixXd hgg = qg * qg.transpose();
  const auto& om = omega_.block(g);
  const Eigen::MatrixXd cross = hgg * om;
  Eigen::MatrixXd b = qg * middle_ * qg.transpose() - cross - cross.transpose();
  return 0.5 * (b + b.transpose());
}

double BiasAnalyzer::proportionate_bias(const Eigen::VectorXd& w) const {
  if (w.size() != fit_.p())
    throw InvalidArgument("direction has length " + std::to_string(w.size()) + ", expected " +
                          std::to_string(fit_.p()));
  if (w.isZero(0.0)) throw ZeroDenominator("direction vector is zero");
  // z = X (X'X)^{-1} w = Q R^{-T} P' w
  Eigen::VectorXd t = fit_.perm.transpose() * w;
  fit_.r.triangularView<Eigen::Upper>().transpose().solveInPlace(t);
  const Eigen::VectorXd z = fit_.q * t;

  const auto& part = problem_.partition;
  std::vector<double> num;
  std::vector<double> den;
  for (Index g = 0; g < part.num_clusters(); ++g) {
    const Eigen::VectorXd zg = z(part.members(g));
    num.push_back(zg.dot(cluster_bias(g) * zg));
    den.push_back(zg.dot(omega_.block(g) * zg));
  }
  const double numerator = pairwise_sum(num);
  const double denominator = pairwise_sum(den);
  const double floor = 1e-14 * z.squaredNorm() * omega_.max_eigenvalue();
  if (!(denominator > floor))
    throw ZeroDenominator("true variance of w'beta is zero for this direction");
  return numerator / denominator;
}

std::pair<double, double> BiasAnalyzer::ratio_eigen_range(Index g) const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(omega_.block(g));
  const double lo = eig.eigenvalues()(0);
  if (!(lo > kSingularTol)) throw SingularOmegaBlock(problem_.partition.label(g), lo);
  const Eigen::MatrixXd inv_sqrt =
      eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
      eig.eigenvectors().transpose();
  return extreme_eigenvalues(inv_sqrt * cluster_bias(g) * inv_sqrt);
}

std::pair<double, double> BiasAnalyzer::bounds(Exec exec) const {
  const auto ranges = parallel_map<std::pair<double, double>>(
      static_cast<std::size_t>(problem_.partition.num_clusters()), exec,
      [&](std::size_t g) { return ratio_eigen_range(static_cast<Index>(g)); });
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& [a, b] : ranges) {
    lo = std::min(lo, a);
    hi = std::max(hi, b);
  }
  return {lo, hi};
}

GershgorinChain BiasAnalyzer::gershgorin_chain(Index g) const {
  const Eigen::MatrixXd qg = fit_.q_rows(problem_.partition.members(g));
  const Eigen::MatrixXd hgg = qg * qg.transpose();
  const auto& om = omega_.block(g);
  const Eigen::MatrixXd spread = qg * middle_ * qg.transpose();
  const Eigen::MatrixXd cross = hgg * om + om * hgg;

  GershgorinChain c;
  std::tie(c.bias_min, c.bias_max) = extreme_eigenvalues(spread - cross);
  std::tie(c.spread_min, c.spread_max) = extreme_eigenvalues(spread);
  std::tie(c.cross_min, c.cross_max) = extreme_eigenvalues(cross);
  c.hat_max = extreme_eigenvalues(hgg).second;
  c.omega_max = omega_.max_eigenvalue();

  c.weyl_upper = c.spread_max - c.cross_min;
  c.weyl_lower = c.spread_min - c.cross_max;
  std::tie(c.cross_disc_lower, c.cross_disc_upper) = disc_range(cross);
  c.hat_disc_upper = disc_range(hgg).second;
  c.spread_product = c.hat_max * c.omega_max;
  c.spread_disc_upper = c.hat_disc_upper * c.omega_max;
  c.chain_upper = c.spread_disc_upper - c.cross_disc_lower;
  c.chain_lower = -c.cross_disc_upper;
  return c;
}

BiasReport BiasAnalyzer::report(const Eigen::VectorXd& w, Exec exec) const {
  BiasReport rep;
  rep.direction = w;
  rep.pb = proportionate_bias(w);
  rep.clusters = parallel_map<ClusterBias>(
      static_cast<std::size_t>(problem_.partition.num_clusters()), exec, [&](std::size_t gi) {
        const auto g = static_cast<Index>(gi);
        ClusterBias cb;
        cb.bias = cluster_bias(g);
        cb.definiteness = classify(cb.bias);
        std::tie(cb.ratio_min, cb.ratio_max) = ratio_eigen_range(g);
        cb.chain = gershgorin_chain(g);
        return cb;
      });
  rep.lower_bound = std::numeric_limits<double>::infinity();
  rep.upper_bound = -std::numeric_limits<double>::infinity();
  for (const auto& cb : rep.clusters) {
    rep.lower_bound = std::min(rep.lower_bound, cb.ratio_min);
    rep.upper_bound = std::max(rep.upper_bound, cb.ratio_max);
  }
  return rep;
}

Eigen::MatrixXd cluster_bias(const OlsFit& fit, const RegressionProblem& problem,
                             const OmegaSpec& omega, Index g) {
  problem.partition.members(g);  // UnknownCluster before the O(n p^2) setup
  return BiasAnalyzer(fit, problem, omega).cluster_bias(g);
}

double proportionate_bias(const OlsFit& fit, const RegressionProblem& problem,
                          const OmegaSpec& omega, const Eigen::VectorXd& w) {
  return BiasAnalyzer(fit, problem, omega).proportionate_bias(w);
}

std::pair<double, double> bias_bounds(const OlsFit& fit, const RegressionProblem& problem,
                                      const OmegaSpec& omega, Exec exec) {
  return BiasAnalyzer(fit, problem, omega).bounds(exec);
}

GershgorinChain gershgorin_chain(const OlsFit& fit, const RegressionProblem& problem,
                                 const OmegaSpec& omega, Index g) {
  problem.partition.members(g);
  return BiasAnalyzer(fit, problem, omega).gershgorin_chain(g);
}

Eigen::VectorXd focal_direction(const RegressionProblem& problem, Index coord) {
  if (coord < 0 || coord >= problem.r())
    throw InvalidArgument("focal coordinate " + std::to_string(coord) + " out of range");
  Eigen::VectorXd w = Eigen::VectorXd::Zero(problem.p());
  w(problem.k() + coord) = 1.0;
  return w;
}

}  // namespace clustervar
