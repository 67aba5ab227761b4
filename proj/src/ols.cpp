#include "clustervar/ols.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "clustervar/error.hpp"

namespace clustervar {

namespace {

Eigen::ColPivHouseholderQR<Eigen::MatrixXd> factor(const Eigen::MatrixXd& a) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a.rows(), a.cols());
  const double n = static_cast<double>(std::max(a.rows(), a.cols()));
  qr.setThreshold(n * std::numeric_limits<double>::epsilon());
  qr.compute(a);
  return qr;
}

template <typename QR>
Eigen::MatrixXd thin_q(const QR& qr) {
  const Index n = qr.rows();
  const Index p = qr.cols();
  Eigen::MatrixXd q = Eigen::MatrixXd::Identity(n, p);
  q.applyOnTheLeft(qr.householderQ());
  return q;
}

}  // namespace

Eigen::MatrixXd OlsFit::solve_r(const Eigen::MatrixXd& projected) const {
  Eigen::MatrixXd sol = r.triangularView<Eigen::Upper>().solve(projected);
  return perm * sol;
}

Eigen::VectorXd OlsFit::gram_solve(const Eigen::VectorXd& w) const {
  // (X'X)^{-1} = P R^{-1} R^{-T} P'
  Eigen::VectorXd t = perm.transpose() * w;
  r.triangularView<Eigen::Upper>().transpose().solveInPlace(t);
  r.triangularView<Eigen::Upper>().solveInPlace(t);
  return perm * t;
}

OlsFit fit_ols(const RegressionProblem& problem) {
  problem.validate();
  const Index n = problem.n();
  const Index p = problem.p();
  const Index k = problem.k();

  const Eigen::MatrixXd design = problem.design();
  const auto qr = factor(design);
  if (qr.rank() < p) throw RankDeficient(qr.rank(), p);

  OlsFit fit;
  fit.rank = qr.rank();
  fit.num_clusters = problem.partition.num_clusters();
  fit.q = thin_q(qr);
  fit.r = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  fit.perm = qr.colsPermutation();

  const Eigen::VectorXd qty = fit.q.transpose() * problem.y;
  fit.coefficients = fit.solve_r(qty);
  fit.gamma = fit.coefficients.head(k);
  fit.beta = fit.coefficients.tail(problem.r());
  fit.residuals = problem.y - fit.q * qty;
  fit.leverage = fit.q.rowwise().squaredNorm();

  if (k > 0) {
    // W has full column rank once (W, X) does, so no pivoting is needed here.
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr_w(problem.W);
    const Eigen::MatrixXd qw = thin_q(qr_w);
    fit.vhat = problem.X - qw * (qw.transpose() * problem.X);
    fit.y_partialled = problem.y - qw * (qw.transpose() * problem.y);
  } else {
    fit.vhat = problem.X;
    fit.y_partialled = problem.y;
  }
  fit.gamma_gram = (fit.vhat.transpose() * fit.vhat) / static_cast<double>(n);
  return fit;
}

Eigen::MatrixXd annihilator_block(const OlsFit& fit, const RegressionProblem& problem,
                                  Index g) {
  const auto& rows = problem.partition.members(g);
  const Eigen::MatrixXd qg = fit.q_rows(rows);
  const auto m = static_cast<Index>(rows.size());
  Eigen::MatrixXd block = Eigen::MatrixXd::Identity(m, m);
  block.noalias() -= qg * qg.transpose();
  return block;
}

Eigen::MatrixXd annihilator_block(const OlsFit& fit, const RegressionProblem& problem,
                                  const std::string& label) {
  return annihilator_block(fit, problem, problem.partition.index_of(label));
}

Eigen::MatrixXd hat_block(const OlsFit& fit, const RegressionProblem& problem, Index g,
                          Index h) {
  const Eigen::MatrixXd qg = fit.q_rows(problem.partition.members(g));
  if (g == h) return qg * qg.transpose();
  return qg * fit.q_rows(problem.partition.members(h)).transpose();
}

Eigen::MatrixXd hat_block(const OlsFit& fit, const RegressionProblem& problem,
                          const std::string& g, const std::string& h) {
  return hat_block(fit, problem, problem.partition.index_of(g), problem.partition.index_of(h));
}

std::vector<HistogramBin> histogram(const Eigen::VectorXd& values, int bins) {
  if (bins < 1) throw InvalidArgument("bins must be >= 1");
  const double top = values.size() > 0 ? std::max(values.maxCoeff(), 0.0) : 0.0;
  const double width = top / bins;
  std::vector<HistogramBin> out(static_cast<std::size_t>(bins));
  for (int b = 0; b < bins; ++b) {
    out[static_cast<std::size_t>(b)].lower = width * b;
    out[static_cast<std::size_t>(b)].upper = b + 1 == bins ? top : width * (b + 1);
  }
  for (double v : values) {
    int b = width > 0.0 ? static_cast<int>(std::floor(v / width)) : 0;
    b = std::clamp(b, 0, bins - 1);
    // floor() can land one bin high or low right at an edge.
    while (b > 0 && v < out[static_cast<std::size_t>(b)].lower) --b;
    while (b + 1 < bins && v >= out[static_cast<std::size_t>(b + 1)].lower) ++b;
    ++out[static_cast<std::size_t>(b)].count;
  }
  return out;
}

std::vector<HistogramBin> leverage_histogram(const OlsFit& fit, int bins) {
  return histogram(fit.leverage, bins);
}

}  // namespace clustervar
