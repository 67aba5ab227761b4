#include <doctest.h>

#include <boost/math/distributions/normal.hpp>
#include <cmath>

#include "clustervar/error.hpp"
#include "clustervar/montecarlo.hpp"
#include "clustervar/ols.hpp"

using namespace clustervar;

namespace {

McConfig small_config() {
  McConfig c;
  c.n_units = 12;
  c.n_periods = 4;
  c.dim_w = 2;
  c.reps = 40;
  c.seed = 7;
  return c;
}

bool same(const McSummary& a, const McSummary& b) {
  if (a.true_variance != b.true_variance || a.mean_beta != b.mean_beta) return false;
  if (a.failed_reps != b.failed_reps || a.estimators.size() != b.estimators.size()) return false;
  for (std::size_t e = 0; e < a.estimators.size(); ++e) {
    const auto& x = a.estimators[e];
    const auto& y = b.estimators[e];
    if (x.bias != y.bias || x.variance != y.variance || x.mse != y.mse ||
        x.rejection_rate != y.rejection_rate || x.bias_se != y.bias_se)
      return false;
    for (std::size_t r = 0; r < x.outcomes.size(); ++r)
      if (x.outcomes[r].estimate != y.outcomes[r].estimate) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("DGP shape matches the panel layout") {
  McConfig c;
  c.reps = 1;
  const SimulatedSample s = simulate_dgp(c, 0);
  CHECK(s.problem.n() == 1000);
  CHECK(s.problem.p() == 181);
  CHECK(s.problem.partition.num_clusters() == 50);
  // w_it is active only in its own period's columns
  for (Index i = 0; i < 3; ++i)
    for (Index t = 0; t < c.n_periods; ++t)
      for (Index col = 0; col < s.problem.k(); ++col) {
        const bool own = col / c.dim_w == t;
        const double v = s.problem.W(i * c.n_periods + t, col);
        CHECK((own ? v != 0.0 : v == 0.0));
      }
}

TEST_CASE("DGP is deterministic in (seed, rep)") {
  const McConfig c = small_config();
  const SimulatedSample a = simulate_dgp(c, 3);
  const SimulatedSample b = simulate_dgp(c, 3);
  const SimulatedSample d = simulate_dgp(c, 4);
  CHECK(a.problem.y == b.problem.y);
  CHECK(a.problem.X == b.problem.X);
  CHECK(a.problem.W == b.problem.W);
  CHECK(a.errors == b.errors);
  CHECK(a.problem.y != d.problem.y);
}

TEST_CASE("exact Omega is the covariance of the error recursion") {
  // Recover the innovations from the realized errors and check that the
  // Cholesky factor of each Omega block maps them back to the errors.
  const McConfig c = small_config();
  const SimulatedSample s = simulate_dgp(c, 1);
  for (Index g = 0; g < s.problem.partition.num_clusters(); ++g) {
    const auto& rows = s.problem.partition.members(g);
    const Index T = c.n_periods;
    Eigen::VectorXd u(T);
    double prev = 0.0;
    for (Index t = 0; t < T; ++t) {
      const Index i = rows[static_cast<std::size_t>(t)];
      const double e = s.errors(i);
      u(t) = (e / std::abs(s.problem.X(i, 0)) - c.ar_coef * prev) / c.innov_coef;
      prev = e;
    }
    const Eigen::MatrixXd L = Eigen::LLT<Eigen::MatrixXd>(s.omega.block(g)).matrixL();
    const Eigen::VectorXd e = s.errors(rows);
    CHECK((L * u - e).norm() < 1e-10 * (1 + e.norm()));
  }
}

TEST_CASE("gamma is redrawn per replication unless frozen") {
  McConfig c = small_config();
  c.dim_w = 1;
  auto gamma0 = [&](std::size_t rep) {
    const SimulatedSample s = simulate_dgp(c, rep);
    // period-0 row of unit 0: y - x beta - e = w gamma_0
    return (s.problem.y(0) - s.problem.X(0, 0) * c.beta - s.errors(0)) / s.problem.W(0, 0);
  };
  CHECK(gamma0(0) != doctest::Approx(gamma0(1)));
  c.freeze_gamma = true;
  CHECK(gamma0(0) == doctest::Approx(gamma0(1)).epsilon(1e-10));
  CHECK(gamma0(0) >= c.gamma_range.first);
  CHECK(gamma0(0) <= c.gamma_range.second);
}

TEST_CASE("summary is identical across worker counts") {
  const McConfig c = small_config();
  const McSummary s1 = run_experiment(c, Exec::serial());
  const McSummary s2 = run_experiment(c, Exec{2});
  const McSummary s8 = run_experiment(c, Exec{8});
  CHECK(same(s1, s2));
  CHECK(same(s1, s8));
}

TEST_CASE("accumulation identities") {
  const McSummary s = run_experiment(small_config());
  CHECK(s.rep_count == 40);
  for (const auto& e : s.estimators) {
    CHECK(e.mse == doctest::Approx(e.variance + e.bias * e.bias).epsilon(1e-12));
    CHECK(e.rejection_rate >= 0.0);
    CHECK(e.rejection_rate <= 1.0);
    CHECK(e.bias == doctest::Approx(e.mean_estimate - s.true_variance).epsilon(1e-10));
  }
  McConfig one = small_config();
  one.reps = 1;
  const McSummary s1 = run_experiment(one);
  for (const auto& e : s1.estimators) {
    CHECK(e.variance == 0.0);
    CHECK(e.mse == doctest::Approx(e.bias * e.bias).epsilon(1e-14));
  }
}

TEST_CASE("zero noise gives zero estimates and a degenerate normality check") {
  McConfig c = small_config();
  c.ar_coef = 0.0;
  c.innov_coef = 0.0;
  c.reps = 3;
  const McSummary s = run_experiment(c);
  CHECK(s.true_variance == 0.0);
  for (const auto& e : s.estimators) CHECK(std::abs(e.mean_estimate) < 1e-12);
  CHECK_THROWS_AS(normality_check(c), DegenerateDistribution);
}

TEST_CASE("config validation") {
  McConfig c;
  c.ar_coef = 1.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = McConfig{};
  c.reps = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = McConfig{};
  c.nominal_size = 1.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
}

TEST_CASE("KS distance against the standard normal") {
  CHECK(ks_distance_normal({0.0}) == doctest::Approx(0.5));
  const boost::math::normal nd;
  std::vector<double> q;
  const int n = 200;
  for (int i = 0; i < n; ++i) q.push_back(boost::math::quantile(nd, (i + 0.5) / n));
  CHECK(ks_distance_normal(q) == doctest::Approx(0.5 / n).epsilon(1e-9));
  std::vector<double> shifted;
  for (double v : q) shifted.push_back(v + 10.0);
  CHECK(ks_distance_normal(shifted) > 0.99);
}

TEST_CASE("normality statistics are reproducible") {
  McConfig c = small_config();
  c.reps = 30;
  const auto a = normality_check(c, 0, Exec::serial());
  const auto b = normality_check(c, 0, Exec{4});
  CHECK(a.statistics == b.statistics);
  CHECK(a.coverage == b.coverage);
  CHECK(a.ks_distance == b.ks_distance);
}
