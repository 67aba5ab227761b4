// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--strict] [--only N]
//
// Exit status is nonzero when a check throws, or (with --strict) when any
// criterion fails.

#include <boost/math/distributions/normal.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "clustervar/bias.hpp"
#include "clustervar/cli.hpp"
#include "clustervar/estimators.hpp"
#include "clustervar/montecarlo.hpp"
#include "clustervar/report.hpp"
#include "oracles.hpp"

using namespace clustervar;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;
  std::string failures;
  void require(bool ok, const std::string& what) {
    if (ok) return;
    pass = false;
    failures += (failures.empty() ? "" : "; ") + what;
  }
};

double rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / std::max(1e-300, b.norm());
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double std_error(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

// 1 ------------------------------------------------------------------------

void exact_identities(Verdict& v) {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<Index> n_dist(20, 60);
  std::uniform_int_distribution<Index> p_dist(2, 12);
  double woodbury = 0.0, beta_err = 0.0, fwl = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const Index p = p_dist(rng);
    const Index r = 1 + p / 4;
    const auto pr = oracle::random_problem(rng, std::max<Index>(n_dist(rng), 2 * p + 10), r, p - r);
    const OlsFit fit = fit_ols(pr);
    for (Index g = 0; g < pr.partition.num_clusters(); ++g) {
      const Eigen::VectorXd ref = oracle::refit_residuals(pr, g);
      woodbury = std::max(woodbury, (leave_cluster_out_residuals(fit, pr, g) - ref).norm() /
                                        std::max(1.0, ref.norm()));
      const Eigen::VectorXd bref = oracle::refit_without(pr, g);
      beta_err = std::max(beta_err, (leave_cluster_out_beta(fit, pr, g) - bref).norm() /
                                        std::max(1.0, bref.norm()));
    }
    const Eigen::VectorXd b = oracle::ols(oracle::vhat(pr), pr.y);
    fwl = std::max(fwl, (fit.beta - b).norm() / std::max(1.0, b.norm()));
  }
  v.require(woodbury < 1e-8, "leave-out residuals");
  v.require(beta_err < 1e-8, "leave-out coefficients");
  v.require(fwl < 1e-8, "FWL");

  double homo = 0.0;
  for (int rep = 0; rep < 30; ++rep) {
    const auto pr = oracle::random_problem(rng, 40, 2, 5, 1, 5);
    const double s2 = 0.25 + rep;
    const OmegaSpec om = OmegaSpec::scaled_identity(pr.partition, s2);
    const OlsFit fit = fit_ols(pr);
    for (Index g = 0; g < pr.partition.num_clusters(); ++g)
      homo = std::max(homo, (cluster_bias(fit, pr, om, g) + s2 * hat_block(fit, pr, g, g)).norm() / s2);
  }
  v.require(homo < 1e-10, "homoskedastic bias");

  double hc0 = 0.0, hc2 = 0.0, hc3 = 0.0, loo = 0.0;
  for (int rep = 0; rep < 30; ++rep) {
    const auto pr = oracle::random_problem(rng, 30, 2, 4, 1, 1);
    const OlsFit fit = fit_ols(pr);
    const Eigen::MatrixXd V = oracle::vhat(pr);
    const Eigen::VectorXd u = oracle::residuals(pr);
    const Eigen::VectorXd h = oracle::hat(pr).diagonal();
    Eigen::MatrixXd m0 = Eigen::MatrixXd::Zero(2, 2), m2 = m0, m3 = m0, ml = m0;
    for (Index i = 0; i < pr.n(); ++i) {
      const Eigen::MatrixXd vv = V.row(i).transpose() * V.row(i);
      m0 += u(i) * u(i) * vv;
      m2 += u(i) * u(i) / (1 - h(i)) * vv;
      m3 += u(i) * u(i) / ((1 - h(i)) * (1 - h(i))) * vv;
      ml += pr.y(i) * u(i) / (1 - h(i)) * vv;
    }
    hc0 = std::max(hc0, rel_err(lz_cov(fit, pr).matrix, oracle::sandwich(V, m0)));
    hc2 = std::max(hc2, rel_err(bm_cov(fit, pr, BmAdjustment::CR2).matrix, oracle::sandwich(V, m2)));
    hc3 = std::max(hc3, rel_err(bm_cov(fit, pr, BmAdjustment::CR3).matrix, oracle::sandwich(V, m3)));
    loo = std::max(loo, rel_err(lcoc_cov(fit, pr).matrix, oracle::sandwich(V, ml)));
  }
  v.require(hc0 < 1e-10, "LZ = HC0");
  v.require(hc2 < 1e-10, "CR2 = HC2");
  v.require(hc3 < 1e-10, "CR3 = HC3");
  v.require(loo < 1e-10, "LCOC = leave-one-out");
  v.detail << "leave-out " << woodbury << ", FWL " << fwl << ", homoskedastic " << homo
           << ", HC0/HC2/HC3/LOO " << hc0 << "/" << hc2 << "/" << hc3 << "/" << loo;
}

// 2 ------------------------------------------------------------------------

OmegaSpec random_omega(std::mt19937_64& rng, const ClusterPartition& part) {
  std::vector<Eigen::MatrixXd> blocks;
  for (Index g = 0; g < part.num_clusters(); ++g) {
    const Index m = part.cluster_size(g);
    const Eigen::MatrixXd A = oracle::gaussian(rng, m, m);
    blocks.push_back(A * A.transpose() + 0.05 * Eigen::MatrixXd::Identity(m, m));
  }
  return OmegaSpec(part, std::move(blocks));
}

void bound_containment(Verdict& v) {
  std::mt19937_64 rng(202);
  int contained = 0, chains = 0, dominated = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const auto pr = oracle::random_problem(rng, 50, 2, 8, 1, 6);
    const OmegaSpec om = random_omega(rng, pr.partition);
    const OlsFit fit = fit_ols(pr);
    const BiasAnalyzer an(fit, pr, om);
    const Eigen::VectorXd w = oracle::gaussian(rng, pr.p(), 1).col(0);
    const double pb = an.proportionate_bias(w);
    const auto [lo, hi] = an.bounds();
    if (pb >= lo - 1e-8 && pb <= hi + 1e-8) ++contained;
    for (Index g = 0; g < pr.partition.num_clusters(); ++g) {
      const GershgorinChain c = an.gershgorin_chain(g);
      const double t = 1e-10 * (1 + c.omega_max);
      ++chains;
      if (c.weyl_upper >= c.bias_max - t && c.weyl_lower <= c.bias_min + t &&
          c.cross_disc_lower <= c.cross_min + t && c.cross_disc_upper >= c.cross_max - t &&
          c.hat_disc_upper >= c.hat_max - t && c.spread_product >= c.spread_max - t &&
          c.spread_disc_upper >= c.spread_product - t && c.chain_upper >= c.weyl_upper - t &&
          c.chain_lower <= c.weyl_lower + t)
        ++dominated;
    }
  }
  v.require(contained == 100, "containment");
  v.require(dominated == chains, "gershgorin dominance");

  const auto base = oracle::random_problem(rng, 24, 1, 5, 3, 4);
  double prev = std::numeric_limits<double>::infinity();
  double first = 0.0, last = 0.0;
  bool monotone = true;
  for (Index m = 1; m <= 64; ++m) {
    RegressionProblem pr;
    pr.y = base.y.replicate(m, 1);
    pr.X = base.X.replicate(m, 1);
    pr.W = base.W.replicate(m, 1);
    std::vector<Index> sizes;
    for (Index c = 0; c < m; ++c)
      for (Index g = 0; g < base.partition.num_clusters(); ++g)
        sizes.push_back(base.partition.cluster_size(g));
    pr.partition = ClusterPartition::from_sizes(sizes);
    const OmegaSpec om = OmegaSpec::ar1(pr.partition, 1.0, 0.6);
    const auto [lo, hi] = bias_bounds(fit_ols(pr), pr, om);
    const double mag = std::max(std::abs(lo), std::abs(hi));
    monotone = monotone && mag <= prev + 1e-6;
    if (m == 1) first = mag;
    last = mag;
    prev = mag;
  }
  v.require(monotone, "replicated-design monotonicity");
  v.detail << "contained " << contained << "/100, chains " << dominated << "/" << chains
           << ", max |bound| m=1: " << first << " -> m=64: " << last;
}

// 3 ------------------------------------------------------------------------

void lcoc_unbiased(Verdict& v) {
  std::mt19937_64 rng(303);
  RegressionProblem pr = oracle::random_problem(rng, 30, 2, 2, 5, 5);
  const OmegaSpec om = OmegaSpec::ar1(pr.partition, 1.0, 0.5);
  const Eigen::MatrixXd L = Eigen::LLT<Eigen::MatrixXd>(oracle::dense_omega(pr, om)).matrixL();
  const Eigen::VectorXd mean_y = pr.design() * Eigen::VectorXd::LinSpaced(pr.p(), 0.5, 2.0);
  const std::size_t draws = 200000;

  const OlsFit base_fit = fit_ols(pr);
  const Eigen::MatrixXd target = sigma_oracle(base_fit, pr, om).matrix;

  auto run = [&](bool halve) {
    const auto terms = parallel_map<Eigen::Vector3d>(draws, Exec{}, [&](std::size_t d) {
      auto stream = replication_stream(303, d);
      std::normal_distribution<double> z;
      RegressionProblem local = pr;
      Eigen::VectorXd u(pr.n());
      for (Index i = 0; i < pr.n(); ++i) u(i) = z(stream);
      local.y = mean_y + L * u;
      const Eigen::MatrixXd s = lcoc_sigma(fit_ols(local), local, {halve}, Exec::serial());
      return Eigen::Vector3d(s(0, 0), s(0, 1), s(1, 1));
    });
    std::array<std::vector<double>, 3> comp;
    for (const auto& t : terms)
      for (int c = 0; c < 3; ++c) comp[c].push_back(t(c));
    return comp;
  };

  const Eigen::Vector3d truth(target(0, 0), target(0, 1), target(1, 1));
  const auto halved = run(true);
  double worst = 0.0;
  for (int c = 0; c < 3; ++c) {
    const double z = std::abs(mean(halved[c]) - truth(c)) / std_error(halved[c]);
    worst = std::max(worst, z);
  }
  v.require(worst < 3.0, "halved kernel within 3 SE");

  const auto doubled = run(false);
  double ratio = 0.0, sep = std::numeric_limits<double>::infinity();
  for (int c : {0, 2}) {
    ratio = std::max(ratio, std::abs(mean(doubled[c]) / truth(c) - 2.0));
    sep = std::min(sep, std::abs(mean(doubled[c]) - truth(c)) / std_error(doubled[c]));
  }
  v.require(sep > 3.0, "unhalved kernel detected as biased");
  v.require(ratio < 0.1, "unhalved kernel near 2x");
  v.detail << "max |z| " << worst << " over 3 components; without the 1/2 factor: separation "
           << sep << " SE, |mean/oracle - 2| <= " << ratio;
}

// 4 ------------------------------------------------------------------------

void monte_carlo(Verdict& v) {
  McConfig c;
  c.reps = 500;
  const McSummary s = run_experiment(c);
  const auto& lz = s.get(EstimatorKind::LZ);
  const auto& bm = s.get(EstimatorKind::BM);
  const auto& lc = s.get(EstimatorKind::LCOC);

  // Per-replication errors on the replications every estimator completed.
  auto errors = [&](const EstimatorSummary& e) {
    std::vector<double> out;
    for (const auto& o : e.outcomes) out.push_back(o.estimate - o.truth);
    return out;
  };
  const auto el = errors(lz), eb = errors(bm), ec = errors(lc);

  v.require(lz.bias + 3 * lz.bias_se < 0, "LZ bias negative");

  auto abs_gap = [&](const std::vector<double>& ex, double bx, const std::vector<double>& ey,
                     double by) {
    // paired difference of |bias|: sign(bx) ex - sign(by) ey
    std::vector<double> d;
    for (std::size_t r = 0; r < ex.size(); ++r)
      d.push_back(std::copysign(1.0, bx) * ex[r] - std::copysign(1.0, by) * ey[r]);
    return mean(d) / std_error(d);
  };
  const double lz_vs_lc = abs_gap(el, lz.bias, ec, lc.bias);
  const double bm_vs_lc = abs_gap(eb, bm.bias, ec, lc.bias);
  v.require(lz_vs_lc > 3 && bm_vs_lc > 3, "|bias LCOC| smallest");

  auto var_gap = [&](const std::vector<double>& ex, const std::vector<double>& ey) {
    const double mx = mean(ex), my = mean(ey);
    std::vector<double> d;
    for (std::size_t r = 0; r < ex.size(); ++r)
      d.push_back((ey[r] - my) * (ey[r] - my) - (ex[r] - mx) * (ex[r] - mx));
    return mean(d) / std_error(d);
  };
  const double var_lz_bm = var_gap(el, eb);
  const double var_bm_lc = var_gap(eb, ec);
  v.require(var_lz_bm > 3 && var_bm_lc > 3, "Var LZ < Var BM < Var LCOC");

  const double size = c.nominal_size;
  v.require(lz.rejection_rate > size, "LZ rejection above nominal");
  v.require(bm.rejection_rate < size, "BM rejection below nominal");
  const double dl = std::abs(lc.rejection_rate - size);
  v.require(dl < std::abs(lz.rejection_rate - size) && dl < std::abs(bm.rejection_rate - size),
            "LCOC rejection closest to nominal");

  v.detail.precision(4);
  v.detail << "bias x1e-3 LZ/BM/LCOC " << lz.bias * 1e3 << "/" << bm.bias * 1e3 << "/"
           << lc.bias * 1e3 << " (se " << lz.bias_se * 1e3 << "/" << bm.bias_se * 1e3 << "/"
           << lc.bias_se * 1e3 << "); |bias| gaps " << lz_vs_lc << "/" << bm_vs_lc
           << " SE; var x1e-7 " << lz.variance * 1e7 << "/" << bm.variance * 1e7 << "/"
           << lc.variance * 1e7 << " (gaps " << var_lz_bm << "/" << var_bm_lc
           << " SE); rejection " << lz.rejection_rate << "/" << bm.rejection_rate << "/"
           << lc.rejection_rate << "; failed reps " << s.failed_reps.size();
}

// 5 ------------------------------------------------------------------------

void normality(Verdict& v) {
  McConfig c;
  c.reps = 2000;
  const NormalityResult r = normality_check(c);
  const double crit = 1.36 / std::sqrt(2000.0);
  v.require(r.coverage >= 0.93 && r.coverage <= 0.97, "coverage");
  v.require(r.ks_distance < crit, "KS distance");
  v.detail << "coverage " << r.coverage << ", KS " << r.ks_distance << " (critical " << crit << ")";
}

// 6 ------------------------------------------------------------------------

std::string run_cli_capture(std::vector<std::string> args, int& code) {
  args.insert(args.begin(), "clustervar");
  std::ostringstream out, err;
  code = run_cli(args, out, err);
  return out.str();
}

void cli_end_to_end(Verdict& v) {
  const std::string data = std::string(CLUSTERVAR_FIXTURE_DIR) + "/panel6.csv";
  const std::vector<std::string> fit{"fit", "--data", data, "--y", "y", "--x", "x", "--controls",
                                     "w", "--cluster", "firm", "--estimator", "lz,bm,lcoc"};
  int code = 0;
  auto with_threads = [](std::vector<std::string> a, const char* t) {
    a.insert(a.begin(), {"--threads", t});
    return a;
  };
  const std::string a = run_cli_capture(with_threads(fit, "1"), code);
  v.require(code == 0, "fit exit code");
  if (code != 0) return;
  const json j = json::parse(a);
  const auto& est = j["results"]["estimators"];
  auto close = [](double x, double y) { return std::abs(x - y) <= 1e-10 * std::abs(y); };
  const double beta = j["results"]["coefficients"]["x"].get<double>();
  const double lz = est["LZ"]["coefficients"][0]["std_error"].get<double>();
  const double bm = est["BM"]["coefficients"][0]["std_error"].get<double>();
  const double lc = est["LCOC"]["coefficients"][0]["std_error"].get<double>();
  v.require(close(beta, 0.7), "beta");
  v.require(close(lz, 0.38861577711439133), "LZ standard error");
  v.require(close(bm, 0.67435210122035372), "BM standard error");
  v.require(close(lc, 1.1090536506409416), "LCOC standard error");

  const std::string b = run_cli_capture(with_threads(fit, "1"), code);
  const std::string c = run_cli_capture(with_threads(fit, "8"), code);
  v.require(a == b && a == c, "fit reports byte-identical");

  const std::vector<std::string> mc{"mc", "--reps", "8", "--seed", "4242", "--n-units", "20",
                                    "--t", "5", "--dim-w", "3"};
  const std::string m1 = run_cli_capture(with_threads(mc, "1"), code);
  const std::string m2 = run_cli_capture(with_threads(mc, "1"), code);
  const std::string m8 = run_cli_capture(with_threads(mc, "8"), code);
  v.require(code == 0 && m1 == m2 && m1 == m8, "mc reports byte-identical");
  v.detail.precision(17);
  v.detail << "beta " << beta << ", se LZ/BM/LCOC " << lz << "/" << bm << "/" << lc
           << "; identical reports across runs and 1 vs 8 workers";
}

}  // namespace

int main(int argc, char** argv) {
  bool strict = false;
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--strict") == 0)
      strict = true;
    else if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc)
      only = std::atoi(argv[++i]);
  }
  const std::vector<std::pair<std::string, std::function<void(Verdict&)>>> criteria{
      {"exact identities", exact_identities},
      {"bias bound containment", bound_containment},
      {"LCOC unbiasedness", lcoc_unbiased},
      {"Monte Carlo orderings (500 reps, N=50 T=20 dim_w=9)", monte_carlo},
      {"normality of oracle-standardized statistics (2000 reps)", normality},
      {"CLI end-to-end", cli_end_to_end},
  };
  int failed = 0;
  int crashed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (only != 0 && only != static_cast<int>(k + 1)) continue;
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[k].second(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.failures += std::string("exception: ") + e.what();
      ++crashed;
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!v.pass) ++failed;
    std::printf("%s criterion %zu: %s (%.1f s) -- %s", v.pass ? "PASS" : "FAIL", k + 1,
                criteria[k].first.c_str(), secs, v.detail.str().c_str());
    if (!v.failures.empty()) std::printf(" -- failed: %s", v.failures.c_str());
    std::printf("\n");
    std::fflush(stdout);
  }
  return crashed > 0 || (strict && failed > 0) ? 1 : 0;
}
