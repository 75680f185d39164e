#include <doctest.h>

#include <cmath>
#include <random>

#include "kgf/analysis.hpp"
#include "kgf/discrepancies.hpp"

using namespace kgf;

namespace {

const KernelSpec kGauss{KernelFamily::Gaussian, 0.2, 1.0};

}  // namespace

TEST_CASE("dissipation identity for the kernelized reaction flow") {
  const Corpus corpus = make_corpus(2024, 4, 64);
  const GridMeasure& mu = corpus.measures[0];
  const EnergySpec e = EnergySpec::divergence(DivergenceKind::KL, corpus.target);
  const GeometrySpec g = KernelizedFrGeometry{kGauss};

  // At the target everything vanishes.
  const auto at_target = dissipation_identity_check(g, e, corpus.target, 1e-3);
  CHECK(std::abs(at_target.fd_rate) <= 1e-10);
  CHECK(std::abs(at_target.formula_rate) <= 1e-10);

  const auto coarse = dissipation_identity_check(g, e, mu, 1e-3);
  CHECK(coarse.formula_rate >= 0.0);
  CHECK(coarse.abs_err <= 1e-4 * (1.0 + coarse.formula_rate));
  const auto fine = dissipation_identity_check(g, e, mu, 5e-4);
  const double ratio = coarse.abs_err / fine.abs_err;
  CHECK(ratio > 3.5);
  CHECK(ratio < 4.5);

  // The inclusive KL formula rate is exactly the squared MMD.
  const EnergySpec ikl = EnergySpec::divergence(DivergenceKind::InclusiveKL, corpus.target);
  const auto mmd_case = dissipation_identity_check(g, ikl, mu, 1e-3);
  CHECK(mmd_case.formula_rate ==
        doctest::Approx(mmd2(kGauss, mu, corpus.target)).epsilon(1e-10));

  CHECK_THROWS_AS(
      dissipation_identity_check(FisherRaoGeometry{}, e, mu, 1e-3), std::invalid_argument);
}

TEST_CASE("stein dissipation identity on a smooth case") {
  const Grid fine(0.0, 1.0, 401);
  const GridMeasure mu = gaussian_measure(fine, 0.42, 0.14, 1.0);
  const GridMeasure pi = gaussian_measure(fine, 0.55, 0.17, 1.0);
  const EnergySpec e = EnergySpec::divergence(DivergenceKind::KL, pi);
  const auto report = dissipation_identity_check(SteinGeometry{kGauss}, e, mu, 1e-4);
  CHECK(report.formula_rate > 0.0);
  CHECK(report.abs_err <= 1e-3 * (1.0 + report.formula_rate));
}

TEST_CASE("rayleigh equivalence is exact up to roundoff") {
  const Corpus corpus = make_corpus(99, 4, 48);
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const GridMeasure& mu = corpus.measures[1];
  for (const auto kind : corpus.kinds) {
    const EnergySpec e = EnergySpec::divergence(kind, corpus.target);
    Eigen::VectorXd f1(mu.grid.n()), f2(mu.grid.n());
    for (int i = 0; i < mu.grid.n(); ++i) {
      f1[i] = u(rng);
      f2[i] = u(rng);
    }
    const auto report = rayleigh_equivalence_check(
        e, mu, GridFunction(mu.grid, f1), GridFunction(mu.grid, f2), 0.3, kGauss);
    CHECK(report.abs_err <= 1e-9 * report.scale);
  }

  // f1 = f2 means both differences vanish.
  Eigen::VectorXd same(mu.grid.n());
  for (int i = 0; i < mu.grid.n(); ++i) same[i] = u(rng);
  const auto equal_report = rayleigh_equivalence_check(
      EnergySpec::divergence(DivergenceKind::KL, corpus.target), mu,
      GridFunction(mu.grid, same), GridFunction(mu.grid, same), 0.3, kGauss);
  CHECK(equal_report.regression_delta == 0.0);
  CHECK(equal_report.rayleigh_delta == 0.0);
}

TEST_CASE("edp functional balances energy along reaction flows") {
  const Grid grid(0.0, 1.0, 96);
  const GridMeasure pi = gaussian_measure(grid, 0.5, 0.16, 1.0);
  const GridMeasure mu0 = gaussian_measure(grid, 0.56, 0.19, 1.1);
  const EnergySpec e = EnergySpec::divergence(DivergenceKind::KL, pi);
  const double dt = 1e-3;

  for (const GeometrySpec g :
       {GeometrySpec(FisherRaoGeometry{}), GeometrySpec(KernelizedFrGeometry{kGauss}),
        GeometrySpec(KrrFrGeometry{kGauss, 0.05})}) {
    FlowSpec spec{g, e, mu0, 0.3, dt, default_scheme(g), 1, {}};
    const Trajectory traj = solve_flow(spec);
    const double d = edp_functional(traj, g, e);
    CHECK(d >= 0.0);
    const double defect = edp_defect(traj, g, e);
    const double f0 = energy_value(e, mu0);
    CHECK(defect <= 25.0 * dt * (1.0 + f0));
    // The balance is two-sided up to O(dt): the dissipation cannot
    // overshoot the energy drop by more than the same budget.
    CHECK(defect >= -25.0 * dt * (1.0 + f0));
  }

  // Stationary trajectory: D = 0 and the inequality is tight.
  FlowSpec stat{FisherRaoGeometry{}, e, pi, 0.1, dt, TimeScheme::Multiplicative, 1, {}};
  const Trajectory st = solve_flow(stat);
  CHECK(std::abs(edp_functional(st, FisherRaoGeometry{}, e)) <= 1e-12);
}

TEST_CASE("edp functional for the exponential potential flow is exact") {
  // Fisher-Rao flow of the unit potential: R = R* = mass/2, F(t) = mass(t),
  // and the balance closes to O(dt^2) per step.
  const Grid grid(0.0, 1.0, 32);
  const GridMeasure mu0 = uniform_measure(grid, 1.0);
  const EnergySpec e =
      EnergySpec::potential(GridFunction(grid, Eigen::VectorXd::Ones(grid.n())));
  const double dt = 1e-4;
  FlowSpec spec{FisherRaoGeometry{}, e, mu0, 1.0, dt, TimeScheme::Multiplicative, 1, {}};
  const Trajectory traj = solve_flow(spec);
  const double d = edp_functional(traj, FisherRaoGeometry{}, e);
  // int_0^1 mass(t) dt = 1 - e^{-1} for the exact flow.
  CHECK(d == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-6));
  CHECK(std::abs(edp_defect(traj, FisherRaoGeometry{}, e)) <= 1e-6);
}

TEST_CASE("edp defect shrinks with the step size") {
  const Grid grid(0.0, 1.0, 64);
  const GridMeasure pi = gaussian_measure(grid, 0.5, 0.16, 1.0);
  const GridMeasure mu0 = gaussian_measure(grid, 0.58, 0.2, 1.1);
  const EnergySpec e = EnergySpec::divergence(DivergenceKind::KL, pi);
  const GeometrySpec g = KrrFrGeometry{kGauss, 0.05};
  std::vector<double> defects;
  for (double dt : {4e-3, 2e-3, 1e-3}) {
    FlowSpec spec{g, e, mu0, 0.2, dt, TimeScheme::Multiplicative, 1, {}};
    defects.push_back(std::abs(edp_defect(solve_flow(spec), g, e)));
  }
  CHECK(defects[1] < defects[0]);
  CHECK(defects[2] < defects[1]);
  // First-order decay: halving dt roughly halves the defect.
  CHECK(defects[0] / defects[2] > 2.5);
}

TEST_CASE("gamma study converges and respects the bounds") {
  const Grid grid(0.0, 1.0, 129);
  const GridMeasure pi = gaussian_measure(grid, 0.5, 0.15, 1.0);
  const GridMeasure mu0 = gaussian_measure(grid, 0.55, 0.18, 1.0);
  const EnergySpec e = EnergySpec::divergence(DivergenceKind::KL, pi);
  const KernelSpec k{KernelFamily::Gaussian, 0.10, 1.0};
  const std::vector<double> lambdas{1.0, 0.1, 0.01, 1e-8};
  const auto rows = gamma_convergence_study(e, mu0, k, lambdas, 0.25, 1e-3);

  REQUIRE(rows.size() == 4);
  for (size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].sup_l2_error <= rows[i - 1].sup_l2_error + 1e-12);
  }
  CHECK(rows.back().sup_l2_error <= 1e-5);
  const double f0 = energy_value(e, mu0);
  for (const auto& row : rows) {
    CHECK(row.edp_defect <= 25.0 * 1e-3 * (1.0 + f0));
    CHECK(row.rate_gap >= -1e-9);
    CHECK(row.d_lambda >= 0.0);
  }
  // The dissipation functional of the lambda system approaches the
  // Fisher-Rao one from below as lambda -> 0.
  CHECK(std::abs(rows.back().d_lambda - rows.back().d_fr) <=
        std::abs(rows.front().d_lambda - rows.front().d_fr) + 1e-12);

  // mu0 = pi: every error column is zero.
  const auto at_target = gamma_convergence_study(e, pi, k, {0.1, 0.01}, 0.05, 1e-3);
  for (const auto& row : at_target) CHECK(row.sup_l2_error <= 1e-12);
}

TEST_CASE("lojasiewicz bound endpoints and slack") {
  const Corpus corpus = make_corpus(7, 6, 64);
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> pick(0, 5);
  for (int trial = 0; trial < 10; ++trial) {
    const GridMeasure& mu = corpus.measures[pick(rng)];
    const EnergySpec e =
        EnergySpec::divergence(corpus.kinds[trial % corpus.kinds.size()], corpus.target);
    const double lambda = (trial % 2 == 0) ? 0.5 : 0.03;
    const auto r0 = lojasiewicz_bound_check(e, mu, kGauss, lambda, 0.0);
    const auto rh = lojasiewicz_bound_check(e, mu, kGauss, lambda, 0.5);
    const auto r1 = lojasiewicz_bound_check(e, mu, kGauss, lambda, 1.0);
    const double scale = 1.0 + std::abs(r0.rate);
    // s = 0: the two norm terms cancel, the bound is exactly zero.
    CHECK(std::abs(r0.bound) <= 1e-10 * scale);
    CHECK(r0.slack >= -1e-9 * scale);
    // s = 1/2: genuine inequality with nonnegative slack.
    CHECK(rh.slack >= -1e-9 * scale);
    // s = 1: the bound reproduces the exact dissipation rate.
    CHECK(std::abs(r1.slack) <= 1e-10 * scale);
    CHECK(r0.rate <= 1e-12);
  }

  // xi = 0 at the target: everything vanishes.
  const EnergySpec e = EnergySpec::divergence(DivergenceKind::KL, corpus.target);
  const auto at_target = lojasiewicz_bound_check(e, corpus.target, kGauss, 0.1, 0.5);
  CHECK(std::abs(at_target.rate) <= 1e-12);
  CHECK(std::abs(at_target.bound) <= 1e-12);
}

TEST_CASE("identity suite passes on the shipped seed") {
  const auto results = run_identity_suite(2026);
  for (const auto& r : results) {
    INFO(r.name, " defect=", r.defect, " tol=", r.tolerance);
    CHECK(r.pass);
  }
  CHECK(results.size() >= 20);
}
