#include "kgf/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "kgf/discrepancies.hpp"
#include "kgf/geodesics.hpp"
#include "kgf/regression.hpp"

namespace kgf {

DissipationIdentityReport dissipation_identity_check(const GeometrySpec& g,
                                                     const EnergySpec& e,
                                                     const GridMeasure& mu, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const KernelSpec* kernel = nullptr;
  bool reaction = false;
  if (const auto* kfr = std::get_if<KernelizedFrGeometry>(&g)) {
    kernel = &kfr->kernel;
    reaction = true;
  } else if (const auto* st = std::get_if<SteinGeometry>(&g)) {
    kernel = &st->kernel;
  } else {
    throw std::invalid_argument(
        "dissipation identity applies to the kernelized reaction and Stein geometries");
  }

  const GridFunction tangent = rhs(g, e, mu);
  const GridFunction negated(tangent.grid, -tangent.values);
  const GridMeasure plus = step(mu, tangent, dt, TimeScheme::ExplicitEuler).state;
  const GridMeasure minus = step(mu, negated, dt, TimeScheme::ExplicitEuler).state;
  const double fd_rate =
      -(energy_value(e, plus) - energy_value(e, minus)) / (2.0 * dt);
  const double formula_rate =
      reaction ? frk_dissipation(e, mu, *kernel) : stein_dissipation(e, mu, *kernel);
  return {fd_rate, formula_rate, std::abs(fd_rate - formula_rate)};
}

namespace {

// Discrete RKHS seminorm <f, K_mu^{-1} f>_{L^2_mu}; the jittered inverse is
// shared by both objectives of the Rayleigh comparison, so its
// regularization error cancels there exactly.
double rkhs_norm2(const WeightedOperator& op, const GridMeasure& mu,
                  const Eigen::VectorXd& f) {
  return weighted_inner(f, solve_regularized(op, 0.0, f), mu);
}

}  // namespace

RayleighReport rayleigh_equivalence_check(const EnergySpec& e, const GridMeasure& mu,
                                          const GridFunction& f1, const GridFunction& f2,
                                          double lambda, const KernelSpec& k) {
  require_same_grid(f1.grid, mu.grid);
  require_same_grid(f2.grid, mu.grid);
  const Eigen::VectorXd xi = first_variation(e, mu).values.values;
  const WeightedOperator op = make_operator(k, mu);

  const auto objectives = [&](const Eigen::VectorXd& f) {
    const double h2 = lambda * rkhs_norm2(op, mu, f);
    const Eigen::VectorXd d = f - xi;
    const double regression = weighted_inner(d, d, mu) + h2;
    // dF/dt along mudot = -mu f equals -<xi, f>_{L^2_mu}.
    const double rayleigh =
        2.0 * (-weighted_inner(xi, f, mu)) + weighted_inner(f, f, mu) + h2;
    return std::make_pair(regression, rayleigh);
  };

  const auto [j1, r1] = objectives(f1.values);
  const auto [j2, r2] = objectives(f2.values);
  RayleighReport report{};
  report.regression_delta = j1 - j2;
  report.rayleigh_delta = r1 - r2;
  report.abs_err = std::abs(report.regression_delta - report.rayleigh_delta);
  report.scale = std::max(1.0, std::abs(j1) + std::abs(j2) + std::abs(r1) + std::abs(r2));
  return report;
}

namespace {

struct RatePair {
  double primal;  // R(mu, mudot)
  double dual;    // R*(mu, -dF/dmu)
  double fr_primal;  // R_FR(mu, mudot) for the same rate field
};

RatePair dissipation_rates(const GeometrySpec& g, const EnergySpec& e,
                           const GridMeasure& mu) {
  const Eigen::VectorXd xi = first_variation(e, mu).values.values;
  if (std::holds_alternative<FisherRaoGeometry>(g)) {
    const double v = 0.5 * weighted_inner(xi, xi, mu);
    return {v, v, v};
  }
  if (const auto* kfr = std::get_if<KernelizedFrGeometry>(&g)) {
    const WeightedOperator op = make_operator(kfr->kernel, mu);
    const Eigen::VectorXd smoothed = apply_integral_operator(op, xi);
    const double v = 0.5 * weighted_inner(xi, smoothed, mu);
    return {v, v, 0.5 * weighted_inner(smoothed, smoothed, mu)};
  }
  if (const auto* krr = std::get_if<KrrFrGeometry>(&g)) {
    const WeightedOperator op = make_operator(krr->kernel, mu);
    const Eigen::VectorXd r =
        solve_regularized(op, krr->lambda, apply_integral_operator(op, xi));
    const Eigen::VectorXd c = solve_regularized(op, krr->lambda, xi);
    const double fr_part = 0.5 * weighted_inner(r, r, mu);
    const double primal = fr_part + 0.5 * krr->lambda * weighted_inner(r, c, mu);
    const double dual = 0.5 * weighted_inner(xi, r, mu);
    return {primal, dual, fr_part};
  }
  throw std::invalid_argument("EDP functional implemented for reaction geometries");
}

}  // namespace

double edp_functional(const Trajectory& trajectory, const GeometrySpec& g,
                      const EnergySpec& e) {
  const size_t m = trajectory.states.size();
  if (m < 2) throw std::invalid_argument("trajectory needs at least 2 recorded states");
  std::vector<double> integrand(m);
  for (size_t k = 0; k < m; ++k) {
    const RatePair rates = dissipation_rates(g, e, trajectory.states[k]);
    integrand[k] = rates.primal + rates.dual;
  }
  double acc = 0.0;
  for (size_t k = 0; k + 1 < m; ++k) {
    acc += 0.5 * (integrand[k] + integrand[k + 1]) *
           (trajectory.times[k + 1] - trajectory.times[k]);
  }
  return acc;
}

double edp_defect(const Trajectory& trajectory, const GeometrySpec& g,
                  const EnergySpec& e) {
  const double d = edp_functional(trajectory, g, e);
  return energy_value(e, trajectory.states.back()) + d -
         energy_value(e, trajectory.states.front());
}

std::vector<GammaStudyRow> gamma_convergence_study(const EnergySpec& e,
                                                   const GridMeasure& mu0,
                                                   const KernelSpec& k,
                                                   const std::vector<double>& lambdas,
                                                   double t_end, double dt) {
  for (size_t i = 1; i < lambdas.size(); ++i) {
    if (!(lambdas[i] < lambdas[i - 1])) {
      throw std::invalid_argument("lambda list must be strictly decreasing");
    }
  }
  for (double l : lambdas) {
    if (!(l > 0.0)) throw std::invalid_argument("lambdas must be positive");
  }

  FlowSpec fr_spec{FisherRaoGeometry{}, e, mu0, t_end, dt, TimeScheme::Multiplicative, 1, {}};
  const Trajectory fr = solve_flow(fr_spec);
  const GeometrySpec fr_geo = FisherRaoGeometry{};
  const double d_fr = edp_functional(fr, fr_geo, e);
  const Eigen::VectorXd w = mu0.grid.quadrature_weights();

  std::vector<GammaStudyRow> rows;
  rows.reserve(lambdas.size());
  for (double lambda : lambdas) {
    const GeometrySpec geo = KrrFrGeometry{k, lambda};
    FlowSpec spec{geo, e, mu0, t_end, dt, TimeScheme::Multiplicative, 1, {}};
    const Trajectory traj = solve_flow(spec);
    if (traj.states.size() != fr.states.size()) {
      throw std::runtime_error("trajectory recording mismatch in gamma study");
    }

    double sup_err = 0.0;
    for (size_t s = 0; s < traj.states.size(); ++s) {
      const Eigen::ArrayXd diff =
          (traj.states[s].density - fr.states[s].density).array();
      sup_err = std::max(sup_err, std::sqrt((diff.square() * w.array()).sum()));
    }

    double rate_gap = 0.0;
    {
      std::vector<double> gap(traj.states.size());
      for (size_t s = 0; s < traj.states.size(); ++s) {
        const RatePair rates = dissipation_rates(geo, e, traj.states[s]);
        gap[s] = rates.primal - rates.fr_primal;
      }
      for (size_t s = 0; s + 1 < gap.size(); ++s) {
        rate_gap += 0.5 * (gap[s] + gap[s + 1]) * (traj.times[s + 1] - traj.times[s]);
      }
    }

    GammaStudyRow row{};
    row.lambda = lambda;
    row.sup_l2_error = sup_err;
    row.d_lambda = edp_functional(traj, geo, e);
    row.d_fr = d_fr;
    row.edp_defect = edp_defect(traj, geo, e);
    row.rate_gap = rate_gap;
    rows.push_back(row);
  }
  return rows;
}

LojasiewiczReport lojasiewicz_bound_check(const EnergySpec& e, const GridMeasure& mu,
                                          const KernelSpec& k, double lambda, double s) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (s < 0.0 || s > 1.0) throw std::invalid_argument("s must lie in [0, 1]");
  const WeightedOperator op = make_operator(k, mu);
  const Eigen::VectorXd xi = first_variation(e, mu).values.values;

  const Eigen::VectorXd filtered =
      solve_regularized(op, lambda, apply_integral_operator(op, xi));
  const double rate = -weighted_inner(xi, filtered, mu);

  const Eigen::VectorXd shifted_power = operator_power(op, -0.5 * s, xi, lambda);
  const double xi_l2 = weighted_inner(xi, xi, mu);
  const double bound =
      -xi_l2 + std::pow(lambda, s) * weighted_inner(shifted_power, shifted_power, mu);
  return {s, rate, bound, bound - rate};
}

Corpus make_corpus(std::uint64_t seed, int n_measures, int grid_n) {
  Corpus corpus{Grid(0.0, 1.0, grid_n), {}, gaussian_measure(Grid(0.0, 1.0, grid_n), 0.5, 0.2, 1.0),
                {}, {}};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(-0.6, 0.6);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> level(0.4, 1.6);
  for (int m = 0; m < n_measures; ++m) {
    const double a1 = amp(rng), a2 = amp(rng) / 2.0, a3 = amp(rng) / 3.0;
    const double p1 = phase(rng), p2 = phase(rng), p3 = phase(rng);
    const double c = level(rng);
    Eigen::VectorXd rho(grid_n);
    for (int i = 0; i < grid_n; ++i) {
      const double x = corpus.grid.node(i);
      rho[i] = c * std::exp(a1 * std::sin(2.0 * M_PI * x + p1) +
                            a2 * std::sin(4.0 * M_PI * x + p2) +
                            a3 * std::sin(6.0 * M_PI * x + p3));
    }
    corpus.measures.emplace_back(corpus.grid, rho);
  }
  corpus.kernels = {KernelSpec{KernelFamily::Gaussian, 0.2, 1.0},
                    KernelSpec{KernelFamily::Laplace, 0.4, 1.0},
                    KernelSpec{KernelFamily::InverseMultiquadric, 0.3, 1.0}};
  corpus.kinds = {DivergenceKind::KL, DivergenceKind::InclusiveKL, DivergenceKind::Chi2,
                  DivergenceKind::Hellinger};
  return corpus;
}

namespace {

void push(std::vector<CheckResult>& out, const std::string& name, double defect,
          double tolerance) {
  out.push_back({name, defect <= tolerance, defect, tolerance});
}

}  // namespace

std::vector<CheckResult> run_identity_suite(std::uint64_t seed) {
  std::vector<CheckResult> results;
  const Corpus corpus = make_corpus(seed);
  const KernelSpec& gauss = corpus.kernels[0];
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);

  // Fisher-Rao geodesic scaling: FR^2(w(s), w(t)) = (s-t)^2 FR^2(mu0, mu1).
  {
    double defect = 0.0;
    for (size_t i = 0; i < corpus.measures.size(); ++i) {
      const GridMeasure& mu0 = corpus.measures[i];
      const GridMeasure& mu1 = corpus.measures[(i + 1) % corpus.measures.size()];
      const double fr2 = fisher_rao2(mu0, mu1);
      for (const auto& [s, t] : {std::pair{0.25, 0.75}, std::pair{0.1, 0.6}}) {
        const double lhs = fisher_rao2(fr_geodesic(mu0, mu1, s), fr_geodesic(mu0, mu1, t));
        defect = std::max(defect, std::abs(lhs - (s - t) * (s - t) * fr2));
      }
    }
    push(results, "fr_geodesic_scaling", defect, 1e-12);
  }

  // Dynamic cost of the sampled geodesic reproduces FR^2 with O(N^-2) decay.
  {
    const GridMeasure& mu0 = corpus.measures[0];
    const GridMeasure& mu1 = corpus.measures[1];
    const double fr2 = fisher_rao2(mu0, mu1);
    std::vector<double> errs;
    for (int big_n : {51, 101, 201}) {
      std::vector<GridMeasure> path;
      std::vector<double> times;
      for (int j = 0; j < big_n; ++j) {
        const double s = static_cast<double>(j) / (big_n - 1);
        path.push_back(fr_geodesic(mu0, mu1, s));
        times.push_back(s);
      }
      errs.push_back(std::abs(fr_dynamic_cost(path, times) - fr2));
    }
    push(results, "fr_dynamic_cost_n201", errs.back(), 1e-3 * (1.0 + fr2));
    const double slope = std::log(errs.front() / errs.back()) / std::log(4.0);
    push(results, "fr_dynamic_cost_slope", std::abs(slope - 2.0), 0.3);
  }

  // MMD dual tightness over measure pairs and kernel families.
  {
    double defect = 0.0;
    for (size_t i = 0; i < corpus.measures.size(); ++i) {
      const GridMeasure& mu = corpus.measures[i];
      const GridMeasure& nu = corpus.measures[(i + 3) % corpus.measures.size()];
      for (const auto& k : corpus.kernels) {
        defect = std::max(defect, std::abs(mmd2(k, mu, nu) - mmd_dual_value(k, mu, nu)));
      }
    }
    push(results, "mmd_dual_tightness", defect, 1e-8);
  }

  // Inclusive-KL dissipation in the kernelized reaction flow is mmd2.
  {
    double defect = 0.0;
    for (const auto& mu : corpus.measures) {
      const EnergySpec e = EnergySpec::divergence(DivergenceKind::InclusiveKL, corpus.target);
      for (const auto& k : corpus.kernels) {
        defect = std::max(defect,
                          std::abs(frk_dissipation(e, mu, k) - mmd2(k, mu, corpus.target)));
      }
    }
    push(results, "frk_inclusive_kl_is_mmd2", defect, 1e-10);
  }

  // Tangent equivalence: (FR, MMD energy) vs (kernelized FR, inclusive KL).
  {
    double defect = 0.0;
    for (const auto& mu : corpus.measures) {
      const GridFunction t1 =
          rhs(FisherRaoGeometry{}, EnergySpec::mmd(corpus.target, gauss), mu);
      const GridFunction t2 =
          rhs(KernelizedFrGeometry{gauss},
              EnergySpec::divergence(DivergenceKind::InclusiveKL, corpus.target), mu);
      defect = std::max(defect, (t1.values - t2.values).cwiseAbs().maxCoeff());
    }
    push(results, "tangent_equivalence", defect, 1e-12);
  }

  // Finite-difference energy rate vs dissipation formula, Richardson ladder.
  {
    double worst_ratio_defect = 0.0;
    double chi2_defect = 0.0;
    const GridMeasure& mu = corpus.measures[2];
    for (const auto kind : corpus.kinds) {
      const EnergySpec e = EnergySpec::divergence(kind, corpus.target);
      const GeometrySpec g = KernelizedFrGeometry{gauss};
      const auto coarse = dissipation_identity_check(g, e, mu, 1e-3);
      const auto fine = dissipation_identity_check(g, e, mu, 5e-4);
      if (kind == DivergenceKind::Chi2) {
        // Quadratic energy: the symmetric difference is exact, no ladder.
        chi2_defect = coarse.abs_err / (1.0 + std::abs(coarse.formula_rate));
        continue;
      }
      const double ratio = coarse.abs_err / std::max(fine.abs_err, 1e-300);
      worst_ratio_defect = std::max(worst_ratio_defect, std::abs(ratio - 4.0));
    }
    push(results, "dissipation_identity_richardson", worst_ratio_defect, 0.5);
    push(results, "dissipation_identity_chi2_exact", chi2_defect, 1e-9);
  }

  // Stein dissipation identity on a smooth fine-grid case; the defect mixes
  // the O(dt^2) difference with the spatial quadrature mismatch.
  {
    const Grid fine(0.0, 1.0, 401);
    const GridMeasure mu = gaussian_measure(fine, 0.42, 0.14, 1.0);
    const GridMeasure pi = gaussian_measure(fine, 0.55, 0.17, 1.0);
    const EnergySpec e = EnergySpec::divergence(DivergenceKind::KL, pi);
    const KernelSpec k{KernelFamily::Gaussian, 0.2, 1.0};
    const auto report =
        dissipation_identity_check(SteinGeometry{k}, e, mu, 1e-4);
    push(results, "stein_dissipation_identity",
         report.abs_err / (1.0 + std::abs(report.formula_rate)), 1e-3);
  }

  // Rayleigh principle: regression and dissipation objectives differ by an
  // f-independent constant.
  {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(corpus.measures.size()) - 1);
    double defect = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const GridMeasure& mu = corpus.measures[pick(rng)];
      const EnergySpec e =
          EnergySpec::divergence(corpus.kinds[trial % corpus.kinds.size()], corpus.target);
      Eigen::VectorXd v1(mu.grid.n()), v2(mu.grid.n());
      for (int i = 0; i < mu.grid.n(); ++i) {
        v1[i] = unit(rng);
        v2[i] = unit(rng);
      }
      const auto report = rayleigh_equivalence_check(
          e, mu, GridFunction(mu.grid, v1), GridFunction(mu.grid, v2), 0.1, gauss);
      defect = std::max(defect, report.abs_err / report.scale);
    }
    push(results, "rayleigh_equivalence", defect, 1e-9);
  }

  // Flattened Fisher-Rao three-case theorem.
  {
    double defect = 0.0;
    for (size_t i = 0; i < corpus.measures.size(); ++i) {
      const GridMeasure& mu = corpus.measures[i];
      const GridMeasure& nu = corpus.measures[(i + 5) % corpus.measures.size()];
      defect = std::max(defect,
                        std::abs(flattened_fr2(mu, nu, nu) - chi2_divergence(mu, nu)));
      defect = std::max(defect,
                        std::abs(flattened_fr2(mu, nu, mu) - chi2_divergence(nu, mu)));
      defect = std::max(
          defect, std::abs(flattened_fr2(mu, nu, fr_geodesic_midpoint(mu, nu)) -
                           fisher_rao2(mu, nu)));
    }
    push(results, "flattened_fr_three_cases", defect, 1e-10);
  }

  // Flattened-W2 closed form vs the grid dual solve.
  {
    const Grid fine(0.0, 1.0, 400);
    Eigen::VectorXd a(fine.n()), b(fine.n());
    for (int i = 0; i < fine.n(); ++i) {
      const double x = fine.node(i);
      a[i] = 1.0 + 0.5 * std::exp(-std::pow((x - 0.35) / 0.08, 2) / 2.0);
      b[i] = 1.0 + 0.5 * std::exp(-std::pow((x - 0.65) / 0.08, 2) / 2.0);
    }
    const GridMeasure mu(fine, a), nu(fine, b);
    const GridMeasure omega = uniform_measure(fine, fine.right() - fine.left());
    const double closed = flat_w2(mu, nu, omega);
    const double dual = flat_w2_dual(mu, nu, omega);
    push(results, "flat_w2_closed_vs_dual", std::abs(closed - dual), 5e-6);
  }

  // KRR contracts: normal equations, alternative-objective minimality,
  // ridge-monotone shrinkage.
  {
    const GridMeasure& mu = corpus.measures[4];
    const Eigen::VectorXd xi =
        first_variation(EnergySpec::divergence(DivergenceKind::KL, corpus.target), mu)
            .values.values;
    double residual_defect = 0.0;
    double gradient_defect = 0.0;
    double shrink_defect = 0.0;
    for (const auto& k : corpus.kernels) {
      // The ladder walks lambda downward, so the fitted norm grows toward
      // the target norm; a drop would violate the ridge monotonicity.
      double previous_norm = -std::numeric_limits<double>::infinity();
      for (double lambda : {10.0, 1.0, 0.1, 0.01}) {
        const KrrProblem p = make_krr_problem(k, mu, lambda);
        const Eigen::VectorXd g = krr_fit(p, xi);
        const Eigen::VectorXd residual = apply_integral_operator(p.op, g) + lambda * g -
                                         apply_integral_operator(p.op, xi);
        residual_defect = std::max(residual_defect, residual.norm() / (1.0 + xi.norm()));
        const Eigen::VectorXd grad =
            apply_integral_operator(p.op, g - xi) + lambda * g;
        gradient_defect = std::max(gradient_defect, grad.norm() / (1.0 + xi.norm()));
        const double norm = std::sqrt(weighted_inner(g, g, mu));
        shrink_defect = std::max(shrink_defect, previous_norm - norm);
        previous_norm = norm;
        shrink_defect =
            std::max(shrink_defect, norm - std::sqrt(weighted_inner(xi, xi, mu)) - 1e-10);
      }
    }
    push(results, "krr_normal_equations", residual_defect, 1e-10);
    push(results, "krr_alternative_gradient", gradient_defect, 1e-8);
    push(results, "krr_shrinkage_monotone", shrink_defect, 1e-12);
  }

  // Implicit score matching: direct and IBP forms agree.
  {
    const Grid wide(-6.0, 6.0, 800);
    const GridMeasure mu = gaussian_measure(wide, 0.0, 1.0, 1.0);
    const GridMeasure pi = gaussian_measure(wide, 0.3, 1.1, 1.0);
    const GridFunction f(wide, wide.nodes());
    const auto [d1, i1] = ism_objective(f, mu, mu);
    const auto [d2, i2] = ism_objective(f, mu, pi);
    push(results, "ism_identity", std::max(std::abs(d1 - i1), std::abs(d2 - i2)), 1e-4);
  }

  // Spectral dissipation bound with nonnegative slack; exact at s = 1 and
  // the two norm terms cancel exactly at s = 0.
  {
    double slack_defect = 0.0;
    double exact_defect = 0.0;
    std::uniform_int_distribution<int> pick(0, static_cast<int>(corpus.measures.size()) - 1);
    for (int trial = 0; trial < 50; ++trial) {
      const GridMeasure& mu = corpus.measures[pick(rng)];
      const EnergySpec e =
          EnergySpec::divergence(corpus.kinds[trial % corpus.kinds.size()], corpus.target);
      const double lambda = (trial % 2 == 0) ? 0.5 : 0.05;
      for (double s : {0.0, 0.5, 1.0}) {
        const auto report = lojasiewicz_bound_check(e, mu, gauss, lambda, s);
        const double scale = 1.0 + std::abs(report.rate);
        slack_defect = std::max(slack_defect, -report.slack / scale);
        if (s == 1.0) exact_defect = std::max(exact_defect, std::abs(report.slack) / scale);
        if (s == 0.0) exact_defect = std::max(exact_defect, std::abs(report.bound) / scale);
      }
    }
    push(results, "lojasiewicz_slack_nonnegative", slack_defect, 1e-9);
    push(results, "lojasiewicz_endpoint_identities", exact_defect, 1e-10);
  }

  // Spherical MMD flow preserves mass. The Laplace kernel keeps the
  // constant-function deconvolution in the projection bounded.
  {
    const KernelSpec& laplace = corpus.kernels[1];
    double defect = 0.0;
    for (int i = 0; i < 5; ++i) {
      // The spherical flow is the probability-space restriction, so start
      // on the unit-mass sphere; clipping would otherwise re-inject mass.
      const GridMeasure mu0 = normalize(corpus.measures[i]);
      FlowSpec spec{SphericalMmdGeometry{laplace}, EnergySpec::mmd(corpus.target, laplace),
                    mu0, 1.0, 1e-3, TimeScheme::ExplicitEuler, 100, {}};
      const Trajectory traj = solve_flow(spec);
      const double m0 = traj.diagnostics(0, 1);
      for (int r = 0; r < traj.diagnostics.rows(); ++r) {
        defect = std::max(defect, std::abs(traj.diagnostics(r, 1) - m0));
      }
    }
    push(results, "spherical_mmd_mass_preservation", defect, 1e-8);
  }

  // Equilibrium: mu = target is a fixed point of every geometry.
  {
    const GridMeasure& pi = corpus.target;
    const EnergySpec e = EnergySpec::divergence(DivergenceKind::KL, pi);
    const std::vector<GeometrySpec> geometries = {
        FisherRaoGeometry{},
        KernelizedFrGeometry{gauss},
        KrrFrGeometry{gauss, 0.1},
        MmdGeometry{gauss},
        SphericalMmdGeometry{gauss},
        FrRegMmdGeometry{gauss, 0.1},
        MmdRegFrGeometry{gauss, 0.1},
        SteinGeometry{gauss},
        RegularizedSteinGeometry{gauss, 0.1},
        WfrGeometry{gauss, gauss, 0.1},
        FlattenedFrGeometry{corpus.target}};
    double defect = 0.0;
    for (const auto& g : geometries) {
      defect = std::max(defect, rhs(g, e, pi).values.cwiseAbs().maxCoeff());
    }
    push(results, "equilibrium_fixed_points", defect, 1e-10);
  }

  // Empirical lambda -> 0 convergence and the energy-dissipation balance.
  {
    const Grid grid(0.0, 1.0, 129);
    const GridMeasure pi = gaussian_measure(grid, 0.5, 0.15, 1.0);
    const GridMeasure mu0 = gaussian_measure(grid, 0.55, 0.18, 1.0);
    const EnergySpec e = EnergySpec::divergence(DivergenceKind::KL, pi);
    const KernelSpec k{KernelFamily::Gaussian, 0.10, 1.0};
    const double dt = 1e-3;
    const std::vector<double> lambdas = {1.0, 0.3, 0.1, 0.03, 0.01, 0.003, 1e-8};
    const auto rows = gamma_convergence_study(e, mu0, k, lambdas, 0.5, dt);
    double monotone_defect = 0.0;
    double edp_worst = 0.0;
    double gap_defect = 0.0;
    const double f0 = energy_value(e, mu0);
    for (size_t i = 0; i < rows.size(); ++i) {
      if (i > 0) {
        monotone_defect =
            std::max(monotone_defect, rows[i].sup_l2_error - rows[i - 1].sup_l2_error);
      }
      edp_worst = std::max(edp_worst, rows[i].edp_defect);
      gap_defect = std::max(gap_defect, -rows[i].rate_gap);
    }
    push(results, "gamma_error_monotone", monotone_defect, 1e-12);
    push(results, "gamma_error_small_lambda", rows.back().sup_l2_error, 1e-5);
    push(results, "gamma_edp_inequality", edp_worst, 25.0 * dt * (1.0 + f0));
    push(results, "gamma_rate_lower_bound", gap_defect, 1e-9);
  }

  // SVGD on a 1-D gaussian target strictly decreases the grid-estimated
  // squared kernel Stein discrepancy.
  {
    std::normal_distribution<double> init(2.0, 0.5);
    const int n_particles = 100;
    Eigen::MatrixXd pos(n_particles, 1);
    for (int i = 0; i < n_particles; ++i) pos(i, 0) = init(rng);
    const ParticleMeasure start(pos, Eigen::VectorXd::Constant(n_particles, 1.0 / n_particles));
    const ScoreFunction score = [](const Eigen::VectorXd& x) {
      return Eigen::VectorXd(-x);
    };
    const KernelSpec k{KernelFamily::Gaussian, 0.5, 1.0};
    const auto traj = solve_svgd(k, start, score, 0.05, 200, 200);
    const Grid grid(-6.0, 6.0, 301);
    const GridMeasure pi = gaussian_measure(grid, 0.0, 1.0, 1.0);
    const EnergySpec e = EnergySpec::divergence(DivergenceKind::KL, pi);
    const auto ksd = [&](const ParticleMeasure& p) {
      return stein_dissipation(e, kde_density(grid, p, silverman_bandwidth(p)), k);
    };
    const double before = ksd(traj.states.front());
    const double after = ksd(traj.states.back());
    push(results, "svgd_ksd_decreases", after - before, -1e-12);
  }

  return results;
}

}  // namespace kgf
