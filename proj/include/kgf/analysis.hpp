#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kgf/energies.hpp"
#include "kgf/flows.hpp"
#include "kgf/measures.hpp"

// Numerical certification of the structural identities: dissipation
// formulas, the regression/Rayleigh equivalence, energy-dissipation
// balance, the spectral dissipation bound, and the lambda -> 0 convergence
// study for the ridge-regularized reaction flows.

namespace kgf {

struct DissipationIdentityReport {
  double fd_rate;       // -(F(mu_{+dt}) - F(mu_{-dt})) / (2 dt) along one step
  double formula_rate;  // frk_dissipation or stein_dissipation
  double abs_err;
};

// Geometry must be KernelizedFr (reaction) or Stein (transport).
DissipationIdentityReport dissipation_identity_check(const GeometrySpec& g,
                                                     const EnergySpec& e,
                                                     const GridMeasure& mu, double dt);

struct RayleighReport {
  double regression_delta;  // J(f1) - J(f2)
  double rayleigh_delta;    // R(f1) - R(f2)
  double abs_err;
  double scale;
};

// J(f) = ||f - xi||^2_{L^2_mu} + lambda |f|_H^2 and
// R(f) = 2 dF/dt(mu^f) + ||f||^2_{L^2_mu} + lambda |f|_H^2 differ by a
// constant in f; the report compares their differences.
RayleighReport rayleigh_equivalence_check(const EnergySpec& e, const GridMeasure& mu,
                                          const GridFunction& f1, const GridFunction& f2,
                                          double lambda, const KernelSpec& k);

// Dissipation functional int (R(mu, mudot) + R*(mu, -dF/dmu)) dt along a
// recorded trajectory, with the rate field re-evaluated from the geometry
// at each state. Reaction geometries only (FisherRao, KernelizedFr, KrrFr).
double edp_functional(const Trajectory& trajectory, const GeometrySpec& g,
                      const EnergySpec& e);
// F(end) + D - F(start); at most O(dt) for trajectories of solve_flow.
double edp_defect(const Trajectory& trajectory, const GeometrySpec& g,
                  const EnergySpec& e);

struct GammaStudyRow {
  double lambda;
  double sup_l2_error;  // sup over recorded times of the grid-L2 density gap
  double d_lambda;      // dissipation functional of the lambda system
  double d_fr;          // Fisher-Rao dissipation functional of the limit flow
  double edp_defect;    // F(T) + D_lambda - F(0) for the lambda trajectory
  double rate_gap;      // int (R_lambda - R_FR)(mu_lambda, mudot) dt, >= 0
};

std::vector<GammaStudyRow> gamma_convergence_study(const EnergySpec& e,
                                                   const GridMeasure& mu0,
                                                   const KernelSpec& k,
                                                   const std::vector<double>& lambdas,
                                                   double t_end, double dt);

struct LojasiewiczReport {
  double s;
  double rate;   // dF/dt of the ridge-regularized reaction flow, spectral
  double bound;  // -||xi||^2 + lambda^s ||(K_mu + lambda I)^{-s/2} xi||^2
  double slack;  // bound - rate, >= 0; identically 0 at s = 1
};

LojasiewiczReport lojasiewicz_bound_check(const EnergySpec& e, const GridMeasure& mu,
                                          const KernelSpec& k, double lambda, double s);

// Seeded random corpus shared by the verification suite and the acceptance
// tests: smooth positive densities on [0, 1], one fixed target, three
// kernel families, four divergence kinds.
struct Corpus {
  Grid grid;
  std::vector<GridMeasure> measures;
  GridMeasure target;
  std::vector<KernelSpec> kernels;
  std::vector<DivergenceKind> kinds;
};

Corpus make_corpus(std::uint64_t seed, int n_measures = 20, int grid_n = 64);

struct CheckResult {
  std::string name;
  bool pass;
  double defect;
  double tolerance;
};

// Runs every structural identity over the corpus at its stated tolerance.
std::vector<CheckResult> run_identity_suite(std::uint64_t seed);

}  // namespace kgf
