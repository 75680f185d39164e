#pragma once

#include <vector>

#include "kgf/measures.hpp"

// Closed-form geodesics in the reaction and flat geometries, plus the
// dynamic-cost evaluation that certifies the dynamic formulation of the
// squared Fisher-Rao distance.

namespace kgf {

// omega(s) = ((1-s) sqrt(mu0) + s sqrt(mu1))^2, s in [0, 1].
GridMeasure fr_geodesic(const GridMeasure& mu0, const GridMeasure& mu1, double s);

// Straight line (1-t) mu0 + t mu1; convex combinations stay non-negative.
GridMeasure mmd_geodesic(const GridMeasure& mu0, const GridMeasure& mu1, double t);

// int ||xi_t||^2_{L^2_mu} dt with xi_t = -mudot/mu recovered by central
// differences in t (one-sided at the ends) and densities floored. Converges
// to fisher_rao2(mu0, mu1) on the sampled closed-form geodesic.
double fr_dynamic_cost(const std::vector<GridMeasure>& path,
                       const std::vector<double>& times);

struct HamiltonianCheck {
  GridFunction xi;        // xi(s) = xi0 / (1 + s xi0 / 2)
  GridMeasure mu;         // mu(s) = (1 + s xi0 / 2)^2 mu0
  double mu_residual;     // max |mudot + mu xi| by central differences in s
  double xi_residual;     // max |xidot + xi^2 / 2|
};

// Evaluates the explicit solution of the reaction-geometry geodesic system
// and its equation residuals at parameter s with step ds.
HamiltonianCheck fr_hamiltonian_check(const GridMeasure& mu0, const GridFunction& xi0,
                                      double s, double ds = 1e-4);

}  // namespace kgf
