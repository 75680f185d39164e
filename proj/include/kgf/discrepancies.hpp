#pragma once

#include <Eigen/Dense>

#include "kgf/energies.hpp"
#include "kgf/kernels.hpp"
#include "kgf/measures.hpp"

// Static distances, divergences and dissipation functionals between
// measures. The RKHS duals are evaluated through a representer ansatz over
// a finite center set; for gradient-penalized duals this is a lower bound
// of the true supremum that tightens under center enrichment.

namespace kgf {

// sup over coefficients of alpha^T moments - (1/4) alpha^T Q alpha, which
// equals moments^T Q^{-1} moments. Q is factored with the usual jitter;
// jitter_warning flags a numerically singular Q.
struct DualQuadratic {
  Eigen::VectorXd moments;
  Eigen::MatrixXd quadratic;

  double value() const;
  Eigen::VectorXd maximizer() const;  // alpha* = 2 Q^{-1} moments
  bool jitter_warning() const;
};

double mmd2(const KernelSpec& k, const GridMeasure& mu, const GridMeasure& nu);
double mmd2(const KernelSpec& k, const ParticleMeasure& mu, const ParticleMeasure& nu);

// Representer evaluation of sup_h <h, mu-nu> - (1/4)||h||_H^2 over the
// support points; tight against mmd2.
double mmd_dual_value(const KernelSpec& k, const GridMeasure& mu, const GridMeasure& nu);
double mmd_dual_value(const KernelSpec& k, const ParticleMeasure& mu,
                      const ParticleMeasure& nu);

// 4 int (sqrt(mu) - sqrt(nu))^2 dx, squared Fisher-Rao (Hellinger) distance.
double fisher_rao2(const GridMeasure& mu, const GridMeasure& nu);

// D_chi2(mu | nu) = int (dmu/dnu - 1)^2 dnu.
double chi2_divergence(const GridMeasure& mu, const GridMeasure& nu);

// int (mu - nu)^2 / omega dx; omega = nu gives chi2(mu|nu), omega = mu the
// reverse, and the Fisher-Rao geodesic midpoint gives fisher_rao2 itself.
double flattened_fr2(const GridMeasure& mu, const GridMeasure& nu,
                     const GridMeasure& omega);
GridMeasure fr_geodesic_midpoint(const GridMeasure& mu, const GridMeasure& nu);

// int int xi(x) k(x,y) xi(y) dmu dmu with xi = dF/dmu: the energy
// dissipation rate of the kernelized reaction flow.
double frk_dissipation(const EnergySpec& e, const GridMeasure& mu, const KernelSpec& k);

// int int xi'(x) k(x,y) xi'(y) dmu dmu: the dissipation rate of the
// kernel-smoothed transport flow (squared KSD for the KL energy).
double stein_dissipation(const EnergySpec& e, const GridMeasure& mu, const KernelSpec& k);

// Flat transport dual sup_z <z, mu-nu> - (1/4)||grad z||_H^2 through the
// representer ansatz z = sum alpha_i k(c_i, .). The DualQuadratic form
// carries the jitter_warning flag for numerically singular Grams.
DualQuadratic de_stein_dual(const GridMeasure& mu, const GridMeasure& nu,
                            const KernelSpec& k, const Eigen::MatrixXd& centers);
double de_stein2(const GridMeasure& mu, const GridMeasure& nu, const KernelSpec& k,
                 const Eigen::MatrixXd& centers);
double de_stein2(const GridMeasure& mu, const GridMeasure& nu, const KernelSpec& k);
double de_stein2(const ParticleMeasure& mu, const ParticleMeasure& nu, const KernelSpec& k,
                 const Eigen::MatrixXd& centers);
double de_stein2(const ParticleMeasure& mu, const ParticleMeasure& nu, const KernelSpec& k);

// Weighted H^{-1} discrepancy in closed form: int F^2 / omega dx with
// F(x) = int_left^x (mu - nu). Requires equal masses.
double flat_w2(const GridMeasure& mu, const GridMeasure& nu, const GridMeasure& omega);
// Independent route: maximize the static dual over grid node values with a
// two-point finite-volume stiffness form.
double flat_w2_dual(const GridMeasure& mu, const GridMeasure& nu,
                    const GridMeasure& omega);

// mmd2 + lambda * fisher_rao2.
double mmd_fr2(const KernelSpec& k, const GridMeasure& mu, const GridMeasure& nu,
               double lambda);

// Reaction-transport dual with both RKHS penalties:
// sup_z <z, mu-nu> - (1/4)||grad z||_H^2 - (1/4)||z||_H^2.
double d_wfr2(const GridMeasure& mu, const GridMeasure& nu, const KernelSpec& k,
              const Eigen::MatrixXd& centers);
double d_wfr2(const GridMeasure& mu, const GridMeasure& nu, const KernelSpec& k);

// Regularized kernel Sobolev-Fisher discrepancy:
// sup_z <z, mu-nu> - (1/4)||grad z||^2_{L^2_nu} - (1/4)||z||^2_{L^2_nu}
//       - (a/2)||z||_H^2, representer coefficients over the grid nodes.
double ksf2(const GridMeasure& mu, const GridMeasure& nu, const KernelSpec& k, double a);

}  // namespace kgf
