#pragma once

#include <Eigen/Dense>

#include "kgf/kernels.hpp"
#include "kgf/measures.hpp"

// Nonparametric estimators of growth and velocity fields: kernel ridge
// regression against a weighting measure, its quadratic alternative
// objective, local kernel smoothing, and the implicit score-matching
// objective in its two algebraic forms.

namespace kgf {

struct KrrProblem {
  KernelSpec kernel;
  WeightedOperator op;  // K_rho for the weighting measure
  double ridge;         // lambda > 0 (0 falls back to jitter)
};

KrrProblem make_krr_problem(const KernelSpec& k, const GridMeasure& rho, double ridge);
KrrProblem make_krr_problem(const KernelSpec& k, const ParticleMeasure& rho, double ridge);

// g = (K_rho + lambda I)^{-1} K_rho xi, the ridge-filtered target.
Eigen::VectorXd krr_fit(const KrrProblem& p, const Eigen::VectorXd& target);
// Vector-valued targets columnwise.
Eigen::MatrixXd krr_fit(const KrrProblem& p, const Eigen::MatrixXd& target);

// <f - xi, K_rho (f - xi)>_{L^2_rho} + lambda ||f||^2_{L^2_rho}; minimized
// by krr_fit over node values.
double krr_alternative_objective(const KrrProblem& p, const Eigen::VectorXd& target,
                                 const Eigen::VectorXd& f);

// Representer coefficients beta = (K_rho + lambda I)^{-1} xi; the fit is
// K_rho beta on the nodes and extends off-grid through the kernel.
Eigen::VectorXd krr_coefficients(const KrrProblem& p, const Eigen::VectorXd& target);
Eigen::VectorXd krr_extend(const KrrProblem& p, const Eigen::VectorXd& coefficients,
                           const Eigen::MatrixXd& queries);

// Shift-invariant kernel smoother sum k(x_i - x) y_i / sum k(x_i - x).
double nadaraya_watson(const KernelSpec& k, const Eigen::MatrixXd& samples,
                       const Eigen::VectorXd& targets, const Eigen::VectorXd& x);
Eigen::VectorXd nadaraya_watson(const KernelSpec& k, const Eigen::MatrixXd& samples,
                                const Eigen::MatrixXd& targets, const Eigen::VectorXd& x);

// Implicit score matching. direct drops the f-independent constant:
//   direct = ||f||^2_{L^2_mu} - 2 <f, grad log(mu/pi)>_{L^2_mu}
//   ibp    = int (f^2 + 2 div f + 2 f grad log pi) dmu
// The two differ by quadrature and boundary terms only.
std::pair<double, double> ism_objective(const GridFunction& f, const GridMeasure& mu,
                                        const GridMeasure& pi);

// Gaussian kernel density estimate of a particle cloud on a grid; total
// mass matches the particle mass up to tail truncation. 1-D particles only.
GridMeasure kde_density(const Grid& grid, const ParticleMeasure& particles,
                        double bandwidth);
// Silverman's rule for the KDE bandwidth.
double silverman_bandwidth(const ParticleMeasure& particles);

}  // namespace kgf
