#pragma once

#include <Eigen/Dense>

#include "kgf/measures.hpp"

// Kernel evaluation, Gram matrices and the measure-weighted integral
// operator f -> int k(., x) f(x) dmu(x), together with its regularized
// inverse and spectral powers. All solves go through the symmetrized form
// S = diag(sqrt(q)) K diag(sqrt(q)), which shares the spectrum of
// K diag(q) on the support of q.

namespace kgf {

enum class KernelFamily { Gaussian, Laplace, InverseMultiquadric };

struct KernelSpec {
  KernelFamily family = KernelFamily::Gaussian;
  double bandwidth = 1.0;  // sigma > 0
  double scale = 1.0;      // a > 0
};

void validate(const KernelSpec& k);

double kernel_eval(const KernelSpec& k, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& y);
double kernel_eval(const KernelSpec& k, double x, double y);

// Analytic gradient with respect to the first argument. The Laplace kernel
// is not differentiable at x == y and throws there.
Eigen::VectorXd kernel_grad_x(const KernelSpec& k, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& y);
double kernel_grad_x(const KernelSpec& k, double x, double y);

// sum_l d^2 k / dx_l dy_l, the mixed-derivative trace used by the
// RKHS-gradient dual quadratic forms. Gaussian and inverse-multiquadric
// only.
double kernel_cross_derivative(const KernelSpec& k, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& y);

struct GramMatrix {
  Eigen::MatrixXd points;   // n x d
  Eigen::MatrixXd entries;  // symmetric n x n
};

GramMatrix gram(const KernelSpec& k, const Eigen::MatrixXd& points);
// Gram of the mixed derivatives, (G12)_ij = sum_l d^2 k/dx_l dy_l (p_i, p_j).
GramMatrix derivative_gram(const KernelSpec& k, const Eigen::MatrixXd& points);

// Discrete K_mu: (K_mu f)_i = sum_j K_ij f_j q_j with q_j >= 0 the density
// times quadrature weight (grid) or the particle weight.
struct WeightedOperator {
  GramMatrix gram;
  Eigen::VectorXd weights;
};

WeightedOperator make_operator(const KernelSpec& k, const GridMeasure& m);
WeightedOperator make_operator(const KernelSpec& k, const ParticleMeasure& m);
// Lebesgue-weighted operator on the grid (q = quadrature weights only).
WeightedOperator make_lebesgue_operator(const KernelSpec& k, const Grid& grid);

// Diagonal shift 1e-12 * trace(S)/n added to every factorization.
double operator_jitter(const WeightedOperator& op);

Eigen::VectorXd apply_integral_operator(const WeightedOperator& op,
                                        const Eigen::VectorXd& f);

// Solves (K_mu + lambda I) v = rhs. lambda = 0 falls back to the jitter
// shift; a zero shift with a null operator is rejected as singular.
// Zero-weight nodes are excluded from the symmetrized solve; their entries
// follow from the lambda term once the support values are known.
Eigen::VectorXd solve_regularized(const WeightedOperator& op, double lambda,
                                  const Eigen::VectorXd& rhs);

// Spectral power (K_mu + shift I)^alpha f via the eigendecomposition of the
// symmetrized operator. Eigenvalues are clamped at zero and jittered before
// the power, so negative alpha stays finite. Zero-weight nodes lie outside
// L^2_mu; their result entries are f_i for alpha == 0 and 0 otherwise.
Eigen::VectorXd operator_power(const WeightedOperator& op, double alpha,
                               const Eigen::VectorXd& f, double shift = 0.0);

// (K mu)(x) = int k(x, .) dmu at each query point (rows of queries).
Eigen::VectorXd kernel_mean_embedding(const KernelSpec& k, const GridMeasure& m,
                                      const Eigen::MatrixXd& queries);
Eigen::VectorXd kernel_mean_embedding(const KernelSpec& k,
                                      const ParticleMeasure& m,
                                      const Eigen::MatrixXd& queries);

// Median of pairwise distances; a bandwidth default, not a tuner.
double median_heuristic_bandwidth(const Eigen::MatrixXd& points);

}  // namespace kgf
