#include "kgf/discrepancies.hpp"

#include <cmath>
#include <stdexcept>

namespace kgf {

namespace {

constexpr double kJitterScale = 1e-12;

double matrix_jitter(const Eigen::MatrixXd& q) {
  return kJitterScale * q.trace() / q.rows();
}

// Signed node masses (mu - nu) .* w on a shared grid.
Eigen::VectorXd signed_mass(const GridMeasure& mu, const GridMeasure& nu) {
  require_same_grid(mu.grid, nu.grid);
  const Eigen::VectorXd w = mu.grid.quadrature_weights();
  return ((mu.density - nu.density).array() * w.array()).matrix();
}

}  // namespace

double DualQuadratic::value() const {
  if (moments.size() != quadratic.rows()) throw std::invalid_argument("length mismatch");
  Eigen::MatrixXd q = quadratic;
  q.diagonal().array() += matrix_jitter(quadratic);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(q);
  if (ldlt.info() != Eigen::Success) throw std::runtime_error("singular dual quadratic");
  Eigen::VectorXd alpha = ldlt.solve(moments);
  alpha += ldlt.solve(moments - q * alpha);
  return moments.dot(alpha);
}

Eigen::VectorXd DualQuadratic::maximizer() const {
  Eigen::MatrixXd q = quadratic;
  q.diagonal().array() += matrix_jitter(quadratic);
  return 2.0 * Eigen::LDLT<Eigen::MatrixXd>(q).solve(moments);
}

bool DualQuadratic::jitter_warning() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(quadratic, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  return lo < 1e-10 * std::max(hi, 1.0);
}

double mmd2(const KernelSpec& k, const GridMeasure& mu, const GridMeasure& nu) {
  const Eigen::VectorXd s = signed_mass(mu, nu);
  const Eigen::MatrixXd kk = gram(k, mu.grid.nodes()).entries;
  return s.dot(kk * s);
}

double mmd2(const KernelSpec& k, const ParticleMeasure& mu, const ParticleMeasure& nu) {
  if (mu.dim() != nu.dim()) throw std::invalid_argument("point dimension mismatch");
  Eigen::MatrixXd pts(mu.size() + nu.size(), mu.dim());
  pts.topRows(mu.size()) = mu.positions;
  pts.bottomRows(nu.size()) = nu.positions;
  Eigen::VectorXd s(mu.size() + nu.size());
  s.head(mu.size()) = mu.weights;
  s.tail(nu.size()) = -nu.weights;
  const Eigen::MatrixXd kk = gram(k, pts).entries;
  return s.dot(kk * s);
}

namespace {

double mmd_dual_impl(const KernelSpec& k, const Eigen::MatrixXd& pts,
                     const Eigen::VectorXd& s) {
  DualQuadratic dual;
  dual.quadratic = gram(k, pts).entries;
  dual.moments = dual.quadratic * s;  // int k(c_i, .) d(mu - nu)
  return dual.value();
}

}  // namespace

double mmd_dual_value(const KernelSpec& k, const GridMeasure& mu, const GridMeasure& nu) {
  return mmd_dual_impl(k, mu.grid.nodes(), signed_mass(mu, nu));
}

double mmd_dual_value(const KernelSpec& k, const ParticleMeasure& mu,
                      const ParticleMeasure& nu) {
  if (mu.dim() != nu.dim()) throw std::invalid_argument("point dimension mismatch");
  Eigen::MatrixXd pts(mu.size() + nu.size(), mu.dim());
  pts.topRows(mu.size()) = mu.positions;
  pts.bottomRows(nu.size()) = nu.positions;
  Eigen::VectorXd s(mu.size() + nu.size());
  s.head(mu.size()) = mu.weights;
  s.tail(nu.size()) = -nu.weights;
  return mmd_dual_impl(k, pts, s);
}

double fisher_rao2(const GridMeasure& mu, const GridMeasure& nu) {
  require_same_grid(mu.grid, nu.grid);
  const Eigen::VectorXd w = mu.grid.quadrature_weights();
  const Eigen::ArrayXd d = mu.density.array().sqrt() - nu.density.array().sqrt();
  return 4.0 * (d.square() * w.array()).sum();
}

double chi2_divergence(const GridMeasure& mu, const GridMeasure& nu) {
  require_same_grid(mu.grid, nu.grid);
  const Eigen::VectorXd w = mu.grid.quadrature_weights();
  const Eigen::ArrayXd nf = floored(nu.density).array();
  const Eigen::ArrayXd r = mu.density.array() / nf - 1.0;
  return (r.square() * nf * w.array()).sum();
}

double flattened_fr2(const GridMeasure& mu, const GridMeasure& nu,
                     const GridMeasure& omega) {
  require_same_grid(mu.grid, nu.grid);
  require_same_grid(omega.grid, mu.grid);
  const Eigen::VectorXd w = mu.grid.quadrature_weights();
  const Eigen::ArrayXd d = (mu.density - nu.density).array();
  return (d.square() / floored(omega.density).array() * w.array()).sum();
}

GridMeasure fr_geodesic_midpoint(const GridMeasure& mu, const GridMeasure& nu) {
  require_same_grid(mu.grid, nu.grid);
  const Eigen::ArrayXd s = 0.5 * (mu.density.array().sqrt() + nu.density.array().sqrt());
  return GridMeasure(mu.grid, (s * s).matrix());
}

double frk_dissipation(const EnergySpec& e, const GridMeasure& mu, const KernelSpec& k) {
  const FirstVariation fv = first_variation(e, mu);
  const Eigen::VectorXd w = mu.grid.quadrature_weights();
  const Eigen::VectorXd v =
      (fv.values.values.array() * mu.density.array() * w.array()).matrix();
  const Eigen::MatrixXd kk = gram(k, mu.grid.nodes()).entries;
  return v.dot(kk * v);
}

double stein_dissipation(const EnergySpec& e, const GridMeasure& mu, const KernelSpec& k) {
  const FirstVariation fv = first_variation(e, mu);
  const Eigen::VectorXd w = mu.grid.quadrature_weights();
  const Eigen::VectorXd v =
      (fv.gradient.values.array() * mu.density.array() * w.array()).matrix();
  const Eigen::MatrixXd kk = gram(k, mu.grid.nodes()).entries;
  return v.dot(kk * v);
}

namespace {

// Moments m_i = int k(c_i, .) d(mu - nu) for a center set.
Eigen::VectorXd center_moments(const KernelSpec& k, const GridMeasure& mu,
                               const GridMeasure& nu, const Eigen::MatrixXd& centers) {
  return kernel_mean_embedding(k, mu, centers) - kernel_mean_embedding(k, nu, centers);
}

}  // namespace

DualQuadratic de_stein_dual(const GridMeasure& mu, const GridMeasure& nu,
                            const KernelSpec& k, const Eigen::MatrixXd& centers) {
  require_same_grid(mu.grid, nu.grid);
  DualQuadratic dual;
  dual.moments = center_moments(k, mu, nu, centers);
  dual.quadratic = derivative_gram(k, centers).entries;
  return dual;
}

double de_stein2(const GridMeasure& mu, const GridMeasure& nu, const KernelSpec& k,
                 const Eigen::MatrixXd& centers) {
  return de_stein_dual(mu, nu, k, centers).value();
}

double de_stein2(const GridMeasure& mu, const GridMeasure& nu, const KernelSpec& k) {
  return de_stein2(mu, nu, k, mu.grid.nodes());
}

double de_stein2(const ParticleMeasure& mu, const ParticleMeasure& nu, const KernelSpec& k,
                 const Eigen::MatrixXd& centers) {
  DualQuadratic dual;
  dual.moments =
      kernel_mean_embedding(k, mu, centers) - kernel_mean_embedding(k, nu, centers);
  dual.quadratic = derivative_gram(k, centers).entries;
  return dual.value();
}

double de_stein2(const ParticleMeasure& mu, const ParticleMeasure& nu, const KernelSpec& k) {
  if (mu.dim() != nu.dim()) throw std::invalid_argument("point dimension mismatch");
  Eigen::MatrixXd centers(mu.size() + nu.size(), mu.dim());
  centers.topRows(mu.size()) = mu.positions;
  centers.bottomRows(nu.size()) = nu.positions;
  return de_stein2(mu, nu, k, centers);
}

double flat_w2(const GridMeasure& mu, const GridMeasure& nu, const GridMeasure& omega) {
  require_same_grid(mu.grid, nu.grid);
  require_same_grid(omega.grid, mu.grid);
  if (std::abs(mass(mu) - mass(nu)) > 1e-10 * (1.0 + mass(mu) + mass(nu))) {
    throw std::invalid_argument("H^{-1} requires equal mass");
  }
  const int n = mu.grid.n();
  const double h = mu.grid.spacing();
  const Eigen::VectorXd d = mu.density - nu.density;
  // Cumulative trapezoid of mu - nu from the left endpoint.
  Eigen::VectorXd big_f(n);
  big_f[0] = 0.0;
  for (int i = 1; i < n; ++i) {
    big_f[i] = big_f[i - 1] + 0.5 * h * (d[i - 1] + d[i]);
  }
  const Eigen::VectorXd w = mu.grid.quadrature_weights();
  return (big_f.array().square() / floored(omega.density).array() * w.array()).sum();
}

double flat_w2_dual(const GridMeasure& mu, const GridMeasure& nu,
                    const GridMeasure& omega) {
  require_same_grid(mu.grid, nu.grid);
  require_same_grid(omega.grid, mu.grid);
  if (std::abs(mass(mu) - mass(nu)) > 1e-10 * (1.0 + mass(mu) + mass(nu))) {
    throw std::invalid_argument("H^{-1} requires equal mass");
  }
  const int n = mu.grid.n();
  const double h = mu.grid.spacing();
  // Two-point finite-volume stiffness: ||grad z||^2_{L^2_omega} =
  // sum over faces of omega_face * ((z_{i+1} - z_i)/h)^2 * h.
  Eigen::MatrixXd stiff = Eigen::MatrixXd::Zero(n, n);
  const Eigen::VectorXd of = floored(omega.density);
  for (int i = 0; i + 1 < n; ++i) {
    const double c = 0.5 * (of[i] + of[i + 1]) / h;
    stiff(i, i) += c;
    stiff(i + 1, i + 1) += c;
    stiff(i, i + 1) -= c;
    stiff(i + 1, i) -= c;
  }
  DualQuadratic dual;
  dual.moments = signed_mass(mu, nu);
  dual.quadratic = stiff;
  return dual.value();
}

double mmd_fr2(const KernelSpec& k, const GridMeasure& mu, const GridMeasure& nu,
               double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("lambda must be non-negative");
  return mmd2(k, mu, nu) + lambda * fisher_rao2(mu, nu);
}

double d_wfr2(const GridMeasure& mu, const GridMeasure& nu, const KernelSpec& k,
              const Eigen::MatrixXd& centers) {
  require_same_grid(mu.grid, nu.grid);
  DualQuadratic dual;
  dual.moments = center_moments(k, mu, nu, centers);
  dual.quadratic = gram(k, centers).entries + derivative_gram(k, centers).entries;
  return dual.value();
}

double d_wfr2(const GridMeasure& mu, const GridMeasure& nu, const KernelSpec& k) {
  return d_wfr2(mu, nu, k, mu.grid.nodes());
}

double ksf2(const GridMeasure& mu, const GridMeasure& nu, const KernelSpec& k, double a) {
  require_same_grid(mu.grid, nu.grid);
  if (!(a > 0.0)) throw std::invalid_argument("ksf2 requires a > 0");
  const Eigen::MatrixXd centers = mu.grid.nodes();
  const int n = mu.grid.n();
  const Eigen::VectorXd qnu =
      (nu.density.array() * mu.grid.quadrature_weights().array()).matrix();

  const Eigen::MatrixXd kc = gram(k, centers).entries;
  // ||z||^2_{L^2_nu} = alpha^T Kc diag(qnu) Kc alpha.
  const Eigen::MatrixXd l2_gram = kc * qnu.asDiagonal() * kc;

  // ||grad z||^2_{L^2_nu}: gradients of k(c_p, .) at the quadrature nodes.
  Eigen::MatrixXd gradk(n, n);
  for (int p = 0; p < n; ++p) {
    for (int i = 0; i < n; ++i) {
      // d/dx k(c_p, x) = -d/dc k(c_p, x) for radial kernels.
      gradk(p, i) = -kernel_grad_x(k, centers(p, 0), centers(i, 0));
    }
  }
  const Eigen::MatrixXd grad_gram = gradk * qnu.asDiagonal() * gradk.transpose();

  DualQuadratic dual;
  dual.moments = center_moments(k, mu, nu, centers);
  dual.quadratic = l2_gram + grad_gram + 2.0 * a * kc;
  return dual.value();
}

}  // namespace kgf
