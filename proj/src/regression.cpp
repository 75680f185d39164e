#include "kgf/regression.hpp"

#include <cmath>
#include <stdexcept>

namespace kgf {

KrrProblem make_krr_problem(const KernelSpec& k, const GridMeasure& rho, double ridge) {
  if (ridge < 0.0) throw std::invalid_argument("ridge must be non-negative");
  return KrrProblem{k, make_operator(k, rho), ridge};
}

KrrProblem make_krr_problem(const KernelSpec& k, const ParticleMeasure& rho, double ridge) {
  if (ridge < 0.0) throw std::invalid_argument("ridge must be non-negative");
  return KrrProblem{k, make_operator(k, rho), ridge};
}

Eigen::VectorXd krr_fit(const KrrProblem& p, const Eigen::VectorXd& target) {
  const Eigen::VectorXd rhs = apply_integral_operator(p.op, target);
  return solve_regularized(p.op, p.ridge, rhs);
}

Eigen::MatrixXd krr_fit(const KrrProblem& p, const Eigen::MatrixXd& target) {
  Eigen::MatrixXd out(target.rows(), target.cols());
  for (int j = 0; j < target.cols(); ++j) {
    out.col(j) = krr_fit(p, Eigen::VectorXd(target.col(j)));
  }
  return out;
}

double krr_alternative_objective(const KrrProblem& p, const Eigen::VectorXd& target,
                                 const Eigen::VectorXd& f) {
  if (f.size() != target.size() || f.size() != p.op.weights.size()) {
    throw std::invalid_argument("length mismatch");
  }
  const Eigen::VectorXd d = f - target;
  const Eigen::VectorXd kd = apply_integral_operator(p.op, d);
  const double quad = (d.array() * kd.array() * p.op.weights.array()).sum();
  const double ridge = (f.array().square() * p.op.weights.array()).sum();
  return quad + p.ridge * ridge;
}

Eigen::VectorXd krr_coefficients(const KrrProblem& p, const Eigen::VectorXd& target) {
  return solve_regularized(p.op, p.ridge, target);
}

Eigen::VectorXd krr_extend(const KrrProblem& p, const Eigen::VectorXd& coefficients,
                           const Eigen::MatrixXd& queries) {
  const Eigen::VectorXd masses =
      (p.op.weights.array() * coefficients.array()).matrix();
  Eigen::VectorXd out(queries.rows());
  for (int a = 0; a < queries.rows(); ++a) {
    double acc = 0.0;
    for (int j = 0; j < p.op.gram.points.rows(); ++j) {
      acc += kernel_eval(p.kernel, Eigen::VectorXd(queries.row(a).transpose()),
                         Eigen::VectorXd(p.op.gram.points.row(j).transpose())) *
             masses[j];
    }
    out[a] = acc;
  }
  return out;
}

Eigen::VectorXd nadaraya_watson(const KernelSpec& k, const Eigen::MatrixXd& samples,
                                const Eigen::MatrixXd& targets, const Eigen::VectorXd& x) {
  if (samples.rows() < 1) throw std::invalid_argument("nadaraya_watson needs samples");
  if (targets.rows() != samples.rows()) throw std::invalid_argument("length mismatch");
  double denom = 0.0;
  Eigen::VectorXd num = Eigen::VectorXd::Zero(targets.cols());
  for (int i = 0; i < samples.rows(); ++i) {
    const double ki = kernel_eval(k, Eigen::VectorXd(samples.row(i).transpose()), x);
    denom += ki;
    num += ki * targets.row(i).transpose();
  }
  if (!(denom > 0.0)) throw std::invalid_argument("empty neighborhood");
  return num / denom;
}

double nadaraya_watson(const KernelSpec& k, const Eigen::MatrixXd& samples,
                       const Eigen::VectorXd& targets, const Eigen::VectorXd& x) {
  return nadaraya_watson(k, samples, Eigen::MatrixXd(targets), x)[0];
}

std::pair<double, double> ism_objective(const GridFunction& f, const GridMeasure& mu,
                                        const GridMeasure& pi) {
  require_same_grid(f.grid, mu.grid);
  require_same_grid(pi.grid, mu.grid);
  const Eigen::VectorXd w = mu.grid.quadrature_weights();
  const Eigen::VectorXd log_ratio =
      (floored(mu.density).array() / floored(pi.density).array()).log().matrix();
  const Eigen::VectorXd score_diff = grid_gradient(mu.grid, log_ratio);
  const Eigen::VectorXd log_pi = floored(pi.density).array().log().matrix();
  const Eigen::VectorXd score_pi = grid_gradient(mu.grid, log_pi);
  const Eigen::VectorXd df = grid_gradient(mu.grid, f.values);

  const Eigen::ArrayXd fw = f.values.array();
  const Eigen::ArrayXd dmu = mu.density.array() * w.array();
  const double direct = (fw.square() * dmu).sum() - 2.0 * (fw * score_diff.array() * dmu).sum();
  const double ibp =
      (fw.square() * dmu).sum() + 2.0 * (df.array() * dmu).sum() +
      2.0 * (fw * score_pi.array() * dmu).sum();
  return {direct, ibp};
}

GridMeasure kde_density(const Grid& grid, const ParticleMeasure& particles,
                        double bandwidth) {
  if (particles.dim() != 1) throw std::invalid_argument("kde_density supports 1-D particles");
  if (!(bandwidth > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  Eigen::VectorXd rho = Eigen::VectorXd::Zero(grid.n());
  const double norm = 1.0 / (bandwidth * std::sqrt(2.0 * M_PI));
  for (int i = 0; i < grid.n(); ++i) {
    const double x = grid.node(i);
    double acc = 0.0;
    for (int j = 0; j < particles.size(); ++j) {
      const double z = (x - particles.positions(j, 0)) / bandwidth;
      acc += particles.weights[j] * std::exp(-0.5 * z * z);
    }
    rho[i] = norm * acc;
  }
  return GridMeasure(grid, rho);
}

double silverman_bandwidth(const ParticleMeasure& particles) {
  if (particles.dim() != 1) throw std::invalid_argument("silverman_bandwidth supports 1-D particles");
  const int n = particles.size();
  const double total = particles.weights.sum();
  if (!(total > 0.0)) throw std::invalid_argument("null particle measure");
  const double mean = particles.weights.dot(particles.positions.col(0)) / total;
  const double var =
      (particles.weights.array() * (particles.positions.col(0).array() - mean).square()).sum() /
      total;
  const double sd = std::sqrt(std::max(var, 1e-12));
  return 1.06 * sd * std::pow(static_cast<double>(n), -0.2);
}

}  // namespace kgf
