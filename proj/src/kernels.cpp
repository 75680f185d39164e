#include "kgf/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace kgf {

namespace {

constexpr double kJitterScale = 1e-12;

double sq_dist(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size()) throw std::invalid_argument("point dimension mismatch");
  return (x - y).squaredNorm();
}

double eval_sq(const KernelSpec& k, double r2) {
  const double s2 = k.bandwidth * k.bandwidth;
  switch (k.family) {
    case KernelFamily::Gaussian:
      return k.scale * std::exp(-0.5 * r2 / s2);
    case KernelFamily::Laplace:
      return k.scale * std::exp(-std::sqrt(r2) / k.bandwidth);
    case KernelFamily::InverseMultiquadric:
      return k.scale / std::sqrt(1.0 + r2 / s2);
  }
  throw std::logic_error("unknown kernel family");
}

// Radial profile derivative f'(r2) with k(x,y) = f(|x-y|^2).
double eval_sq_deriv(const KernelSpec& k, double r2) {
  const double s2 = k.bandwidth * k.bandwidth;
  switch (k.family) {
    case KernelFamily::Gaussian:
      return -0.5 / s2 * eval_sq(k, r2);
    case KernelFamily::Laplace: {
      const double r = std::sqrt(r2);
      if (r == 0.0) throw std::invalid_argument("kernel not differentiable here");
      return -0.5 / (k.bandwidth * r) * eval_sq(k, r2);
    }
    case KernelFamily::InverseMultiquadric:
      return -0.5 * k.scale / s2 * std::pow(1.0 + r2 / s2, -1.5);
  }
  throw std::logic_error("unknown kernel family");
}

double eval_sq_deriv2(const KernelSpec& k, double r2) {
  const double s2 = k.bandwidth * k.bandwidth;
  switch (k.family) {
    case KernelFamily::Gaussian:
      return 0.25 / (s2 * s2) * eval_sq(k, r2);
    case KernelFamily::Laplace:
      throw std::invalid_argument("kernel not differentiable here");
    case KernelFamily::InverseMultiquadric:
      return 0.75 * k.scale / (s2 * s2) * std::pow(1.0 + r2 / s2, -2.5);
  }
  throw std::logic_error("unknown kernel family");
}

struct SymmetrizedSystem {
  std::vector<int> support;        // indices with q_i > 0
  Eigen::VectorXd sqrt_q;          // on support
  Eigen::MatrixXd s;               // diag(sqrt q) K diag(sqrt q) on support
};

SymmetrizedSystem symmetrize(const WeightedOperator& op) {
  const int n = static_cast<int>(op.weights.size());
  SymmetrizedSystem sys;
  sys.support.reserve(n);
  for (int i = 0; i < n; ++i) {
    if (op.weights[i] > 0.0) sys.support.push_back(i);
  }
  const int p = static_cast<int>(sys.support.size());
  sys.sqrt_q.resize(p);
  for (int a = 0; a < p; ++a) sys.sqrt_q[a] = std::sqrt(op.weights[sys.support[a]]);
  sys.s.resize(p, p);
  for (int a = 0; a < p; ++a) {
    for (int b = 0; b < p; ++b) {
      sys.s(a, b) = sys.sqrt_q[a] * op.gram.entries(sys.support[a], sys.support[b]) * sys.sqrt_q[b];
    }
  }
  return sys;
}

}  // namespace

void validate(const KernelSpec& k) {
  if (!(k.bandwidth > 0.0)) throw std::invalid_argument("kernel bandwidth must be positive");
  if (!(k.scale > 0.0)) throw std::invalid_argument("kernel scale must be positive");
}

double kernel_eval(const KernelSpec& k, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  validate(k);
  return eval_sq(k, sq_dist(x, y));
}

double kernel_eval(const KernelSpec& k, double x, double y) {
  validate(k);
  const double d = x - y;
  return eval_sq(k, d * d);
}

Eigen::VectorXd kernel_grad_x(const KernelSpec& k, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& y) {
  validate(k);
  const double r2 = sq_dist(x, y);
  if (k.family == KernelFamily::Gaussian && r2 == 0.0) {
    return Eigen::VectorXd::Zero(x.size());
  }
  return 2.0 * eval_sq_deriv(k, r2) * (x - y);
}

double kernel_grad_x(const KernelSpec& k, double x, double y) {
  Eigen::VectorXd xv(1), yv(1);
  xv[0] = x;
  yv[0] = y;
  return kernel_grad_x(k, xv, yv)[0];
}

double kernel_cross_derivative(const KernelSpec& k, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& y) {
  validate(k);
  if (x.size() != y.size()) throw std::invalid_argument("point dimension mismatch");
  const double r2 = sq_dist(x, y);
  const double d = static_cast<double>(x.size());
  // nabla_x nabla_y k = -4 f''(r2) (x-y)(x-y)^T - 2 f'(r2) I, traced.
  return -4.0 * eval_sq_deriv2(k, r2) * r2 - 2.0 * d * eval_sq_deriv(k, r2);
}

GramMatrix gram(const KernelSpec& k, const Eigen::MatrixXd& points) {
  validate(k);
  const int n = static_cast<int>(points.rows());
  GramMatrix g;
  g.points = points;
  g.entries.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double v = eval_sq(k, (points.row(i) - points.row(j)).squaredNorm());
      g.entries(i, j) = v;
      g.entries(j, i) = v;
    }
  }
  return g;
}

GramMatrix derivative_gram(const KernelSpec& k, const Eigen::MatrixXd& points) {
  validate(k);
  const int n = static_cast<int>(points.rows());
  GramMatrix g;
  g.points = points;
  g.entries.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double v = kernel_cross_derivative(k, points.row(i).transpose(),
                                               points.row(j).transpose());
      g.entries(i, j) = v;
      g.entries(j, i) = v;
    }
  }
  return g;
}

WeightedOperator make_operator(const KernelSpec& k, const GridMeasure& m) {
  WeightedOperator op;
  op.gram = gram(k, m.grid.nodes());
  op.weights = (m.density.array() * m.grid.quadrature_weights().array()).matrix();
  return op;
}

WeightedOperator make_operator(const KernelSpec& k, const ParticleMeasure& m) {
  WeightedOperator op;
  op.gram = gram(k, m.positions);
  op.weights = m.weights;
  return op;
}

WeightedOperator make_lebesgue_operator(const KernelSpec& k, const Grid& grid) {
  WeightedOperator op;
  op.gram = gram(k, grid.nodes());
  op.weights = grid.quadrature_weights();
  return op;
}

double operator_jitter(const WeightedOperator& op) {
  const int n = static_cast<int>(op.weights.size());
  const double trace_s = op.gram.entries.diagonal().dot(op.weights);
  return kJitterScale * trace_s / n;
}

Eigen::VectorXd apply_integral_operator(const WeightedOperator& op,
                                        const Eigen::VectorXd& f) {
  if (f.size() != op.weights.size()) throw std::invalid_argument("length mismatch");
  return op.gram.entries * (op.weights.array() * f.array()).matrix();
}

Eigen::VectorXd solve_regularized(const WeightedOperator& op, double lambda,
                                  const Eigen::VectorXd& rhs) {
  if (rhs.size() != op.weights.size()) throw std::invalid_argument("length mismatch");
  if (lambda < 0.0) throw std::invalid_argument("lambda must be non-negative");
  const double jitter = operator_jitter(op);
  // The factorization is shifted by lambda + jitter; the refinement below
  // targets the unshifted system so the jitter does not bias the solution.
  const double target = lambda > 0.0 ? lambda : jitter;
  if (!(target > 0.0)) throw std::runtime_error("singular operator");

  const SymmetrizedSystem sys = symmetrize(op);
  const int n = static_cast<int>(op.weights.size());
  const int p = static_cast<int>(sys.support.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);

  if (p > 0) {
    Eigen::VectorXd b(p);
    for (int a = 0; a < p; ++a) b[a] = sys.sqrt_q[a] * rhs[sys.support[a]];
    Eigen::MatrixXd factored = sys.s;
    factored.diagonal().array() += lambda + jitter;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(factored);
    if (ldlt.info() != Eigen::Success) throw std::runtime_error("singular operator");
    Eigen::VectorXd u = ldlt.solve(b);
    for (int pass = 0; pass < 3; ++pass) {
      Eigen::VectorXd residual = b - sys.s * u - target * u;
      if (residual.norm() <= 1e-14 * (b.norm() + 1.0)) break;
      u += ldlt.solve(residual);
    }
    for (int a = 0; a < p; ++a) v[sys.support[a]] = u[a] / sys.sqrt_q[a];
  }

  if (p < n) {
    const Eigen::VectorXd coupled = apply_integral_operator(op, v);
    for (int i = 0; i < n; ++i) {
      if (op.weights[i] > 0.0) continue;
      v[i] = (rhs[i] - coupled[i]) / target;
    }
  }
  return v;
}

Eigen::VectorXd operator_power(const WeightedOperator& op, double alpha,
                               const Eigen::VectorXd& f, double shift) {
  if (f.size() != op.weights.size()) throw std::invalid_argument("length mismatch");
  const double jitter = operator_jitter(op);
  const SymmetrizedSystem sys = symmetrize(op);
  const int n = static_cast<int>(op.weights.size());
  const int p = static_cast<int>(sys.support.size());

  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  if (alpha == 0.0) {
    for (int i = 0; i < n; ++i) {
      if (op.weights[i] <= 0.0) out[i] = f[i];
    }
  }
  if (p == 0) return out;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sys.s);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigensolve failed");
  Eigen::VectorXd fp(p);
  for (int a = 0; a < p; ++a) fp[a] = sys.sqrt_q[a] * f[sys.support[a]];
  Eigen::VectorXd coeff = es.eigenvectors().transpose() * fp;
  for (int a = 0; a < p; ++a) {
    const double ev = std::max(es.eigenvalues()[a], 0.0) + jitter + shift;
    if (!(ev > 0.0) && alpha < 0.0) throw std::runtime_error("singular operator");
    coeff[a] *= std::pow(ev, alpha);
  }
  const Eigen::VectorXd gp = es.eigenvectors() * coeff;
  for (int a = 0; a < p; ++a) out[sys.support[a]] = gp[a] / sys.sqrt_q[a];
  return out;
}

namespace {

Eigen::VectorXd embedding(const KernelSpec& k, const Eigen::MatrixXd& points,
                          const Eigen::VectorXd& point_masses,
                          const Eigen::MatrixXd& queries) {
  validate(k);
  if (queries.cols() != points.cols()) throw std::invalid_argument("point dimension mismatch");
  const int m = static_cast<int>(queries.rows());
  Eigen::VectorXd out(m);
  for (int a = 0; a < m; ++a) {
    double acc = 0.0;
    for (int j = 0; j < points.rows(); ++j) {
      acc += eval_sq(k, (queries.row(a) - points.row(j)).squaredNorm()) * point_masses[j];
    }
    out[a] = acc;
  }
  return out;
}

}  // namespace

Eigen::VectorXd kernel_mean_embedding(const KernelSpec& k, const GridMeasure& m,
                                      const Eigen::MatrixXd& queries) {
  const Eigen::VectorXd q = (m.density.array() * m.grid.quadrature_weights().array()).matrix();
  return embedding(k, m.grid.nodes(), q, queries);
}

Eigen::VectorXd kernel_mean_embedding(const KernelSpec& k, const ParticleMeasure& m,
                                      const Eigen::MatrixXd& queries) {
  return embedding(k, m.positions, m.weights, queries);
}

double median_heuristic_bandwidth(const Eigen::MatrixXd& points) {
  const int n = static_cast<int>(points.rows());
  if (n < 2) throw std::invalid_argument("median heuristic needs at least 2 points");
  std::vector<double> dists;
  dists.reserve(static_cast<size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      dists.push_back((points.row(i) - points.row(j)).norm());
    }
  }
  std::nth_element(dists.begin(), dists.begin() + dists.size() / 2, dists.end());
  return std::max(dists[dists.size() / 2], 1e-12);
}

}  // namespace kgf
