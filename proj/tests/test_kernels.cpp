#include <doctest.h>

#include <cmath>
#include <random>

#include "kgf/kernels.hpp"

using namespace kgf;

namespace {

Eigen::VectorXd point1(double x) {
  Eigen::VectorXd v(1);
  v[0] = x;
  return v;
}

// Central-difference gradient oracle at step 1e-6.
double fd_grad(const KernelSpec& k, double x, double y) {
  const double h = 1e-6;
  return (kernel_eval(k, x + h, y) - kernel_eval(k, x - h, y)) / (2.0 * h);
}

GridMeasure random_measure(const Grid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.2, 2.0);
  Eigen::VectorXd rho(g.n());
  for (int i = 0; i < g.n(); ++i) rho[i] = u(rng);
  return GridMeasure(g, rho);
}

}  // namespace

TEST_CASE("kernel evaluation formulas") {
  const KernelSpec gauss{KernelFamily::Gaussian, 1.0, 1.0};
  CHECK(kernel_eval(gauss, 0.3, 0.3) == 1.0);
  CHECK(kernel_eval(gauss, 1.0, 0.0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));

  const KernelSpec lap{KernelFamily::Laplace, 2.0, 1.0};
  CHECK(kernel_eval(lap, 2.0, 0.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

  const KernelSpec imq{KernelFamily::InverseMultiquadric, 1.0, 1.0};
  CHECK(kernel_eval(imq, 1.0, 0.0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));

  Eigen::VectorXd a(2), b(3);
  a << 0.0, 0.0;
  b << 0.0, 0.0, 0.0;
  CHECK_THROWS_AS(kernel_eval(gauss, a, b), std::invalid_argument);
}

TEST_CASE("kernel gradient matches finite differences") {
  const KernelSpec gauss{KernelFamily::Gaussian, 1.0, 1.0};
  CHECK(kernel_grad_x(gauss, 0.5, 0.5) == 0.0);
  CHECK(kernel_grad_x(gauss, 1.0, 0.0) ==
        doctest::Approx(-std::exp(-0.5)).epsilon(1e-9));
  CHECK(kernel_grad_x(gauss, 1.0, 0.0) ==
        doctest::Approx(fd_grad(gauss, 1.0, 0.0)).epsilon(1e-7));

  const KernelSpec imq{KernelFamily::InverseMultiquadric, 1.0, 1.0};
  CHECK(kernel_grad_x(imq, 1.0, 0.0) ==
        doctest::Approx(-std::pow(2.0, -1.5)).epsilon(1e-12));
  CHECK(kernel_grad_x(imq, 1.0, 0.0) ==
        doctest::Approx(fd_grad(imq, 1.0, 0.0)).epsilon(1e-7));

  const KernelSpec lap{KernelFamily::Laplace, 1.0, 1.0};
  CHECK(kernel_grad_x(lap, 1.0, 0.0) == doctest::Approx(fd_grad(lap, 1.0, 0.0)).epsilon(1e-7));
  CHECK_THROWS_WITH_AS(kernel_grad_x(lap, 0.3, 0.3), "kernel not differentiable here",
                       std::invalid_argument);

  // Antisymmetry under argument swap for radial kernels.
  for (const auto& k : {gauss, imq}) {
    CHECK(kernel_grad_x(k, 0.8, 0.1) == doctest::Approx(-kernel_grad_x(k, 0.1, 0.8)));
  }
}

TEST_CASE("cross derivative matches the gaussian closed form") {
  const KernelSpec gauss{KernelFamily::Gaussian, 1.0, 1.0};
  for (double d : {0.0, 0.5, 1.0, 2.0}) {
    const double expected = (1.0 - d * d) * std::exp(-0.5 * d * d);
    CHECK(kernel_cross_derivative(gauss, point1(d), point1(0.0)) ==
          doctest::Approx(expected).epsilon(1e-12));
  }
  // Finite-difference oracle for the inverse multiquadric.
  const KernelSpec imq{KernelFamily::InverseMultiquadric, 0.8, 1.0};
  const double h = 1e-5;
  const double fd =
      (kernel_eval(imq, 0.7 + h, 0.1 + h) - kernel_eval(imq, 0.7 + h, 0.1 - h) -
       kernel_eval(imq, 0.7 - h, 0.1 + h) + kernel_eval(imq, 0.7 - h, 0.1 - h)) /
      (4.0 * h * h);
  CHECK(kernel_cross_derivative(imq, point1(0.7), point1(0.1)) ==
        doctest::Approx(fd).epsilon(1e-5));
}

TEST_CASE("gram matrices are exactly symmetric and near psd") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Eigen::MatrixXd pts(24, 2);
  for (int i = 0; i < pts.size(); ++i) pts.data()[i] = u(rng);
  for (const auto family :
       {KernelFamily::Gaussian, KernelFamily::Laplace, KernelFamily::InverseMultiquadric}) {
    const KernelSpec k{family, 0.7, 1.3};
    const GramMatrix g = gram(k, pts);
    CHECK((g.entries - g.entries.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.entries, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
  }
}

TEST_CASE("apply_integral_operator hand cases") {
  const KernelSpec gauss{KernelFamily::Gaussian, 1.0, 1.0};

  // Single unit-weight particle with k(x,x) = 1.
  Eigen::MatrixXd one(1, 1);
  one << 0.0;
  const ParticleMeasure single(one, Eigen::VectorXd::Ones(1));
  const WeightedOperator op1 = make_operator(gauss, single);
  Eigen::VectorXd c(1);
  c << 3.25;
  CHECK(apply_integral_operator(op1, c)[0] == doctest::Approx(3.25));

  // Two nodes, K = [[1, b], [b, 1]], q = [1, 1], f = [1, 0] -> [1, b].
  WeightedOperator op2;
  op2.gram.points = Eigen::MatrixXd::Zero(2, 1);
  op2.gram.entries.resize(2, 2);
  const double b = 0.5;
  op2.gram.entries << 1.0, b, b, 1.0;
  op2.weights = Eigen::VectorXd::Ones(2);
  Eigen::VectorXd f(2);
  f << 1.0, 0.0;
  const Eigen::VectorXd out = apply_integral_operator(op2, f);
  CHECK(out[0] == doctest::Approx(1.0));
  CHECK(out[1] == doctest::Approx(b));

  CHECK(apply_integral_operator(op2, Eigen::VectorXd::Zero(2)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("solve_regularized hand cases and exact-inverse property") {
  // 1x1: v = r / (kappa + lambda).
  WeightedOperator op1;
  op1.gram.points = Eigen::MatrixXd::Zero(1, 1);
  op1.gram.entries = Eigen::MatrixXd::Constant(1, 1, 2.0);
  op1.weights = Eigen::VectorXd::Constant(1, 0.5);  // kappa = K q = 1
  Eigen::VectorXd r(1);
  r << 3.0;
  CHECK(solve_regularized(op1, 2.0, r)[0] == doctest::Approx(1.0).epsilon(1e-12));

  // 2x2 hand case: [[2, 0.5], [0.5, 2]] v = [1, 1] -> v = [0.4, 0.4].
  WeightedOperator op2;
  op2.gram.points = Eigen::MatrixXd::Zero(2, 1);
  op2.gram.entries.resize(2, 2);
  op2.gram.entries << 1.0, 0.5, 0.5, 1.0;
  op2.weights = Eigen::VectorXd::Ones(2);
  Eigen::VectorXd rhs(2);
  rhs << 1.0, 1.0;
  const Eigen::VectorXd v = solve_regularized(op2, 1.0, rhs);
  CHECK(v[0] == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(v[1] == doctest::Approx(0.4).epsilon(1e-12));

  CHECK(solve_regularized(op2, 1.0, Eigen::VectorXd::Zero(2)).cwiseAbs().maxCoeff() == 0.0);

  // Exact inverse on a random grid operator, including small lambda.
  std::mt19937_64 rng(17);
  Grid g(0.0, 1.0, 48);
  const GridMeasure mu = random_measure(g, rng);
  const KernelSpec gauss{KernelFamily::Gaussian, 0.25, 1.0};
  const WeightedOperator op = make_operator(gauss, mu);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd b(48);
  for (int i = 0; i < 48; ++i) b[i] = u(rng);
  for (double lambda : {1.0, 1e-3, 1e-6}) {
    const Eigen::VectorXd x = solve_regularized(op, lambda, b);
    const Eigen::VectorXd back = apply_integral_operator(op, x) + lambda * x;
    CHECK((back - b).norm() <= 1e-9 * (1.0 + b.norm()));
  }
}

TEST_CASE("solve_regularized handles zero-weight nodes") {
  WeightedOperator op;
  op.gram.points = Eigen::MatrixXd::Zero(3, 1);
  op.gram.entries.resize(3, 3);
  op.gram.entries << 1.0, 0.4, 0.2, 0.4, 1.0, 0.1, 0.2, 0.1, 1.0;
  op.weights.resize(3);
  op.weights << 1.0, 0.0, 2.0;
  Eigen::VectorXd rhs(3);
  rhs << 1.0, -2.0, 0.5;
  const double lambda = 0.7;
  const Eigen::VectorXd v = solve_regularized(op, lambda, rhs);
  const Eigen::VectorXd back = apply_integral_operator(op, v) + lambda * v;
  CHECK((back - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
}

TEST_CASE("singular operator rejected") {
  WeightedOperator op;
  op.gram.points = Eigen::MatrixXd::Zero(2, 1);
  op.gram.entries = Eigen::MatrixXd::Zero(2, 2);
  op.weights = Eigen::VectorXd::Ones(2);
  Eigen::VectorXd rhs = Eigen::VectorXd::Ones(2);
  CHECK_THROWS_WITH_AS(solve_regularized(op, 0.0, rhs), "singular operator",
                       std::runtime_error);
}

TEST_CASE("operator self-adjointness and positivity in the weighted inner product") {
  std::mt19937_64 rng(23);
  Grid g(0.0, 1.0, 40);
  const GridMeasure mu = random_measure(g, rng);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const auto family :
       {KernelFamily::Gaussian, KernelFamily::Laplace, KernelFamily::InverseMultiquadric}) {
    const KernelSpec k{family, 0.3, 1.0};
    const WeightedOperator op = make_operator(k, mu);
    Eigen::VectorXd f(40), h(40);
    for (int i = 0; i < 40; ++i) {
      f[i] = u(rng);
      h[i] = u(rng);
    }
    const double lhs = weighted_inner(apply_integral_operator(op, f), h, mu);
    const double rhs_v = weighted_inner(f, apply_integral_operator(op, h), mu);
    CHECK(lhs == doctest::Approx(rhs_v).epsilon(1e-10));
    CHECK(weighted_inner(f, apply_integral_operator(op, f), mu) >= -1e-10);
  }
}

TEST_CASE("operator_power identity, consistency and semigroup") {
  std::mt19937_64 rng(29);
  Grid g(0.0, 1.0, 32);
  const GridMeasure mu = random_measure(g, rng);
  const KernelSpec k{KernelFamily::Gaussian, 0.2, 1.0};
  const WeightedOperator op = make_operator(k, mu);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd f(32);
  for (int i = 0; i < 32; ++i) f[i] = u(rng);

  CHECK((operator_power(op, 0.0, f) - f).norm() <= 1e-12 * f.norm());
  CHECK((operator_power(op, 1.0, f) - apply_integral_operator(op, f)).norm() <= 1e-9);

  const Eigen::VectorXd half_twice = operator_power(op, 0.5, operator_power(op, 0.5, f));
  CHECK((half_twice - operator_power(op, 1.0, f)).norm() <= 1e-8);

  const Eigen::VectorXd ab = operator_power(op, 0.3, operator_power(op, 0.9, f));
  CHECK((ab - operator_power(op, 1.2, f)).norm() <= 1e-8);
}

TEST_CASE("kernel mean embedding") {
  const KernelSpec gauss{KernelFamily::Gaussian, 1.0, 1.0};
  Grid g(0.0, 1.0, 9);
  const GridMeasure null(g, Eigen::VectorXd::Zero(9));
  CHECK(kernel_mean_embedding(gauss, null, g.nodes()).cwiseAbs().maxCoeff() == 0.0);

  Eigen::MatrixXd pos(2, 1);
  pos << 0.0, 1.0;
  Eigen::VectorXd w(2);
  w << 0.5, 0.5;
  const ParticleMeasure two(pos, w);
  Eigen::MatrixXd query(1, 1);
  query << 0.0;
  CHECK(kernel_mean_embedding(gauss, two, query)[0] ==
        doctest::Approx(0.5 * (1.0 + std::exp(-0.5))).epsilon(1e-12));

  // Single unit-weight particle reproduces k(., y).
  Eigen::MatrixXd y(1, 1);
  y << 0.4;
  const ParticleMeasure dirac(y, Eigen::VectorXd::Ones(1));
  Eigen::MatrixXd queries(3, 1);
  queries << -1.0, 0.0, 2.0;
  const Eigen::VectorXd emb = kernel_mean_embedding(gauss, dirac, queries);
  for (int i = 0; i < 3; ++i) {
    CHECK(emb[i] == doctest::Approx(kernel_eval(gauss, queries(i, 0), 0.4)));
  }
}

TEST_CASE("median heuristic") {
  Eigen::MatrixXd pts(3, 1);
  pts << 0.0, 1.0, 3.0;
  // Pairwise distances 1, 2, 3; median is 2.
  CHECK(median_heuristic_bandwidth(pts) == doctest::Approx(2.0));
}
