#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "kgf/measures.hpp"

using namespace kgf;

TEST_CASE("mass of uniform and hand-counted measures") {
  Grid g(0.0, 1.0, 11);
  CHECK(mass(uniform_measure(g, 1.0)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(mass(GridMeasure(g, Eigen::VectorXd::Zero(11))) == 0.0);

  Grid g3(0.0, 1.0, 3);
  Eigen::VectorXd rho(3);
  rho << 1.0, 2.0, 1.0;
  // 0.25*1 + 0.5*2 + 0.25*1 with h = 0.5.
  CHECK(mass(GridMeasure(g3, rho)) == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("mass is linear") {
  Grid g(0.0, 2.0, 17);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  Eigen::VectorXd a(17), b(17);
  for (int i = 0; i < 17; ++i) {
    a[i] = u(rng);
    b[i] = u(rng);
  }
  const GridMeasure mu(g, a), nu(g, b);
  const GridMeasure combo(g, 0.7 * a + 1.3 * b);
  CHECK(mass(combo) == doctest::Approx(0.7 * mass(mu) + 1.3 * mass(nu)).epsilon(1e-14));
}

TEST_CASE("weighted_inner basics") {
  Grid g(0.0, 1.0, 101);
  const GridMeasure mu = normalize(uniform_measure(g, 1.0));
  const GridFunction ones(g, Eigen::VectorXd::Ones(101));
  CHECK(weighted_inner(ones, ones, mu) == doctest::Approx(1.0).epsilon(1e-14));

  const GridFunction zero(g, Eigen::VectorXd::Zero(101));
  CHECK(weighted_inner(zero, ones, mu) == 0.0);

  const GridFunction x(g, g.nodes());
  CHECK(weighted_inner(x, x, mu) == doctest::Approx(1.0 / 3.0).epsilon(1e-3));

  Grid other(0.0, 1.0, 51);
  const GridFunction bad(other, Eigen::VectorXd::Ones(51));
  CHECK_THROWS_WITH_AS(weighted_inner(bad, ones, mu), "incompatible grids",
                       std::invalid_argument);
}

TEST_CASE("weighted_inner is symmetric bilinear and psd") {
  Grid g(0.0, 1.0, 33);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd f(33), h(33), rho(33);
  for (int i = 0; i < 33; ++i) {
    f[i] = u(rng);
    h[i] = u(rng);
    rho[i] = 1.0 + 0.5 * u(rng);
  }
  const GridMeasure mu(g, rho);
  CHECK(weighted_inner(f, h, mu) == doctest::Approx(weighted_inner(h, f, mu)));
  CHECK(weighted_inner(f, f, mu) >= 0.0);
  const Eigen::VectorXd combo = 2.0 * f + 3.0 * h;
  CHECK(weighted_inner(combo, h, mu) ==
        doctest::Approx(2.0 * weighted_inner(f, h, mu) + 3.0 * weighted_inner(h, h, mu)));
}

TEST_CASE("normalize") {
  Grid g(0.0, 1.0, 3);
  Eigen::VectorXd rho(3);
  rho << 1.0, 2.0, 1.0;
  const GridMeasure m(g, rho);
  const GridMeasure n = normalize(m);
  CHECK(mass(n) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(n.density[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(n.density[1] == doctest::Approx(4.0 / 3.0).epsilon(1e-15));

  const GridMeasure nn = normalize(n);
  CHECK((nn.density - n.density).cwiseAbs().maxCoeff() <= 1e-14);

  CHECK_THROWS_WITH_AS(normalize(GridMeasure(g, Eigen::VectorXd::Zero(3))),
                       "cannot normalize null measure", std::invalid_argument);
}

TEST_CASE("grid divergence conserves mass") {
  Grid g(0.0, 1.0, 65);
  Eigen::VectorXd flux(65);
  for (int i = 0; i < 65; ++i) flux[i] = std::sin(3.0 * g.node(i)) + 0.2;
  const Eigen::VectorXd div = grid_divergence(g, flux);
  CHECK(std::abs(g.quadrature_weights().dot(div)) <= 1e-14);
}

TEST_CASE("invariants rejected at construction") {
  CHECK_THROWS_AS(Grid(0.0, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(Grid(1.0, 0.0, 5), std::invalid_argument);
  Grid g(0.0, 1.0, 4);
  Eigen::VectorXd neg(4);
  neg << 1.0, -0.1, 0.0, 0.0;
  CHECK_THROWS_AS(GridMeasure(g, neg), std::invalid_argument);
  CHECK_THROWS_AS(GridMeasure(g, Eigen::VectorXd::Zero(3)), std::invalid_argument);
}

TEST_CASE("grid measure csv round trip") {
  Grid g(-1.0, 2.5, 37);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  Eigen::VectorXd rho(37);
  for (int i = 0; i < 37; ++i) rho[i] = u(rng);
  const GridMeasure m(g, rho);
  const std::string path = "measure_roundtrip_test.csv";
  write_csv(path, m);
  const GridMeasure back = read_grid_measure_csv(path);
  CHECK(back.grid == g);
  CHECK((back.density - m.density).cwiseAbs().maxCoeff() == 0.0);
  std::remove(path.c_str());
}

TEST_CASE("grid measure csv rejects malformed inputs") {
  const std::string path = "measure_malformed_test.csv";
  {
    std::ofstream out(path);
    out << "density,x\n0,1\n1,1\n";
  }
  CHECK_THROWS_AS(read_grid_measure_csv(path), std::runtime_error);
  {
    std::ofstream out(path);
    out << "x,density\n0,1\n0.5,1\n0.8,1\n";  // non-uniform spacing
  }
  CHECK_THROWS_AS(read_grid_measure_csv(path), std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("particle measure csv round trip") {
  Eigen::MatrixXd pos(3, 2);
  pos << 0.0, 1.0, -2.5, 0.25, 1e-9, 3.0;
  Eigen::VectorXd w(3);
  w << 0.2, 0.3, 0.5;
  const ParticleMeasure m(pos, w);
  const std::string path = "particles_roundtrip_test.csv";
  write_csv(path, m);
  const ParticleMeasure back = read_particle_measure_csv(path);
  CHECK((back.positions - pos).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.weights - w).cwiseAbs().maxCoeff() == 0.0);
  std::remove(path.c_str());
}
