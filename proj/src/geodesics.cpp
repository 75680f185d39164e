#include "kgf/geodesics.hpp"

#include <cmath>
#include <stdexcept>

namespace kgf {

GridMeasure fr_geodesic(const GridMeasure& mu0, const GridMeasure& mu1, double s) {
  require_same_grid(mu0.grid, mu1.grid);
  if (s < 0.0 || s > 1.0) throw std::invalid_argument("s must lie in [0, 1]");
  if (s == 0.0) return mu0;
  if (s == 1.0) return mu1;
  const Eigen::ArrayXd root =
      (1.0 - s) * mu0.density.array().sqrt() + s * mu1.density.array().sqrt();
  return GridMeasure(mu0.grid, (root * root).matrix());
}

GridMeasure mmd_geodesic(const GridMeasure& mu0, const GridMeasure& mu1, double t) {
  require_same_grid(mu0.grid, mu1.grid);
  return GridMeasure(mu0.grid, (1.0 - t) * mu0.density + t * mu1.density);
}

double fr_dynamic_cost(const std::vector<GridMeasure>& path,
                       const std::vector<double>& times) {
  const size_t m = path.size();
  if (m < 3) throw std::invalid_argument("path needs at least 3 points");
  if (times.size() != m) throw std::invalid_argument("times length must match path");
  for (size_t k = 1; k < m; ++k) {
    if (!(times[k] > times[k - 1])) {
      throw std::invalid_argument("times must be strictly increasing");
    }
    require_same_grid(path[k].grid, path[0].grid);
  }
  const Grid& grid = path[0].grid;
  const Eigen::VectorXd w = grid.quadrature_weights();

  // xi = -mudot/mu with mudot from central differences in t.
  std::vector<Eigen::VectorXd> mudot(m);
  mudot[0] = (path[1].density - path[0].density) / (times[1] - times[0]);
  mudot[m - 1] =
      (path[m - 1].density - path[m - 2].density) / (times[m - 1] - times[m - 2]);
  for (size_t k = 1; k + 1 < m; ++k) {
    mudot[k] = (path[k + 1].density - path[k - 1].density) / (times[k + 1] - times[k - 1]);
  }
  double rate_scale = 0.0;
  for (const auto& r : mudot) rate_scale = std::max(rate_scale, r.cwiseAbs().maxCoeff());

  std::vector<double> speed2(m);
  for (size_t k = 0; k < m; ++k) {
    double acc = 0.0;
    for (int i = 0; i < grid.n(); ++i) {
      const double rho = path[k].density[i];
      if (rho <= kDensityFloor) {
        // Mass moving at a dead node in the interior means the endpoint
        // supports cannot be connected at finite reaction cost.
        if (k > 0 && k + 1 < m && std::abs(mudot[k][i]) > 1e-6 * (1.0 + rate_scale)) {
          throw std::invalid_argument("FR path requires common support");
        }
        continue;
      }
      const double xi = -mudot[k][i] / rho;
      acc += xi * xi * rho * w[i];
    }
    speed2[k] = acc;
  }

  double cost = 0.0;
  for (size_t k = 0; k + 1 < m; ++k) {
    cost += 0.5 * (speed2[k] + speed2[k + 1]) * (times[k + 1] - times[k]);
  }
  return cost;
}

HamiltonianCheck fr_hamiltonian_check(const GridMeasure& mu0, const GridFunction& xi0,
                                      double s, double ds) {
  require_same_grid(xi0.grid, mu0.grid);
  if (!(ds > 0.0)) throw std::invalid_argument("ds must be positive");

  const auto factor = [&](double t) -> Eigen::ArrayXd {
    return 1.0 + 0.5 * t * xi0.values.array();
  };
  for (double t : {s - ds, s, s + ds}) {
    if ((factor(t) <= 0.0).any()) {
      throw std::invalid_argument("geodesic pole crossed: 1 + s xi0/2 must stay positive");
    }
  }
  const auto xi_at = [&](double t) -> Eigen::ArrayXd {
    return xi0.values.array() / factor(t);
  };
  const auto mu_at = [&](double t) -> Eigen::ArrayXd {
    return factor(t).square() * mu0.density.array();
  };

  const Eigen::ArrayXd xi_s = xi_at(s);
  const Eigen::ArrayXd mu_s = mu_at(s);
  const Eigen::ArrayXd mu_dot = (mu_at(s + ds) - mu_at(s - ds)) / (2.0 * ds);
  const Eigen::ArrayXd xi_dot = (xi_at(s + ds) - xi_at(s - ds)) / (2.0 * ds);

  // The explicit solution satisfies mudot = mu xi and xidot = -xi^2/2; the
  // mu equation residual is exactly zero up to roundoff because mu(s) is
  // quadratic in s and central differences are exact on quadratics.
  HamiltonianCheck out{GridFunction(mu0.grid, xi_s.matrix()),
                       GridMeasure(mu0.grid, mu_s.matrix()),
                       (mu_dot - mu_s * xi_s).abs().maxCoeff(),
                       (xi_dot + 0.5 * xi_s.square()).abs().maxCoeff()};
  return out;
}

}  // namespace kgf
