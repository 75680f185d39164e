#include "kgf/measures.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kgf {

namespace {

void require_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) {
    throw std::invalid_argument(std::string(what) + " must be finite");
  }
}

std::string format_value(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

Grid::Grid(double left, double right, int n) : left_(left), right_(right), n_(n) {
  if (n < 2) throw std::invalid_argument("grid needs at least 2 nodes");
  if (!(right > left)) throw std::invalid_argument("grid endpoints must satisfy left < right");
  if (!std::isfinite(left) || !std::isfinite(right)) {
    throw std::invalid_argument("grid endpoints must be finite");
  }
}

Eigen::VectorXd Grid::nodes() const {
  Eigen::VectorXd x(n_);
  for (int i = 0; i < n_; ++i) x[i] = node(i);
  return x;
}

Eigen::VectorXd Grid::quadrature_weights() const {
  const double h = spacing();
  Eigen::VectorXd w = Eigen::VectorXd::Constant(n_, h);
  w[0] = 0.5 * h;
  w[n_ - 1] = 0.5 * h;
  return w;
}

bool Grid::operator==(const Grid& other) const {
  return left_ == other.left_ && right_ == other.right_ && n_ == other.n_;
}

GridMeasure::GridMeasure(Grid grid_in, Eigen::VectorXd density_in)
    : grid(grid_in), density(std::move(density_in)) {
  if (density.size() != grid.n()) {
    throw std::invalid_argument("density length must match grid node count");
  }
  require_finite(density, "density");
  if ((density.array() < 0.0).any()) {
    throw std::invalid_argument("density must be non-negative");
  }
}

GridFunction::GridFunction(Grid grid_in, Eigen::VectorXd values_in)
    : grid(grid_in), values(std::move(values_in)) {
  if (values.size() != grid.n()) {
    throw std::invalid_argument("values length must match grid node count");
  }
  require_finite(values, "values");
}

ParticleMeasure::ParticleMeasure(Eigen::MatrixXd positions_in, Eigen::VectorXd weights_in)
    : positions(std::move(positions_in)), weights(std::move(weights_in)) {
  if (positions.rows() < 1) throw std::invalid_argument("particle measure needs at least one particle");
  if (weights.size() != positions.rows()) {
    throw std::invalid_argument("weights length must match particle count");
  }
  if (!positions.allFinite()) throw std::invalid_argument("positions must be finite");
  require_finite(weights, "weights");
  if ((weights.array() < 0.0).any()) {
    throw std::invalid_argument("weights must be non-negative");
  }
}

double mass(const GridMeasure& m) {
  return m.grid.quadrature_weights().dot(m.density);
}

double mass(const ParticleMeasure& m) { return m.weights.sum(); }

void require_same_grid(const Grid& a, const Grid& b) {
  if (a != b) throw std::invalid_argument("incompatible grids");
}

double weighted_inner(const Eigen::VectorXd& f, const Eigen::VectorXd& g,
                      const GridMeasure& m) {
  if (f.size() != m.grid.n() || g.size() != m.grid.n()) {
    throw std::invalid_argument("incompatible grids");
  }
  const Eigen::VectorXd w = m.grid.quadrature_weights();
  return (f.array() * g.array() * m.density.array() * w.array()).sum();
}

double weighted_inner(const GridFunction& f, const GridFunction& g,
                      const GridMeasure& m) {
  require_same_grid(f.grid, m.grid);
  require_same_grid(g.grid, m.grid);
  return weighted_inner(f.values, g.values, m);
}

GridMeasure normalize(const GridMeasure& m) {
  const double total = mass(m);
  if (!(total > 0.0)) throw std::invalid_argument("cannot normalize null measure");
  return GridMeasure(m.grid, m.density / total);
}

Eigen::VectorXd floored(const Eigen::VectorXd& density) {
  return density.array().max(kDensityFloor).matrix();
}

Eigen::VectorXd grid_gradient(const Grid& grid, const Eigen::VectorXd& values) {
  if (values.size() != grid.n()) {
    throw std::invalid_argument("values length must match grid node count");
  }
  const int n = grid.n();
  const double h = grid.spacing();
  Eigen::VectorXd g(n);
  g[0] = (values[1] - values[0]) / h;
  for (int i = 1; i + 1 < n; ++i) {
    g[i] = (values[i + 1] - values[i - 1]) / (2.0 * h);
  }
  g[n - 1] = (values[n - 1] - values[n - 2]) / h;
  return g;
}

GridFunction grid_gradient(const GridFunction& f) {
  return GridFunction(f.grid, grid_gradient(f.grid, f.values));
}

Eigen::VectorXd grid_divergence(const Grid& grid, const Eigen::VectorXd& flux) {
  if (flux.size() != grid.n()) {
    throw std::invalid_argument("flux length must match grid node count");
  }
  const int n = grid.n();
  Eigen::VectorXd f = flux;
  f[0] = 0.0;
  f[n - 1] = 0.0;
  const Eigen::VectorXd w = grid.quadrature_weights();
  Eigen::VectorXd div(n);
  double left_face = 0.0;  // face flux below node 0
  for (int i = 0; i < n; ++i) {
    const double right_face = (i + 1 < n) ? 0.5 * (f[i] + f[i + 1]) : 0.0;
    div[i] = (right_face - left_face) / w[i];
    left_face = right_face;
  }
  return div;
}

GridMeasure uniform_measure(const Grid& grid, double total_mass) {
  if (!(total_mass >= 0.0)) throw std::invalid_argument("mass must be non-negative");
  const double height = total_mass / (grid.right() - grid.left());
  return GridMeasure(grid, Eigen::VectorXd::Constant(grid.n(), height));
}

GridMeasure gaussian_measure(const Grid& grid, double mean, double stddev,
                             double total_mass) {
  if (!(stddev > 0.0)) throw std::invalid_argument("stddev must be positive");
  if (!(total_mass >= 0.0)) throw std::invalid_argument("mass must be non-negative");
  Eigen::VectorXd rho(grid.n());
  const double norm = total_mass / (stddev * std::sqrt(2.0 * M_PI));
  for (int i = 0; i < grid.n(); ++i) {
    const double z = (grid.node(i) - mean) / stddev;
    rho[i] = norm * std::exp(-0.5 * z * z);
  }
  return GridMeasure(grid, rho);
}

GridMeasure mixture_measure(const Grid& grid,
                            const std::vector<MixtureComponent>& components,
                            double total_mass) {
  if (components.empty()) throw std::invalid_argument("mixture needs at least one component");
  Eigen::VectorXd rho = Eigen::VectorXd::Zero(grid.n());
  double weight_sum = 0.0;
  for (const auto& c : components) {
    if (!(c.weight >= 0.0)) throw std::invalid_argument("mixture weights must be non-negative");
    weight_sum += c.weight;
  }
  if (!(weight_sum > 0.0)) throw std::invalid_argument("mixture weights must not all vanish");
  for (const auto& c : components) {
    rho += gaussian_measure(grid, c.mean, c.stddev, total_mass * c.weight / weight_sum).density;
  }
  return GridMeasure(grid, rho);
}

void write_csv(const std::string& path, const GridMeasure& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "x,density\n";
  for (int i = 0; i < m.grid.n(); ++i) {
    out << format_value(m.grid.node(i)) << ',' << format_value(m.density[i]) << '\n';
  }
}

GridMeasure read_grid_measure_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("x,density", 0) != 0) {
    throw std::runtime_error(path + ": expected header x,density");
  }
  std::vector<double> xs;
  std::vector<double> rho;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string a, b;
    if (!std::getline(row, a, ',') || !std::getline(row, b, ',')) {
      throw std::runtime_error(path + ": malformed row '" + line + "'");
    }
    xs.push_back(std::stod(a));
    rho.push_back(std::stod(b));
  }
  const int n = static_cast<int>(xs.size());
  if (n < 2) throw std::runtime_error(path + ": needs at least 2 rows");
  const double h = (xs.back() - xs.front()) / (n - 1);
  for (int i = 1; i < n; ++i) {
    if (std::abs(xs[i] - xs[i - 1] - h) > 1e-9 * (1.0 + std::abs(h))) {
      throw std::runtime_error(path + ": nodes are not uniformly spaced");
    }
  }
  Grid grid(xs.front(), xs.back(), n);
  return GridMeasure(grid, Eigen::Map<Eigen::VectorXd>(rho.data(), n));
}

void write_csv(const std::string& path, const ParticleMeasure& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << 'w';
  for (int j = 0; j < m.dim(); ++j) out << ",x" << (j + 1);
  out << '\n';
  for (int i = 0; i < m.size(); ++i) {
    out << format_value(m.weights[i]);
    for (int j = 0; j < m.dim(); ++j) out << ',' << format_value(m.positions(i, j));
    out << '\n';
  }
}

ParticleMeasure read_particle_measure_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("w,x1", 0) != 0) {
    throw std::runtime_error(path + ": expected header w,x1,...,xd");
  }
  int dim = 0;
  for (char c : line) {
    if (c == ',') ++dim;
  }
  std::vector<double> weights;
  std::vector<double> coords;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    if (!std::getline(row, cell, ',')) throw std::runtime_error(path + ": malformed row");
    weights.push_back(std::stod(cell));
    for (int j = 0; j < dim; ++j) {
      if (!std::getline(row, cell, ',')) throw std::runtime_error(path + ": malformed row");
      coords.push_back(std::stod(cell));
    }
  }
  const int n = static_cast<int>(weights.size());
  if (n < 1) throw std::runtime_error(path + ": needs at least one particle");
  Eigen::MatrixXd pos(n, dim);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < dim; ++j) pos(i, j) = coords[static_cast<size_t>(i) * dim + j];
  }
  return ParticleMeasure(pos, Eigen::Map<Eigen::VectorXd>(weights.data(), n));
}

}  // namespace kgf
