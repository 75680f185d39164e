#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

// Discrete non-negative measures on uniform 1-D grids, weighted particle
// clouds, and the trapezoid quadrature they induce. Everything here is a
// plain value type; all operations are pure functions.

namespace kgf {

// Densities are clamped at this floor before logs, ratios or square-root
// ratios so degenerate inputs stay well defined.
inline constexpr double kDensityFloor = 1e-12;

class Grid {
 public:
  Grid(double left, double right, int n);

  double left() const { return left_; }
  double right() const { return right_; }
  int n() const { return n_; }
  double spacing() const { return (right_ - left_) / (n_ - 1); }
  double node(int i) const { return left_ + i * spacing(); }

  Eigen::VectorXd nodes() const;
  // Trapezoid weights: h at interior nodes, h/2 at the endpoints.
  Eigen::VectorXd quadrature_weights() const;

  bool operator==(const Grid& other) const;
  bool operator!=(const Grid& other) const { return !(*this == other); }

 private:
  double left_;
  double right_;
  int n_;
};

struct GridMeasure {
  GridMeasure(Grid grid, Eigen::VectorXd density);

  Grid grid;
  Eigen::VectorXd density;  // mass per unit length, >= 0
};

struct GridFunction {
  GridFunction(Grid grid, Eigen::VectorXd values);

  Grid grid;
  Eigen::VectorXd values;
};

struct ParticleMeasure {
  ParticleMeasure(Eigen::MatrixXd positions, Eigen::VectorXd weights);

  Eigen::MatrixXd positions;  // n x d
  Eigen::VectorXd weights;    // >= 0

  int size() const { return static_cast<int>(positions.rows()); }
  int dim() const { return static_cast<int>(positions.cols()); }
};

double mass(const GridMeasure& m);
double mass(const ParticleMeasure& m);

// L^2_mu pairing: integral of f*g dmu by trapezoid quadrature.
double weighted_inner(const GridFunction& f, const GridFunction& g,
                      const GridMeasure& m);
double weighted_inner(const Eigen::VectorXd& f, const Eigen::VectorXd& g,
                      const GridMeasure& m);

GridMeasure normalize(const GridMeasure& m);

inline double floored(double rho) {
  return rho < kDensityFloor ? kDensityFloor : rho;
}
Eigen::VectorXd floored(const Eigen::VectorXd& density);

void require_same_grid(const Grid& a, const Grid& b);

// Grid calculus helpers shared by the flow and regression code.
//
// grid_gradient: second-order central differences, one-sided first-order at
// the boundary nodes.
Eigen::VectorXd grid_gradient(const Grid& grid, const Eigen::VectorXd& values);
GridFunction grid_gradient(const GridFunction& f);

// Conservative divergence of a node flux. Node fluxes at the two boundary
// nodes are zeroed (no-flux), face fluxes are arithmetic means, and each
// node divides by its trapezoid cell width. The quadrature sum of the
// result telescopes to zero, so transport conserves mass to roundoff.
Eigen::VectorXd grid_divergence(const Grid& grid, const Eigen::VectorXd& flux);

// Analytic density families rendered on grid nodes (truncated, so the grid
// mass matches the requested mass only up to quadrature and tail error).
GridMeasure uniform_measure(const Grid& grid, double total_mass);
GridMeasure gaussian_measure(const Grid& grid, double mean, double stddev,
                             double total_mass);
struct MixtureComponent {
  double weight;
  double mean;
  double stddev;
};
GridMeasure mixture_measure(const Grid& grid,
                            const std::vector<MixtureComponent>& components,
                            double total_mass);

// CSV with header `x,density`, one row per node, %.17g precision.
void write_csv(const std::string& path, const GridMeasure& m);
GridMeasure read_grid_measure_csv(const std::string& path);

// CSV with header `w,x1,...,xd`.
void write_csv(const std::string& path, const ParticleMeasure& m);
ParticleMeasure read_particle_measure_csv(const std::string& path);

}  // namespace kgf
