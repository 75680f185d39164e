#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "kgf/energies.hpp"
#include "kgf/kernels.hpp"
#include "kgf/measures.hpp"

// Gradient-flow right-hand sides for the reaction, flat and transport
// dissipation geometries, with fixed-step time integration. All grid flows
// write xi for the first variation dF/dmu of the driving energy.

namespace kgf {

struct FisherRaoGeometry {};                                  // mudot = -mu xi
struct KernelizedFrGeometry { KernelSpec kernel; };           // mudot = -mu K_mu xi
struct KrrFrGeometry { KernelSpec kernel; double lambda; };   // growth = KRR fit of xi
struct MmdGeometry { KernelSpec kernel; };                    // mudot = -K^{-1} xi
struct SphericalMmdGeometry { KernelSpec kernel; };           // mass-preserving MMD flow
struct FrRegMmdGeometry { KernelSpec kernel; double lambda; };   // -mu (K_mu+l)^{-1} xi
struct MmdRegFrGeometry { KernelSpec kernel; double lambda; };   // -mu (l K_mu+I)^{-1} xi
struct SteinGeometry { KernelSpec kernel; };                  // mudot = div(mu K_mu grad xi)
struct RegularizedSteinGeometry { KernelSpec kernel; double lambda; };
struct WfrGeometry {
  KernelSpec transport_kernel;
  KernelSpec reaction_kernel;
  double lambda;
};
struct FlattenedFrGeometry { GridMeasure reference; };        // mudot = -omega xi

using GeometrySpec =
    std::variant<FisherRaoGeometry, KernelizedFrGeometry, KrrFrGeometry, MmdGeometry,
                 SphericalMmdGeometry, FrRegMmdGeometry, MmdRegFrGeometry, SteinGeometry,
                 RegularizedSteinGeometry, WfrGeometry, FlattenedFrGeometry>;

void validate(const GeometrySpec& g);
std::string geometry_name(const GeometrySpec& g);
// True when the tangent has the pure-reaction form -mu * r.
bool is_pure_reaction(const GeometrySpec& g);

enum class TimeScheme { ExplicitEuler, Multiplicative };

// Density rate of the grid flow at state mu.
GridFunction rhs(const GeometrySpec& g, const EnergySpec& e, const GridMeasure& mu);

struct StepResult {
  GridMeasure state;
  int clipped_nodes;  // euler clips negatives at zero; counted, never silent
};

StepResult step(const GridMeasure& mu, const GridFunction& tangent, double dt,
                TimeScheme scheme);

// Particle update: positions move with the velocity, weights scale by
// exp(-dt * growth).
ParticleMeasure step(const ParticleMeasure& p, const Eigen::MatrixXd& velocity,
                     const Eigen::VectorXd& growth, double dt);

struct FlowSpec {
  GeometrySpec geometry;
  EnergySpec energy;
  GridMeasure initial;
  double t_end;
  double dt;
  TimeScheme scheme;
  int record_every = 1;
  // Discrepancies to the energy target recorded per snapshot; names from
  // {mmd2, fisher_rao2, chi2}. mmd2 uses the geometry kernel.
  std::vector<std::string> track_discrepancies;
};

TimeScheme default_scheme(const GeometrySpec& g);

struct Trajectory {
  std::vector<double> times;
  std::vector<GridMeasure> states;
  std::vector<std::string> columns;  // energy, mass, dissipation, <extras>
  Eigen::MatrixXd diagnostics;       // one row per recorded time
  long total_clipped = 0;
};

Trajectory solve_flow(const FlowSpec& spec);

// Particle transport in the kernel-smoothed geometry (SVGD form): the
// score term of the target replaces grad log mu through integration by
// parts, so no density estimate is needed.
using ScoreFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

Eigen::MatrixXd svgd_velocity(const KernelSpec& k, const ParticleMeasure& particles,
                              const ScoreFunction& target_score);

struct ParticleTrajectory {
  std::vector<double> times;
  std::vector<ParticleMeasure> states;
};

ParticleTrajectory solve_svgd(const KernelSpec& k, const ParticleMeasure& initial,
                              const ScoreFunction& target_score, double dt, int steps,
                              int record_every = 1);

}  // namespace kgf
