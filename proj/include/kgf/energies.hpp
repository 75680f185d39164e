#pragma once

#include <memory>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "kgf/kernels.hpp"
#include "kgf/measures.hpp"

// Energy functionals F(mu) over grid measures and their first variations.
// Divergences use the unbalanced conventions with phi(1) = phi'(1) = 0, so
// F >= 0 with equality at mu = target and the first variations feed the
// dissipation identities directly.

namespace kgf {

enum class DivergenceKind { KL, InclusiveKL, Chi2, Hellinger };

struct PhiDivergence {
  DivergenceKind kind;
  GridMeasure target;
};

struct PotentialEnergy {
  GridFunction values;                    // V on grid nodes
  std::optional<GridFunction> gradient;   // analytic V' when available
};

struct MmdEnergy {
  GridMeasure target;
  KernelSpec kernel;
};

struct EnergySpec;

struct LinearCombination {
  std::vector<std::pair<double, std::shared_ptr<const EnergySpec>>> parts;
};

struct EnergySpec {
  std::variant<PhiDivergence, PotentialEnergy, MmdEnergy, LinearCombination> term;

  static EnergySpec divergence(DivergenceKind kind, GridMeasure target);
  static EnergySpec potential(GridFunction values);
  static EnergySpec potential(GridFunction values, GridFunction gradient);
  static EnergySpec mmd(GridMeasure target, KernelSpec kernel);
  static EnergySpec combination(std::vector<std::pair<double, EnergySpec>> parts);
};

struct FirstVariation {
  GridFunction values;    // dF/dmu on grid nodes
  GridFunction gradient;  // spatial gradient, central differences unless analytic
};

double energy_value(const EnergySpec& e, const GridMeasure& mu);
FirstVariation first_variation(const EnergySpec& e, const GridMeasure& mu);

// Symmetric-difference validation of the first variation: returns
// ((F(mu + eps v) - F(mu - eps v)) / (2 eps), int dF/dmu dv).
std::pair<double, double> directional_check(const EnergySpec& e,
                                            const GridMeasure& mu,
                                            const GridFunction& v, double eps);

// Target of the leading divergence/MMD term; throws if the energy has none.
const GridMeasure& energy_target(const EnergySpec& e);

}  // namespace kgf
