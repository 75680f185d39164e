#include "kgf/energies.hpp"

#include <cmath>
#include <stdexcept>

namespace kgf {

EnergySpec EnergySpec::divergence(DivergenceKind kind, GridMeasure target) {
  return EnergySpec{PhiDivergence{kind, std::move(target)}};
}

EnergySpec EnergySpec::potential(GridFunction values) {
  return EnergySpec{PotentialEnergy{std::move(values), std::nullopt}};
}

EnergySpec EnergySpec::potential(GridFunction values, GridFunction gradient) {
  require_same_grid(values.grid, gradient.grid);
  return EnergySpec{PotentialEnergy{std::move(values), std::move(gradient)}};
}

EnergySpec EnergySpec::mmd(GridMeasure target, KernelSpec kernel) {
  validate(kernel);
  return EnergySpec{MmdEnergy{std::move(target), kernel}};
}

EnergySpec EnergySpec::combination(std::vector<std::pair<double, EnergySpec>> parts) {
  LinearCombination lc;
  lc.parts.reserve(parts.size());
  for (auto& [c, e] : parts) {
    if (!std::isfinite(c)) throw std::invalid_argument("combination coefficients must be finite");
    lc.parts.emplace_back(c, std::make_shared<const EnergySpec>(std::move(e)));
  }
  return EnergySpec{std::move(lc)};
}

namespace {

double divergence_value(const PhiDivergence& d, const GridMeasure& mu) {
  require_same_grid(d.target.grid, mu.grid);
  const Eigen::VectorXd w = mu.grid.quadrature_weights();
  double acc = 0.0;
  for (int i = 0; i < mu.grid.n(); ++i) {
    const double x = mu.density[i];
    const double p = d.target.density[i];
    const double xf = floored(x);
    const double pf = floored(p);
    double term = 0.0;
    switch (d.kind) {
      case DivergenceKind::KL:
        term = (x > 0.0 ? x * std::log(xf / pf) : 0.0) - x + p;
        break;
      case DivergenceKind::InclusiveKL:
        term = (p > 0.0 ? p * std::log(pf / xf) : 0.0) - p + x;
        break;
      case DivergenceKind::Chi2: {
        const double r = x / pf - 1.0;
        term = r * r * pf;
        break;
      }
      case DivergenceKind::Hellinger: {
        const double r = std::sqrt(x) - std::sqrt(p);
        term = 4.0 * r * r;
        break;
      }
    }
    acc += term * w[i];
  }
  return acc;
}

Eigen::VectorXd divergence_variation(const PhiDivergence& d, const GridMeasure& mu) {
  require_same_grid(d.target.grid, mu.grid);
  Eigen::VectorXd xi(mu.grid.n());
  for (int i = 0; i < mu.grid.n(); ++i) {
    const double xf = floored(mu.density[i]);
    const double pf = floored(d.target.density[i]);
    switch (d.kind) {
      case DivergenceKind::KL:
        xi[i] = std::log(xf / pf);
        break;
      case DivergenceKind::InclusiveKL:
        xi[i] = 1.0 - pf / xf;
        break;
      case DivergenceKind::Chi2:
        xi[i] = 2.0 * (mu.density[i] / pf - 1.0);
        break;
      case DivergenceKind::Hellinger:
        xi[i] = 4.0 * (1.0 - std::sqrt(pf / xf));
        break;
    }
  }
  return xi;
}

// s = (mu - pi) .* w; the MMD energy is half of s^T K s.
Eigen::VectorXd mmd_signed_mass(const MmdEnergy& e, const GridMeasure& mu) {
  require_same_grid(e.target.grid, mu.grid);
  const Eigen::VectorXd w = mu.grid.quadrature_weights();
  return ((mu.density - e.target.density).array() * w.array()).matrix();
}

}  // namespace

double energy_value(const EnergySpec& e, const GridMeasure& mu) {
  double value = std::visit(
      [&](const auto& term) -> double {
        using T = std::decay_t<decltype(term)>;
        if constexpr (std::is_same_v<T, PhiDivergence>) {
          return divergence_value(term, mu);
        } else if constexpr (std::is_same_v<T, PotentialEnergy>) {
          require_same_grid(term.values.grid, mu.grid);
          const Eigen::VectorXd w = mu.grid.quadrature_weights();
          return (term.values.values.array() * mu.density.array() * w.array()).sum();
        } else if constexpr (std::is_same_v<T, MmdEnergy>) {
          const Eigen::VectorXd s = mmd_signed_mass(term, mu);
          const Eigen::MatrixXd k = gram(term.kernel, mu.grid.nodes()).entries;
          return 0.5 * s.dot(k * s);
        } else {
          double acc = 0.0;
          for (const auto& [c, part] : term.parts) acc += c * energy_value(*part, mu);
          return acc;
        }
      },
      e.term);
  if (!std::isfinite(value)) throw std::runtime_error("energy overflow");
  return value;
}

FirstVariation first_variation(const EnergySpec& e, const GridMeasure& mu) {
  Eigen::VectorXd xi;
  std::optional<Eigen::VectorXd> analytic_grad;
  std::visit(
      [&](const auto& term) {
        using T = std::decay_t<decltype(term)>;
        if constexpr (std::is_same_v<T, PhiDivergence>) {
          xi = divergence_variation(term, mu);
        } else if constexpr (std::is_same_v<T, PotentialEnergy>) {
          require_same_grid(term.values.grid, mu.grid);
          xi = term.values.values;
          if (term.gradient) analytic_grad = term.gradient->values;
        } else if constexpr (std::is_same_v<T, MmdEnergy>) {
          const Eigen::VectorXd s = mmd_signed_mass(term, mu);
          xi = gram(term.kernel, mu.grid.nodes()).entries * s;
        } else {
          xi = Eigen::VectorXd::Zero(mu.grid.n());
          Eigen::VectorXd grad_acc = Eigen::VectorXd::Zero(mu.grid.n());
          for (const auto& [c, part] : term.parts) {
            const FirstVariation fv = first_variation(*part, mu);
            xi += c * fv.values.values;
            grad_acc += c * fv.gradient.values;
          }
          analytic_grad = grad_acc;
        }
      },
      e.term);
  if (!xi.allFinite()) throw std::runtime_error("energy overflow");
  Eigen::VectorXd grad = analytic_grad ? *analytic_grad : grid_gradient(mu.grid, xi);
  return FirstVariation{GridFunction(mu.grid, xi), GridFunction(mu.grid, grad)};
}

std::pair<double, double> directional_check(const EnergySpec& e, const GridMeasure& mu,
                                            const GridFunction& v, double eps) {
  require_same_grid(v.grid, mu.grid);
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  const GridMeasure plus(mu.grid, mu.density + eps * v.values);
  const GridMeasure minus(mu.grid, mu.density - eps * v.values);
  const double lhs = (energy_value(e, plus) - energy_value(e, minus)) / (2.0 * eps);
  const FirstVariation fv = first_variation(e, mu);
  const Eigen::VectorXd w = mu.grid.quadrature_weights();
  const double rhs = (fv.values.values.array() * v.values.array() * w.array()).sum();
  return {lhs, rhs};
}

const GridMeasure& energy_target(const EnergySpec& e) {
  if (const auto* d = std::get_if<PhiDivergence>(&e.term)) return d->target;
  if (const auto* m = std::get_if<MmdEnergy>(&e.term)) return m->target;
  if (const auto* lc = std::get_if<LinearCombination>(&e.term)) {
    for (const auto& [c, part] : lc->parts) {
      (void)c;
      try {
        return energy_target(*part);
      } catch (const std::invalid_argument&) {
      }
    }
  }
  throw std::invalid_argument("energy has no target measure");
}

}  // namespace kgf
