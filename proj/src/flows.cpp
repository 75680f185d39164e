#include "kgf/flows.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "kgf/discrepancies.hpp"
#include "kgf/regression.hpp"

namespace kgf {

void validate(const GeometrySpec& g) {
  std::visit(
      [](const auto& geo) {
        using T = std::decay_t<decltype(geo)>;
        if constexpr (std::is_same_v<T, KrrFrGeometry>) {
          validate(geo.kernel);
          if (!(geo.lambda > 0.0)) throw std::invalid_argument("KRR geometry requires lambda > 0");
        } else if constexpr (std::is_same_v<T, FrRegMmdGeometry> ||
                             std::is_same_v<T, MmdRegFrGeometry> ||
                             std::is_same_v<T, RegularizedSteinGeometry>) {
          validate(geo.kernel);
          if (geo.lambda < 0.0) throw std::invalid_argument("lambda must be non-negative");
        } else if constexpr (std::is_same_v<T, WfrGeometry>) {
          validate(geo.transport_kernel);
          validate(geo.reaction_kernel);
          if (!(geo.lambda > 0.0)) throw std::invalid_argument("WFR geometry requires lambda > 0");
        } else if constexpr (std::is_same_v<T, FlattenedFrGeometry>) {
          // reference validated at construction
        } else if constexpr (!std::is_same_v<T, FisherRaoGeometry>) {
          validate(geo.kernel);
        }
      },
      g);
}

std::string geometry_name(const GeometrySpec& g) {
  return std::visit(
      [](const auto& geo) -> std::string {
        using T = std::decay_t<decltype(geo)>;
        if constexpr (std::is_same_v<T, FisherRaoGeometry>) return "fisher_rao";
        else if constexpr (std::is_same_v<T, KernelizedFrGeometry>) return "kernelized_fr";
        else if constexpr (std::is_same_v<T, KrrFrGeometry>) return "krr_fr";
        else if constexpr (std::is_same_v<T, MmdGeometry>) return "mmd";
        else if constexpr (std::is_same_v<T, SphericalMmdGeometry>) return "spherical_mmd";
        else if constexpr (std::is_same_v<T, FrRegMmdGeometry>) return "fr_reg_mmd";
        else if constexpr (std::is_same_v<T, MmdRegFrGeometry>) return "mmd_reg_fr";
        else if constexpr (std::is_same_v<T, SteinGeometry>) return "stein";
        else if constexpr (std::is_same_v<T, RegularizedSteinGeometry>) return "regularized_stein";
        else if constexpr (std::is_same_v<T, WfrGeometry>) return "wfr";
        else return "flattened_fr";
      },
      g);
}

bool is_pure_reaction(const GeometrySpec& g) {
  return std::holds_alternative<FisherRaoGeometry>(g) ||
         std::holds_alternative<KernelizedFrGeometry>(g) ||
         std::holds_alternative<KrrFrGeometry>(g) ||
         std::holds_alternative<FrRegMmdGeometry>(g) ||
         std::holds_alternative<MmdRegFrGeometry>(g);
}

TimeScheme default_scheme(const GeometrySpec& g) {
  return is_pure_reaction(g) ? TimeScheme::Multiplicative : TimeScheme::ExplicitEuler;
}

namespace {

Eigen::VectorXd reaction_tangent(const GridMeasure& mu, const Eigen::VectorXd& growth) {
  return -(mu.density.array() * growth.array()).matrix();
}

// Solve (lambda K_mu + I) v = xi by rescaling to the standard shifted form.
Eigen::VectorXd solve_mmd_reg_fr(const WeightedOperator& op, double lambda,
                                 const Eigen::VectorXd& xi) {
  if (lambda == 0.0) return xi;
  return solve_regularized(op, 1.0 / lambda, xi / lambda);
}

}  // namespace

GridFunction rhs(const GeometrySpec& g, const EnergySpec& e, const GridMeasure& mu) {
  validate(g);
  const FirstVariation fv = first_variation(e, mu);
  const Eigen::VectorXd& xi = fv.values.values;
  const Grid& grid = mu.grid;

  Eigen::VectorXd tangent = std::visit(
      [&](const auto& geo) -> Eigen::VectorXd {
        using T = std::decay_t<decltype(geo)>;
        if constexpr (std::is_same_v<T, FisherRaoGeometry>) {
          return reaction_tangent(mu, xi);
        } else if constexpr (std::is_same_v<T, KernelizedFrGeometry>) {
          const WeightedOperator op = make_operator(geo.kernel, mu);
          return reaction_tangent(mu, apply_integral_operator(op, xi));
        } else if constexpr (std::is_same_v<T, KrrFrGeometry>) {
          const WeightedOperator op = make_operator(geo.kernel, mu);
          const Eigen::VectorXd growth =
              solve_regularized(op, geo.lambda, apply_integral_operator(op, xi));
          return reaction_tangent(mu, growth);
        } else if constexpr (std::is_same_v<T, MmdGeometry>) {
          const WeightedOperator op = make_lebesgue_operator(geo.kernel, grid);
          return -solve_regularized(op, 0.0, xi);
        } else if constexpr (std::is_same_v<T, SphericalMmdGeometry>) {
          const WeightedOperator op = make_lebesgue_operator(geo.kernel, grid);
          const Eigen::VectorXd w = grid.quadrature_weights();
          const Eigen::VectorXd a = solve_regularized(op, 0.0, xi);
          const Eigen::VectorXd b =
              solve_regularized(op, 0.0, Eigen::VectorXd::Ones(grid.n()));
          const double shift = w.dot(a) / w.dot(b);
          return -(a - shift * b);
        } else if constexpr (std::is_same_v<T, FrRegMmdGeometry>) {
          const WeightedOperator op = make_operator(geo.kernel, mu);
          return reaction_tangent(mu, solve_regularized(op, geo.lambda, xi));
        } else if constexpr (std::is_same_v<T, MmdRegFrGeometry>) {
          const WeightedOperator op = make_operator(geo.kernel, mu);
          return reaction_tangent(mu, solve_mmd_reg_fr(op, geo.lambda, xi));
        } else if constexpr (std::is_same_v<T, SteinGeometry>) {
          const WeightedOperator op = make_operator(geo.kernel, mu);
          const Eigen::VectorXd velocity =
              apply_integral_operator(op, fv.gradient.values);
          return grid_divergence(grid, (mu.density.array() * velocity.array()).matrix());
        } else if constexpr (std::is_same_v<T, RegularizedSteinGeometry>) {
          const WeightedOperator op = make_operator(geo.kernel, mu);
          const Eigen::VectorXd velocity = solve_regularized(
              op, geo.lambda, apply_integral_operator(op, fv.gradient.values));
          return grid_divergence(grid, (mu.density.array() * velocity.array()).matrix());
        } else if constexpr (std::is_same_v<T, WfrGeometry>) {
          const WeightedOperator op_t = make_operator(geo.transport_kernel, mu);
          const Eigen::VectorXd velocity = solve_regularized(
              op_t, geo.lambda, apply_integral_operator(op_t, fv.gradient.values));
          const WeightedOperator op_r = make_operator(geo.reaction_kernel, mu);
          const Eigen::VectorXd growth =
              solve_regularized(op_r, geo.lambda, apply_integral_operator(op_r, xi));
          return grid_divergence(grid, (mu.density.array() * velocity.array()).matrix()) +
                 reaction_tangent(mu, growth);
        } else {  // FlattenedFrGeometry
          require_same_grid(geo.reference.grid, grid);
          return -(geo.reference.density.array() * xi.array()).matrix();
        }
      },
      g);

  if (!tangent.allFinite()) throw std::runtime_error("blow-up; reduce dt");
  return GridFunction(grid, std::move(tangent));
}

StepResult step(const GridMeasure& mu, const GridFunction& tangent, double dt,
                TimeScheme scheme) {
  require_same_grid(tangent.grid, mu.grid);
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const int n = mu.grid.n();
  Eigen::VectorXd next(n);
  int clipped = 0;
  if (scheme == TimeScheme::ExplicitEuler) {
    for (int i = 0; i < n; ++i) {
      const double v = mu.density[i] + dt * tangent.values[i];
      if (v < 0.0) {
        next[i] = 0.0;
        ++clipped;
      } else {
        next[i] = v;
      }
    }
  } else {
    // rho' = rho * exp(dt * tangent / rho); for tangent = -mu r this is the
    // exact exponential update and preserves positivity.
    for (int i = 0; i < n; ++i) {
      const double rho = mu.density[i];
      next[i] = rho > kDensityFloor ? rho * std::exp(dt * tangent.values[i] / rho) : rho;
    }
  }
  if (!next.allFinite()) throw std::runtime_error("blow-up; reduce dt");
  return StepResult{GridMeasure(mu.grid, std::move(next)), clipped};
}

ParticleMeasure step(const ParticleMeasure& p, const Eigen::MatrixXd& velocity,
                     const Eigen::VectorXd& growth, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (velocity.rows() != p.size() || velocity.cols() != p.dim() ||
      growth.size() != p.size()) {
    throw std::invalid_argument("length mismatch");
  }
  Eigen::MatrixXd pos = p.positions + dt * velocity;
  Eigen::VectorXd w = (p.weights.array() * (-dt * growth.array()).exp()).matrix();
  if (!pos.allFinite() || !w.allFinite()) throw std::runtime_error("blow-up; reduce dt");
  return ParticleMeasure(std::move(pos), std::move(w));
}

namespace {

double tracked_discrepancy(const std::string& name, const GeometrySpec& g,
                           const GridMeasure& mu, const GridMeasure& target) {
  if (name == "fisher_rao2") return fisher_rao2(mu, target);
  if (name == "chi2") return chi2_divergence(mu, target);
  if (name == "mmd2") {
    const KernelSpec* k = std::visit(
        [](const auto& geo) -> const KernelSpec* {
          using T = std::decay_t<decltype(geo)>;
          if constexpr (std::is_same_v<T, FisherRaoGeometry> ||
                        std::is_same_v<T, FlattenedFrGeometry>) {
            return nullptr;
          } else if constexpr (std::is_same_v<T, WfrGeometry>) {
            return &geo.reaction_kernel;
          } else {
            return &geo.kernel;
          }
        },
        g);
    if (k == nullptr) {
      throw std::invalid_argument("mmd2 diagnostic needs a kernel-bearing geometry");
    }
    return mmd2(*k, mu, target);
  }
  throw std::invalid_argument("unknown diagnostic '" + name + "'");
}

}  // namespace

Trajectory solve_flow(const FlowSpec& spec) {
  validate(spec.geometry);
  if (!(spec.t_end > 0.0)) throw std::invalid_argument("t_end must be positive");
  if (!(spec.dt > 0.0) || !(spec.dt < spec.t_end)) {
    throw std::invalid_argument("dt must satisfy 0 < dt < t_end");
  }
  if (spec.record_every < 1) throw std::invalid_argument("record_every must be positive");
  if (spec.scheme == TimeScheme::Multiplicative && !is_pure_reaction(spec.geometry)) {
    throw std::invalid_argument("multiplicative scheme requires a pure-reaction geometry");
  }
  const GridMeasure* target = nullptr;
  if (!spec.track_discrepancies.empty()) {
    target = &energy_target(spec.energy);
  }

  Trajectory out;
  out.columns = {"energy", "mass", "dissipation"};
  for (const auto& name : spec.track_discrepancies) out.columns.push_back(name);

  const int steps = static_cast<int>(std::llround(spec.t_end / spec.dt));
  std::vector<Eigen::VectorXd> rows;
  GridMeasure state = spec.initial;
  double t = 0.0;

  const auto record = [&](const GridMeasure& mu, double time, double dissipation) {
    Eigen::VectorXd row(static_cast<int>(out.columns.size()));
    row[0] = energy_value(spec.energy, mu);
    row[1] = mass(mu);
    row[2] = dissipation;
    for (size_t j = 0; j < spec.track_discrepancies.size(); ++j) {
      row[3 + static_cast<int>(j)] =
          tracked_discrepancy(spec.track_discrepancies[j], spec.geometry, mu, *target);
    }
    out.times.push_back(time);
    out.states.push_back(mu);
    rows.push_back(std::move(row));
  };

  const Eigen::VectorXd w = spec.initial.grid.quadrature_weights();
  for (int k = 0; k <= steps; ++k) {
    GridFunction tangent(state.grid, Eigen::VectorXd::Zero(state.grid.n()));
    try {
      tangent = rhs(spec.geometry, spec.energy, state);
    } catch (const std::runtime_error& err) {
      std::ostringstream msg;
      msg << err.what() << " at t=" << t;
      throw std::runtime_error(msg.str());
    }
    // Instantaneous dissipation -<xi, mudot> by quadrature.
    const Eigen::VectorXd xi = first_variation(spec.energy, state).values.values;
    const double dissipation = -(xi.array() * tangent.values.array() * w.array()).sum();

    if (k % spec.record_every == 0 || k == steps) record(state, t, dissipation);
    if (k == steps) break;

    try {
      StepResult next = step(state, tangent, spec.dt, spec.scheme);
      out.total_clipped += next.clipped_nodes;
      state = std::move(next.state);
    } catch (const std::runtime_error& err) {
      std::ostringstream msg;
      msg << err.what() << " at t=" << t;
      throw std::runtime_error(msg.str());
    }
    t += spec.dt;
  }

  out.diagnostics.resize(static_cast<int>(rows.size()), static_cast<int>(out.columns.size()));
  for (size_t r = 0; r < rows.size(); ++r) out.diagnostics.row(static_cast<int>(r)) = rows[r];
  return out;
}

Eigen::MatrixXd svgd_velocity(const KernelSpec& k, const ParticleMeasure& particles,
                              const ScoreFunction& target_score) {
  validate(k);
  const int n = particles.size();
  const int d = particles.dim();
  Eigen::MatrixXd scores(n, d);
  for (int j = 0; j < n; ++j) {
    const Eigen::VectorXd s = target_score(particles.positions.row(j).transpose());
    if (s.size() != d) throw std::invalid_argument("score dimension mismatch");
    scores.row(j) = s.transpose();
  }
  Eigen::MatrixXd vel = Eigen::MatrixXd::Zero(n, d);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd xi = particles.positions.row(i).transpose();
    for (int j = 0; j < n; ++j) {
      const Eigen::VectorXd xj = particles.positions.row(j).transpose();
      const double kij = kernel_eval(k, xj, xi);
      // grad_{x_j} k(x_j, x_i) pushes particles apart; the score term pulls
      // them toward the target.
      vel.row(i) += particles.weights[j] *
                    (kij * scores.row(j) + kernel_grad_x(k, xj, xi).transpose());
    }
  }
  return vel;
}

ParticleTrajectory solve_svgd(const KernelSpec& k, const ParticleMeasure& initial,
                              const ScoreFunction& target_score, double dt, int steps,
                              int record_every) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (steps < 1) throw std::invalid_argument("steps must be positive");
  if (record_every < 1) throw std::invalid_argument("record_every must be positive");
  ParticleTrajectory out;
  ParticleMeasure state = initial;
  for (int s = 0; s <= steps; ++s) {
    if (s % record_every == 0 || s == steps) {
      out.times.push_back(s * dt);
      out.states.push_back(state);
    }
    if (s == steps) break;
    const Eigen::MatrixXd vel = svgd_velocity(k, state, target_score);
    state = step(state, vel, Eigen::VectorXd::Zero(state.size()), dt);
  }
  return out;
}

}  // namespace kgf
