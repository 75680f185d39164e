// Batch experiment driver: flows, geodesics, discrepancies and the
// verification studies, bound to strict JSON configs. Outputs are CSV and
// JSON files written with full %.17g precision so reruns are byte-identical.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "kgf/analysis.hpp"
#include "kgf/discrepancies.hpp"
#include "kgf/flows.hpp"
#include "kgf/geodesics.hpp"

#include "config.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitConfigError = 2;
constexpr int kExitNumericalError = 3;

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

struct Options {
  std::string out_override;
  bool quiet = false;
  std::optional<std::uint64_t> seed_override;
};

std::string resolve_out(const Options& opt, const std::string& configured) {
  const std::string dir = opt.out_override.empty() ? configured : opt.out_override;
  if (dir.empty()) return dir;
  fs::create_directories(dir);
  return dir;
}

void write_state_csv(const std::string& dir, int index, const kgf::GridMeasure& m) {
  kgf::write_csv(dir + "/state_" + std::to_string(index) + ".csv", m);
}

int run_flow(const kgf::cli::FlowTask& task, const Options& opt) {
  kgf::FlowSpec spec{task.geometry,
                     task.energy,
                     task.initial,
                     task.t_end,
                     task.dt,
                     task.scheme_given ? task.scheme : kgf::default_scheme(task.geometry),
                     task.record_every,
                     task.diagnostics};
  const kgf::Trajectory traj = kgf::solve_flow(spec);
  const std::string dir = resolve_out(opt, task.output_dir);

  std::ofstream diag(dir + "/diagnostics.csv");
  diag << "t";
  for (const auto& column : traj.columns) diag << ',' << column;
  diag << '\n';
  for (size_t r = 0; r < traj.times.size(); ++r) {
    diag << fmt(traj.times[r]);
    for (int c = 0; c < traj.diagnostics.cols(); ++c) {
      diag << ',' << fmt(traj.diagnostics(static_cast<int>(r), c));
    }
    diag << '\n';
  }
  for (size_t r = 0; r < traj.states.size(); ++r) {
    write_state_csv(dir, static_cast<int>(r), traj.states[r]);
  }
  if (!opt.quiet) {
    std::cout << "flow " << kgf::geometry_name(task.geometry) << ": " << traj.times.size()
              << " snapshots -> " << dir << "\n";
    if (traj.total_clipped > 0) {
      std::cout << "note: " << traj.total_clipped
                << " node updates clipped at zero density\n";
    }
  }
  return 0;
}

int run_geodesic(const kgf::cli::GeodesicTask& task, const Options& opt) {
  const std::string dir = resolve_out(opt, task.output_dir);
  for (int j = 0; j <= task.steps; ++j) {
    const double s = static_cast<double>(j) / task.steps;
    const kgf::GridMeasure state = task.kind == "fisher_rao"
                                       ? kgf::fr_geodesic(task.mu0, task.mu1, s)
                                       : kgf::mmd_geodesic(task.mu0, task.mu1, s);
    write_state_csv(dir, j, state);
  }
  if (!opt.quiet) {
    std::cout << "geodesic " << task.kind << ": " << (task.steps + 1) << " snapshots -> "
              << dir << "\n";
  }
  return 0;
}

int run_discrepancy(const kgf::cli::DiscrepancyTask& task, const Options& opt) {
  const auto need_kernel = [&]() -> const kgf::KernelSpec& {
    if (!task.kernel) {
      throw kgf::cli::ConfigError("config error at $.kernel: required for " + task.name);
    }
    return *task.kernel;
  };
  const auto need_omega = [&]() -> const kgf::GridMeasure& {
    if (!task.omega) {
      throw kgf::cli::ConfigError("config error at $.omega: required for " + task.name);
    }
    return *task.omega;
  };

  double value = 0.0;
  json meta;
  if (task.name == "mmd2") {
    value = kgf::mmd2(need_kernel(), task.mu, task.nu);
  } else if (task.name == "mmd_dual") {
    value = kgf::mmd_dual_value(need_kernel(), task.mu, task.nu);
  } else if (task.name == "fisher_rao2") {
    value = kgf::fisher_rao2(task.mu, task.nu);
  } else if (task.name == "chi2") {
    value = kgf::chi2_divergence(task.mu, task.nu);
  } else if (task.name == "flattened_fr2") {
    value = kgf::flattened_fr2(task.mu, task.nu, need_omega());
  } else if (task.name == "de_stein2") {
    value = kgf::de_stein2(task.mu, task.nu, need_kernel());
  } else if (task.name == "flat_w2") {
    value = kgf::flat_w2(task.mu, task.nu, need_omega());
  } else if (task.name == "mmd_fr2") {
    value = kgf::mmd_fr2(need_kernel(), task.mu, task.nu, task.lambda);
    meta["lambda"] = task.lambda;
  } else if (task.name == "d_wfr2") {
    value = kgf::d_wfr2(task.mu, task.nu, need_kernel());
  } else if (task.name == "ksf2") {
    value = kgf::ksf2(task.mu, task.nu, need_kernel(), task.a);
    meta["a"] = task.a;
  }
  meta["grid_n"] = task.grid.n();

  json report;
  report["name"] = task.name;
  report["value"] = value;
  report["meta"] = meta;
  std::cout << report.dump() << "\n";
  if (!task.output_dir.empty() || !opt.out_override.empty()) {
    const std::string dir = resolve_out(opt, task.output_dir);
    std::ofstream out(dir + "/discrepancy.json");
    out << report.dump(2) << "\n";
  }
  return 0;
}

int run_gamma(const kgf::cli::GammaTask& task, const Options& opt) {
  const auto rows = kgf::gamma_convergence_study(task.energy, task.initial, task.kernel,
                                                 task.lambdas, task.t_end, task.dt);
  const std::string dir = resolve_out(opt, task.output_dir);
  std::ofstream out(dir + "/gamma_study.csv");
  out << "lambda,sup_l2_error,diss_lambda,diss_fr,edp_defect,rate_gap\n";
  for (const auto& row : rows) {
    out << fmt(row.lambda) << ',' << fmt(row.sup_l2_error) << ',' << fmt(row.d_lambda) << ','
        << fmt(row.d_fr) << ',' << fmt(row.edp_defect) << ',' << fmt(row.rate_gap) << '\n';
  }
  if (!opt.quiet) {
    std::cout << "gamma study: " << rows.size() << " regularization levels -> " << dir
              << "/gamma_study.csv\n";
  }
  return 0;
}

int run_verify(const Options& opt, std::uint64_t seed) {
  const auto results = kgf::run_identity_suite(seed);
  bool all_pass = true;
  json checks = json::array();
  for (const auto& r : results) {
    all_pass = all_pass && r.pass;
    if (!opt.quiet) {
      std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << " defect=" << fmt(r.defect)
                << " tol=" << fmt(r.tolerance) << "\n";
    }
    checks.push_back({{"name", r.name},
                      {"pass", r.pass},
                      {"defect", r.defect},
                      {"tolerance", r.tolerance}});
  }
  json report;
  report["seed"] = seed;
  report["all_pass"] = all_pass;
  report["checks"] = checks;
  const std::string dir = opt.out_override.empty() ? std::string(".") : opt.out_override;
  if (!opt.out_override.empty()) fs::create_directories(dir);
  std::ofstream out(dir + "/verify_report.json");
  out << report.dump(2) << "\n";
  if (!opt.quiet) {
    std::cout << (all_pass ? "all checks passed" : "some checks FAILED") << " -> " << dir
              << "/verify_report.json\n";
  }
  return all_pass ? 0 : 1;
}

int dispatch_config(const std::string& config_path, const Options& opt) {
  const kgf::cli::ParsedConfig cfg = kgf::cli::load_config(config_path);
  return std::visit(
      [&](const auto& task) -> int {
        using T = std::decay_t<decltype(task)>;
        if constexpr (std::is_same_v<T, kgf::cli::FlowTask>) {
          return run_flow(task, opt);
        } else if constexpr (std::is_same_v<T, kgf::cli::GeodesicTask>) {
          return run_geodesic(task, opt);
        } else if constexpr (std::is_same_v<T, kgf::cli::DiscrepancyTask>) {
          return run_discrepancy(task, opt);
        } else {
          return run_gamma(task, opt);
        }
      },
      cfg.task);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gradient flows of energies over discrete measures in kernel geometries"};
  app.require_subcommand(1);

  Options opt;
  app.add_option("--out", opt.out_override, "override the configured output directory");
  app.add_flag("--quiet", opt.quiet, "suppress progress output");
  std::uint64_t seed_flag = 0;
  auto* seed_opt = app.add_option("--seed", seed_flag, "override the config seed");

  std::string flow_cfg, geodesic_cfg, discrepancy_cfg, gamma_cfg;
  auto* flow = app.add_subcommand("flow", "integrate a gradient flow from a config");
  flow->add_option("config", flow_cfg, "JSON config")->required();
  auto* geodesic = app.add_subcommand("geodesic", "sample a closed-form geodesic");
  geodesic->add_option("config", geodesic_cfg, "JSON config")->required();
  auto* discrepancy = app.add_subcommand("discrepancy", "evaluate a static discrepancy");
  discrepancy->add_option("config", discrepancy_cfg, "JSON config")->required();
  auto* verify = app.add_subcommand("verify", "run the structural identity suite");
  auto* study = app.add_subcommand("study", "parameter studies");
  study->require_subcommand(1);
  auto* gamma = study->add_subcommand("gamma", "ridge-parameter convergence study");
  gamma->add_option("config", gamma_cfg, "JSON config")->required();

  CLI11_PARSE(app, argc, argv);
  if (seed_opt->count() > 0) opt.seed_override = seed_flag;

  try {
    if (*verify) {
      const std::uint64_t seed = opt.seed_override.value_or(2026);
      return run_verify(opt, seed);
    }
    const std::string cfg_path = *flow ? flow_cfg
                                 : *geodesic ? geodesic_cfg
                                 : *discrepancy ? discrepancy_cfg
                                               : gamma_cfg;
    return dispatch_config(cfg_path, opt);
  } catch (const kgf::cli::ConfigError& err) {
    std::cerr << err.what() << "\n";
    return kExitConfigError;
  } catch (const std::invalid_argument& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& err) {
    std::cerr << "numerical failure: " << err.what() << "\n";
    return kExitNumericalError;
  }
}
