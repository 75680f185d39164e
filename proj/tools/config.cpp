#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace kgf::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config error at " + (path.empty() ? "$" : path) + ": " + what);
}

void require_keys(const json& node, const std::string& path,
                  const std::set<std::string>& required,
                  const std::set<std::string>& optional = {}) {
  if (!node.is_object()) fail(path, "expected an object");
  for (const auto& item : node.items()) {
    if (!required.count(item.key()) && !optional.count(item.key())) {
      fail(path + "." + item.key(), "unknown key");
    }
  }
  for (const auto& key : required) {
    if (!node.contains(key)) fail(path + "." + key, "missing required key");
  }
}

double get_number(const json& node, const std::string& path, const std::string& key) {
  if (!node.contains(key) || !node[key].is_number()) fail(path + "." + key, "expected a number");
  return node[key].get<double>();
}

int get_int(const json& node, const std::string& path, const std::string& key) {
  if (!node.contains(key) || !node[key].is_number_integer()) {
    fail(path + "." + key, "expected an integer");
  }
  return node[key].get<int>();
}

std::string get_string(const json& node, const std::string& path, const std::string& key) {
  if (!node.contains(key) || !node[key].is_string()) fail(path + "." + key, "expected a string");
  return node[key].get<std::string>();
}

Grid parse_grid(const json& node, const std::string& path) {
  require_keys(node, path, {"left", "right", "n"});
  try {
    return Grid(get_number(node, path, "left"), get_number(node, path, "right"),
                get_int(node, path, "n"));
  } catch (const std::invalid_argument& err) {
    fail(path, err.what());
  }
}

KernelSpec parse_kernel(const json& node, const std::string& path) {
  require_keys(node, path, {"family", "bandwidth"}, {"scale"});
  KernelSpec k;
  const std::string family = get_string(node, path, "family");
  if (family == "gaussian") {
    k.family = KernelFamily::Gaussian;
  } else if (family == "laplace") {
    k.family = KernelFamily::Laplace;
  } else if (family == "imq") {
    k.family = KernelFamily::InverseMultiquadric;
  } else {
    fail(path + ".family", "expected gaussian, laplace or imq");
  }
  k.bandwidth = get_number(node, path, "bandwidth");
  k.scale = node.contains("scale") ? get_number(node, path, "scale") : 1.0;
  try {
    validate(k);
  } catch (const std::invalid_argument& err) {
    fail(path, err.what());
  }
  return k;
}

GridMeasure parse_measure(const json& node, const std::string& path, const Grid& grid) {
  if (!node.is_object()) fail(path, "expected an object");
  try {
    if (node.contains("csv")) {
      require_keys(node, path, {"csv"}, {"normalize"});
      GridMeasure m = read_grid_measure_csv(get_string(node, path, "csv"));
      if (m.grid != grid) fail(path + ".csv", "measure grid does not match the config grid");
      return node.value("normalize", false) ? normalize(m) : m;
    }
    const std::string family = get_string(node, path, "family");
    const bool renorm = node.value("normalize", false);
    if (family == "uniform") {
      require_keys(node, path, {"family", "mass"}, {"normalize"});
      const GridMeasure m = uniform_measure(grid, get_number(node, path, "mass"));
      return renorm ? normalize(m) : m;
    }
    if (family == "gaussian") {
      require_keys(node, path, {"family", "mean", "stddev"}, {"mass", "normalize"});
      const GridMeasure m =
          gaussian_measure(grid, get_number(node, path, "mean"),
                           get_number(node, path, "stddev"),
                           node.contains("mass") ? get_number(node, path, "mass") : 1.0);
      return renorm ? normalize(m) : m;
    }
    if (family == "mixture") {
      require_keys(node, path, {"family", "components"}, {"mass", "normalize"});
      if (!node["components"].is_array() || node["components"].empty()) {
        fail(path + ".components", "expected a non-empty array");
      }
      std::vector<MixtureComponent> components;
      int index = 0;
      for (const auto& c : node["components"]) {
        const std::string cpath = path + ".components[" + std::to_string(index++) + "]";
        require_keys(c, cpath, {"weight", "mean", "stddev"});
        components.push_back({get_number(c, cpath, "weight"), get_number(c, cpath, "mean"),
                              get_number(c, cpath, "stddev")});
      }
      const GridMeasure m =
          mixture_measure(grid, components,
                          node.contains("mass") ? get_number(node, path, "mass") : 1.0);
      return renorm ? normalize(m) : m;
    }
    fail(path + ".family", "expected uniform, gaussian, mixture or a csv entry");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& err) {
    fail(path, err.what());
  }
}

EnergySpec parse_energy(const json& node, const std::string& path, const Grid& grid) {
  const std::string variant = get_string(node, path, "variant");
  if (variant == "divergence") {
    require_keys(node, path, {"variant", "kind", "target"});
    const std::string kind = get_string(node, path, "kind");
    DivergenceKind k = DivergenceKind::KL;
    if (kind == "kl") {
      k = DivergenceKind::KL;
    } else if (kind == "inclusive_kl") {
      k = DivergenceKind::InclusiveKL;
    } else if (kind == "chi2") {
      k = DivergenceKind::Chi2;
    } else if (kind == "hellinger") {
      k = DivergenceKind::Hellinger;
    } else {
      fail(path + ".kind", "expected kl, inclusive_kl, chi2 or hellinger");
    }
    return EnergySpec::divergence(k, parse_measure(node["target"], path + ".target", grid));
  }
  if (variant == "mmd") {
    require_keys(node, path, {"variant", "target", "kernel"});
    return EnergySpec::mmd(parse_measure(node["target"], path + ".target", grid),
                           parse_kernel(node["kernel"], path + ".kernel"));
  }
  if (variant == "potential") {
    // V(x) = sum_k c_k x^k, differentiated analytically.
    require_keys(node, path, {"variant", "polynomial"});
    if (!node["polynomial"].is_array() || node["polynomial"].empty()) {
      fail(path + ".polynomial", "expected a non-empty coefficient array");
    }
    std::vector<double> coeff;
    for (const auto& c : node["polynomial"]) {
      if (!c.is_number()) fail(path + ".polynomial", "expected numbers");
      coeff.push_back(c.get<double>());
    }
    Eigen::VectorXd v = Eigen::VectorXd::Zero(grid.n());
    Eigen::VectorXd dv = Eigen::VectorXd::Zero(grid.n());
    for (int i = 0; i < grid.n(); ++i) {
      const double x = grid.node(i);
      double pow_x = 1.0;
      for (size_t k = 0; k < coeff.size(); ++k) {
        v[i] += coeff[k] * pow_x;
        if (k + 1 < coeff.size()) dv[i] += coeff[k + 1] * static_cast<double>(k + 1) * pow_x;
        pow_x *= x;
      }
    }
    return EnergySpec::potential(GridFunction(grid, v), GridFunction(grid, dv));
  }
  fail(path + ".variant", "expected divergence, mmd or potential");
}

GeometrySpec parse_geometry(const json& node, const std::string& path, const Grid& grid,
                            const std::optional<KernelSpec>& kernel) {
  const std::string variant = get_string(node, path, "variant");
  const auto need_kernel = [&]() -> KernelSpec {
    if (!kernel) fail(path, "geometry '" + variant + "' needs a top-level kernel");
    return *kernel;
  };
  const auto need_lambda = [&]() -> double {
    return get_number(node, path, "lambda");
  };
  if (variant == "fisher_rao") {
    require_keys(node, path, {"variant"});
    return FisherRaoGeometry{};
  }
  if (variant == "kernelized_fr") {
    require_keys(node, path, {"variant"});
    return KernelizedFrGeometry{need_kernel()};
  }
  if (variant == "krr_fr") {
    require_keys(node, path, {"variant", "lambda"});
    return KrrFrGeometry{need_kernel(), need_lambda()};
  }
  if (variant == "mmd") {
    require_keys(node, path, {"variant"});
    return MmdGeometry{need_kernel()};
  }
  if (variant == "spherical_mmd") {
    require_keys(node, path, {"variant"});
    return SphericalMmdGeometry{need_kernel()};
  }
  if (variant == "fr_reg_mmd") {
    require_keys(node, path, {"variant", "lambda"});
    return FrRegMmdGeometry{need_kernel(), need_lambda()};
  }
  if (variant == "mmd_reg_fr") {
    require_keys(node, path, {"variant", "lambda"});
    return MmdRegFrGeometry{need_kernel(), need_lambda()};
  }
  if (variant == "stein") {
    require_keys(node, path, {"variant"});
    return SteinGeometry{need_kernel()};
  }
  if (variant == "regularized_stein") {
    require_keys(node, path, {"variant", "lambda"});
    return RegularizedSteinGeometry{need_kernel(), need_lambda()};
  }
  if (variant == "wfr") {
    require_keys(node, path, {"variant", "lambda"}, {"reaction_kernel"});
    const KernelSpec transport = need_kernel();
    const KernelSpec reaction =
        node.contains("reaction_kernel")
            ? parse_kernel(node["reaction_kernel"], path + ".reaction_kernel")
            : transport;
    return WfrGeometry{transport, reaction, need_lambda()};
  }
  if (variant == "flattened_fr") {
    require_keys(node, path, {"variant", "reference"});
    return FlattenedFrGeometry{parse_measure(node["reference"], path + ".reference", grid)};
  }
  fail(path + ".variant", "unknown geometry variant '" + variant + "'");
}

}  // namespace

ParsedConfig parse_config(const nlohmann::json& root) {
  if (!root.is_object()) throw ConfigError("config error at $: expected an object");
  if (!root.contains("version") || !root["version"].is_number_integer() ||
      root["version"].get<int>() != 1) {
    throw ConfigError("config error at $.version: expected the integer 1");
  }
  const std::string task = get_string(root, "$", "task");

  ParsedConfig out{GeodesicTask{Grid(0.0, 1.0, 2), "",
                                GridMeasure(Grid(0.0, 1.0, 2), Eigen::VectorXd::Zero(2)),
                                GridMeasure(Grid(0.0, 1.0, 2), Eigen::VectorXd::Zero(2)), 1, ""},
                   0, false};
  if (root.contains("seed")) {
    if (!root["seed"].is_number_integer()) {
      throw ConfigError("config error at $.seed: expected an integer");
    }
    out.seed = root["seed"].get<std::uint64_t>();
    out.seed_given = true;
  }

  if (task == "flow") {
    require_keys(root, "$", {"version", "task", "grid", "geometry", "energy", "initial",
                             "time", "output_dir"},
                 {"kernel", "diagnostics", "seed"});
    const Grid grid = parse_grid(root["grid"], "$.grid");
    std::optional<KernelSpec> kernel;
    if (root.contains("kernel")) kernel = parse_kernel(root["kernel"], "$.kernel");
    FlowTask flow{grid,
                  parse_geometry(root["geometry"], "$.geometry", grid, kernel),
                  parse_energy(root["energy"], "$.energy", grid),
                  parse_measure(root["initial"], "$.initial", grid),
                  0.0,
                  0.0,
                  1,
                  TimeScheme::ExplicitEuler,
                  false,
                  {},
                  get_string(root, "$", "output_dir")};
    const json& time = root["time"];
    require_keys(time, "$.time", {"t_end", "dt"}, {"record_every", "scheme"});
    flow.t_end = get_number(time, "$.time", "t_end");
    flow.dt = get_number(time, "$.time", "dt");
    flow.record_every =
        time.contains("record_every") ? get_int(time, "$.time", "record_every") : 1;
    if (time.contains("scheme")) {
      const std::string scheme = get_string(time, "$.time", "scheme");
      if (scheme == "explicit_euler") {
        flow.scheme = TimeScheme::ExplicitEuler;
      } else if (scheme == "multiplicative") {
        flow.scheme = TimeScheme::Multiplicative;
      } else {
        fail("$.time.scheme", "expected explicit_euler or multiplicative");
      }
      flow.scheme_given = true;
    }
    if (root.contains("diagnostics")) {
      if (!root["diagnostics"].is_array()) fail("$.diagnostics", "expected an array of names");
      for (const auto& d : root["diagnostics"]) {
        if (!d.is_string()) fail("$.diagnostics", "expected strings");
        flow.diagnostics.push_back(d.get<std::string>());
      }
    }
    out.task = std::move(flow);
    return out;
  }

  if (task == "geodesic") {
    require_keys(root, "$",
                 {"version", "task", "kind", "grid", "mu0", "mu1", "steps", "output_dir"},
                 {"seed"});
    const Grid grid = parse_grid(root["grid"], "$.grid");
    GeodesicTask geo{grid,
                     get_string(root, "$", "kind"),
                     parse_measure(root["mu0"], "$.mu0", grid),
                     parse_measure(root["mu1"], "$.mu1", grid),
                     get_int(root, "$", "steps"),
                     get_string(root, "$", "output_dir")};
    if (geo.kind != "fisher_rao" && geo.kind != "mmd") {
      fail("$.kind", "expected fisher_rao or mmd");
    }
    if (geo.steps < 1) fail("$.steps", "expected a positive integer");
    out.task = std::move(geo);
    return out;
  }

  if (task == "discrepancy") {
    require_keys(root, "$", {"version", "task", "name", "grid", "mu", "nu"},
                 {"kernel", "omega", "lambda", "a", "output_dir", "seed"});
    const Grid grid = parse_grid(root["grid"], "$.grid");
    DiscrepancyTask disc{grid,
                         get_string(root, "$", "name"),
                         parse_measure(root["mu"], "$.mu", grid),
                         parse_measure(root["nu"], "$.nu", grid),
                         std::nullopt,
                         std::nullopt,
                         0.0,
                         1.0,
                         root.contains("output_dir") ? get_string(root, "$", "output_dir") : ""};
    if (root.contains("kernel")) disc.kernel = parse_kernel(root["kernel"], "$.kernel");
    if (root.contains("omega")) disc.omega = parse_measure(root["omega"], "$.omega", grid);
    if (root.contains("lambda")) disc.lambda = get_number(root, "$", "lambda");
    if (root.contains("a")) disc.a = get_number(root, "$", "a");
    static const std::set<std::string> names = {
        "mmd2",      "mmd_dual", "fisher_rao2", "chi2",   "flattened_fr2",
        "de_stein2", "flat_w2",  "mmd_fr2",     "d_wfr2", "ksf2"};
    if (!names.count(disc.name)) fail("$.name", "unknown discrepancy '" + disc.name + "'");
    out.task = std::move(disc);
    return out;
  }

  if (task == "gamma") {
    require_keys(root, "$", {"version", "task", "grid", "kernel", "energy", "initial",
                             "time", "lambdas", "output_dir"},
                 {"seed"});
    const Grid grid = parse_grid(root["grid"], "$.grid");
    GammaTask gamma{grid,
                    parse_kernel(root["kernel"], "$.kernel"),
                    parse_energy(root["energy"], "$.energy", grid),
                    parse_measure(root["initial"], "$.initial", grid),
                    0.0,
                    0.0,
                    {},
                    get_string(root, "$", "output_dir")};
    const json& time = root["time"];
    require_keys(time, "$.time", {"t_end", "dt"});
    gamma.t_end = get_number(time, "$.time", "t_end");
    gamma.dt = get_number(time, "$.time", "dt");
    if (!root["lambdas"].is_array() || root["lambdas"].empty()) {
      fail("$.lambdas", "expected a non-empty array");
    }
    for (const auto& l : root["lambdas"]) {
      if (!l.is_number()) fail("$.lambdas", "expected numbers");
      gamma.lambdas.push_back(l.get<double>());
    }
    out.task = std::move(gamma);
    return out;
  }

  throw ConfigError("config error at $.task: expected flow, geodesic, discrepancy or gamma");
}

ParsedConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config error: cannot open " + path);
  nlohmann::json root;
  try {
    in >> root;
  } catch (const nlohmann::json::parse_error& err) {
    throw ConfigError(std::string("config error: ") + err.what());
  }
  return parse_config(root);
}

}  // namespace kgf::cli
