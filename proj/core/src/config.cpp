#include "singpara/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "singpara/errors.hpp"
#include "singpara/field_io.hpp"
#include "singpara/flux.hpp"

namespace singpara {

namespace {

using nlohmann::json;

template <class T>
T require(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

template <class T>
T optional_value(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

Point parse_point(const json& j, int dim) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) {
    throw ConfigError("point must be an array of " + std::to_string(dim) + " numbers");
  }
  Point x{0.0, 0.0};
  for (int a = 0; a < dim; ++a) x[a] = j[a].get<double>();
  return x;
}

double bump1(double r) {
  const double q = 1.0 - r * r;
  return q > 0.0 ? q * q : 0.0;
}

}  // namespace

Box parse_box(const json& spec, int dim) {
  if (dim != 1 && dim != 2) throw ConfigError("dim must be 1 or 2");
  Box box;
  box.dim = dim;
  if (spec.is_null()) return box;
  box.lo = parse_point(require<json>(spec, "lo"), dim);
  box.hi = parse_point(require<json>(spec, "hi"), dim);
  return box;
}

ScalarField parse_field(const json& spec, const Box& box, double horizon,
                        const std::filesystem::path& base_dir, const Grid* grid) {
  if (spec.is_number()) return ScalarField::constant(spec.get<double>());
  if (!spec.is_object()) throw ConfigError("field must be a number or an object");
  const auto type = require<std::string>(spec, "type");
  const int dim = box.dim;
  (void)horizon;
  if (type == "zero") return ScalarField::zero();
  if (type == "constant") return ScalarField::constant(require<double>(spec, "value"));
  if (type == "sine") {
    const double amp = optional_value(spec, "amplitude", 1.0);
    const double decay = optional_value(spec, "decay", 0.0);
    return ScalarField::from_formula("sine", [=](const Point& x, double t) {
      double v = amp * std::exp(-decay * t);
      for (int a = 0; a < dim; ++a) v *= std::sin(M_PI * (x[a] - box.lo[a]) / box.side(a));
      return v;
    });
  }
  if (type == "bump") {
    const Point c = parse_point(require<json>(spec, "center"), dim);
    const double r = require<double>(spec, "radius");
    const double amp = optional_value(spec, "amplitude", 1.0);
    const bool timed = spec.contains("t_center");
    const double tc = optional_value(spec, "t_center", 0.0);
    const double tr = optional_value(spec, "t_radius", 1.0);
    if (!(r > 0.0) || !(tr > 0.0)) throw ConfigError("bump radii must be positive");
    return ScalarField::from_formula("bump", [=](const Point& x, double t) {
      double r2 = 0.0;
      for (int a = 0; a < dim; ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
      double v = amp * bump1(std::sqrt(r2) / r);
      if (timed) v *= bump1((t - tc) / tr);
      return v;
    });
  }
  if (type == "radial_power") {
    const Point c = parse_point(require<json>(spec, "center"), dim);
    const double e = require<double>(spec, "exponent");
    const double amp = optional_value(spec, "amplitude", 1.0);
    const double offset = optional_value(spec, "offset", 0.0);
    return ScalarField::from_formula("radial_power", [=](const Point& x, double) {
      double r2 = offset * offset;
      for (int a = 0; a < dim; ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
      if (r2 == 0.0) return std::numeric_limits<double>::infinity();
      return amp * std::pow(r2, -0.5 * e);
    });
  }
  if (type == "space_time_power") {
    // Power of the parabolic distance sqrt(|x - c|^2 + |t - t0|).
    const Point c = parse_point(require<json>(spec, "center"), dim);
    const double t0 = require<double>(spec, "t_center");
    const double e = require<double>(spec, "exponent");
    const double amp = optional_value(spec, "amplitude", 1.0);
    return ScalarField::from_formula("space_time_power", [=](const Point& x, double t) {
      double r2 = std::abs(t - t0);
      for (int a = 0; a < dim; ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
      if (r2 == 0.0) return std::numeric_limits<double>::infinity();
      return amp * std::pow(r2, -0.5 * e);
    });
  }
  if (type == "grid") {
    if (!grid) throw ConfigError("gridded field needs a grid");
    const std::filesystem::path file = base_dir / require<std::string>(spec, "file");
    FieldFile data;
    try {
      data = read_field_csv(file);
    } catch (const Error& e) {
      throw ConfigError("cannot read field file " + file.string() + ": " + e.what());
    }
    GridFunction g;
    if (data.slices.size() == 1) {
      // A single slice is a time-independent field.
      if (data.dim != grid->dim() || data.nodes != grid->nodes_per_axis()) {
        throw ConfigError("field file " + file.string() + " does not match the grid");
      }
      g = GridFunction::zeros(*grid);
      for (int m = 0; m <= grid->time_steps(); ++m) {
        std::copy(data.values[0].begin(), data.values[0].end(), g.slice(m).begin());
      }
    } else {
      g = to_grid_function(data, *grid);
    }
    return ScalarField::from_samples("grid:" + file.filename().string(), std::move(g));
  }
  throw ConfigError("unknown field type '" + type + "'");
}

SingularityProfile parse_singularity(const json& spec) {
  const auto type = require<std::string>(spec, "type");
  try {
    if (type == "power") {
      std::optional<double> theta, cap;
      if (spec.contains("theta")) theta = spec.at("theta").get<double>();
      if (spec.contains("cap")) cap = spec.at("cap").get<double>();
      return power_profile(require<double>(spec, "gamma"), optional_value(spec, "C", 1.0), theta,
                           optional_value(spec, "s1", 1.0), cap);
    }
    if (type == "constant") return constant_profile(require<double>(spec, "value"));
    if (type == "exp_power") return exp_power_profile(require<double>(spec, "gamma"));
    if (type == "increasing") return increasing_profile();
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("singularity: ") + e.what());
  }
  throw ConfigError("unknown singularity type '" + type + "'");
}

std::shared_ptr<const Flux> parse_flux(const json& spec, double p, const Box& box, double horizon,
                                       const std::filesystem::path& base_dir) {
  const auto type = spec.is_null() ? std::string("p_laplacian") : require<std::string>(spec, "type");
  try {
    if (type == "p_laplacian") return std::make_shared<PLaplacianFlux>(p);
    if (type == "weighted_p_laplacian") {
      const ScalarField c = parse_field(require<json>(spec, "coefficient"), box, horizon, base_dir,
                                        nullptr);
      return std::make_shared<WeightedPLaplacianFlux>(p, c.formula, require<double>(spec, "c_min"),
                                                      require<double>(spec, "c_max"));
    }
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("flux: ") + e.what());
  }
  throw ConfigError("unknown flux type '" + type + "'");
}

Problem parse_problem(const json& spec, const Grid& grid, const std::filesystem::path& base_dir) {
  Problem pr;
  pr.box = grid.box();
  pr.horizon = grid.horizon();
  pr.p = require<double>(spec, "p");
  if (!(pr.p > 1.0)) throw ConfigError("p must exceed 1");
  pr.flux = parse_flux(spec.value("flux", json()), pr.p, pr.box, pr.horizon, base_dir);
  pr.singularity = parse_singularity(require<json>(spec, "singularity"));
  pr.source = spec.contains("source")
                  ? parse_field(spec.at("source"), pr.box, pr.horizon, base_dir, &grid)
                  : ScalarField::zero();
  pr.initial = spec.contains("initial")
                   ? parse_field(spec.at("initial"), pr.box, pr.horizon, base_dir, &grid)
                   : ScalarField::zero();
  pr.measure = RadonMeasure(pr.box, pr.horizon);
  if (spec.contains("measure")) {
    const json& m = spec.at("measure");
    try {
      for (const json& a : m.value("atoms", json::array())) {
        pr.measure.add_atom(parse_point(require<json>(a, "x"), pr.box.dim), require<double>(a, "t"),
                            optional_value(a, "mass", 1.0));
      }
      if (m.contains("density")) {
        const ScalarField d = parse_field(m.at("density"), pr.box, pr.horizon, base_dir, &grid);
        if (d.samples) {
          auto samples = d.samples;
          const Grid g = grid;
          pr.measure.set_density(
              [samples, g](const Point& x, double t) {
                // Nearest node and slice of the data grid.
                const double h = g.spacing();
                int i = static_cast<int>(std::lround((x[0] - g.box().lo[0]) / h));
                int j = g.dim() == 2 ? static_cast<int>(std::lround((x[1] - g.box().lo[1]) / h)) : 0;
                const int m = static_cast<int>(std::lround(t / g.dt()));
                return samples->at(m, g.index(i, j));
              },
              grid);
        } else {
          pr.measure.set_density(d.formula, grid);
        }
      }
    } catch (const Error& e) {
      throw ConfigError(std::string("measure: ") + e.what());
    }
  }
  try {
    pr.validate(grid);
  } catch (const Error& e) {
    throw ConfigError(std::string("problem: ") + e.what());
  }
  return pr;
}

Grid StudyConfig::grid() const { return build_grid(problem.box, problem.horizon, nodes, steps); }

std::pair<int, int> parse_grid_spec(const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos) throw ConfigError("grid must look like NODESxSTEPS");
  try {
    std::size_t used = 0;
    const int nodes = std::stoi(text.substr(0, x), &used);
    if (used != x) throw ConfigError("bad node count in '" + text + "'");
    const std::string rest = text.substr(x + 1);
    const int steps = std::stoi(rest, &used);
    if (used != rest.size()) throw ConfigError("bad step count in '" + text + "'");
    return {nodes, steps};
  } catch (const std::logic_error&) {
    throw ConfigError("grid must look like NODESxSTEPS");
  }
}

StudyConfig load_study(const json& doc, const std::filesystem::path& base_dir,
                       std::optional<std::pair<int, int>> grid_override) {
  StudyConfig c;
  c.raw = doc;
  c.base_dir = base_dir;
  const json& pj = require<json>(doc, "problem");
  const int dim = optional_value(pj, "dim", 1);
  const Box box = parse_box(pj.value("box", json()), dim);
  const double horizon = optional_value(pj, "horizon", 1.0);

  if (doc.contains("grid")) {
    c.nodes = optional_value(doc.at("grid"), "nodes", c.nodes);
    c.steps = optional_value(doc.at("grid"), "steps", c.steps);
  }
  if (grid_override) std::tie(c.nodes, c.steps) = *grid_override;
  Grid grid = [&] {
    try {
      return build_grid(box, horizon, c.nodes, c.steps);
    } catch (const GridError& e) {
      throw ConfigError(std::string("grid: ") + e.what());
    }
  }();
  c.problem = parse_problem(pj, grid, base_dir);

  c.n_ladder = optional_value(doc, "n_ladder", c.n_ladder);
  if (c.n_ladder.empty()) throw ConfigError("n_ladder is empty");
  for (std::size_t i = 0; i < c.n_ladder.size(); ++i) {
    if (c.n_ladder[i] < 1 || (i > 0 && c.n_ladder[i] <= c.n_ladder[i - 1])) {
      throw ConfigError("n_ladder must be strictly increasing positive integers");
    }
  }
  try {
    if (doc.contains("solver")) c.solver = SolverConfig::from_json(doc.at("solver"));
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("solver: ") + e.what());
  }
  if (doc.contains("mollifier")) {
    const json& m = doc.at("mollifier");
    c.mollifier.base_width = optional_value(m, "base_width", 0.0);
    c.mollifier.clamp_to_grid = optional_value(m, "clamp_to_grid", true);
  }
  if (doc.contains("monitors")) {
    const json& m = doc.at("monitors");
    c.panels.k_ladder = optional_value(m, "k_ladder", c.panels.k_ladder);
    c.panels.eps_ladder = optional_value(m, "eps_ladder", c.panels.eps_ladder);
    c.panels.delta_ladder = optional_value(m, "delta_ladder", c.panels.delta_ladder);
    c.panels.trace_k = optional_value(m, "trace_k", c.panels.trace_k);
    c.panels.strip_k = optional_value(m, "strip_k", c.panels.strip_k);
    c.panels.q = optional_value(m, "q", c.panels.q);
  }
  c.warm_start = optional_value(doc, "warm_start", c.warm_start);
  c.seed = optional_value<std::uint64_t>(doc, "seed", c.seed);
  if (doc.contains("output")) c.output_dir = doc.at("output").get<std::string>();
  return c;
}

StudyConfig load_study_file(const std::filesystem::path& path,
                            std::optional<std::pair<int, int>> grid_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
  }
  return load_study(doc, path.parent_path(), grid_override);
}

}  // namespace singpara
