#include "singpara/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "singpara/errors.hpp"
#include "singpara/field_io.hpp"
#include "singpara/flux.hpp"
#include "singpara/truncations.hpp"

namespace singpara {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::info: return "info";
    case Verdict::skipped: return "skipped";
  }
  return "unknown";
}

std::string EstimateReport::params_string() const {
  std::ostringstream s;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i) s << ';';
    s << params[i].first << '=' << format_double(params[i].second);
  }
  return s.str();
}

nlohmann::json EstimateReport::to_json() const {
  nlohmann::json p = nlohmann::json::object();
  for (const auto& [k, v] : params) p[k] = v;
  nlohmann::json j = {{"monitor", monitor}, {"n", level}, {"params", p}, {"value", value},
                      {"verdict", to_string(verdict)}};
  j["bound"] = bound ? nlohmann::json(*bound) : nlohmann::json(nullptr);
  if (!note.empty()) j["note"] = note;
  return j;
}

void write_report_header(std::ostream& out) { out << "monitor,n,params,value,bound,verdict\n"; }

void write_report_row(std::ostream& out, const EstimateReport& r) {
  out << r.monitor << ',' << r.level << ',' << r.params_string() << ',' << format_double(r.value)
      << ',' << (r.bound ? format_double(*r.bound) : std::string()) << ',' << to_string(r.verdict)
      << '\n';
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ParameterError("slope fit needs matching samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) throw ParameterError("slope fit needs at least two positive samples");
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw ParameterError("slope fit needs distinct abscissae");
  return (n * sxy - sx * sy) / denom;
}

double relative_gap(double a, double b) {
  const double m = std::max(std::abs(a), std::abs(b));
  return m == 0.0 ? 0.0 : std::abs(a - b) / m;
}

double l1_distance(const Grid& grid, const GridFunction& u, const GridFunction& v) {
  if (!u.matches(grid) || !v.matches(grid)) throw GridError("fields do not match the grid");
  double s = 0.0;
  for (int m = 1; m <= grid.time_steps(); ++m) s += slice_distance(grid, u.slice(m), v.slice(m));
  return grid.dt() * s;
}

EstimateReport linf_l1_monitor(const SolveResult& result, const Problem& problem,
                               const Grid& grid) {
  EstimateReport r;
  r.monitor = "linf_l1";
  r.level = result.level;
  for (int m = 1; m <= grid.time_steps(); ++m) {
    r.value = std::max(r.value, integrate_space(grid, result.solution.slice(m)));
  }
  r.bound = mass_bound_constant(problem, grid);
  r.verdict = r.value <= *r.bound * 1.05 ? Verdict::pass : Verdict::fail;
  return r;
}

namespace {

// sum_m dt sum_e w_e g(e, m) over slices 1..M.
template <class EdgeTerm>
double edge_space_time_sum(const Grid& grid, EdgeTerm&& term) {
  double s = 0.0;
  for (int m = 1; m <= grid.time_steps(); ++m) {
    double slice = 0.0;
    for (const Edge& e : grid.edges()) slice += e.energy_weight * term(e, m);
    s += slice;
  }
  return grid.dt() * s;
}

double max_value(const GridFunction& u) {
  double v = 0.0;
  for (double x : u.values()) v = std::max(v, x);
  return v;
}

}  // namespace

double truncation_energy(const Grid& grid, const GridFunction& u, double k,
                         const CutoffFunction& cutoff, double p) {
  std::vector<double> tk(grid.node_count());
  double s = 0.0;
  for (int m = 1; m <= grid.time_steps(); ++m) {
    const auto slice = u.slice(m);
    for (std::size_t i = 0; i < tk.size(); ++i) tk[i] = truncate(k, slice[i]);
    const double t = grid.time(m);
    double acc = 0.0;
    for (const Edge& e : grid.edges()) {
      const double phi = cutoff.value(e.midpoint, t);
      if (phi == 0.0) continue;
      const double g = norm(edge_gradient(grid, e, tk), grid.dim());
      acc += e.energy_weight * std::pow(g * phi, p);
    }
    s += acc;
  }
  return grid.dt() * s;
}

double gradient_energy(const Grid& grid, const GridFunction& u, double r,
                       const CutoffFunction* cutoff) {
  return edge_space_time_sum(grid, [&](const Edge& e, int m) {
    double phi = 1.0;
    if (cutoff) {
      phi = cutoff->value(e.midpoint, grid.time(m));
      if (phi == 0.0) return 0.0;
    }
    const double g = norm(edge_gradient(grid, e, u.slice(m)), grid.dim());
    return std::pow(g * phi, r);
  });
}

std::vector<EstimateReport> truncation_energy_monitor(const SolveResult& result, const Grid& grid,
                                                      const std::vector<double>& k_ladder,
                                                      const CutoffFunction& cutoff, double p,
                                                      double slope_limit) {
  std::vector<EstimateReport> rows;
  const double u_max = max_value(result.solution);
  std::vector<double> active_k, active_e;
  bool all_zero = true;
  for (double k : k_ladder) {
    EstimateReport r;
    r.monitor = "truncation_energy";
    r.level = result.level;
    r.params = {{"k", k}, {"cutoff", cutoff.id()}};
    r.value = truncation_energy(grid, result.solution, k, cutoff, p);
    r.verdict = Verdict::info;
    if (r.value != 0.0) all_zero = false;
    if (k < u_max) {
      active_k.push_back(k);
      active_e.push_back(r.value);
    }
    rows.push_back(r);
  }
  EstimateReport slope;
  slope.monitor = "truncation_energy_slope";
  slope.level = result.level;
  slope.params = {{"cutoff", cutoff.id()}, {"active_points", static_cast<double>(active_k.size())}};
  slope.bound = slope_limit;
  if (all_zero) {
    slope.verdict = Verdict::pass;
    slope.note = "zero solution";
  } else if (active_k.size() < 3) {
    slope.verdict = Verdict::skipped;
    slope.note = "fewer than three active truncation levels";
  } else {
    slope.value = log_log_slope(active_k, active_e);
    slope.verdict = slope.value <= slope_limit ? Verdict::pass : Verdict::fail;
  }
  rows.push_back(slope);
  return rows;
}

EstimateReport strip_energy_monitor(const SolveResult& result, const Grid& grid, double k,
                                    const CutoffFunction& cutoff, double p) {
  EstimateReport r;
  r.monitor = "strip_energy";
  r.level = result.level;
  r.params = {{"k", k}, {"cutoff", cutoff.id()}};
  r.value = edge_space_time_sum(grid, [&](const Edge& e, int m) {
    const auto u = result.solution.slice(m);
    const double mean = 0.5 * (u[e.lo] + u[e.hi]);
    if (!(mean > k && mean < k + 1.0)) return 0.0;
    const double phi = cutoff.value(e.midpoint, grid.time(m));
    if (phi == 0.0) return 0.0;
    return std::pow(norm(edge_gradient(grid, e, u), grid.dim()) * phi, p);
  });
  r.verdict = Verdict::info;
  return r;
}

EstimateReport singular_mass_monitor(const SolveResult& result, const ApproximateProblem& ap,
                                     const CutoffFunction& cutoff) {
  const Grid& grid = ap.grid;
  const auto w = grid.weights();
  double s = 0.0;
  for (int m = 1; m <= grid.time_steps(); ++m) {
    const auto u = result.solution.slice(m);
    const auto f = ap.source.slice(m);
    const double t = grid.time(m);
    for (std::size_t i : grid.interior()) {
      if (f[i] == 0.0) continue;
      const double phi = cutoff.value(grid.coordinate(i), t);
      if (phi == 0.0) continue;
      s += w[i] * ap.h_n(u[i]) * f[i] * phi;
    }
  }
  EstimateReport r;
  r.monitor = "singular_mass";
  r.level = result.level;
  r.params = {{"cutoff", cutoff.id()}};
  r.value = grid.dt() * s;
  r.verdict = Verdict::info;
  return r;
}

namespace {

// int over the strip of width eps of the interpolant of `values`.
double strip_integral(const Grid& grid, const std::vector<double>& values, double eps) {
  const Box& box = grid.box();
  const double total = integrate_interpolant(grid, values, box.lo, box.hi);
  Point lo = box.lo;
  Point hi = box.hi;
  for (int a = 0; a < box.dim; ++a) {
    lo[a] += eps;
    hi[a] -= eps;
    if (hi[a] <= lo[a]) return total;
  }
  return total - integrate_interpolant(grid, values, lo, hi);
}

double strip_volume(const Box& box, double eps) {
  double inner = 1.0;
  for (int a = 0; a < box.dim; ++a) inner *= std::max(0.0, box.side(a) - 2.0 * eps);
  return box.volume() - inner;
}

}  // namespace

std::vector<EstimateReport> boundary_trace_monitor(const SolveResult& result, const Grid& grid,
                                                   double k,
                                                   const std::vector<double>& eps_ladder,
                                                   const TraceOptions& options) {
  if (eps_ladder.empty()) throw ParameterError("epsilon ladder is empty");
  for (double eps : eps_ladder) {
    if (!(eps > 2.0 * grid.spacing())) {
      throw GridError("strip width " + format_double(eps) + " is not resolved (needs > 2h)");
    }
  }
  std::vector<double> eps = eps_ladder;
  std::sort(eps.begin(), eps.end(), std::greater<>());

  std::vector<EstimateReport> rows;
  std::vector<double> worst(eps.size(), 0.0);
  const double eta = (options.gamma - 1.0 + options.p) / options.p;
  std::vector<double> powered(grid.node_count());
  for (std::size_t j = 0; j < eps.size(); ++j) {
    int worst_slice = 0;
    double interpolation = 0.0;
    for (int m = 1; m <= grid.time_steps(); ++m) {
      const double v = boundary_strip_mass(grid, result.solution.slice(m), k, eps[j]);
      if (v > worst[j]) {
        worst[j] = v;
        worst_slice = m;
      }
      if (options.gamma > 1.0) {
        const auto u = result.solution.slice(m);
        for (std::size_t i = 0; i < powered.size(); ++i) {
          powered[i] = std::pow(std::max(truncate(k, u[i]), 0.0), eta);
        }
        const double a = std::pow(strip_volume(grid.box(), eps[j]) / eps[j],
                                  (options.gamma - 1.0) / (options.gamma - 1.0 + options.p));
        const double b = std::pow(std::max(strip_integral(grid, powered, eps[j]), 0.0) / eps[j],
                                  options.p / (options.gamma - 1.0 + options.p));
        interpolation = std::max(interpolation, a * b);
      }
    }
    EstimateReport r;
    r.monitor = "boundary_trace";
    r.level = result.level;
    r.params = {{"k", k}, {"eps", eps[j]}, {"slice", static_cast<double>(worst_slice)}};
    r.value = worst[j];
    r.verdict = Verdict::info;
    rows.push_back(r);
    if (options.gamma > 1.0) {
      EstimateReport q = r;
      q.monitor = "boundary_trace_interpolation";
      q.params.pop_back();
      q.value = interpolation;
      rows.push_back(q);
    }
  }

  EstimateReport summary;
  summary.monitor = "boundary_trace_verdict";
  summary.level = result.level;
  summary.params = {{"k", k}, {"eps_min", eps.back()}};
  summary.value = worst.back();
  bool shrinking = true;
  for (std::size_t j = 1; j < eps.size(); ++j) {
    if (worst[j] > worst[j - 1] * (1.0 + options.noise) + 1e-300) shrinking = false;
  }
  const double h = grid.spacing();
  if (eps.size() < 2) {
    summary.verdict = shrinking ? Verdict::info : Verdict::fail;
    summary.note = "single strip width";
  } else {
    // For gamma > 1 the boundary layer behaves like dist^{p/(gamma-1+p)}, so the
    // strip averages decay at that power of eps rather than linearly.
    const double rate = options.gamma > 1.0 ? options.p / (options.gamma - 1.0 + options.p) : 1.0;
    summary.params.push_back({"rate", rate});
    double c_trace = 0.0;
    for (std::size_t j = 0; j + 1 < eps.size(); ++j) {
      c_trace = std::max(c_trace, worst[j] / std::pow(h + eps[j], rate));
    }
    summary.bound = c_trace * std::pow(h + eps.back(), rate) * (1.0 + options.noise);
    const bool consistent = summary.value <= *summary.bound || summary.value == 0.0;
    summary.verdict = shrinking && consistent ? Verdict::pass : Verdict::fail;
    if (!shrinking) summary.note = "strip averages grow as eps decreases";
  }
  rows.push_back(summary);
  return rows;
}

ResidualTerms distributional_terms(const GridFunction& u, const Problem& problem,
                                   const ApproximateProblem& ap, const CutoffFunction& cutoff) {
  const Grid& grid = ap.grid;
  if (!u.matches(grid)) throw GridError("solution does not match the grid");
  const auto w = grid.weights();
  const GridFunction f = problem.source.sample_on(grid);
  const GridFunction u0 = problem.initial.sample_on(grid);
  const int dim = grid.dim();

  ResidualTerms terms;
  for (std::size_t i = 0; i < grid.node_count(); ++i) {
    terms.initial_term -= w[i] * u0.at(0, i) * cutoff.value(grid.coordinate(i), 0.0);
  }
  double time_term = 0.0, flux_term = 0.0, source_term = 0.0;
  for (int m = 1; m <= grid.time_steps(); ++m) {
    const double t = grid.time(m);
    const auto slice = u.slice(m);
    for (std::size_t i : grid.interior()) {
      const Point x = grid.coordinate(i);
      if (!cutoff.supports(x)) continue;
      time_term -= w[i] * slice[i] * cutoff.time_derivative(x, t);
      source_term += w[i] * ap.h_n(slice[i]) * f.at(m, i) * cutoff.value(x, t);
    }
    for (const Edge& e : grid.edges()) {
      Vector gphi = cutoff.gradient(e.midpoint, t);
      if (gphi[0] == 0.0 && gphi[1] == 0.0) continue;
      // Along the edge the gradient of u is constant, so the axial part of
      // grad phi integrates exactly to a difference quotient.
      gphi[e.axis] = (cutoff.value(grid.coordinate(e.hi), t) - cutoff.value(grid.coordinate(e.lo), t)) /
                     grid.spacing();
      const Vector a = ap.flux->value(e.midpoint, t, edge_gradient(grid, e, slice), dim);
      flux_term += e.energy_weight * dot(a, gphi, dim);
    }
  }
  terms.time_term = grid.dt() * time_term;
  terms.flux_term = grid.dt() * flux_term;
  terms.source_term = grid.dt() * source_term;
  terms.measure_term =
      pair(problem.measure, [&](const Point& x, double t) { return cutoff.value(x, t); }, grid);
  return terms;
}

EstimateReport distributional_residual_monitor(const SolveResult& result, const Problem& problem,
                                               const ApproximateProblem& ap,
                                               const CutoffFunction& cutoff) {
  const ResidualTerms t = distributional_terms(result.solution, problem, ap, cutoff);
  EstimateReport r;
  r.monitor = "distributional_residual";
  r.level = result.level;
  r.params = {{"cutoff", cutoff.id()}, {"h", ap.grid.spacing()}, {"dt", ap.grid.dt()}};
  r.value = std::abs(t.lhs() - t.rhs());
  r.verdict = Verdict::info;
  return r;
}

std::vector<DeltaSplitRow> delta_split_table(const SolveResult& result,
                                             const ApproximateProblem& ap,
                                             const CutoffFunction& cutoff,
                                             const std::vector<double>& deltas) {
  const Grid& grid = ap.grid;
  const auto w = grid.weights();
  const int dim = grid.dim();
  const auto& u = result.solution;
  std::vector<DeltaSplitRow> rows;
  for (double delta0 : deltas) {
    if (!(delta0 > 0.0)) throw ParameterError("delta must be positive");
    // Avoid plateau levels: nudge delta off any nodal value.
    double delta = delta0;
    for (int attempt = 0; attempt < 16; ++attempt) {
      bool hit = false;
      for (double v : u.values()) {
        if (std::abs(v - delta) <= 1e-12) {
          hit = true;
          break;
        }
      }
      if (!hit) break;
      delta *= 1.0 + 1e-6;
    }
    DeltaSplitRow row;
    row.delta = delta;
    double split = 0.0, time_part = 0.0, flux_part = 0.0;
    for (int m = 1; m <= grid.time_steps(); ++m) {
      const double t = grid.time(m);
      const auto slice = u.slice(m);
      const auto f = ap.source.slice(m);
      for (std::size_t i : grid.interior()) {
        const Point x = grid.coordinate(i);
        if (!cutoff.supports(x)) continue;
        if (slice[i] <= delta) split += w[i] * ap.h_n(slice[i]) * f[i] * cutoff.value(x, t);
        time_part -=
            w[i] * vee_primitive(delta, std::max(slice[i], 0.0)) * cutoff.time_derivative(x, t);
      }
      for (const Edge& e : grid.edges()) {
        const Vector gphi = cutoff.gradient(e.midpoint, t);
        const double gn = norm(gphi, dim);
        if (gn == 0.0) continue;
        const double mean = 0.5 * (slice[e.lo] + slice[e.hi]);
        const double v = vee(delta, mean);
        if (v == 0.0) continue;
        const Vector a = ap.flux->value(e.midpoint, t, edge_gradient(grid, e, slice), dim);
        flux_part += e.energy_weight * norm(a, dim) * gn * v;
      }
    }
    row.split = grid.dt() * split;
    row.majorant = grid.dt() * (time_part + flux_part);
    rows.push_back(row);
  }
  return rows;
}

std::vector<EstimateReport> delta_split_monitor(const SolveResult& result,
                                                const ApproximateProblem& ap,
                                                const CutoffFunction& cutoff,
                                                const std::vector<double>& deltas) {
  const auto table = delta_split_table(result, ap, cutoff, deltas);
  std::vector<EstimateReport> rows;
  std::vector<double> ds, as;
  bool bounded = true;
  for (const auto& t : table) {
    EstimateReport r;
    r.monitor = "delta_split";
    r.level = result.level;
    r.params = {{"delta", t.delta}, {"cutoff", cutoff.id()}};
    r.value = t.split;
    r.bound = t.majorant;
    r.verdict = t.split <= t.majorant * 1.05 ? Verdict::pass : Verdict::fail;
    if (r.verdict == Verdict::fail) bounded = false;
    rows.push_back(r);
    ds.push_back(t.delta);
    as.push_back(t.split);
  }
  const double p = ap.flux->exponent();
  const double p_prime = p / (p - 1.0);
  EstimateReport slope;
  slope.monitor = "delta_split_slope";
  slope.level = result.level;
  slope.params = {{"cutoff", cutoff.id()}};
  slope.bound = 0.8 / p_prime;
  int positive = 0;
  for (double a : as) positive += a > 0.0 ? 1 : 0;
  if (positive == 0) {
    slope.verdict = bounded ? Verdict::pass : Verdict::fail;
    slope.note = "A(delta) vanishes on the ladder";
  } else if (positive < 3) {
    slope.verdict = Verdict::skipped;
    slope.note = "fewer than three resolved deltas";
  } else {
    slope.value = log_log_slope(ds, as);
    slope.verdict = bounded && slope.value >= *slope.bound ? Verdict::pass : Verdict::fail;
  }
  rows.push_back(slope);
  return rows;
}

EstimateReport gradient_energy_q_monitor(const SolveResult& result, const Problem& problem,
                                         const Grid& grid, double q, const CutoffFunction& cutoff) {
  const double n = grid.dim();
  if (!problem.in_exponent_window()) {
    throw HypothesisRefusal("local q-energy needs 2 - 1/(N+1) < p < N; got p = " +
                            format_double(problem.p) + ", N = " + format_double(n));
  }
  if (!(q >= 1.0 && q < problem.p - n / (n + 1.0))) {
    throw HypothesisRefusal("local q-energy needs 1 <= q < p - N/(N+1)");
  }
  EstimateReport r;
  r.monitor = "gradient_energy_q";
  r.level = result.level;
  r.params = {{"q", q}, {"cutoff", cutoff.id()}};
  r.value = gradient_energy(grid, result.solution, q, &cutoff);
  r.verdict = Verdict::info;
  return r;
}

EstimateReport gradient_energy_p_monitor(const SolveResult& result, const Grid& grid, double p) {
  EstimateReport r;
  r.monitor = "gradient_energy_p";
  r.level = result.level;
  r.params = {{"p", p}};
  r.value = gradient_energy(grid, result.solution, p);
  r.verdict = Verdict::info;
  return r;
}

double uniqueness_functional(const Grid& grid, const GridFunction& v, const GridFunction& w,
                             double k) {
  if (!v.matches(grid) || !w.matches(grid)) throw GridError("fields do not share the grid");
  const auto weights = grid.weights();
  double s = 0.0;
  for (int m = 1; m <= grid.time_steps(); ++m) {
    const auto a = v.slice(m);
    const auto b = w.slice(m);
    for (std::size_t i = 0; i < a.size(); ++i) {
      s += weights[i] * truncation_primitive(k, 1.0, std::abs(a[i] - b[i]));
    }
  }
  return grid.dt() * s / grid.horizon();
}

double flux_cauchy_gap(const Grid& grid, const Flux& flux, const GridFunction& u,
                       const GridFunction& v, const CutoffFunction& cutoff) {
  const int dim = grid.dim();
  return edge_space_time_sum(grid, [&](const Edge& e, int m) {
    const double t = grid.time(m);
    const double phi = cutoff.value(e.midpoint, t);
    if (phi == 0.0) return 0.0;
    const Vector a = flux.value(e.midpoint, t, edge_gradient(grid, e, u.slice(m)), dim);
    const Vector b = flux.value(e.midpoint, t, edge_gradient(grid, e, v.slice(m)), dim);
    const Vector d{a[0] - b[0], a[1] - b[1]};
    return norm(d, dim) * phi;
  });
}

}  // namespace singpara
