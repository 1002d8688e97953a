#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "chaosrough/analysis.hpp"
#include "chaosrough/enhanced.hpp"
#include "chaosrough/io.hpp"
#include "chaosrough/kernels.hpp"
#include "chaosrough/parallel.hpp"
#include "chaosrough/rde.hpp"
#include "chaosrough/rng.hpp"
#include "chaosrough/roughlift.hpp"

namespace cr = chaosrough;
using cr::Json;

namespace {

constexpr const char* kVersion = "0.1.0";

// Invalid invocation or config: reported on stderr, exit code 1. Assertion
// failures take the separate exit code 2 after artifacts are written.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Assertion {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct Outcome {
  Json report;
  cr::Csv results;
  std::vector<Assertion> asserts;
};

struct RunConfig {
  std::string experiment;
  Json params;  // flat, defaults merged, echoed into the manifest
  std::uint64_t seed = 0;
  int samples = 0;
  int threads = 1;
  std::string out_dir;
};

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"lift-converge", "kl-converge", "assumptions",
                                              "rde-verify",    "malliavin-verify",
                                              "greedy-tail",   "translation",
                                              "rate",          "scaling"};
  return names;
}

// ---------------------------------------------------------------------------
// Typed config access. Every fetch names the key so bad configs fail loudly
// before any computation starts.

double jnum(const Json& p, const std::string& key) {
  if (!p.contains(key) || !p.at(key).is_number())
    throw UsageError("config key '" + key + "' must be a number");
  return p.at(key).get<double>();
}

int jint(const Json& p, const std::string& key) {
  if (!p.contains(key) || !p.at(key).is_number_integer())
    throw UsageError("config key '" + key + "' must be an integer");
  return p.at(key).get<int>();
}

const Json& jarr(const Json& p, const std::string& key) {
  if (!p.contains(key) || !p.at(key).is_array())
    throw UsageError("config key '" + key + "' must be an array");
  return p.at(key);
}

const Json& jobj(const Json& p, const std::string& key) {
  if (!p.contains(key) || !p.at(key).is_object())
    throw UsageError("config key '" + key + "' must be an object");
  return p.at(key);
}

void check_keys(const Json& obj, const std::vector<std::string>& allowed, const std::string& what) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    bool ok = false;
    for (const auto& a : allowed) ok = ok || a == key;
    if (!ok) throw UsageError("unknown key '" + key + "' in " + what);
  }
}

// ---------------------------------------------------------------------------
// Kernel specs: {"name": ..., "cells": N | "level": L, ...family params}.
// A caller-supplied fallback grid serves specs that omit the grid keys.

std::vector<double> grid_of(const Json& spec, const std::vector<double>* fallback) {
  const bool has_cells = spec.contains("cells");
  const bool has_level = spec.contains("level");
  if (has_cells && has_level) throw UsageError("kernel spec: give either 'cells' or 'level'");
  if (has_cells) {
    const int cells = jint(spec, "cells");
    if (cells < 1) throw UsageError("kernel spec: 'cells' must be positive");
    return cr::uniform_grid(cells);
  }
  if (has_level) {
    const int level = jint(spec, "level");
    if (level < 0 || level > 16) throw UsageError("kernel spec: 'level' out of range");
    return cr::dyadic_grid(level);
  }
  if (fallback != nullptr) return *fallback;
  throw UsageError("kernel spec: needs 'cells' or 'level'");
}

cr::KernelPath parse_kernel(const Json& spec, const std::vector<double>* fallback = nullptr) {
  if (!spec.is_object() || !spec.contains("name") || !spec.at("name").is_string())
    throw UsageError("kernel spec must be an object with a 'name'");
  const std::string name = spec.at("name").get<std::string>();
  const std::vector<double> grid = grid_of(spec, fallback);
  if (name == "brownian") {
    check_keys(spec, {"name", "cells", "level"}, "brownian kernel spec");
    return cr::brownian_kernel(grid);
  }
  if (name == "fbm") {
    check_keys(spec, {"name", "cells", "level", "hurst"}, "fbm kernel spec");
    const double h = jnum(spec, "hurst");
    if (!(h > 0.0 && h < 1.0)) throw UsageError("fbm kernel: 'hurst' must lie in (0, 1)");
    return cr::fbm_kernel(h, grid);
  }
  if (name == "diagonal-square") {
    check_keys(spec, {"name", "cells", "level"}, "diagonal-square kernel spec");
    return cr::diagonal_square_kernel(grid);
  }
  if (name == "product") {
    check_keys(spec, {"name", "cells", "level", "n", "factors", "materialize"},
               "product kernel spec");
    std::vector<cr::KernelPath> factors;
    if (spec.contains("factors")) {
      for (const auto& f : jarr(spec, "factors")) factors.push_back(parse_kernel(f, &grid));
    } else {
      const int n = spec.contains("n") ? jint(spec, "n") : 2;
      if (n < 2) throw UsageError("product kernel: 'n' must be at least 2");
      for (int i = 0; i < n; ++i) factors.push_back(cr::brownian_kernel(grid));
    }
    const bool materialize = spec.value("materialize", true);
    return cr::product_kernel(factors, materialize);
  }
  throw UsageError("unknown kernel name '" + name +
                   "' (use brownian, fbm, product, diagonal-square)");
}

// Deterministic unit Cameron-Martin direction: equal weights on the first
// min(dim, 4) coordinates.
cr::SymTensor unit_direction(int dim) {
  const int k = std::min(dim, 4);
  cr::SymTensor h(1, dim);
  for (int i = 0; i < k; ++i) h.add({i}, 1.0 / std::sqrt(static_cast<double>(k)));
  return h;
}

std::string fd(double v) { return cr::format_double(v); }

// ---------------------------------------------------------------------------
// Experiments. Each returns its report JSON, the results table, and the list
// of gating assertions; artifact writing and exit codes live in finish().

Outcome run_lift_converge(const RunConfig& rc) {
  const Json& p = rc.params;
  const int lo = jint(p, "level_lo");
  const int hi = jint(p, "level_hi");
  const int ref = jint(p, "ref_level");
  const double pvar = jnum(p, "p");
  const int d = jint(p, "d");
  if (!(pvar > 2.0)) throw UsageError("lift-converge: 'p' must exceed 2");
  if (!(0 < lo && lo <= hi && hi < ref)) throw UsageError("lift-converge: need 0 < level_lo <= level_hi < ref_level");
  const std::vector<double> grid = cr::dyadic_grid(ref);
  const cr::KernelPath k = parse_kernel(jobj(p, "kernel"), &grid);
  if (k.cells() != (1 << ref))
    throw UsageError("lift-converge: kernel grid must match 'ref_level'");

  const cr::ConvergenceReport rep =
      cr::dyadic_convergence(k, d, lo, hi, ref, pvar, rc.samples, cr::Rng(rc.seed));

  cr::Csv csv({"level", "mean_sq_distance", "se_sq_distance", "drop_mean", "drop_se"});
  for (std::size_t i = 0; i < rep.levels.size(); ++i) {
    const bool has_drop = i + 1 < rep.levels.size();
    csv.add_row({std::to_string(rep.levels[i]), fd(rep.mean_sq_distance[i]),
                 fd(rep.se_sq_distance[i]),
                 fd(has_drop ? rep.drop_mean[i] : std::nan("")),
                 fd(has_drop ? rep.drop_se[i] : std::nan(""))});
  }
  Json report{{"kernel", k.label},
              {"levels", rep.levels},
              {"mean_sq_distance", rep.mean_sq_distance},
              {"se_sq_distance", rep.se_sq_distance},
              {"drop_mean", rep.drop_mean},
              {"drop_se", rep.drop_se},
              {"strictly_decreasing", rep.strictly_decreasing}};
  std::vector<Assertion> as;
  as.push_back({"squared-distance-drops-clear-two-se", rep.strictly_decreasing,
                "every paired squared-distance drop between adjacent levels exceeds twice its standard error"});
  return Outcome{std::move(report), std::move(csv), std::move(as)};
}

Outcome run_kl_converge(const RunConfig& rc) {
  const cr::KernelPath k = parse_kernel(jobj(rc.params, "kernel"));
  const cr::MonomialBasis basis = cr::monomial_basis(k.order, k.dim());
  const int last = k.nodes() - 1;
  const cr::Vec prof1 = cr::kl_level1_profile(k, basis, 0, last);
  const cr::Vec cross = cr::kl_level2_cross_profile(k, basis, 0, last);
  const cr::Vec diag = cr::kl_level2_diag_profile(k, basis, 0, last);

  bool nondecreasing = true;
  for (const cr::Vec* prof : {&prof1, &cross, &diag})
    for (std::size_t i = 1; i < prof->size(); ++i)
      if ((*prof)[i] < (*prof)[i - 1] - 1e-12 * (1.0 + std::abs((*prof)[i])))
        nondecreasing = false;

  const double nf = cr::factorial(k.order);
  const cr::SymTensor inc = k.increment(0, last);
  const double full1 = nf * cr::inner(inc, inc);
  const double fulldiag = 0.25 * cr::fourth_moment(cr::ChaosVariable{inc});
  // Independent oracle for the full cross moment: expand the grid integral
  // between two copies directly through kernel inner products.
  double fullcross = 0.0;
  std::vector<cr::SymTensor> mids;
  for (int u = 0; u < last; ++u) {
    cr::SymTensor mid = cr::SymTensor(k.order, k.dim());
    mid += k.increment(0, u);
    cr::SymTensor half = k.increment(u, u + 1);
    half *= 0.5;
    mid += half;
    mids.push_back(std::move(mid));
  }
  for (int u = 0; u < last; ++u)
    for (int v = 0; v < last; ++v)
      fullcross += nf * cr::inner(mids[static_cast<std::size_t>(u)], mids[static_cast<std::size_t>(v)]) *
                   nf * cr::inner(k.increment(u, u + 1), k.increment(v, v + 1));

  const auto close = [](double a, double b) { return std::abs(a - b) <= 1e-10 * (1.0 + std::abs(b)); };

  cr::Csv csv({"truncation", "level1_second_moment", "level2_cross_second_moment",
               "level2_diag_second_moment"});
  for (std::size_t i = 0; i < prof1.size(); ++i)
    csv.add_row({std::to_string(i), fd(prof1[i]), fd(cross[i]), fd(diag[i])});

  Json report{{"kernel", k.label},
              {"basis_size", basis.size()},
              {"level1_profile", prof1},
              {"level2_cross_profile", cross},
              {"level2_diag_profile", diag},
              {"full_level1_second_moment", full1},
              {"full_level2_cross_second_moment", fullcross},
              {"full_level2_diag_second_moment", fulldiag}};
  std::vector<Assertion> as;
  as.push_back({"second-moment-profiles-nondecreasing", nondecreasing,
                "spectral truncation only removes orthogonal mass, so each profile accumulates"});
  as.push_back({"level1-profile-terminates-at-full-second-moment", close(prof1.back(), full1),
                "final truncation reproduces n! times the squared kernel increment norm"});
  as.push_back({"cross-profile-terminates-at-full-second-moment", close(cross.back(), fullcross),
                "final truncation reproduces the directly expanded grid integral moment"});
  as.push_back({"diag-profile-terminates-at-full-second-moment", close(diag.back(), fulldiag),
                "final truncation reproduces one quarter of the fourth moment"});
  return Outcome{std::move(report), std::move(csv), std::move(as)};
}

Outcome run_assumptions(const RunConfig& rc) {
  const double rho = jnum(rc.params, "rho");
  if (!(rho >= 1.0 && rho < 1.5)) throw UsageError("assumptions: 'rho' must lie in [1, 3/2)");
  const cr::KernelPath k = parse_kernel(jobj(rc.params, "kernel"));
  cr::Control2D control;
  if (!k.factors.empty()) {
    control = cr::factor_variation_control(k, rho);
  } else if (k.label == "brownian") {
    control = cr::overlap_control(k.grid);
  } else {
    throw UsageError("assumptions: no control construction for kernel '" + k.label +
                     "'; use brownian or product");
  }
  const cr::AssumptionReport rep = cr::check_assumptions(k, rho, &control);

  cr::Csv csv({"clause", "max_ratio", "exact", "pass"});
  Json clauses = Json::array();
  const auto add = [&csv, &clauses](const cr::ClauseReport& c) {
    csv.add_row({c.name, fd(c.max_ratio), std::to_string(c.exact ? 1 : 0),
                 std::to_string(c.pass ? 1 : 0)});
    clauses.push_back(Json{{"name", c.name}, {"max_ratio", c.max_ratio}, {"exact", c.exact},
                           {"pass", c.pass}});
  };
  add(rep.covariance_holder);
  for (const auto& c : rep.contraction) add(c);
  add(rep.control_holder);
  csv.add_row({"control-superadditive", fd(std::nan("")),
               std::to_string(1), std::to_string(rep.control_superadditive ? 1 : 0)});

  Json report{{"kernel", k.label},
              {"rho", rho},
              {"control", control.label},
              {"clauses", std::move(clauses)},
              {"control_superadditive", rep.control_superadditive}};
  std::vector<Assertion> as;
  as.push_back({"contraction-clauses-dominated-by-control", rep.contraction_pass(),
                "every contraction order of increment pairs is bounded by the control to the 1/rho"});
  as.push_back({"control-superadditive", rep.control_superadditive,
                "the control gains mass under splitting every grid rectangle"});
  return Outcome{std::move(report), std::move(csv), std::move(as)};
}

Outcome run_rde_verify(const RunConfig& rc) {
  const Json& p = rc.params;
  const int level = jint(p, "level");
  const int substeps = jint(p, "substeps");
  const int ref_level = jint(p, "refinement_level");
  const int jac_cells = jint(p, "jacobian_cells");
  if (level < 1 || level > 14 || ref_level < 1 || ref_level > 10)
    throw UsageError("rde-verify: grid levels out of range");
  if (substeps < 1) throw UsageError("rde-verify: 'substeps' must be positive");
  if (jac_cells < 2) throw UsageError("rde-verify: 'jacobian_cells' must be at least 2");

  cr::Csv csv({"check", "metric", "value"});
  Json report;
  std::vector<Assertion> as;

  // Drift only: the canonical lift of t solves dY = Y dt up to the local
  // third-order defect, which compounds to about e/(6 N^2) at the endpoint.
  {
    const std::vector<double> grid = cr::dyadic_grid(10);
    std::vector<cr::Vec> values;
    for (double t : grid) values.push_back({t});
    const auto sol = cr::rde_solve(cr::scalar_linear_field(), {1.0},
                                   cr::lift_piecewise_linear(grid, values));
    const double err = std::abs(sol.y.back()[0] - std::exp(1.0));
    csv.add_row({"deterministic", "abs_error_at_one", fd(err)});
    report["deterministic_abs_error"] = err;
    as.push_back({"deterministic-exponential-error-below-tolerance", err <= 1e-6,
                  "time-lift drive reproduces e within 1e-6 at 2^10 cells"});
  }

  // Pathwise: dY = Y dX against the exact exponential of the level-1 path.
  {
    const cr::PathSampler sampler = cr::make_sampler({cr::brownian_kernel(cr::dyadic_grid(level))});
    std::vector<double> errs(static_cast<std::size_t>(rc.samples), 0.0);
    cr::parallel_for(rc.samples, rc.threads, [&](int s) {
      cr::Rng stream = cr::Rng(rc.seed).child(static_cast<std::uint64_t>(s));
      const std::vector<cr::Vec> vals = sampler.sample(stream);
      const cr::Level2Path x = cr::lift_piecewise_linear(sampler.grid, vals);
      const auto sol = cr::rde_solve(cr::scalar_linear_field(), {1.0}, x, 0, {substeps});
      double worst = 0.0;
      for (std::size_t i = 0; i < sol.y.size(); ++i) {
        const double exact = std::exp(vals[i][0] - vals[0][0]);
        worst = std::max(worst, std::abs(sol.y[i][0] - exact) / (1.0 + exact));
      }
      errs[static_cast<std::size_t>(s)] = worst;
    });
    double worst = 0.0;
    for (int s = 0; s < rc.samples; ++s) {
      csv.add_row({"pathwise", "sample" + std::to_string(s) + "_max_rel_error", fd(errs[static_cast<std::size_t>(s)])});
      worst = std::max(worst, errs[static_cast<std::size_t>(s)]);
    }
    report["pathwise_max_rel_error"] = worst;
    as.push_back({"pathwise-exponential-error-below-tolerance", worst <= 1e-5,
                  "geometric substepping tracks the exact exponential on every sampled path"});
  }

  // Substep refinement on a smooth nonlinear field: halving the substep width
  // divides the endpoint error by about four.
  {
    const cr::PathSampler sampler =
        cr::make_sampler(cr::independent_copies(cr::brownian_kernel(cr::dyadic_grid(ref_level)), 2));
    cr::Rng stream = cr::Rng(rc.seed).child(1000);
    const cr::Level2Path x = cr::lift_piecewise_linear(sampler.grid, sampler.sample(stream));
    const cr::VectorFieldSet f = cr::tanh_fields(2, 2, 0.8, 21);
    const cr::Vec y0{0.2, -0.4};
    const cr::Vec ref = cr::rde_solve(f, y0, x, 0, {256}).y.back();
    std::vector<double> errs;
    for (int s : {1, 2, 4}) {
      const cr::Vec y = cr::rde_solve(f, y0, x, 0, {s}).y.back();
      errs.push_back(cr::norm2(cr::sub(y, ref)));
      csv.add_row({"refinement", "endpoint_error_s" + std::to_string(s), fd(errs.back())});
    }
    const double r1 = errs[0] / std::max(errs[1], 1e-300);
    const double r2 = errs[1] / std::max(errs[2], 1e-300);
    report["refinement_errors"] = errs;
    report["refinement_ratios"] = {r1, r2};
    const double floor = std::pow(2.0, 1.5);
    as.push_back({"substep-errors-decay-second-order", r1 >= floor && r2 >= floor,
                  "each substep doubling shrinks the endpoint error by at least 2^1.5"});
  }

  // Jacobian equation against central differences in the initial condition.
  {
    const cr::PathSampler sampler =
        cr::make_sampler(cr::independent_copies(cr::brownian_kernel(cr::uniform_grid(jac_cells)), 2));
    cr::Rng stream = cr::Rng(rc.seed).child(2000);
    const cr::Level2Path x = cr::lift_piecewise_linear(sampler.grid, sampler.sample(stream));
    const cr::VectorFieldSet f = cr::tanh_fields(3, 2, 0.9, 31);
    const cr::Vec y0{0.3, -0.1, 0.2};
    const auto jac = cr::rde_jacobian(f, y0, x);
    const double eps = 1e-5;
    double worst = 0.0;
    for (int j = 0; j < 3; ++j) {
      cr::Vec yp = y0, ym = y0;
      yp[static_cast<std::size_t>(j)] += eps;
      ym[static_cast<std::size_t>(j)] -= eps;
      const cr::Vec up = cr::rde_solve(f, yp, x).y.back();
      const cr::Vec um = cr::rde_solve(f, ym, x).y.back();
      for (int i = 0; i < 3; ++i) {
        const double fdiff = (up[static_cast<std::size_t>(i)] - um[static_cast<std::size_t>(i)]) / (2 * eps);
        worst = std::max(worst, std::abs(jac.jac.back().at(i, j) - fdiff) / (1.0 + std::abs(fdiff)));
      }
    }
    csv.add_row({"jacobian", "max_rel_error_vs_fd", fd(worst)});
    csv.add_row({"jacobian", "min_abs_det", fd(jac.min_abs_det)});
    report["jacobian_max_rel_error"] = worst;
    report["jacobian_min_abs_det"] = jac.min_abs_det;
    report["jacobian_det_underflow"] = jac.det_underflow;
    as.push_back({"jacobian-matches-finite-differences", worst <= 1e-3,
                  "the forward sensitivity equation agrees with central differences in y0"});
  }

  return Outcome{std::move(report), std::move(csv), std::move(as)};
}

Outcome run_malliavin_verify(const RunConfig& rc) {
  const Json& p = rc.params;
  const double eps = jnum(p, "eps");
  const double eps2 = jnum(p, "eps2");
  if (!(eps > 0.0 && eps < 0.1) || !(eps2 > 0.0 && eps2 < 0.1))
    throw UsageError("malliavin-verify: finite-difference steps must lie in (0, 0.1)");
  const int n1_level = jint(p, "n1_level");
  const int n2_cells = jint(p, "n2_cells");
  if (n1_level < 2 || n1_level > 10 || n2_cells < 4 || n2_cells > 128)
    throw UsageError("malliavin-verify: grid sizes out of range");

  struct Model {
    std::string name;
    cr::EnhancedProcess proc;
    cr::VectorFieldSet field;
    cr::Vec y0;
    bool second_order;
  };
  std::vector<Model> models;
  models.push_back({"order1-brownian-linear",
                    cr::make_enhanced_process({cr::brownian_kernel(cr::dyadic_grid(n1_level))}),
                    cr::scalar_linear_field(),
                    {1.0},
                    false});
  {
    const std::vector<double> grid = cr::uniform_grid(n2_cells);
    models.push_back({"order2-product-tanh",
                      cr::make_enhanced_process({cr::product_kernel(
                          {cr::brownian_kernel(grid), cr::fbm_kernel(0.4, grid)})}),
                      cr::tanh_fields(2, 1, 0.9, 33),
                      {0.3, -0.2},
                      true});
  }

  struct Slot {
    double k1 = 0.0;
    double k2 = 0.0;
    double base_gap = 0.0;
  };
  cr::Csv csv({"model", "sample", "derivative_order", "max_rel_error"});
  Json per_model = Json::array();
  std::vector<Assertion> as;
  double worst_k1 = 0.0, worst_k2 = 0.0, worst_gap = 0.0;

  for (const Model& model : models) {
    std::vector<Slot> slots(static_cast<std::size_t>(rc.samples));
    cr::parallel_for(rc.samples, rc.threads, [&](int s) {
      cr::Rng stream = cr::Rng(rc.seed).child(static_cast<std::uint64_t>(s));
      const cr::EnhancedSample sample = cr::enhance_sample(model.proc, stream);
      cr::SymTensor h(1, model.proc.ambient);
      double nrm = 0.0;
      std::vector<double> raw(static_cast<std::size_t>(model.proc.ambient));
      for (double& v : raw) {
        v = stream.normal();
        nrm += v * v;
      }
      nrm = std::sqrt(nrm);
      for (int i = 0; i < model.proc.ambient; ++i) h.add({i}, raw[static_cast<std::size_t>(i)] / nrm);

      Slot slot;
      const auto sol = cr::malliavin_rde(model.field, model.y0, model.proc, sample, h,
                                         model.second_order ? 2 : 1);
      const auto base = cr::rde_solve(model.field, model.y0, cr::level0_lift(model.proc, sample));
      const auto yp = cr::rde_solve(model.field, model.y0,
                                    cr::level0_lift(model.proc, cr::translate(model.proc, sample, h, eps))).y;
      const auto ym = cr::rde_solve(model.field, model.y0,
                                    cr::level0_lift(model.proc, cr::translate(model.proc, sample, h, -eps))).y;
      for (std::size_t i = 0; i < sol.y.size(); ++i)
        for (std::size_t j = 0; j < model.y0.size(); ++j) {
          const double fdiff = (yp[i][j] - ym[i][j]) / (2 * eps);
          slot.k1 = std::max(slot.k1, std::abs(sol.z1[i][j] - fdiff) / (1.0 + std::abs(fdiff)));
          slot.base_gap = std::max(slot.base_gap, std::abs(sol.y[i][j] - base.y[i][j]));
        }
      if (model.second_order) {
        const auto y2p = cr::rde_solve(model.field, model.y0,
                                       cr::level0_lift(model.proc, cr::translate(model.proc, sample, h, eps2))).y;
        const auto y2m = cr::rde_solve(model.field, model.y0,
                                       cr::level0_lift(model.proc, cr::translate(model.proc, sample, h, -eps2))).y;
        for (std::size_t i = 0; i < sol.y.size(); ++i)
          for (std::size_t j = 0; j < model.y0.size(); ++j) {
            const double fdiff = (y2p[i][j] - 2 * base.y[i][j] + y2m[i][j]) / (eps2 * eps2);
            slot.k2 = std::max(slot.k2, std::abs(sol.z2[i][j] - fdiff) / (1.0 + std::abs(fdiff)));
          }
      }
      slots[static_cast<std::size_t>(s)] = slot;
    });

    double m_k1 = 0.0, m_k2 = 0.0, m_gap = 0.0;
    for (int s = 0; s < rc.samples; ++s) {
      const Slot& slot = slots[static_cast<std::size_t>(s)];
      csv.add_row({model.name, std::to_string(s), "1", fd(slot.k1)});
      if (model.second_order) csv.add_row({model.name, std::to_string(s), "2", fd(slot.k2)});
      m_k1 = std::max(m_k1, slot.k1);
      m_k2 = std::max(m_k2, slot.k2);
      m_gap = std::max(m_gap, slot.base_gap);
    }
    per_model.push_back(Json{{"model", model.name},
                             {"max_rel_error_k1", m_k1},
                             {"max_rel_error_k2", m_k2},
                             {"max_base_path_gap", m_gap}});
    worst_k1 = std::max(worst_k1, m_k1);
    if (model.second_order) worst_k2 = std::max(worst_k2, m_k2);
    worst_gap = std::max(worst_gap, m_gap);
  }

  Json report{{"eps", eps},
              {"eps2", eps2},
              {"models", std::move(per_model)},
              {"worst_k1", worst_k1},
              {"worst_k2", worst_k2},
              {"worst_base_path_gap", worst_gap}};
  as.push_back({"first-derivative-matches-translation-fd", worst_k1 <= 1e-2,
                "the paired derivative solution tracks central differences of the translated solve"});
  as.push_back({"second-derivative-matches-translation-fd", worst_k2 <= 1e-2,
                "the second paired derivative tracks second differences of the translated solve"});
  as.push_back({"derivative-solution-shares-the-base-path", worst_gap <= 1e-10,
                "augmenting the driver with derivative rows leaves the base solution untouched"});
  return Outcome{std::move(report), std::move(csv), std::move(as)};
}

Outcome run_greedy_tail(const RunConfig& rc) {
  const Json& p = rc.params;
  const double alpha = jnum(p, "alpha");
  const double pvar = jnum(p, "p");
  const double r2_min = jnum(p, "fit_r2_min");
  if (!(alpha > 0.0)) throw UsageError("greedy-tail: 'alpha' must be positive");
  if (!(pvar > 2.0)) throw UsageError("greedy-tail: 'p' must exceed 2");
  std::vector<int> thresholds;
  for (const auto& t : jarr(p, "thresholds")) {
    if (!t.is_number_integer()) throw UsageError("greedy-tail: thresholds must be integers");
    thresholds.push_back(t.get<int>());
  }
  if (thresholds.empty()) throw UsageError("greedy-tail: need at least one threshold");
  for (std::size_t i = 1; i < thresholds.size(); ++i)
    if (thresholds[i] <= thresholds[i - 1])
      throw UsageError("greedy-tail: thresholds must increase");
  if (rc.samples < 100) throw UsageError("greedy-tail: need at least 100 samples");
  const cr::KernelPath k = parse_kernel(jobj(p, "kernel"));
  const cr::PathSampler sampler = cr::make_sampler({k});

  struct Slot {
    int crossings = 0;
    double m_acc = 0.0;
    double homo = 0.0;
    bool alpha_ok = false;
    bool cert_ok = false;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(rc.samples));
  cr::parallel_for(rc.samples, rc.threads, [&](int s) {
    cr::Rng stream = cr::Rng(rc.seed).child(static_cast<std::uint64_t>(s));
    const cr::Level2Path x = cr::lift_piecewise_linear(sampler.grid, sampler.sample(stream));
    const cr::PartitionStats st = cr::greedy(x, alpha, pvar);
    slots[static_cast<std::size_t>(s)] =
        Slot{st.N, st.M_accumulated, st.homogeneous_norm_p, st.alpha_bound_ok, st.certificate_ok};
  });

  std::vector<int> crossings;
  std::vector<double> norms;
  int alpha_ok = 0, cert_ok = 0;
  for (const Slot& s : slots) {
    crossings.push_back(s.crossings);
    norms.push_back(s.homo);
    alpha_ok += s.alpha_ok ? 1 : 0;
    cert_ok += s.cert_ok ? 1 : 0;
  }
  const cr::TailReport tail = cr::tail_fit(crossings, norms, k.order, alpha, pvar, thresholds);

  cr::Csv csv({"threshold", "exceedances", "survival", "wilson_lo", "wilson_hi", "used_in_fit"});
  bool monotone = true;
  for (std::size_t m = 0; m < tail.thresholds.size(); ++m) {
    if (m > 0 && tail.survival[m] > tail.survival[m - 1]) monotone = false;
    csv.add_row({std::to_string(tail.thresholds[m]), std::to_string(tail.exceed[m]),
                 fd(tail.survival[m]), fd(tail.wilson_lo[m]), fd(tail.wilson_hi[m]),
                 std::to_string(tail.used[m])});
  }

  Json report{{"kernel", k.label},
              {"alpha", alpha},
              {"p", pvar},
              {"order", k.order},
              {"samples", rc.samples},
              {"alpha_bound_fraction", static_cast<double>(alpha_ok) / rc.samples},
              {"certificate_fraction", static_cast<double>(cert_ok) / rc.samples},
              {"slope", tail.slope},
              {"intercept", tail.intercept},
              {"r2", tail.r2},
              {"fit_degenerate", tail.degenerate},
              {"median_norm_p", tail.median_norm_p}};
  std::vector<Assertion> as;
  as.push_back({"alpha-crossing-bound-holds-on-every-sample", alpha_ok == rc.samples,
                "alpha times the crossing count never exceeds the homogeneous p-variation power"});
  as.push_back({"accumulated-value-certificate-holds-on-every-sample", cert_ok == rc.samples,
                "the greedy accumulated value never exceeds alpha(2N+1)"});
  as.push_back({"survival-nonincreasing-in-threshold", monotone,
                "exceedance counts shrink as the threshold grows"});
  if (r2_min > 0.0)
    as.push_back({"tail-fit-regression-quality", !tail.degenerate && tail.slope < 0.0 && tail.r2 >= r2_min,
                  "log-survival against M^(2/np) fits a negative slope with R^2 at least " + fd(r2_min)});
  return Outcome{std::move(report), std::move(csv), std::move(as)};
}

Outcome run_translation(const RunConfig& rc) {
  const Json& p = rc.params;
  const double pvar = jnum(p, "p");
  const double margin = jnum(p, "slope_margin");
  if (!(pvar > 2.0)) throw UsageError("translation: 'p' must exceed 2");
  std::vector<double> rs;
  for (const auto& r : jarr(p, "r")) {
    if (!r.is_number()) throw UsageError("translation: 'r' entries must be numbers");
    rs.push_back(r.get<double>());
  }
  const Json& cases = jarr(p, "cases");
  if (cases.empty()) throw UsageError("translation: need at least one case");

  cr::Csv csv({"case", "order", "r", "mean_ratio"});
  Json case_reports = Json::array();
  std::vector<Assertion> as;
  for (std::size_t ci = 0; ci < cases.size(); ++ci) {
    check_keys(cases[ci], {"kernel"}, "translation case");
    const cr::KernelPath k = parse_kernel(jobj(cases[ci], "kernel"));
    const cr::EnhancedProcess proc = cr::make_enhanced_process({k});
    const cr::SymTensor h = unit_direction(proc.ambient);
    const cr::TranslationGrowth g =
        cr::translation_growth(proc, h, rs, pvar, rc.samples, cr::Rng(rc.seed).child(ci));
    for (std::size_t i = 0; i < rs.size(); ++i)
      csv.add_row({std::to_string(ci), std::to_string(k.order), fd(rs[i]), fd(g.mean_ratio[i])});
    const double bound = k.order * pvar + pvar / 2.0 + margin;
    case_reports.push_back(Json{{"case", ci},
                                {"kernel", k.label},
                                {"order", k.order},
                                {"slope", g.slope},
                                {"bound", bound},
                                {"degenerate_samples", g.degenerate}});
    as.push_back({"translation-growth-slope-within-bound-case" + std::to_string(ci),
                  g.slope <= bound,
                  "log mean norm-power ratio grows no faster than r^(np + p/2) for " + k.label});
  }
  Json report{{"p", pvar}, {"r", rs}, {"slope_margin", margin}, {"cases", std::move(case_reports)}};
  return Outcome{std::move(report), std::move(csv), std::move(as)};
}

cr::KernelPath quadratic_kernel(int cells) {
  cr::KernelPath k;
  k.order = 2;
  k.grid = cr::uniform_grid(cells);
  k.label = "quadratic";
  for (double t : k.grid) {
    cr::SymTensor f(2, 1);
    f.add({0, 0}, t);
    k.kernels.push_back(std::move(f));
  }
  k.validate();
  return k;
}

Outcome run_rate(const RunConfig& rc) {
  const Json& p = rc.params;
  const int linear_cells = jint(p, "linear_cells");
  const int quad_cells = jint(p, "quadratic_cells");
  if (linear_cells < 2 || quad_cells < 2) throw UsageError("rate: cell counts must be at least 2");
  std::vector<double> cs;
  for (const auto& c : jarr(p, "quadratic_c")) {
    if (!c.is_number() || !(c.get<double>() > 0.0))
      throw UsageError("rate: 'quadratic_c' entries must be positive numbers");
    cs.push_back(c.get<double>());
  }
  const double bad_c = jnum(p, "infeasible_c");
  if (!(bad_c < 0.0)) throw UsageError("rate: 'infeasible_c' must be negative");
  cr::RateOptions opts;
  opts.multistarts = jint(p, "multistarts");
  opts.tol = jnum(p, "tol");
  opts.seed = rc.seed;
  if (opts.multistarts < 1) throw UsageError("rate: 'multistarts' must be positive");

  const auto status_name = [](cr::RateStatus s) {
    switch (s) {
      case cr::RateStatus::feasible: return "feasible";
      case cr::RateStatus::infeasible: return "infeasible";
      default: return "no-converge";
    }
  };

  cr::Csv csv({"case", "status", "value", "residual"});
  Json case_reports = Json::array();
  std::vector<Assertion> as;

  {
    const cr::KernelPath k = cr::brownian_kernel(cr::uniform_grid(linear_cells));
    const auto res = cr::rate_function(k, k.grid, opts);
    csv.add_row({"brownian-linear", status_name(res.status), fd(res.value), fd(res.residual)});
    case_reports.push_back(Json{{"case", "brownian-linear"},
                                {"status", status_name(res.status)},
                                {"value", res.value},
                                {"residual", res.residual}});
    as.push_back({"brownian-linear-energy-is-half",
                  res.status == cr::RateStatus::feasible && std::abs(res.value - 0.5) <= 1e-4,
                  "steering Brownian motion along t costs energy 1/2"});
  }

  bool quads_ok = true;
  for (double c : cs) {
    const cr::KernelPath k = quadratic_kernel(quad_cells);
    std::vector<double> target;
    for (double t : k.grid) target.push_back(c * t);
    const auto res = cr::rate_function(k, target, opts);
    const std::string name = "quadratic-c" + fd(c);
    csv.add_row({name, status_name(res.status), fd(res.value), fd(res.residual)});
    case_reports.push_back(Json{{"case", name},
                                {"status", status_name(res.status)},
                                {"value", res.value},
                                {"residual", res.residual}});
    quads_ok = quads_ok && res.status == cr::RateStatus::feasible &&
               std::abs(res.value - c / 2.0) <= 1e-4;
  }
  as.push_back({"quadratic-energy-is-half-the-slope", quads_ok,
                "hitting c t with a squared Gaussian costs c/2 for every requested c"});

  {
    const cr::KernelPath k = quadratic_kernel(quad_cells);
    std::vector<double> target;
    for (double t : k.grid) target.push_back(bad_c * t);
    const auto res = cr::rate_function(k, target, opts);
    csv.add_row({"quadratic-infeasible", status_name(res.status), fd(res.value), fd(res.residual)});
    case_reports.push_back(Json{{"case", "quadratic-infeasible"},
                                {"status", status_name(res.status)},
                                {"value", res.value},
                                {"residual", res.residual}});
    as.push_back({"negative-quadratic-target-infeasible", res.status == cr::RateStatus::infeasible,
                  "a square cannot steer negative, and every restart reports the residual floor"});
  }

  Json report{{"multistarts", opts.multistarts}, {"tol", opts.tol}, {"cases", std::move(case_reports)}};
  return Outcome{std::move(report), std::move(csv), std::move(as)};
}

Outcome run_scaling(const RunConfig& rc) {
  const Json& p = rc.params;
  const double alpha = jnum(p, "alpha");
  const double pvar = jnum(p, "p");
  if (!(alpha > 0.0)) throw UsageError("scaling: 'alpha' must be positive");
  if (!(pvar > 2.0)) throw UsageError("scaling: 'p' must exceed 2");
  std::vector<double> eps;
  for (const auto& e : jarr(p, "eps")) {
    if (!e.is_number() || !(e.get<double>() > 0.0))
      throw UsageError("scaling: 'eps' entries must be positive numbers");
    eps.push_back(e.get<double>());
  }
  const Json& kernels = jarr(p, "kernels");
  if (kernels.empty()) throw UsageError("scaling: need at least one kernel");

  cr::Csv csv({"kernel", "eps", "composition_gap"});
  Json kernel_reports = Json::array();
  bool identities = true, monotone = true;
  double order1_gap = 0.0, higher_gap = 0.0;
  bool saw_order1 = false, saw_higher = false;
  for (std::size_t ki = 0; ki < kernels.size(); ++ki) {
    const cr::KernelPath k = parse_kernel(kernels[ki]);
    const cr::ScalingReport rep =
        cr::scaling_check(k, eps, rc.samples, cr::Rng(rc.seed).child(ki), alpha, pvar);
    for (std::size_t i = 0; i < rep.eps.size(); ++i)
      csv.add_row({k.label, fd(rep.eps[i]), fd(rep.composition_gap[i])});
    kernel_reports.push_back(Json{{"kernel", k.label},
                                  {"order", k.order},
                                  {"eps", rep.eps},
                                  {"max_rel_level1", rep.max_rel_level1},
                                  {"max_rel_level2", rep.max_rel_level2},
                                  {"max_rel_homogeneous", rep.max_rel_homo},
                                  {"composition_gap", rep.composition_gap},
                                  {"n_alpha_monotone", rep.n_alpha_monotone},
                                  {"pass", rep.pass}});
    identities = identities && rep.pass;
    monotone = monotone && rep.n_alpha_monotone;
    double worst_gap = 0.0;
    for (std::size_t i = 0; i < rep.eps.size(); ++i)
      if (std::abs(rep.eps[i] - 1.0) > 1e-12) worst_gap = std::max(worst_gap, rep.composition_gap[i]);
    if (k.order == 1) {
      saw_order1 = true;
      order1_gap = std::max(order1_gap, worst_gap);
    } else {
      saw_higher = true;
      higher_gap = std::max(higher_gap, worst_gap);
    }
  }

  Json report{{"alpha", alpha},
              {"p", pvar},
              {"eps", eps},
              {"kernels", std::move(kernel_reports)},
              {"order1_composition_gap", order1_gap},
              {"higher_order_composition_gap", higher_gap}};
  std::vector<Assertion> as;
  as.push_back({"dilation-identities-exact", identities,
                "level-1, level-2 and homogeneous norms scale as eps^n, eps^2n, eps^np per sample"});
  as.push_back({"crossing-counts-monotone-under-dilation", monotone,
                "shrinking the path never raises the greedy crossing count"});
  if (saw_order1 && saw_higher)
    as.push_back({"composition-coincides-only-at-order-one", order1_gap <= 1e-10 && higher_gap > 1e-6,
                  "scaling the Gaussian argument matches the dilation at order 1 and departs at order 2"});
  return Outcome{std::move(report), std::move(csv), std::move(as)};
}

// ---------------------------------------------------------------------------
// Config assembly and artifact writing.

Json default_params(const std::string& experiment) {
  if (experiment == "lift-converge")
    return Json{{"kernel", {{"name", "brownian"}}}, {"d", 2},           {"level_lo", 3},
                {"level_hi", 5},                    {"ref_level", 6},   {"p", 2.5},
                {"samples", 40},                    {"seed", 7},        {"threads", 1},
                {"out", ""}};
  if (experiment == "kl-converge")
    return Json{{"kernel", {{"name", "fbm"}, {"hurst", 0.4}, {"cells", 24}}},
                {"samples", 1},
                {"seed", 7},
                {"threads", 1},
                {"out", ""}};
  if (experiment == "assumptions")
    return Json{{"kernel", {{"name", "product"}, {"n", 2}, {"cells", 8}}},
                {"rho", 1.0},
                {"samples", 1},
                {"seed", 7},
                {"threads", 1},
                {"out", ""}};
  if (experiment == "rde-verify")
    return Json{{"level", 7},         {"substeps", 128}, {"refinement_level", 4},
                {"jacobian_cells", 64}, {"samples", 5},  {"seed", 7},
                {"threads", 1},       {"out", ""}};
  if (experiment == "malliavin-verify")
    return Json{{"eps", 1e-4},    {"eps2", 1e-3},  {"n1_level", 6}, {"n2_cells", 32},
                {"samples", 20},  {"seed", 7},     {"threads", 1},  {"out", ""}};
  if (experiment == "greedy-tail")
    return Json{{"kernel", {{"name", "brownian"}, {"cells", 64}}},
                {"alpha", 0.04},
                {"p", 2.5},
                {"thresholds", {3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20}},
                {"fit_r2_min", 0.8},
                {"samples", 6000},
                {"seed", 7},
                {"threads", 1},
                {"out", ""}};
  if (experiment == "translation")
    return Json{{"cases",
                 {Json{{"kernel", {{"name", "brownian"}, {"cells", 16}}}},
                  Json{{"kernel", {{"name", "product"}, {"n", 2}, {"cells", 8}}}}}},
                {"r", {2.0, 4.0, 8.0, 16.0}},
                {"p", 2.5},
                {"slope_margin", 0.3},
                {"samples", 200},
                {"seed", 7},
                {"threads", 1},
                {"out", ""}};
  if (experiment == "rate")
    return Json{{"linear_cells", 16}, {"quadratic_cells", 4},
                {"quadratic_c", {0.5, 1.0, 2.0}}, {"infeasible_c", -0.5},
                {"multistarts", 8},   {"tol", 1e-6},
                {"samples", 1},       {"seed", 7},
                {"threads", 1},       {"out", ""}};
  if (experiment == "scaling")
    return Json{{"kernels",
                 {Json{{"name", "brownian"}, {"cells", 16}},
                  Json{{"name", "diagonal-square"}, {"cells", 12}}}},
                {"eps", {1.0, 0.5, 0.25}},
                {"alpha", 0.25},
                {"p", 2.5},
                {"samples", 50},
                {"seed", 7},
                {"threads", 1},
                {"out", ""}};
  std::string known;
  for (const auto& n : experiment_names()) known += (known.empty() ? "" : ", ") + n;
  throw UsageError("unknown experiment '" + experiment + "' (known: " + known + ")");
}

Outcome dispatch(const RunConfig& rc) {
  if (rc.experiment == "lift-converge") return run_lift_converge(rc);
  if (rc.experiment == "kl-converge") return run_kl_converge(rc);
  if (rc.experiment == "assumptions") return run_assumptions(rc);
  if (rc.experiment == "rde-verify") return run_rde_verify(rc);
  if (rc.experiment == "malliavin-verify") return run_malliavin_verify(rc);
  if (rc.experiment == "greedy-tail") return run_greedy_tail(rc);
  if (rc.experiment == "translation") return run_translation(rc);
  if (rc.experiment == "rate") return run_rate(rc);
  if (rc.experiment == "scaling") return run_scaling(rc);
  throw UsageError("unknown experiment '" + rc.experiment + "'");
}

int finish(const RunConfig& rc, Outcome oc, std::chrono::steady_clock::time_point t0) {
  Json asserts = Json::array();
  bool all_pass = true;
  for (const Assertion& a : oc.asserts) {
    asserts.push_back(Json{{"name", a.name}, {"pass", a.pass}, {"checks", a.detail}});
    all_pass = all_pass && a.pass;
  }

  Json report = std::move(oc.report);
  report["experiment"] = rc.experiment;
  report["assertions"] = asserts;

  const auto wall =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0);
  Json manifest{{"experiment", rc.experiment},
                {"version", kVersion},
                {"compiler", __VERSION__},
                {"config", rc.params},
                {"wall_ms", wall.count()},
                {"assertions", asserts},
                {"artifacts", {"results.csv", "report.json"}}};

  namespace fs = std::filesystem;
  cr::write_text_file((fs::path(rc.out_dir) / "results.csv").string(), oc.results.text());
  cr::write_json_file((fs::path(rc.out_dir) / "report.json").string(), report);
  cr::write_json_file((fs::path(rc.out_dir) / "manifest.json").string(), manifest);

  for (const Assertion& a : oc.asserts)
    std::cout << (a.pass ? "[PASS] " : "[FAIL] ") << a.name << "\n";
  std::cout << "artifacts: " << rc.out_dir << "\n";
  if (!all_pass) {
    std::cerr << "invariant violated:";
    for (const Assertion& a : oc.asserts)
      if (!a.pass) std::cerr << " " << a.name;
    std::cerr << "\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rough-path lifts of Wiener chaos: reproducible numerical experiments"};
  std::string experiment, config_path, out_dir;
  std::uint64_t seed = 0;
  int samples = 0;
  int threads = 0;
  app.add_option("experiment", experiment, "one of: lift-converge, kl-converge, assumptions, "
                                           "rde-verify, malliavin-verify, greedy-tail, "
                                           "translation, rate, scaling")
      ->required();
  auto* opt_config = app.add_option("--config", config_path, "JSON config file");
  auto* opt_seed = app.add_option("--seed", seed, "base RNG seed (overrides config)");
  auto* opt_samples = app.add_option("--samples", samples, "Monte Carlo sample count (overrides config)");
  auto* opt_out = app.add_option("--out", out_dir, "output directory (default artifacts/<experiment>)");
  auto* opt_threads = app.add_option("--threads", threads, "worker threads; 0 picks the hardware count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    RunConfig rc;
    rc.experiment = experiment;
    rc.params = default_params(experiment);
    if (opt_config->count() > 0) {
      Json file;
      try {
        file = cr::read_json_file(config_path);
      } catch (const std::exception& e) {
        throw UsageError(std::string("cannot read config: ") + e.what());
      }
      if (!file.is_object()) throw UsageError("config file must hold a JSON object");
      for (const auto& [key, value] : file.items()) {
        if (!rc.params.contains(key))
          throw UsageError("unknown config key '" + key + "' for experiment " + experiment);
        rc.params[key] = value;
      }
    }
    if (opt_seed->count() > 0) rc.params["seed"] = seed;
    if (opt_samples->count() > 0) rc.params["samples"] = samples;
    if (opt_threads->count() > 0) rc.params["threads"] = threads;
    if (opt_out->count() > 0) rc.params["out"] = out_dir;

    if (!rc.params.at("seed").is_number_unsigned() && !rc.params.at("seed").is_number_integer())
      throw UsageError("config key 'seed' must be an integer");
    rc.seed = rc.params.at("seed").get<std::uint64_t>();
    rc.samples = jint(rc.params, "samples");
    rc.threads = jint(rc.params, "threads");
    if (rc.samples < 1) throw UsageError("'samples' must be positive");
    if (rc.threads < 0) throw UsageError("'threads' must be nonnegative");
    rc.out_dir = rc.params.at("out").get<std::string>();
    if (rc.out_dir.empty()) {
      rc.out_dir = "artifacts/" + experiment;
      rc.params["out"] = rc.out_dir;
    }
    std::filesystem::create_directories(rc.out_dir);

    const auto t0 = std::chrono::steady_clock::now();
    Outcome oc = dispatch(rc);
    return finish(rc, std::move(oc), t0);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
