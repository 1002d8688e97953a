#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "chaosrough/analysis.hpp"
#include "chaosrough/chaos.hpp"
#include "chaosrough/enhanced.hpp"
#include "chaosrough/kernels.hpp"
#include "chaosrough/rde.hpp"
#include "chaosrough/rng.hpp"
#include "chaosrough/roughlift.hpp"
#include "chaosrough/symtensor.hpp"

namespace cr = chaosrough;

namespace {

cr::SymTensor random_kernel(cr::Rng& rng, int order, int dim) {
  cr::SymTensor t(order, dim);
  for (const auto& idx : cr::all_multi_indices(order, dim))
    if (rng.uniform() < 0.7) t.add(idx, rng.normal());
  if (t.coeffs().empty()) t.add(cr::MultiIndex(static_cast<std::size_t>(order), 0), 1.0);
  return t;
}

cr::SymTensor random_direction(int dim, cr::Rng& rng) {
  cr::SymTensor h(1, dim);
  std::vector<double> raw(static_cast<std::size_t>(dim));
  double nrm = 0.0;
  for (double& v : raw) {
    v = rng.normal();
    nrm += v * v;
  }
  nrm = std::sqrt(nrm);
  for (int i = 0; i < dim; ++i) h.add({i}, raw[static_cast<std::size_t>(i)] / nrm);
  return h;
}

cr::Level2Path random_lift(cr::Rng& rng, int dim, int cells) {
  std::vector<cr::Vec> values;
  for (int i = 0; i <= cells; ++i) {
    cr::Vec v(static_cast<std::size_t>(dim));
    for (double& x : v) x = rng.normal();
    values.push_back(std::move(v));
  }
  return cr::lift_piecewise_linear(cr::uniform_grid(cells), values);
}

// mean and standard error of fn over child streams of rng
struct McStat {
  double mean = 0.0;
  double se = 0.0;
};

McStat mc(int samples, const cr::Rng& rng, const std::function<double(cr::Rng&)>& fn) {
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < samples; ++i) {
    cr::Rng stream = rng.child(static_cast<std::uint64_t>(i));
    const double v = fn(stream);
    sum += v;
    sumsq += v * v;
  }
  McStat st;
  st.mean = sum / samples;
  st.se = std::sqrt(std::max(0.0, sumsq / samples - st.mean * st.mean) / samples);
  return st;
}

// ---------------------------------------------------------------------------
// 1. Pointwise algebra: product formula, Chen relation, level-2 symmetry,
//    translation group law.

bool criterion_algebra(std::ostringstream& out) {
  double worst = 0.0;
  cr::Rng rng(101);
  for (int trial = 0; trial < 120; ++trial) {
    const int dim = 2 + static_cast<int>(rng.next_u64() % 3);
    const cr::ChaosVariable a{random_kernel(rng, 1 + static_cast<int>(rng.next_u64() % 3), dim)};
    const cr::ChaosVariable b{random_kernel(rng, 1 + static_cast<int>(rng.next_u64() % 3), dim)};
    const auto parts = cr::product_expand(a, b);
    cr::Rng wr = rng.child(static_cast<std::uint64_t>(trial));
    const auto w = cr::sample_gaussian(dim, wr);
    double rhs = 0.0;
    for (const auto& part : parts) rhs += cr::eval_chaos(part, w);
    const double lhs = cr::eval_chaos(a, w) * cr::eval_chaos(b, w);
    worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + std::abs(lhs)));
  }

  cr::Rng lrng(102);
  for (int trial = 0; trial < 100; ++trial) {
    const int cells = 5 + static_cast<int>(lrng.next_u64() % 5);
    const cr::Level2Path x = random_lift(lrng, 2, cells);
    worst = std::max(worst, cr::chen_defect(x));
    worst = std::max(worst, cr::symmetry_defect(x));
  }

  const auto grid = cr::uniform_grid(8);
  const std::vector<cr::EnhancedProcess> procs{
      cr::make_enhanced_process({cr::brownian_kernel(grid)}),
      cr::make_enhanced_process({cr::product_kernel({cr::brownian_kernel(grid),
                                                     cr::brownian_kernel(grid)})})};
  cr::Rng trng(103);
  for (const auto& proc : procs)
    for (int trial = 0; trial < 25; ++trial) {
      cr::Rng stream = trng.child(static_cast<std::uint64_t>(trial));
      const auto s = cr::enhance_sample(proc, stream);
      const auto h = random_direction(proc.ambient, stream);
      const double r1 = 0.8 * stream.normal();
      const double r2 = 0.8 * stream.normal();
      const auto once = cr::translate(proc, s, h, r1 + r2);
      const auto twice = cr::translate(proc, cr::translate(proc, s, h, r1), h, r2);
      for (int c = 0; c < proc.dimension(); ++c) {
        for (int i = 0; i < proc.nodes(); ++i)
          worst = std::max(worst, std::abs(once.level0[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)] -
                                           twice.level0[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)]));
        for (int k = 1; k <= proc.order(c); ++k) {
          const cr::Vec pa = cr::pairing_path(proc, once, c, k, h);
          const cr::Vec pb = cr::pairing_path(proc, twice, c, k, h);
          for (std::size_t i = 0; i < pa.size(); ++i)
            worst = std::max(worst, std::abs(pa[i] - pb[i]));
        }
      }
    }

  out << "max defect " << worst;
  return worst <= 1e-8;
}

// ---------------------------------------------------------------------------
// 2. Isometry and cross-order orthogonality at one million samples.

bool criterion_isometry(std::ostringstream& out) {
  const int dim = 4;
  const int samples = 1000000;
  cr::Rng krng(201);
  std::vector<cr::SymTensor> fs, gs;
  for (int n = 1; n <= 3; ++n) {
    fs.push_back(random_kernel(krng, n, dim));
    gs.push_back(random_kernel(krng, n, dim));
  }
  // accumulate the three isometry products and the three cross products
  double sum[6] = {0, 0, 0, 0, 0, 0}, sumsq[6] = {0, 0, 0, 0, 0, 0};
  const cr::Rng base(202);
  for (int i = 0; i < samples; ++i) {
    cr::Rng stream = base.child(static_cast<std::uint64_t>(i));
    const auto w = cr::sample_gaussian(dim, stream);
    double ef[3], eg[3];
    for (int n = 0; n < 3; ++n) {
      ef[n] = cr::eval_chaos({fs[static_cast<std::size_t>(n)]}, w);
      eg[n] = cr::eval_chaos({gs[static_cast<std::size_t>(n)]}, w);
    }
    const double prods[6] = {ef[0] * eg[0], ef[1] * eg[1], ef[2] * eg[2],
                             ef[0] * ef[1], ef[0] * ef[2], ef[1] * ef[2]};
    for (int j = 0; j < 6; ++j) {
      sum[j] += prods[j];
      sumsq[j] += prods[j] * prods[j];
    }
  }
  double worst_sigma = 0.0;
  for (int j = 0; j < 6; ++j) {
    const double mean = sum[j] / samples;
    const double se = std::sqrt(std::max(0.0, sumsq[j] / samples - mean * mean) / samples);
    const double want = j < 3 ? cr::factorial(j + 1) * cr::inner(fs[static_cast<std::size_t>(j)],
                                                                 gs[static_cast<std::size_t>(j)])
                              : 0.0;
    worst_sigma = std::max(worst_sigma, std::abs(mean - want) / (se + 1e-300));
  }
  out << "worst deviation " << worst_sigma << " se at " << samples << " samples";
  return worst_sigma <= 3.0;
}

// ---------------------------------------------------------------------------
// 3. Derivative inner products: expansion equals the direct pairing pointwise
//    and matches (n!)^2/(n-k)! <f,g> in expectation.

bool criterion_inner_dk(std::ostringstream& out) {
  const int dim = 3;
  double worst_point = 0.0;
  cr::Rng rng(301);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 2);
    const auto f = random_kernel(rng, n, dim);
    const auto g = random_kernel(rng, n, dim);
    for (int k = 1; k <= 2; ++k) {
      const auto parts = cr::inner_dk(f, g, k);
      cr::Rng wr = rng.child(static_cast<std::uint64_t>(31 * trial + k));
      const auto w = cr::sample_gaussian(dim, wr);
      double rhs = 0.0;
      for (const auto& part : parts) rhs += cr::eval_chaos(part, w);
      const double lhs = cr::inner(cr::malliavin(cr::ChaosVariable{f}, k).realize(w),
                                   cr::malliavin(cr::ChaosVariable{g}, k).realize(w));
      worst_point = std::max(worst_point, std::abs(lhs - rhs) / (1.0 + std::abs(lhs)));
    }
  }

  double worst_sigma = 0.0;
  cr::Rng erng(302);
  for (int n : {2, 3})
    for (int k : {1, 2}) {
      const auto f = random_kernel(erng, n, dim);
      const auto g = random_kernel(erng, n, dim);
      const auto parts = cr::inner_dk(f, g, k);
      const double want =
          cr::factorial(n) * cr::factorial(n) / cr::factorial(n - k) * cr::inner(f, g);
      const McStat st = mc(200000, erng.child(static_cast<std::uint64_t>(10 * n + k)),
                           [&parts, dim](cr::Rng& stream) {
                             const auto w = cr::sample_gaussian(dim, stream);
                             double v = 0.0;
                             for (const auto& part : parts) v += cr::eval_chaos(part, w);
                             return v;
                           });
      worst_sigma = std::max(worst_sigma, std::abs(st.mean - want) / (st.se + 1e-9 * (1.0 + std::abs(want))));
    }

  out << "max pointwise defect " << worst_point << ", worst expectation deviation " << worst_sigma
      << " se";
  return worst_point <= 1e-8 && worst_sigma <= 3.0;
}

// ---------------------------------------------------------------------------
// 4. p-variation dynamic program equals exhaustive partition search.

bool criterion_pvar_oracle(std::ostringstream& out) {
  double worst = 0.0;
  cr::Rng rng(401);
  const double ps[3] = {2.2, 2.5, 2.9};
  for (int trial = 0; trial < 60; ++trial) {
    const int cells = 3 + static_cast<int>(rng.next_u64() % 7);  // up to 10 nodes
    const cr::Level2Path x = random_lift(rng, 2, cells);
    const double p = ps[trial % 3];
    const cr::PVarResult dp = cr::p_variation(x, p);
    const cr::PVarResult ex = cr::p_variation_exhaustive(x, p);
    worst = std::max(worst, std::abs(dp.level1_pow - ex.level1_pow) / (1.0 + ex.level1_pow));
    worst = std::max(worst, std::abs(dp.level2_pow - ex.level2_pow) / (1.0 + ex.level2_pow));
  }
  out << "max relative gap " << worst << " over 60 paths";
  return worst <= 1e-12;
}

// ---------------------------------------------------------------------------
// 5. Dyadic lift convergence in mean squared rough distance, orders 1 and 2.

bool criterion_convergence(std::ostringstream& out) {
  const auto ref_grid = cr::dyadic_grid(9);
  const cr::KernelPath brown = cr::brownian_kernel(ref_grid);
  const cr::KernelPath prod = cr::product_kernel(
      {cr::brownian_kernel(ref_grid), cr::brownian_kernel(ref_grid)}, /*materialize_nodes=*/false);
  bool ok = true;
  out << "smallest drop margin";
  for (const cr::KernelPath* k : {&brown, &prod}) {
    const cr::ConvergenceReport rep =
        cr::dyadic_convergence(*k, 2, 3, 8, 9, 2.5, 200, cr::Rng(501));
    ok = ok && rep.strictly_decreasing;
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rep.drop_mean.size(); ++i)
      margin = std::min(margin, rep.drop_mean[i] / (2.0 * rep.drop_se[i] + 1e-300));
    out << " " << (k->order == 1 ? "order1 " : "order2 ") << margin;
  }
  return ok;
}

// ---------------------------------------------------------------------------
// 6. Spectral truncation monotonicity at every grid pair, exactly.

bool criterion_kl(std::ostringstream& out) {
  double worst_drop = 0.0, worst_final = 0.0, worst_excess = 0.0;
  const auto grid = cr::uniform_grid(8);
  for (const cr::KernelPath& k : {cr::brownian_kernel(grid), cr::fbm_kernel(0.4, grid)}) {
    const cr::MonomialBasis basis = cr::monomial_basis(k.order, k.dim());
    const double nf = cr::factorial(k.order);
    for (int i = 0; i < k.nodes(); ++i)
      for (int j = i + 1; j < k.nodes(); ++j) {
        const cr::Vec prof1 = cr::kl_level1_profile(k, basis, i, j);
        const cr::Vec cross = cr::kl_level2_cross_profile(k, basis, i, j);
        const cr::Vec diag = cr::kl_level2_diag_profile(k, basis, i, j);
        const cr::SymTensor inc = k.increment(i, j);
        const double full1 = nf * cr::inner(inc, inc);
        const double fulldiag = 0.25 * cr::fourth_moment(cr::ChaosVariable{inc});
        // direct grid-integral expansion of the full cross moment on [i, j]
        double fullcross = 0.0;
        std::vector<cr::SymTensor> mids;
        for (int u = i; u < j; ++u) {
          cr::SymTensor mid(k.order, k.dim());
          mid += k.increment(i, u);
          cr::SymTensor half = k.increment(u, u + 1);
          half *= 0.5;
          mid += half;
          mids.push_back(std::move(mid));
        }
        for (int u = 0; u < j - i; ++u)
          for (int v = 0; v < j - i; ++v)
            fullcross += nf *
                         cr::inner(mids[static_cast<std::size_t>(u)],
                                   mids[static_cast<std::size_t>(v)]) *
                         nf * cr::inner(k.increment(i + u, i + u + 1), k.increment(i + v, i + v + 1));
        for (const cr::Vec* prof : {&prof1, &cross, &diag})
          for (std::size_t m = 1; m < prof->size(); ++m)
            worst_drop = std::max(worst_drop, ((*prof)[m - 1] - (*prof)[m]) / (1.0 + (*prof)[m]));
        worst_final = std::max(worst_final, std::abs(prof1.back() - full1) / (1.0 + full1));
        worst_final = std::max(worst_final, std::abs(cross.back() - fullcross) / (1.0 + std::abs(fullcross)));
        worst_final = std::max(worst_final, std::abs(diag.back() - fulldiag) / (1.0 + fulldiag));
        for (std::size_t m = 0; m < prof1.size(); ++m) {
          worst_excess = std::max(worst_excess, (prof1[m] - full1) / (1.0 + full1));
          worst_excess = std::max(worst_excess, (cross[m] - fullcross) / (1.0 + std::abs(fullcross)));
          worst_excess = std::max(worst_excess, (diag[m] - fulldiag) / (1.0 + fulldiag));
        }
      }
  }
  out << "max profile drop " << worst_drop << ", max excess over full " << worst_excess
      << ", final gap " << worst_final;
  return worst_drop <= 1e-12 && worst_excess <= 1e-10 && worst_final <= 1e-10;
}

// ---------------------------------------------------------------------------
// 7. RDE closed forms: deterministic and pathwise exponentials, Jacobian
//    against finite differences.

bool criterion_rde(std::ostringstream& out) {
  bool ok = true;

  const auto drift_grid = cr::dyadic_grid(10);
  std::vector<cr::Vec> tvals;
  for (double t : drift_grid) tvals.push_back({t});
  const auto det = cr::rde_solve(cr::scalar_linear_field(), {1.0},
                                 cr::lift_piecewise_linear(drift_grid, tvals));
  const double det_err = std::abs(det.y.back()[0] - std::exp(1.0));
  ok = ok && det_err <= 1e-6;

  const cr::PathSampler sampler = cr::make_sampler({cr::brownian_kernel(cr::dyadic_grid(7))});
  double path_err = 0.0;
  for (int s = 0; s < 5; ++s) {
    cr::Rng stream = cr::Rng(701).child(static_cast<std::uint64_t>(s));
    const auto vals = sampler.sample(stream);
    const auto sol = cr::rde_solve(cr::scalar_linear_field(), {1.0},
                                   cr::lift_piecewise_linear(sampler.grid, vals), 0, {128});
    for (std::size_t i = 0; i < sol.y.size(); ++i) {
      const double exact = std::exp(vals[i][0] - vals[0][0]);
      path_err = std::max(path_err, std::abs(sol.y[i][0] - exact) / (1.0 + exact));
    }
  }
  ok = ok && path_err <= 1e-5;

  const cr::PathSampler jsampler =
      cr::make_sampler(cr::independent_copies(cr::brownian_kernel(cr::uniform_grid(64)), 2));
  cr::Rng jstream = cr::Rng(702);
  const cr::Level2Path jx = cr::lift_piecewise_linear(jsampler.grid, jsampler.sample(jstream));
  const cr::VectorFieldSet f = cr::tanh_fields(3, 2, 0.9, 31);
  const cr::Vec y0{0.3, -0.1, 0.2};
  const auto jac = cr::rde_jacobian(f, y0, jx);
  double jac_err = 0.0;
  const double eps = 1e-5;
  for (int j = 0; j < 3; ++j) {
    cr::Vec yp = y0, ym = y0;
    yp[static_cast<std::size_t>(j)] += eps;
    ym[static_cast<std::size_t>(j)] -= eps;
    const cr::Vec up = cr::rde_solve(f, yp, jx).y.back();
    const cr::Vec um = cr::rde_solve(f, ym, jx).y.back();
    for (int i = 0; i < 3; ++i) {
      const double fdiff = (up[static_cast<std::size_t>(i)] - um[static_cast<std::size_t>(i)]) / (2 * eps);
      jac_err = std::max(jac_err, std::abs(jac.jac.back().at(i, j) - fdiff) / (1.0 + std::abs(fdiff)));
    }
  }
  ok = ok && jac_err <= 1e-3;

  out << "deterministic " << det_err << ", pathwise " << path_err << ", jacobian " << jac_err;
  return ok;
}

// ---------------------------------------------------------------------------
// 8. Malliavin derivative equation against translation finite differences.

bool criterion_malliavin(std::ostringstream& out) {
  struct Model {
    const char* name;
    cr::EnhancedProcess proc;
    cr::VectorFieldSet field;
    cr::Vec y0;
  };
  std::vector<Model> models;
  models.push_back({"order1", cr::make_enhanced_process({cr::brownian_kernel(cr::dyadic_grid(6))}),
                    cr::scalar_linear_field(),
                    {1.0}});
  {
    const auto grid = cr::uniform_grid(32);
    models.push_back({"order2",
                      cr::make_enhanced_process({cr::product_kernel(
                          {cr::brownian_kernel(grid), cr::fbm_kernel(0.4, grid)})}),
                      cr::tanh_fields(2, 1, 0.9, 33),
                      {0.3, -0.2}});
  }
  const double eps = 1e-4;
  bool ok = true;
  out << "max relative error";
  for (const Model& model : models) {
    double worst = 0.0;
    for (int s = 0; s < 20; ++s) {
      cr::Rng stream = cr::Rng(801).child(static_cast<std::uint64_t>(s));
      const auto sample = cr::enhance_sample(model.proc, stream);
      const auto h = random_direction(model.proc.ambient, stream);
      const auto sol = cr::malliavin_rde(model.field, model.y0, model.proc, sample, h, 1);
      const auto yp = cr::rde_solve(model.field, model.y0,
                                    cr::level0_lift(model.proc, cr::translate(model.proc, sample, h, eps))).y;
      const auto ym = cr::rde_solve(model.field, model.y0,
                                    cr::level0_lift(model.proc, cr::translate(model.proc, sample, h, -eps))).y;
      for (std::size_t i = 0; i < sol.y.size(); ++i)
        for (std::size_t j = 0; j < model.y0.size(); ++j) {
          const double fdiff = (yp[i][j] - ym[i][j]) / (2 * eps);
          worst = std::max(worst, std::abs(sol.z1[i][j] - fdiff) / (1.0 + std::abs(fdiff)));
        }
    }
    out << " " << model.name << " " << worst;
    ok = ok && worst <= 1e-2;
  }
  return ok;
}

// ---------------------------------------------------------------------------
// 9. Greedy partition bounds on every sample of the enhanced lifts.

bool criterion_greedy_bounds(std::ostringstream& out) {
  struct Batch {
    const char* name;
    cr::EnhancedProcess proc;
    int samples;
  };
  std::vector<Batch> batches;
  batches.push_back({"order1", cr::make_enhanced_process({cr::brownian_kernel(cr::uniform_grid(16))}), 8000});
  {
    const auto grid = cr::uniform_grid(8);
    batches.push_back({"order2",
                       cr::make_enhanced_process({cr::product_kernel(
                           {cr::brownian_kernel(grid), cr::brownian_kernel(grid)})}),
                       2500});
  }
  const double alpha = 0.1, p = 2.5;
  int total = 0, alpha_ok = 0, cert_ok = 0;
  for (const Batch& batch : batches)
    for (int s = 0; s < batch.samples; ++s) {
      cr::Rng stream = cr::Rng(901).child(static_cast<std::uint64_t>(s));
      const cr::Level2Path x =
          cr::lift_enhanced(batch.proc, cr::enhance_sample(batch.proc, stream));
      const cr::PartitionStats st = cr::greedy(x, alpha, p);
      ++total;
      alpha_ok += st.alpha_bound_ok ? 1 : 0;
      cert_ok += st.certificate_ok ? 1 : 0;
    }
  out << "alpha bound " << alpha_ok << "/" << total << ", certificate " << cert_ok << "/" << total;
  return total >= 10000 && alpha_ok == total && cert_ok == total;
}

// ---------------------------------------------------------------------------
// 10. Translation growth slopes under the power bound.

bool criterion_translation(std::ostringstream& out) {
  struct Case {
    cr::EnhancedProcess proc;
    int order;
  };
  std::vector<Case> cases;
  cases.push_back({cr::make_enhanced_process({cr::brownian_kernel(cr::uniform_grid(16))}), 1});
  {
    const auto grid = cr::uniform_grid(8);
    cases.push_back({cr::make_enhanced_process({cr::product_kernel(
                         {cr::brownian_kernel(grid), cr::brownian_kernel(grid)})}),
                     2});
  }
  const double p = 2.5;
  const std::vector<double> rs{2, 4, 8, 16};
  bool ok = true;
  cr::Rng hrng(1001);
  out << "slope/bound";
  for (std::size_t ci = 0; ci < cases.size(); ++ci) {
    const cr::SymTensor h = random_direction(cases[ci].proc.ambient, hrng);
    const cr::TranslationGrowth g =
        cr::translation_growth(cases[ci].proc, h, rs, p, 200, cr::Rng(1002).child(ci));
    const double bound = cases[ci].order * p + p / 2.0 + 0.3;
    out << " n" << cases[ci].order << " " << g.slope << "/" << bound;
    ok = ok && g.slope <= bound;
  }
  return ok;
}

// ---------------------------------------------------------------------------
// 11. Tail shape of the crossing count.

bool criterion_tail(std::ostringstream& out) {
  const cr::KernelPath k = cr::brownian_kernel(cr::uniform_grid(64));
  std::vector<int> thresholds;
  for (int t = 3; t <= 20; ++t) thresholds.push_back(t);
  const cr::TailReport rep = cr::tail_scan(k, 0.04, 2.5, thresholds, 6000, cr::Rng(1101));
  int fit_points = 0;
  bool enough = true;
  for (std::size_t m = 0; m < rep.used.size(); ++m)
    if (rep.used[m]) {
      ++fit_points;
      enough = enough && rep.exceed[m] >= 20;
    }
  out << "slope " << rep.slope << ", r2 " << rep.r2 << ", fit points " << fit_points;
  return !rep.degenerate && rep.slope < 0.0 && rep.r2 >= 0.8 && fit_points >= 3 && enough;
}

// ---------------------------------------------------------------------------
// 12. Rate function closed forms and infeasibility detection.

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

bool criterion_rate(std::ostringstream& out) {
  bool ok = true;
  cr::RateOptions opts;
  opts.multistarts = 8;

  const cr::KernelPath brown = cr::brownian_kernel(cr::uniform_grid(16));
  const auto lin = cr::rate_function(brown, brown.grid, opts);
  ok = ok && lin.status == cr::RateStatus::feasible && std::abs(lin.value - 0.5) <= 1e-4;
  out << "linear " << lin.value;

  const cr::KernelPath quad = quadratic_kernel(4);
  for (double c : {0.5, 1.0, 2.0}) {
    std::vector<double> target;
    for (double t : quad.grid) target.push_back(c * t);
    const auto res = cr::rate_function(quad, target, opts);
    ok = ok && res.status == cr::RateStatus::feasible && std::abs(res.value - c / 2.0) <= 1e-4;
    out << ", c=" << c << " " << res.value;
  }

  std::vector<double> bad;
  for (double t : quad.grid) bad.push_back(-0.5 * t);
  const auto inf = cr::rate_function(quad, bad, opts);
  ok = ok && inf.status == cr::RateStatus::infeasible;
  out << ", c=-0.5 " << (inf.status == cr::RateStatus::infeasible ? "infeasible" : "NOT-FLAGGED");
  return ok;
}

struct Criterion {
  int id;
  const char* name;
  bool (*run)(std::ostringstream&);
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::cerr << "usage: acceptance [--only N]\n";
      return 1;
    }
  }

  const std::vector<Criterion> criteria{
      {1, "algebra-identities-pointwise", criterion_algebra},
      {2, "isometry-and-orthogonality", criterion_isometry},
      {3, "derivative-inner-decomposition", criterion_inner_dk},
      {4, "pvariation-dp-vs-exhaustive", criterion_pvar_oracle},
      {5, "dyadic-lift-convergence", criterion_convergence},
      {6, "spectral-truncation-monotonicity", criterion_kl},
      {7, "rde-closed-forms", criterion_rde},
      {8, "malliavin-rde-vs-translation-fd", criterion_malliavin},
      {9, "greedy-partition-bounds", criterion_greedy_bounds},
      {10, "translation-growth-slopes", criterion_translation},
      {11, "crossing-count-tail-shape", criterion_tail},
      {12, "rate-function-closed-forms", criterion_rate},
  };

  int failures = 0, ran = 0;
  for (const Criterion& c : criteria) {
    if (only != 0 && c.id != only) continue;
    ++ran;
    std::ostringstream detail;
    bool pass = false;
    try {
      pass = c.run(detail);
    } catch (const std::exception& e) {
      detail << "exception: " << e.what();
    }
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << (c.id < 10 ? "0" : "") << c.id << " " << c.name
              << " (" << detail.str() << ")" << std::endl;
    if (!pass) ++failures;
  }
  if (ran == 0) {
    std::cerr << "no criterion matches --only " << only << "\n";
    return 1;
  }
  if (failures == 0) std::cout << "all acceptance criteria passed" << std::endl;
  return failures == 0 ? 0 : failures;
}
