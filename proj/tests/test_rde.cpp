#include "chaosrough/rde.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "chaosrough/kernels.hpp"
#include "chaosrough/rng.hpp"

namespace cr = chaosrough;

namespace {

cr::SymTensor random_direction(int dim, cr::Rng& rng) {
  cr::SymTensor h(1, dim);
  for (int i = 0; i < dim; ++i) h.add({i}, rng.normal());
  return h;
}

cr::Level2Path canonical_time_lift(int cells) {
  const auto grid = cr::uniform_grid(cells);
  std::vector<cr::Vec> values;
  for (double t : grid) values.push_back({t});
  return cr::lift_piecewise_linear(grid, values);
}

cr::Mat matmul(const cr::Mat& a, const cr::Mat& b) {
  cr::Mat c(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int k = 0; k < a.cols; ++k)
      for (int j = 0; j < b.cols; ++j) c.at(i, j) += a.at(i, k) * b.at(k, j);
  return c;
}

// Interprets one symbolic term at a frozen state, dropping the second-order
// area contributions. blocks[o] is the current o-th derivative state.
cr::Vec assemble_terms(const cr::VectorFieldSet& f, const std::vector<cr::DerivativeTerm>& terms,
                       const cr::Vec& y, const std::vector<cr::Vec>& blocks, const cr::Vec& dx) {
  cr::Vec out(y.size(), 0.0);
  for (const auto& term : terms)
    for (int a = 0; a < f.driver_dim; ++a) {
      const double inc = dx[static_cast<std::size_t>(term.x_deriv * f.driver_dim + a)];
      cr::Vec v;
      if (term.y_orders.empty())
        v = f.v(a, y);
      else if (term.y_orders.size() == 1)
        v = f.d1(a, y, blocks[static_cast<std::size_t>(term.y_orders[0] - 1)]);
      else
        v = f.d2(a, y, blocks[static_cast<std::size_t>(term.y_orders[0] - 1)],
                 blocks[static_cast<std::size_t>(term.y_orders[1] - 1)]);
      cr::axpy(term.coeff * inc, v, out);
    }
  return out;
}

}  // namespace

TEST(Rde, AnalyticDerivativesMatchFiniteDifferences) {
  cr::Rng rng(4101);
  cr::Mat a0(2, 2), a1(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      a0.at(i, j) = rng.normal();
      a1.at(i, j) = rng.normal();
    }
  const auto affine = cr::affine_fields({a0, a1}, {{0.3, -0.2}, {0.1, 0.5}});
  EXPECT_LT(cr::validate_derivatives(affine, 4, rng.child(1)), 1e-6);
  const auto smooth = cr::tanh_fields(3, 2, 0.7, 555);
  EXPECT_LT(cr::validate_derivatives(smooth, 4, rng.child(2)), 1e-6);
}

TEST(Rde, DeterministicExponentialIsAccurate) {
  const auto sol = cr::rde_solve(cr::scalar_linear_field(), {1.0}, canonical_time_lift(1 << 10));
  EXPECT_NEAR(sol.y.back()[0], std::exp(1.0), 1e-6);
  EXPECT_EQ(sol.y.size(), sol.grid.size());
  EXPECT_TRUE(sol.z1.empty());
  EXPECT_TRUE(sol.z2.empty());
}

TEST(Rde, ZeroFieldKeepsStateConstant) {
  cr::Mat zero(2, 2);
  const auto f = cr::affine_fields({zero}, {cr::Vec(2, 0.0)});
  const auto sol = cr::rde_solve(f, {0.7, -1.2}, canonical_time_lift(16));
  for (const auto& y : sol.y) {
    EXPECT_DOUBLE_EQ(y[0], 0.7);
    EXPECT_DOUBLE_EQ(y[1], -1.2);
  }
}

TEST(Rde, PathwiseExponentialOnLiftedBrownian) {
  const auto p = cr::make_enhanced_process({cr::brownian_kernel(cr::dyadic_grid(7))});
  const auto f = cr::scalar_linear_field();
  cr::Rng rng(4104);
  for (int trial = 0; trial < 5; ++trial) {
    cr::Rng stream = rng.child(static_cast<std::uint64_t>(trial));
    const auto s = cr::enhance_sample(p, stream);
    const auto x = cr::level0_lift(p, s);
    const auto sol = cr::rde_solve(f, {1.0}, x, 0, {.substeps = 128});
    for (std::size_t i = 0; i < sol.y.size(); ++i)
      EXPECT_NEAR(sol.y[i][0], std::exp(x.level1[i][0]), 1e-5);
  }
}

TEST(Rde, SubstepRefinementIsSecondOrder) {
  const auto p = cr::make_enhanced_process(
      cr::independent_copies(cr::brownian_kernel(cr::uniform_grid(16)), 2));
  cr::Rng rng(4105);
  const auto s = cr::enhance_sample(p, rng);
  const auto x = cr::level0_lift(p, s);
  const auto f = cr::tanh_fields(2, 2, 1.0, 77);
  const cr::Vec y0 = {0.4, -0.3};
  const auto ref = cr::rde_solve(f, y0, x, 0, {.substeps = 256}).y.back();
  const auto err = [&](int sub) {
    const auto y = cr::rde_solve(f, y0, x, 0, {.substeps = sub}).y.back();
    return cr::norm2(cr::sub(y, ref));
  };
  const double e1 = err(1), e2 = err(2);
  EXPECT_GT(e1, 0.0);
  EXPECT_GE(e1 / e2, std::pow(2.0, 1.5));
}

TEST(Rde, JacobianMatchesClosedFormAndFiniteDifference) {
  const auto pb = cr::make_enhanced_process({cr::brownian_kernel(cr::dyadic_grid(6))});
  cr::Rng rng(4106);
  const auto sb = cr::enhance_sample(pb, rng);
  const auto xb = cr::level0_lift(pb, sb);
  const auto lin = cr::rde_jacobian(cr::scalar_linear_field(), {0.8}, xb);
  for (std::size_t i = 0; i < lin.y.size(); ++i)
    EXPECT_NEAR(lin.jac[i].at(0, 0), lin.y[i][0] / 0.8, 1e-10);
  EXPECT_FALSE(lin.det_underflow);
  EXPECT_GT(lin.min_abs_det, 0.0);

  const auto p2 = cr::make_enhanced_process(
      cr::independent_copies(cr::brownian_kernel(cr::uniform_grid(64)), 2));
  const auto s2 = cr::enhance_sample(p2, rng);
  const auto x2 = cr::level0_lift(p2, s2);
  const auto f = cr::tanh_fields(3, 2, 0.9, 91);
  const cr::Vec y0 = {0.2, -0.1, 0.4};
  const auto jac = cr::rde_jacobian(f, y0, x2).jac.back();
  const double eps = 1e-5;
  for (int j = 0; j < 3; ++j) {
    cr::Vec yp = y0, ym = y0;
    yp[static_cast<std::size_t>(j)] += eps;
    ym[static_cast<std::size_t>(j)] -= eps;
    const auto up = cr::rde_solve(f, yp, x2).y.back();
    const auto um = cr::rde_solve(f, ym, x2).y.back();
    for (int i = 0; i < 3; ++i) {
      const double fd = (up[static_cast<std::size_t>(i)] - um[static_cast<std::size_t>(i)]) / (2 * eps);
      EXPECT_NEAR(fd, jac.at(i, j), 1e-3 * (1.0 + std::abs(jac.at(i, j))));
    }
  }
}

TEST(Rde, JacobianComposesAcrossSplit) {
  const auto p = cr::make_enhanced_process(
      cr::independent_copies(cr::brownian_kernel(cr::uniform_grid(32)), 2));
  cr::Rng rng(4107);
  const auto s = cr::enhance_sample(p, rng);
  const auto x = cr::level0_lift(p, s);
  const auto f = cr::tanh_fields(2, 2, 0.8, 17);
  const cr::Vec y0 = {0.5, 0.1};
  const auto full = cr::rde_jacobian(f, y0, x);
  const int mid = 13;
  const std::vector<double> sub_grid(x.grid.begin() + mid, x.grid.end());
  const std::vector<cr::Vec> sub_values(x.level1.begin() + mid, x.level1.end());
  const auto tail = cr::rde_jacobian(f, full.y[mid], cr::lift_piecewise_linear(sub_grid, sub_values));
  const cr::Mat composed = matmul(tail.jac.back(), full.jac[mid]);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(full.jac.back().at(i, j), composed.at(i, j), 1e-8);
  for (std::size_t k = 0; k < tail.y.size(); ++k)
    EXPECT_NEAR(tail.y[k][0], full.y[static_cast<std::size_t>(mid) + k][0], 1e-10);
}

TEST(Rde, MalliavinMatchesClosedFormForBrownianExponential) {
  const auto p = cr::make_enhanced_process({cr::brownian_kernel(cr::dyadic_grid(8))});
  const auto f = cr::scalar_linear_field();
  cr::Rng rng(4108);
  const auto s = cr::enhance_sample(p, rng);
  const auto h = random_direction(p.ambient, rng);
  const auto u = cr::pairing_path(p, s, 0, 1, h);
  const auto sol = cr::malliavin_rde(f, {1.0}, p, s, h, 1, {.substeps = 4});
  for (std::size_t i = 0; i < sol.y.size(); ++i) {
    const double expect = sol.y[i][0] * u[i];
    EXPECT_NEAR(sol.z1[i][0], expect, 1e-3 * (1.0 + std::abs(expect)));
  }
}

TEST(Rde, MalliavinFirstDerivativeMatchesFiniteDifference) {
  struct Case {
    cr::EnhancedProcess p;
    cr::VectorFieldSet f;
    cr::Vec y0;
  };
  std::vector<Case> cases;
  cases.push_back({cr::make_enhanced_process({cr::brownian_kernel(cr::dyadic_grid(6))}),
                   cr::scalar_linear_field(),
                   {1.0}});
  {
    const auto grid = cr::uniform_grid(32);
    cases.push_back({cr::make_enhanced_process({cr::product_kernel(
                         {cr::brownian_kernel(grid), cr::fbm_kernel(0.4, grid)})}),
                     cr::tanh_fields(2, 1, 0.9, 33),
                     {0.3, -0.2}});
  }
  cr::Rng rng(4109);
  const double eps = 1e-4;
  for (std::size_t c = 0; c < cases.size(); ++c)
    for (int trial = 0; trial < 3; ++trial) {
      cr::Rng stream = rng.child(10 * c + static_cast<std::uint64_t>(trial));
      const auto& p = cases[c].p;
      const auto& f = cases[c].f;
      const auto s = cr::enhance_sample(p, stream);
      const auto h = random_direction(p.ambient, stream);
      const auto sol = cr::malliavin_rde(f, cases[c].y0, p, s, h, 1);
      const auto yp =
          cr::rde_solve(f, cases[c].y0, cr::level0_lift(p, cr::translate(p, s, h, eps))).y;
      const auto ym =
          cr::rde_solve(f, cases[c].y0, cr::level0_lift(p, cr::translate(p, s, h, -eps))).y;
      for (std::size_t i = 0; i < sol.y.size(); ++i)
        for (std::size_t j = 0; j < cases[c].y0.size(); ++j) {
          const double fd = (yp[i][j] - ym[i][j]) / (2 * eps);
          EXPECT_NEAR(sol.z1[i][j], fd, 1e-5 * (1.0 + std::abs(fd)));
        }
    }
}

TEST(Rde, MalliavinSecondDerivativeMatchesFiniteDifference) {
  struct Case {
    cr::EnhancedProcess p;
    cr::VectorFieldSet f;
    cr::Vec y0;
  };
  std::vector<Case> cases;
  cases.push_back({cr::make_enhanced_process({cr::brownian_kernel(cr::dyadic_grid(6))}),
                   cr::tanh_fields(2, 1, 0.8, 44),
                   {0.4, 0.1}});
  {
    const auto grid = cr::uniform_grid(32);
    cases.push_back({cr::make_enhanced_process({cr::product_kernel(
                         {cr::brownian_kernel(grid), cr::fbm_kernel(0.4, grid)})}),
                     cr::tanh_fields(2, 1, 0.7, 45),
                     {-0.1, 0.2}});
  }
  cr::Rng rng(4110);
  const double eps = 1e-3;
  for (std::size_t c = 0; c < cases.size(); ++c)
    for (int trial = 0; trial < 2; ++trial) {
      cr::Rng stream = rng.child(10 * c + static_cast<std::uint64_t>(trial));
      const auto& p = cases[c].p;
      const auto& f = cases[c].f;
      const auto s = cr::enhance_sample(p, stream);
      const auto h = random_direction(p.ambient, stream);
      const auto sol = cr::malliavin_rde(f, cases[c].y0, p, s, h, 2);
      const auto y0v = cr::rde_solve(f, cases[c].y0, cr::level0_lift(p, s)).y;
      const auto yp =
          cr::rde_solve(f, cases[c].y0, cr::level0_lift(p, cr::translate(p, s, h, eps))).y;
      const auto ym =
          cr::rde_solve(f, cases[c].y0, cr::level0_lift(p, cr::translate(p, s, h, -eps))).y;
      for (std::size_t i = 0; i < sol.y.size(); ++i)
        for (std::size_t j = 0; j < cases[c].y0.size(); ++j) {
          EXPECT_NEAR(sol.y[i][j], y0v[i][j], 1e-12);
          const double fd = (yp[i][j] - 2 * y0v[i][j] + ym[i][j]) / (eps * eps);
          EXPECT_NEAR(sol.z2[i][j], fd, 1e-3 * (1.0 + std::abs(fd)));
        }
    }
}

TEST(Rde, DerivativePairingIsHomogeneousInDirection) {
  const auto grid = cr::uniform_grid(16);
  const auto p = cr::make_enhanced_process(
      {cr::product_kernel({cr::brownian_kernel(grid), cr::fbm_kernel(0.6, grid)})});
  const auto f = cr::tanh_fields(2, 1, 0.8, 66);
  cr::Rng rng(4111);
  const auto s = cr::enhance_sample(p, rng);
  const auto h = random_direction(p.ambient, rng);
  const double c = 1.7;
  const auto base = cr::malliavin_rde(f, {0.2, -0.3}, p, s, h, 2);
  const auto scaled = cr::malliavin_rde(f, {0.2, -0.3}, p, s, c * h, 2);
  for (std::size_t i = 0; i < base.y.size(); ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      EXPECT_NEAR(scaled.z1[i][j], c * base.z1[i][j], 1e-12 * (1.0 + std::abs(base.z1[i][j])));
      EXPECT_NEAR(scaled.z2[i][j], c * c * base.z2[i][j],
                  1e-12 * (1.0 + std::abs(base.z2[i][j])));
    }
}

TEST(Rde, PartitionAndTermGeneration) {
  const int bell[] = {1, 1, 2, 5, 15};
  for (int k = 0; k <= 4; ++k) {
    const auto parts = cr::set_partitions(k);
    EXPECT_EQ(static_cast<int>(parts.size()), bell[k]);
    for (const auto& part : parts) {
      std::vector<int> seen;
      for (const auto& block : part) {
        EXPECT_FALSE(block.empty());
        seen.insert(seen.end(), block.begin(), block.end());
      }
      std::sort(seen.begin(), seen.end());
      EXPECT_EQ(static_cast<int>(seen.size()), k);
      for (int e = 0; e < k; ++e) EXPECT_EQ(seen[static_cast<std::size_t>(e)], e);
    }
  }

  const auto t1 = cr::derivative_equation_terms(1, 3);
  ASSERT_EQ(t1.size(), 2u);
  EXPECT_EQ(t1[0].vf_order, 1);
  EXPECT_EQ(t1[0].y_orders, std::vector<int>{1});
  EXPECT_EQ(t1[0].x_deriv, 0);
  EXPECT_EQ(t1[1].vf_order, 0);
  EXPECT_TRUE(t1[1].y_orders.empty());
  EXPECT_EQ(t1[1].x_deriv, 1);
  EXPECT_DOUBLE_EQ(t1[1].coeff, 1.0);

  const auto t2 = cr::derivative_equation_terms(2, 2);
  ASSERT_EQ(t2.size(), 4u);
  EXPECT_EQ(t2[0].y_orders, std::vector<int>{2});
  EXPECT_EQ(t2[1].y_orders, (std::vector<int>{1, 1}));
  EXPECT_EQ(t2[2].y_orders, std::vector<int>{1});
  EXPECT_EQ(t2[2].x_deriv, 1);
  EXPECT_DOUBLE_EQ(t2[2].coeff, 2.0);
  EXPECT_EQ(t2[3].x_deriv, 2);

  const auto low = cr::derivative_equation_terms(2, 1);
  EXPECT_EQ(low.size(), 3u);
  for (const auto& term : low) EXPECT_LE(term.x_deriv, 1);

  EXPECT_EQ(cr::derivative_equation_terms(3, 3).size(), 9u);
  EXPECT_THROW(cr::derivative_equation_terms(0, 1), std::invalid_argument);
  EXPECT_THROW(cr::derivative_equation_terms(1, 0), std::invalid_argument);
}

TEST(Rde, TermListAssemblyMatchesSolverStep) {
  const auto f = cr::tanh_fields(2, 1, 0.9, 88);
  cr::Rng rng(4113);
  const std::vector<double> grid = {0.0, 0.5, 1.0};
  std::vector<cr::Vec> values(3, cr::Vec(3, 0.0));
  for (int i = 1; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      values[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          values[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j)] + 1e-3 * rng.normal();
  const auto joint = cr::lift_piecewise_linear(grid, values);
  const auto sol = cr::rde_solve(f, {0.3, -0.4}, joint, 2);

  const cr::Vec dx = joint.increment1(1, 2);
  const std::vector<cr::Vec> blocks = {sol.z1[1], sol.z2[1]};
  const auto z_step = assemble_terms(f, cr::derivative_equation_terms(1, 2), sol.y[1], blocks, dx);
  const auto zz_step = assemble_terms(f, cr::derivative_equation_terms(2, 2), sol.y[1], blocks, dx);
  for (int j = 0; j < 2; ++j) {
    const double dz = sol.z1[2][static_cast<std::size_t>(j)] - sol.z1[1][static_cast<std::size_t>(j)];
    const double dzz = sol.z2[2][static_cast<std::size_t>(j)] - sol.z2[1][static_cast<std::size_t>(j)];
    EXPECT_NEAR(z_step[static_cast<std::size_t>(j)], dz, 1e-2 * (std::abs(dz) + 1e-9));
    EXPECT_NEAR(zz_step[static_cast<std::size_t>(j)], dzz, 1e-2 * (std::abs(dzz) + 1e-9));
  }
}

TEST(Rde, SolutionRespondsContinuouslyToDriver) {
  const auto p = cr::make_enhanced_process({cr::brownian_kernel(cr::uniform_grid(32))});
  cr::Rng rng(4114);
  const auto s = cr::enhance_sample(p, rng);
  const auto x = cr::level0_lift(p, s);
  auto bumped = x.level1;
  bumped[16][0] += 1e-6;
  const auto xb = cr::lift_piecewise_linear(x.grid, bumped);
  const auto f = cr::scalar_linear_field();
  const double y1 = cr::rde_solve(f, {1.0}, x).y.back()[0];
  const double y2 = cr::rde_solve(f, {1.0}, xb).y.back()[0];
  EXPECT_NE(y1, y2);
  EXPECT_LT(std::abs(y1 - y2), 1e-4);
}

TEST(Rde, MomentScanFlagsStableMoments) {
  const auto p = cr::make_enhanced_process({cr::brownian_kernel(cr::uniform_grid(32))});
  const auto f = cr::scalar_linear_field();
  const auto quantity = [&](cr::Rng& stream) {
    const auto s = cr::enhance_sample(p, stream);
    return cr::rde_solve(f, {1.0}, cr::level0_lift(p, s)).y.back()[0];
  };
  const auto scan = cr::moment_scan(quantity, {0.5, 1.0, 2.0}, 4000, cr::Rng(4115));
  ASSERT_EQ(scan.moment.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    const double expect = std::exp(scan.p[i] * scan.p[i] / 2.0);
    EXPECT_NEAR(scan.moment[i], expect, 5.0 * scan.se[i] + 0.01 * expect);
    EXPECT_EQ(scan.stable[i], 1);
  }
  EXPECT_EQ(scan.largest_stable, 2);

  cr::Mat zero(1, 1);
  const auto fz = cr::affine_fields({zero}, {cr::Vec(1, 0.0)});
  const auto qz = [&](cr::Rng& stream) {
    const auto s = cr::enhance_sample(p, stream);
    return cr::rde_solve(fz, {0.0}, cr::level0_lift(p, s)).y.back()[0];
  };
  const auto zscan = cr::moment_scan(qz, {1.0, 4.0}, 1000, cr::Rng(4116));
  EXPECT_DOUBLE_EQ(zscan.moment[0], 0.0);
  EXPECT_EQ(zscan.largest_stable, 1);
  EXPECT_THROW(cr::moment_scan(quantity, {1.0}, 500, cr::Rng(1)), std::invalid_argument);
}

TEST(Rde, NonFiniteStateIsReported) {
  cr::VectorFieldSet f;
  f.state_dim = 1;
  f.driver_dim = 1;
  f.v = [](int, const cr::Vec& y) { return cr::Vec{y[0] * y[0]}; };
  f.d1 = [](int, const cr::Vec& y, const cr::Vec& z) { return cr::Vec{2 * y[0] * z[0]}; };
  const auto grid = cr::uniform_grid(16);
  std::vector<cr::Vec> values;
  for (double t : grid) values.push_back({16.0 * t});
  const auto x = cr::lift_piecewise_linear(grid, values);
  try {
    cr::rde_solve(f, {2.0}, x);
    FAIL() << "expected divergence";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("node"), std::string::npos);
  }
}

TEST(Rde, MissingPiecesAreRejected) {
  const auto f = cr::scalar_linear_field();
  const auto x = canonical_time_lift(4);
  EXPECT_THROW(cr::rde_solve(f, {1.0, 2.0}, x), std::invalid_argument);
  EXPECT_THROW(cr::rde_solve(f, {1.0}, x, 3), std::invalid_argument);
  EXPECT_THROW(cr::rde_solve(f, {1.0}, x, 1), std::invalid_argument);

  cr::VectorFieldSet bare;
  bare.state_dim = 1;
  bare.driver_dim = 1;
  bare.v = f.v;
  bare.d1 = f.d1;
  std::vector<cr::Vec> wide(x.grid.size(), cr::Vec(2, 0.0));
  const auto joint1 = cr::lift_piecewise_linear(x.grid, wide);
  try {
    cr::rde_solve(bare, {1.0}, joint1, 1);
    FAIL() << "expected missing derivative";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("second"), std::string::npos);
  }
  bare.d2 = f.d2;
  std::vector<cr::Vec> wider(x.grid.size(), cr::Vec(3, 0.0));
  const auto joint2 = cr::lift_piecewise_linear(x.grid, wider);
  try {
    cr::rde_solve(bare, {1.0}, joint2, 2);
    FAIL() << "expected missing derivative";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("third"), std::string::npos);
  }
  bare.d2 = nullptr;
  EXPECT_THROW(cr::rde_jacobian(bare, {1.0}, x), std::invalid_argument);

  const auto p = cr::make_enhanced_process({cr::brownian_kernel(cr::uniform_grid(4))});
  cr::Rng rng(4117);
  const auto s = cr::enhance_sample(p, rng);
  const auto h = random_direction(p.ambient, rng);
  EXPECT_THROW(cr::malliavin_joint_lift(p, s, h, 3), std::invalid_argument);
  EXPECT_THROW(cr::affine_fields({}, {}), std::invalid_argument);
  EXPECT_THROW(cr::moment_scan([](cr::Rng&) { return 0.0; }, {}, 2000, cr::Rng(1)),
               std::invalid_argument);
}

TEST(Rde, TimeAugmentedDriverSolvesDrift) {
  const auto grid = cr::uniform_grid(1 << 10);
  cr::Rng rng(4118);
  std::vector<cr::Vec> values;
  double walk = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    values.push_back({walk, grid[i]});
    walk += 0.05 * rng.normal();
  }
  const auto x = cr::lift_piecewise_linear(grid, values);
  cr::Mat zero(1, 1), one(1, 1);
  one.at(0, 0) = 1.0;
  const auto f = cr::affine_fields({zero, one}, {cr::Vec(1, 0.0), cr::Vec(1, 0.0)});
  const auto sol = cr::rde_solve(f, {1.0}, x);
  EXPECT_NEAR(sol.y.back()[0], std::exp(1.0), 1e-6);
}
