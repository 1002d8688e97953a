#include "chaosrough/io.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include "chaosrough/kernels.hpp"
#include "chaosrough/parallel.hpp"
#include "chaosrough/rng.hpp"
#include "chaosrough/roughlift.hpp"

namespace cr = chaosrough;

namespace {

cr::SymTensor random_tensor(int order, int dim, cr::Rng& rng) {
  cr::SymTensor t(order, dim);
  const auto idxs = cr::all_multi_indices(order, dim);
  for (const auto& idx : idxs)
    if (rng.uniform() < 0.6) t.add(idx, rng.normal());
  return t;
}

std::string temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / "chaosrough_io_test";
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace

TEST(Format, SeventeenDigitsRoundTrip) {
  const std::vector<double> tricky{1.0 / 3.0, 0.1, -0.0, 1e-300, 9.87654321e12,
                                   -2.2250738585072014e-308, 123456789.123456789};
  for (double v : tricky) {
    const std::string s = cr::format_double(v);
    EXPECT_EQ(std::strtod(s.c_str(), nullptr), v) << s;
  }
  EXPECT_EQ(cr::format_double(1.0), "1");
}

TEST(CsvTable, BuildsHeaderAndRows) {
  cr::Csv c({"a", "b"});
  c.add_row({"1", cr::format_double(0.5)});
  c.add_row({"2", cr::format_double(-3.0)});
  EXPECT_EQ(c.text(), "a,b\n1,0.5\n2,-3\n");
}

TEST(CsvTable, RejectsMalformedCells) {
  cr::Csv c({"a", "b"});
  EXPECT_THROW(c.add_row({"1"}), std::invalid_argument);
  EXPECT_THROW(c.add_row({"1", "x,y"}), std::invalid_argument);
  EXPECT_THROW(c.add_row({"1", ""}), std::invalid_argument);
  EXPECT_THROW(c.add_row({"1", "line\nbreak"}), std::invalid_argument);
  EXPECT_THROW(cr::Csv({}), std::invalid_argument);
}

TEST(TensorJson, RoundTripIsExact) {
  cr::Rng rng(9001);
  for (int order : {1, 2, 3})
    for (int dim : {1, 3}) {
      const cr::SymTensor t = random_tensor(order, dim, rng);
      const cr::Json j = cr::tensor_to_json(t);
      EXPECT_EQ(j.at("order").get<int>(), order);
      EXPECT_EQ(j.at("dim").get<int>(), dim);
      const cr::SymTensor back = cr::tensor_from_json(j);
      EXPECT_EQ(back.order(), t.order());
      EXPECT_EQ(back.dim(), t.dim());
      ASSERT_EQ(back.coeffs().size(), t.coeffs().size());
      auto it = t.coeffs().begin();
      for (const auto& [idx, c] : back.coeffs()) {
        EXPECT_EQ(idx, it->first);
        EXPECT_EQ(c, it->second);
        ++it;
      }
    }
}

TEST(TensorJson, SerializedTextIsStable) {
  cr::SymTensor t(2, 2);
  t.add({0, 1}, 0.25);
  t.add({1, 1}, -2.0);
  const std::string once = cr::tensor_to_json(t).dump();
  const std::string twice = cr::tensor_to_json(cr::tensor_from_json(cr::Json::parse(once))).dump();
  EXPECT_EQ(once, twice);
}

TEST(KernelJson, RoundTripPreservesCovariance) {
  const auto grid = cr::uniform_grid(6);
  for (const auto& k : {cr::brownian_kernel(grid), cr::fbm_kernel(0.4, grid),
                        cr::product_kernel({cr::brownian_kernel(grid), cr::fbm_kernel(0.35, grid)})}) {
    const cr::KernelPath back = cr::kernel_from_json(cr::kernel_to_json(k));
    EXPECT_EQ(back.order, k.order);
    EXPECT_EQ(back.label, k.label);
    EXPECT_EQ(back.grid, k.grid);
    EXPECT_EQ(back.nodes_materialized, k.nodes_materialized);
    ASSERT_EQ(back.factors.size(), k.factors.size());
    for (int i = 0; i < k.nodes(); ++i)
      for (int j = 0; j < k.nodes(); ++j)
        EXPECT_EQ(cr::covariance(back, i, j), cr::covariance(k, i, j));
  }
}

TEST(KernelJson, FactorsOnlyKernelRoundTrips) {
  const auto grid = cr::uniform_grid(5);
  const auto k = cr::product_kernel({cr::brownian_kernel(grid), cr::brownian_kernel(grid)},
                                    /*materialize_nodes=*/false);
  ASSERT_FALSE(k.nodes_materialized);
  const cr::KernelPath back = cr::kernel_from_json(cr::kernel_to_json(k));
  EXPECT_FALSE(back.nodes_materialized);
  EXPECT_TRUE(back.kernels.empty());
  ASSERT_EQ(back.factors.size(), 2u);
  EXPECT_EQ(cr::covariance(back, 2, 4), cr::covariance(k, 2, 4));
  EXPECT_THROW(back.at(0), std::logic_error);
}

TEST(LiftCsv, ShapeAndValuesMatchThePath) {
  cr::Rng rng(9002);
  const auto sampler = cr::make_sampler(cr::independent_copies(cr::brownian_kernel(cr::uniform_grid(8)), 2));
  const cr::Level2Path x = cr::lift_piecewise_linear(sampler.grid, sampler.sample(rng));
  const cr::Csv csv = cr::lift_to_csv(x);
  const int w = x.width();
  ASSERT_EQ(static_cast<int>(csv.columns.size()), 2 + w + w * w);
  ASSERT_EQ(static_cast<int>(csv.rows.size()), x.nodes());
  EXPECT_EQ(csv.columns[2], "x0");
  EXPECT_EQ(csv.columns.back(), "a1_1");
  EXPECT_EQ(csv.rows[3][1], cr::format_double(x.grid[3]));
  EXPECT_EQ(csv.rows[3][2], cr::format_double(x.level1[3][0]));
  EXPECT_EQ(csv.rows[5][2 + w + 1], cr::format_double(x.cumulative2[5].at(0, 1)));
}

TEST(Files, TextAndJsonRoundTrip) {
  const std::string dir = temp_dir();
  const std::string path = dir + "/roundtrip.json";
  const cr::Json j{{"name", "fixture"}, {"values", {1.5, -2.0}}, {"count", 3}};
  cr::write_json_file(path, j);
  const std::string raw = cr::read_text_file(path);
  EXPECT_EQ(raw.back(), '\n');
  EXPECT_EQ(cr::read_json_file(path), j);
  EXPECT_THROW(cr::read_text_file(dir + "/missing.json"), std::runtime_error);
  std::filesystem::remove(path);
}

TEST(Parallel, SlotResultsMatchSerialForEveryThreadCount) {
  const int count = 101;
  std::vector<double> serial(count, 0.0);
  for (int i = 0; i < count; ++i) {
    cr::Rng stream = cr::Rng(4242).child(static_cast<std::uint64_t>(i));
    serial[static_cast<std::size_t>(i)] = stream.normal() + i;
  }
  for (int threads : {1, 2, 3, 8}) {
    std::vector<double> out(count, 0.0);
    cr::parallel_for(count, threads, [&out](int i) {
      cr::Rng stream = cr::Rng(4242).child(static_cast<std::uint64_t>(i));
      out[static_cast<std::size_t>(i)] = stream.normal() + i;
    });
    EXPECT_EQ(out, serial) << "threads=" << threads;
  }
}

TEST(Parallel, PropagatesExceptionsAndChecksArgs) {
  EXPECT_THROW(cr::parallel_for(-1, 2, [](int) {}), std::invalid_argument);
  std::atomic<int> ran{0};
  EXPECT_THROW(cr::parallel_for(50, 4,
                                [&ran](int i) {
                                  ++ran;
                                  if (i == 13) throw std::runtime_error("boom");
                                }),
               std::runtime_error);
  EXPECT_GT(ran.load(), 0);
  cr::parallel_for(0, 4, [](int) { FAIL() << "no work expected"; });
}
