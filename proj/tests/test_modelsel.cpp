#include <doctest.h>

#include <cmath>

#include "pnn/modelsel.hpp"

using namespace pnn;

namespace {

Dataset single_group(const Vector& outputs) {
  Dataset ds;
  ds.inputs = Matrix(outputs.size(), 1, 0.5);
  ds.outputs = outputs;
  ds.group_keys.assign(outputs.size(), 0);
  return ds;
}

}  // namespace

TEST_CASE("group_replicates hand arithmetic") {
  const EmpiricalStats emp = group_replicates(single_group({1.0, 3.0}));
  REQUIRE(emp.groups.size() == 1);
  CHECK(emp.groups[0].mean == 2.0);
  CHECK(emp.groups[0].variance == 2.0);  // n-1 divisor
  CHECK(emp.groups[0].min == 1.0);
  CHECK(emp.groups[0].max == 3.0);
  CHECK(emp.groups[0].count == 2);
  CHECK_FALSE(emp.groups[0].degenerate());
}

TEST_CASE("equal replicate outputs flag the group degenerate") {
  const EmpiricalStats emp = group_replicates(single_group({2.0, 2.0, 2.0}));
  CHECK(emp.groups[0].variance == 0.0);
  CHECK(emp.groups[0].degenerate());
  CHECK(emp.non_degenerate_count() == 0);

  Dataset empty;
  CHECK_THROWS_AS(group_replicates(empty), DomainError);
}

TEST_CASE("cubic test protocol yields 50 groups of 10") {
  const EmpiricalStats emp = group_replicates(gen_cubic({50, 10, 4}));
  CHECK(emp.groups.size() == 50);
  for (const auto& g : emp.groups) CHECK(g.count == 10);
}

TEST_CASE("kl_gaussian closed forms") {
  CHECK(kl_gaussian(0.3, 0.7, 0.3, 0.7) == 0.0);
  CHECK(kl_gaussian(0.0, 1.0, 1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(kl_gaussian(0.0, 1.0, 0.0, 2.0) ==
        doctest::Approx(0.5 * std::log(2.0) + 0.25 - 0.5).epsilon(1e-12));
  CHECK(kl_gaussian(0.0, 1.0, 0.0, 2.0) == doctest::Approx(0.096574).epsilon(1e-5));
  CHECK_THROWS_AS(kl_gaussian(0.0, 0.0, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(kl_gaussian(0.0, 1.0, 0.0, -1.0), DomainError);
}

TEST_CASE("kl_gaussian nonnegativity, identity of indiscernibles, asymmetry") {
  Rng rng(19);
  for (int trial = 0; trial < 2000; ++trial) {
    const double m1 = rng.uniform(-5, 5);
    const double v1 = std::exp(rng.uniform(-4, 3));
    const double m2 = rng.uniform(-5, 5);
    const double v2 = std::exp(rng.uniform(-4, 3));
    const double kl = kl_gaussian(m1, v1, m2, v2);
    CHECK(kl >= 0.0);
    if (kl < 1e-12) {
      CHECK(std::fabs(m1 - m2) < 1e-5);
      CHECK(std::fabs(v1 - v2) / v1 < 1e-5);
    }
  }
  // closed-form witness of asymmetry
  CHECK(kl_gaussian(0, 1, 0, 2) != kl_gaussian(0, 2, 0, 1));
}

TEST_CASE("score_predictions oracle and fixed-ratio cases") {
  const Dataset test_set = gen_cubic({20, 10, 6});
  const EmpiricalStats emp = group_replicates(test_set);

  std::vector<GaussianPrediction> echo;
  std::vector<GaussianPrediction> doubled;
  for (const auto& g : emp.groups) {
    echo.push_back({g.mean, g.variance});
    doubled.push_back({g.mean, 2.0 * g.variance});
  }
  CHECK(score_predictions(echo, emp) == 0.0);
  CHECK(score_predictions(doubled, emp) == doctest::Approx(0.096574).epsilon(1e-4));
}

TEST_CASE("score_predictions rejects an all-degenerate test set") {
  const EmpiricalStats emp = group_replicates(single_group({2.0, 2.0}));
  CHECK_THROWS_AS(score_predictions({{2.0, 1.0}}, emp), DomainError);
  CHECK_THROWS_AS(score_predictions({}, EmpiricalStats{{{}}}), ShapeError);
}

TEST_CASE("degenerate groups are excluded, not fatal") {
  Dataset ds;
  ds.inputs = Matrix(4, 1);
  ds.inputs(0, 0) = ds.inputs(1, 0) = 0.1;
  ds.inputs(2, 0) = ds.inputs(3, 0) = 0.9;
  ds.outputs = {1.0, 1.0, 2.0, 4.0};  // first group has zero spread
  ds.group_keys = {0, 0, 1, 1};
  const EmpiricalStats emp = group_replicates(ds);
  const double score = score_predictions({{1.0, 1.0}, {3.0, 2.0}}, emp);
  CHECK(score == doctest::Approx(kl_gaussian(3.0, 2.0, 3.0, 2.0)).epsilon(1e-12));
}

TEST_CASE("grid_search singleton grid returns that cell") {
  const Dataset train_set = gen_cubic({30, 5, 2});
  const Dataset test_set = gen_cubic({10, 5, 3});
  GridSpec spec{{2}, {4}, 1};
  TrainConfig tc;
  tc.epochs = 5;
  Architecture base;
  base.input_dim = 1;
  const GridResult result =
      grid_search(train_set, test_set, spec, tc, {}, Rng(1), base);
  CHECK(result.cells.size() == 1);
  CHECK(result.best_depth == 2);
  CHECK(result.best_width == 4);
  CHECK(result.cells[0].valid);
}

TEST_CASE("grid_search is deterministic and independent of evaluation order") {
  const Dataset train_set = gen_cubic({30, 5, 2});
  const Dataset test_set = gen_cubic({10, 5, 3});
  GridSpec spec{{1, 2}, {2, 4}, 2};
  TrainConfig tc;
  tc.epochs = 5;
  Architecture base;
  base.input_dim = 1;
  const GridResult serial =
      grid_search(train_set, test_set, spec, tc, {}, Rng(5), base, 1);
  const GridResult parallel =
      grid_search(train_set, test_set, spec, tc, {}, Rng(5), base, 4);
  REQUIRE(serial.cells.size() == parallel.cells.size());
  for (std::size_t i = 0; i < serial.cells.size(); ++i) {
    CHECK(serial.cells[i].kl == parallel.cells[i].kl);
    CHECK(serial.cells[i].valid == parallel.cells[i].valid);
  }
  CHECK(serial.best_depth == parallel.best_depth);
  CHECK(serial.best_width == parallel.best_width);

  // best cell is the argmin of the reported per-cell means
  double best = 1e300;
  std::size_t best_d = 0;
  std::size_t best_w = 0;
  for (std::size_t di = 0; di < 2; ++di) {
    for (std::size_t wi = 0; wi < 2; ++wi) {
      double acc = 0.0;
      for (std::size_t s = 0; s < 2; ++s) acc += serial.cells[(di * 2 + wi) * 2 + s].kl;
      if (acc / 2.0 < best) {
        best = acc / 2.0;
        best_d = spec.depths[di];
        best_w = spec.widths[wi];
      }
    }
  }
  CHECK(serial.best_depth == best_d);
  CHECK(serial.best_width == best_w);
}

TEST_CASE("grid spec validation") {
  GridSpec bad;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = {{1}, {2}, 0};
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = {{0}, {2}, 1};
  CHECK_THROWS_AS(bad.validate(), DomainError);
}
