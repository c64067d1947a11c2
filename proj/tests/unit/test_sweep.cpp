#include "kktstab/sweep.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace kktstab;

namespace {

SweepResult synthetic(const std::vector<double>& grid, double power, const std::string& observable) {
  SweepResult r;
  r.grid = grid;
  r.observable = observable;
  for (double e : grid) {
    SweepRecord rec;
    rec.eps = e;
    rec.solved = true;
    rec.dist_x = std::pow(e, power);
    rec.dist_y = 2.0 * std::pow(e, power);
    r.records.push_back(rec);
  }
  return r;
}

// Residual of the example1 KKT system at x with multiplier Y, in closed form.
double example1_kkt_error(double eps, const KKTPoint& p) {
  const Mat y = smat(p.y);
  const double x1 = p.x(0), x2 = p.x(1);
  Mat g(2, 2);
  g << x1, eps, eps, x2;
  const double stat = std::hypot(1.0 + 2.0 * x1 + y(0, 0), 2.0 * x2 + y(1, 1));
  const double comp = (g * y).norm();
  Eigen::SelfAdjointEigenSolver<Mat> eg(g), ey(y);
  const double feas = std::max(0.0, -eg.eigenvalues().minCoeff()) + std::max(0.0, ey.eigenvalues().maxCoeff());
  return stat + comp + feas;
}

}  // namespace

TEST(FitExponent, ExactPowerLaw) {
  const SweepResult r = synthetic(default_grid(), 2.0 / 3.0, "x");
  const FitResult f = fit_exponent(r);
  EXPECT_NEAR(f.slope, 2.0 / 3.0, 1e-12);
  EXPECT_LE(f.stderr_, 1e-12);
  EXPECT_EQ(f.used, 9);  // the largest decade is dropped
  EXPECT_DOUBLE_EQ(f.eps_hi, default_grid()[2]);
}

TEST(FitExponent, ObservableSelectsColumn) {
  SweepResult r = synthetic(default_grid(), 0.5, "multiplier-drift");
  for (auto& rec : r.records) rec.dist_x = 1.0;  // constant column must be ignored
  EXPECT_NEAR(fit_exponent(r).slope, 0.5, 1e-12);
  r.observable = "full";
  EXPECT_NEAR(observed_distance(r.records[0], "full"), std::hypot(1.0, r.records[0].dist_y), 1e-15);
}

TEST(FitExponent, SkipsUnsolvedAndHighResidualRecords) {
  SweepResult r = synthetic(default_grid(), 1.0, "x");
  r.records[5].solved = false;
  r.records[5].dist_x = 1e3;
  r.records[6].residual = 1e-6;
  r.records[6].dist_x = 1e3;
  const FitResult f = fit_exponent(r);
  EXPECT_NEAR(f.slope, 1.0, 1e-12);
  EXPECT_EQ(f.used, 7);
}

TEST(FitExponent, InsufficientData) {
  EXPECT_THROW(fit_exponent(synthetic({1e-2, 1e-3, 1e-4}, 1.0, "x"), 0.0), InsufficientData);
  EXPECT_THROW(fit_exponent(synthetic({1e-1}, 1.0, "x")), InsufficientData);
}

TEST(Grid, DefaultIsSixDecadesHalfSpaced) {
  const auto g = default_grid();
  ASSERT_EQ(g.size(), 11u);
  EXPECT_DOUBLE_EQ(g.front(), 0.1);
  EXPECT_NEAR(g.back(), 1e-6, 1e-21);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_LT(g[i], g[i - 1]);
}

TEST(Grid, ParsesExponentsAndValues) {
  const auto a = parse_grid("-1:-3:1");
  ASSERT_EQ(a.size(), 3u);
  EXPECT_DOUBLE_EQ(a[0], 0.1);
  EXPECT_DOUBLE_EQ(a[2], 1e-3);
  const auto b = parse_grid("1e-3:0.1:0.5");
  ASSERT_EQ(b.size(), 5u);
  EXPECT_DOUBLE_EQ(b[0], 0.1);
  EXPECT_THROW(parse_grid("1:2"), std::invalid_argument);
  EXPECT_THROW(parse_grid("-1:-2:0"), std::invalid_argument);
  EXPECT_THROW(parse_grid("-1:x:1"), std::invalid_argument);
  EXPECT_THROW(parse_grid("10:-2:1"), std::invalid_argument);
}

TEST(Csv, HeaderAndPrecision) {
  SweepResult r = synthetic({0.1, 0.01}, 1.0, "x");
  r.records[1].solved = false;
  std::ostringstream os;
  write_csv(os, r);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "eps,solved,dist_x,dist_y,residual,iterations");
  std::getline(is, line);
  EXPECT_EQ(line, "0.10000000000000001,1,0.10000000000000001,0.20000000000000001,0,0");
  std::getline(is, line);
  EXPECT_EQ(line, "0.01,0,0.01,0.02,0,0");
}

TEST(OracleExample1, SatisfiesKktToHighAccuracy) {
  for (double eps : {1e-1, 1e-2, 1e-3, 1e-4, 1e-6}) {
    const KKTPoint p = oracle_example1(eps);
    EXPECT_LE(example1_kkt_error(eps, p), 1e-10) << eps;
    EXPECT_NEAR(p.x(0) * p.x(1), eps * eps, 1e-15);
  }
}

TEST(OracleExample1, AsymptoticRate) {
  // x₂ / ε^(2/3) → 2^(-1/3).
  const double want = std::cbrt(0.5);
  EXPECT_NEAR(oracle_example1(1e-3).x(1) / std::pow(1e-3, 2.0 / 3.0), want, 0.05 * want);
  EXPECT_NEAR(oracle_example1(1e-9).x(1) / std::pow(1e-9, 2.0 / 3.0), want, 1e-3 * want);
}

TEST(OracleExample1, ZeroAndRange) {
  const KKTPoint p = oracle_example1(0.0);
  EXPECT_EQ(p.x, Vec::Zero(2));
  EXPECT_THROW(oracle_example1(0.2), std::invalid_argument);
}

TEST(OracleExample3, FamilyMembersAreKkt) {
  const Fixture fx = builtin_fixture("example3");
  for (double eps : {1e-1, 1e-2, 1e-4, 1e-6}) {
    const double bound = example3_xi_bound(eps);
    for (double frac : {0.0, 0.25, 0.5, 1.0}) {
      const double xi = -1.5 * eps - frac * (bound - 1.5 * eps);
      const KKTPoint p = oracle_example3(eps, xi);
      EXPECT_LE(natural_residual(fx.program, p.x, p.y, fx.direction.scaled(eps)), 1e-9) << eps << " " << xi;
    }
  }
}

TEST(OracleExample3, ZeroMatchesReference) {
  const Fixture fx = builtin_fixture("example3");
  const KKTPoint p = oracle_example3(0.0, 0.0);
  EXPECT_LE((p.x - fx.reference.x).norm(), 1e-14);
  EXPECT_LE((p.y - fx.reference.y).norm(), 1e-14);
}

TEST(OracleExample3, DriftIsOrderSqrtEps) {
  const Fixture fx = builtin_fixture("example3");
  const double eps = 1e-4;
  const KKTPoint p = oracle_example3(eps, -example3_xi_bound(eps));
  EXPECT_GE((p.y - fx.reference.y).norm(), std::sqrt(eps));
}

TEST(OracleExample3, RejectsOutOfRange) {
  EXPECT_THROW(oracle_example3(1e-4, -2.0 * std::sqrt(1e-4)), std::invalid_argument);
  EXPECT_THROW(oracle_example3(1e-4, 2.0 * std::sqrt(1e-4)), std::invalid_argument);
}

TEST(OracleExample3, PositiveXiBranchIsNotKkt) {
  // With ξ > -3ε/2 the t-multiplier 3ε + 2ξ has the wrong sign; the KKT
  // system is violated even though |ξ| is within the family bound.
  const Fixture fx = builtin_fixture("example3");
  const double eps = 1e-4, xi = example3_xi_bound(eps);
  EXPECT_THROW(oracle_example3(eps, xi), std::invalid_argument);
  KKTPoint p = oracle_example3(eps, -xi);
  p.y(0) = 3.0 * eps + 2.0 * xi;
  p.y(2) = -p.y(2);  // flip the off-diagonal entry of Y to +ξ
  EXPECT_GT(natural_residual(fx.program, p.x, p.y, fx.direction.scaled(eps)), 1e-3);
}

TEST(RunSweep, Example1OracleColumnMatchesOracle) {
  const Fixture fx = builtin_fixture("example1");
  SweepOptions o;
  o.observable = "x2";
  const SweepResult r = run_sweep(fx.program, fx.direction, default_grid(), {fx.reference.x, fx.reference.y}, o);
  EXPECT_EQ(r.method, "oracle");
  for (const auto& rec : r.records) EXPECT_NEAR(rec.dist_x, oracle_example1(rec.eps).x(1), 1e-8);
  // Monotone drift.
  for (std::size_t i = 1; i < r.records.size(); ++i) EXPECT_LE(r.records[i].dist_x, r.records[i - 1].dist_x);
}

TEST(RunSweep, Example1SolverAgreesWithOracle) {
  const Fixture fx = builtin_fixture("example1");
  SweepOptions o;
  o.observable = "x2";
  o.use_oracle = false;
  const SweepResult r = run_sweep(fx.program, fx.direction, default_grid(), {fx.reference.x, fx.reference.y}, o);
  EXPECT_EQ(r.method, "solver");
  int compared = 0;
  for (const auto& rec : r.records) {
    if (!rec.solved) continue;
    ++compared;
    EXPECT_LE((rec.point.x - oracle_example1(rec.eps).x).norm(), 1e-6) << rec.eps;
  }
  EXPECT_GE(compared, 4);
}

TEST(RunSweep, Example4IsLipschitz) {
  const Fixture fx = builtin_fixture("example4");
  const SweepResult r = run_sweep(fx.program, fx.direction, default_grid(), {fx.reference.x, fx.reference.y});
  EXPECT_EQ(r.solved_count(), 11);
  ASSERT_TRUE(r.fit.has_value());
  EXPECT_GE(r.fit->slope, 0.95);
  EXPECT_LT(kappa_hat(r), 10.0);
}

TEST(RunSweep, SinglePointGridHasNoFit) {
  const Fixture fx = builtin_fixture("example4");
  const SweepResult r = run_sweep(fx.program, fx.direction, {1e-2}, {fx.reference.x, fx.reference.y});
  EXPECT_EQ(r.records.size(), 1u);
  EXPECT_FALSE(r.fit.has_value());
}

TEST(RunSweep, RejectsBadGrid) {
  const Fixture fx = builtin_fixture("example4");
  const KKTPoint ref{fx.reference.x, fx.reference.y};
  EXPECT_THROW(run_sweep(fx.program, fx.direction, {1e-3, 1e-2}, ref), std::invalid_argument);
  EXPECT_THROW(run_sweep(fx.program, fx.direction, {2.0}, ref), std::invalid_argument);
  SweepOptions o;
  o.observable = "bogus";
  EXPECT_THROW(run_sweep(fx.program, fx.direction, {1e-2}, ref, o), std::invalid_argument);
}
