// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "kktstab/conditions.hpp"
#include "kktstab/cones.hpp"
#include "kktstab/kkt.hpp"
#include "kktstab/model.hpp"
#include "kktstab/sweep.hpp"

#include "../support/generators.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace kktstab;
using namespace kktstab::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

KKTPoint ref_point(const Fixture& fx) { return {fx.reference.x, fx.reference.y}; }

Vec in_ball(Rng& rng, int n, double radius) {
  const double r = radius * std::pow(uniform(rng, 0.0, 1.0), 1.0 / n);
  return r * unit(rng, n);
}

void criterion1(Outcome& o) {
  const Fixture fx = builtin_fixture("example1");
  SweepOptions so;
  so.observable = "x2";
  const SweepResult oracle = run_sweep(fx.program, fx.direction, default_grid(), ref_point(fx), so);
  so.use_oracle = false;
  const SweepResult solver = run_sweep(fx.program, fx.direction, default_grid(), ref_point(fx), so);
  o.require(oracle.method == "oracle", "oracle registered");
  o.require(oracle.fit.has_value(), "fit available");
  if (oracle.fit) {
    o.detail << "slope " << oracle.fit->slope;
    o.require(oracle.fit->slope >= 0.64 && oracle.fit->slope <= 0.70, "slope in [0.64, 0.70]");
  }
  double worst = 0.0;
  int both = 0;
  for (std::size_t i = 0; i < oracle.records.size(); ++i) {
    if (!oracle.records[i].solved || !solver.records[i].solved) continue;
    ++both;
    worst = std::max(worst, (oracle.records[i].point.x - solver.records[i].point.x).norm());
  }
  o.detail << "; oracle/solver max gap " << worst << " over " << both << " points";
  o.require(both > 0, "solver succeeded somewhere");
  o.require(worst <= 1e-6, "oracle and solver agree to 1e-6");
}

void criterion2(Outcome& o) {
  const Fixture fx = builtin_fixture("example3");
  double worst = 0.0;
  int members = 0;
  for (double eps : default_grid()) {
    const double bound = example3_xi_bound(eps);
    for (int k = 0; k <= 10; ++k) {
      const double xi = -1.5 * eps - (k / 10.0) * (bound - 1.5 * eps);
      const KKTPoint p = oracle_example3(eps, xi);
      worst = std::max(worst, natural_residual(fx.program, p.x, p.y, fx.direction.scaled(eps)));
      ++members;
    }
  }
  o.detail << "family residual max " << worst << " over " << members << " members";
  o.require(worst <= 1e-9, "family residuals <= 1e-9");

  SweepOptions so;
  so.observable = "multiplier-drift";
  const SweepResult r = run_sweep(fx.program, fx.direction, default_grid(), ref_point(fx), so);
  o.require(r.fit.has_value(), "fit available");
  if (r.fit) {
    o.detail << "; drift slope " << r.fit->slope;
    o.require(r.fit->slope >= 0.47 && r.fit->slope <= 0.53, "drift slope in [0.47, 0.53]");
  }
  const auto& x = fx.reference.x;
  const auto& y = fx.reference.y;
  o.require(check_sosc(fx.program, x, y).verdict == Verdict::Holds, "SOSC holds");
  o.require(check_srcq(fx.program, x, y).verdict == Verdict::Fails, "SRCQ fails");
  const KernelProbeResult k = kernel_probe(fx.program, x, y);
  o.require(k.verdict == Verdict::Fails && k.witness.has_value(), "kernel witness found");
}

void criterion3(Outcome& o) {
  const Fixture fx = builtin_fixture("example4");
  const auto& p = fx.program;
  const auto& x = fx.reference.x;
  const auto& y = fx.reference.y;
  o.require(check_nondegeneracy(p, x).verdict == Verdict::Holds, "nondegeneracy holds");
  o.require(check_srcq(p, x, y).verdict == Verdict::Holds, "SRCQ holds");
  o.require(check_sosc(p, x, y).verdict == Verdict::Holds, "SOSC holds");
  const ConditionResult ah = affine_hull_probe(p, x, y);
  o.require(ah.verdict == Verdict::Fails && ah.witness.has_value(), "affine-hull probe fails");
  if (ah.witness) {
    const Mat d = smat(*ah.witness);
    o.require(std::abs(d(0, 0)) <= 1e-9 && std::abs(2.0 * d(0, 1) - d(1, 1)) <= 1e-9,
              "witness has d11 = 0 and 2 d12 = d22");
  }
  CheckOptions co;
  co.starts = 200;
  const KernelProbeResult k = kernel_probe(p, x, y, co);
  o.detail << "kernel min residual " << k.min_residual << " over " << k.starts << " starts";
  o.require(k.verdict == Verdict::Holds && k.min_residual >= 1e-6 && k.starts >= 200, "no kernel");
  const SweepResult r = run_sweep(p, fx.direction, default_grid(), ref_point(fx));
  o.require(r.fit.has_value(), "fit available");
  if (r.fit) {
    const double kh = kappa_hat(r);
    o.detail << "; slope " << r.fit->slope << ", kappa_hat " << kh;
    o.require(r.fit->slope >= 0.95, "slope >= 0.95");
    o.require(std::isfinite(kh) && kh < 100.0, "kappa_hat bounded");
  }
}

void criterion4(Outcome& o) {
  const Fixture fx = builtin_fixture("example2");
  const auto& p = fx.program;
  const auto& x = fx.reference.x;
  const auto& y = fx.reference.y;
  o.require(check_rcq(p, x).verdict == Verdict::Holds, "RCQ holds");
  const auto m = recover_multipliers(p, x, p.zero_perturbation());
  o.require(m.has_value() && m->affine_dim >= 1, "multiplier affine dimension >= 1");
  if (m) o.detail << "multiplier affine dim " << m->affine_dim;
  o.require(check_srcq(p, x, y).verdict == Verdict::Fails, "SRCQ fails");
  o.require(ProblemCriticalCone(p, x, y).is_zero(), "critical cone is {0}");
  o.require(check_robinson_sosc(p, x, fx.multiplier_samples).verdict == Verdict::Holds,
            "Robinson's SOSC holds on the sample");
  SweepOptions so;
  so.observable = "x";
  const SweepResult r = run_sweep(p, fx.direction, default_grid(), ref_point(fx), so);
  std::vector<double> dist;
  for (const auto& rec : r.records) {
    if (rec.solved) dist.push_back(rec.dist_x);
  }
  o.require(dist.size() >= 4, "at least four solved sweep points");
  if (!dist.empty()) {
    o.detail << "; dist_x " << dist.front() << " -> " << dist.back();
    o.require(dist.back() <= 1e-4 * std::max(dist.front(), 1e-300), "dist_x -> 0");
  }
}

void criterion5(Outcome& o) {
  Rng rng(505);
  const BlockKind kinds[] = {BlockKind::Orthant, BlockKind::SOC, BlockKind::PSD};
  const double t = 1e-6;
  int fails[4] = {0, 0, 0, 0};
  const int trials = 10000;
  for (int trial = 0; trial < trials; ++trial) {
    const Cone c = random_block(rng, kinds[trial % 3]);
    const int d = c.dim();
    Vec z;
    if (trial % 2 == 0) {
      const auto [a, b] = complementary_pair(rng, c);
      z = a + b;
    } else {
      z = gaussian(rng, d);
    }
    const Vec z2 = gaussian(rng, d);
    const Vec pz = project(c, z), pz2 = project(c, z2);
    if ((pz - pz2).norm() > (z - z2).norm() * (1.0 + 1e-12) + 1e-14) ++fails[0];

    const Vec qz = project_polar(c, z);
    const double scale = std::max(1.0, z.norm());
    const bool moreau = (pz + qz - z).norm() <= 1e-12 * scale && std::abs(pz.dot(qz)) <= 1e-10 * scale * scale &&
                        dist_to_cone(c, pz) <= 1e-10 * scale && project(c, qz).norm() <= 1e-10 * scale;
    if (!moreau) ++fails[1];

    const SpectralFrame f = spectral_frame(c, z);
    const Vec h = unit(rng, d);
    const Vec dd = dir_deriv(f, h);
    const Vec fd = (project(c, z + t * h) - pz) / t;
    if ((fd - dd).norm() > 10.0 * t) ++fails[2];

    const double lam = uniform(rng, 0.1, 10.0);
    const bool homog = (project(c, lam * z) - lam * pz).norm() <= 1e-12 * lam * scale &&
                       (dir_deriv(f, lam * h) - lam * dd).norm() <= 1e-12 * lam;
    if (!homog) ++fails[3];
  }
  o.detail << trials << " trials; failures: nonexpansive " << fails[0] << ", Moreau " << fails[1]
           << ", finite-difference " << fails[2] << ", homogeneity " << fails[3];
  o.require(fails[0] + fails[1] + fails[2] + fails[3] == 0, "zero failures");
}

void criterion6(Outcome& o) {
  Rng rng(606);
  const BlockKind kinds[] = {BlockKind::Orthant, BlockKind::SOC, BlockKind::PSD};
  int disagreements = 0, fixed_points = 0, total = 0;
  for (BlockKind kind : kinds) {
    for (int trial = 0; trial < 1000; ++trial) {
      const Cone c = random_block(rng, kind);
      const auto [a, b] = complementary_pair(rng, c);
      const SpectralFrame f = spectral_frame(c, a + b);
      const int d = c.dim();
      Vec da, db;
      switch (trial % 3) {
        case 0: {  // a genuine fixed point
          const Vec w = gaussian(rng, d);
          da = dir_deriv(f, w);
          db = w - da;
          break;
        }
        case 1: {  // Moreau pair of the critical cone: orthogonal, curvature untested
          const CriticalCone cc(f);
          const Vec g = gaussian(rng, d);
          da = cc.project(g);
          db = g - da;
          break;
        }
        default:
          da = gaussian(rng, d);
          db = gaussian(rng, d);
          break;
      }
      const double tol = 1e-8 * std::max(1.0, da.norm() + db.norm());
      const bool fixed = (dir_deriv(f, da + db) - da).norm() <= tol;
      const bool conds = fixed_point_conditions(f, da, db, 1e-8).all();
      fixed_points += fixed;
      ++total;
      if (fixed != conds) ++disagreements;
    }
  }
  o.detail << total << " trials (" << fixed_points << " fixed points); disagreements " << disagreements;
  o.require(disagreements == 0, "conditions agree with the fixed-point predicate");
}

void criterion7(Outcome& o) {
  std::vector<Fixture> fixtures;
  for (const std::string name : {"example1", "example2", "example3", "example4"}) fixtures.push_back(builtin_fixture(name));
  fixtures.push_back(generated_soc_instance());
  fixtures.push_back(generated_psd_instance());
  for (const Fixture& fx : fixtures) {
    ReportOptions ro;
    ro.multiplier_samples = fx.multiplier_samples;
    const ConditionReport r = assemble_report(fx.program, fx.reference.x, fx.reference.y, ro);
    o.detail << fx.program.name << ": kernel " << to_string(r.kernel_probe.verdict) << ", SRCQ∧SOSC "
             << to_string(r.srcq_and_sosc) << "; ";
    o.require(r.kernel_probe.verdict != Verdict::Inconclusive && r.srcq_and_sosc != Verdict::Inconclusive,
              fx.program.name + " conclusive");
    o.require(r.kernel_probe.verdict == r.srcq_and_sosc, fx.program.name + " verdicts agree");
  }
}

void criterion8(Outcome& o) {
  const Fixture fx = builtin_fixture("example4");
  const auto& p = fx.program;
  const int n = p.n, m = p.cone.dim();
  SolverOptions so;
  so.max_iter = 50;
  so.tol = 1e-10;
  so.max_escapes = 0;  // plain damped semismooth Newton
  Rng rng(808);
  int good = 0, worst_iters = 0;
  for (int s = 0; s < 100; ++s) {
    const Vec dw = in_ball(rng, n + m, 0.1);
    const KKTPoint start{fx.reference.x + dw.head(n), fx.reference.y + dw.tail(m)};
    const SolveResult r = solve_kkt(p, p.zero_perturbation(), start, so);
    if (r.converged && r.point.residual <= 1e-10 && r.iterations <= 50) {
      ++good;
      worst_iters = std::max(worst_iters, r.iterations);
    }
  }
  o.detail << good << "/100 converged, max iterations " << worst_iters;
  o.require(good >= 95, ">= 95% converge");
}

void criterion9(Outcome& o) {
  const Fixture fx = builtin_fixture("example4");
  const auto& p = fx.program;
  const int n = p.n, m = p.cone.dim();
  const Perturbation zero = p.zero_perturbation();
  auto ratios = [&](std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> out;
    for (int s = 0; s < 1000; ++s) {
      const Vec dw = in_ball(rng, n + m, 1e-2);
      const double f = natural_residual(p, fx.reference.x + dw.head(n), fx.reference.y + dw.tail(m), zero);
      out.push_back(f > 0.0 ? dw.norm() / f : std::numeric_limits<double>::infinity());
    }
    return out;
  };
  const auto fit = ratios(909);
  const double kappa = *std::max_element(fit.begin(), fit.end());
  const auto check = ratios(910);
  const auto violations = std::count_if(check.begin(), check.end(), [&](double r) { return r > kappa; });
  const double worst = *std::max_element(check.begin(), check.end());
  o.detail << "kappa " << kappa << " fitted on 1000 points; validation max ratio " << worst << ", violations "
           << violations << "/1000";
  o.require(std::isfinite(kappa), "kappa finite");
  o.require(violations == 0, "bound holds on fresh sample");
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    double budget_s;
    std::function<void(Outcome&)> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "example1 rate", 5.0, criterion1},
      {2, "example3 rate and multiplier drift", 5.0, criterion2},
      {3, "example4 robust isolated calmness", 10.0, criterion3},
      {4, "example2 non-unique multipliers", 5.0, criterion4},
      {5, "projection calculus properties", 0.0, criterion5},
      {6, "directional-derivative fixed-point conditions", 0.0, criterion6},
      {7, "kernel probe vs SRCQ and SOSC", 0.0, criterion7},
      {8, "semismooth Newton robustness", 0.0, criterion8},
      {9, "local error bound", 0.0, criterion9},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0.0 && secs >= c.budget_s) o.require(false, "runtime budget");
    std::printf("%s criterion %d (%s) %.2fs: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.title, secs,
                o.detail.str().c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
