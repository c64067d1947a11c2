#pragma once

#include "kktstab/kkt.hpp"
#include "kktstab/model.hpp"

#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace kktstab {

class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SweepRecord {
  double eps = 0.0;
  bool solved = false;
  /// Distance of the primal part to the reference, restricted to x₂ for the
  /// "x2" observable.
  double dist_x = 0.0;
  double dist_y = 0.0;
  double residual = 0.0;
  int iterations = 0;
  KKTPoint point;
};

struct FitResult {
  double slope = 0.0;
  double stderr_ = 0.0;
  int used = 0;
  double eps_lo = 0.0;
  double eps_hi = 0.0;
};

struct SweepResult {
  std::vector<double> grid;  // strictly decreasing
  std::vector<SweepRecord> records;
  std::string observable;
  /// "oracle" or "solver".
  std::string method;
  std::optional<FitResult> fit;

  int solved_count() const;
};

struct SweepOptions {
  /// "x", "x2", "multiplier-drift" or "full".
  std::string observable = "full";
  /// Use the analytic solution family when one is registered for the
  /// program and direction.
  bool use_oracle = true;
  SolverOptions solver;
  /// Number of largest decades left out of the fit.
  double drop_decades = 1.0;
  /// Start each solve from the previous solution.
  bool warm_start = true;
};

/// Solves the problem perturbed by ε·direction for every ε in `grid` and
/// records the distances to `reference`. Failures are recorded, never thrown.
/// The fit is attached when at least four records are usable.
SweepResult run_sweep(const ConicProgram& prog, const Perturbation& direction, const std::vector<double>& grid,
                      const KKTPoint& reference, const SweepOptions& opts = {});

/// The distance a sweep fits: dist_x for "x"/"x2", dist_y for
/// "multiplier-drift", and the joint distance for "full".
double observed_distance(const SweepRecord& rec, const std::string& observable);

/// Least-squares slope of log(distance) against log(ε) over records that are
/// solved with residual ≤ 1e-9 and ε ≤ max ε · 10^(−drop_decades). Throws
/// InsufficientData with fewer than four usable records.
FitResult fit_exponent(const SweepResult& result, double drop_decades = 1.0);
FitResult fit_power_law(const std::vector<double>& eps, const std::vector<double>& dist);

/// max over usable records of distance / ε.
double kappa_hat(const SweepResult& result);

/// Minimizer of x₁ + x₁² + x₂² s.t. Diag(x) + ε[[0,1],[1,0]] ⪰ 0, with its
/// multiplier in the library's sign convention.
KKTPoint oracle_example1(double eps);

/// Member of the analytic KKT family of the "example3" fixture perturbed by
/// ε·(0, svec diag(−1, 1)). Requires |ξ| ≤ √(ε + 2ε²) and ξ ≤ −3ε/2; throws
/// std::invalid_argument otherwise.
KKTPoint oracle_example3(double eps, double xi);
/// Largest |ξ| in the family, √(ε + 2ε²).
double example3_xi_bound(double eps);

/// ε = 10^(−k/2) for k = 2..12.
std::vector<double> default_grid();
/// "a:b:step" with step in decades. Endpoints > 0 are ε values, endpoints
/// ≤ 0 are base-10 exponents. Throws std::invalid_argument on bad input.
std::vector<double> parse_grid(const std::string& spec);

/// CSV with header eps,solved,dist_x,dist_y,residual,iterations.
void write_csv(std::ostream& os, const SweepResult& result);

}  // namespace kktstab
