#pragma once

#include "kktstab/model.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace kktstab {

/// Primal-dual pair with the natural-map residual for the perturbation it was
/// computed against.
struct KKTPoint {
  Vec x;
  Vec y;
  double residual = std::numeric_limits<double>::quiet_NaN();
};

/// F(x, y) = (∇f(x) − a + G'(x)*y, G(x) + b − Π_K(G(x) + b + y)).
Vec natural_map(const ConicProgram& prog, const Vec& x, const Vec& y, const Perturbation& pert);
double natural_residual(const ConicProgram& prog, const Vec& x, const Vec& y, const Perturbation& pert);

/// An element of the generalized Jacobian of F at (x, y), acting on (Δx, Δy).
Mat natural_map_jacobian(const ConicProgram& prog, const Vec& x, const Vec& y, const Perturbation& pert);

/// Ψ(x, z) = (∇f(x) + G'(x)*(z − Π_K(z)), G(x) − Π_K(z)). KKT pairs of the
/// problem perturbed by (a, b) are exactly (x, z − Π_K(z)) with Ψ(x, z) = (a, −b).
Vec normal_map(const ConicProgram& prog, const Vec& x, const Vec& z);
/// Ψ(x, z) − (a, −b).
Vec normal_map_residual(const ConicProgram& prog, const Vec& x, const Vec& z, const Perturbation& pert);

struct MultiplierSet {
  Vec representative;
  int affine_dim = 0;
  bool is_singleton = true;
  /// Orthonormal directions spanning the affine hull of the multipliers
  /// around the representative.
  Mat directions;
};

/// Recovers M(x, a, b). Returns nullopt when G(x) + b is not within `tol` of
/// K or when no multiplier satisfies the KKT conditions to `tol`.
std::optional<MultiplierSet> recover_multipliers(const ConicProgram& prog, const Vec& x,
                                                 const Perturbation& pert, double tol = 1e-8);

struct SolverOptions {
  int max_iter = 100;
  double tol = 1e-11;
  double lambda0 = 1e-4;
  /// Extragradient restarts allowed when the damped step stagnates (convex
  /// programs with affine G only).
  int max_escapes = 3;
  int escape_iterations = 20000;
};

struct SolveResult {
  bool converged = false;
  /// Best iterate found; its residual is recorded in `point.residual`.
  KKTPoint point;
  int iterations = 0;
  int escapes = 0;
  /// Residual norm after each accepted step, starting with the initial one.
  std::vector<double> trace;
  std::string message;
};

/// Levenberg–Marquardt damped semismooth Newton method on ½|F|².
SolveResult solve_kkt(const ConicProgram& prog, const Perturbation& pert, const KKTPoint& start,
                      const SolverOptions& opts = {});

/// FNV-1a hash, used to derive per-problem seeds.
std::uint64_t fnv1a(const std::string& s);

/// Runs solve_kkt from `center` and from `starts - 1` pseudo-random points in
/// the ball of the given radius around it, seeded by the problem name and
/// `seed`. Returns the first converged run, or the best one.
SolveResult solve_kkt_multistart(const ConicProgram& prog, const Perturbation& pert,
                                 const KKTPoint& center, double radius, int starts = 32,
                                 const SolverOptions& opts = {}, std::uint64_t seed = 0);

}  // namespace kktstab
