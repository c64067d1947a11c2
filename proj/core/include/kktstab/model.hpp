#pragma once

#include "kktstab/cones.hpp"
#include "kktstab/linalg.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kktstab {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// f(x) = ½ xᵀQx + cᵀx + c0.
struct Objective {
  SymMatrix Q{1};
  Vec c;
  double c0 = 0.0;
};

/// G(x) = A0 + Σ x_i A_i, with all points in the cone's ambient coordinates.
struct AffineMap {
  Vec A0;
  std::vector<Vec> Ai;

  Vec eval(const Vec& x) const;
  /// The constant derivative G' as a (dim × n) matrix with columns A_i.
  Mat jacobian() const;
};

/// Evaluators for a constraint map that is not affine. `curvature(x, y)`
/// returns Σ_k y_k ∇²G_k(x).
struct NonlinearConstraint {
  std::function<Vec(const Vec&)> value;
  std::function<Mat(const Vec&)> jacobian;
  std::function<Mat(const Vec&, const Vec&)> curvature;
};

struct Perturbation {
  Vec a;
  Vec b;

  Perturbation scaled(double t) const { return {t * a, t * b}; }
};

struct ConicProgram {
  std::string name;
  int n = 0;
  Objective objective;
  AffineMap constraint;
  Cone cone;
  /// Set only for fixtures whose G is not affine; condition checkers refuse
  /// such programs.
  std::shared_ptr<const NonlinearConstraint> nonlinear;

  bool is_affine() const { return nonlinear == nullptr; }
  int ambient_dim() const { return cone.dim(); }

  double f(const Vec& x) const;
  Vec grad_f(const Vec& x) const;
  Vec G(const Vec& x) const;
  Mat jacobian(const Vec& x) const;
  /// ∇²ₓₓ L(x; y) = Q + Σ y_k ∇²G_k(x).
  Mat hessian_lagrangian(const Vec& x, const Vec& y) const;

  Perturbation zero_perturbation() const;

  /// Throws ValidationError on any dimension inconsistency.
  void validate() const;
};

struct Evaluation {
  double f = 0.0;
  Vec grad;  // ∇f(x) − a
  Vec g;     // G(x) + b
};

Evaluation evaluate(const ConicProgram& prog, const Vec& x, const Perturbation& pert);

/// A known KKT pair stored alongside a problem.
struct ReferencePoint {
  Vec x;
  Vec y;
};

struct ProblemFile {
  ConicProgram program;
  std::optional<ReferencePoint> reference;
};

/// Parses the JSON problem format. Syntax errors raise ParseError with the
/// line and column; missing or mistyped fields raise ParseError naming the
/// field; inconsistent dimensions raise ValidationError.
ProblemFile parse_problem(const std::string& text);
ConicProgram load_problem(const std::string& text);
ProblemFile load_problem_file(const std::string& path);

/// Throws ValidationError for programs with a non-affine constraint.
std::string save_problem(const ConicProgram& prog,
                         const std::optional<ReferencePoint>& reference = std::nullopt);

/// A built-in problem with its known KKT point and the perturbation direction
/// used by the sweep experiments.
struct Fixture {
  ConicProgram program;
  ReferencePoint reference;
  Perturbation direction;
  /// Default sweep observable: "x", "x2", "multiplier-drift" or "full".
  std::string observable = "full";
  /// Finite multiplier sample for Robinson's SOSC when multipliers are not
  /// unique; empty otherwise.
  std::vector<Vec> multiplier_samples;
  std::string description;
};

std::vector<std::string> builtin_names();
/// Throws std::invalid_argument for an unknown name.
ConicProgram builtin(const std::string& name);
Fixture builtin_fixture(const std::string& name);

/// B^½ and the linear-term shift B^(−½)(5/2, −1) of the "example3" fixture.
Mat example3_root_b();
Vec example3_shift();

/// Deterministic unit-norm perturbation direction (a, b) drawn from `seed`.
Perturbation random_unit_direction(const ConicProgram& prog, unsigned long long seed);

}  // namespace kktstab
