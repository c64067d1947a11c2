#pragma once

#include "kktstab/cones.hpp"
#include "kktstab/kkt.hpp"
#include "kktstab/model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace kktstab {

enum class Verdict { Holds, Fails, Inconclusive };

std::string to_string(Verdict v);

struct ConditionResult {
  Verdict verdict = Verdict::Inconclusive;
  std::optional<Vec> witness;
  /// Check-specific margin: a minimum singular value, eigenvalue or search
  /// objective. Infinite when the condition holds vacuously.
  double margin = 0.0;
  std::string note;
};

/// Thrown when a checker that assumes an affine constraint map is handed a
/// program with callback-evaluated G.
class NonAffineProgram : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// C(x̄) = {d : G'd ∈ C_K(G(x̄), ȳ)}.
class ProblemCriticalCone {
 public:
  ProblemCriticalCone(const ConicProgram& prog, const Vec& x, const Vec& y);

  int n() const { return static_cast<int>(jac_.cols()); }
  const SpectralFrame& frame() const { return cc_.frame(); }
  const CriticalCone& ambient_cone() const { return cc_; }
  const Mat& jacobian() const { return jac_; }

  bool contains(const Vec& d, double tol) const;
  /// Euclidean projection onto C(x̄) computed by ADMM.
  Vec project(const Vec& d, int iterations = 400) const;

  /// Orthonormal basis of {d : G'd ∈ span C_K}, which contains aff C(x̄).
  const Mat& span_basis() const { return span_; }
  /// Orthonormal basis of {d : G'd ∈ lin C_K}, the lineality space of C(x̄).
  const Mat& lin_basis() const { return lin_; }
  bool is_subspace() const { return span_.cols() == lin_.cols(); }
  bool is_zero() const { return span_.cols() == 0; }

 private:
  CriticalCone cc_;
  Mat jac_;
  Mat span_, lin_;
};

ProblemCriticalCone problem_critical_cone(const ConicProgram& prog, const Vec& x, const Vec& y);

struct CheckOptions {
  int starts = 200;
  std::uint64_t seed = 0;
  /// Skip the exact subspace path of check_sosc (used to cross-check it).
  bool force_multistart = false;
};

ConditionResult check_rcq(const ConicProgram& prog, const Vec& x, const CheckOptions& opts = {});
ConditionResult check_nondegeneracy(const ConicProgram& prog, const Vec& x);
ConditionResult check_srcq(const ConicProgram& prog, const Vec& x, const Vec& y,
                           const CheckOptions& opts = {});
ConditionResult check_sosc(const ConicProgram& prog, const Vec& x, const Vec& y,
                           const CheckOptions& opts = {});
/// Infimum of the second-order quantity over the supplied multipliers. The
/// result note states that it is relative to the sample.
ConditionResult check_robinson_sosc(const ConicProgram& prog, const Vec& x,
                                    const std::vector<Vec>& multipliers,
                                    const CheckOptions& opts = {});
/// Positivity of the second-order form on the affine hull of C(x̄), computed
/// exactly from the smallest eigenvalue of the reduced form.
ConditionResult affine_hull_probe(const ConicProgram& prog, const Vec& x, const Vec& y);

struct KernelProbeResult {
  /// Holds: no nonzero kernel element found. Fails: kernel element found.
  Verdict verdict = Verdict::Inconclusive;
  double min_residual = 0.0;
  std::optional<Vec> witness;  // (Δx, Δy) stacked, unit norm
  int starts = 0;
};

/// r(Δx, Δy) for the linearized natural map at (x̄, ȳ).
double kernel_residual(const ConicProgram& prog, const Vec& x, const Vec& y, const Vec& w);

KernelProbeResult kernel_probe(const ConicProgram& prog, const Vec& x, const Vec& y,
                               const CheckOptions& opts = {});

struct ConditionReport {
  std::string problem;
  Vec x, y;
  std::optional<MultiplierSet> multipliers;
  int critical_cone_dim = 0;  // dimension of the affine hull of C(x̄)
  bool critical_cone_is_subspace = false;

  ConditionResult rcq, srcq, nondegeneracy, sosc, robinson_sosc, affine_hull_probe;
  KernelProbeResult kernel_probe;

  /// SRCQ ∧ SOSC.
  Verdict srcq_and_sosc = Verdict::Inconclusive;
  /// Kernel probe agrees with the verdict above (false when either side is
  /// inconclusive).
  bool consistent = false;
  /// Violated implications that must hold on any instance.
  std::vector<std::string> inconsistencies;
  std::vector<std::string> notes;
};

struct ReportOptions {
  CheckOptions check;
  /// Multipliers for Robinson's SOSC; defaults to {ȳ}.
  std::vector<Vec> multiplier_samples;
};

ConditionReport assemble_report(const ConicProgram& prog, const Vec& x, const Vec& y,
                                const ReportOptions& opts = {});

}  // namespace kktstab
