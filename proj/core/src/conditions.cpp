#include "kktstab/conditions.hpp"

#include "search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kktstab {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Fails: return "fails";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Search thresholds shared by the heuristic decisions.
constexpr double kWitnessTol = 1e-10;
constexpr double kClearTol = 1e-6;
constexpr double kSoscFailTol = 1e-9;

void require_affine(const ConicProgram& prog, const char* who) {
  if (!prog.is_affine()) {
    throw NonAffineProgram(std::string(who) + ": '" + prog.name +
                           "' has a non-affine constraint map; the condition checks assume G is affine");
  }
}

Mat complement(const Mat& basis, Eigen::Index dim) {
  if (basis.cols() == 0) return Mat::Identity(dim, dim);
  return nullspace(basis.transpose(), 1e-10);
}

// Orthonormal basis of {d : J d ∈ span(B)}.
Mat preimage(const Mat& j, const Mat& b) {
  const Mat perp = complement(b, j.rows());
  if (perp.cols() == 0) return Mat::Identity(j.cols(), j.cols());
  const Mat m = perp.transpose() * j;
  return nullspace(m, 1e-10 * std::max(1.0, m.norm()));
}

double smallest_singular_value(const Mat& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  if (m.cols() > m.rows()) return 0.0;
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues().minCoeff();
}

Vec stack(const Vec& a, const Vec& b) {
  Vec out(a.size() + b.size());
  out << a, b;
  return out;
}

// ker(Jᵀ) ∩ [C]° = {0}, where C is the cone described by `cc`.
ConditionResult polar_triviality(const Mat& j, const CriticalCone& cc, const CheckOptions& opts) {
  ConditionResult res;
  const CriticalPolar polar(cc);
  const Mat nb = polar.span_basis();
  if (nb.cols() == 0) {
    res.verdict = Verdict::Holds;
    res.margin = kInf;
    res.note = "polar cone is {0}";
    return res;
  }
  const Mat m = j.transpose() * nb;
  const Mat w = nullspace(m, 1e-10 * std::max(1.0, m.norm()));
  if (w.cols() == 0) {
    res.verdict = Verdict::Holds;
    res.margin = smallest_singular_value(m);
    res.note = "exact: ker G'* meets the span of the polar cone only at 0";
    return res;
  }
  const Mat v = nb * w;

  const Mat lb = polar.lin_basis();
  if (lb.cols() > 0) {
    Mat both(v.rows(), v.cols() + lb.cols());
    both << v, -lb;
    const Mat inter = nullspace(both, 1e-9);
    if (inter.cols() > 0) {
      res.verdict = Verdict::Fails;
      res.witness = (v * inter.col(0).head(v.cols())).normalized();
      res.margin = 0.0;
      res.note = "exact: ker G'* meets the lineality space of the polar cone";
      return res;
    }
  }

  const detail::SphereMin s = detail::subspace_cone_search(
      v, [&](const Vec& d) { return cc.project(d); }, opts.starts, opts.seed);
  res.margin = s.value;
  if (s.value <= kWitnessTol) {
    res.verdict = Verdict::Fails;
    res.witness = s.point.normalized();
    res.note = "witness found by sphere search over ker G'* ∩ span(polar)";
  } else if (s.value >= kClearTol) {
    if (v.cols() <= 3) {
      res.verdict = Verdict::Holds;
      res.note = "grid-certified sphere search (dimension " + std::to_string(v.cols()) + ")";
    } else if (detail::dense_sum_certificate(j, [&](const Vec& d) { return cc.project(d); }, 1e-8)) {
      res.verdict = Verdict::Holds;
      res.note = "certified by alternating projections: range G' + C is dense";
    } else {
      res.verdict = Verdict::Inconclusive;
      res.note = "no witness found and the density certificate failed (dimension " +
                 std::to_string(v.cols()) + " > 3)";
    }
  } else {
    res.verdict = Verdict::Inconclusive;
    res.note = "sphere search minimum lies between the decision thresholds";
  }
  return res;
}

Mat second_order_form(const ConicProgram& prog, const Vec& x, const Vec& y, const SpectralFrame& frame) {
  const Mat j = prog.jacobian(x);
  Mat q = prog.hessian_lagrangian(x, y) + j.transpose() * upsilon_matrix(frame) * j;
  return 0.5 * (q + q.transpose());
}

struct FormMin {
  double value = kInf;
  Vec witness;
  bool feasible = false;
};

// min dᵀQd over C(x̄) ∩ unit sphere: grid for dimension <= 3 plus penalized
// projected-gradient multistart with a final ADMM projection.
FormMin minimize_form(const ProblemCriticalCone& pcc, const Mat& q, const CheckOptions& opts) {
  const Mat& z = pcc.span_basis();
  const int k = static_cast<int>(z.cols());
  const Mat jz = pcc.jacobian() * z;
  const Mat qr = z.transpose() * q * z;
  const CriticalCone& cc = pcc.ambient_cone();
  FormMin best;

  auto consider = [&](const Vec& d) {
    const double nd = d.norm();
    if (nd < 1e-10) return;
    const Vec u = d / nd;
    if (!pcc.contains(u, 1e-7)) return;
    const double val = u.dot(q * u);
    best.feasible = true;
    if (val < best.value) {
      best.value = val;
      best.witness = u;
    }
  };

  for (const Vec& c : detail::sphere_grid(k)) {
    if (cc.contains(jz * c, 1e-9)) consider(z * c);
  }

  const double qnorm = std::max(qr.norm(), 1e-12);
  const double jnorm2 = std::max(jz.squaredNorm(), 1e-12);
  for (Vec c : detail::random_unit_vectors(k, opts.starts, opts.seed ^ 0x736f7363ull)) {
    for (double rho : {1.0, 1e2, 1e4, 1e6}) {
      const double eta = 0.5 / (qnorm + rho * jnorm2);
      for (int it = 0; it < 300; ++it) {
        const Vec u = jz * c;
        const Vec grad = 2.0 * qr * c + 2.0 * rho * jz.transpose() * (u - cc.project(u));
        Vec next = c - eta * grad;
        const double nn = next.norm();
        if (nn < 1e-14) break;
        next /= nn;
        if ((next - c).norm() < 1e-13) {
          c = next;
          break;
        }
        c = next;
      }
    }
    consider(pcc.project(z * c));
  }
  return best;
}

ConditionResult sosc_for(const ConicProgram& prog, const Vec& x, const Vec& y, const CheckOptions& opts) {
  const ProblemCriticalCone pcc(prog, x, y);
  const Mat q = second_order_form(prog, x, y, pcc.frame());
  ConditionResult res;
  if (pcc.is_zero()) {
    res.verdict = Verdict::Holds;
    res.margin = kInf;
    res.note = "critical cone is {0}; holds vacuously";
    return res;
  }
  if (pcc.is_subspace() && !opts.force_multistart) {
    const Mat& z = pcc.lin_basis();
    const EigDecomp e = sym_eig(Mat(z.transpose() * q * z));
    const auto last = e.values.size() - 1;
    res.margin = e.values(last);
    if (res.margin > kSoscFailTol) {
      res.verdict = Verdict::Holds;
    } else {
      res.verdict = Verdict::Fails;
      res.witness = (z * e.vectors.col(last)).normalized();
    }
    res.note = "exact: critical cone is a subspace of dimension " + std::to_string(z.cols());
    return res;
  }
  const FormMin fm = minimize_form(pcc, q, opts);
  if (!fm.feasible) {
    res.verdict = Verdict::Holds;
    res.margin = kInf;
    res.note = "no nonzero critical direction found; treated as C(x̄) = {0}";
    return res;
  }
  res.margin = fm.value;
  const bool certified = pcc.span_basis().cols() <= 3;
  if (fm.value <= kSoscFailTol) {
    res.verdict = Verdict::Fails;
    res.witness = fm.witness;
    res.note = "critical direction with non-positive curvature found";
  } else if (fm.value >= kClearTol) {
    res.verdict = Verdict::Holds;
    res.note = certified ? "grid-certified minimum over the critical cone"
                         : "heuristic: multistart minimum over the critical cone (dimension > 3)";
  } else {
    res.verdict = Verdict::Inconclusive;
    res.note = "minimum over the critical cone lies between the decision thresholds";
  }
  return res;
}

}  // namespace

// ---- problem critical cone -------------------------------------------------------

ProblemCriticalCone::ProblemCriticalCone(const ConicProgram& prog, const Vec& x, const Vec& y)
    : cc_([&] {
        require_affine(prog, "problem_critical_cone");
        return CriticalCone(spectral_frame(prog.cone, prog.G(x) + y));
      }()),
      jac_(prog.jacobian(x)) {
  span_ = preimage(jac_, cc_.span_basis());
  lin_ = preimage(jac_, cc_.lin_basis());
}

bool ProblemCriticalCone::contains(const Vec& d, double tol) const {
  return cc_.contains(jac_ * d, tol);
}

Vec ProblemCriticalCone::project(const Vec& d0, int iterations) const {
  const int n = static_cast<int>(jac_.cols());
  const double rho = 1.0;
  const auto lhs = (Mat::Identity(n, n) + rho * jac_.transpose() * jac_).ldlt();
  Vec u = cc_.project(jac_ * d0);
  Vec w = Vec::Zero(jac_.rows());
  Vec d = d0;
  for (int it = 0; it < iterations; ++it) {
    d = lhs.solve(d0 + rho * jac_.transpose() * (u - w));
    const Vec jd = jac_ * d;
    u = cc_.project(jd + w);
    w += jd - u;
  }
  return d;
}

ProblemCriticalCone problem_critical_cone(const ConicProgram& prog, const Vec& x, const Vec& y) {
  return ProblemCriticalCone(prog, x, y);
}

// ---- constraint qualifications ------------------------------------------------------

ConditionResult check_rcq(const ConicProgram& prog, const Vec& x, const CheckOptions& opts) {
  require_affine(prog, "check_rcq");
  const SpectralFrame frame = spectral_frame(prog.cone, project(prog.cone, prog.G(x)));
  return polar_triviality(prog.jacobian(x), CriticalCone(frame), opts);
}

ConditionResult check_nondegeneracy(const ConicProgram& prog, const Vec& x) {
  require_affine(prog, "check_nondegeneracy");
  const SpectralFrame frame = spectral_frame(prog.cone, project(prog.cone, prog.G(x)));
  const CriticalPolar normal_cone{CriticalCone(frame)};
  const Mat nb = normal_cone.span_basis();  // (lin T_K)⊥
  ConditionResult res;
  if (nb.cols() == 0) {
    res.verdict = Verdict::Holds;
    res.margin = kInf;
    res.note = "exact: lin T_K is the whole space";
    return res;
  }
  const Mat m = prog.jacobian(x).transpose() * nb;
  const Mat w = nullspace(m, 1e-10 * std::max(1.0, m.norm()));
  if (w.cols() == 0) {
    res.verdict = Verdict::Holds;
    res.margin = smallest_singular_value(m);
  } else {
    res.verdict = Verdict::Fails;
    res.margin = 0.0;
    res.witness = (nb * w.col(0)).normalized();
  }
  res.note = "exact linear algebra on ker G'* ∩ (lin T_K)⊥";
  return res;
}

ConditionResult check_srcq(const ConicProgram& prog, const Vec& x, const Vec& y, const CheckOptions& opts) {
  require_affine(prog, "check_srcq");
  const SpectralFrame frame = spectral_frame(prog.cone, prog.G(x) + y);
  return polar_triviality(prog.jacobian(x), CriticalCone(frame), opts);
}

// ---- second order ---------------------------------------------------------------------

ConditionResult check_sosc(const ConicProgram& prog, const Vec& x, const Vec& y, const CheckOptions& opts) {
  require_affine(prog, "check_sosc");
  return sosc_for(prog, x, y, opts);
}

ConditionResult check_robinson_sosc(const ConicProgram& prog, const Vec& x,
                                    const std::vector<Vec>& multipliers, const CheckOptions& opts) {
  require_affine(prog, "check_robinson_sosc");
  ConditionResult res;
  if (multipliers.empty()) {
    res.verdict = Verdict::Inconclusive;
    res.note = "no multipliers supplied";
    return res;
  }
  res.margin = kInf;
  bool all_hold = true;
  for (const Vec& y : multipliers) {
    ConditionResult r = sosc_for(prog, x, y, opts);
    if (r.margin < res.margin) {
      res.margin = r.margin;
      res.witness = r.witness;
    }
    if (r.verdict == Verdict::Fails) {
      res.verdict = Verdict::Fails;
      res.witness = r.witness;
      all_hold = false;
      break;
    }
    if (r.verdict != Verdict::Holds) all_hold = false;
  }
  if (res.verdict != Verdict::Fails) res.verdict = all_hold ? Verdict::Holds : Verdict::Inconclusive;
  res.note = multipliers.size() == 1
                 ? "evaluated at the single supplied multiplier"
                 : "relative to " + std::to_string(multipliers.size()) + " supplied multipliers";
  return res;
}

ConditionResult affine_hull_probe(const ConicProgram& prog, const Vec& x, const Vec& y) {
  require_affine(prog, "affine_hull_probe");
  const ProblemCriticalCone pcc(prog, x, y);
  ConditionResult res;
  res.note = "exact eigenvalue computation of the second-order form on aff C(x̄)";
  if (pcc.is_zero()) {
    res.verdict = Verdict::Holds;
    res.margin = kInf;
    return res;
  }
  const Mat q = second_order_form(prog, x, y, pcc.frame());
  const Mat& z = pcc.span_basis();
  const EigDecomp e = sym_eig(Mat(z.transpose() * q * z));
  const auto last = e.values.size() - 1;
  res.margin = e.values(last);
  if (res.margin > kSoscFailTol) {
    res.verdict = Verdict::Holds;
  } else {
    res.verdict = Verdict::Fails;
    res.witness = (z * e.vectors.col(last)).normalized();
  }
  return res;
}

// ---- kernel probe -------------------------------------------------------------------

namespace {

struct KernelSystem {
  Mat h, j;
  SpectralFrame frame;
  int n, m;

  Vec residual(const Vec& w) const {
    const Vec dx = w.head(n), dy = w.tail(m);
    const Vec jdx = j * dx;
    return stack(h * dx + j.transpose() * dy, jdx - dir_deriv(frame, jdx + dy));
  }

  Mat jacobian(const Vec& w) const {
    const Vec dx = w.head(n), dy = w.tail(m);
    const Mat l = dir_deriv_jacobian(frame, j * dx + dy);
    Mat out(n + m, n + m);
    out.topLeftCorner(n, n) = h;
    out.topRightCorner(n, m) = j.transpose();
    out.bottomLeftCorner(m, n) = j - l * j;
    out.bottomRightCorner(m, m) = -l;
    return out;
  }

  double value(const Vec& w) const { return residual(w).squaredNorm(); }
};

KernelSystem kernel_system(const ConicProgram& prog, const Vec& x, const Vec& y) {
  require_affine(prog, "kernel_probe");
  return {prog.hessian_lagrangian(x, y), prog.jacobian(x), spectral_frame(prog.cone, prog.G(x) + y),
          prog.n, prog.cone.dim()};
}

// Descent on the unit sphere mixing two moves: the smallest eigenvector of
// JᵀJ on the current linear piece, and a backtracking gradient step.
std::pair<double, Vec> sphere_descent(const KernelSystem& ks, Vec w) {
  double val = ks.value(w);
  double step = 1.0;
  for (int it = 0; it < 200 && val > 1e-30; ++it) {
    const Mat jm = ks.jacobian(w);
    double best_val = val;
    Vec best_w = w;

    const EigDecomp e = sym_eig(Mat(jm.transpose() * jm));
    Vec v = e.vectors.col(e.values.size() - 1);
    if (v.dot(w) < 0.0) v = -v;
    const double vv = ks.value(v);
    if (vv < best_val) {
      best_val = vv;
      best_w = v;
    }

    const Vec g = 2.0 * jm.transpose() * ks.residual(w);
    const Vec gt = g - g.dot(w) * w;
    for (int bt = 0; bt < 30; ++bt) {
      const Vec cand = (w - step * gt).normalized();
      const double cv = ks.value(cand);
      if (cv < best_val) {
        best_val = cv;
        best_w = cand;
        step *= 2.0;
        break;
      }
      step *= 0.5;
    }
    if (best_val >= val * (1.0 - 1e-12)) break;
    w = best_w;
    val = best_val;
  }
  return {val, w};
}

}  // namespace

double kernel_residual(const ConicProgram& prog, const Vec& x, const Vec& y, const Vec& w) {
  return kernel_system(prog, x, y).value(w);
}

KernelProbeResult kernel_probe(const ConicProgram& prog, const Vec& x, const Vec& y, const CheckOptions& opts) {
  const KernelSystem ks = kernel_system(prog, x, y);
  KernelProbeResult res;
  res.starts = opts.starts;
  res.min_residual = kInf;
  Vec best;
  for (const Vec& w0 : detail::random_unit_vectors(ks.n + ks.m, opts.starts, opts.seed ^ 0x6b65726eull)) {
    const auto [val, w] = sphere_descent(ks, w0);
    if (val < res.min_residual) {
      res.min_residual = val;
      best = w;
    }
  }
  if (res.min_residual <= kWitnessTol) {
    res.verdict = Verdict::Fails;
    res.witness = best;
  } else if (res.min_residual >= kClearTol) {
    res.verdict = Verdict::Holds;
  } else {
    res.verdict = Verdict::Inconclusive;
    res.witness = best;
  }
  return res;
}

// ---- report -----------------------------------------------------------------------------

ConditionReport assemble_report(const ConicProgram& prog, const Vec& x, const Vec& y,
                                const ReportOptions& opts) {
  require_affine(prog, "assemble_report");
  ConditionReport rep;
  rep.problem = prog.name;
  rep.x = x;
  rep.y = y;
  rep.multipliers = recover_multipliers(prog, x, prog.zero_perturbation());

  const ProblemCriticalCone pcc(prog, x, y);
  rep.critical_cone_dim = static_cast<int>(pcc.span_basis().cols());
  rep.critical_cone_is_subspace = pcc.is_subspace();

  rep.rcq = check_rcq(prog, x, opts.check);
  rep.nondegeneracy = check_nondegeneracy(prog, x);
  rep.srcq = check_srcq(prog, x, y, opts.check);
  rep.sosc = check_sosc(prog, x, y, opts.check);
  const std::vector<Vec> samples = opts.multiplier_samples.empty() ? std::vector<Vec>{y} : opts.multiplier_samples;
  rep.robinson_sosc = check_robinson_sosc(prog, x, samples, opts.check);
  rep.affine_hull_probe = affine_hull_probe(prog, x, y);
  rep.kernel_probe = kernel_probe(prog, x, y, opts.check);

  if (rep.srcq.verdict == Verdict::Fails || rep.sosc.verdict == Verdict::Fails) {
    rep.srcq_and_sosc = Verdict::Fails;
  } else if (rep.srcq.verdict == Verdict::Holds && rep.sosc.verdict == Verdict::Holds) {
    rep.srcq_and_sosc = Verdict::Holds;
  } else {
    rep.srcq_and_sosc = Verdict::Inconclusive;
  }
  rep.consistent = rep.srcq_and_sosc != Verdict::Inconclusive &&
                   rep.kernel_probe.verdict != Verdict::Inconclusive &&
                   rep.srcq_and_sosc == rep.kernel_probe.verdict;

  if (rep.nondegeneracy.verdict == Verdict::Holds && rep.srcq.verdict != Verdict::Holds) {
    rep.inconsistencies.push_back("nondegeneracy holds but SRCQ is not reported as holding");
  }
  if (rep.nondegeneracy.verdict == Verdict::Holds && rep.rcq.verdict == Verdict::Fails) {
    rep.inconsistencies.push_back("nondegeneracy holds but RCQ fails");
  }
  if (rep.srcq.verdict == Verdict::Holds && rep.multipliers && !rep.multipliers->is_singleton) {
    rep.inconsistencies.push_back("SRCQ holds but the multiplier set is not a singleton");
  }
  if (!rep.multipliers) rep.notes.push_back("multiplier recovery found no multiplier at x");
  rep.notes.push_back("Robinson's SOSC: " + rep.robinson_sosc.note);
  rep.notes.push_back("Aubin property and strong regularity are not checkable by this tool");
  return rep;
}

}  // namespace kktstab
