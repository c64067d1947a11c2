#include "kktstab/kkt.hpp"

#include <cmath>
#include <random>

namespace kktstab {

namespace {

void check_dims(const ConicProgram& prog, const Vec& x, const Vec& y, const Perturbation& pert) {
  if (x.size() != prog.n || y.size() != prog.cone.dim() || pert.a.size() != prog.n ||
      pert.b.size() != prog.cone.dim()) {
    throw std::invalid_argument("KKT map: dimension mismatch");
  }
}

Vec stack(const Vec& a, const Vec& b) {
  Vec out(a.size() + b.size());
  out << a, b;
  return out;
}

}  // namespace

Vec natural_map(const ConicProgram& prog, const Vec& x, const Vec& y, const Perturbation& pert) {
  check_dims(prog, x, y, pert);
  const Vec g = prog.G(x) + pert.b;
  const Vec r1 = prog.grad_f(x) - pert.a + prog.jacobian(x).transpose() * y;
  const Vec r2 = g - project(prog.cone, g + y);
  return stack(r1, r2);
}

double natural_residual(const ConicProgram& prog, const Vec& x, const Vec& y, const Perturbation& pert) {
  return natural_map(prog, x, y, pert).norm();
}

Mat natural_map_jacobian(const ConicProgram& prog, const Vec& x, const Vec& y, const Perturbation& pert) {
  check_dims(prog, x, y, pert);
  const int n = prog.n;
  const int m = prog.cone.dim();
  const Mat gp = prog.jacobian(x);
  const SpectralFrame frame = spectral_frame(prog.cone, prog.G(x) + pert.b + y);
  const Mat v = projection_jacobian(frame);
  Mat j(n + m, n + m);
  j.topLeftCorner(n, n) = prog.hessian_lagrangian(x, y);
  j.topRightCorner(n, m) = gp.transpose();
  j.bottomLeftCorner(m, n) = gp - v * gp;
  j.bottomRightCorner(m, m) = -v;
  return j;
}

Vec normal_map(const ConicProgram& prog, const Vec& x, const Vec& z) {
  if (x.size() != prog.n || z.size() != prog.cone.dim()) {
    throw std::invalid_argument("normal_map: dimension mismatch");
  }
  const Vec pz = project(prog.cone, z);
  return stack(prog.grad_f(x) + prog.jacobian(x).transpose() * (z - pz), prog.G(x) - pz);
}

Vec normal_map_residual(const ConicProgram& prog, const Vec& x, const Vec& z, const Perturbation& pert) {
  return normal_map(prog, x, z) - stack(pert.a, -pert.b);
}

namespace {

bool convex_affine(const ConicProgram& prog) {
  if (!prog.is_affine()) return false;
  const EigDecomp e = sym_eig(prog.objective.Q.dense());
  return e.values.size() == 0 || e.values(e.values.size() - 1) >= -1e-12;
}

// Extragradient iteration for the saddle operator
// T(x, y) = (∇f(x) − a + G'*y, −(G(x) + b)) over R^n × K°. Stops once the
// natural residual falls below `target`.
Vec extragradient(const ConicProgram& prog, const Perturbation& pert, Vec w, double target, int iterations) {
  const int n = prog.n;
  const int m = prog.cone.dim();
  const Mat gp = prog.jacobian(w.head(n));
  Mat op = Mat::Zero(n + m, n + m);
  op.topLeftCorner(n, n) = prog.objective.Q.dense();
  op.topRightCorner(n, m) = gp.transpose();
  op.bottomLeftCorner(m, n) = -gp;
  const double lip = std::max(Eigen::JacobiSVD<Mat>(op).singularValues()(0), 1e-12);
  const double step = 0.9 / lip;
  auto oper = [&](const Vec& v) {
    const Evaluation ev = evaluate(prog, v.head(n), pert);
    return stack(ev.grad + gp.transpose() * v.tail(m), -ev.g);
  };
  auto proj = [&](Vec v) {
    v.tail(m) = project_polar(prog.cone, v.tail(m));
    return v;
  };
  w = proj(w);
  for (int it = 0; it < iterations; ++it) {
    const Vec mid = proj(w - step * oper(w));
    w = proj(w - step * oper(mid));
    if (it % 50 == 49 && natural_residual(prog, w.head(n), w.tail(m), pert) <= target) break;
  }
  return w;
}

}  // namespace

SolveResult solve_kkt(const ConicProgram& prog, const Perturbation& pert, const KKTPoint& start,
                      const SolverOptions& opts) {
  const int n = prog.n;
  const int m = prog.cone.dim();
  check_dims(prog, start.x, start.y, pert);

  Vec w = stack(start.x, start.y);
  auto residual_at = [&](const Vec& v) { return natural_map(prog, v.head(n), v.tail(m), pert); };

  SolveResult res;
  Vec f = residual_at(w);
  double norm = f.norm();
  res.trace.push_back(norm);
  double lambda = opts.lambda0;

  // One damped step with the Jacobian element at w; λ grows until the step
  // decreases |F| or exceeds 1e12.
  auto try_step = [&]() {
    const Mat j = natural_map_jacobian(prog, w.head(n), w.tail(m), pert);
    const Mat jtj = j.transpose() * j;
    const Vec g = j.transpose() * f;
    while (lambda < 1e12) {
      const Mat lhs = jtj + lambda * Mat::Identity(n + m, n + m);
      const Vec w_try = w + lhs.ldlt().solve(-g);
      const Vec f_try = residual_at(w_try);
      const double n_try = f_try.norm();
      if (std::isfinite(n_try) && n_try < norm) {
        w = w_try;
        f = f_try;
        norm = n_try;
        lambda = std::max(0.25 * lambda, 1e-16);
        return true;
      }
      lambda *= 4.0;
    }
    return false;
  };

  const bool monotone = convex_affine(prog);
  while (norm > opts.tol && res.iterations < opts.max_iter) {
    if (!std::isfinite(norm)) break;
    if (try_step()) {
      ++res.iterations;
      res.trace.push_back(norm);
      continue;
    }
    // |F|² has stationary points that are not solutions. For convex programs
    // with affine G, extragradient on the saddle operator is globally
    // convergent and moves the iterate past them.
    if (!monotone || res.escapes >= opts.max_escapes) {
      res.message = "stagnated: damping parameter exceeded 1e12";
      break;
    }
    const Vec w_eg = extragradient(prog, pert, w, 0.1 * norm, opts.escape_iterations);
    const Vec f_eg = residual_at(w_eg);
    ++res.escapes;
    if (!(f_eg.norm() < norm)) {
      res.message = "stagnated: extragradient escape made no progress";
      break;
    }
    w = w_eg;
    f = f_eg;
    norm = f.norm();
    lambda = opts.lambda0;
    res.trace.push_back(norm);
  }

  res.point = {w.head(n), w.tail(m), norm};
  res.converged = norm <= opts.tol;
  if (res.converged) {
    res.message = "converged";
  } else if (res.message.empty()) {
    res.message = "iteration limit reached";
  }
  return res;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

SolveResult solve_kkt_multistart(const ConicProgram& prog, const Perturbation& pert,
                                 const KKTPoint& center, double radius, int starts,
                                 const SolverOptions& opts, std::uint64_t seed) {
  std::mt19937_64 rng(fnv1a(prog.name) ^ seed);
  std::normal_distribution<double> normal;
  const int n = prog.n;
  const int m = prog.cone.dim();

  SolveResult best;
  best.point.residual = std::numeric_limits<double>::infinity();
  for (int s = 0; s < std::max(starts, 1); ++s) {
    KKTPoint start = center;
    if (s > 0) {
      Vec dir(n + m);
      for (Eigen::Index i = 0; i < dir.size(); ++i) dir(i) = normal(rng);
      dir *= radius / dir.norm();
      start.x += dir.head(n);
      start.y += dir.tail(m);
    }
    SolveResult r = solve_kkt(prog, pert, start, opts);
    if (r.converged) return r;
    if (r.point.residual < best.point.residual) best = std::move(r);
  }
  return best;
}

}  // namespace kktstab
