#include "kktstab/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace kktstab {

namespace {

constexpr double kUsableResidual = 1e-9;

bool usable(const SweepRecord& r) { return r.solved && r.residual <= kUsableResidual; }

bool same_direction(const Perturbation& p, const Perturbation& q) {
  return p.a.size() == q.a.size() && p.b.size() == q.b.size() && (p.a - q.a).norm() <= 1e-12 &&
         (p.b - q.b).norm() <= 1e-12;
}

using Oracle = KKTPoint (*)(double);

KKTPoint example3_drift(double eps) { return oracle_example3(eps, -example3_xi_bound(eps)); }

Oracle registered_oracle(const ConicProgram& prog, const Perturbation& direction) {
  if (prog.name == "example1" && same_direction(direction, builtin_fixture("example1").direction)) {
    return &oracle_example1;
  }
  if (prog.name == "example3" && same_direction(direction, builtin_fixture("example3").direction)) {
    return &example3_drift;
  }
  return nullptr;
}

double parse_number(const std::string& s, const std::string& spec) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("grid '" + spec + "': '" + s + "' is not a number");
  }
  if (pos != s.size() || !std::isfinite(v)) {
    throw std::invalid_argument("grid '" + spec + "': '" + s + "' is not a number");
  }
  return v;
}

}  // namespace

int SweepResult::solved_count() const {
  return static_cast<int>(std::count_if(records.begin(), records.end(), [](const auto& r) { return r.solved; }));
}

double observed_distance(const SweepRecord& rec, const std::string& observable) {
  if (observable == "multiplier-drift") return rec.dist_y;
  if (observable == "full") return std::hypot(rec.dist_x, rec.dist_y);
  return rec.dist_x;
}

SweepResult run_sweep(const ConicProgram& prog, const Perturbation& direction, const std::vector<double>& grid,
                      const KKTPoint& reference, const SweepOptions& opts) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0 && grid[i] <= 1.0)) throw std::invalid_argument("sweep grid values must lie in (0, 1]");
    if (i > 0 && !(grid[i] < grid[i - 1])) throw std::invalid_argument("sweep grid must be strictly decreasing");
  }
  if (opts.observable != "x" && opts.observable != "x2" && opts.observable != "multiplier-drift" &&
      opts.observable != "full") {
    throw std::invalid_argument("unknown observable '" + opts.observable + "'");
  }

  SweepResult res;
  res.grid = grid;
  res.observable = opts.observable;
  const Oracle oracle = opts.use_oracle ? registered_oracle(prog, direction) : nullptr;
  res.method = oracle ? "oracle" : "solver";

  KKTPoint start = reference;
  for (double eps : grid) {
    const Perturbation pert = direction.scaled(eps);
    SweepRecord rec;
    rec.eps = eps;
    try {
      if (oracle) {
        rec.point = oracle(eps);
        rec.residual = natural_residual(prog, rec.point.x, rec.point.y, pert);
        rec.point.residual = rec.residual;
        rec.solved = rec.residual <= kUsableResidual;
      } else {
        const SolveResult sr = solve_kkt(prog, pert, opts.warm_start ? start : reference, opts.solver);
        rec.point = sr.point;
        rec.residual = sr.point.residual;
        rec.iterations = sr.iterations;
        rec.solved = sr.converged;
      }
    } catch (const std::exception&) {
      rec.solved = false;
      rec.residual = std::numeric_limits<double>::infinity();
    }
    if (rec.point.x.size() == reference.x.size() && rec.point.y.size() == reference.y.size()) {
      rec.dist_x = opts.observable == "x2" && reference.x.size() >= 2
                       ? std::abs(rec.point.x(1) - reference.x(1))
                       : (rec.point.x - reference.x).norm();
      rec.dist_y = (rec.point.y - reference.y).norm();
    } else {
      rec.dist_x = rec.dist_y = std::numeric_limits<double>::quiet_NaN();
    }
    if (rec.solved) start = rec.point;
    res.records.push_back(std::move(rec));
  }

  try {
    res.fit = fit_exponent(res, opts.drop_decades);
  } catch (const InsufficientData&) {
    res.fit.reset();
  }
  return res;
}

FitResult fit_power_law(const std::vector<double>& eps, const std::vector<double>& dist) {
  if (eps.size() != dist.size()) throw std::invalid_argument("fit_power_law: size mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (eps[i] > 0.0 && dist[i] > 0.0 && std::isfinite(dist[i])) {
      lx.push_back(std::log(eps[i]));
      ly.push_back(std::log(dist[i]));
    }
  }
  const auto m = static_cast<int>(lx.size());
  if (m < 4) throw InsufficientData("fit needs at least 4 usable records, got " + std::to_string(m));

  double mx = 0.0, my = 0.0;
  for (int i = 0; i < m; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < m; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx <= 0.0) throw InsufficientData("fit needs at least two distinct eps values");
  FitResult fit;
  fit.slope = sxy / sxx;
  const double icept = my - fit.slope * mx;
  double sse = 0.0;
  for (int i = 0; i < m; ++i) {
    const double e = ly[i] - icept - fit.slope * lx[i];
    sse += e * e;
  }
  fit.stderr_ = std::sqrt(sse / (m - 2) / sxx);
  fit.used = m;
  fit.eps_lo = std::exp(*std::min_element(lx.begin(), lx.end()));
  fit.eps_hi = std::exp(*std::max_element(lx.begin(), lx.end()));
  return fit;
}

FitResult fit_exponent(const SweepResult& result, double drop_decades) {
  double eps_max = 0.0;
  for (const auto& r : result.records) eps_max = std::max(eps_max, r.eps);
  const double cutoff = eps_max * std::pow(10.0, -drop_decades) * (1.0 + 1e-9);
  std::vector<double> eps, dist;
  for (const auto& r : result.records) {
    if (!usable(r) || r.eps > cutoff) continue;
    eps.push_back(r.eps);
    dist.push_back(observed_distance(r, result.observable));
  }
  FitResult fit = fit_power_law(eps, dist);
  // Report the window with the exact grid values rather than exp(log(ε)).
  fit.eps_lo = *std::min_element(eps.begin(), eps.end());
  fit.eps_hi = *std::max_element(eps.begin(), eps.end());
  return fit;
}

double kappa_hat(const SweepResult& result) {
  double k = 0.0;
  for (const auto& r : result.records) {
    if (usable(r)) k = std::max(k, observed_distance(r, result.observable) / r.eps);
  }
  return k;
}

KKTPoint oracle_example1(double eps) {
  if (!(eps >= 0.0 && eps <= 0.1)) throw std::invalid_argument("oracle_example1 needs 0 <= eps <= 0.1");
  KKTPoint p;
  if (eps == 0.0) {
    p.x = Vec::Zero(2);
    p.y = svec((Mat(2, 2) << -1, 0, 0, 0).finished());
    return p;
  }
  const double e4 = std::pow(eps, 4);
  // Stationarity of x₁ + x₁² + ε⁴/x₁²: h(x₁) = 1 + 2x₁ − 2ε⁴/x₁³, increasing.
  const auto h = [&](double t) { return 1.0 + 2.0 * t - 2.0 * e4 / (t * t * t); };
  double hi = std::cbrt(2.0 * e4);
  double lo = std::cbrt(2.0 * e4 / (1.0 + 2.0 * hi));
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (h(mid) < 0.0 ? lo : hi) = mid;
  }
  const double x1 = 0.5 * (lo + hi);
  const double x2 = eps * eps / x1;
  p.x = (Vec(2) << x1, x2).finished();
  Mat y(2, 2);
  y << -1.0 - 2.0 * x1, (1.0 + 2.0 * x1) * x1 / eps, (1.0 + 2.0 * x1) * x1 / eps, -2.0 * x2;
  p.y = svec(y);
  return p;
}

double example3_xi_bound(double eps) { return std::sqrt(eps + 2.0 * eps * eps); }

KKTPoint oracle_example3(double eps, double xi) {
  if (!(eps >= 0.0 && eps <= 0.1)) throw std::invalid_argument("oracle_example3 needs 0 <= eps <= 0.1");
  const double slack = 1e-14;
  if (std::abs(xi) > example3_xi_bound(eps) + slack) {
    throw std::invalid_argument("oracle_example3: |xi| exceeds sqrt(eps + 2 eps^2)");
  }
  if (xi > -1.5 * eps + slack) {
    throw std::invalid_argument("oracle_example3: xi must be <= -3 eps / 2 for a nonpositive t-multiplier");
  }
  KKTPoint p;
  const Vec x = example3_root_b().inverse() * (Vec(2) << -1.0 + eps, -1.0 - eps).finished();
  p.x = (Vec(3) << x(0), x(1), 0.0).finished();
  Mat y(2, 2);
  y << 1.0 + 2.0 * eps, xi, xi, eps;
  p.y = Vec(4);
  p.y << 3.0 * eps + 2.0 * xi, -svec(y);
  return p;
}

std::vector<double> default_grid() {
  std::vector<double> g;
  for (int k = 2; k <= 12; ++k) g.push_back(std::pow(10.0, -0.5 * k));
  return g;
}

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 3) throw std::invalid_argument("grid '" + spec + "' must have the form a:b:step");
  const double a = parse_number(parts[0], spec);
  const double b = parse_number(parts[1], spec);
  const double step = parse_number(parts[2], spec);
  const double la = a > 0.0 ? std::log10(a) : a;
  const double lb = b > 0.0 ? std::log10(b) : b;
  if (!(step > 0.0)) throw std::invalid_argument("grid '" + spec + "': step must be positive");
  if (la > 0.0 || lb > 0.0) throw std::invalid_argument("grid '" + spec + "': eps must lie in (0, 1]");
  const double hi = std::max(la, lb), lo = std::min(la, lb);
  std::vector<double> g;
  const int count = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
  if (count > 10000) throw std::invalid_argument("grid '" + spec + "' has too many points");
  for (int k = 0; k < count; ++k) g.push_back(std::pow(10.0, hi - k * step));
  return g;
}

void write_csv(std::ostream& os, const SweepResult& result) {
  os << "eps,solved,dist_x,dist_y,residual,iterations\n";
  char buf[512];
  for (const auto& r : result.records) {
    std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g,%.17g,%.17g,%d\n", r.eps, r.solved ? 1 : 0, r.dist_x,
                  r.dist_y, r.residual, r.iterations);
    os << buf;
  }
}

}  // namespace kktstab
