#include "search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace kktstab::detail {

std::vector<Vec> sphere_grid(int k) {
  std::vector<Vec> pts;
  if (k == 1) {
    pts.push_back(Vec::Constant(1, 1.0));
    pts.push_back(Vec::Constant(1, -1.0));
  } else if (k == 2) {
    constexpr int kCount = 3600;
    for (int i = 0; i < kCount; ++i) {
      const double t = 2.0 * std::numbers::pi * i / kCount;
      Vec p(2);
      p << std::cos(t), std::sin(t);
      pts.push_back(p);
    }
  } else if (k == 3) {
    constexpr int kCount = 20000;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < kCount; ++i) {
      const double z = 1.0 - 2.0 * (i + 0.5) / kCount;
      const double rad = std::sqrt(1.0 - z * z);
      const double t = golden * i;
      Vec p(3);
      p << rad * std::cos(t), rad * std::sin(t), z;
      pts.push_back(p);
    }
  }
  return pts;
}

std::vector<Vec> random_unit_vectors(int k, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<Vec> out;
  out.reserve(count);
  while (static_cast<int>(out.size()) < count) {
    Vec v(k);
    for (int i = 0; i < k; ++i) v(i) = normal(rng);
    const double nv = v.norm();
    if (nv > 1e-12) out.push_back(v / nv);
  }
  return out;
}

namespace {

double objective(const Mat& v, const VecMap& residual, const Vec& c) {
  return residual(v * c).squaredNorm();
}

// Normalized alternating projections: c ← normalize(c − Vᵀ residual(V c)).
SphereMin refine(const Mat& v, const VecMap& residual, Vec c, int iterations) {
  double val = objective(v, residual, c);
  for (int it = 0; it < iterations && val > 1e-30; ++it) {
    Vec next = c - v.transpose() * residual(v * c);
    const double nn = next.norm();
    if (nn < 1e-14) break;
    next /= nn;
    const double nval = objective(v, residual, next);
    if (nval > val * (1.0 - 1e-12)) {
      if (nval < val) {
        c = next;
        val = nval;
      }
      break;
    }
    c = next;
    val = nval;
  }
  return {val, c, true};
}

}  // namespace

SphereMin subspace_cone_search(const Mat& v, const VecMap& residual, int starts, std::uint64_t seed) {
  const int k = static_cast<int>(v.cols());
  SphereMin best;
  best.value = std::numeric_limits<double>::infinity();
  if (k == 0) return best;

  auto consider = [&](const SphereMin& s) {
    if (s.value < best.value) best = s;
  };

  std::vector<std::pair<double, Vec>> seeds;
  for (const Vec& c : sphere_grid(k)) seeds.emplace_back(objective(v, residual, c), c);
  std::sort(seeds.begin(), seeds.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  const std::size_t keep = std::min<std::size_t>(seeds.size(), 16);
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (i < keep) {
      consider(refine(v, residual, seeds[i].second, 2000));
    } else {
      consider({seeds[i].first, seeds[i].second, true});
    }
  }
  for (const Vec& c : random_unit_vectors(k, starts, seed)) consider(refine(v, residual, c, 500));

  best.point = v * best.point;
  return best;
}

bool dense_sum_certificate(const Mat& m, const VecMap& project_s, double tol) {
  const auto dim = m.rows();
  const Mat range = m.cols() > 0 ? range_basis(m, 1e-10 * std::max(1.0, m.norm())) : Mat(dim, 0);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (double sign : {1.0, -1.0}) {
      const Vec p = sign * Vec::Unit(dim, i);
      Vec u = Vec::Zero(dim);
      Vec r = Vec::Zero(dim);
      double gap = 1.0;
      for (int it = 0; it < 5000 && gap > tol; ++it) {
        u = project_s(p - r);
        r = range * (range.transpose() * (p - u));
        gap = (p - u - r).norm();
      }
      if (gap > tol) return false;
    }
  }
  return true;
}

}  // namespace kktstab::detail
