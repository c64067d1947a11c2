#pragma once

#include "kktstab/linalg.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace kktstab::detail {

using VecMap = std::function<Vec(const Vec&)>;

/// Deterministic points on the unit sphere of R^k for k <= 3: {±1}, 3600
/// points on the circle, or a 20000-point Fibonacci lattice.
std::vector<Vec> sphere_grid(int k);

std::vector<Vec> random_unit_vectors(int k, int count, std::uint64_t seed);

struct SphereMin {
  double value = 0.0;
  Vec point;
  bool found = false;
};

/// Minimizes |residual(V c)|² over unit c, where `residual(v) = v − Π_S(v)` for
/// a closed convex cone S. A zero minimum means span V meets S outside 0.
SphereMin subspace_cone_search(const Mat& v, const VecMap& residual, int starts, std::uint64_t seed);

/// Certifies that the convex cone range(M) + S is dense by driving the gap
/// between ±e_i and range(M) + S to below `tol` with alternating projections.
bool dense_sum_certificate(const Mat& m, const VecMap& project_s, double tol);

}  // namespace kktstab::detail
