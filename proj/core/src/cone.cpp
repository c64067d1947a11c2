#include "kktstab/cones.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace kktstab {

std::string to_string(BlockKind kind) {
  switch (kind) {
    case BlockKind::Zero: return "zero";
    case BlockKind::Orthant: return "orthant";
    case BlockKind::SOC: return "soc";
    case BlockKind::PSD: return "psd";
  }
  return "unknown";
}

std::string to_string(SocCase c) {
  switch (c) {
    case SocCase::Interior: return "interior";
    case SocCase::PolarInterior: return "polar-interior";
    case SocCase::Boundary: return "boundary";
    case SocCase::BoundaryPrimal: return "boundary-primal";
    case SocCase::BoundaryPolar: return "boundary-polar";
    case SocCase::Apex: return "apex";
  }
  return "unknown";
}

Cone::Cone(std::vector<ConeBlock> blocks) : blocks_(std::move(blocks)) {
  for (const auto& b : blocks_) {
    if (b.size < 1) throw std::invalid_argument("Cone: block size must be >= 1");
    offsets_.push_back(dim_);
    dim_ += b.dim();
  }
}

bool Cone::polyhedral() const {
  for (const auto& b : blocks_)
    if (b.kind == BlockKind::SOC || b.kind == BlockKind::PSD) return false;
  return true;
}

Cone product(const Cone& a, const Cone& b) {
  auto blocks = a.blocks();
  blocks.insert(blocks.end(), b.blocks().begin(), b.blocks().end());
  return Cone(std::move(blocks));
}

int svec_dim(int n) { return n * (n + 1) / 2; }

Vec svec(const Mat& x) {
  const int n = static_cast<int>(x.rows());
  Vec v(svec_dim(n));
  int k = 0;
  for (int j = 0; j < n; ++j) {
    for (int i = j; i < n; ++i) {
      v(k++) = i == j ? x(i, j) : std::numbers::sqrt2 * 0.5 * (x(i, j) + x(j, i));
    }
  }
  return v;
}

Mat smat(const Vec& v) {
  const int n = static_cast<int>(std::lround((std::sqrt(8.0 * v.size() + 1.0) - 1.0) / 2.0));
  if (svec_dim(n) != v.size()) throw std::invalid_argument("smat: length is not triangular");
  Mat x(n, n);
  int k = 0;
  for (int j = 0; j < n; ++j) {
    for (int i = j; i < n; ++i) {
      x(i, j) = x(j, i) = i == j ? v(k) : v(k) / std::numbers::sqrt2;
      ++k;
    }
  }
  return x;
}

Vec svec_unit(int n, int i, int j) {
  Mat e = Mat::Zero(n, n);
  if (i == j) {
    e(i, i) = 1.0;
  } else {
    e(i, j) = e(j, i) = 1.0 / std::numbers::sqrt2;
  }
  return svec(e);
}

namespace {

Vec project_block(const ConeBlock& block, const Vec& z) {
  switch (block.kind) {
    case BlockKind::Zero:
      return Vec::Zero(z.size());
    case BlockKind::Orthant:
      return z.cwiseMax(0.0);
    case BlockKind::SOC: {
      const double z0 = z(0);
      const double r = z.tail(z.size() - 1).norm();
      if (r <= z0) return z;
      if (r <= -z0) return Vec::Zero(z.size());
      Vec out(z.size());
      const double s = 0.5 * (z0 + r);
      out(0) = s;
      out.tail(z.size() - 1) = (s / r) * z.tail(z.size() - 1);
      return out;
    }
    case BlockKind::PSD: {
      const EigDecomp e = sym_eig(smat(z));
      const Vec pos = e.values.cwiseMax(0.0);
      return svec(e.vectors * pos.asDiagonal() * e.vectors.transpose());
    }
  }
  return z;
}

}  // namespace

Vec project(const Cone& cone, const Vec& z) {
  if (z.size() != cone.dim()) throw std::invalid_argument("project: dimension mismatch");
  Vec out(z.size());
  for (std::size_t k = 0; k < cone.blocks().size(); ++k) {
    const auto& b = cone.blocks()[k];
    out.segment(cone.offset(k), b.dim()) = project_block(b, z.segment(cone.offset(k), b.dim()));
  }
  return out;
}

Vec project_polar(const Cone& cone, const Vec& z) { return z - project(cone, z); }

double dist_to_cone(const Cone& cone, const Vec& z) { return (z - project(cone, z)).norm(); }

}  // namespace kktstab
