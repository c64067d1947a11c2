#include "kktstab/cones.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

namespace kktstab {

namespace {

constexpr double kTolFloor = 1e-14;

double pick_tol(double requested, double scale) {
  return requested > 0.0 ? requested : std::max(1e-9 * scale, kTolFloor);
}

// 0 = alpha, 1 = beta, 2 = gamma.
std::vector<int> classes(const BlockFrame& bf, int n) {
  std::vector<int> cls(n, 1);
  for (int i : bf.alpha) cls[i] = 0;
  for (int i : bf.gamma) cls[i] = 2;
  return cls;
}

Vec soc_normal(const BlockFrame& bf) {
  Vec n(bf.block.size);
  n(0) = -1.0;
  n.tail(bf.block.size - 1) = bf.w;
  return n / std::numbers::sqrt2;
}

Vec soc_ray(const BlockFrame& bf) {
  Vec u(bf.block.size);
  u(0) = 1.0;
  u.tail(bf.block.size - 1) = bf.w;
  return u / std::numbers::sqrt2;
}

// Derivative of the SOC projection on the region where it is differentiable
// with both spectral values nonzero and of opposite sign.
Mat soc_boundary_jacobian(double z0, double r, const Vec& w) {
  const int m = static_cast<int>(w.size()) + 1;
  Mat j(m, m);
  j(0, 0) = 1.0;
  j.block(0, 1, 1, m - 1) = w.transpose();
  j.block(1, 0, m - 1, 1) = w;
  j.block(1, 1, m - 1, m - 1) =
      (1.0 + z0 / r) * Mat::Identity(m - 1, m - 1) - (z0 / r) * w * w.transpose();
  return 0.5 * j;
}

Mat soc_clarke_jacobian(const Vec& z) {
  const int m = static_cast<int>(z.size());
  const double z0 = z(0);
  const double r = z.tail(m - 1).norm();
  if (r <= z0) return Mat::Identity(m, m);
  if (r <= -z0) return Mat::Zero(m, m);
  return soc_boundary_jacobian(z0, r, z.tail(m - 1) / r);
}

// Ω for the PSD projection at eigenvalues mu.
Mat psd_omega(const Vec& mu) {
  const auto n = mu.size();
  Mat om(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (mu(i) == mu(j)) {
        om(i, j) = mu(i) > 0.0 ? 1.0 : 0.0;
      } else {
        om(i, j) = (std::max(mu(i), 0.0) - std::max(mu(j), 0.0)) / (mu(i) - mu(j));
      }
    }
  }
  return om;
}

Mat psd_project_dense(const Mat& x) {
  if (x.rows() == 0) return x;
  const EigDecomp e = sym_eig(x);
  return e.vectors * e.values.cwiseMax(0.0).asDiagonal() * e.vectors.transpose();
}

std::vector<int> beta_indices(const std::vector<int>& cls) {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(cls.size()); ++i)
    if (cls[i] == 1) out.push_back(i);
  return out;
}

Mat sub(const Mat& m, const std::vector<int>& idx) {
  const auto k = static_cast<Eigen::Index>(idx.size());
  Mat out(k, k);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b) out(a, b) = m(idx[a], idx[b]);
  return out;
}

void put(Mat& m, const std::vector<int>& idx, const Mat& blk) {
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = 0; b < idx.size(); ++b) m(idx[a], idx[b]) = blk(a, b);
}

// Applies a blockwise map to every block of the frame.
Vec blockwise(const SpectralFrame& frame, const Vec& v,
              const std::function<Vec(const BlockFrame&, const Vec&)>& fn) {
  if (v.size() != frame.cone.dim()) throw std::invalid_argument("dimension mismatch with frame");
  Vec out(v.size());
  for (const auto& bf : frame.blocks) {
    const int d = bf.block.dim();
    out.segment(bf.offset, d) = fn(bf, v.segment(bf.offset, d));
  }
  return out;
}

Mat block_diag(const SpectralFrame& frame, const std::function<Mat(const BlockFrame&)>& fn) {
  const int dim = frame.cone.dim();
  Mat out = Mat::Zero(dim, dim);
  for (const auto& bf : frame.blocks) {
    const int d = bf.block.dim();
    out.block(bf.offset, bf.offset, d, d) = fn(bf);
  }
  return out;
}

Mat columns_of(int d, const std::function<Vec(const Vec&)>& lin) {
  Mat out(d, d);
  for (int k = 0; k < d; ++k) out.col(k) = lin(Vec::Unit(d, k));
  return out;
}

// ---- per-block critical cone -------------------------------------------------

Vec cc_project_block(const BlockFrame& bf, const Vec& d) {
  switch (bf.block.kind) {
    case BlockKind::Zero:
      return Vec::Zero(d.size());
    case BlockKind::Orthant: {
      Vec out = d;
      for (int i : bf.beta) out(i) = std::max(d(i), 0.0);
      for (int i : bf.gamma) out(i) = 0.0;
      return out;
    }
    case BlockKind::SOC: {
      switch (bf.soc_case) {
        case SocCase::Interior: return d;
        case SocCase::PolarInterior: return Vec::Zero(d.size());
        case SocCase::Boundary: {
          const Vec n = soc_normal(bf);
          return d - d.dot(n) * n;
        }
        case SocCase::BoundaryPrimal: {
          const Vec n = soc_normal(bf);
          const double s = d.dot(n);
          return s > 0.0 ? Vec(d - s * n) : d;
        }
        case SocCase::BoundaryPolar: {
          const Vec u = soc_ray(bf);
          return std::max(d.dot(u), 0.0) * u;
        }
        case SocCase::Apex:
          return project(Cone::soc(bf.block.size), d);
      }
      return d;
    }
    case BlockKind::PSD: {
      const int n = bf.block.size;
      const auto cls = classes(bf, n);
      const Mat dt = bf.P.transpose() * smat(d) * bf.P;
      Mat mt = Mat::Zero(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (cls[i] == 0 || cls[j] == 0) mt(i, j) = dt(i, j);
      const auto beta = beta_indices(cls);
      put(mt, beta, psd_project_dense(sub(dt, beta)));
      return svec(bf.P * mt * bf.P.transpose());
    }
  }
  return d;
}

Mat psd_frame_basis(const BlockFrame& bf, bool include_beta_beta) {
  const int n = bf.block.size;
  const auto cls = classes(bf, n);
  std::vector<Vec> cols;
  for (int j = 0; j < n; ++j) {
    for (int i = j; i < n; ++i) {
      const bool alpha_row = cls[i] == 0 || cls[j] == 0;
      const bool bb = cls[i] == 1 && cls[j] == 1;
      if (alpha_row || (include_beta_beta && bb)) {
        cols.push_back(svec(bf.P * smat(svec_unit(n, i, j)) * bf.P.transpose()));
      }
    }
  }
  Mat out(bf.block.dim(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = cols[k];
  return out;
}

Mat unit_columns(int d, const std::vector<int>& idx) {
  Mat out = Mat::Zero(d, static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out(idx[k], static_cast<Eigen::Index>(k)) = 1.0;
  return out;
}

Mat cc_basis_block(const BlockFrame& bf, bool span) {
  const int d = bf.block.dim();
  switch (bf.block.kind) {
    case BlockKind::Zero:
      return Mat(d, 0);
    case BlockKind::Orthant: {
      std::vector<int> idx = bf.alpha;
      if (span) idx.insert(idx.end(), bf.beta.begin(), bf.beta.end());
      std::sort(idx.begin(), idx.end());
      return unit_columns(d, idx);
    }
    case BlockKind::SOC: {
      const Mat all = Mat::Identity(d, d);
      switch (bf.soc_case) {
        case SocCase::Interior: return all;
        case SocCase::PolarInterior: return Mat(d, 0);
        case SocCase::Boundary: return nullspace(soc_normal(bf).transpose(), 1e-12);
        case SocCase::BoundaryPrimal:
          return span ? all : nullspace(soc_normal(bf).transpose(), 1e-12);
        case SocCase::BoundaryPolar: return span ? Mat(soc_ray(bf)) : Mat(d, 0);
        case SocCase::Apex: return span ? all : Mat(d, 0);
      }
      return all;
    }
    case BlockKind::PSD:
      return psd_frame_basis(bf, span);
  }
  return Mat(d, 0);
}

Mat assemble_basis(const SpectralFrame& frame, bool span) {
  std::vector<Mat> parts;
  Eigen::Index total = 0;
  for (const auto& bf : frame.blocks) {
    parts.push_back(cc_basis_block(bf, span));
    total += parts.back().cols();
  }
  Mat out = Mat::Zero(frame.cone.dim(), total);
  Eigen::Index col = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto& bf = frame.blocks[k];
    out.block(bf.offset, col, bf.block.dim(), parts[k].cols()) = parts[k];
    col += parts[k].cols();
  }
  return out;
}

Mat orth_complement(const Mat& basis, int dim) {
  if (basis.cols() == 0) return Mat::Identity(dim, dim);
  return nullspace(basis.transpose(), 1e-10);
}

// ---- per-block directional derivative -----------------------------------------

// Coefficient of the frame entry (i, j) in the linear part of Π'(C; ·) for a PSD
// block; beta-beta entries are handled separately.
double psd_coefficient(const BlockFrame& bf, const std::vector<int>& cls, int i, int j) {
  if (cls[i] == 0 && cls[j] == 0) return 1.0;
  if ((cls[i] == 0 && cls[j] == 1) || (cls[i] == 1 && cls[j] == 0)) return 1.0;
  if (cls[i] == 0 && cls[j] == 2) return bf.lambda(i) / (bf.lambda(i) - bf.lambda(j));
  if (cls[i] == 2 && cls[j] == 0) return bf.lambda(j) / (bf.lambda(j) - bf.lambda(i));
  return 0.0;
}

Vec dd_block(const BlockFrame& bf, const Vec& h) {
  switch (bf.block.kind) {
    case BlockKind::Zero:
    case BlockKind::Orthant:
      return cc_project_block(bf, h);
    case BlockKind::SOC:
      if (bf.soc_case == SocCase::Boundary) return soc_boundary_jacobian(bf.z0, bf.r, bf.w) * h;
      return cc_project_block(bf, h);
    case BlockKind::PSD: {
      const int n = bf.block.size;
      const auto cls = classes(bf, n);
      const Mat ht = bf.P.transpose() * smat(h) * bf.P;
      Mat mt = Mat::Zero(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) mt(i, j) = psd_coefficient(bf, cls, i, j) * ht(i, j);
      const auto beta = beta_indices(cls);
      put(mt, beta, psd_project_dense(sub(ht, beta)));
      return svec(bf.P * mt * bf.P.transpose());
    }
  }
  return h;
}

Mat dd_jacobian_block(const BlockFrame& bf, const Vec& h) {
  const int d = bf.block.dim();
  switch (bf.block.kind) {
    case BlockKind::Zero:
      return Mat::Zero(d, d);
    case BlockKind::Orthant: {
      Vec diag = Vec::Zero(d);
      for (int i : bf.alpha) diag(i) = 1.0;
      for (int i : bf.beta) diag(i) = h(i) > 0.0 ? 1.0 : 0.0;
      return diag.asDiagonal();
    }
    case BlockKind::SOC:
      switch (bf.soc_case) {
        case SocCase::Interior: return Mat::Identity(d, d);
        case SocCase::PolarInterior: return Mat::Zero(d, d);
        case SocCase::Boundary: return soc_boundary_jacobian(bf.z0, bf.r, bf.w);
        case SocCase::BoundaryPrimal: {
          const Vec n = soc_normal(bf);
          if (h.dot(n) > 0.0) return Mat::Identity(d, d) - n * n.transpose();
          return Mat::Identity(d, d);
        }
        case SocCase::BoundaryPolar: {
          const Vec u = soc_ray(bf);
          if (h.dot(u) > 0.0) return u * u.transpose();
          return Mat::Zero(d, d);
        }
        case SocCase::Apex:
          return soc_clarke_jacobian(h);
      }
      return Mat::Identity(d, d);
    case BlockKind::PSD: {
      const int n = bf.block.size;
      const auto cls = classes(bf, n);
      const auto beta = beta_indices(cls);
      const Mat ht = bf.P.transpose() * smat(h) * bf.P;
      Mat qb, omb;
      if (!beta.empty()) {
        const EigDecomp eb = sym_eig(sub(ht, beta));
        qb = eb.vectors;
        omb = psd_omega(eb.values);
      }
      return columns_of(d, [&](const Vec& e) {
        const Mat dt = bf.P.transpose() * smat(e) * bf.P;
        Mat mt(n, n);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) mt(i, j) = psd_coefficient(bf, cls, i, j) * dt(i, j);
        if (!beta.empty()) {
          const Mat inner = omb.cwiseProduct(qb.transpose() * sub(dt, beta) * qb);
          put(mt, beta, qb * inner * qb.transpose());
        }
        return svec(bf.P * mt * bf.P.transpose());
      });
    }
  }
  return Mat::Identity(d, d);
}

Mat projection_jacobian_block(const BlockFrame& bf, const Vec& z) {
  const int d = bf.block.dim();
  switch (bf.block.kind) {
    case BlockKind::Zero:
      return Mat::Zero(d, d);
    case BlockKind::Orthant: {
      Vec diag(d);
      for (int i = 0; i < d; ++i) diag(i) = z(i) > 0.0 ? 1.0 : 0.0;
      return diag.asDiagonal();
    }
    case BlockKind::SOC:
      return soc_clarke_jacobian(z);
    case BlockKind::PSD: {
      const Mat om = psd_omega(bf.lambda);
      return columns_of(d, [&](const Vec& e) {
        const Mat inner = om.cwiseProduct(bf.P.transpose() * smat(e) * bf.P);
        return svec(bf.P * inner * bf.P.transpose());
      });
    }
  }
  return Mat::Identity(d, d);
}

// ---- sigma term -----------------------------------------------------------------

double soc_curvature_ratio(const BlockFrame& bf) { return (bf.r - bf.z0) / (bf.r + bf.z0); }

double upsilon_block(const BlockFrame& bf, const Vec& d) {
  if (bf.block.kind == BlockKind::SOC && bf.soc_case == SocCase::Boundary) {
    const double d0 = d(0);
    return soc_curvature_ratio(bf) * (d.tail(d.size() - 1).squaredNorm() - d0 * d0);
  }
  if (bf.block.kind != BlockKind::PSD) return 0.0;
  const Mat dt = bf.P.transpose() * smat(d) * bf.P;
  double sum = 0.0;
  for (int i : bf.gamma)
    for (int j : bf.alpha) sum += (-bf.lambda(i) / bf.lambda(j)) * dt(i, j) * dt(i, j);
  return 2.0 * sum;
}

Vec upsilon_gradient_block(const BlockFrame& bf, const Vec& d) {
  if (bf.block.kind == BlockKind::SOC && bf.soc_case == SocCase::Boundary) {
    Vec g = 2.0 * soc_curvature_ratio(bf) * d;
    g(0) = -g(0);
    return g;
  }
  if (bf.block.kind != BlockKind::PSD) return Vec::Zero(d.size());
  const int n = bf.block.size;
  const Mat dt = bf.P.transpose() * smat(d) * bf.P;
  Mat gt = Mat::Zero(n, n);
  for (int i : bf.gamma) {
    for (int j : bf.alpha) {
      const double c = -bf.lambda(i) / bf.lambda(j);
      gt(i, j) = gt(j, i) = 2.0 * c * dt(i, j);
    }
  }
  return svec(bf.P * gt * bf.P.transpose());
}

}  // namespace

bool SpectralFrame::borderline() const {
  for (const auto& bf : blocks)
    if (!bf.snapped.empty()) return true;
  return false;
}

SpectralFrame spectral_frame(const Cone& cone, const Vec& C, double rank_tol) {
  if (C.size() != cone.dim()) throw std::invalid_argument("spectral_frame: dimension mismatch");
  SpectralFrame f;
  f.cone = cone;
  f.C = C;
  f.A = project(cone, C);
  f.B = C - f.A;
  for (std::size_t k = 0; k < cone.blocks().size(); ++k) {
    BlockFrame bf;
    bf.block = cone.blocks()[k];
    bf.offset = cone.offset(k);
    const Vec z = C.segment(bf.offset, bf.block.dim());
    switch (bf.block.kind) {
      case BlockKind::Zero:
        bf.rank_tol = pick_tol(rank_tol, z.cwiseAbs().maxCoeff());
        break;
      case BlockKind::Orthant:
      case BlockKind::PSD: {
        Vec vals = z;
        if (bf.block.kind == BlockKind::PSD) {
          const EigDecomp e = sym_eig(smat(z));
          bf.P = e.vectors;
          bf.lambda = e.values;
          vals = e.values;
        }
        bf.rank_tol = pick_tol(rank_tol, vals.cwiseAbs().maxCoeff());
        for (int i = 0; i < vals.size(); ++i) {
          if (vals(i) > bf.rank_tol) {
            bf.alpha.push_back(i);
          } else if (vals(i) < -bf.rank_tol) {
            bf.gamma.push_back(i);
          } else {
            bf.beta.push_back(i);
            if (vals(i) != 0.0) bf.snapped.push_back(i);
          }
        }
        break;
      }
      case BlockKind::SOC: {
        const int m = bf.block.size;
        bf.z0 = z(0);
        bf.r = z.tail(m - 1).norm();
        bf.w = bf.r > 0.0 ? Vec(z.tail(m - 1) / bf.r) : Vec(Vec::Unit(m - 1, 0));
        const double lo = bf.z0 - bf.r;
        const double hi = bf.z0 + bf.r;
        bf.rank_tol = pick_tol(rank_tol, std::max(std::abs(lo), std::abs(hi)));
        const double tol = bf.rank_tol;
        if (bf.r <= tol) {
          bf.soc_case = bf.z0 > tol ? SocCase::Interior
                        : bf.z0 < -tol ? SocCase::PolarInterior
                                       : SocCase::Apex;
        } else if (lo > tol) {
          bf.soc_case = SocCase::Interior;
        } else if (hi < -tol) {
          bf.soc_case = SocCase::PolarInterior;
        } else if (std::abs(lo) <= tol) {
          bf.soc_case = SocCase::BoundaryPrimal;
          if (lo != 0.0) bf.snapped.push_back(0);
        } else if (std::abs(hi) <= tol) {
          bf.soc_case = SocCase::BoundaryPolar;
          if (hi != 0.0) bf.snapped.push_back(1);
        } else {
          bf.soc_case = SocCase::Boundary;
        }
        if (bf.soc_case == SocCase::Apex && (lo != 0.0 || hi != 0.0)) bf.snapped = {0, 1};
        break;
      }
    }
    f.blocks.push_back(std::move(bf));
  }
  return f;
}

CriticalCone::CriticalCone(SpectralFrame frame) : frame_(std::move(frame)) {}

Vec CriticalCone::project(const Vec& d) const { return blockwise(frame_, d, cc_project_block); }

bool CriticalCone::contains(const Vec& d, double tol) const {
  return (project(d) - d).norm() <= tol * std::max(1.0, d.norm());
}

Mat CriticalCone::lin_basis() const { return assemble_basis(frame_, false); }
Mat CriticalCone::span_basis() const { return assemble_basis(frame_, true); }

bool CriticalPolar::contains(const Vec& s, double tol) const {
  return cc_.project(s).norm() <= tol * std::max(1.0, s.norm());
}

Mat CriticalPolar::span_basis() const { return orth_complement(cc_.lin_basis(), dim()); }
Mat CriticalPolar::lin_basis() const { return orth_complement(cc_.span_basis(), dim()); }

CriticalCone critical_cone(const SpectralFrame& frame) { return CriticalCone(frame); }
CriticalPolar critical_polar(const CriticalCone& cc) { return CriticalPolar(cc); }

Vec dir_deriv(const SpectralFrame& frame, const Vec& h) { return blockwise(frame, h, dd_block); }

Mat dir_deriv_jacobian(const SpectralFrame& frame, const Vec& h) {
  if (h.size() != frame.cone.dim()) throw std::invalid_argument("dir_deriv_jacobian: dimension mismatch");
  return block_diag(frame, [&](const BlockFrame& bf) {
    return dd_jacobian_block(bf, h.segment(bf.offset, bf.block.dim()));
  });
}

Mat projection_jacobian(const SpectralFrame& frame) {
  return block_diag(frame, [&](const BlockFrame& bf) {
    return projection_jacobian_block(bf, frame.C.segment(bf.offset, bf.block.dim()));
  });
}

double upsilon_form(const SpectralFrame& frame, const Vec& d) {
  if (d.size() != frame.cone.dim()) throw std::invalid_argument("upsilon: dimension mismatch");
  double sum = 0.0;
  for (const auto& bf : frame.blocks) sum += upsilon_block(bf, d.segment(bf.offset, bf.block.dim()));
  return sum;
}

double upsilon(const SpectralFrame& frame, const Vec& d) {
  if (!CriticalCone(frame).contains(d, 1e-8)) {
    throw std::invalid_argument("upsilon: direction is outside the critical cone");
  }
  return upsilon_form(frame, d);
}

Vec upsilon_gradient(const SpectralFrame& frame, const Vec& d) {
  return blockwise(frame, d, upsilon_gradient_block);
}

Mat upsilon_matrix(const SpectralFrame& frame) {
  const int dim = frame.cone.dim();
  Mat h = 0.5 * columns_of(dim, [&](const Vec& e) { return upsilon_gradient(frame, e); });
  return 0.5 * (h + h.transpose());
}

FixedPointConditions fixed_point_conditions(const SpectralFrame& frame, const Vec& dA, const Vec& dB,
                                 double tol) {
  const CriticalCone cc(frame);
  const double scale = std::max(1.0, dA.norm() + dB.norm());
  FixedPointConditions res;
  res.in_critical_cone = (cc.project(dA) - dA).norm() <= tol * scale;
  const Vec s = dB - 0.5 * upsilon_gradient(frame, dA);
  res.polar_condition = cc.project(s).norm() <= tol * scale;
  res.sigma_condition = std::abs(dA.dot(dB) - upsilon_form(frame, dA)) <= tol * scale * scale;
  return res;
}

}  // namespace kktstab
