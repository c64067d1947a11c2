#include "kktstab/kkt.hpp"

#include <random>

namespace kktstab {

namespace {

// Basis of the span of the smallest face of N_K(A) containing B, for the frame
// of C = A + B.
Mat normal_face_basis(const SpectralFrame& frame) {
  std::vector<Vec> cols;
  const int dim = frame.cone.dim();
  auto unit = [&](int k) { return Vec(Vec::Unit(dim, k)); };
  for (const auto& bf : frame.blocks) {
    const int off = bf.offset;
    switch (bf.block.kind) {
      case BlockKind::Zero:
        for (int i = 0; i < bf.block.dim(); ++i) cols.push_back(unit(off + i));
        break;
      case BlockKind::Orthant:
        for (int i : bf.gamma) cols.push_back(unit(off + i));
        break;
      case BlockKind::SOC: {
        const Vec b = frame.B.segment(off, bf.block.dim());
        if (bf.soc_case == SocCase::PolarInterior) {
          for (int i = 0; i < bf.block.dim(); ++i) cols.push_back(unit(off + i));
        } else if ((bf.soc_case == SocCase::Boundary || bf.soc_case == SocCase::BoundaryPolar) &&
                   b.norm() > 0.0) {
          Vec v = Vec::Zero(dim);
          v.segment(off, bf.block.dim()) = b.normalized();
          cols.push_back(v);
        }
        break;
      }
      case BlockKind::PSD: {
        const int n = bf.block.size;
        for (std::size_t a = 0; a < bf.gamma.size(); ++a) {
          for (std::size_t b = a; b < bf.gamma.size(); ++b) {
            Vec v = Vec::Zero(dim);
            v.segment(off, bf.block.dim()) =
                svec(bf.P * smat(svec_unit(n, bf.gamma[a], bf.gamma[b])) * bf.P.transpose());
            cols.push_back(v);
          }
        }
        break;
      }
    }
  }
  Mat out(dim, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = cols[k];
  return out;
}

struct ConeAffineSearch {
  const SpectralFrame& frame_a;  // frame of A = Π_K(G(x) + b), so T_K(A) = its critical cone
  Vec y0;
  Mat k;  // orthonormal directions of the affine multiplier set

  // ½ dist(y, N_K(A))² = ½ |Π_T(y)|².
  double phi(const Vec& y) const { return 0.5 * dir_deriv(frame_a, y).squaredNorm(); }

  // Damped Newton iteration on the convex function c ↦ phi(y0 + K c).
  Vec run(Vec c, int max_iter) const {
    double mu = 1e-6;
    Vec y = y0 + k * c;
    double val = phi(y);
    for (int it = 0; it < max_iter && val > 1e-32; ++it) {
      const Vec t = dir_deriv(frame_a, y);
      const Vec grad = k.transpose() * t;
      const Mat hess = k.transpose() * dir_deriv_jacobian(frame_a, y) * k;
      bool moved = false;
      for (int tries = 0; tries < 40; ++tries) {
        const Mat lhs = hess + mu * Mat::Identity(k.cols(), k.cols());
        const Vec step = lhs.ldlt().solve(-grad);
        const Vec y_try = y + k * step;
        const double v_try = phi(y_try);
        if (v_try < val) {
          c += step;
          y = y_try;
          val = v_try;
          mu = std::max(mu * 0.25, 1e-14);
          moved = true;
          break;
        }
        mu *= 4.0;
      }
      if (!moved) break;
    }
    return y;
  }
};

}  // namespace

std::optional<MultiplierSet> recover_multipliers(const ConicProgram& prog, const Vec& x,
                                                 const Perturbation& pert, double tol) {
  const Evaluation ev = evaluate(prog, x, pert);
  const double gscale = std::max(1.0, ev.g.norm());
  if (dist_to_cone(prog.cone, ev.g) > tol * gscale) return std::nullopt;

  const Vec a_pt = project(prog.cone, ev.g);
  const SpectralFrame frame_a = spectral_frame(prog.cone, a_pt);
  const CriticalPolar normal_cone(CriticalCone{frame_a});
  const Mat nb = normal_cone.span_basis();
  const Mat gpt = prog.jacobian(x).transpose();
  const Vec r = -ev.grad;
  const double rscale = std::max(1.0, r.norm());

  if (nb.cols() == 0) {
    if (r.norm() > tol * rscale) return std::nullopt;
    return MultiplierSet{Vec::Zero(prog.cone.dim()), 0, true, Mat(prog.cone.dim(), 0)};
  }

  const Mat mm = gpt * nb;
  const Vec c0 = lstsq(mm, r);
  if ((mm * c0 - r).norm() > tol * rscale) return std::nullopt;
  const double mscale = std::max(1.0, mm.norm());
  const Mat kmat = nb * nullspace(mm, 1e-10 * mscale);

  ConeAffineSearch search{frame_a, nb * c0, kmat};
  const double yscale = std::max(1.0, search.y0.norm());
  auto in_cone = [&](const Vec& y) { return std::sqrt(2.0 * search.phi(y)) <= tol * std::max(1.0, y.norm()); };

  Vec y_rep;
  if (kmat.cols() == 0) {
    y_rep = search.y0;
    if (!in_cone(y_rep)) return std::nullopt;
  } else {
    // Several starts across the affine set; their centroid lies in the convex
    // multiplier set and generically in the relative interior of its face.
    std::mt19937_64 rng(fnv1a(prog.name) ^ 0x6d756c7469ull);
    std::normal_distribution<double> normal;
    std::vector<Vec> found;
    const int starts = 1 + 4 * static_cast<int>(kmat.cols());
    for (int s = 0; s < starts; ++s) {
      Vec c = Vec::Zero(kmat.cols());
      if (s > 0) {
        for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = normal(rng);
        c *= yscale / c.norm();
      }
      const Vec y = search.run(c, 300);
      if (in_cone(y)) found.push_back(y);
    }
    if (found.empty()) return std::nullopt;
    y_rep = Vec::Zero(prog.cone.dim());
    for (const auto& y : found) y_rep += y;
    y_rep /= static_cast<double>(found.size());
  }

  // Restrict to the face of the normal cone that contains the representative
  // and polish the stationarity equation inside that face.
  const Mat face = normal_face_basis(spectral_frame(prog.cone, a_pt + y_rep));
  MultiplierSet out;
  out.representative = y_rep;
  if (face.cols() > 0) {
    const Mat mf = gpt * face;
    const Vec fix = face * lstsq(mf, r - gpt * y_rep);
    const Vec polished = y_rep + fix;
    if (in_cone(polished) && (gpt * polished - r).norm() <= (gpt * y_rep - r).norm() + 1e-15) {
      out.representative = polished;
    }
    const Mat ker = nullspace(mf, 1e-10 * std::max(1.0, mf.norm()));
    out.directions = face * ker;
  } else {
    out.directions = Mat(prog.cone.dim(), 0);
  }
  out.affine_dim = static_cast<int>(out.directions.cols());
  out.is_singleton = out.affine_dim == 0;
  return out;
}

}  // namespace kktstab
