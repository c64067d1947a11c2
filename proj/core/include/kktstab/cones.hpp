#pragma once

#include "kktstab/linalg.hpp"

#include <string>
#include <vector>

namespace kktstab {

enum class BlockKind { Zero, Orthant, SOC, PSD };

std::string to_string(BlockKind kind);

/// One primitive factor of K. `size` is the vector length for Zero, Orthant
/// and SOC blocks and the matrix order for PSD blocks.
struct ConeBlock {
  BlockKind kind;
  int size;

  int dim() const { return kind == BlockKind::PSD ? size * (size + 1) / 2 : size; }
  friend bool operator==(const ConeBlock&, const ConeBlock&) = default;
};

/// Cartesian product of primitive blocks. Points are flat vectors; PSD blocks
/// are stored through `svec`.
class Cone {
 public:
  Cone() = default;
  explicit Cone(std::vector<ConeBlock> blocks);

  static Cone zero(int m) { return Cone({{BlockKind::Zero, m}}); }
  static Cone orthant(int m) { return Cone({{BlockKind::Orthant, m}}); }
  static Cone soc(int m) { return Cone({{BlockKind::SOC, m}}); }
  static Cone psd(int n) { return Cone({{BlockKind::PSD, n}}); }

  const std::vector<ConeBlock>& blocks() const { return blocks_; }
  int dim() const { return dim_; }
  int offset(std::size_t block) const { return offsets_.at(block); }
  /// True when every block is Zero or Orthant.
  bool polyhedral() const;

  friend bool operator==(const Cone& a, const Cone& b) { return a.blocks_ == b.blocks_; }

 private:
  std::vector<ConeBlock> blocks_;
  std::vector<int> offsets_;
  int dim_ = 0;
};

Cone product(const Cone& a, const Cone& b);

int svec_dim(int n);
/// Lower triangle column-major, off-diagonals scaled by sqrt(2), so that
/// dot(svec(X), svec(Y)) equals the Frobenius inner product.
Vec svec(const Mat& x);
Mat smat(const Vec& v);
/// Orthonormal svec image of the symmetric unit element at (i, j).
Vec svec_unit(int n, int i, int j);

Vec project(const Cone& cone, const Vec& z);
/// Projection onto the polar cone, z - project(cone, z).
Vec project_polar(const Cone& cone, const Vec& z);
/// Euclidean distance from z to K.
double dist_to_cone(const Cone& cone, const Vec& z);

enum class SocCase {
  Interior,       // C in int K
  PolarInterior,  // C in int K°
  Boundary,       // A on bd K \ {0}, B on bd K° \ {0}: projection differentiable
  BoundaryPrimal, // A on bd K \ {0}, B = 0
  BoundaryPolar,  // A = 0, B on bd K° \ {0}
  Apex            // A = 0, B = 0
};

std::string to_string(SocCase c);

/// Active-set and eigen-frame data for one block of a SpectralFrame.
///
/// Orthant and PSD blocks use alpha/beta/gamma for the indices with positive,
/// zero (within rank_tol) and negative value of C; for PSD the values are the
/// eigenvalues `lambda` with frame `P`. SOC blocks use `soc_case` together
/// with `z0`, `r = |zbar|` and the unit direction `w = zbar / r`.
struct BlockFrame {
  ConeBlock block;
  int offset = 0;
  double rank_tol = 0.0;

  std::vector<int> alpha, beta, gamma;
  Mat P;
  Vec lambda;
  /// Indices placed in beta although their value is not exactly zero.
  std::vector<int> snapped;

  SocCase soc_case = SocCase::Apex;
  double z0 = 0.0;
  double r = 0.0;
  Vec w;
};

/// Decomposition C = A + B with A = Π_K(C), B ∈ N_K(A), plus per-block frames.
struct SpectralFrame {
  Cone cone;
  Vec C, A, B;
  std::vector<BlockFrame> blocks;

  /// True when some eigenvalue or coordinate was snapped into beta.
  bool borderline() const;
};

/// `rank_tol <= 0` picks, per block, 1e-9 times the largest |value| of the
/// block (with an absolute floor of 1e-14).
SpectralFrame spectral_frame(const Cone& cone, const Vec& C, double rank_tol = -1.0);

/// C_K(A, B) = T_K(A) ∩ B⊥ described blockwise through the frame.
class CriticalCone {
 public:
  explicit CriticalCone(SpectralFrame frame);

  const SpectralFrame& frame() const { return frame_; }
  int dim() const { return frame_.cone.dim(); }

  Vec project(const Vec& d) const;
  bool contains(const Vec& d, double tol) const;
  /// Orthonormal basis of the lineality space lin C.
  Mat lin_basis() const;
  /// Orthonormal basis of span C (which equals the affine hull).
  Mat span_basis() const;
  bool is_subspace() const { return lin_basis().cols() == span_basis().cols(); }

 private:
  SpectralFrame frame_;
};

/// Polar [C_K(A, B)]°.
class CriticalPolar {
 public:
  explicit CriticalPolar(CriticalCone cc) : cc_(std::move(cc)) {}

  const CriticalCone& critical_cone() const { return cc_; }
  int dim() const { return cc_.dim(); }

  Vec project(const Vec& s) const { return s - cc_.project(s); }
  bool contains(const Vec& s, double tol) const;
  /// span(C°) = (lin C)⊥ and lin(C°) = (span C)⊥.
  Mat span_basis() const;
  Mat lin_basis() const;

 private:
  CriticalCone cc_;
};

CriticalCone critical_cone(const SpectralFrame& frame);
CriticalPolar critical_polar(const CriticalCone& cc);

/// Π'_K(C; H).
Vec dir_deriv(const SpectralFrame& frame, const Vec& h);

/// Matrix L with dir_deriv(frame, h) = L h that is also the derivative of
/// dir_deriv(frame, ·) at h wherever that map is differentiable.
Mat dir_deriv_jacobian(const SpectralFrame& frame, const Vec& h);

/// An element of the Clarke generalized Jacobian of Π_K at the frame's C.
Mat projection_jacobian(const SpectralFrame& frame);

/// Υ(D) = -σ(B, T²_K(A, D)). Throws std::invalid_argument when D is outside
/// the critical cone by more than 1e-8 (relative to max(1, |D|)).
double upsilon(const SpectralFrame& frame, const Vec& d);
/// The quadratic form behind Υ evaluated without the membership check.
double upsilon_form(const SpectralFrame& frame, const Vec& d);
/// ∇Υ(D) = 2 H(D).
Vec upsilon_gradient(const SpectralFrame& frame, const Vec& d);
/// Symmetric matrix H with Υ(D) = Dᵀ H D.
Mat upsilon_matrix(const SpectralFrame& frame);

struct FixedPointConditions {
  bool in_critical_cone = false;
  bool polar_condition = false;
  bool sigma_condition = false;

  bool all() const { return in_critical_cone && polar_condition && sigma_condition; }
};

/// The three conditions characterizing dA = Π'(C; dA + dB), evaluated
/// independently with absolute tolerance `tol * max(1, |dA| + |dB|)`.
FixedPointConditions fixed_point_conditions(const SpectralFrame& frame, const Vec& dA, const Vec& dB,
                                 double tol);

}  // namespace kktstab
