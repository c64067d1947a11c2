#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

namespace kktstab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Dense symmetric matrix stored as its lower triangle, column-major.
///
/// Symmetry holds by construction: `(i, j)` and `(j, i)` address the same
/// slot.
class SymMatrix {
 public:
  explicit SymMatrix(int n);

  /// Builds from a dense matrix; throws std::invalid_argument when `m` is not
  /// square or deviates from symmetry by more than `tol * max|m_ij|`.
  static SymMatrix from_dense(const Mat& m, double tol = 1e-12);
  static SymMatrix identity(int n);
  static SymMatrix diagonal(const Vec& d);

  int size() const { return n_; }
  double operator()(int i, int j) const { return lower_[index(i, j)]; }
  void set(int i, int j, double v) { lower_[index(i, j)] = v; }

  Mat dense() const;

  friend bool operator==(const SymMatrix&, const SymMatrix&) = default;

 private:
  std::size_t index(int i, int j) const;

  int n_;
  std::vector<double> lower_;
};

/// Eigen-decomposition `S = vectors * diag(values) * vectors^T` with values
/// sorted in descending order.
struct EigDecomp {
  Vec values;
  Mat vectors;
};

/// Raised when the Jacobi sweep cap is exceeded. Signals an internal fault;
/// symmetric input always converges well before the cap.
class EigenFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kMaxEigDimension = 64;

/// Cyclic Jacobi eigensolver with threshold sweeps.
///
/// Rotation order is fixed (row-major over the strict upper triangle), so the
/// result is reproducible bit-for-bit. Equal eigenvalues keep the order in
/// which the sweeps left them (stable sort).
EigDecomp sym_eig(const SymMatrix& s);
EigDecomp sym_eig(const Mat& s);

/// Shared zero threshold for eigenvalue partitions: 1e-9 times the largest
/// absolute eigenvalue.
double default_rank_tol(const Vec& eigenvalues);

/// Orthonormal basis (as columns) of ker M. Singular values at or below `tol`
/// count as zero.
Mat nullspace(const Mat& m, double tol);

/// Orthonormal basis (as columns) of the column space of M.
Mat range_basis(const Mat& m, double tol);

/// Minimum-norm minimizer of ||M v - r||.
Vec lstsq(const Mat& m, const Vec& r);

/// Moore-Penrose pseudo-inverse of a symmetric matrix. Eigenvalues with
/// magnitude at or below `rank_tol` are dropped; a non-positive `rank_tol`
/// selects `default_rank_tol`.
SymMatrix pseudo_inverse(const SymMatrix& s, double rank_tol = -1.0);

/// Principal square root of a symmetric positive semidefinite matrix.
Mat sqrt_psd(const Mat& s);

}  // namespace kktstab
