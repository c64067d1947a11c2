#include "kktstab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace kktstab {

SymMatrix::SymMatrix(int n) : n_(n), lower_(static_cast<std::size_t>(n) * (n + 1) / 2, 0.0) {
  if (n < 1) throw std::invalid_argument("SymMatrix: dimension must be >= 1");
}

std::size_t SymMatrix::index(int i, int j) const {
  if (i < j) std::swap(i, j);
  // Column j of the lower triangle starts after columns 0..j-1.
  const auto col_start = static_cast<std::size_t>(j) * n_ - static_cast<std::size_t>(j) * (j - 1) / 2;
  return col_start + static_cast<std::size_t>(i - j);
}

SymMatrix SymMatrix::from_dense(const Mat& m, double tol) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw std::invalid_argument("SymMatrix::from_dense: matrix must be square and non-empty");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  SymMatrix out(static_cast<int>(m.rows()));
  for (int j = 0; j < m.cols(); ++j) {
    for (int i = j; i < m.rows(); ++i) {
      if (std::abs(m(i, j) - m(j, i)) > tol * scale) {
        throw std::invalid_argument("SymMatrix::from_dense: matrix is not symmetric at (" +
                                    std::to_string(i) + "," + std::to_string(j) + ")");
      }
      out.set(i, j, m(i, j));
    }
  }
  return out;
}

SymMatrix SymMatrix::identity(int n) {
  SymMatrix out(n);
  for (int i = 0; i < n; ++i) out.set(i, i, 1.0);
  return out;
}

SymMatrix SymMatrix::diagonal(const Vec& d) {
  SymMatrix out(static_cast<int>(d.size()));
  for (int i = 0; i < d.size(); ++i) out.set(i, i, d(i));
  return out;
}

Mat SymMatrix::dense() const {
  Mat m(n_, n_);
  for (int j = 0; j < n_; ++j) {
    for (int i = j; i < n_; ++i) {
      m(i, j) = m(j, i) = (*this)(i, j);
    }
  }
  return m;
}

EigDecomp sym_eig(const SymMatrix& s) { return sym_eig(s.dense()); }

EigDecomp sym_eig(const Mat& s) {
  const int n = static_cast<int>(s.rows());
  if (n != s.cols() || n < 1) throw std::invalid_argument("sym_eig: matrix must be square");
  if (n > kMaxEigDimension) throw std::invalid_argument("sym_eig: dimension exceeds 64");

  Mat a = 0.5 * (s + s.transpose());
  Mat v = Mat::Identity(n, n);
  constexpr int kMaxSweeps = 100;

  bool converged = false;
  for (int sweep = 1; sweep <= kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += std::abs(a(p, q));
    if (off == 0.0) {
      converged = true;
      break;
    }
    // Threshold sweeps for the first three passes, then rotate everything.
    const double thresh = sweep < 4 ? 0.2 * off / (n * n) : 0.0;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double g = 100.0 * std::abs(a(p, q));
        if (sweep > 4 && std::abs(a(p, p)) + g == std::abs(a(p, p)) &&
            std::abs(a(q, q)) + g == std::abs(a(q, q))) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        if (std::abs(a(p, q)) <= thresh) continue;

        const double h = a(q, q) - a(p, p);
        double t;
        if (std::abs(h) + g == std::abs(h)) {
          t = a(p, q) / h;
        } else {
          const double theta = 0.5 * h / a(p, q);
          t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = t * c;

        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged) throw EigenFault("sym_eig: Jacobi sweep cap exceeded");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) > a(j, j); });

  EigDecomp out{Vec(n), Mat(n, n)};
  for (int k = 0; k < n; ++k) {
    out.values(k) = a(order[k], order[k]);
    out.vectors.col(k) = v.col(order[k]);
  }
  return out;
}

double default_rank_tol(const Vec& eigenvalues) {
  if (eigenvalues.size() == 0) return 0.0;
  return 1e-9 * eigenvalues.cwiseAbs().maxCoeff();
}

Mat nullspace(const Mat& m, double tol) {
  if (tol <= 0.0) throw std::invalid_argument("nullspace: tol must be positive");
  const auto cols = m.cols();
  if (cols == 0) return Mat(0, 0);
  if (m.rows() == 0) return Mat::Identity(cols, cols);
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
  const Vec& sv = svd.singularValues();
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol) ++rank;
  return svd.matrixV().rightCols(cols - rank);
}

Mat range_basis(const Mat& m, double tol) {
  if (m.cols() == 0 || m.rows() == 0) return Mat(m.rows(), 0);
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU);
  const Vec& sv = svd.singularValues();
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol) ++rank;
  return svd.matrixU().leftCols(rank);
}

Vec lstsq(const Mat& m, const Vec& r) {
  if (m.rows() != r.size()) throw std::invalid_argument("lstsq: dimension mismatch");
  if (m.cols() == 0) return Vec(0);
  if (m.rows() == 0) return Vec::Zero(m.cols());
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& sv = svd.singularValues();
  const double cutoff = sv.size() > 0
      ? sv(0) * std::numeric_limits<double>::epsilon() * static_cast<double>(std::max(m.rows(), m.cols()))
      : 0.0;
  Vec coeff = svd.matrixU().transpose() * r;
  for (Eigen::Index i = 0; i < sv.size(); ++i) coeff(i) = sv(i) > cutoff ? coeff(i) / sv(i) : 0.0;
  return svd.matrixV() * coeff;
}

SymMatrix pseudo_inverse(const SymMatrix& s, double rank_tol) {
  const EigDecomp e = sym_eig(s);
  const double tol = rank_tol > 0.0 ? rank_tol : default_rank_tol(e.values);
  Vec inv = Vec::Zero(e.values.size());
  for (Eigen::Index i = 0; i < inv.size(); ++i)
    if (std::abs(e.values(i)) > tol) inv(i) = 1.0 / e.values(i);
  return SymMatrix::from_dense(e.vectors * inv.asDiagonal() * e.vectors.transpose(), 1e-9);
}

Mat sqrt_psd(const Mat& s) {
  const EigDecomp e = sym_eig(s);
  const Vec root = e.values.cwiseMax(0.0).cwiseSqrt();
  return e.vectors * root.asDiagonal() * e.vectors.transpose();
}

}  // namespace kktstab
