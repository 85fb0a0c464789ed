#include "ocflow/core/linalg.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ocflow::linalg {

void require_finite(const Mat& m, const std::string& what) {
  if (!m.allFinite()) throw Error(what + ": matrix contains NaN or Inf");
}

void require_finite(const Vec& v, const std::string& what) {
  if (!v.allFinite()) throw Error(what + ": vector contains NaN or Inf");
}

double inf_norm(const SpMat& a) {
  Vec row_sums = Vec::Zero(a.rows());
  for (int k = 0; k < a.outerSize(); ++k)
    for (SpMat::InnerIterator it(a, k); it; ++it)
      row_sums[it.row()] += std::abs(it.value());
  return a.rows() == 0 ? 0.0 : row_sums.maxCoeff();
}

namespace {

void check_residual(double norm_a, const Vec& x, const Vec& b, const Vec& r,
                    const std::string& who) {
  const double bound =
      kSolveResidualTol *
      (norm_a * x.cwiseAbs().maxCoeff() + b.cwiseAbs().maxCoeff());
  const double res = r.cwiseAbs().maxCoeff();
  if (!(res <= std::max(bound, 1e-300))) {
    std::ostringstream os;
    os << who << ": residual " << res << " exceeds contract bound " << bound;
    throw Error(os.str());
  }
}

}  // namespace

Vec solve_dense(const Mat& a, const Vec& b) {
  if (a.rows() != a.cols() || a.rows() != b.size())
    throw Error("solve_dense: dimension mismatch");
  require_finite(a, "solve_dense");
  require_finite(b, "solve_dense");
  if (a.rows() == 0) return Vec();

  // Plain partial-pivot elimination; lets us name the first defective pivot.
  const int n = static_cast<int>(a.rows());
  Mat u = a;
  Vec y = b;
  const double tiny = a.cwiseAbs().maxCoeff() * 1e-14 * n;
  for (int k = 0; k < n; ++k) {
    int p = k;
    double best = std::abs(u(k, k));
    for (int i = k + 1; i < n; ++i)
      if (std::abs(u(i, k)) > best) {
        best = std::abs(u(i, k));
        p = i;
      }
    if (best <= tiny) {
      std::ostringstream os;
      os << "solve_dense: matrix is singular (zero pivot at equation " << k
         << ")";
      throw Error(os.str());
    }
    if (p != k) {
      u.row(p).swap(u.row(k));
      std::swap(y[p], y[k]);
    }
    for (int i = k + 1; i < n; ++i) {
      const double f = u(i, k) / u(k, k);
      if (f == 0.0) continue;
      u.row(i).tail(n - k) -= f * u.row(k).tail(n - k);
      y[i] -= f * y[k];
    }
  }
  Vec x(n);
  for (int i = n - 1; i >= 0; --i) {
    double s = y[i] - u.row(i).segment(i + 1, n - 1 - i)
                          .dot(x.segment(i + 1, n - 1 - i));
    x[i] = s / u(i, i);
  }
  if (b.cwiseAbs().maxCoeff() > 0.0 || x.cwiseAbs().maxCoeff() > 0.0)
    check_residual(a.cwiseAbs().rowwise().sum().maxCoeff(), x, b, a * x - b,
                   "solve_dense");
  return x;
}

SparseLu::SparseLu(const SpMat& a) : a_(a) {
  if (a.rows() != a.cols()) throw Error("SparseLu: matrix is not square");
  a_.makeCompressed();

  // Structurally empty rows/columns defeat any pivoting; report them first.
  std::vector<char> row_hit(a_.rows(), 0), col_hit(a_.cols(), 0);
  for (int k = 0; k < a_.outerSize(); ++k)
    for (SpMat::InnerIterator it(a_, k); it; ++it) {
      if (!std::isfinite(it.value()))
        throw Error("SparseLu: matrix contains NaN or Inf");
      if (it.value() != 0.0) {
        row_hit[it.row()] = 1;
        col_hit[it.col()] = 1;
      }
    }
  for (int i = 0; i < a_.rows(); ++i) {
    if (!row_hit[i]) {
      std::ostringstream os;
      os << "SparseLu: matrix is singular (row " << i << " has no entries)";
      throw Error(os.str());
    }
    if (!col_hit[i]) {
      std::ostringstream os;
      os << "SparseLu: matrix is singular (column " << i << " has no entries)";
      throw Error(os.str());
    }
  }
  norm_a_ = inf_norm(a_);

  lu_.compute(a_);
  if (lu_.info() != Eigen::Success) {
    std::ostringstream os;
    os << "SparseLu: factorization failed";
    std::string detail = lu_.lastErrorMessage();
    if (!detail.empty()) os << " (" << detail << ")";
    throw Error(os.str());
  }
}

Vec SparseLu::solve(const Vec& b) const {
  if (b.size() != a_.rows()) throw Error("SparseLu::solve: size mismatch");
  require_finite(b, "SparseLu::solve");
  Vec x = lu_.solve(b);
  require_finite(x, "SparseLu::solve (solution)");
  check_residual(norm_a_, x, b, a_ * x - b, "SparseLu::solve");
  return x;
}

Vec solve_sparse(const SpMat& a, const Vec& b) { return SparseLu(a).solve(b); }

Svd svd(const Mat& m) {
  require_finite(m, "svd");
  Eigen::JacobiSVD<Mat> j(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Svd out;
  out.u = j.matrixU();
  out.sigma = j.singularValues();
  out.v = j.matrixV();
  return out;
}

SymEig eig_sym(const Mat& a) {
  if (a.rows() != a.cols()) throw Error("eig_sym: matrix is not square");
  require_finite(a, "eig_sym");
  Mat sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(sym);
  if (es.info() != Eigen::Success)
    throw Error("eig_sym: eigendecomposition did not converge");
  const int n = static_cast<int>(a.rows());
  SymEig out;
  out.values = Vec(n);
  out.vectors = Mat(n, n);
  for (int i = 0; i < n; ++i) {  // ascending -> descending
    out.values[i] = es.eigenvalues()[n - 1 - i];
    out.vectors.col(i) = es.eigenvectors().col(n - 1 - i);
  }
  return out;
}

Svd svd_gram(const Mat& s, const SpMat* x, double rel_drop_tol) {
  require_finite(s, "svd_gram");
  const int k = static_cast<int>(s.cols());
  Mat xs = x ? Mat(*x * s) : s;
  Mat gram = s.transpose() * xs;
  SymEig eg = eig_sym(gram);

  const double lead = eg.values.size() ? std::max(eg.values[0], 0.0) : 0.0;
  const double floor_lambda =
      std::max(lead * rel_drop_tol * rel_drop_tol, 1e-300);
  int rank = 0;
  while (rank < k && eg.values[rank] > floor_lambda) ++rank;

  Svd out;
  out.sigma = Vec(rank);
  out.u = Mat(s.rows(), rank);
  out.v = Mat(k, rank);
  for (int i = 0; i < rank; ++i) {
    const double sigma = std::sqrt(eg.values[i]);
    out.sigma[i] = sigma;
    out.v.col(i) = eg.vectors.col(i);
    out.u.col(i) = s * (eg.vectors.col(i) / sigma);
  }
  return out;
}

Svd pod_modes(const Mat& s, const SpMat* x, double rel_drop_tol) {
  require_finite(s, "pod_modes");
  if (s.cols() == 0) throw Error("pod_modes: snapshot matrix has no columns");

  Eigen::SimplicialLLT<SpMat> llt;
  Mat weighted;
  if (x) {
    if (x->rows() != s.rows() || x->cols() != s.rows())
      throw Error("pod_modes: weight matrix shape mismatch");
    llt.compute(*x);
    if (llt.info() != Eigen::Success)
      throw Error("pod_modes: weight matrix is not positive definite");
    // X = P^T L L^T P, so S^T X S = W^T W with W = L^T P S: the singular
    // values of W are the X-weighted singular values of S, computed without
    // squaring the condition number (unlike the Gram route).
    weighted = llt.matrixU() * Mat(llt.permutationP() * s);
  } else {
    weighted = s;
  }

  Svd thin = svd(weighted);
  const double lead = thin.sigma.size() ? thin.sigma[0] : 0.0;
  int keep = 0;
  while (keep < thin.sigma.size() && thin.sigma[keep] > lead * rel_drop_tol)
    ++keep;

  Svd out;
  out.sigma = thin.sigma.head(keep);
  out.v = thin.v.leftCols(keep);
  if (x) {
    // Modes Z = P^T L^{-T} U_w satisfy Z^T X Z = I to machine precision.
    Mat solved = llt.matrixU().solve(Mat(thin.u.leftCols(keep)));
    out.u = llt.permutationPinv() * solved;
  } else {
    out.u = thin.u.leftCols(keep);
  }
  return out;
}

Mat orthonormalize(const Mat& cols, const SpMat* x, double drop_tol) {
  require_finite(cols, "orthonormalize");
  const int n = static_cast<int>(cols.rows());
  std::vector<Vec> basis;        // kept columns
  std::vector<Vec> x_basis;      // X * column, cached
  auto apply_x = [&](const Vec& v) -> Vec { return x ? Vec(*x * v) : v; };

  for (int c = 0; c < cols.cols(); ++c) {
    Vec v = cols.col(c);
    const double norm0 = std::sqrt(std::max(v.dot(apply_x(v)), 0.0));
    if (norm0 <= 0.0) continue;
    // Two MGS sweeps for re-orthogonalization stability.
    for (int sweep = 0; sweep < 2; ++sweep)
      for (std::size_t j = 0; j < basis.size(); ++j)
        v -= x_basis[j].dot(v) * basis[j];
    Vec xv = apply_x(v);
    const double norm1 = std::sqrt(std::max(v.dot(xv), 0.0));
    if (norm1 <= drop_tol * norm0) continue;
    basis.push_back(v / norm1);
    x_basis.push_back(xv / norm1);
  }

  Mat out(n, static_cast<int>(basis.size()));
  for (std::size_t j = 0; j < basis.size(); ++j)
    out.col(static_cast<int>(j)) = basis[j];
  return out;
}

std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t fnv1a64(const std::string& s) {
  return fnv1a64(s.data(), s.size());
}

}  // namespace ocflow::linalg
