/// @file linalg.hpp
/// Dense/sparse linear-algebra kernels shared by every other module.
///
/// All floating-point work is double precision.  Solvers verify their own
/// results: a direct solve that cannot meet the residual contract throws
/// instead of returning garbage, and singular systems are reported with the
/// offending equation index so callers can map it back to a mesh entity.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ocflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Error type thrown by every module in this project.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A required input artifact (trajectory store, basis bundle, mesh file) is
/// missing or unfinished.  The command-line driver maps this to its
/// "incomplete prerequisites" exit code.
struct IncompleteError : Error {
  explicit IncompleteError(const std::string& msg) : Error(msg) {}
};

/// A persisted artifact fails an integrity check (corrupt checksum, or a
/// configuration/basis fingerprint that does not match the run).  The
/// command-line driver maps this to its "integrity mismatch" exit code.
struct IntegrityError : Error {
  explicit IntegrityError(const std::string& msg) : Error(msg) {}
};

namespace linalg {

/// Relative residual contract for direct solves:
///   ||A x - b||_inf <= kSolveResidualTol * (||A||_inf ||x||_inf + ||b||_inf)
inline constexpr double kSolveResidualTol = 1e-10;

/// Throws if any entry of `m` (or `v`) is NaN or infinite.
void require_finite(const Mat& m, const std::string& what);
void require_finite(const Vec& v, const std::string& what);

double inf_norm(const SpMat& a);

/// Dense LU solve with partial pivoting.  Throws ocflow::Error when the
/// matrix is singular (naming the pivot column) or the residual contract
/// fails.
Vec solve_dense(const Mat& a, const Vec& b);

/// Reusable sparse LU factorization of a square matrix.
class SparseLu {
 public:
  /// Factorizes `a`.  Structurally empty rows/columns and zero pivots are
  /// reported by index.
  explicit SparseLu(const SpMat& a);

  /// Solves A x = b and verifies the residual contract.
  Vec solve(const Vec& b) const;

  int rows() const { return static_cast<int>(a_.rows()); }

 private:
  SpMat a_;
  double norm_a_ = 0.0;
  Eigen::SparseLU<SpMat> lu_;
};

/// One-call sparse solve (factorize + solve + verify).
Vec solve_sparse(const SpMat& a, const Vec& b);

struct Svd {
  Mat u;      ///< left singular vectors, one per column
  Vec sigma;  ///< singular values, descending
  Mat v;      ///< right singular vectors, one per column
};

/// Thin SVD of a dense matrix (two-sided Jacobi; accurate for the small
/// matrices this project feeds it).  Throws on non-finite input.
Svd svd(const Mat& m);

struct SymEig {
  Vec values;   ///< eigenvalues, descending
  Mat vectors;  ///< matching eigenvectors, one per column
};

/// Eigendecomposition of a symmetric matrix (symmetrized internally).
SymEig eig_sym(const Mat& a);

/// Left singular basis of `s` in the inner product induced by SPD `x`,
/// computed via the Gram matrix G = S^T X S ("method of snapshots"; suits
/// tall-and-skinny snapshot matrices).  Pass x == nullptr for the Euclidean
/// inner product.  Returned columns satisfy U^T X U = I and pair with
/// `sigma`; modes whose singular value falls below
/// max(sigma_1 * rel_drop_tol, absolute floor) are discarded.
///
/// The Gram squaring limits the resolvable spectrum to roughly
/// sqrt(machine epsilon) relative to sigma_1; use `pod_modes` where the
/// small singular values themselves matter.
Svd svd_gram(const Mat& s, const SpMat* x, double rel_drop_tol = 1e-13);

/// Left singular basis of `s` in the inner product induced by SPD `x`,
/// computed to full precision: with the sparse Cholesky factorization
/// X = P^T L L^T P the singular values of L^T P S are exact (no Gram
/// squaring), and the returned modes U = P^T L^{-T} U_w satisfy
/// U^T X U = I to machine precision.  Pass x == nullptr for the Euclidean
/// inner product.  Modes with sigma_i <= sigma_1 * rel_drop_tol are
/// discarded; `v` holds the matching right singular vectors.
Svd pod_modes(const Mat& s, const SpMat* x, double rel_drop_tol = 1e-14);

/// In-place modified Gram-Schmidt against SPD weight `x` (nullptr ==
/// identity).  Columns whose residual norm after projection falls below
/// `drop_tol` times their original norm are dropped.  Returns the retained,
/// X-orthonormal columns.
Mat orthonormalize(const Mat& cols, const SpMat* x, double drop_tol = 1e-12);

/// FNV-1a 64-bit hash, used for config/basis fingerprints.
constexpr std::uint64_t kFnvOffsetBasis = 14695981039346656037ull;
std::uint64_t fnv1a64(const void* data, std::size_t n,
                      std::uint64_t seed = kFnvOffsetBasis);
std::uint64_t fnv1a64(const std::string& s);

}  // namespace linalg
}  // namespace ocflow
