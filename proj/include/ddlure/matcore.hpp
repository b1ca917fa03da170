#pragma once

#include <Eigen/Dense>

#include <string_view>

namespace ddlure {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

enum class Definiteness { kPD, kPSD, kND, kNSD, kIndefinite, kZero };

std::string_view to_string(Definiteness d);

// Throws InvalidInput naming `what` if any entry is NaN or infinite.
void require_finite(const Mat& m, std::string_view what);

// Square matrix kept exactly symmetric. Construction from a matrix whose
// asymmetry exceeds 1e-12 * max(1, |M|_F) throws; use symmetrized() to force.
class SymMat {
 public:
  SymMat() = default;
  explicit SymMat(const Mat& m);

  static SymMat symmetrized(const Mat& m);
  static SymMat identity(Index n) { return symmetrized(Mat::Identity(n, n)); }
  static SymMat zero(Index n) { return symmetrized(Mat::Zero(n, n)); }

  Index dim() const { return m_.rows(); }
  const Mat& mat() const { return m_; }
  operator const Mat&() const { return m_; }
  double operator()(Index i, Index j) const { return m_(i, j); }

  SymMat operator-() const { return symmetrized(-m_); }

 private:
  struct Unchecked {};
  SymMat(Mat m, Unchecked) : m_(std::move(m)) {}

  Mat m_;
};

// Eigenvalues in ascending order.
Vec eigenvalues(const SymMat& m);
double max_eigenvalue(const SymMat& m);
double min_eigenvalue(const SymMat& m);

double spectral_norm(const Mat& m);

// Eigenvalue classification with tolerance scaled by s = max(1, |M|_2).
Definiteness definiteness(const SymMat& m, double tol = 1e-9);

inline bool is_positive_semidefinite(Definiteness d) {
  return d == Definiteness::kPD || d == Definiteness::kPSD ||
         d == Definiteness::kZero;
}
inline bool is_negative_semidefinite(Definiteness d) {
  return d == Definiteness::kND || d == Definiteness::kNSD ||
         d == Definiteness::kZero;
}

// Symmetric PSD square root. Eigenvalues within tol * max(1, |M|_2) below
// zero are clamped; anything more negative is a DomainError.
SymMat psd_sqrt(const SymMat& m, double tol = 1e-9);

// Number of singular values above tol * sigma_max.
int row_rank(const Mat& m, double tol = 1e-9);

inline bool full_row_rank(const Mat& m, double tol = 1e-9) {
  return row_rank(m, tol) == m.rows();
}

// Spectral radius of a general square matrix.
double spectral_radius(const Mat& m);
// Largest real part among the eigenvalues of a general square matrix.
double spectral_abscissa(const Mat& m);

Mat block_diag(const Mat& a, const Mat& b);

}  // namespace ddlure
