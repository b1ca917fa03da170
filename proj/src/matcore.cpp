#include "ddlure/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ddlure/errors.hpp"

namespace ddlure {

std::string_view to_string(Definiteness d) {
  switch (d) {
    case Definiteness::kPD: return "PD";
    case Definiteness::kPSD: return "PSD";
    case Definiteness::kND: return "ND";
    case Definiteness::kNSD: return "NSD";
    case Definiteness::kIndefinite: return "INDEFINITE";
    case Definiteness::kZero: return "ZERO";
  }
  return "?";
}

void require_finite(const Mat& m, std::string_view what) {
  if (!m.allFinite()) {
    throw InvalidInput(std::string(what) + ": matrix has non-finite entries");
  }
}

SymMat::SymMat(const Mat& m) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatch("SymMat: matrix is " + std::to_string(m.rows()) +
                            "x" + std::to_string(m.cols()) + ", not square");
  }
  require_finite(m, "SymMat");
  const double asym = (m - m.transpose()).norm();
  if (asym > 1e-12 * std::max(1.0, m.norm())) {
    std::ostringstream os;
    os << "SymMat: asymmetry " << asym << " exceeds tolerance";
    throw InvalidInput(os.str());
  }
  m_ = 0.5 * (m + m.transpose());
}

SymMat SymMat::symmetrized(const Mat& m) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatch("SymMat::symmetrized: matrix is not square");
  }
  require_finite(m, "SymMat");
  return SymMat(Mat(0.5 * (m + m.transpose())), Unchecked{});
}

Vec eigenvalues(const SymMat& m) {
  if (m.dim() == 0) return Vec();
  Eigen::SelfAdjointEigenSolver<Mat> es(m.mat(), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double max_eigenvalue(const SymMat& m) { return eigenvalues(m).maxCoeff(); }
double min_eigenvalue(const SymMat& m) { return eigenvalues(m).minCoeff(); }

double spectral_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

Definiteness definiteness(const SymMat& m, double tol) {
  require_finite(m.mat(), "definiteness");
  const Vec ev = eigenvalues(m);
  const double s = std::max(1.0, ev.cwiseAbs().maxCoeff());
  const double lo = ev.minCoeff();
  const double hi = ev.maxCoeff();
  const double band = tol * s;
  if (std::abs(lo) <= band && std::abs(hi) <= band) return Definiteness::kZero;
  if (lo > band) return Definiteness::kPD;
  if (hi < -band) return Definiteness::kND;
  if (lo >= -band) return Definiteness::kPSD;
  if (hi <= band) return Definiteness::kNSD;
  return Definiteness::kIndefinite;
}

SymMat psd_sqrt(const SymMat& m, double tol) {
  require_finite(m.mat(), "psd_sqrt");
  if (m.dim() == 0) return m;
  Eigen::SelfAdjointEigenSolver<Mat> es(m.mat());
  Vec ev = es.eigenvalues();
  const double s = std::max(1.0, ev.cwiseAbs().maxCoeff());
  for (Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -tol * s) {
      std::ostringstream os;
      os << "psd_sqrt: matrix is not positive semidefinite (eigenvalue "
         << ev(i) << ")";
      throw DomainError(os.str());
    }
    ev(i) = std::sqrt(std::max(ev(i), 0.0));
  }
  const Mat& v = es.eigenvectors();
  return SymMat::symmetrized(v * ev.asDiagonal() * v.transpose());
}

int row_rank(const Mat& m, double tol) {
  require_finite(m, "row_rank");
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(m);
  const Vec& sv = svd.singularValues();
  const double smax = sv(0);
  if (smax == 0.0) return 0;
  int r = 0;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol * smax) ++r;
  }
  return r;
}

double spectral_radius(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<Mat> es(m, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double spectral_abscissa(const Mat& m) {
  if (m.size() == 0) return -INFINITY;
  Eigen::EigenSolver<Mat> es(m, false);
  return es.eigenvalues().real().maxCoeff();
}

Mat block_diag(const Mat& a, const Mat& b) {
  Mat out = Mat::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

}  // namespace ddlure
