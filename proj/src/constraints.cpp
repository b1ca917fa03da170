#include "ddlure/constraints.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "ddlure/errors.hpp"

namespace ddlure {

namespace {

std::string dims(const Mat& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

bool is_diagonal(const Mat& m) {
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      if (i != j && m(i, j) != 0.0) return false;
  return true;
}

}  // namespace

std::string_view to_string(ConstraintKind k) {
  return k == ConstraintKind::kStrictR ? "STRICT_R" : "PASSIVE";
}

void QuadConstraint::validate() const {
  const Index p_ = Qhat.dim();
  const Index q_ = Rhat.dim();
  if (Shat.rows() != p_ || Shat.cols() != q_) {
    throw DimensionMismatch("constraint: Shat is " + dims(Shat) +
                            ", expected " + std::to_string(p_) + "x" +
                            std::to_string(q_));
  }
  if (H.rows() != p_ || H.cols() < 1) {
    throw DimensionMismatch("constraint: H is " + dims(H) + ", expected " +
                            std::to_string(p_) + " rows");
  }
  require_finite(Shat, "constraint Shat");
  require_finite(H, "constraint H");
  if (kind == ConstraintKind::kStrictR) {
    if (definiteness(Rhat) != Definiteness::kND) {
      throw InvalidInput("constraint: STRICT_R requires Rhat negative definite");
    }
  } else {
    if (definiteness(Qhat) != Definiteness::kZero ||
        definiteness(Rhat) != Definiteness::kZero) {
      throw InvalidInput("constraint: PASSIVE requires Qhat = 0 and Rhat = 0");
    }
    if (row_rank(Shat.transpose()) != q_) {
      throw InvalidInput("constraint: PASSIVE requires Shat of full column rank");
    }
  }
}

QuadConstraint QuadConstraint::with_H(const Mat& h) const {
  if (h.rows() != p()) {
    throw DimensionMismatch("with_H: H must have " + std::to_string(p()) +
                            " rows, got " + dims(h));
  }
  QuadConstraint out = *this;
  out.H = h;
  out.validate();
  return out;
}

QuadConstraint make_constraint(const Mat& qhat, const Mat& shat,
                               const Mat& rhat, const Mat& h,
                               ConstraintKind kind) {
  QuadConstraint c;
  c.Qhat = SymMat(qhat);
  c.Shat = shat;
  c.Rhat = SymMat(rhat);
  c.H = h;
  c.kind = kind;
  c.validate();
  return c;
}

QuadConstraint build_lipschitz(double ell, Index p, Index q) {
  if (!(ell > 0.0) || !std::isfinite(ell)) {
    throw InvalidInput("build_lipschitz: ell must be positive");
  }
  if (p < 1 || q < 1) throw InvalidInput("build_lipschitz: empty dimensions");
  return make_constraint(ell * ell * Mat::Identity(p, p), Mat::Zero(p, q),
                         -Mat::Identity(q, q), Mat::Identity(p, p),
                         ConstraintKind::kStrictR);
}

QuadConstraint build_sector(const Mat& k1, const Mat& k2) {
  if (k1.rows() != k2.rows() || k1.cols() != k2.cols() || k1.size() == 0) {
    throw DimensionMismatch("build_sector: K1 is " + dims(k1) + ", K2 is " +
                            dims(k2));
  }
  require_finite(k1, "build_sector K1");
  require_finite(k2, "build_sector K2");
  const Index q = k1.rows();
  const Index p = k1.cols();
  Mat qhat = -k2.transpose() * k1 - k1.transpose() * k2;
  QuadConstraint c =
      make_constraint(0.5 * (qhat + qhat.transpose()),
                      k1.transpose() + k2.transpose(),
                      -2.0 * Mat::Identity(q, q), Mat::Identity(p, p),
                      ConstraintKind::kStrictR);
  c.sector = SectorBounds{k1, k2};
  return c;
}

QuadConstraint build_convex_gradient(double m, double ell, Index n) {
  if (!(m > 0.0) || !(m < ell) || !std::isfinite(ell)) {
    throw InvalidInput("build_convex_gradient: requires 0 < m < ell");
  }
  if (n < 1) throw InvalidInput("build_convex_gradient: empty dimension");
  const Mat id = Mat::Identity(n, n);
  return make_constraint(-2.0 * m * ell * id, (ell + m) * id, -2.0 * id, id,
                         ConstraintKind::kStrictR);
}

QuadConstraint build_partial_gradient_bounds(const Mat& fbar,
                                             const Mat& funder) {
  if (fbar.rows() != 2 || fbar.cols() != 2 || funder.rows() != 2 ||
      funder.cols() != 2) {
    throw UnsupportedCase(
        "build_partial_gradient_bounds: only n = 2 is supported");
  }
  require_finite(fbar, "fbar");
  require_finite(funder, "funder");
  if ((fbar.array() < funder.array()).any()) {
    throw InvalidInput("build_partial_gradient_bounds: fbar < funder");
  }
  const Mat c = 0.5 * (fbar + funder);
  const Mat cbar = 0.5 * (fbar - funder);

  // Entry layout: v = (f11, f12, f21, f22), f_ij driven by z_j.
  Mat qhat = Mat::Zero(2, 2);
  for (Index j = 0; j < 2; ++j) {
    for (Index i = 0; i < 2; ++i) qhat(j, j) += cbar(i, j) - c(i, j);
  }
  Mat shat = Mat::Zero(2, 4);
  shat(0, 0) = c(0, 0);
  shat(1, 1) = c(0, 1);
  shat(0, 2) = c(1, 0);
  shat(1, 3) = c(1, 1);

  QuadConstraint out =
      make_constraint(qhat, shat, -Mat::Identity(4, 4), Mat::Identity(2, 2),
                      ConstraintKind::kStrictR);
  Mat l = Mat::Zero(2, 4);
  l << 1, 1, 0, 0,
       0, 0, 1, 1;
  out.structure_L = l;
  return out;
}

QuadConstraint build_rnn(const Mat& gamma) {
  if (gamma.rows() != gamma.cols() || gamma.size() == 0) {
    throw DimensionMismatch("build_rnn: Gamma must be square, got " +
                            dims(gamma));
  }
  const SymMat g(gamma);
  const Index p = g.dim();
  for (Index i = 0; i < p; ++i) {
    double row = 0.0;
    for (Index j = 0; j < p; ++j) {
      row += g(i, j);
      if (j != i && !(g(i, j) < 0.0)) {
        std::ostringstream os;
        os << "build_rnn: off-diagonal entry (" << i << "," << j
           << ") must be negative";
        throw InvalidInput(os.str());
      }
    }
    if (!(row > 0.0)) {
      throw InvalidInput("build_rnn: row " + std::to_string(i) +
                         " must have positive sum");
    }
  }
  return make_constraint(Mat::Zero(p, p), g.mat(), -2.0 * g.mat(),
                         Mat::Identity(p, p), ConstraintKind::kStrictR);
}

QuadConstraint build_passive(const Mat& h) {
  if (h.size() == 0) throw InvalidInput("build_passive: empty H");
  require_finite(h, "build_passive H");
  if (h.isZero(0.0)) throw InvalidInput("build_passive: H must be nonzero");
  const Index p = h.rows();
  return make_constraint(Mat::Zero(p, p), Mat::Identity(p, p),
                         Mat::Zero(p, p), h, ConstraintKind::kPassive);
}

LiftedConstraint lift(const QuadConstraint& c, Index n) {
  if (c.H.cols() != n) {
    throw DimensionMismatch("lift: H has " + std::to_string(c.H.cols()) +
                            " columns, state dimension is " +
                            std::to_string(n));
  }
  LiftedConstraint out;
  out.Q = SymMat::symmetrized(c.H.transpose() * c.Qhat.mat() * c.H);
  out.S = c.H.transpose() * c.Shat;
  out.R = c.Rhat;
  out.q_class = definiteness(out.Q);
  out.kind = c.kind;
  return out;
}

double evaluate(const QuadConstraint& c, const Vec& z, const Vec& v) {
  if (z.size() != c.p() || v.size() != c.q()) {
    throw DimensionMismatch("evaluate: (z, v) sizes do not match constraint");
  }
  return z.dot(c.Qhat.mat() * z) + 2.0 * z.dot(c.Shat * v) +
         v.dot(c.Rhat.mat() * v);
}

double evaluate(const LiftedConstraint& c, const Vec& x, const Vec& v) {
  if (x.size() != c.n() || v.size() != c.q()) {
    throw DimensionMismatch("evaluate: (x, v) sizes do not match constraint");
  }
  return x.dot(c.Q.mat() * x) + 2.0 * x.dot(c.S * v) + v.dot(c.R.mat() * v);
}

RegularityResult check_regularity(const QuadConstraint& c, int budget,
                                  std::uint64_t seed, double tol) {
  if (budget < 1) throw InvalidInput("check_regularity: budget must be >= 1");
  RegularityResult res;

  if (c.sector && is_diagonal(c.sector->K1) && is_diagonal(c.sector->K2) &&
      c.p() == c.q()) {
    const Mat width = c.sector->K2 - c.sector->K1;
    if (definiteness(SymMat::symmetrized(width)) == Definiteness::kPD) {
      Index row = 0;
      c.H.rowwise().norm().maxCoeff(&row);
      const Vec z = c.H * c.H.row(row).transpose();
      const Vec v = 0.5 * (c.sector->K1 + c.sector->K2) * z;
      res.regular = true;
      res.analytic = true;
      res.witness = std::make_pair(z, v);
      return res;
    }
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto gauss = [&](Index k) {
    Vec out(k);
    for (Index i = 0; i < k; ++i) out(i) = normal(rng);
    return out;
  };

  const Index q = c.q();
  for (int it = 0; it < budget; ++it) {
    const Vec z = c.H * gauss(c.n());
    Vec v;
    switch (it % 3) {
      case 0: v = Vec::Zero(q); break;
      case 1: v = unit(rng) * (c.Shat.transpose() * z); break;
      default: v = gauss(q) * std::max(z.norm(), 1e-300); break;
    }
    const double scale = z.squaredNorm() + v.squaredNorm();
    if (scale == 0.0) continue;
    if (evaluate(c, z, v) > tol * scale) {
      res.regular = true;
      res.witness = std::make_pair(z, v);
      return res;
    }
  }
  return res;
}

}  // namespace ddlure
