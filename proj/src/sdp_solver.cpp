// Barrier method for LMI feasibility.
//
// Equalities are eliminated (x = xp + N z), then the solver minimizes the
// common bound t in
//
//   G_i(z) = s_i^{-1} (+-F_i(xp + N z) + m_i I)  <=  t I
//
// over a large ball |z| <= rho. t <= 0 means every block holds with its
// margin; a centered point with t - gap > 0 away from the ball proves the
// opposite up to tolerance.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "ddlure/errors.hpp"
#include "ddlure/sdp.hpp"

namespace ddlure {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Reduced {
  Vec xp;
  Mat N;                               // num_params x nz
  std::vector<Mat> g0;                 // per block, constant part
  std::vector<std::vector<Mat>> a;     // per block, per direction
  double rho = 1.0;
  Index nz() const { return N.cols(); }
};

double effective_margin(const LmiProblem& p, const LmiBlock& b) {
  return b.margin < 0 ? p.margin() : b.margin;
}

// Block in "<= 0" orientation, margin included.
AffineExpr oriented(const LmiProblem& p, const LmiBlock& b) {
  const AffineExpr f = b.sense == LmiSense::kNegative ? b.F : -b.F;
  return f + effective_margin(p, b) * Mat::Identity(f.rows(), f.cols());
}

Mat sym(const Mat& m) { return 0.5 * (m + m.transpose()); }

double equality_scale(const LmiProblem& p) {
  double s = 1.0;
  for (const auto& e : p.equalities()) {
    if (e.G.offset().size() > 0) s = std::max(s, e.G.offset().cwiseAbs().maxCoeff());
    if (e.G.jacobian().size() > 0) {
      s = std::max(s, e.G.jacobian().cwiseAbs().maxCoeff());
    }
  }
  return s;
}

class Barrier {
 public:
  Barrier(const Reduced& r) : r_(r) {
    for (const auto& g : r.g0) m_total_ += static_cast<double>(g.rows());
    m_total_ += 1.0;
  }

  double weight() const { return m_total_; }

  // Returns +inf outside the domain.
  double value(const Vec& w, double s) const {
    const Index nz = r_.nz();
    const double t = w(nz);
    const double denom = r_.rho * r_.rho - w.head(nz).squaredNorm();
    if (!(denom > 0)) return kInf;
    double f = s * t - std::log(denom);
    for (std::size_t i = 0; i < r_.g0.size(); ++i) {
      Eigen::LLT<Mat> llt(slack(i, w));
      if (llt.info() != Eigen::Success) return kInf;
      const Vec d = llt.matrixLLT().diagonal();
      if ((d.array() <= 0).any()) return kInf;
      f -= 2.0 * d.array().log().sum();
    }
    return std::isfinite(f) ? f : kInf;
  }

  void derivatives(const Vec& w, double s, Vec& g, Mat& h) const {
    const Index nz = r_.nz();
    const Index dim = nz + 1;
    g = Vec::Zero(dim);
    h = Mat::Zero(dim, dim);
    g(nz) = s;
    for (std::size_t i = 0; i < r_.g0.size(); ++i) {
      const Index d = r_.g0[i].rows();
      Eigen::LLT<Mat> llt(slack(i, w));
      const Mat linv = llt.matrixL().solve(Mat::Identity(d, d));
      Mat v(d * d, dim);
      for (Index k = 0; k < dim; ++k) {
        // dS/dz_k = -A_k, dS/dt = I
        const Mat ak = k < nz ? Mat(-linv * r_.a[i][k] * linv.transpose())
                              : Mat(linv * linv.transpose());
        v.col(k) = Eigen::Map<const Vec>(ak.data(), d * d);
        g(k) -= ak.trace();
      }
      h.noalias() += v.transpose() * v;
    }
    const Vec z = w.head(nz);
    const double denom = r_.rho * r_.rho - z.squaredNorm();
    g.head(nz) += 2.0 * z / denom;
    h.topLeftCorner(nz, nz) += (2.0 / denom) * Mat::Identity(nz, nz) +
                               (4.0 / (denom * denom)) * z * z.transpose();
  }

  double max_eig(const Vec& z) const {
    double worst = -kInf;
    for (std::size_t i = 0; i < r_.g0.size(); ++i) {
      Mat gi = r_.g0[i];
      for (Index k = 0; k < r_.nz(); ++k) gi += z(k) * r_.a[i][k];
      worst = std::max(worst, max_eigenvalue(SymMat::symmetrized(gi)));
    }
    return worst;
  }

 private:
  Mat slack(std::size_t i, const Vec& w) const {
    const Index nz = r_.nz();
    Mat s = w(nz) * Mat::Identity(r_.g0[i].rows(), r_.g0[i].cols()) - r_.g0[i];
    for (Index k = 0; k < nz; ++k) s -= w(k) * r_.a[i][k];
    return s;
  }

  const Reduced& r_;
  double m_total_ = 0.0;
};

}  // namespace

RecheckResult recheck(const LmiProblem& p, const Assignment& a) {
  const Vec x = p.pack(a);
  RecheckResult r;
  r.max_block_eig = -kInf;
  r.worst_slack = kInf;
  for (const auto& b : p.blocks()) {
    const Mat f = sym(b.F.eval(x));
    const SymMat fs = SymMat::symmetrized(b.sense == LmiSense::kNegative ? f : Mat(-f));
    const double top = max_eigenvalue(fs);
    r.max_block_eig = std::max(r.max_block_eig, top);
    r.worst_slack = std::min(r.worst_slack, -top - effective_margin(p, b));
  }
  for (const auto& e : p.equalities()) {
    const Mat g = e.G.eval(x);
    if (g.size() > 0) {
      r.max_equality_residual =
          std::max(r.max_equality_residual, g.cwiseAbs().maxCoeff());
    }
  }
  return r;
}

SolveOutcome solve_feasibility(const LmiProblem& p, const SolveOptions& opts) {
  p.validate();
  if (opts.max_iter < 1) throw StructuralError("solve: max_iter must be >= 1");
  if (!(opts.tol > 0)) throw StructuralError("solve: tol must be positive");

  const auto start = std::chrono::steady_clock::now();
  SolveOutcome out;
  auto finish = [&](SolveStatus st, std::string msg) {
    out.status = st;
    out.message = std::move(msg);
    out.runtime_s = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - start)
                        .count();
    return out;
  };

  const Index np = p.num_params();
  const double eq_scale = equality_scale(p);

  // Equality elimination.
  Reduced red;
  red.xp = Vec::Zero(np);
  red.N = Mat::Identity(np, np);
  Index eq_rows = 0;
  for (const auto& e : p.equalities()) eq_rows += e.G.rows() * e.G.cols();
  if (eq_rows > 0 && np > 0) {
    Mat aeq = Mat::Zero(eq_rows, np);
    Vec beq(eq_rows);
    Index r0 = 0;
    for (const auto& e : p.equalities()) {
      const Index k = e.G.rows() * e.G.cols();
      if (e.G.num_params() > 0) {
        aeq.block(r0, 0, k, e.G.num_params()) = e.G.jacobian();
      }
      beq.segment(r0, k) = -e.G.offset();
      r0 += k;
    }
    Eigen::JacobiSVD<Mat> svd(aeq, Eigen::ComputeFullU | Eigen::ComputeFullV);
    svd.setThreshold(1e-11);
    const Index rank = svd.rank();
    red.xp = svd.solve(beq);
    const double resid = (aeq * red.xp - beq).cwiseAbs().maxCoeff();
    if (resid > 1e-9 * std::max(1.0, beq.cwiseAbs().maxCoeff()) * eq_scale) {
      std::ostringstream os;
      os << "equality constraints are inconsistent (least-squares residual "
         << resid << ")";
      out.bound = kInf;
      return finish(SolveStatus::kInfeasible, os.str());
    }
    red.N = svd.matrixV().rightCols(np - rank);
  } else if (eq_rows > 0) {
    Vec off(eq_rows);
    Index r0 = 0;
    for (const auto& e : p.equalities()) {
      off.segment(r0, e.G.offset().size()) = e.G.offset();
      r0 += e.G.offset().size();
    }
    if (off.cwiseAbs().maxCoeff() > 1e-9 * eq_scale) {
      return finish(SolveStatus::kInfeasible, "constant equality violated");
    }
  }

  // Oriented, normalized blocks in z coordinates.
  std::vector<AffineExpr> obl;
  for (const auto& b : p.blocks()) obl.push_back(oriented(p, b));
  Index total_rows = 0;
  for (const auto& e : obl) total_rows += e.rows() * e.cols();
  {
    Mat stack = Mat::Zero(total_rows, red.nz());
    Index r0 = 0;
    for (const auto& e : obl) {
      const Index k = e.rows() * e.cols();
      if (e.num_params() > 0 && red.nz() > 0) {
        stack.middleRows(r0, k) =
            e.jacobian() * red.N.topRows(e.num_params());
      }
      r0 += k;
    }
    // Directions that move no block only add flat valleys; drop them.
    if (red.nz() > 0 && stack.cwiseAbs().maxCoeff() > 0) {
      Eigen::JacobiSVD<Mat> svd(stack, Eigen::ComputeThinV);
      svd.setThreshold(1e-12);
      red.N = red.N * svd.matrixV().leftCols(svd.rank());
    } else {
      red.N = Mat(np, 0);
    }
  }
  for (const auto& e : obl) {
    Mat g0 = sym(e.eval(red.xp));
    std::vector<Mat> a;
    double s = std::max(1.0, g0.norm());
    for (Index k = 0; k < red.nz(); ++k) {
      Vec x = Vec::Zero(np);
      x = red.N.col(k);
      Mat ak = sym(e.eval(x) - e.constant_part());
      s = std::max(s, ak.norm());
      a.push_back(std::move(ak));
    }
    for (auto& ak : a) ak /= s;
    red.g0.push_back(g0 / s);
    red.a.push_back(std::move(a));
  }
  red.rho = 1e4 * std::max(1.0, red.xp.norm());

  const Barrier bar(red);
  const Index nz = red.nz();
  Vec w = Vec::Zero(nz + 1);
  w(nz) = bar.max_eig(Vec::Zero(nz)) + 1.0;
  double s = 1.0;
  const double mu = 8.0;
  const double gap_rel_stop = 1e-2;
  bool stop_feasible = false;
  std::string msg;

  int it = 0;
  bool stalled = false;
  int stalls = 0;
  Vec g;
  Mat h;
  for (; it < opts.max_iter; ++it) {
    bar.derivatives(w, s, g, h);
    Eigen::LDLT<Mat> ldlt(h);
    Vec dw = -ldlt.solve(g);
    if (!dw.allFinite()) {
      const double jitter = 1e-12 * std::max(1.0, h.diagonal().maxCoeff());
      dw = -(h + jitter * Mat::Identity(h.rows(), h.cols())).ldlt().solve(g);
    }
    const double lambda2 = -g.dot(dw);
    const double t = w(nz);

    if (!(lambda2 > 1e-8) || stalled) {
      stalled = false;
      // Centered.
      const double gap = bar.weight() / s;
      out.bound = t - gap;
      const bool ball_inactive = w.head(nz).norm() <= 0.5 * red.rho;
      if (t - gap > 0 && ball_inactive) {
        std::ostringstream os;
        os << "no point satisfies all blocks: depth bound " << t - gap << " > 0";
        return finish(SolveStatus::kInfeasible, os.str());
      }
      if (t < 0 && gap <= gap_rel_stop * std::abs(t)) {
        stop_feasible = true;
        break;
      }
      if (gap <= opts.tol * std::max(1.0, std::abs(t))) {
        if (t < 0) {
          stop_feasible = true;
        } else {
          msg = "optimal depth within tolerance of zero";
        }
        break;
      }
      s *= mu;
      continue;
    }

    const double f0 = bar.value(w, s);
    const double slope = g.dot(dw);
    double alpha = 1.0;
    double f1 = bar.value(w + alpha * dw, s);
    while (!(f1 <= f0 + 0.25 * alpha * slope) && alpha > 1e-14) {
      alpha *= 0.5;
      f1 = bar.value(w + alpha * dw, s);
    }
    if (alpha <= 1e-14) {
      // Round-off floor: treat as centered once, give up on a repeat.
      if (++stalls > 1) {
        msg = "line search stalled";
        break;
      }
      stalled = true;
      continue;
    }
    stalls = 0;
    w += alpha * dw;
    if (w(nz) <= -1.0) {
      stop_feasible = true;
      ++it;
      break;
    }
  }
  out.iterations = it;

  if (!stop_feasible) {
    if (msg.empty()) msg = "iteration budget exhausted";
    return finish(SolveStatus::kInconclusive, msg);
  }

  const Vec x = red.xp + red.N * w.head(nz);
  Assignment cand = p.unpack(x);
  const RecheckResult rc = recheck(p, cand);
  if (!(rc.worst_slack >= 0.0) ||
      !(rc.max_equality_residual <= 1e-6 * eq_scale)) {
    std::ostringstream os;
    os << "solver point failed recheck (worst slack " << rc.worst_slack
       << ", equality residual " << rc.max_equality_residual << ")";
    return finish(SolveStatus::kInconclusive, os.str());
  }
  out.assignment = std::move(cand);
  double achieved = kInf;
  for (const auto& b : p.blocks()) {
    const Mat f = sym(b.F.eval(x));
    const SymMat fs = SymMat::symmetrized(b.sense == LmiSense::kNegative ? f : Mat(-f));
    achieved = std::min(achieved, -max_eigenvalue(fs));
  }
  out.achieved_margin = achieved;
  return finish(SolveStatus::kFeasible, "recheck passed");
}

}  // namespace ddlure
