#include "ddlure/verify.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>

#include "ddlure/errors.hpp"

namespace ddlure {

namespace {

using CMat = Eigen::MatrixXcd;

bool is_dt(const Certificate& c, const DataSet& d) {
  (void)c;
  return d.time_domain == TimeDomain::kDiscrete;
}

// Passive programs: (24) / (31) style, checked in the variables' coordinates.
bool passive_program(const Certificate& c, const DataSet& d) {
  return is_passive(c.method) ||
         (c.method == Method::kNlfbLinearOnly &&
          d.time_domain == TimeDomain::kContinuous);
}

const Mat& raw_var(const Certificate& c, const char* name) {
  const auto it = c.raw.find(name);
  if (it == c.raw.end()) {
    throw CertificateCorrupt(std::string("certificate lacks raw variable ") + name);
  }
  return it->second;
}

const Mat& require_L(const Certificate& c) {
  if (!c.L) throw CertificateCorrupt("certificate lacks the injection matrix L");
  return *c.L;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

SymMat sym(const Mat& m) { return SymMat::symmetrized(m); }

double rel_diff(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return INFINITY;
  const double s = std::max(1.0, b.cwiseAbs().maxCoeff());
  return (a - b).cwiseAbs().maxCoeff() / s;
}

// Quadratic-form matrix of the decrease condition on (x, v) (no constraint
// term): DT  [A'PA - rho P, A'PL; *, L'PL];  CT  [A'P + PA, PL; *, 0].
Mat decrease_form(const ClosedLoopData& cl, const Mat& P, bool dt, double rho) {
  const Index n = cl.Acl.rows();
  const Index q = cl.Lcl.cols();
  Mat f(n + q, n + q);
  if (dt) {
    f.topLeftCorner(n, n) = cl.Acl.transpose() * P * cl.Acl - rho * P;
    f.topRightCorner(n, q) = cl.Acl.transpose() * P * cl.Lcl;
    f.bottomRightCorner(q, q) = cl.Lcl.transpose() * P * cl.Lcl;
  } else {
    f.topLeftCorner(n, n) = cl.Acl.transpose() * P + P * cl.Acl;
    f.topRightCorner(n, q) = P * cl.Lcl;
    f.bottomRightCorner(q, q).setZero();
  }
  f.bottomLeftCorner(q, n) = f.topRightCorner(n, q).transpose();
  return f;
}

Mat constraint_form(const LiftedConstraint& lc) {
  const Index n = lc.n();
  const Index q = lc.q();
  Mat c(n + q, n + q);
  c << lc.Q.mat(), lc.S, lc.S.transpose(), lc.R.mat();
  return c;
}

}  // namespace

const CheckResult* VerificationReport::find(std::string_view name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  for (const auto& c : informational) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

bool VerificationReport::only_inconclusive_failures() const {
  bool any = false;
  for (const auto& c : checks) {
    if (!c.pass) {
      if (!c.inconclusive) return false;
      any = true;
    }
  }
  return any;
}

ClosedLoopData closed_loop_from_raw(const Certificate& cert,
                                    const DataSet& data) {
  ClosedLoopData cl;
  const Gains g = extract_gains(cert.raw, data);
  if (cert.raw.count("Y")) {
    const Mat G = raw_var(cert, "Y") * g.P.mat();
    const Mat& L = require_L(cert);
    cl.Acl = (data.X1 - L * data.F0) * G;
    cl.Lcl = L;
  } else {
    cl.Acl = data.X1 * raw_var(cert, "Y1") * g.P.mat();
    cl.Lcl = data.X1 * raw_var(cert, "Y2");
  }
  return cl;
}

ClosedLoopData closed_loop_from_gains(const Certificate& cert,
                                      const DataSet& data) {
  const Index n = data.n();
  const Index m = data.m();
  const Index q = data.q();
  if (cert.K.rows() != m || cert.K.cols() != n) {
    throw CertificateCorrupt("K has the wrong shape");
  }
  ClosedLoopData cl;
  if (!is_nlfb(cert.method)) {
    Mat w0(m + n, data.T());
    w0 << data.U0, data.X0;
    Mat rhs(m + n, n);
    rhs << cert.K, Mat::Identity(n, n);
    const Mat G = w0.completeOrthogonalDecomposition().solve(rhs);
    const Mat& L = require_L(cert);
    cl.Acl = (data.X1 - L * data.F0) * G;
    cl.Lcl = L;
  } else {
    Mat psi0(n + q + m, data.T());
    psi0 << data.X0, data.F0, data.U0;
    Mat rhs = Mat::Zero(n + q + m, n + q);
    rhs.topLeftCorner(n, n).setIdentity();
    rhs.block(n, n, q, q).setIdentity();
    rhs.bottomLeftCorner(m, n) = cert.K;
    if (cert.M) {
      if (cert.M->rows() != m || cert.M->cols() != q) {
        throw CertificateCorrupt("M has the wrong shape");
      }
      rhs.bottomRightCorner(m, q) = *cert.M;
    }
    const Mat G = psi0.completeOrthogonalDecomposition().solve(rhs);
    cl.Acl = data.X1 * G.leftCols(n);
    cl.Lcl = data.X1 * G.rightCols(q);
  }
  return cl;
}

CheckResult check_matrix_inequality(const Certificate& cert,
                                    const DataSet& data,
                                    const LiftedConstraint& lc,
                                    std::optional<double> tol) {
  CheckResult r;
  r.name = "matrix_inequality";
  const bool decay = cert.decay_rho.has_value();
  r.tolerance = tol.value_or(decay ? 0.0 : 0.5 * cert.eps);
  try {
    if (lc.n() != data.n() || lc.q() != data.q()) {
      throw DimensionMismatch("constraint does not match the data dimensions");
    }
    double top = 0.0;
    if (passive_program(cert, data)) {
      // W (A'P + PA) W in the decision variables: Y'Phi' + Phi Y.
      Mat core;
      if (cert.raw.count("Y")) {
        const Mat py =
            (data.X1 - require_L(cert) * data.F0) * raw_var(cert, "Y");
        core = py + py.transpose();
      } else {
        const Mat xy = data.X1 * raw_var(cert, "Y1");
        core = xy + xy.transpose();
      }
      (void)extract_gains(cert.raw, data);  // W must be PD
      top = max_eigenvalue(sym(core));
      r.details = "lambda_max of the Lyapunov block in decision variables";
    } else {
      const ClosedLoopData cl = closed_loop_from_raw(cert, data);
      const Mat P = extract_gains(cert.raw, data).P.mat();
      const bool dt = is_dt(cert, data);
      const double rho = cert.decay_rho.value_or(1.0);
      const Mat m = decrease_form(cl, P, dt, rho) + constraint_form(lc);
      top = max_eigenvalue(sym(m));
      r.details = dt ? "lambda_max of the discrete-time inequality"
                     : "lambda_max of the continuous-time inequality";
    }
    r.residual = top;
    if (decay) {
      r.pass = top <= 1e-12 * std::max(1.0, data.scale());
    } else {
      r.pass = top <= -r.tolerance;
    }
  } catch (const Error& e) {
    r.pass = false;
    r.residual = INFINITY;
    r.details = e.what();
  }
  return r;
}

CheckResult check_equalities(const Certificate& cert, const DataSet& data,
                             const LiftedConstraint& lc) {
  CheckResult r;
  r.name = "equality_residual";
  double scale = std::max(1.0, data.scale());
  if (cert.L) scale = std::max(scale, cert.L->cwiseAbs().maxCoeff());
  r.tolerance = 1e-6 * scale;
  try {
    SynthesisSpec spec;
    spec.method = cert.method;
    spec.L = cert.L;
    spec.decay_rho = cert.decay_rho;
    const LmiProblem p = build_program(data, lc, spec);
    const RecheckResult rc = recheck(p, cert.raw);
    r.residual = rc.max_equality_residual;
    r.pass = r.residual <= r.tolerance;
    r.details = "max |entry| over the program's equality constraints";
  } catch (const Error& e) {
    r.pass = false;
    r.residual = INFINITY;
    r.details = e.what();
  }
  return r;
}

CheckResult check_consistency(const Certificate& cert, const DataSet& data) {
  CheckResult r;
  r.name = "gain_consistency";
  r.tolerance = 1e-6;
  try {
    const Gains g = extract_gains(cert.raw, data);
    double d = std::max(rel_diff(cert.K, g.K), rel_diff(cert.P.mat(), g.P.mat()));
    if (cert.M) {
      d = std::max(d, g.M ? rel_diff(*cert.M, *g.M) : INFINITY);
    }
    r.residual = d;
    r.pass = d <= r.tolerance;
    r.details = "relative mismatch between claimed and extracted K, M, P";
  } catch (const Error& e) {
    r.pass = false;
    r.residual = INFINITY;
    r.details = e.what();
  }
  return r;
}

CheckResult check_p_positive(const Certificate& cert) {
  CheckResult r;
  r.name = "P_positive_definite";
  r.tolerance = 0.0;
  if (cert.P.dim() == 0) {
    r.residual = -INFINITY;
    r.details = "empty P";
    return r;
  }
  r.residual = min_eigenvalue(cert.P);
  r.pass = r.residual > 0.0;
  r.details = "lambda_min(P)";
  return r;
}

CheckResult sample_lyapunov_decrease(const Certificate& cert,
                                     const DataSet& data,
                                     const LiftedConstraint& lc, int n_samples,
                                     std::uint64_t seed) {
  CheckResult r;
  r.name = "sampled_decrease";
  r.tolerance = 0.0;
  if (n_samples < 1) throw InvalidInput("sample_lyapunov_decrease: n_samples < 1");
  try {
    const ClosedLoopData cl = closed_loop_from_gains(cert, data);
    const bool dt = is_dt(cert, data);
    const double rho = cert.decay_rho.value_or(1.0);
    const Mat form = decrease_form(cl, cert.P.mat(), dt, rho);
    const Index n = lc.n();
    const Index q = lc.q();

    // Stretch v so that a useful share of draws is admissible.
    double kappa = 1.0;
    const double rn = spectral_norm(lc.R.mat());
    if (rn > 0) {
      const double qn = spectral_norm(lc.Q.mat());
      kappa = qn > 0 ? std::sqrt(qn / rn) : spectral_norm(lc.S) / rn;
      if (!(kappa > 0) || !std::isfinite(kappa)) kappa = 1.0;
    }

    // Q = 0, S = 0, R < 0 admits v = 0 only: sample that slice directly.
    const bool v_zero_only = lc.Q.mat().isZero(0.0) && lc.S.isZero(0.0) &&
                             definiteness(lc.R) == Definiteness::kND;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Vec xv(n + q);
    int admissible = 0;
    double worst = -INFINITY;
    for (int s = 0; s < n_samples; ++s) {
      for (Index i = 0; i < n; ++i) xv(i) = normal(rng);
      for (Index i = 0; i < q; ++i) {
        xv(n + i) = v_zero_only ? 0.0 : kappa * normal(rng);
      }
      xv.normalize();
      if (evaluate(lc, xv.head(n), xv.tail(q)) < 0.0) continue;
      ++admissible;
      worst = std::max(worst, xv.dot(form * xv));
    }
    r.residual = worst;
    std::ostringstream os;
    os << admissible << " admissible of " << n_samples << " samples";
    r.details = os.str();
    if (admissible < 10) {
      r.inconclusive = true;
      r.pass = false;
      r.details += " (fewer than 10, inconclusive)";
    } else {
      r.pass = worst < 0.0;
    }
  } catch (const Error& e) {
    r.pass = false;
    r.residual = INFINITY;
    r.details = e.what();
  }
  return r;
}

CheckResult kyp_frequency_sweep(const Certificate& cert, const DataSet& data,
                                const LiftedConstraint& lc,
                                std::vector<double> omega_grid) {
  CheckResult r;
  r.name = "kyp_sweep";
  r.tolerance = 0.0;
  if (data.time_domain != TimeDomain::kDiscrete) {
    throw PreconditionError("kyp_frequency_sweep: discrete-time certificates only");
  }
  if (omega_grid.empty()) {
    for (int k = 0; k < 720; ++k) {
      omega_grid.push_back(2.0 * std::numbers::pi * k / 720.0);
    }
  }
  try {
    const ClosedLoopData cl = closed_loop_from_gains(cert, data);
    const double sr = spectral_radius(cl.Acl);
    if (!(sr < 1.0)) {
      r.residual = INFINITY;
      r.details = "closed loop not Schur, spectral radius " + fmt(sr);
      return r;
    }
    const Index n = lc.n();
    const Index q = lc.q();
    const CMat pi_c = constraint_form(lc).cast<std::complex<double>>();
    const CMat acl = cl.Acl.cast<std::complex<double>>();
    const CMat lcl = cl.Lcl.cast<std::complex<double>>();
    double worst = -INFINITY;
    for (double w : omega_grid) {
      const std::complex<double> z = std::polar(1.0, w);
      const CMat gw =
          (z * CMat::Identity(n, n) - acl).partialPivLu().solve(lcl);
      CMat stack(n + q, q);
      stack << gw, CMat::Identity(q, q);
      CMat h = stack.adjoint() * pi_c * stack;
      h = 0.5 * (h + h.adjoint()).eval();
      Eigen::SelfAdjointEigenSolver<CMat> es(h, Eigen::EigenvaluesOnly);
      worst = std::max(worst, es.eigenvalues().maxCoeff());
    }
    r.residual = worst;
    r.pass = worst < 0.0;
    r.details = std::to_string(omega_grid.size()) +
                " frequencies, spectral radius " + fmt(sr);
  } catch (const Error& e) {
    r.pass = false;
    r.residual = INFINITY;
    r.details = e.what();
  }
  return r;
}

ClosedLoopResult simulate_closed_loop(const PlantModel& model,
                                      const Certificate& cert, const Vec& x0,
                                      double horizon) {
  if (cert.K.rows() != model.m() || cert.K.cols() != model.n()) {
    throw DimensionMismatch("simulate_closed_loop: K does not match the plant");
  }
  if (cert.M && (cert.M->rows() != model.m() || cert.M->cols() != model.q())) {
    throw DimensionMismatch("simulate_closed_loop: M does not match the plant");
  }
  if (!(horizon > 0)) throw InvalidInput("simulate_closed_loop: horizon must be positive");
  const Mat K = cert.K;
  const std::optional<Mat> M = cert.M;
  const InputLaw law = [&model, K, M](double t, const Vec& x) -> Vec {
    Vec u = K * x;
    if (M) u += *M * model.f(t, model.H() * x);
    return u;
  };
  ClosedLoopResult res;
  const double x0n = x0.norm();
  try {
    if (model.time_domain() == TimeDomain::kDiscrete) {
      res.trajectory = simulate_discrete(model, x0, law,
                                         static_cast<std::size_t>(horizon));
    } else {
      res.trajectory = simulate_continuous(model, x0, law, 0.0, horizon);
    }
    res.final_norm = res.trajectory.states.back().norm();
    res.converged = res.final_norm <= 1e-3 * x0n;
  } catch (const OverflowError& e) {
    res.converged = false;
    res.final_norm = INFINITY;
    res.blowup_time = static_cast<double>(e.step());
  } catch (const IntegrationError& e) {
    res.converged = false;
    res.final_norm = INFINITY;
    res.blowup_time = e.time();
  }
  return res;
}

CheckResult passifiability_flag(const Certificate& cert, const DataSet& data,
                                const LiftedConstraint& lc, const Mat& H,
                                const Mat& L) {
  CheckResult r;
  r.name = "passifiability_inference";
  r.tolerance = 0.0;
  if (H.cols() != L.rows() || H.rows() != L.cols()) {
    r.details = "skipped: H and L shapes are incompatible";
    return r;
  }
  if (row_rank(L.transpose()) != L.cols()) {
    r.details = "skipped: L is not full column rank";
    return r;
  }
  const Mat hl = H * L;
  const double top = max_eigenvalue(sym(hl));
  const bool neg = top < 0.0;
  const CheckResult mi = check_matrix_inequality(cert, data, lc);
  const CheckResult eq = check_equalities(cert, data, lc);
  const bool held = passive_program(cert, data) && mi.pass && eq.pass;
  r.residual = top;
  r.pass = neg && held;
  std::ostringstream os;
  os << "sym(HL) lambda_max = " << top << (neg ? " (ND)" : " (not ND)")
     << ", passive conditions " << (held ? "held" : "not established");
  if (r.pass) os << "; open-loop triple minimum phase";
  r.details = os.str();
  return r;
}

VerificationReport verify_certificate(const Certificate& cert,
                                      const DataSet& data,
                                      const LiftedConstraint& lc,
                                      const VerifyOptions& opts) {
  data.validate();
  VerificationReport rep;
  rep.checks.push_back(check_p_positive(cert));
  rep.checks.push_back(check_consistency(cert, data));
  rep.checks.push_back(check_matrix_inequality(cert, data, lc));
  rep.checks.push_back(check_equalities(cert, data, lc));
  rep.checks.push_back(
      sample_lyapunov_decrease(cert, data, lc, opts.n_samples, opts.seed));
  if (data.time_domain == TimeDomain::kDiscrete) {
    rep.checks.push_back(kyp_frequency_sweep(cert, data, lc, opts.omega_grid));
  }
  if (opts.model) {
    const PlantModel& model = *opts.model;
    Vec x0 = opts.x0.value_or(data.X0.col(0));
    if (x0.norm() == 0.0) x0 = Vec::Ones(model.n());
    const double horizon = opts.horizon.value_or(
        model.time_domain() == TimeDomain::kDiscrete ? 300.0 : 400.0);
    CheckResult c;
    c.name = "closed_loop_simulation";
    c.tolerance = 1e-3 * x0.norm();
    try {
      const ClosedLoopResult cl = simulate_closed_loop(model, cert, x0, horizon);
      c.residual = cl.final_norm;
      c.pass = cl.converged;
      c.details = "|x(end)| after horizon " + fmt(horizon);
      if (cl.blowup_time) c.details += ", diverged at t = " + fmt(*cl.blowup_time);
    } catch (const Error& e) {
      c.residual = INFINITY;
      c.details = e.what();
    }
    rep.checks.push_back(c);
  }
  if (passive_program(cert, data) && cert.L) {
    rep.informational.push_back(
        passifiability_flag(cert, data, lc, lc.S.transpose(), *cert.L));
  }
  rep.overall = true;
  for (const auto& c : rep.checks) rep.overall = rep.overall && c.pass;
  return rep;
}

}  // namespace ddlure
