#include "ddlure/synth.hpp"

#include <array>
#include <cmath>

#include "ddlure/errors.hpp"

namespace ddlure {

namespace {

struct MethodName {
  Method m;
  std::string_view name;
};

constexpr std::array<MethodName, 10> kMethodNames = {{
    {Method::kDtQpsd, "dt-qpsd"},
    {Method::kDtQzero, "dt-qzero"},
    {Method::kDtQnsd, "dt-qnsd"},
    {Method::kCtQpsd, "ct-qpsd"},
    {Method::kCtQzero, "ct-qzero"},
    {Method::kCtQnsd, "ct-qnsd"},
    {Method::kCtPassive, "ct-passive"},
    {Method::kNlfb, "nlfb"},
    {Method::kNlfbCtPassive, "nlfb-ct-passive"},
    {Method::kNlfbLinearOnly, "nlfb-linear-only"},
}};

bool is_dt_linear(Method m) {
  return m == Method::kDtQpsd || m == Method::kDtQzero || m == Method::kDtQnsd;
}

std::string dims(const Mat& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

// Program actually assembled once NLFB_LINEAR_ONLY is resolved.
enum class Program { kDtLinear, kCtLinear, kCtPassive, kNlfbDt, kNlfbCtPassive };

Program resolve(Method m, const DataSet& data, const LiftedConstraint& lc) {
  const bool dt = data.time_domain == TimeDomain::kDiscrete;
  auto need = [&](bool want_dt) {
    if (dt != want_dt) {
      throw PreconditionError(std::string("method ") +
                              std::string(to_string(m)) + " needs " +
                              (want_dt ? "discrete" : "continuous") +
                              "-time data, got " +
                              std::string(to_string(data.time_domain)));
    }
  };
  switch (m) {
    case Method::kDtQpsd:
    case Method::kDtQzero:
    case Method::kDtQnsd:
      need(true);
      return Program::kDtLinear;
    case Method::kCtQpsd:
    case Method::kCtQzero:
    case Method::kCtQnsd:
      need(false);
      return Program::kCtLinear;
    case Method::kCtPassive:
      need(false);
      return Program::kCtPassive;
    case Method::kNlfb:
      need(true);
      return Program::kNlfbDt;
    case Method::kNlfbCtPassive:
      need(false);
      return Program::kNlfbCtPassive;
    case Method::kNlfbLinearOnly:
      if (!dt && lc.kind == ConstraintKind::kPassive) return Program::kNlfbCtPassive;
      if (dt && lc.kind == ConstraintKind::kStrictR) return Program::kNlfbDt;
      throw UnsupportedCase(
          "nlfb-linear-only covers continuous-time passive or discrete-time "
          "STRICT_R constraints only");
  }
  throw UnsupportedCase("unknown method");
}

void check_q_class(Method m, Program prog, const LiftedConstraint& lc) {
  const Definiteness d = lc.q_class;
  if (d == Definiteness::kIndefinite) {
    throw UnsupportedCase(
        "lifted Q is indefinite; only Q >= 0, Q = 0 and Q <= 0 are covered");
  }
  const bool passive_prog =
      prog == Program::kCtPassive || prog == Program::kNlfbCtPassive;
  if (passive_prog != (lc.kind == ConstraintKind::kPassive)) {
    throw PreconditionError(std::string("method ") + std::string(to_string(m)) +
                            (passive_prog ? " needs" : " does not accept") +
                            " a PASSIVE constraint");
  }
  if (d == Definiteness::kZero) return;
  bool ok = true;
  switch (m) {
    case Method::kDtQpsd:
    case Method::kCtQpsd:
      ok = d == Definiteness::kPSD || d == Definiteness::kPD;
      break;
    case Method::kDtQzero:
    case Method::kCtQzero:
      ok = false;
      break;
    case Method::kDtQnsd:
    case Method::kCtQnsd:
      ok = d == Definiteness::kNSD || d == Definiteness::kND;
      break;
    default:
      break;
  }
  if (!ok) {
    throw PreconditionError(std::string("method ") + std::string(to_string(m)) +
                            " does not match lifted Q class " +
                            std::string(to_string(d)));
  }
}

Mat to_dense(const SymMat& s) { return s.mat(); }

}  // namespace

std::string_view to_string(Method m) {
  for (const auto& e : kMethodNames) {
    if (e.m == m) return e.name;
  }
  return "?";
}

Method method_from_string(std::string_view s) {
  for (const auto& e : kMethodNames) {
    if (e.name == s) return e.m;
  }
  throw ParseError("unknown method '" + std::string(s) + "'");
}

bool is_nlfb(Method m) {
  return m == Method::kNlfb || m == Method::kNlfbCtPassive ||
         m == Method::kNlfbLinearOnly;
}

bool is_passive(Method m) {
  return m == Method::kCtPassive || m == Method::kNlfbCtPassive;
}

std::string_view to_string(CaseFamily c) {
  switch (c) {
    case CaseFamily::kQpsd: return "QPSD";
    case CaseFamily::kQzero: return "QZERO";
    case CaseFamily::kQnsd: return "QNSD";
    case CaseFamily::kPassive: return "PASSIVE";
    case CaseFamily::kUnsupported: return "UNSUPPORTED";
  }
  return "?";
}

CaseFamily classify_case(const LiftedConstraint& lc) {
  if (lc.kind == ConstraintKind::kPassive) return CaseFamily::kPassive;
  switch (lc.q_class) {
    case Definiteness::kPSD:
    case Definiteness::kPD: return CaseFamily::kQpsd;
    case Definiteness::kZero: return CaseFamily::kQzero;
    case Definiteness::kNSD:
    case Definiteness::kND: return CaseFamily::kQnsd;
    case Definiteness::kIndefinite: return CaseFamily::kUnsupported;
  }
  return CaseFamily::kUnsupported;
}

double effective_eps(const DataSet& data, const SynthesisSpec& spec) {
  return spec.strictness_eps * std::max(1.0, data.scale());
}

// Appends [sqrt(eps) W; 0; ...] against -I and adds eps I to the v block, so
// that after the Schur complement and the congruence by diag(W^-1, I) the
// inequality in Lyapunov coordinates keeps the margin eps as well.
void add_lyapunov_margin(std::vector<std::vector<AffineExpr>>& up,
                         const AffineExpr& w, double eps) {
  const Index n = w.rows();
  const Index q = up[1][0].rows();
  up[0].push_back(std::sqrt(eps) * w);
  for (std::size_t i = 1; i < up.size(); ++i) {
    up[i].push_back(AffineExpr::zero(up[i][0].rows(), n));
  }
  up[1][0] = up[1][0] + eps * Mat::Identity(q, q);
  up.push_back({AffineExpr::constant(-Mat::Identity(n, n))});
}

LmiProblem build_program(const DataSet& data, const LiftedConstraint& lc,
                         const SynthesisSpec& spec) {
  data.validate();
  const Method m = spec.method;
  if (!(spec.strictness_eps > 0) || !std::isfinite(spec.strictness_eps)) {
    throw InvalidInput("strictness_eps must be positive");
  }
  const Index n = data.n();
  const Index q = data.q();
  if (lc.n() != n || lc.q() != q) {
    throw DimensionMismatch("constraint is lifted to n = " +
                            std::to_string(lc.n()) + ", q = " +
                            std::to_string(lc.q()) + "; data has n = " +
                            std::to_string(n) + ", q = " + std::to_string(q));
  }
  const Program prog = resolve(m, data, lc);
  check_q_class(m, prog, lc);

  if (spec.decay_rho) {
    const double rho = *spec.decay_rho;
    if (!is_dt_linear(m)) {
      throw PreconditionError("decay_rho is only defined for dt-* methods");
    }
    if (!(rho > 0.0 && rho < 1.0)) {
      throw InvalidInput("decay_rho must lie in (0, 1)");
    }
  }

  const bool nlfb = is_nlfb(m);
  Mat L;
  if (!nlfb) {
    if (!spec.L) {
      throw PreconditionError("method " + std::string(to_string(m)) +
                              " needs the injection matrix L");
    }
    L = *spec.L;
    if (L.rows() != n || L.cols() != q) {
      throw DimensionMismatch("L is " + dims(L) + ", expected " +
                              std::to_string(n) + "x" + std::to_string(q));
    }
    require_finite(L, "L");
  }

  const AssumptionReport ar = check_assumptions(data);
  if (nlfb) {
    if (!ar.full_Psi0) {
      throw PreconditionError("Psi0 = [X0; F0; U0] is not full row rank (rank " +
                              std::to_string(ar.rank_Psi0) + ")");
    }
  } else if (!ar.full_X0) {
    // Only the X0 part of W0 = [U0; X0] is needed; a rank-deficient U0 is
    // allowed.
    throw PreconditionError("W0 = [U0; X0]: X0 is not full row rank (rank " +
                            std::to_string(ar.rank_X0) + ")");
  }

  const double eps = effective_eps(data, spec);
  const Index T = data.T();
  const bool with_q = lc.q_class != Definiteness::kZero &&
                      (m == Method::kDtQpsd || m == Method::kCtQpsd ||
                       (prog == Program::kNlfbDt && is_positive_semidefinite(lc.q_class)));
  const Mat qh = with_q ? to_dense(psd_sqrt(lc.Q)) : Mat();
  const Mat& S = lc.S;
  const Mat R = lc.R.mat();
  const Mat In = Mat::Identity(n, n);
  const Mat Iq = Mat::Identity(q, q);

  LmiProblem p;
  p.set_margin(eps);

  switch (prog) {
    case Program::kDtLinear: {
      const AffineExpr Y = p.add_variable("Y", T, n);
      const AffineExpr V = data.X0 * Y;
      const AffineExpr Vs = 0.5 * (V + V.t());  // V = V^T is an equality
      const Mat phi = data.X1 - L * data.F0;
      const AffineExpr cross = (phi * Y).t();
      const double rho = spec.decay_rho.value_or(1.0);
      std::vector<std::vector<AffineExpr>> up;
      if (with_q) {
        up = {{-rho * Vs, V * S, cross, V * qh},
              {AffineExpr::constant(R), AffineExpr::constant(L.transpose()),
               AffineExpr::zero(q, n)},
              {-Vs, AffineExpr::zero(n, n)},
              {AffineExpr::constant(-In)}};
      } else {
        up = {{-rho * Vs, V * S, cross},
              {AffineExpr::constant(R), AffineExpr::constant(L.transpose())},
              {-Vs}};
      }
      if (spec.decay_rho) {
        p.add_lmi("decay", symmetric_block(up), LmiSense::kNegative, 0.0);
        p.add_lmi("X0Y>0", Vs, LmiSense::kPositive);
      } else {
        add_lyapunov_margin(up, Vs, eps);
        p.add_lmi("lyapunov", symmetric_block(up), LmiSense::kNegative);
      }
      p.add_equality("X0Y symmetric", V - V.t());
      break;
    }
    case Program::kCtLinear: {
      const AffineExpr Y = p.add_variable("Y", T, n);
      const AffineExpr V = data.X0 * Y;
      const AffineExpr Vs = 0.5 * (V + V.t());  // V = V^T is an equality
      const Mat phi = data.X1 - L * data.F0;
      const AffineExpr py = phi * Y;
      std::vector<std::vector<AffineExpr>> up;
      if (with_q) {
        up = {{py + py.t(), V * S + L, V * qh},
              {AffineExpr::constant(R), AffineExpr::zero(q, n)},
              {AffineExpr::constant(-In)}};
      } else {
        up = {{py + py.t(), V * S + L}, {AffineExpr::constant(R)}};
      }
      add_lyapunov_margin(up, Vs, eps);
      p.add_lmi("lyapunov", symmetric_block(up), LmiSense::kNegative);
      p.add_lmi("X0Y>0", Vs, LmiSense::kPositive);
      p.add_equality("X0Y symmetric", V - V.t());
      break;
    }
    case Program::kCtPassive: {
      const AffineExpr Y = p.add_variable("Y", T, n);
      const AffineExpr V = data.X0 * Y;
      const AffineExpr Vs = 0.5 * (V + V.t());  // V = V^T is an equality
      const Mat phi = data.X1 - L * data.F0;
      const AffineExpr py = phi * Y;
      p.add_lmi("X0Y>0", Vs, LmiSense::kPositive);
      p.add_lmi("lyapunov", py + py.t(), LmiSense::kNegative);
      p.add_equality("L + X0Y S", V * S + L);
      p.add_equality("X0Y symmetric", V - V.t());
      break;
    }
    case Program::kNlfbDt: {
      const AffineExpr Y1 = p.add_variable("Y1", T, n);
      const AffineExpr Y2 = p.add_variable("Y2", T, q);
      const AffineExpr W = p.add_variable("W", n, n, VarKind::kSymmetric);
      const AffineExpr a1 = (data.X1 * Y1).t();
      const AffineExpr a2 = (data.X1 * Y2).t();
      std::vector<std::vector<AffineExpr>> up;
      if (with_q) {
        up = {{-W, W * S, a1, W * qh},
              {AffineExpr::constant(R), a2, AffineExpr::zero(q, n)},
              {-W, AffineExpr::zero(n, n)},
              {AffineExpr::constant(-In)}};
      } else {
        up = {{-W, W * S, a1}, {AffineExpr::constant(R), a2}, {-W}};
      }
      add_lyapunov_margin(up, W, eps);
      p.add_lmi("lyapunov", symmetric_block(up), LmiSense::kNegative);
      p.add_lmi("W>0", W, LmiSense::kPositive);
      p.add_equality("X0Y1 - W", data.X0 * Y1 - W);
      p.add_equality("X0Y2", data.X0 * Y2);
      p.add_equality("F0Y1", data.F0 * Y1);
      p.add_equality("F0Y2 - I", data.F0 * Y2 - Iq);
      if (m == Method::kNlfbLinearOnly) p.add_equality("U0Y2", data.U0 * Y2);
      break;
    }
    case Program::kNlfbCtPassive: {
      const AffineExpr Y1 = p.add_variable("Y1", T, n);
      const AffineExpr Y2 = p.add_variable("Y2", T, q);
      const AffineExpr V = data.X0 * Y1;
      const AffineExpr Vs = 0.5 * (V + V.t());
      const AffineExpr xy = data.X1 * Y1;
      p.add_lmi("lyapunov", xy + xy.t(), LmiSense::kNegative);
      p.add_lmi("X0Y1>0", Vs, LmiSense::kPositive);
      p.add_equality("X1Y2 + X0Y1 S", data.X1 * Y2 + V * S);
      p.add_equality("X0Y1 symmetric", V - V.t());
      p.add_equality("X0Y2", data.X0 * Y2);
      p.add_equality("F0Y2 - I", data.F0 * Y2 - Iq);
      p.add_equality("F0Y1", data.F0 * Y1);
      if (m == Method::kNlfbLinearOnly) p.add_equality("U0Y2", data.U0 * Y2);
      break;
    }
  }
  return p;
}

Gains extract_gains(const Assignment& raw, const DataSet& data,
                    double symmetry_tol) {
  data.validate();
  auto get = [&](const char* name) -> const Mat* {
    const auto it = raw.find(name);
    return it == raw.end() ? nullptr : &it->second;
  };
  auto invert_pd = [symmetry_tol](const Mat& v, const char* what) {
    if (v.rows() != v.cols()) {
      throw CertificateCorrupt(std::string(what) + " is not square");
    }
    if (!v.allFinite()) {
      throw CertificateCorrupt(std::string(what) + " has non-finite entries");
    }
    const double scale = std::max(1.0, v.cwiseAbs().maxCoeff());
    if ((v - v.transpose()).cwiseAbs().maxCoeff() > symmetry_tol * scale) {
      throw CertificateCorrupt(std::string(what) + " is not symmetric");
    }
    const SymMat vs = SymMat::symmetrized(v);
    if (!(min_eigenvalue(vs) > 0.0)) {
      throw CertificateCorrupt(std::string(what) + " is not positive definite");
    }
    return SymMat::symmetrized(vs.mat().inverse());
  };

  Gains g;
  if (const Mat* y = get("Y")) {
    if (y->rows() != data.T() || y->cols() != data.n()) {
      throw CertificateCorrupt("Y is " + dims(*y) + ", expected " +
                               std::to_string(data.T()) + "x" +
                               std::to_string(data.n()));
    }
    g.P = invert_pd(data.X0 * *y, "X0 Y");
    g.K = data.U0 * *y * g.P.mat();
    return g;
  }
  const Mat* y1 = get("Y1");
  const Mat* y2 = get("Y2");
  const Mat* w = get("W");
  if (!y1 || !y2 || !w) {
    throw CertificateCorrupt("raw variables must be {Y} or {Y1, Y2, W}");
  }
  if (y1->rows() != data.T() || y1->cols() != data.n() ||
      y2->rows() != data.T() || y2->cols() != data.q()) {
    throw CertificateCorrupt("Y1/Y2 shapes do not match the data");
  }
  g.P = invert_pd(*w, "W");
  g.K = data.U0 * *y1 * g.P.mat();
  g.M = data.U0 * *y2;
  return g;
}

SynthesisResult synthesize(const DataSet& data, const LiftedConstraint& lc,
                           const SynthesisSpec& spec, const SolveOptions& opts) {
  const LmiProblem p = build_program(data, lc, spec);
  const SolveOutcome out = solve_feasibility(p, opts);

  SynthesisResult res;
  res.status = out.status;
  res.stats.status = out.status;
  res.stats.iterations = out.iterations;
  res.stats.runtime_s = out.runtime_s;
  res.stats.achieved_margin = out.achieved_margin;
  res.stats.message = out.message;
  if (out.status != SolveStatus::kFeasible) return res;

  Certificate c;
  c.method = spec.method;
  c.raw = out.assignment;
  if (spec.method == Method::kNlfbCtPassive ||
      (spec.method == Method::kNlfbLinearOnly &&
       data.time_domain == TimeDomain::kContinuous)) {
    c.raw["W"] = SymMat::symmetrized(data.X0 * c.raw.at("Y1")).mat();
  }
  Gains g = extract_gains(c.raw, data);
  c.K = std::move(g.K);
  c.P = std::move(g.P);
  if (spec.method != Method::kNlfbLinearOnly) c.M = std::move(g.M);
  c.eps = p.margin();
  c.stats = res.stats;
  c.L = spec.L;
  c.decay_rho = spec.decay_rho;
  res.certificate = std::move(c);
  return res;
}

std::optional<Certificate> bisect_decay(const DataSet& data,
                                        const LiftedConstraint& lc,
                                        SynthesisSpec spec,
                                        const SolveOptions& opts, int iters) {
  if (iters < 1) throw InvalidInput("bisect_decay: iters must be >= 1");
  double lo = 0.0;
  double hi = 1.0 - 1e-6;
  spec.decay_rho = hi;
  SynthesisResult r = synthesize(data, lc, spec, opts);
  if (!r.certificate) return std::nullopt;
  std::optional<Certificate> best = r.certificate;
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    spec.decay_rho = mid;
    r = synthesize(data, lc, spec, opts);
    if (r.certificate) {
      hi = mid;
      best = r.certificate;
    } else {
      lo = mid;
    }
  }
  return best;
}

}  // namespace ddlure
