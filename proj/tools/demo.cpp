#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <string>

#include "cli.hpp"
#include "ddlure/errors.hpp"
#include "ddlure/io.hpp"
#include "ddlure/scenarios.hpp"
#include "ddlure/verify.hpp"

namespace ddlure::cli {

namespace {

double max_abs_diff(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return INFINITY;
  return (a - b).cwiseAbs().maxCoeff();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

class Table {
 public:
  explicit Table(std::ostream& out) : out_(out) {
    line("quantity", "published", "reproduced", "tolerance", "ok");
  }
  // Returns `ok` so callers can fold it into a stage verdict.
  bool row(const std::string& what, const std::string& published,
           const std::string& reproduced, const std::string& tol, bool ok) {
    line(what, published, reproduced, tol, ok ? "yes" : "NO");
    return ok;
  }

 private:
  void line(const std::string& a, const std::string& b, const std::string& c,
            const std::string& d, const std::string& e) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-30s %-26s %-26s %-10s %s\n", a.c_str(),
                  b.c_str(), c.c_str(), d.c_str(), e.c_str());
    out_ << buf;
  }
  std::ostream& out_;
};

struct Stage {
  std::ostream& err;
  std::string demo;
  int fail(const std::string& stage, int code) {
    err << "demo " << demo << ": stage '" << stage << "' failed\n";
    return code;
  }
};

int status_code(SolveStatus s) {
  return s == SolveStatus::kInfeasible ? kInfeasible : kInconclusive;
}

void print_report(const VerificationReport& rep, std::ostream& out) {
  for (const auto& c : rep.checks) {
    out << "  " << c.name << ": "
        << (c.pass ? "pass" : (c.inconclusive ? "inconclusive" : "FAIL"))
        << "  residual " << fmt(c.residual) << "\n";
  }
  out << "  overall: " << (rep.overall ? "pass" : "FAIL") << "\n";
}

int verdict(const VerificationReport& rep) {
  if (rep.overall) return kOk;
  return rep.only_inconclusive_failures() ? kInconclusive : kVerifyFailed;
}

SynthesisSpec spec_for(Method m, const DemoOptions& o) {
  SynthesisSpec s;
  s.method = m;
  s.strictness_eps = o.eps;
  return s;
}

int demo_example1(const DemoOptions& o, std::ostream& out, Stage st) {
  const DataSet d = example1_dataset();
  out << "Example 1: passive nonlinearity, continuous time, T = 5\n\n";
  Table t(out);
  bool data_ok = true;
  data_ok &= t.row("U0", "printed", fmt(max_abs_diff(d.U0, reference::ex1_U0())) + " max dev", "1e-3",
                   max_abs_diff(d.U0, reference::ex1_U0()) <= 1e-3);
  data_ok &= t.row("X0", "printed", fmt(max_abs_diff(d.X0, reference::ex1_X0())) + " max dev", "1e-3",
                   max_abs_diff(d.X0, reference::ex1_X0()) <= 1e-3);
  data_ok &= t.row("X1", "printed", fmt(max_abs_diff(d.X1, reference::ex1_X1())) + " max dev", "1e-3",
                   max_abs_diff(d.X1, reference::ex1_X1()) <= 1e-3);
  data_ok &= t.row("F0", "printed", fmt(max_abs_diff(d.F0, reference::ex1_F0())) + " max dev", "1e-3",
                   max_abs_diff(d.F0, reference::ex1_F0()) <= 1e-3);

  // Published Y against the published data.
  const DataSet pub = reference::ex1_dataset();
  const Mat L{{-2.0}, {-2.4}};
  const LiftedConstraint lc = lift(example_passive_constraint(), 2);
  SynthesisSpec spec = spec_for(Method::kCtPassive, o);
  spec.L = L;
  const Assignment ypub{{"Y", reference::ex1_Y()}};
  const RecheckResult rc = recheck(build_program(pub, lc, spec), ypub);
  t.row("published Y: block lambda_max", "< 0", fmt(rc.max_block_eig), "0",
        rc.max_block_eig < 0);
  t.row("published Y: equalities", "0", fmt(rc.max_equality_residual), "1e-3",
        rc.max_equality_residual <= 1e-3);
  const Gains g = extract_gains(ypub, pub, 1e-3);
  t.row("published Y: K", format_matrix(reference::ex1_K(), 5),
        format_matrix(g.K, 5), "1e-3",
        max_abs_diff(g.K, reference::ex1_K()) <= 1e-3);
  // The printed block matches the experiment's L = [-1; -1.2], not the
  // synthesis L.
  const Mat Lexp{{-1.0}, {-1.2}};
  const Mat py = (pub.X1 - Lexp * pub.F0) * reference::ex1_Y();
  t.row("published Y: Lyapunov block", format_matrix(reference::ex1_lyap(), 5),
        format_matrix(py + py.transpose(), 5), "1e-3",
        max_abs_diff(py + py.transpose(), reference::ex1_lyap()) <= 1e-3);
  out << "\n";
  if (!data_ok) return st.fail("data", kVerifyFailed);

  const SynthesisResult r = synthesize(d, lc, spec, o.solve);
  out << "synthesis (ct-passive, L = [-2; -2.4]): " << to_string(r.status) << "\n";
  if (!r.certificate) return st.fail("synthesize", status_code(r.status));
  out << "K = " << format_matrix(r.certificate->K) << "\n";
  out << "P = " << format_matrix(r.certificate->P.mat()) << "\n";

  const PlantModel plant = example1_plant(2.0);
  VerifyOptions vo;
  vo.model = &plant;
  vo.x0 = example_x0();
  const VerificationReport rep = verify_certificate(*r.certificate, d, lc, vo);
  print_report(rep, out);
  if (!o.report.empty()) write_text(o.report, report_to_json(rep));
  const int v = verdict(rep);
  return v == kOk ? kOk : st.fail("verify", v);
}

int demo_example2(const DemoOptions& o, std::ostream& out, Stage st) {
  const DataSet d = example2_dataset();
  const PlantModel plant = example2_plant();
  const LiftedConstraint lc = lift(example_passive_constraint(), 2);
  out << "Example 2: nonlinearity feedback, L = [-1; 0], T = 10 on [0, 1]\n";
  const AssumptionReport ar = check_assumptions(d);
  out << "rank Psi0 = " << ar.rank_Psi0
      << (ar.full_Psi0 ? " (full row rank)\n\n" : " (rank deficient)\n\n");
  if (!ar.full_Psi0) return st.fail("data", kStructural);

  Table t(out);
  const DataSet ref = example2_reference_dataset();
  const Assignment yp{{"Y1", reference::ex2_Y1()}, {"Y2", reference::ex2_Y2()}};
  const Gains g = extract_gains(
      {{"Y1", yp.at("Y1")}, {"Y2", yp.at("Y2")},
       {"W", ref.X0 * reference::ex2_Y1()}},
      ref, 1e-2);
  t.row("published Y1,Y2: K", format_matrix(reference::ex2_K(), 5),
        format_matrix(g.K, 5), "1e-2",
        max_abs_diff(g.K, reference::ex2_K()) <= 1e-2);
  t.row("published Y1,Y2: M", format_matrix(reference::ex2_M(), 5),
        format_matrix(*g.M, 5), "1e-2",
        max_abs_diff(*g.M, reference::ex2_M()) <= 1e-2);
  t.row("published Y1,Y2: P", format_matrix(reference::ex2_P(), 5),
        format_matrix(g.P.mat(), 5), "1e-2",
        max_abs_diff(g.P.mat(), reference::ex2_P()) <= 1e-2);
  const Mat xy = ref.X1 * reference::ex2_Y1();
  t.row("published Y1: Lyapunov block", format_matrix(reference::ex2_lyap(), 5),
        format_matrix(xy + xy.transpose(), 5), "1e-3",
        max_abs_diff(xy + xy.transpose(), reference::ex2_lyap()) <= 1e-3);
  out << "\n";

  const SynthesisResult r =
      synthesize(d, lc, spec_for(Method::kNlfbCtPassive, o), o.solve);
  out << "synthesis (nlfb-ct-passive): " << to_string(r.status) << "\n";
  if (!r.certificate) return st.fail("synthesize", status_code(r.status));
  const Certificate& c = *r.certificate;
  out << "K = " << format_matrix(c.K) << "\nM = " << format_matrix(*c.M)
      << "\nP = " << format_matrix(c.P.mat()) << "\n";
  const double mval = (*c.M)(0, 0);
  const Mat kyp = c.P.mat() * (plant.L() + plant.B() * *c.M) + plant.H().transpose();
  const double kres = kyp.cwiseAbs().maxCoeff();
  const double tol = 1e-6 * d.scale();
  Table t2(out);
  const bool m_ok = t2.row("M < -9/8", "-3.5130", fmt(mval), "-1.125", mval < -9.0 / 8.0);
  const bool k_ok = t2.row("P (L + B M) + H'", "0", fmt(kres), fmt(tol), kres <= tol);

  VerifyOptions vo;
  vo.model = &plant;
  vo.x0 = example_x0();
  const VerificationReport rep = verify_certificate(c, d, lc, vo);
  print_report(rep, out);
  if (!o.report.empty()) write_text(o.report, report_to_json(rep));
  if (!m_ok || !k_ok) return st.fail("certificate properties", kVerifyFailed);
  const int v = verdict(rep);
  return v == kOk ? kOk : st.fail("verify", v);
}

int demo_example3(const DemoOptions& o, std::ostream& out, Stage st) {
  const DataSet d = example1_dataset();
  const PlantModel plant = example1_plant(2.0);
  const LiftedConstraint lc = lift(example_passive_constraint(), 2);
  out << "Example 3: linear-only feedback on the Example 1 data\n";

  const SynthesisResult r =
      synthesize(d, lc, spec_for(Method::kNlfbLinearOnly, o), o.solve);
  out << "synthesis (nlfb-linear-only): " << to_string(r.status) << "\n";
  if (!r.certificate) return st.fail("synthesize", status_code(r.status));
  const Certificate& c = *r.certificate;
  out << "K = " << format_matrix(c.K) << "\nP = " << format_matrix(c.P.mat())
      << "\n\n";

  const double tol = 1e-6 * d.scale();
  Table t(out);
  const ClosedLoopData cl = closed_loop_from_raw(c, d);
  const double abscissa = spectral_abscissa(cl.Acl);
  bool ok = t.row("closed loop from data", "Hurwitz", fmt(abscissa) + " abscissa",
                  "< 0", abscissa < 0);
  const double pl =
      (c.P.mat() * plant.L() + plant.H().transpose()).cwiseAbs().maxCoeff();
  ok &= t.row("P L + H'", "0", fmt(pl), fmt(tol), pl <= tol);

  // Published gains through the same checks.
  Certificate pub;
  pub.method = Method::kNlfbLinearOnly;
  pub.K = reference::ex3_K();
  const ClosedLoopData clp = closed_loop_from_gains(pub, d);
  const Mat Pp = reference::ex3_P();
  const double ap = spectral_abscissa(clp.Acl);
  t.row("published K: closed loop", "Hurwitz", fmt(ap) + " abscissa", "< 0", ap < 0);
  const double plp = (Pp * plant.L() + plant.H().transpose()).cwiseAbs().maxCoeff();
  t.row("published P: P L + H'", "0", fmt(plp), "1e-2", plp <= 1e-2);
  const double lyp =
      max_eigenvalue(SymMat::symmetrized(clp.Acl.transpose() * Pp + Pp * clp.Acl));
  t.row("published K,P: Lyapunov", "< 0", fmt(lyp), "1e-2", lyp < 1e-2);
  out << "\n";

  VerifyOptions vo;
  vo.model = &plant;
  vo.x0 = example_x0();
  const VerificationReport rep = verify_certificate(c, d, lc, vo);
  print_report(rep, out);
  if (!o.report.empty()) write_text(o.report, report_to_json(rep));
  if (!ok) return st.fail("certificate properties", kVerifyFailed);
  const int v = verdict(rep);
  return v == kOk ? kOk : st.fail("verify", v);
}

int demo_dt_random(const DemoOptions& o, std::ostream& out, Stage st) {
  const SuiteInstance inst = make_dt_instance(o.seed);
  out << "random discrete-time plant, seed " << o.seed << ": n = " << inst.data.n()
      << ", m = " << inst.data.m() << ", q = " << inst.data.q() << ", "
      << inst.family << ", method " << to_string(inst.method) << "\n";
  SynthesisSpec spec = spec_for(inst.method, o);
  spec.L = inst.model.L();
  const SynthesisResult r = synthesize(inst.data, inst.lifted, spec, o.solve);
  out << "synthesis: " << to_string(r.status) << "\n";
  if (!r.certificate) return st.fail("synthesize", status_code(r.status));
  const Certificate& c = *r.certificate;
  out << "K = " << format_matrix(c.K) << "\n";

  VerifyOptions vo;
  vo.model = &inst.model;
  vo.seed = o.seed;
  const VerificationReport rep = verify_certificate(c, inst.data, inst.lifted, vo);
  print_report(rep, out);
  if (!o.report.empty()) write_text(o.report, report_to_json(rep));
  const int v = verdict(rep);
  if (v != kOk) return st.fail("verify", v);

  // A corrupted certificate must not survive verification.
  Certificate flipped = c;
  flipped.P = -c.P;
  Certificate shifted = c;
  shifted.K = c.K + 10.0 * c.K.norm() * Mat::Ones(c.K.rows(), c.K.cols());
  Certificate scrambled = c;
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> nd;
  for (auto& [name, m] : scrambled.raw) {
    m = Mat::NullaryExpr(m.rows(), m.cols(), [&] { return nd(rng); });
  }
  bool caught = true;
  for (const auto* bad : {&flipped, &shifted, &scrambled}) {
    caught &= !verify_certificate(*bad, inst.data, inst.lifted, vo).overall;
  }
  out << "corrupted certificates rejected: " << (caught ? "yes" : "NO") << "\n";
  if (!caught) return st.fail("corruption", kVerifyFailed);

  spec.decay_rho = 0.9;
  const SynthesisResult rd = synthesize(inst.data, inst.lifted, spec, o.solve);
  out << "decay variant rho = 0.9: " << to_string(rd.status) << "\n";
  if (!rd.certificate) return st.fail("decay", status_code(rd.status));
  return kOk;
}

}  // namespace

int run_demo(const std::string& name, const DemoOptions& opts,
             std::ostream& out, std::ostream& err) {
  Stage st{err, name};
  if (name == "example1") return demo_example1(opts, out, st);
  if (name == "example2") return demo_example2(opts, out, st);
  if (name == "example3") return demo_example3(opts, out, st);
  if (name == "dt-random") return demo_dt_random(opts, out, st);
  throw InvalidInput("unknown demo '" + name +
                     "' (example1, example2, example3, dt-random)");
}

}  // namespace ddlure::cli
