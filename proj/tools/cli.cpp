#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

#include "ddlure/constraints.hpp"
#include "ddlure/errors.hpp"
#include "ddlure/io.hpp"
#include "ddlure/plant.hpp"
#include "ddlure/synth.hpp"
#include "ddlure/verify.hpp"

namespace ddlure::cli {

namespace {

struct Args {
  std::string model, data, constraint, cert, out, report, method = "dt-qpsd";
  std::string L, x0, input = "sin", ode = "precise", demo;
  std::vector<double> span{0.0, 1.0};
  std::optional<double> horizon;
  int samples = 0;
  double eps = 1e-7;
  std::uint64_t seed = 0;
  int max_iter = 400;
  double tol = 1e-8;
  std::optional<double> rho;
  bool rho_bisect = false;
  std::string with_model;
  int n_samples = 10000;
};

// Smooth seeded excitation: three sinusoids per channel.
InputLaw random_input(Index m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(-1.0, 1.0), w(0.5, 6.0),
      ph(0.0, 2.0 * std::numbers::pi);
  Mat a(m, 3), om(m, 3), phi(m, 3);
  for (Index i = 0; i < m; ++i) {
    for (int k = 0; k < 3; ++k) {
      a(i, k) = amp(rng) / 3.0;
      om(i, k) = w(rng);
      phi(i, k) = ph(rng);
    }
  }
  return [a, om, phi](double t, const Vec&) {
    Vec u(a.rows());
    for (Index i = 0; i < a.rows(); ++i) {
      u(i) = 0.0;
      for (int k = 0; k < 3; ++k) u(i) += a(i, k) * std::sin(om(i, k) * t + phi(i, k));
    }
    return u;
  };
}

InputLaw make_input(const std::string& kind, Index m, std::uint64_t seed) {
  if (kind == "sin") {
    return [m](double t, const Vec&) { return Vec::Constant(m, std::sin(t)); };
  }
  if (kind == "zero") {
    return [m](double, const Vec&) { return Vec::Zero(m); };
  }
  if (kind == "random") return random_input(m, seed);
  throw InvalidInput("unknown input '" + kind + "' (sin, zero, random)");
}

Vec parse_x0(const std::string& text, Index n) {
  if (text.empty()) return Vec::Ones(n);
  const Mat m = parse_matrix(text);
  if (m.size() != n) {
    throw DimensionMismatch("x0 has " + std::to_string(m.size()) +
                            " entries, the model has n = " + std::to_string(n));
  }
  return Eigen::Map<const Vec>(m.data(), n);
}

void print_assumptions(const DataSet& d, std::ostream& out) {
  const AssumptionReport a = check_assumptions(d);
  const Index n = d.n(), m = d.m(), q = d.q();
  out << "T = " << d.T() << ", n = " << n << ", m = " << m << ", q = " << q << "\n";
  out << "rank X0   = " << a.rank_X0 << " / " << n
      << (a.full_X0 ? "  full row rank\n" : "  rank deficient\n");
  out << "rank W0   = " << a.rank_W0 << " / " << n + m
      << (a.full_W0 ? "  full row rank\n" : "  rank deficient\n");
  out << "rank Psi0 = " << a.rank_Psi0 << " / " << n + m + q
      << (a.full_Psi0 ? "  full row rank\n" : "  rank deficient\n");
}

int cmd_simulate(const Args& a, std::ostream& out) {
  if (a.samples < 1) throw InvalidInput("--samples must be at least 1");
  const PlantModel model = read_model(a.model);
  const Vec x0 = parse_x0(a.x0, model.n());
  const InputLaw u = make_input(a.input, model.m(), a.seed);
  const auto T = static_cast<std::size_t>(a.samples);
  DataSet d;
  if (model.time_domain() == TimeDomain::kDiscrete) {
    std::vector<Vec> inputs;
    for (std::size_t k = 0; k < T; ++k) {
      inputs.push_back(u(static_cast<double>(k), x0));
    }
    const Trajectory tr = simulate_discrete(model, x0, inputs);
    std::vector<std::size_t> idx(T);
    for (std::size_t k = 0; k < T; ++k) idx[k] = k;
    d = collect_dataset(tr, idx);
  } else {
    if (a.span.size() != 2 || !(a.span[1] > a.span[0])) {
      throw InvalidInput("--horizon expects t0 tf with tf > t0");
    }
    ContinuousOptions opts;
    if (a.ode == "coarse") {
      opts.ode = OdeOptions::coarse();
    } else if (a.ode != "precise") {
      throw InvalidInput("--ode must be precise or coarse");
    }
    const std::vector<double> times = linspace(a.span[0], a.span[1], T);
    // the integrator grid must reach tf even for a single sample
    opts.output_times = T == 1 ? std::vector<double>{a.span[0], a.span[1]} : times;
    const Trajectory tr =
        simulate_continuous(model, x0, u, a.span[0], a.span[1], opts);
    d = collect_dataset_at(tr, times);
  }
  write_dataset(a.out, d);
  print_assumptions(d, out);
  out << "wrote " << a.out << "\n";
  return kOk;
}

SynthesisSpec make_spec(const Args& a) {
  SynthesisSpec s;
  s.method = method_from_string(a.method);
  s.strictness_eps = a.eps;
  if (!a.L.empty()) s.L = parse_matrix(a.L);
  if (a.rho) s.decay_rho = *a.rho;
  return s;
}

SolveOptions make_solve(const Args& a) {
  SolveOptions o;
  o.max_iter = a.max_iter;
  o.tol = a.tol;
  o.seed = a.seed;
  return o;
}

int cmd_synthesize(const Args& a, std::ostream& out) {
  const DataSet d = read_dataset(a.data);
  const QuadConstraint c = read_constraint(a.constraint);
  const LiftedConstraint lc = lift(c, d.n());
  SynthesisSpec spec = make_spec(a);
  const SolveOptions so = make_solve(a);

  std::optional<Certificate> cert;
  SolverStats stats;
  SolveStatus status;
  if (a.rho_bisect) {
    cert = bisect_decay(d, lc, spec, so);
    status = cert ? SolveStatus::kFeasible : SolveStatus::kInfeasible;
    if (cert) stats = cert->stats;
  } else {
    const SynthesisResult r = synthesize(d, lc, spec, so);
    status = r.status;
    stats = r.stats;
    cert = r.certificate;
  }

  out << "method " << to_string(spec.method) << ": " << to_string(status);
  if (!stats.message.empty()) out << " (" << stats.message << ")";
  out << ", " << stats.iterations << " iterations\n";
  if (!a.report.empty()) {
    nlohmann::json j;
    j["status"] = std::string(to_string(status));
    j["method"] = std::string(to_string(spec.method));
    j["iterations"] = stats.iterations;
    j["runtime_s"] = stats.runtime_s;
    j["message"] = stats.message;
    write_text(a.report, j.dump(2) + "\n");
  }
  if (status == SolveStatus::kInfeasible) return kInfeasible;
  if (status != SolveStatus::kFeasible || !cert) return kInconclusive;
  out << "K = " << format_matrix(cert->K) << "\n";
  if (cert->M) out << "M = " << format_matrix(*cert->M) << "\n";
  out << "P = " << format_matrix(cert->P.mat()) << "\n";
  if (cert->decay_rho) out << "rho = " << *cert->decay_rho << "\n";
  if (!a.out.empty()) {
    write_certificate(a.out, *cert);
    out << "wrote " << a.out << "\n";
  }
  return kOk;
}

void print_check(const CheckResult& c, std::ostream& out) {
  const char* tag = c.pass ? "pass" : (c.inconclusive ? "inconclusive" : "FAIL");
  out << "  " << c.name << ": " << tag << "  residual " << c.residual
      << "  tol " << c.tolerance;
  if (!c.details.empty()) out << "  (" << c.details << ")";
  out << "\n";
}

int cmd_verify(const Args& a, std::ostream& out) {
  const DataSet d = read_dataset(a.data);
  const QuadConstraint c = read_constraint(a.constraint);
  const LiftedConstraint lc = lift(c, d.n());
  const Certificate cert = read_certificate(a.cert);

  VerifyOptions vo;
  vo.seed = a.seed;
  vo.n_samples = a.n_samples;
  std::optional<PlantModel> model;
  if (!a.with_model.empty()) {
    model.emplace(read_model(a.with_model));
    vo.model = &*model;
    if (!a.x0.empty()) vo.x0 = parse_x0(a.x0, model->n());
    vo.horizon = a.horizon;
  }
  const VerificationReport rep = verify_certificate(cert, d, lc, vo);
  for (const auto& ch : rep.checks) print_check(ch, out);
  for (const auto& ch : rep.informational) {
    out << "  [info] " << ch.name << ": " << (ch.pass ? "yes" : "no")
        << "  residual " << ch.residual << "\n";
  }
  out << "overall: " << (rep.overall ? "pass" : "FAIL") << "\n";
  if (!a.report.empty()) write_text(a.report, report_to_json(rep));
  if (rep.overall) return kOk;
  return rep.only_inconclusive_failures() ? kInconclusive : kVerifyFailed;
}

void solver_flags(CLI::App* sc, Args& a) {
  sc->add_option("--eps", a.eps, "strictness margin (scaled by the data)");
  sc->add_option("--seed", a.seed, "seed for randomized steps");
  sc->add_option("--max-iter", a.max_iter, "solver iteration cap");
  sc->add_option("--tol", a.tol, "solver gap tolerance");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Data-driven absolute stabilization of Lurie systems", "ddlure"};
  app.require_subcommand(1);
  Args a;

  auto* sim = app.add_subcommand("simulate", "simulate a plant and write a data set");
  sim->add_option("--model", a.model, "model.json")->required();
  sim->add_option("--input", a.input, "sin | zero | random");
  sim->add_option("--horizon", a.span, "t0 tf (continuous time)")->expected(2);
  sim->add_option("--samples", a.samples, "number of samples T")->required();
  sim->add_option("--x0", a.x0, "initial state, e.g. \"[2; -1]\" (default ones)");
  sim->add_option("--ode", a.ode, "precise | coarse integration profile");
  sim->add_option("--seed", a.seed, "seed for --input random");
  sim->add_option("--out", a.out, "output directory")->required();

  auto* syn = app.add_subcommand("synthesize", "solve the LMI program for a controller");
  syn->add_option("--data", a.data, "data set directory")->required();
  syn->add_option("--constraint", a.constraint, "constraint.json")->required();
  syn->add_option("--method", a.method, "synthesis method");
  syn->add_option("--L", a.L, "nonlinearity injection matrix");
  syn->add_option("--rho", a.rho, "decay rate in (0, 1), discrete time");
  syn->add_flag("--rho-bisect", a.rho_bisect, "search the smallest feasible rho");
  syn->add_option("--out", a.out, "certificate output path");
  syn->add_option("--report", a.report, "JSON solver summary");
  solver_flags(syn, a);

  auto* ver = app.add_subcommand("verify", "check a certificate against the data");
  ver->add_option("--cert", a.cert, "cert.json")->required();
  ver->add_option("--data", a.data, "data set directory")->required();
  ver->add_option("--constraint", a.constraint, "constraint.json")->required();
  ver->add_option("--with-model", a.with_model, "model.json for the closed-loop check");
  ver->add_option("--x0", a.x0, "initial state for the closed-loop check");
  ver->add_option("--horizon", a.horizon, "steps (discrete) or seconds (continuous)");
  ver->add_option("--samples", a.n_samples, "sampled decrease pairs");
  ver->add_option("--seed", a.seed, "sampling seed");
  ver->add_option("--report", a.report, "JSON report path");

  auto* demo = app.add_subcommand("demo", "run a worked example end to end");
  demo->add_option("name", a.demo, "example1 | example2 | example3 | dt-random")
      ->required();
  demo->add_option("--report", a.report, "JSON report path");
  solver_flags(demo, a);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kStructural;
  }

  try {
    if (*sim) return cmd_simulate(a, out);
    if (*syn) return cmd_synthesize(a, out);
    if (*ver) return cmd_verify(a, out);
    DemoOptions d;
    if (demo->count("--seed") > 0) d.seed = a.seed;
    d.solve = make_solve(a);
    d.eps = a.eps;
    d.report = a.report;
    return run_demo(a.demo, d, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kStructural;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kStructural;
  }
}

}  // namespace ddlure::cli
