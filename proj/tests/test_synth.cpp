#include <gtest/gtest.h>

#include <random>

#include "ddlure/errors.hpp"
#include "ddlure/scenarios.hpp"
#include "ddlure/synth.hpp"
#include "ddlure/verify.hpp"

using namespace ddlure;

namespace {

const Mat kL1{{-2.0}, {-2.4}};

LiftedConstraint passive_lift() { return lift(example_passive_constraint(), 2); }

Certificate solve_or_die(const DataSet& d, const LiftedConstraint& lc,
                         const SynthesisSpec& spec) {
  const SynthesisResult r = synthesize(d, lc, spec);
  if (r.status != SolveStatus::kFeasible || !r.certificate) {
    throw std::runtime_error("not feasible: " + r.stats.message);
  }
  return *r.certificate;
}

SynthesisSpec spec_for(Method m, std::optional<Mat> L = std::nullopt) {
  SynthesisSpec s;
  s.method = m;
  s.L = std::move(L);
  return s;
}

double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(Methods, NamesRoundTrip) {
  for (Method m : {Method::kDtQpsd, Method::kDtQzero, Method::kDtQnsd, Method::kCtQpsd,
                   Method::kCtQzero, Method::kCtQnsd, Method::kCtPassive, Method::kNlfb,
                   Method::kNlfbCtPassive, Method::kNlfbLinearOnly}) {
    EXPECT_EQ(method_from_string(to_string(m)), m);
  }
  EXPECT_EQ(to_string(Method::kNlfbLinearOnly), "nlfb-linear-only");
  EXPECT_THROW(method_from_string("DT_QPSD"), ParseError);
}

TEST(Synthesize, Example1PassiveIsFeasibleAndCertified) {
  const DataSet d = example1_dataset();
  const LiftedConstraint lc = passive_lift();
  const Certificate c = solve_or_die(d, lc, spec_for(Method::kCtPassive, kL1));
  EXPECT_EQ(c.K.rows(), 1);
  EXPECT_EQ(c.K.cols(), 2);
  EXPECT_FALSE(c.M.has_value());
  EXPECT_EQ(definiteness(c.P), Definiteness::kPD);
  EXPECT_TRUE(check_matrix_inequality(c, d, lc).pass);
  const CheckResult eq = check_equalities(c, d, lc);
  EXPECT_TRUE(eq.pass) << eq.details;
  EXPECT_LE(eq.residual, 1e-6 * std::max(1.0, d.scale()));
}

TEST(Synthesize, Example2ReturnsNecessaryFeedthrough) {
  const DataSet d = example2_dataset();
  const LiftedConstraint lc = passive_lift();
  const Certificate c = solve_or_die(d, lc, spec_for(Method::kNlfbCtPassive));
  ASSERT_TRUE(c.M.has_value());
  EXPECT_LT((*c.M)(0, 0), -9.0 / 8.0);
  EXPECT_TRUE(check_matrix_inequality(c, d, lc).pass);
  EXPECT_LE(check_equalities(c, d, lc).residual, 1e-6 * std::max(1.0, d.scale()));
  // P (L + B M) + H' = 0 on the true plant
  const PlantModel m = example2_plant();
  const Mat res = c.P.mat() * (m.L() + m.B() * *c.M) + m.H().transpose();
  EXPECT_LE(max_abs(res), 1e-6 * std::max(1.0, d.scale()));
}

TEST(Synthesize, Example3LinearOnlyHasNoFeedthrough) {
  const DataSet d = example1_dataset();
  const LiftedConstraint lc = passive_lift();
  const Certificate c = solve_or_die(d, lc, spec_for(Method::kNlfbLinearOnly));
  EXPECT_FALSE(c.M.has_value());
  EXPECT_LE(max_abs(d.U0 * c.raw.at("Y2")), 1e-6 * std::max(1.0, d.scale()));
  const ClosedLoopData cl = closed_loop_from_raw(c, d);
  EXPECT_LT(spectral_abscissa(cl.Acl), 0.0);
  const PlantModel m = example1_plant(2.0);
  EXPECT_LE(max_abs(c.P.mat() * m.L() + m.H().transpose()), 1e-6 * std::max(1.0, d.scale()));
}

TEST(ExtractGains, TrivialIdentity) {
  // X0 Y = I, U0 Y = 0
  DataSet d;
  d.X0 = Mat{{1, 0, 0}, {0, 1, 0}};
  d.U0 = Mat{{0, 0, 1}};
  d.X1 = Mat::Zero(2, 3);
  d.F0 = Mat::Zero(1, 3);
  const Mat y{{1, 0}, {0, 1}, {0, 0}};
  const Gains g = extract_gains({{"Y", y}}, d);
  EXPECT_TRUE(g.K.isZero());
  EXPECT_TRUE(g.P.mat().isApprox(Mat::Identity(2, 2)));
  EXPECT_FALSE(g.M.has_value());
}

TEST(ExtractGains, RejectsNonPositiveDefinite) {
  DataSet d;
  d.X0 = Mat{{1, 0, 0}, {0, 1, 0}};
  d.U0 = Mat{{0, 0, 1}};
  d.X1 = Mat::Zero(2, 3);
  d.F0 = Mat::Zero(1, 3);
  EXPECT_THROW(extract_gains({{"Y", Mat{{-1, 0}, {0, 1}, {0, 0}}}}, d), CertificateCorrupt);
  EXPECT_THROW(extract_gains({{"Y", Mat{{1, 1}, {0, 1}, {0, 0}}}}, d), CertificateCorrupt);
  EXPECT_THROW(extract_gains({{"Z", Mat::Zero(3, 2)}}, d), CertificateCorrupt);
}

TEST(ExtractGains, PublishedExample1Gain) {
  const Gains g = extract_gains({{"Y", reference::ex1_Y()}}, reference::ex1_dataset(), 1e-3);
  EXPECT_LE(max_abs(g.K - reference::ex1_K()), 1e-3) << "K = " << g.K;
}

TEST(ExtractGains, PublishedExample2Gains) {
  const DataSet d = example2_reference_dataset();
  Assignment raw{{"Y1", reference::ex2_Y1()}, {"Y2", reference::ex2_Y2()}};
  raw["W"] = d.X0 * raw.at("Y1");
  const Gains g = extract_gains(raw, d, 1e-2);
  ASSERT_TRUE(g.M.has_value());
  EXPECT_LE(max_abs(*g.M - reference::ex2_M()), 1e-2) << "M = " << *g.M;
  EXPECT_LE(max_abs(g.K - reference::ex2_K()), 1e-2) << "K = " << g.K;
  EXPECT_LE(max_abs(g.P.mat() - reference::ex2_P()), 1e-2) << "P = " << g.P.mat();
}

TEST(ExtractGains, ScaleInvariantOnSuiteCertificates) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> ud(0.01, 100.0);
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const SuiteInstance inst = make_dt_instance(seed);
    const SynthesisResult r = synthesize(inst.data, inst.lifted, spec_for(inst.method, inst.model.L()));
    ASSERT_EQ(r.status, SolveStatus::kFeasible) << "seed " << seed << ": " << r.stats.message;
    const Mat& y = r.certificate->raw.at("Y");
    const double c = ud(rng);
    const Gains a = extract_gains({{"Y", y}}, inst.data);
    const Gains b = extract_gains({{"Y", Mat(c * y)}}, inst.data);
    EXPECT_LE(max_abs(a.K - b.K), 1e-8 * std::max(1.0, max_abs(a.K))) << "seed " << seed;
    EXPECT_LE(max_abs(a.K - r.certificate->K), 1e-9 * std::max(1.0, max_abs(a.K)));
    ++checked;
  }
  EXPECT_EQ(checked, 100);
}

TEST(ClassifyCase, Families) {
  EXPECT_EQ(classify_case(lift(build_lipschitz(0.5, 2, 2), 2)), CaseFamily::kQpsd);
  EXPECT_EQ(classify_case(lift(build_rnn(Mat{{2.0, -0.5}, {-0.5, 2.0}}), 2)), CaseFamily::kQzero);
  EXPECT_EQ(classify_case(lift(build_convex_gradient(0.5, 2.0, 2), 2)), CaseFamily::kQnsd);
  EXPECT_EQ(classify_case(passive_lift()), CaseFamily::kPassive);
  const QuadConstraint indef = build_sector(Mat{{-1.0, 0.0}, {0.0, 1.0}}, Mat{{1.0, 0.0}, {0.0, 2.0}});
  EXPECT_EQ(classify_case(lift(indef, 2)), CaseFamily::kUnsupported);
}

TEST(Preconditions, Rejections) {
  const DataSet ct = example1_dataset();
  const SuiteInstance inst = make_dt_instance(3);
  const Mat L = inst.model.L();

  // time domain
  EXPECT_THROW(synthesize(ct, passive_lift(), spec_for(Method::kDtQpsd, kL1)), PreconditionError);
  EXPECT_THROW(synthesize(inst.data, inst.lifted, spec_for(Method::kCtQpsd, L)), PreconditionError);
  // indefinite Q
  const QuadConstraint indef = build_sector(Mat{{-1.0, 0.0}, {0.0, 1.0}}, Mat{{1.0, 0.0}, {0.0, 2.0}});
  DataSet two;
  two.X0 = Mat{{1, 0, 1, 2}, {0, 1, 1, -1}};
  two.X1 = two.X0;
  two.U0 = Mat{{1, 2, 0, 1}};
  two.F0 = Mat{{0.5, 0.1, 0.2, 0.3}, {0.1, 0.4, 0.3, 0.2}};
  EXPECT_THROW(synthesize(two, lift(indef, 2), spec_for(Method::kDtQpsd, Mat::Zero(2, 2))),
               UnsupportedCase);
  // Q class mismatch
  EXPECT_THROW(synthesize(two, lift(build_lipschitz(0.5, 2, 2), 2),
                          spec_for(Method::kDtQzero, Mat::Zero(2, 2))),
               PreconditionError);
  // missing L, decay on CT, bad rho
  EXPECT_THROW(synthesize(ct, passive_lift(), spec_for(Method::kCtPassive)), PreconditionError);
  SynthesisSpec s = spec_for(Method::kCtPassive, kL1);
  s.decay_rho = 0.9;
  EXPECT_THROW(synthesize(ct, passive_lift(), s), PreconditionError);
  SynthesisSpec r = spec_for(inst.method, L);
  r.decay_rho = 1.5;
  EXPECT_THROW(synthesize(inst.data, inst.lifted, r), InvalidInput);
  // wrong L shape
  EXPECT_THROW(synthesize(ct, passive_lift(), spec_for(Method::kCtPassive, Mat::Zero(3, 1))),
               DimensionMismatch);
  // passive constraint with a STRICT_R program
  EXPECT_THROW(synthesize(ct, passive_lift(), spec_for(Method::kCtQzero, kL1)), PreconditionError);
}

TEST(Preconditions, RankDeficientStateDataNamesTheMatrix) {
  DataSet d;
  d.X0 = Mat{{1, 2, 3, 4}, {2, 4, 6, 8}};
  d.X1 = Mat::Zero(2, 4);
  d.U0 = Mat{{1, 0, 1, 0}};
  d.F0 = Mat::Zero(2, 4);
  try {
    synthesize(d, lift(build_lipschitz(0.1, 2, 2), 2), spec_for(Method::kDtQpsd, Mat::Zero(2, 2)));
    FAIL() << "expected PreconditionError";
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("X0"), std::string::npos) << e.what();
  }
  try {
    synthesize(d, lift(build_lipschitz(0.1, 2, 2), 2), spec_for(Method::kNlfb));
    FAIL() << "expected PreconditionError";
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("Psi0"), std::string::npos) << e.what();
  }
}

TEST(Synthesize, RankDeficientInputStillFeasible) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SuiteInstance inst = make_duplicated_input_instance(seed);
    const AssumptionReport rep = check_assumptions(inst.data);
    EXPECT_FALSE(rep.full_W0);
    EXPECT_TRUE(rep.full_X0);
    EXPECT_EQ(row_rank(inst.data.U0), 1);
    const SynthesisResult r =
        synthesize(inst.data, inst.lifted, spec_for(inst.method, inst.model.L()));
    EXPECT_EQ(r.status, SolveStatus::kFeasible) << "seed " << seed << ": " << r.stats.message;
  }
}

TEST(Synthesize, SuiteCertificatesAreSound) {
  for (std::uint64_t seed = 0; seed < 24; ++seed) {
    const SuiteInstance inst = make_dt_instance(seed);
    const Certificate c = solve_or_die(inst.data, inst.lifted, spec_for(inst.method, inst.model.L()));
    const CheckResult mi = check_matrix_inequality(c, inst.data, inst.lifted);
    EXPECT_TRUE(mi.pass) << "seed " << seed << ": " << mi.details;
    EXPECT_LE(mi.residual, -c.eps / 2) << "seed " << seed;
    EXPECT_LE(check_equalities(c, inst.data, inst.lifted).residual,
              1e-6 * std::max(1.0, inst.data.scale()));
  }
}

TEST(Synthesize, NlfbDiscreteOnSuite) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const SuiteInstance inst = make_dt_instance(seed);
    if (!check_assumptions(inst.data).full_Psi0) continue;
    const SynthesisResult r = synthesize(inst.data, inst.lifted, spec_for(Method::kNlfb));
    ASSERT_EQ(r.status, SolveStatus::kFeasible) << "seed " << seed << ": " << r.stats.message;
    const Certificate& c = *r.certificate;
    ASSERT_TRUE(c.M.has_value());
    const CheckResult mi = check_matrix_inequality(c, inst.data, inst.lifted);
    EXPECT_TRUE(mi.pass) << "seed " << seed << ": " << mi.residual << " " << mi.details;
    EXPECT_TRUE(check_equalities(c, inst.data, inst.lifted).pass) << "seed " << seed;
  }
}

TEST(Synthesize, DecayVariantAndBisection) {
  const SuiteInstance inst = make_dt_instance(0);
  SynthesisSpec s = spec_for(inst.method, inst.model.L());
  s.decay_rho = 0.9;
  const SynthesisResult r = synthesize(inst.data, inst.lifted, s);
  ASSERT_EQ(r.status, SolveStatus::kFeasible) << r.stats.message;
  EXPECT_EQ(r.certificate->decay_rho, 0.9);
  const auto best = bisect_decay(inst.data, inst.lifted, spec_for(inst.method, inst.model.L()));
  ASSERT_TRUE(best.has_value());
  ASSERT_TRUE(best->decay_rho.has_value());
  EXPECT_GT(*best->decay_rho, 0.0);
  EXPECT_LT(*best->decay_rho, 1.0);
}

TEST(Synthesize, Deterministic) {
  const SuiteInstance inst = make_dt_instance(5);
  const auto a = synthesize(inst.data, inst.lifted, spec_for(inst.method, inst.model.L()));
  const auto b = synthesize(inst.data, inst.lifted, spec_for(inst.method, inst.model.L()));
  ASSERT_EQ(a.status, SolveStatus::kFeasible);
  EXPECT_EQ(a.certificate->raw.at("Y"), b.certificate->raw.at("Y"));
}

TEST(EffectiveEps, ScalesWithData) {
  DataSet d;
  d.X0 = Mat::Constant(1, 2, 50.0);
  d.X1 = d.X0;
  d.U0 = Mat::Zero(1, 2);
  d.F0 = Mat::Zero(1, 2);
  SynthesisSpec s;
  EXPECT_DOUBLE_EQ(effective_eps(d, s), 50.0 * 1e-7);
  d.X0 = Mat::Constant(1, 2, 0.5);
  d.X1 = d.X0;
  EXPECT_DOUBLE_EQ(effective_eps(d, s), 1e-7);
}
