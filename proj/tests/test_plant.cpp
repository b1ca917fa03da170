#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ddlure/errors.hpp"
#include "ddlure/integrator.hpp"
#include "ddlure/plant.hpp"
#include "ddlure/scenarios.hpp"

using namespace ddlure;

namespace {

PlantModel zero_plant(Index n, TimeDomain d) {
  return PlantModel(Mat::Zero(n, n), Mat::Zero(n, 1), Mat::Zero(n, 1),
                    Mat::Zero(1, n), NonlinearitySpec{"zero", {}}, d);
}

std::vector<Vec> zeros(std::size_t T, Index m) {
  return std::vector<Vec>(T, Vec::Zero(m));
}

}  // namespace

TEST(Integrator, ExponentialDecay) {
  const OdeRhs rhs = [](double, const Vec& y) { return Vec(-y); };
  const OdeSolution s = integrate_dp45(rhs, {0.0, 0.5, 1.0, 2.0}, Vec::Ones(1));
  ASSERT_EQ(s.t.size(), 4u);
  for (std::size_t i = 0; i < s.t.size(); ++i) {
    EXPECT_NEAR(s.y[i](0), std::exp(-s.t[i]), 1e-9);
  }
}

TEST(Integrator, HarmonicOscillatorKeepsPhase) {
  const OdeRhs rhs = [](double, const Vec& y) { return Vec{{y(1), -y(0)}}; };
  const OdeSolution s =
      integrate_dp45(rhs, {0.0, 2.0 * M_PI}, Vec{{1.0, 0.0}}, OdeOptions::precise(1e-12));
  EXPECT_NEAR(s.y.back()(0), 1.0, 1e-9);
  EXPECT_NEAR(s.y.back()(1), 0.0, 1e-9);
  EXPECT_GT(s.t.size(), 10u);  // every accepted step recorded
}

TEST(Integrator, FiniteTimeBlowUpIsReported) {
  const OdeRhs rhs = [](double, const Vec& y) { return Vec(y.array().square()); };
  try {
    integrate_dp45(rhs, {0.0, 2.0}, Vec::Ones(1));
    FAIL() << "expected IntegrationError";
  } catch (const IntegrationError& e) {
    EXPECT_GT(e.time(), 0.9);
    EXPECT_LT(e.time(), 1.01);
  }
}

TEST(Integrator, RejectsBadSpans) {
  const OdeRhs rhs = [](double, const Vec& y) { return y; };
  EXPECT_THROW(integrate_dp45(rhs, {0.0}, Vec::Ones(1)), InvalidInput);
  EXPECT_THROW(integrate_dp45(rhs, {1.0, 0.0}, Vec::Ones(1)), InvalidInput);
}

TEST(Nonlinearity, Catalog) {
  const Nonlinearity phi = make_nonlinearity({"surge_phi", {}}, 1, 1);
  EXPECT_DOUBLE_EQ(phi(0.0, Vec::Constant(1, 2.0))(0), 12.25);
  EXPECT_DOUBLE_EQ(phi(0.0, Vec::Zero(1))(0), 0.0);
  const Nonlinearity th = make_nonlinearity({"tanh", {2.0}}, 2, 2);
  EXPECT_NEAR(th(0.0, Vec{{1.0, -1.0}})(1), -2.0 * std::tanh(1.0), 1e-15);
  EXPECT_THROW(make_nonlinearity({"nope", {}}, 1, 1), ParseError);
  EXPECT_THROW(make_nonlinearity({"tanh", {}}, 2, 1), DimensionMismatch);
}

TEST(PlantModel, RequiresVanishingNonlinearity) {
  const Nonlinearity bad = [](double, const Vec& z) { return Vec(z.array() + 1.0); };
  EXPECT_THROW(PlantModel(Mat::Zero(1, 1), Mat::Zero(1, 1), Mat::Zero(1, 1),
                          Mat::Identity(1, 1), bad, TimeDomain::kDiscrete),
               InvalidInput);
  EXPECT_THROW(PlantModel(Mat::Zero(2, 2), Mat::Zero(3, 1), Mat::Zero(2, 1),
                          Mat::Identity(1, 2), NonlinearitySpec{"zero", {}},
                          TimeDomain::kDiscrete),
               DimensionMismatch);
}

TEST(SimulateDiscrete, Nilpotent) {
  const PlantModel m = zero_plant(2, TimeDomain::kDiscrete);
  const Trajectory tr = simulate_discrete(m, Vec{{1.0, 0.0}}, zeros(3, 1));
  ASSERT_EQ(tr.states.size(), 4u);
  EXPECT_EQ(tr.states[0], Vec(Vec{{1.0, 0.0}}));
  for (std::size_t k = 1; k < 4; ++k) EXPECT_TRUE(tr.states[k].isZero());
}

TEST(SimulateDiscrete, IdentityIsConstant) {
  const PlantModel m(Mat::Identity(2, 2), Mat::Identity(2, 2), Mat::Zero(2, 1),
                     Mat::Zero(1, 2), NonlinearitySpec{"zero", {}}, TimeDomain::kDiscrete);
  const Vec x0{{0.3, -0.7}};
  const Trajectory tr = simulate_discrete(m, x0, zeros(10, 2));
  for (const auto& x : tr.states) EXPECT_EQ(x, x0);
}

TEST(SimulateDiscrete, SchurPlantDecaysAndMatchesRecursion) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> nd;
  Mat a = Mat::NullaryExpr(3, 3, [&] { return nd(rng); });
  a *= 0.6 / spectral_radius(a);
  const Mat l = 0.1 * Mat::NullaryExpr(3, 1, [&] { return nd(rng); });
  const Mat h = Mat::NullaryExpr(1, 3, [&] { return nd(rng); });
  const PlantModel m(a, Mat::Zero(3, 1), l, h, NonlinearitySpec{"tanh", {0.5}},
                     TimeDomain::kDiscrete);
  const Vec x0{{1.0, -2.0, 0.5}};
  const Trajectory tr = simulate_discrete(m, x0, zeros(50, 1));
  // independent step-by-step recursion
  Vec x = x0;
  for (int k = 0; k < 50; ++k) {
    const double z = (h * x)(0);
    x = a * x + l * (0.5 * std::tanh(z));
    ASSERT_LE((tr.states[k + 1] - x).norm(), 1e-12 * std::max(1.0, x.norm()));
  }
  EXPECT_LT(tr.states[50].norm(), x0.norm());
}

TEST(SimulateDiscrete, DivergenceReportsStep) {
  const PlantModel m(Mat::Constant(1, 1, 1e200), Mat::Zero(1, 1), Mat::Zero(1, 1),
                     Mat::Zero(1, 1), NonlinearitySpec{"zero", {}}, TimeDomain::kDiscrete);
  try {
    simulate_discrete(m, Vec::Ones(1), zeros(5, 1));
    FAIL() << "expected OverflowError";
  } catch (const OverflowError& e) {
    EXPECT_EQ(e.step(), 2u);
  }
}

TEST(SimulateDiscrete, DomainMismatch) {
  EXPECT_THROW(simulate_discrete(zero_plant(1, TimeDomain::kContinuous), Vec::Ones(1),
                                 zeros(2, 1)),
               PreconditionError);
}

TEST(SimulateContinuous, ZeroDynamicsIsConstant) {
  const PlantModel m = zero_plant(2, TimeDomain::kContinuous);
  ContinuousOptions o;
  o.output_times = linspace(0.0, 1.0, 5);
  const Trajectory tr = simulate_continuous(
      m, example_x0(), [](double, const Vec&) { return Vec::Zero(1); }, 0.0, 1.0, o);
  for (const auto& x : tr.states) EXPECT_EQ(x, example_x0());
}

TEST(SimulateContinuous, ExampleDerivativeAtStart) {
  const PlantModel m = example1_plant(2.0);
  ContinuousOptions o;
  o.output_times = linspace(0.0, 1.0, 5);
  const Trajectory tr = simulate_continuous(
      m, example_x0(), [](double t, const Vec&) { return Vec::Constant(1, std::sin(t)); },
      0.0, 1.0, o);
  EXPECT_NEAR(tr.derivatives[0](0), -21.25, 1e-12);
  EXPECT_NEAR(tr.derivatives[0](1), -29.4, 1e-12);
  EXPECT_NEAR(tr.nonlinearity_outputs[0](0), 12.25, 1e-12);
  EXPECT_THROW(simulate_continuous(m, example_x0(),
                                   [](double, const Vec&) { return Vec::Zero(1); },
                                   1.0, 1.0),
               InvalidInput);
}

TEST(SimulateContinuous, OpenLoopBlowUpIsAnIntegrationError) {
  const PlantModel m(Mat::Zero(1, 1), Mat::Zero(1, 1), Mat::Identity(1, 1),
                     Mat::Identity(1, 1), NonlinearitySpec{"cubic", {}},
                     TimeDomain::kContinuous);
  EXPECT_THROW(simulate_continuous(m, Vec::Constant(1, 2.0),
                                   [](double, const Vec&) { return Vec::Zero(1); },
                                   0.0, 10.0),
               IntegrationError);
}

TEST(Collect, Example1Data) {
  const DataSet d = example1_dataset();
  EXPECT_EQ(d.T(), 5);
  EXPECT_EQ(d.time_domain, TimeDomain::kContinuous);
  EXPECT_LE((d.U0 - reference::ex1_U0()).cwiseAbs().maxCoeff(), 1e-3);
  EXPECT_NEAR(d.X0(0, 0), 2.0, 1e-15);
  EXPECT_NEAR(d.X0(1, 0), -1.0, 1e-15);
  EXPECT_NEAR(d.F0(0, 0), 12.25, 1e-12);
  for (Index k = 0; k < 5; ++k) EXPECT_NEAR(d.U0(0, k), std::sin(k / 4.0), 1e-15);
}

TEST(Collect, OneStepNilpotent) {
  const PlantModel m = zero_plant(2, TimeDomain::kDiscrete);
  const Trajectory tr = simulate_discrete(m, Vec{{1.0, 0.0}}, zeros(1, 1));
  const DataSet d = collect_dataset(tr, {0});
  EXPECT_EQ(d.T(), 1);
  EXPECT_TRUE(d.X1.isZero());
  EXPECT_THROW(collect_dataset(tr, {1}), InvalidInput);
  EXPECT_THROW(collect_dataset(tr, {}), InvalidInput);
}

TEST(Collect, DiscreteConsistency) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SuiteInstance inst = make_dt_instance(seed);
    const DataSet& d = inst.data;
    const Mat pred = inst.model.A() * d.X0 + inst.model.B() * d.U0 + inst.model.L() * d.F0;
    EXPECT_LE((pred - d.X1).cwiseAbs().maxCoeff(), 1e-12 * d.scale()) << "seed " << seed;
  }
}

TEST(Collect, ContinuousConsistency) {
  const PlantModel m = example2_plant();
  const DataSet d = example2_dataset();
  for (Index k = 0; k < d.T(); ++k) {
    const Vec x = d.X0.col(k);
    const Vec rhs = m.step(d.sample_times[k], x, d.U0.col(k));
    EXPECT_LE((rhs - d.X1.col(k)).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE((m.f(0.0, m.H() * x) - d.F0.col(k)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Collect, IntegratorToleranceConvergence) {
  auto run = [](double tol) {
    ContinuousOptions o;
    o.ode = OdeOptions::precise(tol);
    o.output_times = linspace(0.0, 1.0, 5);
    const Trajectory tr = simulate_continuous(
        example1_plant(2.0), example_x0(),
        [](double t, const Vec&) { return Vec::Constant(1, std::sin(t)); }, 0.0, 1.0, o);
    return collect_dataset_at(tr, o.output_times);
  };
  const DataSet a = run(1e-10);
  const DataSet b = run(1e-12);
  EXPECT_LE((a.X0 - b.X0).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LE((a.X1 - b.X1).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LE((a.F0 - b.F0).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Assumptions, Examples) {
  EXPECT_TRUE(check_assumptions(example1_dataset()).full_W0);
  const AssumptionReport r2 = check_assumptions(example2_dataset());
  EXPECT_TRUE(r2.full_Psi0);
  EXPECT_EQ(r2.rank_Psi0, 4);
}

TEST(Assumptions, ZeroInputs) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  DataSet d;
  d.X0 = Mat::NullaryExpr(3, 6, [&] { return nd(rng); });
  d.X1 = d.X0;
  d.U0 = Mat::Zero(2, 6);
  d.F0 = Mat::Zero(1, 6);
  const AssumptionReport r = check_assumptions(d);
  EXPECT_FALSE(r.full_W0);
  EXPECT_EQ(r.rank_W0, 3);
  EXPECT_TRUE(r.full_X0);
}

TEST(DataSet, Validation) {
  DataSet d;
  d.U0 = Mat::Zero(1, 3);
  d.X0 = Mat::Zero(2, 3);
  d.X1 = Mat::Zero(2, 2);
  d.F0 = Mat::Zero(1, 3);
  EXPECT_THROW(d.validate(), DimensionMismatch);
  d.X1 = Mat::Zero(2, 3);
  EXPECT_NO_THROW(d.validate());
  d.time_domain = TimeDomain::kContinuous;
  EXPECT_THROW(d.validate(), InvalidInput);
}

TEST(Linspace, Endpoints) {
  const auto t = linspace(0.0, 1.0, 5);
  ASSERT_EQ(t.size(), 5u);
  EXPECT_EQ(t[0], 0.0);
  EXPECT_EQ(t[1], 0.25);
  EXPECT_EQ(t[4], 1.0);
  EXPECT_EQ(linspace(2.0, 3.0, 1), std::vector<double>{2.0});
}
