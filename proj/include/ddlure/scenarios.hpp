#pragma once

#include <cstdint>
#include <string>

#include "ddlure/constraints.hpp"
#include "ddlure/plant.hpp"
#include "ddlure/synth.hpp"

namespace ddlure {

// Second-order surge-type plant used by the worked examples:
//   A = [9/8 -1; 0 0], B = [0; 1], H = [1 0], f = z^3/2 + 3 z^2/2 + 9 z/8.
PlantModel example_plant(const Mat& L);
// L = alpha [-1; -1.2]
PlantModel example1_plant(double alpha = 1.0);
// L = [-1; 0]
PlantModel example2_plant();

Vec example_x0();  // [2, -1]

// Five samples at t_k = k/4 with u = sin t. The state samples come from the
// alpha = 1 plant integrated with the coarse ode45 profile, X1 is recorded
// with L = [-2; -2.4]; this reproduces the published data to every digit.
DataSet example1_dataset();
// Literal reading: alpha = 2 plant, precise integration, X1 = derivatives.
DataSet example1_dataset_alpha2();
// Ten samples on [0, 1] from the L = [-1; 0] plant, precise integration.
DataSet example2_dataset();
// Closest reconstruction of the data behind the published Example 2
// decision variables (alpha = 1 plant, coarse profile, X1 recorded with
// L = [-2; 0]).
DataSet example2_reference_dataset();

QuadConstraint example_passive_constraint();  // H = [1 0]

// Published reference values, four or five printed digits.
namespace reference {
Mat ex1_U0();
Mat ex1_X0();
Mat ex1_X1();
Mat ex1_F0();
// The four published matrices as a continuous-time data set, t_k = k/4.
DataSet ex1_dataset();
Mat ex1_Y();
Mat ex1_K();
Mat ex1_lyap();
Mat ex2_Y1();
Mat ex2_Y2();
Mat ex2_K();
Mat ex2_M();
Mat ex2_P();
Mat ex2_lyap();
Mat ex3_K();
Mat ex3_P();
}  // namespace reference

// Seeded random discrete-time instance that is stabilizable by design: a
// known gain K0 gives a closed loop with spectral radius 0.5, and the
// nonlinearity gain is half the inverse peak gain from v to z.
struct SuiteInstance {
  std::uint64_t seed = 0;
  PlantModel model;
  QuadConstraint constraint;
  LiftedConstraint lifted;
  DataSet data;
  Method method = Method::kDtQpsd;
  std::string family;  // "lipschitz", "sector", "sector-nsd"
};

SuiteInstance make_dt_instance(std::uint64_t seed);

// Two identical input channels: U0 has rank one while X0 is full rank.
SuiteInstance make_duplicated_input_instance(std::uint64_t seed);

// max over a 720-point grid of |H (e^{jw} I - A)^{-1} L|_2
double peak_gain(const Mat& A, const Mat& L, const Mat& H);

}  // namespace ddlure
