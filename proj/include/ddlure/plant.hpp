#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ddlure/integrator.hpp"
#include "ddlure/matcore.hpp"

namespace ddlure {

enum class TimeDomain { kDiscrete, kContinuous };

std::string_view to_string(TimeDomain d);
TimeDomain time_domain_from_string(std::string_view s);

using Nonlinearity = std::function<Vec(double t, const Vec& z)>;

// Catalog entry, the serializable form of a nonlinearity.
struct NonlinearitySpec {
  std::string name;
  std::vector<double> params;
};

// Catalog:
//   zero                    f = 0
//   surge_phi               z^3/2 + 3 z^2/2 + 9 z/8, elementwise
//   tanh [g]                g tanh(z)
//   cubic [g]               g z^3
//   sin [g]                 g sin(z)
//   linear [g]              g z
//   sector_mid [k] | [a,k]  a z + (k - a)(z + tanh z)/2, inside sector [a, k]
// Missing gains default to 1 (a defaults to 0). All but `zero` act
// elementwise and need p = q.
Nonlinearity make_nonlinearity(const NonlinearitySpec& spec, Index p, Index q);

class PlantModel {
 public:
  PlantModel(Mat a, Mat b, Mat l, Mat h, Nonlinearity f, TimeDomain domain);
  PlantModel(Mat a, Mat b, Mat l, Mat h, const NonlinearitySpec& spec,
             TimeDomain domain);

  const Mat& A() const { return a_; }
  const Mat& B() const { return b_; }
  const Mat& L() const { return l_; }
  const Mat& H() const { return h_; }
  TimeDomain time_domain() const { return domain_; }
  const std::optional<NonlinearitySpec>& spec() const { return spec_; }

  Index n() const { return a_.rows(); }
  Index m() const { return b_.cols(); }
  Index q() const { return l_.cols(); }
  Index p() const { return h_.rows(); }

  Vec f(double t, const Vec& z) const;
  // A x + B u + L f(t, H x)
  Vec step(double t, const Vec& x, const Vec& u) const;

  // Same plant with a different nonlinearity injection matrix.
  PlantModel with_L(const Mat& l) const;

 private:
  Mat a_, b_, l_, h_;
  Nonlinearity f_;
  TimeDomain domain_;
  std::optional<NonlinearitySpec> spec_;
};

// For DISCRETE trajectories states/times have one more entry than
// inputs/nonlinearity_outputs (the last state has no successor step).
struct Trajectory {
  TimeDomain time_domain = TimeDomain::kDiscrete;
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<Vec> inputs;
  std::vector<Vec> nonlinearity_outputs;
  std::vector<Vec> derivatives;  // CONTINUOUS only
};

struct DataSet {
  Mat U0, X0, X1, F0;
  TimeDomain time_domain = TimeDomain::kDiscrete;
  std::vector<double> sample_times;

  Index T() const { return X0.cols(); }
  Index n() const { return X0.rows(); }
  Index m() const { return U0.rows(); }
  Index q() const { return F0.rows(); }
  // max |entry| over all four matrices, at least 1
  double scale() const;

  void validate() const;
};

// Input as a function of time and state; open-loop laws ignore x.
using InputLaw = std::function<Vec(double t, const Vec& x)>;

Trajectory simulate_discrete(const PlantModel& model, const Vec& x0,
                             const std::vector<Vec>& inputs);
// Closed-loop variant, `steps` transitions.
Trajectory simulate_discrete(const PlantModel& model, const Vec& x0,
                             const InputLaw& u, std::size_t steps);

struct ContinuousOptions {
  OdeOptions ode = OdeOptions::precise();
  // Empty: record every integrator step. Otherwise the output grid, which
  // must start at t0 and end at tf.
  std::vector<double> output_times;
};

Trajectory simulate_continuous(const PlantModel& model, const Vec& x0,
                               const InputLaw& u, double t0, double tf,
                               const ContinuousOptions& opts = {});

// DISCRETE: columns 0..T-1 of states/inputs/f, X1 the successor states.
// CONTINUOUS: everything taken at the given trajectory indices, X1 the
// recorded derivatives.
DataSet collect_dataset(const Trajectory& traj,
                        const std::vector<std::size_t>& indices);
// CONTINUOUS convenience: indices looked up by time.
DataSet collect_dataset_at(const Trajectory& traj,
                           const std::vector<double>& times);

struct AssumptionReport {
  int rank_W0 = 0;
  bool full_W0 = false;
  int rank_Psi0 = 0;
  bool full_Psi0 = false;
  int rank_X0 = 0;
  bool full_X0 = false;
};

AssumptionReport check_assumptions(const DataSet& data);

// t_k = t0 + k (tf - t0)/(T - 1), endpoints included; T = 1 gives {t0}.
std::vector<double> linspace(double t0, double tf, std::size_t T);

}  // namespace ddlure
