#include "ddlure/plant.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ddlure/errors.hpp"

namespace ddlure {

namespace {

std::string dims(const Mat& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

double param(const NonlinearitySpec& s, std::size_t i, double dflt) {
  return i < s.params.size() ? s.params[i] : dflt;
}

template <typename F>
Nonlinearity elementwise(F fn) {
  return [fn](double, const Vec& z) -> Vec { return z.unaryExpr(fn); };
}

}  // namespace

std::string_view to_string(TimeDomain d) {
  return d == TimeDomain::kDiscrete ? "discrete" : "continuous";
}

TimeDomain time_domain_from_string(std::string_view s) {
  if (s == "discrete") return TimeDomain::kDiscrete;
  if (s == "continuous") return TimeDomain::kContinuous;
  throw ParseError("unknown time domain '" + std::string(s) + "'");
}

Nonlinearity make_nonlinearity(const NonlinearitySpec& spec, Index p,
                               Index q) {
  for (double v : spec.params) {
    if (!std::isfinite(v)) throw InvalidInput("nonlinearity: non-finite parameter");
  }
  if (spec.name == "zero") {
    return [q](double, const Vec&) -> Vec { return Vec::Zero(q); };
  }
  if (p != q) {
    throw DimensionMismatch("nonlinearity '" + spec.name +
                            "' is elementwise and needs p = q");
  }
  const double g = param(spec, 0, 1.0);
  if (spec.name == "surge_phi") {
    return elementwise(
        [](double z) { return 0.5 * z * z * z + 1.5 * z * z + 1.125 * z; });
  }
  if (spec.name == "tanh") {
    return elementwise([g](double z) { return g * std::tanh(z); });
  }
  if (spec.name == "cubic") {
    return elementwise([g](double z) { return g * z * z * z; });
  }
  if (spec.name == "sin") {
    return elementwise([g](double z) { return g * std::sin(z); });
  }
  if (spec.name == "linear") {
    return elementwise([g](double z) { return g * z; });
  }
  if (spec.name == "sector_mid") {
    double a = 0.0;
    double k = g;
    if (spec.params.size() >= 2) {
      a = spec.params[0];
      k = spec.params[1];
    }
    if (!(k > a)) throw InvalidInput("sector_mid: needs a < k");
    return elementwise([a, k](double z) {
      return a * z + 0.5 * (k - a) * (z + std::tanh(z));
    });
  }
  throw ParseError("unknown nonlinearity '" + spec.name + "'");
}

PlantModel::PlantModel(Mat a, Mat b, Mat l, Mat h, Nonlinearity f,
                       TimeDomain domain)
    : a_(std::move(a)),
      b_(std::move(b)),
      l_(std::move(l)),
      h_(std::move(h)),
      f_(std::move(f)),
      domain_(domain) {
  const Index n = a_.rows();
  if (n < 1 || a_.cols() != n) {
    throw DimensionMismatch("PlantModel: A must be square, got " + dims(a_));
  }
  if (b_.rows() != n || b_.cols() < 1) {
    throw DimensionMismatch("PlantModel: B is " + dims(b_));
  }
  if (l_.rows() != n || l_.cols() < 1) {
    throw DimensionMismatch("PlantModel: L is " + dims(l_));
  }
  if (h_.cols() != n || h_.rows() < 1) {
    throw DimensionMismatch("PlantModel: H is " + dims(h_));
  }
  require_finite(a_, "PlantModel A");
  require_finite(b_, "PlantModel B");
  require_finite(l_, "PlantModel L");
  require_finite(h_, "PlantModel H");
  if (!f_) throw InvalidInput("PlantModel: missing nonlinearity");
  for (double t : {0.0, 1.0, 2.5}) {
    const Vec v = f_(t, Vec::Zero(h_.rows()));
    if (v.size() != l_.cols()) {
      throw DimensionMismatch("PlantModel: f returns " +
                              std::to_string(v.size()) + " entries, L has " +
                              std::to_string(l_.cols()) + " columns");
    }
    if (!v.allFinite() || v.lpNorm<Eigen::Infinity>() > 1e-12) {
      throw InvalidInput("PlantModel: f(t, 0) must vanish");
    }
  }
}

PlantModel::PlantModel(Mat a, Mat b, Mat l, Mat h, const NonlinearitySpec& spec,
                       TimeDomain domain)
    : PlantModel(a, b, l, h, make_nonlinearity(spec, h.rows(), l.cols()),
                 domain) {
  spec_ = spec;
}

Vec PlantModel::f(double t, const Vec& z) const { return f_(t, z); }

Vec PlantModel::step(double t, const Vec& x, const Vec& u) const {
  return a_ * x + b_ * u + l_ * f_(t, h_ * x);
}

PlantModel PlantModel::with_L(const Mat& l) const {
  PlantModel out = *this;
  if (l.rows() != n() || l.cols() != q()) {
    throw DimensionMismatch("with_L: L is " + dims(l) + ", expected " +
                            dims(l_));
  }
  require_finite(l, "with_L");
  out.l_ = l;
  return out;
}

double DataSet::scale() const {
  double s = 1.0;
  for (const Mat* m : {&U0, &X0, &X1, &F0}) {
    if (m->size() > 0) s = std::max(s, m->cwiseAbs().maxCoeff());
  }
  return s;
}

void DataSet::validate() const {
  const Index t = X0.cols();
  if (t < 1) throw DimensionMismatch("DataSet: needs T >= 1 samples");
  if (U0.cols() != t || X1.cols() != t || F0.cols() != t) {
    std::ostringstream os;
    os << "DataSet: column counts differ (U0 " << U0.cols() << ", X0 " << t
       << ", X1 " << X1.cols() << ", F0 " << F0.cols() << ")";
    throw DimensionMismatch(os.str());
  }
  if (X1.rows() != X0.rows() || X0.rows() < 1 || U0.rows() < 1 ||
      F0.rows() < 1) {
    throw DimensionMismatch("DataSet: inconsistent row counts");
  }
  require_finite(U0, "U0");
  require_finite(X0, "X0");
  require_finite(X1, "X1");
  require_finite(F0, "F0");
  if (time_domain == TimeDomain::kContinuous &&
      static_cast<Index>(sample_times.size()) != t) {
    throw InvalidInput("DataSet: continuous data needs T sample times");
  }
  if (!sample_times.empty() && static_cast<Index>(sample_times.size()) != t) {
    throw InvalidInput("DataSet: sample_times length differs from T");
  }
}

Trajectory simulate_discrete(const PlantModel& model, const Vec& x0,
                             const InputLaw& u, std::size_t steps) {
  if (model.time_domain() != TimeDomain::kDiscrete) {
    throw PreconditionError("simulate_discrete: model is continuous-time");
  }
  if (x0.size() != model.n()) {
    throw DimensionMismatch("simulate_discrete: x0 has wrong size");
  }
  require_finite(x0, "x0");
  Trajectory tr;
  tr.time_domain = TimeDomain::kDiscrete;
  tr.times.push_back(0.0);
  tr.states.push_back(x0);
  Vec x = x0;
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k);
    const Vec uk = u(t, x);
    if (uk.size() != model.m()) {
      throw DimensionMismatch("simulate_discrete: input " + std::to_string(k) +
                              " has wrong size");
    }
    const Vec fk = model.f(t, model.H() * x);
    x = model.A() * x + model.B() * uk + model.L() * fk;
    tr.inputs.push_back(uk);
    tr.nonlinearity_outputs.push_back(fk);
    if (!x.allFinite()) {
      throw OverflowError("simulate_discrete: state diverged at step " +
                              std::to_string(k + 1),
                          k + 1);
    }
    tr.times.push_back(t + 1.0);
    tr.states.push_back(x);
  }
  return tr;
}

Trajectory simulate_discrete(const PlantModel& model, const Vec& x0,
                             const std::vector<Vec>& inputs) {
  return simulate_discrete(
      model, x0,
      [&inputs](double t, const Vec&) {
        return inputs[static_cast<std::size_t>(t)];
      },
      inputs.size());
}

Trajectory simulate_continuous(const PlantModel& model, const Vec& x0,
                               const InputLaw& u, double t0, double tf,
                               const ContinuousOptions& opts) {
  if (model.time_domain() != TimeDomain::kContinuous) {
    throw PreconditionError("simulate_continuous: model is discrete-time");
  }
  if (!(tf > t0)) throw InvalidInput("simulate_continuous: needs tf > t0");
  if (x0.size() != model.n()) {
    throw DimensionMismatch("simulate_continuous: x0 has wrong size");
  }
  require_finite(x0, "x0");

  std::vector<double> tspan = opts.output_times;
  if (tspan.empty()) {
    tspan = {t0, tf};
  } else if (tspan.size() < 2 || tspan.front() != t0 || tspan.back() != tf) {
    throw InvalidInput(
        "simulate_continuous: output grid must start at t0 and end at tf");
  }
  const OdeRhs rhs = [&model, &u](double t, const Vec& x) {
    return model.step(t, x, u(t, x));
  };
  const OdeSolution sol = integrate_dp45(rhs, tspan, x0, opts.ode);

  Trajectory tr;
  tr.time_domain = TimeDomain::kContinuous;
  tr.times = sol.t;
  tr.states = sol.y;
  for (std::size_t i = 0; i < sol.t.size(); ++i) {
    const double t = sol.t[i];
    const Vec& x = sol.y[i];
    const Vec ui = u(t, x);
    const Vec fi = model.f(t, model.H() * x);
    tr.inputs.push_back(ui);
    tr.nonlinearity_outputs.push_back(fi);
    tr.derivatives.push_back(model.A() * x + model.B() * ui + model.L() * fi);
  }
  return tr;
}

namespace {

Mat stack_columns(const std::vector<Vec>& cols,
                  const std::vector<std::size_t>& idx, std::size_t offset) {
  Mat out(cols.at(idx.front() + offset).size(), idx.size());
  for (std::size_t j = 0; j < idx.size(); ++j) {
    out.col(j) = cols.at(idx[j] + offset);
  }
  return out;
}

}  // namespace

DataSet collect_dataset(const Trajectory& traj,
                        const std::vector<std::size_t>& indices) {
  if (indices.empty()) throw InvalidInput("collect_dataset: T must be >= 1");
  const bool discrete = traj.time_domain == TimeDomain::kDiscrete;
  const std::size_t limit = discrete ? traj.inputs.size() : traj.states.size();
  for (std::size_t k : indices) {
    if (k >= limit) {
      throw InvalidInput("collect_dataset: sample index " + std::to_string(k) +
                         " outside trajectory (" + std::to_string(limit) +
                         " usable samples)");
    }
  }
  if (!discrete && traj.derivatives.size() != traj.states.size()) {
    throw InvalidInput("collect_dataset: continuous trajectory lacks derivatives");
  }
  DataSet d;
  d.time_domain = traj.time_domain;
  d.U0 = stack_columns(traj.inputs, indices, 0);
  d.X0 = stack_columns(traj.states, indices, 0);
  d.F0 = stack_columns(traj.nonlinearity_outputs, indices, 0);
  d.X1 = discrete ? stack_columns(traj.states, indices, 1)
                  : stack_columns(traj.derivatives, indices, 0);
  for (std::size_t k : indices) d.sample_times.push_back(traj.times[k]);
  d.validate();
  return d;
}

DataSet collect_dataset_at(const Trajectory& traj,
                           const std::vector<double>& times) {
  std::vector<std::size_t> idx;
  for (double t : times) {
    const auto it = std::find_if(
        traj.times.begin(), traj.times.end(), [t](double s) {
          return std::abs(s - t) <= 1e-12 * std::max(1.0, std::abs(t));
        });
    if (it == traj.times.end()) {
      std::ostringstream os;
      os << "collect_dataset: no trajectory sample at t = " << t;
      throw InvalidInput(os.str());
    }
    idx.push_back(static_cast<std::size_t>(it - traj.times.begin()));
  }
  return collect_dataset(traj, idx);
}

AssumptionReport check_assumptions(const DataSet& data) {
  data.validate();
  AssumptionReport r;
  Mat w0(data.m() + data.n(), data.T());
  w0 << data.U0, data.X0;
  Mat psi0(data.n() + data.q() + data.m(), data.T());
  psi0 << data.X0, data.F0, data.U0;
  r.rank_W0 = row_rank(w0);
  r.full_W0 = r.rank_W0 == w0.rows();
  r.rank_Psi0 = row_rank(psi0);
  r.full_Psi0 = r.rank_Psi0 == psi0.rows();
  r.rank_X0 = row_rank(data.X0);
  r.full_X0 = r.rank_X0 == data.X0.rows();
  return r;
}

std::vector<double> linspace(double t0, double tf, std::size_t T) {
  if (T == 0) throw InvalidInput("linspace: T must be >= 1");
  std::vector<double> out(T);
  if (T == 1) {
    out[0] = t0;
    return out;
  }
  for (std::size_t k = 0; k < T; ++k) {
    out[k] = t0 + (tf - t0) * static_cast<double>(k) / static_cast<double>(T - 1);
  }
  out.back() = tf;
  return out;
}

}  // namespace ddlure
