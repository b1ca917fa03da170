#pragma once

#include <functional>
#include <vector>

#include "ddlure/matcore.hpp"

namespace ddlure {

using OdeRhs = std::function<Vec(double t, const Vec& y)>;

// Dormand-Prince 5(4) with the step-size controller and dense output of
// MATLAB's ode45. The error estimate is measured as
//   |e_i| / max(|y_i|, |ynew_i|, atol / rtol) <= rtol   (infinity norm).
struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-10;
  double hmax_fraction = 0.1;  // hmax = fraction * |tf - t0|
  long max_steps = 5'000'000;
  double blowup = 1e150;       // |y| beyond this counts as divergence

  static OdeOptions precise(double tol = 1e-10) {
    OdeOptions o;
    o.rtol = tol;
    o.atol = tol;
    return o;
  }
  // ode45 defaults; reproduces data sets generated with them.
  static OdeOptions coarse() {
    OdeOptions o;
    o.rtol = 1e-3;
    o.atol = 1e-6;
    return o;
  }
};

struct OdeSolution {
  std::vector<double> t;
  std::vector<Vec> y;
};

// tspan has at least two strictly increasing entries. With exactly two the
// solution holds every accepted step; otherwise it holds the requested
// times (tspan[0] included), filled by the continuous extension.
// Throws IntegrationError on step-size collapse or divergence.
OdeSolution integrate_dp45(const OdeRhs& rhs, const std::vector<double>& tspan,
                           const Vec& y0, const OdeOptions& opts = {});

}  // namespace ddlure
