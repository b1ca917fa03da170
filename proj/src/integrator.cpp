#include "ddlure/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ddlure/errors.hpp"

namespace ddlure {

namespace {

constexpr double kA2 = 1.0 / 5, kA3 = 3.0 / 10, kA4 = 4.0 / 5, kA5 = 8.0 / 9;

constexpr double kB11 = 1.0 / 5;
constexpr double kB21 = 3.0 / 40, kB22 = 9.0 / 40;
constexpr double kB31 = 44.0 / 45, kB32 = -56.0 / 15, kB33 = 32.0 / 9;
constexpr double kB41 = 19372.0 / 6561, kB42 = -25360.0 / 2187,
                 kB43 = 64448.0 / 6561, kB44 = -212.0 / 729;
constexpr double kB51 = 9017.0 / 3168, kB52 = -355.0 / 33,
                 kB53 = 46732.0 / 5247, kB54 = 49.0 / 176,
                 kB55 = -5103.0 / 18656;
constexpr double kB61 = 35.0 / 384, kB63 = 500.0 / 1113, kB64 = 125.0 / 192,
                 kB65 = -2187.0 / 6784, kB66 = 11.0 / 84;

constexpr double kE[7] = {71.0 / 57600,      0.0,         -71.0 / 16695,
                          71.0 / 1920,       -17253.0 / 339200,
                          22.0 / 525,        -1.0 / 40};

// Continuous extension coefficients, rows = stages, cols = s, s^2, s^3, s^4.
constexpr double kBI[7][4] = {
    {1.0, -183.0 / 64, 37.0 / 12, -145.0 / 128},
    {0.0, 0.0, 0.0, 0.0},
    {0.0, 1500.0 / 371, -1000.0 / 159, 1000.0 / 371},
    {0.0, -125.0 / 32, 125.0 / 12, -375.0 / 64},
    {0.0, 9477.0 / 3392, -729.0 / 106, 25515.0 / 6784},
    {0.0, -11.0 / 7, 11.0 / 3, -55.0 / 28},
    {0.0, 3.0 / 2, -4.0, 5.0 / 2}};

double spacing(double t) {
  const double a = std::abs(t);
  return std::nextafter(a, std::numeric_limits<double>::infinity()) - a;
}

[[noreturn]] void fail(const std::string& msg, double t) {
  std::ostringstream os;
  os << "integrate_dp45: " << msg << " at t = " << t;
  throw IntegrationError(os.str(), t);
}

}  // namespace

OdeSolution integrate_dp45(const OdeRhs& rhs, const std::vector<double>& tspan,
                           const Vec& y0, const OdeOptions& opts) {
  if (tspan.size() < 2) {
    throw InvalidInput("integrate_dp45: tspan needs at least two entries");
  }
  for (std::size_t i = 1; i < tspan.size(); ++i) {
    if (!(tspan[i] > tspan[i - 1])) {
      throw InvalidInput("integrate_dp45: tspan must be strictly increasing");
    }
  }
  if (!(opts.rtol > 0) || !(opts.atol > 0)) {
    throw InvalidInput("integrate_dp45: tolerances must be positive");
  }
  if (!y0.allFinite()) throw InvalidInput("integrate_dp45: non-finite y0");

  const double t0 = tspan.front();
  const double tf = tspan.back();
  const bool refine_steps = tspan.size() == 2;
  const double rtol = opts.rtol;
  const double threshold = opts.atol / rtol;
  const double power = 1.0 / 5;
  const double hmax = opts.hmax_fraction * (tf - t0);
  const Index n = y0.size();

  OdeSolution out;
  out.t.push_back(t0);
  out.y.push_back(y0);

  double t = t0;
  Vec y = y0;
  Vec f0 = rhs(t, y);
  if (!f0.allFinite()) fail("non-finite derivative", t);

  double hmin = 16 * spacing(t);
  double absh = std::min(hmax, tf - t0);
  const double rh =
      (f0.array() / y.array().abs().max(threshold)).abs().maxCoeff() /
      (0.8 * std::pow(rtol, power));
  if (absh * rh > 1) absh = 1 / rh;
  absh = std::max(absh, hmin);

  Mat k(n, 7);
  Vec ynew(n);
  std::size_t next = 1;
  bool done = false;
  long steps = 0;

  while (!done) {
    if (++steps > opts.max_steps) fail("step budget exhausted", t);
    hmin = 16 * spacing(t);
    absh = std::min(hmax, std::max(hmin, absh));
    double h = absh;
    if (1.1 * absh >= std::abs(tf - t)) {
      h = tf - t;
      absh = std::abs(h);
      done = true;
    }

    bool nofailed = true;
    double err = 0.0;
    double tnew = t;
    while (true) {
      k.col(0) = f0;
      k.col(1) = rhs(t + h * kA2, y + h * (kB11 * k.col(0)));
      k.col(2) = rhs(t + h * kA3, y + h * (kB21 * k.col(0) + kB22 * k.col(1)));
      k.col(3) = rhs(t + h * kA4, y + h * (kB31 * k.col(0) + kB32 * k.col(1) +
                                           kB33 * k.col(2)));
      k.col(4) = rhs(t + h * kA5,
                     y + h * (kB41 * k.col(0) + kB42 * k.col(1) +
                              kB43 * k.col(2) + kB44 * k.col(3)));
      k.col(5) = rhs(t + h, y + h * (kB51 * k.col(0) + kB52 * k.col(1) +
                                     kB53 * k.col(2) + kB54 * k.col(3) +
                                     kB55 * k.col(4)));
      tnew = done ? tf : t + h;
      h = tnew - t;
      ynew = y + h * (kB61 * k.col(0) + kB63 * k.col(2) + kB64 * k.col(3) +
                      kB65 * k.col(4) + kB66 * k.col(5));
      k.col(6) = rhs(tnew, ynew);

      Vec e = Vec::Zero(n);
      for (int s = 0; s < 7; ++s) e += kE[s] * k.col(s);
      const Eigen::ArrayXd denom =
          y.array().abs().max(ynew.array().abs()).max(threshold);
      err = absh * (e.array() / denom).abs().maxCoeff();

      if (!std::isfinite(err) || !ynew.allFinite()) {
        // Treat as a failed step; shrink hard.
        err = std::numeric_limits<double>::infinity();
      }
      if (err > rtol) {
        if (absh <= hmin) fail("step size collapsed", t);
        if (nofailed) {
          nofailed = false;
          const double shrink =
              std::isfinite(err) ? std::max(0.1, 0.8 * std::pow(rtol / err, power))
                                 : 0.1;
          absh = std::max(hmin, absh * shrink);
        } else {
          absh = std::max(hmin, 0.5 * absh);
        }
        h = absh;
        done = false;
      } else {
        break;
      }
    }

    if (ynew.lpNorm<Eigen::Infinity>() > opts.blowup) fail("divergence", tnew);

    if (refine_steps) {
      out.t.push_back(tnew);
      out.y.push_back(ynew);
    } else {
      while (next < tspan.size() && tspan[next] <= tnew) {
        const double tt = tspan[next];
        if (tt == tnew) {
          out.y.push_back(ynew);
        } else {
          const double s = (tt - t) / h;
          const double sp[4] = {s, s * s, s * s * s, s * s * s * s};
          Vec acc = Vec::Zero(n);
          for (int st = 0; st < 7; ++st) {
            double w = 0.0;
            for (int j = 0; j < 4; ++j) w += kBI[st][j] * sp[j];
            acc += w * k.col(st);
          }
          out.y.push_back(y + h * acc);
        }
        out.t.push_back(tt);
        ++next;
      }
    }

    if (nofailed) {
      const double temp = 1.25 * std::pow(err / rtol, power);
      absh = temp > 0.2 ? absh / temp : 5.0 * absh;
    }
    t = tnew;
    y = ynew;
    f0 = k.col(6);
  }
  return out;
}

}  // namespace ddlure
