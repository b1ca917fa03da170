#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ddlure/constraints.hpp"
#include "ddlure/plant.hpp"
#include "ddlure/synth.hpp"

namespace ddlure {

struct CheckResult {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  bool inconclusive = false;  // not enough evidence either way
  std::string details;
};

struct VerificationReport {
  std::vector<CheckResult> checks;         // mandatory
  std::vector<CheckResult> informational;  // never part of overall
  bool overall = false;

  const CheckResult* find(std::string_view name) const;
  // true when every failing mandatory check is merely inconclusive
  bool only_inconclusive_failures() const;
};

// Closed loop expressed through data: Acl (n x n) and the nonlinearity
// injection Lcl (n x q).
struct ClosedLoopData {
  Mat Acl;
  Mat Lcl;
};

// From the raw decision variables: G = Y P, Acl = (X1 - L F0) G, Lcl = L;
// NLFB: Acl = X1 Y1 W^-1, Lcl = X1 Y2.
ClosedLoopData closed_loop_from_raw(const Certificate& cert,
                                    const DataSet& data);
// From the claimed gains: W0 G = [K; I] (or Psi0 [G1 G2] = [I 0; 0 I; K M])
// solved in the least-squares sense.
ClosedLoopData closed_loop_from_gains(const Certificate& cert,
                                      const DataSet& data);

CheckResult check_matrix_inequality(const Certificate& cert,
                                    const DataSet& data,
                                    const LiftedConstraint& lc,
                                    std::optional<double> tol = std::nullopt);

// Equality couplings of the method's program evaluated at the raw variables.
CheckResult check_equalities(const Certificate& cert, const DataSet& data,
                             const LiftedConstraint& lc);

// cert.K / cert.M / cert.P agree with the gains extracted from raw.
CheckResult check_consistency(const Certificate& cert, const DataSet& data);

CheckResult check_p_positive(const Certificate& cert);

CheckResult sample_lyapunov_decrease(const Certificate& cert,
                                     const DataSet& data,
                                     const LiftedConstraint& lc,
                                     int n_samples, std::uint64_t seed);

// 720 uniform points on [0, 2 pi) when the grid is empty.
CheckResult kyp_frequency_sweep(const Certificate& cert, const DataSet& data,
                                const LiftedConstraint& lc,
                                std::vector<double> omega_grid = {});

struct ClosedLoopResult {
  Trajectory trajectory;
  bool converged = false;
  double final_norm = 0.0;
  std::optional<double> blowup_time;
};

// DISCRETE: horizon is a number of steps. CONTINUOUS: [0, horizon].
ClosedLoopResult simulate_closed_loop(const PlantModel& model,
                                      const Certificate& cert, const Vec& x0,
                                      double horizon);

CheckResult passifiability_flag(const Certificate& cert, const DataSet& data,
                                const LiftedConstraint& lc, const Mat& H,
                                const Mat& L);

struct VerifyOptions {
  int n_samples = 10000;
  std::uint64_t seed = 0;
  std::vector<double> omega_grid;
  const PlantModel* model = nullptr;  // enables the closed-loop check
  std::optional<Vec> x0;
  std::optional<double> horizon;
};

VerificationReport verify_certificate(const Certificate& cert,
                                      const DataSet& data,
                                      const LiftedConstraint& lc,
                                      const VerifyOptions& opts = {});

}  // namespace ddlure
