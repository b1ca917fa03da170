#pragma once

#include <optional>
#include <string>

#include "ddlure/constraints.hpp"
#include "ddlure/plant.hpp"
#include "ddlure/sdp.hpp"

namespace ddlure {

enum class Method {
  kDtQpsd,
  kDtQzero,
  kDtQnsd,
  kCtQpsd,
  kCtQzero,
  kCtQnsd,
  kCtPassive,
  kNlfb,
  kNlfbCtPassive,
  kNlfbLinearOnly,
};

// Kebab-case names used on disk and on the command line ("dt-qpsd", ...).
std::string_view to_string(Method m);
Method method_from_string(std::string_view s);

bool is_nlfb(Method m);
bool is_passive(Method m);

struct SynthesisSpec {
  Method method = Method::kDtQpsd;
  std::optional<Mat> L;              // n x q, required unless NLFB*
  std::optional<double> decay_rho;   // DT_* only, in (0, 1)
  double strictness_eps = 1e-7;
};

struct SolverStats {
  SolveStatus status = SolveStatus::kInconclusive;
  int iterations = 0;
  double runtime_s = 0.0;
  double achieved_margin = 0.0;
  std::string message;
};

struct Certificate {
  Method method = Method::kDtQpsd;
  Mat K;
  std::optional<Mat> M;
  SymMat P;
  Assignment raw;  // {Y} or {Y1, Y2, W}
  double eps = 0.0;  // margin the program was solved with
  SolverStats stats;
  std::optional<Mat> L;
  std::optional<double> decay_rho;
};

struct SynthesisResult {
  SolveStatus status = SolveStatus::kInconclusive;
  std::optional<Certificate> certificate;  // FEASIBLE only
  SolverStats stats;
};

// strictness_eps * max(1, data scale)
double effective_eps(const DataSet& data, const SynthesisSpec& spec);

// Checks every precondition and assembles the LMI program. Throws
// PreconditionError / UnsupportedCase / DimensionMismatch.
LmiProblem build_program(const DataSet& data, const LiftedConstraint& lc,
                         const SynthesisSpec& spec);

SynthesisResult synthesize(const DataSet& data, const LiftedConstraint& lc,
                           const SynthesisSpec& spec,
                           const SolveOptions& opts = {});

struct Gains {
  Mat K;
  std::optional<Mat> M;
  SymMat P;
};

// {Y}: P = (X0 Y)^-1, K = U0 Y P.  {Y1, Y2, W}: P = W^-1, K = U0 Y1 P,
// M = U0 Y2. Throws CertificateCorrupt if X0 Y (or W) is not PD, or is
// asymmetric beyond `symmetry_tol` relative to its largest entry. Values
// rounded to a few digits need a looser symmetry tolerance.
Gains extract_gains(const Assignment& raw, const DataSet& data,
                    double symmetry_tol = 1e-6);

enum class CaseFamily { kQpsd, kQzero, kQnsd, kPassive, kUnsupported };

std::string_view to_string(CaseFamily c);
CaseFamily classify_case(const LiftedConstraint& lc);

// Smallest feasible rho (within `iters` halvings of [0, 1]) for a DT method.
// Returns nothing when even rho close to 1 is not feasible.
std::optional<Certificate> bisect_decay(const DataSet& data,
                                        const LiftedConstraint& lc,
                                        SynthesisSpec spec,
                                        const SolveOptions& opts = {},
                                        int iters = 12);

}  // namespace ddlure
