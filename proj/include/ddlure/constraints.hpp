#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include "ddlure/matcore.hpp"

namespace ddlure {

// STRICT_R: the nonlinearity block Rhat is negative definite.
// PASSIVE: z'v >= 0, encoded with Qhat = 0, Rhat = 0 and routed to the
// passivity-based synthesis programs.
enum class ConstraintKind { kStrictR, kPassive };

std::string_view to_string(ConstraintKind k);

struct SectorBounds {
  Mat K1;  // q x p
  Mat K2;  // q x p
};

// Quadratic constraint
//
//   [z; v]' [Qhat Shat; Shat' Rhat] [z; v] >= 0,   z = H x,  v = f(t, z)
//
// satisfied by every admissible nonlinearity.
struct QuadConstraint {
  SymMat Qhat;  // p x p
  Mat Shat;     // p x q
  SymMat Rhat;  // q x q
  Mat H;        // p x n
  ConstraintKind kind = ConstraintKind::kStrictR;

  // Set by build_sector; enables the analytic regularity test.
  std::optional<SectorBounds> sector;
  // Set by build_partial_gradient_bounds: the injection matrix the caller
  // should use for the nonlinearity (I_n kron 1_n').
  std::optional<Mat> structure_L;

  Index p() const { return Qhat.dim(); }
  Index q() const { return Rhat.dim(); }
  Index n() const { return H.cols(); }

  // Copy with a different output map; H must have p rows.
  QuadConstraint with_H(const Mat& h) const;

  // Checks dimension consistency and the kind invariants. Throws.
  void validate() const;
};

// Validating constructor used by deserialization.
QuadConstraint make_constraint(const Mat& qhat, const Mat& shat,
                               const Mat& rhat, const Mat& h,
                               ConstraintKind kind);

// Constraint expressed on (x, v): congruence of (Qhat, Shat, Rhat) by
// blockdiag(H, I).
struct LiftedConstraint {
  SymMat Q;  // n x n
  Mat S;     // n x q
  SymMat R;  // q x q
  Definiteness q_class = Definiteness::kZero;
  ConstraintKind kind = ConstraintKind::kStrictR;

  Index n() const { return Q.dim(); }
  Index q() const { return R.dim(); }
};

/// |f(t,z)| <= ell |z|. H defaults to I_p.
QuadConstraint build_lipschitz(double ell, Index p, Index q);

/// (f - K1 z)'(K2 z - f) >= 0 with K1, K2 of size q x p.
QuadConstraint build_sector(const Mat& k1, const Mat& k2);

/// f = grad g with g m-strongly convex and ell-smooth, 0 < m < ell.
QuadConstraint build_convex_gradient(double m, double ell, Index n);

/// Elementwise bounds funder <= d fhat_i / d x_j <= fbar for n = 2. The
/// returned constraint has p = 2, q = 4, H = I_2 and records L = I_2 kron 1_2'.
QuadConstraint build_partial_gradient_bounds(const Mat& fbar,
                                             const Mat& funder);

/// Recurrent-network nonlinearity with symmetric multiplier Gamma
/// (negative off-diagonal, positive row sums).
QuadConstraint build_rnn(const Mat& gamma);

/// Passive nonlinearity z'f(t,z) >= 0 on z = H x.
QuadConstraint build_passive(const Mat& h);

LiftedConstraint lift(const QuadConstraint& c, Index n);

/// Value of the quadratic form at (z, v).
double evaluate(const QuadConstraint& c, const Vec& z, const Vec& v);
/// Value of the lifted quadratic form at (x, v).
double evaluate(const LiftedConstraint& c, const Vec& x, const Vec& v);

struct RegularityResult {
  bool regular = false;
  bool analytic = false;  // decided by the diagonal-sector shortcut
  std::optional<std::pair<Vec, Vec>> witness;  // (z, v) with z in im H
};

// Sound but incomplete: a witness proves regularity, failure to find one
// proves nothing.
RegularityResult check_regularity(const QuadConstraint& c, int budget,
                                  std::uint64_t seed, double tol = 1e-9);

}  // namespace ddlure
