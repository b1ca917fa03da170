#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ddlure/matcore.hpp"

namespace ddlure {

// Matrix-valued affine function of the flat decision vector x:
//   vec(F(x)) = c + J x     (column-major vec)
// J is padded with zero columns on demand, so expressions created before
// later variables were declared stay valid.
class AffineExpr {
 public:
  AffineExpr() = default;
  AffineExpr(Index rows, Index cols);  // zero

  static AffineExpr constant(const Mat& m);
  static AffineExpr zero(Index rows, Index cols) { return {rows, cols}; }
  static AffineExpr identity(Index n) { return constant(Mat::Identity(n, n)); }

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index num_params() const { return j_.cols(); }
  const Vec& offset() const { return c_; }
  const Mat& jacobian() const { return j_; }

  Mat constant_part() const;
  Mat coefficient(Index k) const;  // zero matrix when k >= num_params
  Mat eval(const Vec& x) const;

  AffineExpr t() const;
  AffineExpr operator-() const;

  friend AffineExpr operator+(const AffineExpr& a, const AffineExpr& b);
  friend AffineExpr operator-(const AffineExpr& a, const AffineExpr& b);
  friend AffineExpr operator+(const AffineExpr& a, const Mat& b);
  friend AffineExpr operator-(const AffineExpr& a, const Mat& b);
  friend AffineExpr operator*(double s, const AffineExpr& a);
  friend AffineExpr operator*(const Mat& m, const AffineExpr& a);
  friend AffineExpr operator*(const AffineExpr& a, const Mat& m);

 private:
  friend class LmiProblem;
  friend AffineExpr block(const std::vector<std::vector<AffineExpr>>& rows);

  Index rows_ = 0;
  Index cols_ = 0;
  Vec c_;
  Mat j_;  // (rows*cols) x num_params
};

// Dense block assembly; every row of blocks must agree in height and every
// column in width.
AffineExpr block(const std::vector<std::vector<AffineExpr>>& rows);

// Symmetric block assembly from the upper triangle: upper[i][k] is block
// (i, i + k); lower blocks are the transposes.
AffineExpr symmetric_block(const std::vector<std::vector<AffineExpr>>& upper);

enum class VarKind { kFull, kSymmetric };

// F <= -margin I  or  F >= margin I
enum class LmiSense { kNegative, kPositive };

struct LmiBlock {
  std::string name;
  AffineExpr F;
  LmiSense sense = LmiSense::kNegative;
  double margin = 0.0;
};

struct EqualityConstraint {
  std::string name;
  AffineExpr G;  // required = 0
};

struct VariableInfo {
  std::string name;
  Index rows = 0;
  Index cols = 0;
  VarKind kind = VarKind::kFull;
  Index offset = 0;  // first parameter index
  Index size = 0;    // number of parameters
};

using Assignment = std::map<std::string, Mat>;

class LmiProblem {
 public:
  // Returns the expression of the new variable. Names must be unique.
  AffineExpr add_variable(const std::string& name, Index rows, Index cols,
                          VarKind kind = VarKind::kFull);

  // Margin < 0 means "use the problem margin".
  void add_lmi(const std::string& name, const AffineExpr& f, LmiSense sense,
               double margin = -1.0);
  void add_equality(const std::string& name, const AffineExpr& g);

  double margin() const { return margin_; }
  void set_margin(double m);

  Index num_params() const { return num_params_; }
  const std::vector<VariableInfo>& variables() const { return vars_; }
  const std::vector<LmiBlock>& blocks() const { return blocks_; }
  const std::vector<EqualityConstraint>& equalities() const { return eqs_; }

  Assignment unpack(const Vec& x) const;
  // Throws StructuralError on a missing or misshapen variable.
  Vec pack(const Assignment& a) const;

  // Throws StructuralError if a block is non-square or not symmetric, or a
  // map references undeclared parameters.
  void validate() const;

 private:
  double margin_ = 1e-7;
  Index num_params_ = 0;
  std::vector<VariableInfo> vars_;
  std::vector<LmiBlock> blocks_;
  std::vector<EqualityConstraint> eqs_;
};

enum class SolveStatus { kFeasible, kInfeasible, kInconclusive };

std::string_view to_string(SolveStatus s);

struct SolveOptions {
  int max_iter = 400;   // Newton steps
  double tol = 1e-8;    // relative duality-gap tolerance
  std::uint64_t seed = 0;
};

struct RecheckResult {
  double max_block_eig = 0.0;  // largest eigenvalue over blocks in "<= 0" orientation
  double max_equality_residual = 0.0;  // max |entry|
  double worst_slack = 0.0;  // min over blocks of (achieved margin - required)
};

struct SolveOutcome {
  SolveStatus status = SolveStatus::kInconclusive;
  Assignment assignment;  // FEASIBLE only
  double achieved_margin = 0.0;
  int iterations = 0;
  double runtime_s = 0.0;
  double bound = 0.0;  // last lower bound on the optimal depth t*
  std::string message;
};

SolveOutcome solve_feasibility(const LmiProblem& p,
                               const SolveOptions& opts = {});

RecheckResult recheck(const LmiProblem& p, const Assignment& a);

}  // namespace ddlure
