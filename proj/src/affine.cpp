#include <algorithm>
#include <cmath>

#include "ddlure/errors.hpp"
#include "ddlure/sdp.hpp"

namespace ddlure {

namespace {

std::string dims(Index r, Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

// Zero-pad the columns of j to k.
Mat padded(const Mat& j, Index k) {
  if (j.cols() == k) return j;
  Mat out = Mat::Zero(j.rows(), k);
  out.leftCols(j.cols()) = j;
  return out;
}

Mat vec_to_mat(const Eigen::Ref<const Vec>& v, Index r, Index c) {
  return Eigen::Map<const Mat>(v.data(), r, c);
}

}  // namespace

AffineExpr::AffineExpr(Index rows, Index cols)
    : rows_(rows), cols_(cols), c_(Vec::Zero(rows * cols)), j_(rows * cols, 0) {}

AffineExpr AffineExpr::constant(const Mat& m) {
  require_finite(m, "AffineExpr constant");
  AffineExpr e(m.rows(), m.cols());
  e.c_ = Eigen::Map<const Vec>(m.data(), m.size());
  return e;
}

Mat AffineExpr::constant_part() const { return vec_to_mat(c_, rows_, cols_); }

Mat AffineExpr::coefficient(Index k) const {
  if (k >= j_.cols()) return Mat::Zero(rows_, cols_);
  return vec_to_mat(j_.col(k), rows_, cols_);
}

Mat AffineExpr::eval(const Vec& x) const {
  if (x.size() < j_.cols()) {
    throw StructuralError("AffineExpr::eval: assignment has " +
                          std::to_string(x.size()) + " entries, map needs " +
                          std::to_string(j_.cols()));
  }
  const Vec v = c_ + j_ * x.head(j_.cols());
  return vec_to_mat(v, rows_, cols_);
}

AffineExpr AffineExpr::t() const {
  AffineExpr out(cols_, rows_);
  out.j_.resize(j_.rows(), j_.cols());
  for (Index i = 0; i < rows_; ++i) {
    for (Index j = 0; j < cols_; ++j) {
      const Index src = i + j * rows_;
      const Index dst = j + i * cols_;
      out.c_(dst) = c_(src);
      out.j_.row(dst) = j_.row(src);
    }
  }
  return out;
}

AffineExpr AffineExpr::operator-() const {
  AffineExpr out = *this;
  out.c_ = -c_;
  out.j_ = -j_;
  return out;
}

AffineExpr operator+(const AffineExpr& a, const AffineExpr& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) {
    throw StructuralError("AffineExpr +: " + dims(a.rows_, a.cols_) + " vs " +
                          dims(b.rows_, b.cols_));
  }
  const Index k = std::max(a.j_.cols(), b.j_.cols());
  AffineExpr out(a.rows_, a.cols_);
  out.c_ = a.c_ + b.c_;
  out.j_ = padded(a.j_, k) + padded(b.j_, k);
  return out;
}

AffineExpr operator-(const AffineExpr& a, const AffineExpr& b) {
  return a + (-b);
}

AffineExpr operator+(const AffineExpr& a, const Mat& b) {
  return a + AffineExpr::constant(b);
}

AffineExpr operator-(const AffineExpr& a, const Mat& b) {
  return a + AffineExpr::constant(-b);
}

AffineExpr operator*(double s, const AffineExpr& a) {
  AffineExpr out = a;
  out.c_ *= s;
  out.j_ *= s;
  return out;
}

AffineExpr operator*(const Mat& m, const AffineExpr& a) {
  if (m.cols() != a.rows_) {
    throw StructuralError("Mat * AffineExpr: " + dims(m.rows(), m.cols()) +
                          " times " + dims(a.rows_, a.cols_));
  }
  AffineExpr out(m.rows(), a.cols_);
  out.c_ = Eigen::Map<const Vec>(Mat(m * a.constant_part()).data(),
                                 out.c_.size());
  out.j_.resize(m.rows() * a.cols_, a.j_.cols());
  for (Index k = 0; k < a.j_.cols(); ++k) {
    const Mat prod = m * vec_to_mat(a.j_.col(k), a.rows_, a.cols_);
    out.j_.col(k) = Eigen::Map<const Vec>(prod.data(), prod.size());
  }
  return out;
}

AffineExpr operator*(const AffineExpr& a, const Mat& m) {
  if (a.cols_ != m.rows()) {
    throw StructuralError("AffineExpr * Mat: " + dims(a.rows_, a.cols_) +
                          " times " + dims(m.rows(), m.cols()));
  }
  AffineExpr out(a.rows_, m.cols());
  out.c_ = Eigen::Map<const Vec>(Mat(a.constant_part() * m).data(),
                                 out.c_.size());
  out.j_.resize(a.rows_ * m.cols(), a.j_.cols());
  for (Index k = 0; k < a.j_.cols(); ++k) {
    const Mat prod = vec_to_mat(a.j_.col(k), a.rows_, a.cols_) * m;
    out.j_.col(k) = Eigen::Map<const Vec>(prod.data(), prod.size());
  }
  return out;
}

AffineExpr block(const std::vector<std::vector<AffineExpr>>& rows) {
  if (rows.empty() || rows.front().empty()) {
    throw StructuralError("block: empty layout");
  }
  const std::size_t nc = rows.front().size();
  std::vector<Index> heights(rows.size()), widths(nc);
  Index k = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != nc) throw StructuralError("block: ragged layout");
    heights[i] = rows[i][0].rows();
    for (std::size_t j = 0; j < nc; ++j) {
      const AffineExpr& e = rows[i][j];
      if (i == 0) widths[j] = e.cols();
      if (e.rows() != heights[i] || e.cols() != widths[j]) {
        throw StructuralError("block: block (" + std::to_string(i) + "," +
                              std::to_string(j) + ") is " +
                              dims(e.rows(), e.cols()) + ", expected " +
                              dims(heights[i], widths[j]));
      }
      k = std::max(k, e.num_params());
    }
  }
  Index total_r = 0, total_c = 0;
  for (Index h : heights) total_r += h;
  for (Index w : widths) total_c += w;

  AffineExpr out(total_r, total_c);
  out.j_ = Mat::Zero(total_r * total_c, k);
  Index r0 = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Index c0 = 0;
    for (std::size_t j = 0; j < nc; ++j) {
      const AffineExpr& e = rows[i][j];
      const Index h = e.rows();
      for (Index jj = 0; jj < e.cols(); ++jj) {
        const Index dst = r0 + (c0 + jj) * total_r;
        out.c_.segment(dst, h) = e.c_.segment(jj * h, h);
        if (e.j_.cols() > 0) {
          out.j_.block(dst, 0, h, e.j_.cols()) = e.j_.middleRows(jj * h, h);
        }
      }
      c0 += widths[j];
    }
    r0 += heights[i];
  }
  return out;
}

AffineExpr symmetric_block(const std::vector<std::vector<AffineExpr>>& upper) {
  const std::size_t n = upper.size();
  std::vector<std::vector<AffineExpr>> full(n, std::vector<AffineExpr>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (upper[i].size() != n - i) {
      throw StructuralError("symmetric_block: row " + std::to_string(i) +
                            " must hold " + std::to_string(n - i) + " blocks");
    }
    for (std::size_t k = 0; k < upper[i].size(); ++k) {
      full[i][i + k] = upper[i][k];
      if (k > 0) full[i + k][i] = upper[i][k].t();
    }
  }
  return block(full);
}

AffineExpr LmiProblem::add_variable(const std::string& name, Index rows,
                                    Index cols, VarKind kind) {
  if (rows < 1 || cols < 1) {
    throw StructuralError("add_variable: '" + name + "' has empty shape");
  }
  if (kind == VarKind::kSymmetric && rows != cols) {
    throw StructuralError("add_variable: symmetric '" + name +
                          "' must be square");
  }
  for (const auto& v : vars_) {
    if (v.name == name) {
      throw StructuralError("add_variable: duplicate name '" + name + "'");
    }
  }
  VariableInfo info{name, rows, cols, kind, num_params_, 0};
  info.size = kind == VarKind::kFull ? rows * cols : rows * (rows + 1) / 2;

  AffineExpr e(rows, cols);
  e.j_ = Mat::Zero(rows * cols, num_params_ + info.size);
  if (kind == VarKind::kFull) {
    for (Index i = 0; i < rows * cols; ++i) e.j_(i, num_params_ + i) = 1.0;
  } else {
    Index p = num_params_;
    for (Index j = 0; j < cols; ++j) {
      for (Index i = 0; i <= j; ++i, ++p) {
        e.j_(i + j * rows, p) = 1.0;
        e.j_(j + i * rows, p) = 1.0;
      }
    }
  }
  num_params_ += info.size;
  vars_.push_back(info);
  return e;
}

void LmiProblem::add_lmi(const std::string& name, const AffineExpr& f,
                         LmiSense sense, double margin) {
  if (f.rows() != f.cols() || f.rows() < 1) {
    throw StructuralError("add_lmi: block '" + name + "' is " +
                          dims(f.rows(), f.cols()) + ", not square");
  }
  if (!std::isfinite(margin)) {
    throw StructuralError("add_lmi: block '" + name + "' has non-finite margin");
  }
  blocks_.push_back({name, f, sense, margin < 0 ? -1.0 : margin});
}

void LmiProblem::add_equality(const std::string& name, const AffineExpr& g) {
  if (g.rows() < 1 || g.cols() < 1) {
    throw StructuralError("add_equality: '" + name + "' is empty");
  }
  eqs_.push_back({name, g});
}

void LmiProblem::set_margin(double m) {
  if (!(m > 0.0) || !std::isfinite(m)) {
    throw StructuralError("set_margin: margin must be positive");
  }
  margin_ = m;
}

Assignment LmiProblem::unpack(const Vec& x) const {
  if (x.size() != num_params_) {
    throw StructuralError("unpack: vector has " + std::to_string(x.size()) +
                          " entries, problem has " +
                          std::to_string(num_params_));
  }
  Assignment out;
  for (const auto& v : vars_) {
    Mat m(v.rows, v.cols);
    if (v.kind == VarKind::kFull) {
      m = vec_to_mat(x.segment(v.offset, v.size), v.rows, v.cols);
    } else {
      Index p = v.offset;
      for (Index j = 0; j < v.cols; ++j) {
        for (Index i = 0; i <= j; ++i, ++p) {
          m(i, j) = x(p);
          m(j, i) = x(p);
        }
      }
    }
    out.emplace(v.name, std::move(m));
  }
  return out;
}

Vec LmiProblem::pack(const Assignment& a) const {
  Vec x(num_params_);
  for (const auto& v : vars_) {
    const auto it = a.find(v.name);
    if (it == a.end()) {
      throw StructuralError("assignment is missing variable '" + v.name + "'");
    }
    const Mat& m = it->second;
    if (m.rows() != v.rows || m.cols() != v.cols) {
      throw StructuralError("assignment for '" + v.name + "' is " +
                            dims(m.rows(), m.cols()) + ", expected " +
                            dims(v.rows, v.cols));
    }
    if (v.kind == VarKind::kFull) {
      x.segment(v.offset, v.size) = Eigen::Map<const Vec>(m.data(), m.size());
    } else {
      Index p = v.offset;
      for (Index j = 0; j < v.cols; ++j) {
        for (Index i = 0; i <= j; ++i, ++p) x(p) = 0.5 * (m(i, j) + m(j, i));
      }
    }
  }
  return x;
}

void LmiProblem::validate() const {
  if (blocks_.empty()) throw StructuralError("LMI problem has no blocks");
  auto check_symmetric = [](const Mat& m, const std::string& what) {
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
      throw StructuralError("LMI block '" + what + "' is not symmetric");
    }
  };
  for (const auto& b : blocks_) {
    if (b.F.num_params() > num_params_) {
      throw StructuralError("LMI block '" + b.name +
                            "' references undeclared parameters");
    }
    if (!b.F.offset().allFinite() || !b.F.jacobian().allFinite()) {
      throw StructuralError("LMI block '" + b.name + "' has non-finite data");
    }
    check_symmetric(b.F.constant_part(), b.name);
    for (Index k = 0; k < b.F.num_params(); ++k) {
      check_symmetric(b.F.coefficient(k), b.name);
    }
  }
  for (const auto& e : eqs_) {
    if (e.G.num_params() > num_params_) {
      throw StructuralError("equality '" + e.name +
                            "' references undeclared parameters");
    }
    if (!e.G.offset().allFinite() || !e.G.jacobian().allFinite()) {
      throw StructuralError("equality '" + e.name + "' has non-finite data");
    }
  }
}

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kFeasible: return "FEASIBLE";
    case SolveStatus::kInfeasible: return "INFEASIBLE";
    case SolveStatus::kInconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

}  // namespace ddlure
