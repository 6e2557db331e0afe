#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <initializer_list>
#include <utility>
#include <vector>

#include "kocp/errors.hpp"

namespace kocp {

/// Dense real symmetric matrix with packed upper-triangle storage
/// (row-major), so entry (i,j) and (j,i) share one stored value.
/// Indices are 0-based. Immutable in spirit: operations return new values.
class SymMatrix {
 public:
  explicit SymMatrix(int dim) : dim_(dim), upper_(packed_size(dim), 0.0) {
    if (dim < 1) throw InputError("SymMatrix: dim must be >= 1");
  }

  SymMatrix(int dim, std::vector<double> upper) : dim_(dim), upper_(std::move(upper)) {
    if (dim < 1) throw InputError("SymMatrix: dim must be >= 1");
    if (static_cast<int>(upper_.size()) != packed_size(dim))
      throw InputError("SymMatrix: packed data has wrong length");
  }

  /// Row-major dense initializer, e.g. SymMatrix::from_rows({{1,2},{2,1}}).
  /// The strict lower triangle is ignored.
  static SymMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const int d = static_cast<int>(rows.size());
    SymMatrix a(d);
    int i = 0;
    for (const auto& row : rows) {
      if (static_cast<int>(row.size()) != d) throw InputError("SymMatrix: ragged rows");
      int j = 0;
      for (double v : row) {
        if (j >= i) a.at(i, j) = v;
        ++j;
      }
      ++i;
    }
    return a;
  }

  static SymMatrix identity(int dim) {
    SymMatrix a(dim);
    for (int i = 0; i < dim; ++i) a.at(i, i) = 1.0;
    return a;
  }

  static SymMatrix diag(const std::vector<double>& d) {
    SymMatrix a(static_cast<int>(d.size()));
    for (int i = 0; i < a.dim_; ++i) a.at(i, i) = d[i];
    return a;
  }

  /// Builds from a dense matrix, averaging (A + A^T)/2.
  static SymMatrix from_dense(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw InputError("SymMatrix: dense matrix not square");
    SymMatrix a(static_cast<int>(m.rows()));
    for (int i = 0; i < a.dim_; ++i)
      for (int j = i; j < a.dim_; ++j) a.at(i, j) = 0.5 * (m(i, j) + m(j, i));
    return a;
  }

  int dim() const { return dim_; }

  double operator()(int i, int j) const { return upper_[index(i, j)]; }
  double& at(int i, int j) { return upper_[index(i, j)]; }

  const std::vector<double>& upper() const { return upper_; }
  std::vector<double>& upper() { return upper_; }

  static int packed_size(int dim) { return dim * (dim + 1) / 2; }

  /// Packed offset of (i,j), i <= j required after swap.
  int index(int i, int j) const {
    if (i > j) std::swap(i, j);
    if (i < 0 || j >= dim_) throw InputError("SymMatrix: index out of range");
    return i * dim_ - i * (i - 1) / 2 + (j - i);
  }

  Eigen::MatrixXd dense() const {
    Eigen::MatrixXd m(dim_, dim_);
    for (int i = 0; i < dim_; ++i)
      for (int j = i; j < dim_; ++j) m(i, j) = m(j, i) = (*this)(i, j);
    return m;
  }

  double trace() const {
    double t = 0;
    for (int i = 0; i < dim_; ++i) t += (*this)(i, i);
    return t;
  }

  double frobenius() const {
    double s = 0;
    for (int i = 0; i < dim_; ++i)
      for (int j = i; j < dim_; ++j) {
        const double v = (*this)(i, j);
        s += (i == j ? 1.0 : 2.0) * v * v;
      }
    return std::sqrt(s);
  }

  /// Trace inner product tr(AB).
  static double inner(const SymMatrix& a, const SymMatrix& b) {
    if (a.dim_ != b.dim_) throw InputError("SymMatrix::inner: dimension mismatch");
    double s = 0;
    for (int i = 0; i < a.dim_; ++i)
      for (int j = i; j < a.dim_; ++j) s += (i == j ? 1.0 : 2.0) * a(i, j) * b(i, j);
    return s;
  }

  SymMatrix& operator+=(const SymMatrix& o) {
    require_same_dim(o);
    for (size_t t = 0; t < upper_.size(); ++t) upper_[t] += o.upper_[t];
    return *this;
  }
  SymMatrix& operator-=(const SymMatrix& o) {
    require_same_dim(o);
    for (size_t t = 0; t < upper_.size(); ++t) upper_[t] -= o.upper_[t];
    return *this;
  }
  SymMatrix& operator*=(double c) {
    for (double& v : upper_) v *= c;
    return *this;
  }

  friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
  friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
  friend SymMatrix operator*(double c, SymMatrix a) { return a *= c; }
  friend SymMatrix operator*(SymMatrix a, double c) { return a *= c; }

  bool operator==(const SymMatrix& o) const { return dim_ == o.dim_ && upper_ == o.upper_; }

  /// Max |off-diagonal| entry; 0 for 1x1.
  double max_offdiag_abs() const {
    double m = 0;
    for (int i = 0; i < dim_; ++i)
      for (int j = i + 1; j < dim_; ++j) m = std::max(m, std::abs((*this)(i, j)));
    return m;
  }

  std::vector<double> diagonal() const {
    std::vector<double> d(dim_);
    for (int i = 0; i < dim_; ++i) d[i] = (*this)(i, i);
    return d;
  }

 private:
  void require_same_dim(const SymMatrix& o) const {
    if (dim_ != o.dim_) throw InputError("SymMatrix: dimension mismatch");
  }

  int dim_;
  std::vector<double> upper_;
};

}  // namespace kocp
