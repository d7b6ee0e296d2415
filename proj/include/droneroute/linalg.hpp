#pragma once

#include <cassert>
#include <cstring>
#include <stdexcept>
#include <vector>

namespace droneroute {

// Dense row-major matrix of doubles. Small and predictable; everything the
// policy needs is matmul, column-block attention kernels and elementwise ops.
class Mat {
public:
  Mat() = default;
  Mat(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, 0.0) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  size_t size() const { return data_.size(); }

  double& operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }

  double* row(int r) { return data_.data() + static_cast<size_t>(r) * cols_; }
  const double* row(int r) const { return data_.data() + static_cast<size_t>(r) * cols_; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }
  void zero() { fill(0.0); }

  bool same_shape(const Mat& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// C += A * B  (ikj order so the inner loop streams rows of B and C).
inline void matmul_acc(Mat& c, const Mat& a, const Mat& b) {
  assert(a.cols() == b.rows() && c.rows() == a.rows() && c.cols() == b.cols());
  const int n = a.rows(), k = a.cols(), m = b.cols();
  for (int i = 0; i < n; ++i) {
    double* ci = c.row(i);
    const double* ai = a.row(i);
    for (int t = 0; t < k; ++t) {
      const double av = ai[t];
      const double* bt = b.row(t);
      for (int j = 0; j < m; ++j) ci[j] += av * bt[j];
    }
  }
}

inline Mat matmul(const Mat& a, const Mat& b) {
  Mat c(a.rows(), b.cols());
  matmul_acc(c, a, b);
  return c;
}

// C += A * B^T (rows of A against rows of B).
inline void matmul_acc_nt(Mat& c, const Mat& a, const Mat& b) {
  assert(a.cols() == b.cols() && c.rows() == a.rows() && c.cols() == b.rows());
  const int k = a.cols();
  for (int i = 0; i < a.rows(); ++i) {
    const double* ai = a.row(i);
    double* ci = c.row(i);
    for (int j = 0; j < b.rows(); ++j) {
      const double* bj = b.row(j);
      double s = 0.0;
      for (int t = 0; t < k; ++t) s += ai[t] * bj[t];
      ci[j] += s;
    }
  }
}

// C += A^T * B (columns of A against columns of B).
inline void matmul_acc_tn(Mat& c, const Mat& a, const Mat& b) {
  assert(a.rows() == b.rows() && c.rows() == a.cols() && c.cols() == b.cols());
  const int m = b.cols();
  for (int i = 0; i < a.rows(); ++i) {
    const double* ai = a.row(i);
    const double* bi = b.row(i);
    for (int t = 0; t < a.cols(); ++t) {
      const double av = ai[t];
      if (av == 0.0) continue;
      double* ct = c.row(t);
      for (int j = 0; j < m; ++j) ct[j] += av * bi[j];
    }
  }
}

// C(i,j) = scale * sum_t A(i, ca+t) * B(j, cb+t): per-head Q K^T without
// materialising head slices.
inline void block_dot_nt(Mat& c, const Mat& a, int ca, const Mat& b, int cb, int dh, double scale) {
  assert(c.rows() == a.rows() && c.cols() == b.rows());
  for (int i = 0; i < a.rows(); ++i) {
    const double* ai = a.row(i) + ca;
    double* ci = c.row(i);
    for (int j = 0; j < b.rows(); ++j) {
      const double* bj = b.row(j) + cb;
      double s = 0.0;
      for (int t = 0; t < dh; ++t) s += ai[t] * bj[t];
      ci[j] = s * scale;
    }
  }
}

// C(i, cc+t) += sum_j W(i,j) * V(j, cv+t): attention-weighted value rows into
// one head block of the output.
inline void block_weighted_rows(Mat& c, int cc, const Mat& w, const Mat& v, int cv, int dh) {
  assert(w.rows() == c.rows() && w.cols() == v.rows());
  for (int i = 0; i < w.rows(); ++i) {
    double* ci = c.row(i) + cc;
    const double* wi = w.row(i);
    for (int j = 0; j < v.rows(); ++j) {
      const double wij = wi[j];
      if (wij == 0.0) continue;
      const double* vj = v.row(j) + cv;
      for (int t = 0; t < dh; ++t) ci[t] += wij * vj[t];
    }
  }
}

inline void add_inplace(Mat& a, const Mat& b) {
  assert(a.same_shape(b));
  double* p = a.data();
  const double* q = b.data();
  for (size_t i = 0; i < a.size(); ++i) p[i] += q[i];
}

inline void add_rowvec_inplace(Mat& a, const Mat& v) {
  assert(v.rows() == 1 && v.cols() == a.cols());
  for (int i = 0; i < a.rows(); ++i) {
    double* ai = a.row(i);
    const double* vp = v.row(0);
    for (int j = 0; j < a.cols(); ++j) ai[j] += vp[j];
  }
}

}  // namespace droneroute
