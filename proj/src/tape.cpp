#include "droneroute/tape.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace droneroute {

namespace {

[[noreturn]] void fail(const char* msg) { throw std::invalid_argument(std::string("tape: ") + msg); }

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

const Mat& Tape::val_of(int id) const {
  const Node& n = nodes_[id];
  return n.op == Op::Leaf ? *n.ext : n.val;
}

const Mat& Tape::value(int id) const {
  check(id);
  return val_of(id);
}

void Tape::check(int id) const {
  if (id < 0 || id >= static_cast<int>(nodes_.size())) fail("node id out of range");
}

int Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

int Tape::leaf(const Mat& value, Mat* grad_sink) {
  if (value.rows() <= 0 || value.cols() <= 0) fail("leaf with empty value");
  if (grad_sink && !grad_sink->same_shape(value)) fail("leaf gradient sink shape mismatch");
  Node n;
  n.op = Op::Leaf;
  n.ext = &value;
  n.sink = grad_sink;
  n.needs_grad = grad_sink != nullptr;
  return push(std::move(n));
}

int Tape::constant(Mat value) {
  Node n;
  n.op = Op::Constant;
  n.val = std::move(value);
  return push(std::move(n));
}

int Tape::matmul(int a, int b) {
  check(a);
  check(b);
  const Mat& av = val_of(a);
  const Mat& bv = val_of(b);
  if (av.cols() != bv.rows()) fail("matmul shape mismatch");
  Node n;
  n.op = Op::Matmul;
  n.a = a;
  n.b = b;
  n.needs_grad = nodes_[a].needs_grad || nodes_[b].needs_grad;
  n.val = droneroute::matmul(av, bv);
  return push(std::move(n));
}

int Tape::add(int a, int b) {
  check(a);
  check(b);
  const Mat& av = val_of(a);
  const Mat& bv = val_of(b);
  if (!av.same_shape(bv)) fail("add shape mismatch");
  Node n;
  n.op = Op::Add;
  n.a = a;
  n.b = b;
  n.needs_grad = nodes_[a].needs_grad || nodes_[b].needs_grad;
  n.val = av;
  add_inplace(n.val, bv);
  return push(std::move(n));
}

int Tape::add_rowvec(int a, int v) {
  check(a);
  check(v);
  const Mat& av = val_of(a);
  const Mat& vv = val_of(v);
  if (vv.rows() != 1 || vv.cols() != av.cols()) fail("add_rowvec shape mismatch");
  Node n;
  n.op = Op::AddRowvec;
  n.a = a;
  n.b = v;
  n.needs_grad = nodes_[a].needs_grad || nodes_[v].needs_grad;
  n.val = av;
  add_rowvec_inplace(n.val, vv);
  return push(std::move(n));
}

int Tape::mul_rowvec(int a, int v) {
  check(a);
  check(v);
  const Mat& av = val_of(a);
  const Mat& vv = val_of(v);
  if (vv.rows() != 1 || vv.cols() != av.cols()) fail("mul_rowvec shape mismatch");
  Node n;
  n.op = Op::MulRowvec;
  n.a = a;
  n.b = v;
  n.needs_grad = nodes_[a].needs_grad || nodes_[v].needs_grad;
  n.val = Mat(av.rows(), av.cols());
  for (int r = 0; r < av.rows(); ++r)
    for (int c = 0; c < av.cols(); ++c) n.val(r, c) = av(r, c) * vv(0, c);
  return push(std::move(n));
}

int Tape::scale(int a, double s) {
  check(a);
  const Mat& av = val_of(a);
  Node n;
  n.op = Op::Scale;
  n.a = a;
  n.scalar = s;
  n.needs_grad = nodes_[a].needs_grad;
  n.val = Mat(av.rows(), av.cols());
  for (int r = 0; r < av.rows(); ++r)
    for (int c = 0; c < av.cols(); ++c) n.val(r, c) = av(r, c) * s;
  return push(std::move(n));
}

int Tape::relu(int a) {
  check(a);
  const Mat& av = val_of(a);
  Node n;
  n.op = Op::Relu;
  n.a = a;
  n.needs_grad = nodes_[a].needs_grad;
  n.val = Mat(av.rows(), av.cols());
  for (int r = 0; r < av.rows(); ++r)
    for (int c = 0; c < av.cols(); ++c) n.val(r, c) = av(r, c) > 0.0 ? av(r, c) : 0.0;
  return push(std::move(n));
}

int Tape::tanh_act(int a) {
  check(a);
  const Mat& av = val_of(a);
  Node n;
  n.op = Op::Tanh;
  n.a = a;
  n.needs_grad = nodes_[a].needs_grad;
  n.val = Mat(av.rows(), av.cols());
  for (int r = 0; r < av.rows(); ++r)
    for (int c = 0; c < av.cols(); ++c) n.val(r, c) = std::tanh(av(r, c));
  return push(std::move(n));
}

int Tape::instance_norm(int a, double eps) {
  check(a);
  const Mat& av = val_of(a);
  if (av.rows() < 1) fail("instance_norm on empty input");
  Node n;
  n.op = Op::InstanceNorm;
  n.a = a;
  n.scalar = eps;
  n.needs_grad = nodes_[a].needs_grad;
  n.val = Mat(av.rows(), av.cols());
  n.aux2 = Mat(1, av.cols());
  const double m = av.rows();
  for (int c = 0; c < av.cols(); ++c) {
    double mean = 0.0;
    for (int r = 0; r < av.rows(); ++r) mean += av(r, c);
    mean /= m;
    double var = 0.0;
    for (int r = 0; r < av.rows(); ++r) {
      const double d = av(r, c) - mean;
      var += d * d;
    }
    var /= m;
    const double s = std::sqrt(var + eps);
    n.aux2(0, c) = s;
    for (int r = 0; r < av.rows(); ++r) n.val(r, c) = (av(r, c) - mean) / s;
  }
  return push(std::move(n));
}

int Tape::transpose(int a) {
  check(a);
  const Mat& av = val_of(a);
  Node n;
  n.op = Op::Transpose;
  n.a = a;
  n.needs_grad = nodes_[a].needs_grad;
  n.val = Mat(av.cols(), av.rows());
  for (int r = 0; r < av.rows(); ++r)
    for (int c = 0; c < av.cols(); ++c) n.val(c, r) = av(r, c);
  return push(std::move(n));
}

std::vector<int> Tape::split_cols(int a, int parts) {
  check(a);
  // push() below may reallocate the node storage, so copy what we read.
  const Mat av = val_of(a);
  const bool needs = nodes_[a].needs_grad;
  if (parts <= 0 || av.cols() % parts != 0) fail("split_cols: column count not divisible");
  const int w = av.cols() / parts;
  std::vector<int> out;
  for (int p = 0; p < parts; ++p) {
    Node n;
    n.op = Op::SplitCols;
    n.a = a;
    n.col_off = p * w;
    n.needs_grad = needs;
    n.val = Mat(av.rows(), w);
    for (int r = 0; r < av.rows(); ++r)
      for (int c = 0; c < w; ++c) n.val(r, c) = av(r, n.col_off + c);
    out.push_back(push(std::move(n)));
  }
  return out;
}

int Tape::concat_cols(const std::vector<int>& xs) {
  if (xs.empty()) fail("concat_cols of nothing");
  int cols = 0;
  for (int id : xs) {
    check(id);
    if (val_of(id).rows() != val_of(xs[0]).rows()) fail("concat_cols row mismatch");
    cols += val_of(id).cols();
  }
  Node n;
  n.op = Op::ConcatCols;
  n.inputs = xs;
  n.val = Mat(val_of(xs[0]).rows(), cols);
  int off = 0;
  for (int id : xs) {
    const Mat& xv = val_of(id);
    n.needs_grad = n.needs_grad || nodes_[id].needs_grad;
    for (int r = 0; r < xv.rows(); ++r)
      for (int c = 0; c < xv.cols(); ++c) n.val(r, off + c) = xv(r, c);
    off += xv.cols();
  }
  return push(std::move(n));
}

int Tape::concat_rows(const std::vector<int>& xs) {
  if (xs.empty()) fail("concat_rows of nothing");
  int rows = 0;
  for (int id : xs) {
    check(id);
    if (val_of(id).cols() != val_of(xs[0]).cols()) fail("concat_rows column mismatch");
    rows += val_of(id).rows();
  }
  Node n;
  n.op = Op::ConcatRows;
  n.inputs = xs;
  n.val = Mat(rows, val_of(xs[0]).cols());
  int off = 0;
  for (int id : xs) {
    const Mat& xv = val_of(id);
    n.needs_grad = n.needs_grad || nodes_[id].needs_grad;
    for (int r = 0; r < xv.rows(); ++r)
      for (int c = 0; c < xv.cols(); ++c) n.val(off + r, c) = xv(r, c);
    off += xv.rows();
  }
  return push(std::move(n));
}

int Tape::softmax_rows(int a, std::vector<uint8_t> mask) {
  check(a);
  const Mat& av = val_of(a);
  if (!mask.empty() && mask.size() != av.size()) fail("softmax mask size mismatch");
  Node n;
  n.op = Op::SoftmaxRows;
  n.a = a;
  n.needs_grad = nodes_[a].needs_grad;
  n.mask = std::move(mask);
  n.val = Mat(av.rows(), av.cols());
  for (int r = 0; r < av.rows(); ++r) {
    const uint8_t* mrow = n.mask.empty() ? nullptr : n.mask.data() + static_cast<size_t>(r) * av.cols();
    double hi = kNegInf;
    for (int c = 0; c < av.cols(); ++c)
      if (!(mrow && mrow[c]) && av(r, c) > hi) hi = av(r, c);
    if (hi == kNegInf) fail("softmax row fully masked");
    double z = 0.0;
    for (int c = 0; c < av.cols(); ++c) {
      const double e = (mrow && mrow[c]) ? 0.0 : std::exp(av(r, c) - hi);
      n.val(r, c) = e;
      z += e;
    }
    for (int c = 0; c < av.cols(); ++c) n.val(r, c) /= z;
  }
  return push(std::move(n));
}

int Tape::log_softmax_rows(int a, std::vector<uint8_t> mask) {
  check(a);
  const Mat& av = val_of(a);
  if (!mask.empty() && mask.size() != av.size()) fail("log_softmax mask size mismatch");
  Node n;
  n.op = Op::LogSoftmaxRows;
  n.a = a;
  n.needs_grad = nodes_[a].needs_grad;
  n.mask = std::move(mask);
  n.val = Mat(av.rows(), av.cols());
  for (int r = 0; r < av.rows(); ++r) {
    const uint8_t* mrow = n.mask.empty() ? nullptr : n.mask.data() + static_cast<size_t>(r) * av.cols();
    double hi = kNegInf;
    for (int c = 0; c < av.cols(); ++c)
      if (!(mrow && mrow[c]) && av(r, c) > hi) hi = av(r, c);
    if (hi == kNegInf) fail("log_softmax row fully masked");
    double z = 0.0;
    for (int c = 0; c < av.cols(); ++c)
      if (!(mrow && mrow[c])) z += std::exp(av(r, c) - hi);
    const double lse = hi + std::log(z);
    for (int c = 0; c < av.cols(); ++c)
      n.val(r, c) = (mrow && mrow[c]) ? kNegInf : av(r, c) - lse;
  }
  return push(std::move(n));
}

int Tape::gather_rows(int a, std::vector<int> rows) {
  check(a);
  const Mat& av = val_of(a);
  for (int r : rows)
    if (r < 0 || r >= av.rows()) fail("gather_rows index out of range");
  Node n;
  n.op = Op::GatherRows;
  n.a = a;
  n.needs_grad = nodes_[a].needs_grad;
  n.val = Mat(static_cast<int>(rows.size()), av.cols());
  for (size_t r = 0; r < rows.size(); ++r)
    for (int c = 0; c < av.cols(); ++c) n.val(static_cast<int>(r), c) = av(rows[r], c);
  n.idx = std::move(rows);
  return push(std::move(n));
}

int Tape::pick(int a, std::vector<int> rows, std::vector<int> cols) {
  check(a);
  const Mat& av = val_of(a);
  if (rows.size() != cols.size()) fail("pick rows/cols length mismatch");
  for (size_t t = 0; t < rows.size(); ++t)
    if (rows[t] < 0 || rows[t] >= av.rows() || cols[t] < 0 || cols[t] >= av.cols())
      fail("pick index out of range");
  Node n;
  n.op = Op::Pick;
  n.a = a;
  n.needs_grad = nodes_[a].needs_grad;
  n.val = Mat(static_cast<int>(rows.size()), 1);
  for (size_t t = 0; t < rows.size(); ++t) n.val(static_cast<int>(t), 0) = av(rows[t], cols[t]);
  n.idx = std::move(rows);
  n.idx2 = std::move(cols);
  return push(std::move(n));
}

void Tape::backward(int loss) {
  check(loss);
  const Mat& lv = val_of(loss);
  if (lv.rows() != 1 || lv.cols() != 1) fail("backward target must be 1x1");
  std::vector<Mat> grads(nodes_.size());
  auto ensure = [&](int id) -> Mat& {
    const Mat& v = val_of(id);
    if (grads[id].rows() == 0) grads[id] = Mat(v.rows(), v.cols());
    return grads[id];
  };
  auto wants = [&](int id) { return nodes_[id].needs_grad; };
  ensure(loss)(0, 0) = 1.0;

  for (int id = loss; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.needs_grad || grads[id].rows() == 0) continue;
    const Mat& g = grads[id];
    switch (n.op) {
      case Op::Leaf:
        add_inplace(*n.sink, g);
        break;
      case Op::Constant:
        break;
      case Op::Matmul:
        if (wants(n.a)) matmul_acc_nt(ensure(n.a), g, val_of(n.b));
        if (wants(n.b)) matmul_acc_tn(ensure(n.b), val_of(n.a), g);
        break;
      case Op::Add:
        if (wants(n.a)) add_inplace(ensure(n.a), g);
        if (wants(n.b)) add_inplace(ensure(n.b), g);
        break;
      case Op::AddRowvec:
        if (wants(n.a)) add_inplace(ensure(n.a), g);
        if (wants(n.b)) {
          Mat& gv = ensure(n.b);
          for (int r = 0; r < g.rows(); ++r)
            for (int c = 0; c < g.cols(); ++c) gv(0, c) += g(r, c);
        }
        break;
      case Op::MulRowvec: {
        const Mat& av = val_of(n.a);
        const Mat& vv = val_of(n.b);
        if (wants(n.a)) {
          Mat& ga = ensure(n.a);
          for (int r = 0; r < g.rows(); ++r)
            for (int c = 0; c < g.cols(); ++c) ga(r, c) += g(r, c) * vv(0, c);
        }
        if (wants(n.b)) {
          Mat& gv = ensure(n.b);
          for (int r = 0; r < g.rows(); ++r)
            for (int c = 0; c < g.cols(); ++c) gv(0, c) += g(r, c) * av(r, c);
        }
        break;
      }
      case Op::Scale:
        if (wants(n.a)) {
          Mat& ga = ensure(n.a);
          for (int r = 0; r < g.rows(); ++r)
            for (int c = 0; c < g.cols(); ++c) ga(r, c) += g(r, c) * n.scalar;
        }
        break;
      case Op::Relu:
        if (wants(n.a)) {
          const Mat& av = val_of(n.a);
          Mat& ga = ensure(n.a);
          for (int r = 0; r < g.rows(); ++r)
            for (int c = 0; c < g.cols(); ++c)
              if (av(r, c) > 0.0) ga(r, c) += g(r, c);
        }
        break;
      case Op::Tanh:
        if (wants(n.a)) {
          Mat& ga = ensure(n.a);
          for (int r = 0; r < g.rows(); ++r)
            for (int c = 0; c < g.cols(); ++c) ga(r, c) += g(r, c) * (1.0 - n.val(r, c) * n.val(r, c));
        }
        break;
      case Op::InstanceNorm:
        if (wants(n.a)) {
          Mat& ga = ensure(n.a);
          const double m = n.val.rows();
          for (int c = 0; c < n.val.cols(); ++c) {
            double gm = 0.0, gx = 0.0;
            for (int r = 0; r < n.val.rows(); ++r) {
              gm += g(r, c);
              gx += g(r, c) * n.val(r, c);
            }
            gm /= m;
            gx /= m;
            const double s = n.aux2(0, c);
            for (int r = 0; r < n.val.rows(); ++r)
              ga(r, c) += (g(r, c) - gm - n.val(r, c) * gx) / s;
          }
        }
        break;
      case Op::Transpose:
        if (wants(n.a)) {
          Mat& ga = ensure(n.a);
          for (int r = 0; r < g.rows(); ++r)
            for (int c = 0; c < g.cols(); ++c) ga(c, r) += g(r, c);
        }
        break;
      case Op::SplitCols:
        if (wants(n.a)) {
          Mat& ga = ensure(n.a);
          for (int r = 0; r < g.rows(); ++r)
            for (int c = 0; c < g.cols(); ++c) ga(r, n.col_off + c) += g(r, c);
        }
        break;
      case Op::ConcatCols: {
        int off = 0;
        for (int in : n.inputs) {
          const Mat& xv = val_of(in);
          if (wants(in)) {
            Mat& gx = ensure(in);
            for (int r = 0; r < xv.rows(); ++r)
              for (int c = 0; c < xv.cols(); ++c) gx(r, c) += g(r, off + c);
          }
          off += xv.cols();
        }
        break;
      }
      case Op::ConcatRows: {
        int off = 0;
        for (int in : n.inputs) {
          const Mat& xv = val_of(in);
          if (wants(in)) {
            Mat& gx = ensure(in);
            for (int r = 0; r < xv.rows(); ++r)
              for (int c = 0; c < xv.cols(); ++c) gx(r, c) += g(off + r, c);
          }
          off += xv.rows();
        }
        break;
      }
      case Op::SoftmaxRows:
        if (wants(n.a)) {
          Mat& ga = ensure(n.a);
          for (int r = 0; r < g.rows(); ++r) {
            double dot = 0.0;
            for (int c = 0; c < g.cols(); ++c) dot += g(r, c) * n.val(r, c);
            for (int c = 0; c < g.cols(); ++c) ga(r, c) += n.val(r, c) * (g(r, c) - dot);
          }
        }
        break;
      case Op::LogSoftmaxRows:
        if (wants(n.a)) {
          Mat& ga = ensure(n.a);
          for (int r = 0; r < g.rows(); ++r) {
            const uint8_t* mrow =
                n.mask.empty() ? nullptr : n.mask.data() + static_cast<size_t>(r) * g.cols();
            double gsum = 0.0;
            for (int c = 0; c < g.cols(); ++c)
              if (!(mrow && mrow[c])) gsum += g(r, c);
            for (int c = 0; c < g.cols(); ++c)
              if (!(mrow && mrow[c])) ga(r, c) += g(r, c) - std::exp(n.val(r, c)) * gsum;
          }
        }
        break;
      case Op::GatherRows:
        if (wants(n.a)) {
          Mat& ga = ensure(n.a);
          for (size_t r = 0; r < n.idx.size(); ++r)
            for (int c = 0; c < g.cols(); ++c) ga(n.idx[r], c) += g(static_cast<int>(r), c);
        }
        break;
      case Op::Pick:
        if (wants(n.a)) {
          Mat& ga = ensure(n.a);
          for (size_t t = 0; t < n.idx.size(); ++t) ga(n.idx[t], n.idx2[t]) += g(static_cast<int>(t), 0);
        }
        break;
    }
    grads[id] = Mat();  // free as we go; reverse order guarantees no later reads
  }
}

}  // namespace droneroute
