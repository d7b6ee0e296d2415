#pragma once

#include <cstdint>
#include <vector>

#include "droneroute/linalg.hpp"

namespace droneroute {

// Reverse-mode autodiff over Mat values. Nodes are appended in construction
// order, so reverse index order is a valid topological order for backward().
// Leaves wrap externally owned parameter tensors; their gradients accumulate
// into caller-provided sink matrices, which lets one gradient buffer collect
// contributions from many tapes.
class Tape {
public:
  // value must outlive the tape. grad_sink may be null for frozen inputs.
  int leaf(const Mat& value, Mat* grad_sink);
  int constant(Mat value);

  int matmul(int a, int b);
  int add(int a, int b);
  int add_rowvec(int a, int v);  // v is 1 x cols, broadcast over rows
  int mul_rowvec(int a, int v);
  int scale(int a, double s);
  int relu(int a);
  int tanh_act(int a);
  // Per-column normalisation over rows with population variance.
  int instance_norm(int a, double eps);
  int transpose(int a);
  std::vector<int> split_cols(int a, int parts);
  int concat_cols(const std::vector<int>& xs);
  int concat_rows(const std::vector<int>& xs);
  // mask: row-major uint8, nonzero = entry excluded; empty = no mask.
  int softmax_rows(int a, std::vector<uint8_t> mask);
  int log_softmax_rows(int a, std::vector<uint8_t> mask);
  int gather_rows(int a, std::vector<int> rows);
  // k x 1 column of entries (rows[t], cols[t]).
  int pick(int a, std::vector<int> rows, std::vector<int> cols);

  const Mat& value(int id) const;
  // Seeds d(loss)/d(loss) = 1 (loss must be 1x1), walks the tape backwards and
  // adds leaf gradients into their sinks.
  void backward(int loss);

  size_t node_count() const { return nodes_.size(); }

private:
  enum class Op : uint8_t {
    Leaf,
    Constant,
    Matmul,
    Add,
    AddRowvec,
    MulRowvec,
    Scale,
    Relu,
    Tanh,
    InstanceNorm,
    Transpose,
    SplitCols,
    ConcatCols,
    ConcatRows,
    SoftmaxRows,
    LogSoftmaxRows,
    GatherRows,
    Pick,
  };

  struct Node {
    Op op;
    bool needs_grad = false;
    int a = -1;
    int b = -1;
    Mat val;
    const Mat* ext = nullptr;  // leaf value storage
    Mat* sink = nullptr;
    double scalar = 0.0;           // Scale s, InstanceNorm eps
    int col_off = 0;               // SplitCols block start
    std::vector<int> inputs;       // ConcatCols
    std::vector<int> idx;          // GatherRows / Pick rows
    std::vector<int> idx2;         // Pick cols
    std::vector<uint8_t> mask;     // softmax family
    Mat aux;                       // InstanceNorm x-hat, softmax output reuse
    Mat aux2;                      // InstanceNorm per-column std
  };

  const Mat& val_of(int id) const;
  int push(Node n);
  void check(int id) const;

  std::vector<Node> nodes_;
};

}  // namespace droneroute
