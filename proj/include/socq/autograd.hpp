#pragma once

// Minimal reverse-mode automatic differentiation over row-major matrices.
//
// Every op returns a fresh node. While gradient recording is enabled the node
// keeps its inputs and a closure that scatters its gradient into them;
// backward() replays those closures in reverse topological order. Parameters
// are leaf nodes with requires_grad set. Recording is controlled per thread,
// so concurrent inference under NoGradGuard never touches shared state.

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace socq::nn {

struct Node;
using TensorPtr = std::shared_ptr<Node>;

struct Node {
  int rows = 0;
  int cols = 0;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  bool grad_touched = false;  // set when any gradient flowed in since zero_grad
  std::vector<TensorPtr> parents;
  std::function<void()> backward_fn;

  double& at(int r, int c) { return value[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return value[static_cast<std::size_t>(r) * cols + c]; }
  std::size_t size() const { return value.size(); }
  void ensure_grad();
  void zero_grad();
};

TensorPtr make_tensor(int rows, int cols, double fill = 0.0);
TensorPtr make_tensor(int rows, int cols, std::vector<double> values);
TensorPtr make_parameter(int rows, int cols, double fill = 0.0);

bool grad_enabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// Backpropagates from a scalar (1x1) node, seeding its gradient with `seed`.
void backward(const TensorPtr& loss, double seed = 1.0);

TensorPtr matmul(const TensorPtr& a, const TensorPtr& b);     // a (m x k) * b (k x n)
TensorPtr matmul_nt(const TensorPtr& a, const TensorPtr& b);  // a (m x k) * b^T, b (n x k)
TensorPtr add(const TensorPtr& a, const TensorPtr& b);
TensorPtr add_bias(const TensorPtr& a, const TensorPtr& bias);  // bias 1 x n broadcast over rows
TensorPtr scale(const TensorPtr& a, double s);
TensorPtr relu(const TensorPtr& a);
TensorPtr gelu(const TensorPtr& a);
TensorPtr layer_norm(const TensorPtr& x, const TensorPtr& gamma, const TensorPtr& beta,
                     double eps = 1e-5);
// Row softmax; with `causal`, entry (i, j) for j > i is masked out.
TensorPtr softmax_rows(const TensorPtr& a, bool causal = false);
TensorPtr gather_rows(const TensorPtr& table, std::span<const int> ids);
TensorPtr concat_cols(const std::vector<TensorPtr>& parts);
TensorPtr concat_rows(const std::vector<TensorPtr>& parts);
TensorPtr slice_cols(const TensorPtr& a, int start, int width);
TensorPtr slice_rows(const TensorPtr& a, int start, int count);
// Mean token cross-entropy of row-wise logits against target ids; 1 x 1.
TensorPtr cross_entropy(const TensorPtr& logits, std::span<const int> targets);

// Row-wise log-softmax values (no graph).
std::vector<double> log_softmax_row(const Node& logits, int row);

}  // namespace socq::nn
