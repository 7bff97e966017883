#include "socq/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "socq/kernels.hpp"

namespace socq::nn {

namespace kp = socq::kernels::parallel;

namespace {

thread_local bool g_grad_enabled = true;

using kernels::Dims;

std::size_t sz(int r, int c) { return static_cast<std::size_t>(r) * static_cast<std::size_t>(c); }

TensorPtr result(int rows, int cols, std::vector<TensorPtr> parents) {
  auto t = make_tensor(rows, cols);
  if (g_grad_enabled) {
    for (const auto& p : parents)
      if (p->requires_grad) t->requires_grad = true;
    if (t->requires_grad) t->parents = std::move(parents);
  }
  return t;
}

void check(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("autograd shape error: ") + what);
}

}  // namespace

void Node::ensure_grad() {
  if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
}

void Node::zero_grad() {
  std::fill(grad.begin(), grad.end(), 0.0);
  grad_touched = false;
}

TensorPtr make_tensor(int rows, int cols, double fill) {
  auto t = std::make_shared<Node>();
  t->rows = rows;
  t->cols = cols;
  t->value.assign(sz(rows, cols), fill);
  return t;
}

TensorPtr make_tensor(int rows, int cols, std::vector<double> values) {
  check(values.size() == sz(rows, cols), "make_tensor value count");
  auto t = std::make_shared<Node>();
  t->rows = rows;
  t->cols = cols;
  t->value = std::move(values);
  return t;
}

TensorPtr make_parameter(int rows, int cols, double fill) {
  auto t = make_tensor(rows, cols, fill);
  t->requires_grad = true;
  return t;
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

void backward(const TensorPtr& loss, double seed) {
  check(loss->rows == 1 && loss->cols == 1, "backward needs a scalar");
  if (!loss->requires_grad) return;
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  // iterative post-order DFS
  std::vector<std::pair<Node*, std::size_t>> stack{{loss.get(), 0}};
  seen.insert(loss.get());
  while (!stack.empty()) {
    auto& [n, i] = stack.back();
    if (i < n->parents.size()) {
      Node* p = n->parents[i++].get();
      if (p->requires_grad && !seen.contains(p)) {
        seen.insert(p);
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }
  for (auto* n : order) n->ensure_grad();
  loss->grad[0] += seed;
  loss->grad_touched = true;
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if ((*it)->backward_fn) (*it)->backward_fn();
}

namespace {
// Marks parents that will receive gradient and makes sure their buffers exist.
inline Node* grad_target(const TensorPtr& p) {
  if (!p->requires_grad) return nullptr;
  p->ensure_grad();
  p->grad_touched = true;
  return p.get();
}
}  // namespace

TensorPtr matmul(const TensorPtr& a, const TensorPtr& b) {
  check(a->cols == b->rows, "matmul inner dimension");
  auto out = result(a->rows, b->cols, {a, b});
  const Dims d{static_cast<std::size_t>(a->rows), static_cast<std::size_t>(a->cols),
               static_cast<std::size_t>(b->cols)};
  kp::gemm_nn(a->value, b->value, out->value, d);
  if (out->requires_grad) {
    Node* o = out.get();
    o->backward_fn = [o, d] {
      auto& a = o->parents[0];
      auto& b = o->parents[1];
      if (auto* ga = grad_target(a)) kp::gemm_nt(o->grad, b->value, ga->grad, {d.m, d.n, d.k});
      if (auto* gb = grad_target(b)) kp::gemm_tn(a->value, o->grad, gb->grad, {d.k, d.m, d.n});
    };
  }
  return out;
}

TensorPtr matmul_nt(const TensorPtr& a, const TensorPtr& b) {
  check(a->cols == b->cols, "matmul_nt inner dimension");
  auto out = result(a->rows, b->rows, {a, b});
  const Dims d{static_cast<std::size_t>(a->rows), static_cast<std::size_t>(a->cols),
               static_cast<std::size_t>(b->rows)};
  kp::gemm_nt(a->value, b->value, out->value, d);
  if (out->requires_grad) {
    Node* o = out.get();
    o->backward_fn = [o, d] {
      auto& a = o->parents[0];
      auto& b = o->parents[1];
      if (auto* ga = grad_target(a)) kp::gemm_nn(o->grad, b->value, ga->grad, {d.m, d.n, d.k});
      if (auto* gb = grad_target(b)) kp::gemm_tn(o->grad, a->value, gb->grad, {d.n, d.m, d.k});
    };
  }
  return out;
}

TensorPtr add(const TensorPtr& a, const TensorPtr& b) {
  check(a->rows == b->rows && a->cols == b->cols, "add shapes");
  auto out = result(a->rows, a->cols, {a, b});
  for (std::size_t i = 0; i < out->size(); ++i) out->value[i] = a->value[i] + b->value[i];
  if (out->requires_grad) {
    Node* o = out.get();
    o->backward_fn = [o] {
      for (auto& p : o->parents)
        if (auto* g = grad_target(p))
          for (std::size_t i = 0; i < o->size(); ++i) g->grad[i] += o->grad[i];
    };
  }
  return out;
}

TensorPtr add_bias(const TensorPtr& a, const TensorPtr& bias) {
  check(bias->rows == 1 && bias->cols == a->cols, "add_bias shapes");
  auto out = result(a->rows, a->cols, {a, bias});
  const auto cols = static_cast<std::size_t>(a->cols);
  for (std::size_t i = 0; i < out->size(); ++i) out->value[i] = a->value[i] + bias->value[i % cols];
  if (out->requires_grad) {
    Node* o = out.get();
    o->backward_fn = [o, cols] {
      if (auto* g = grad_target(o->parents[0]))
        for (std::size_t i = 0; i < o->size(); ++i) g->grad[i] += o->grad[i];
      if (auto* g = grad_target(o->parents[1]))
        for (std::size_t i = 0; i < o->size(); ++i) g->grad[i % cols] += o->grad[i];
    };
  }
  return out;
}

TensorPtr scale(const TensorPtr& a, double s) {
  auto out = result(a->rows, a->cols, {a});
  for (std::size_t i = 0; i < out->size(); ++i) out->value[i] = a->value[i] * s;
  if (out->requires_grad) {
    Node* o = out.get();
    o->backward_fn = [o, s] {
      if (auto* g = grad_target(o->parents[0]))
        for (std::size_t i = 0; i < o->size(); ++i) g->grad[i] += o->grad[i] * s;
    };
  }
  return out;
}

TensorPtr relu(const TensorPtr& a) {
  auto out = result(a->rows, a->cols, {a});
  for (std::size_t i = 0; i < out->size(); ++i) out->value[i] = std::max(0.0, a->value[i]);
  if (out->requires_grad) {
    Node* o = out.get();
    o->backward_fn = [o] {
      auto& a = o->parents[0];
      if (auto* g = grad_target(a))
        for (std::size_t i = 0; i < o->size(); ++i)
          if (a->value[i] > 0) g->grad[i] += o->grad[i];
    };
  }
  return out;
}

TensorPtr gelu(const TensorPtr& a) {
  auto out = result(a->rows, a->cols, {a});
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (std::size_t i = 0; i < out->size(); ++i) {
    const double x = a->value[i];
    out->value[i] = 0.5 * x * (1.0 + std::erf(x * inv_sqrt2));
  }
  if (out->requires_grad) {
    Node* o = out.get();
    o->backward_fn = [o, inv_sqrt2] {
      auto& a = o->parents[0];
      const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * M_PI);
      if (auto* g = grad_target(a))
        for (std::size_t i = 0; i < o->size(); ++i) {
          const double x = a->value[i];
          const double d = 0.5 * (1.0 + std::erf(x * inv_sqrt2)) + x * inv_sqrt_2pi * std::exp(-0.5 * x * x);
          g->grad[i] += o->grad[i] * d;
        }
    };
  }
  return out;
}

TensorPtr layer_norm(const TensorPtr& x, const TensorPtr& gamma, const TensorPtr& beta,
                     double eps) {
  check(gamma->cols == x->cols && beta->cols == x->cols, "layer_norm shapes");
  auto out = result(x->rows, x->cols, {x, gamma, beta});
  const int n = x->cols;
  std::vector<double> xhat(x->size()), inv_std(static_cast<std::size_t>(x->rows));
  for (int r = 0; r < x->rows; ++r) {
    const double* xr = &x->value[sz(r, n)];
    double mu = 0;
    for (int c = 0; c < n; ++c) mu += xr[c];
    mu /= n;
    double var = 0;
    for (int c = 0; c < n; ++c) var += (xr[c] - mu) * (xr[c] - mu);
    var /= n;
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[static_cast<std::size_t>(r)] = is;
    for (int c = 0; c < n; ++c) {
      const double h = (xr[c] - mu) * is;
      xhat[sz(r, n) + static_cast<std::size_t>(c)] = h;
      out->value[sz(r, n) + static_cast<std::size_t>(c)] = gamma->value[static_cast<std::size_t>(c)] * h + beta->value[static_cast<std::size_t>(c)];
    }
  }
  if (out->requires_grad) {
    Node* o = out.get();
    o->backward_fn = [o, n, xhat = std::move(xhat), inv_std = std::move(inv_std)] {
      auto& x = o->parents[0];
      auto& gamma = o->parents[1];
      auto* gg = grad_target(gamma);
      auto* gb = grad_target(o->parents[2]);
      auto* gx = grad_target(x);
      std::vector<double> dxhat(static_cast<std::size_t>(n));
      for (int r = 0; r < o->rows; ++r) {
        const std::size_t base = sz(r, n);
        double sum_d = 0, sum_dx = 0;
        for (int c = 0; c < n; ++c) {
          const auto i = base + static_cast<std::size_t>(c);
          const double dy = o->grad[i];
          if (gg) gg->grad[static_cast<std::size_t>(c)] += dy * xhat[i];
          if (gb) gb->grad[static_cast<std::size_t>(c)] += dy;
          dxhat[static_cast<std::size_t>(c)] = dy * gamma->value[static_cast<std::size_t>(c)];
          sum_d += dxhat[static_cast<std::size_t>(c)];
          sum_dx += dxhat[static_cast<std::size_t>(c)] * xhat[i];
        }
        if (!gx) continue;
        const double is = inv_std[static_cast<std::size_t>(r)];
        for (int c = 0; c < n; ++c) {
          const auto i = base + static_cast<std::size_t>(c);
          gx->grad[i] += is / n * (n * dxhat[static_cast<std::size_t>(c)] - sum_d - xhat[i] * sum_dx);
        }
      }
    };
  }
  return out;
}

TensorPtr softmax_rows(const TensorPtr& a, bool causal) {
  auto out = result(a->rows, a->cols, {a});
  const int n = a->cols;
  for (int r = 0; r < a->rows; ++r) {
    const int limit = causal ? std::min(n, r + 1) : n;
    const double* ar = &a->value[sz(r, n)];
    double* yr = &out->value[sz(r, n)];
    double m = ar[0];
    for (int c = 1; c < limit; ++c) m = std::max(m, ar[c]);
    double s = 0;
    for (int c = 0; c < limit; ++c) {
      yr[c] = std::exp(ar[c] - m);
      s += yr[c];
    }
    for (int c = 0; c < limit; ++c) yr[c] /= s;
    for (int c = limit; c < n; ++c) yr[c] = 0.0;
  }
  if (out->requires_grad) {
    Node* o = out.get();
    o->backward_fn = [o, n] {
      auto* g = grad_target(o->parents[0]);
      if (!g) return;
      for (int r = 0; r < o->rows; ++r) {
        const double* y = &o->value[sz(r, n)];
        const double* dy = &o->grad[sz(r, n)];
        double dot = 0;
        for (int c = 0; c < n; ++c) dot += dy[c] * y[c];
        double* dx = &g->grad[sz(r, n)];
        for (int c = 0; c < n; ++c) dx[c] += y[c] * (dy[c] - dot);
      }
    };
  }
  return out;
}

TensorPtr gather_rows(const TensorPtr& table, std::span<const int> ids) {
  const int n = table->cols;
  auto out = result(static_cast<int>(ids.size()), n, {table});
  for (std::size_t r = 0; r < ids.size(); ++r) {
    check(ids[r] >= 0 && ids[r] < table->rows, "gather_rows id out of range");
    std::copy_n(&table->value[sz(ids[r], n)], n, &out->value[r * static_cast<std::size_t>(n)]);
  }
  if (out->requires_grad) {
    Node* o = out.get();
    o->backward_fn = [o, n, ids = std::vector<int>(ids.begin(), ids.end())] {
      auto* g = grad_target(o->parents[0]);
      if (!g) return;
      for (std::size_t r = 0; r < ids.size(); ++r)
        for (int c = 0; c < n; ++c)
          g->grad[sz(ids[r], n) + static_cast<std::size_t>(c)] += o->grad[r * static_cast<std::size_t>(n) + static_cast<std::size_t>(c)];
    };
  }
  return out;
}

TensorPtr concat_cols(const std::vector<TensorPtr>& parts) {
  check(!parts.empty(), "concat_cols of nothing");
  const int rows = parts[0]->rows;
  int cols = 0;
  for (const auto& p : parts) {
    check(p->rows == rows, "concat_cols row mismatch");
    cols += p->cols;
  }
  auto out = result(rows, cols, parts);
  int off = 0;
  for (const auto& p : parts) {
    for (int r = 0; r < rows; ++r)
      std::copy_n(&p->value[sz(r, p->cols)], p->cols, &out->value[sz(r, cols) + static_cast<std::size_t>(off)]);
    off += p->cols;
  }
  if (out->requires_grad) {
    Node* o = out.get();
    o->backward_fn = [o] {
      int off = 0;
      for (auto& p : o->parents) {
        if (auto* g = grad_target(p))
          for (int r = 0; r < o->rows; ++r)
            for (int c = 0; c < p->cols; ++c)
              g->grad[sz(r, p->cols) + static_cast<std::size_t>(c)] += o->grad[sz(r, o->cols) + static_cast<std::size_t>(off + c)];
        off += p->cols;
      }
    };
  }
  return out;
}

TensorPtr concat_rows(const std::vector<TensorPtr>& parts) {
  check(!parts.empty(), "concat_rows of nothing");
  const int cols = parts[0]->cols;
  int rows = 0;
  for (const auto& p : parts) {
    check(p->cols == cols, "concat_rows column mismatch");
    rows += p->rows;
  }
  auto out = result(rows, cols, parts);
  std::size_t off = 0;
  for (const auto& p : parts) {
    std::copy(p->value.begin(), p->value.end(), out->value.begin() + static_cast<long>(off));
    off += p->size();
  }
  if (out->requires_grad) {
    Node* o = out.get();
    o->backward_fn = [o] {
      std::size_t off = 0;
      for (auto& p : o->parents) {
        if (auto* g = grad_target(p))
          for (std::size_t i = 0; i < p->size(); ++i) g->grad[i] += o->grad[off + i];
        off += p->size();
      }
    };
  }
  return out;
}

TensorPtr slice_cols(const TensorPtr& a, int start, int width) {
  check(start >= 0 && start + width <= a->cols, "slice_cols range");
  auto out = result(a->rows, width, {a});
  for (int r = 0; r < a->rows; ++r)
    std::copy_n(&a->value[sz(r, a->cols) + static_cast<std::size_t>(start)], width, &out->value[sz(r, width)]);
  if (out->requires_grad) {
    Node* o = out.get();
    o->backward_fn = [o, start, width] {
      auto& a = o->parents[0];
      if (auto* g = grad_target(a))
        for (int r = 0; r < o->rows; ++r)
          for (int c = 0; c < width; ++c)
            g->grad[sz(r, a->cols) + static_cast<std::size_t>(start + c)] += o->grad[sz(r, width) + static_cast<std::size_t>(c)];
    };
  }
  return out;
}

TensorPtr slice_rows(const TensorPtr& a, int start, int count) {
  check(start >= 0 && start + count <= a->rows, "slice_rows range");
  auto out = result(count, a->cols, {a});
  std::copy_n(&a->value[sz(start, a->cols)], sz(count, a->cols), out->value.begin());
  if (out->requires_grad) {
    Node* o = out.get();
    o->backward_fn = [o, start] {
      auto& a = o->parents[0];
      if (auto* g = grad_target(a))
        for (std::size_t i = 0; i < o->size(); ++i) g->grad[sz(start, a->cols) + i] += o->grad[i];
    };
  }
  return out;
}

std::vector<double> log_softmax_row(const Node& logits, int row) {
  const int n = logits.cols;
  const double* z = &logits.value[sz(row, n)];
  double m = z[0];
  for (int c = 1; c < n; ++c) m = std::max(m, z[c]);
  double s = 0;
  for (int c = 0; c < n; ++c) s += std::exp(z[c] - m);
  const double lse = m + std::log(s);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) out[static_cast<std::size_t>(c)] = z[c] - lse;
  return out;
}

TensorPtr cross_entropy(const TensorPtr& logits, std::span<const int> targets) {
  check(static_cast<int>(targets.size()) == logits->rows && !targets.empty(),
        "cross_entropy target count");
  auto out = result(1, 1, {logits});
  const int n = logits->cols;
  std::vector<double> probs(logits->size());
  double total = 0;
  for (int r = 0; r < logits->rows; ++r) {
    auto lp = log_softmax_row(*logits, r);
    const int t = targets[static_cast<std::size_t>(r)];
    check(t >= 0 && t < n, "cross_entropy target id");
    total -= lp[static_cast<std::size_t>(t)];
    for (int c = 0; c < n; ++c) probs[sz(r, n) + static_cast<std::size_t>(c)] = std::exp(lp[static_cast<std::size_t>(c)]);
  }
  const double count = static_cast<double>(targets.size());
  out->value[0] = total / count;
  if (out->requires_grad) {
    Node* o = out.get();
    o->backward_fn = [o, n, count, probs = std::move(probs),
                      t = std::vector<int>(targets.begin(), targets.end())] {
      auto* g = grad_target(o->parents[0]);
      if (!g) return;
      const double s = o->grad[0] / count;
      for (std::size_t r = 0; r < t.size(); ++r) {
        for (int c = 0; c < n; ++c) g->grad[r * static_cast<std::size_t>(n) + static_cast<std::size_t>(c)] += s * probs[r * static_cast<std::size_t>(n) + static_cast<std::size_t>(c)];
        g->grad[r * static_cast<std::size_t>(n) + static_cast<std::size_t>(t[r])] -= s;
      }
    };
  }
  return out;
}

}  // namespace socq::nn
