#include "socq/kernels.hpp"

#include <cmath>

namespace socq::kernels {

namespace {

inline void gemm_nn_rows(const double* a, const double* b, double* c, Dims d, std::size_t r0,
                         std::size_t r1) {
  for (std::size_t i = r0; i < r1; ++i) {
    double* ci = c + i * d.n;
    const double* ai = a + i * d.k;
    for (std::size_t p = 0; p < d.k; ++p) {
      const double av = ai[p];
      if (av == 0.0) continue;
      const double* bp = b + p * d.n;
      for (std::size_t j = 0; j < d.n; ++j) ci[j] += av * bp[j];
    }
  }
}

inline void gemm_nt_rows(const double* a, const double* b, double* c, Dims d, std::size_t r0,
                         std::size_t r1) {
  for (std::size_t i = r0; i < r1; ++i) {
    const double* ai = a + i * d.k;
    double* ci = c + i * d.n;
    for (std::size_t j = 0; j < d.n; ++j) {
      const double* bj = b + j * d.k;
      double s = 0.0;
      for (std::size_t p = 0; p < d.k; ++p) s += ai[p] * bj[p];
      ci[j] += s;
    }
  }
}

// C (m x n) += A^T B where A is k x m and B is k x n; rows of C are independent.
inline void gemm_tn_rows(const double* a, const double* b, double* c, Dims d, std::size_t r0,
                         std::size_t r1) {
  for (std::size_t i = r0; i < r1; ++i) {
    double* ci = c + i * d.n;
    for (std::size_t p = 0; p < d.k; ++p) {
      const double av = a[p * d.m + i];
      if (av == 0.0) continue;
      const double* bp = b + p * d.n;
      for (std::size_t j = 0; j < d.n; ++j) ci[j] += av * bp[j];
    }
  }
}

inline double cosine_rows(const double* x, std::size_t i, std::size_t j, std::size_t dim,
                          const std::vector<double>& norms) {
  if (norms[i] == 0.0 || norms[j] == 0.0) return 0.0;
  double s = 0.0;
  for (std::size_t t = 0; t < dim; ++t) s += x[i * dim + t] * x[j * dim + t];
  return s / (norms[i] * norms[j]);
}

std::vector<double> row_norms(const double* x, std::size_t n, std::size_t dim) {
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t t = 0; t < dim; ++t) s += x[i * dim + t] * x[i * dim + t];
    norms[i] = std::sqrt(s);
  }
  return norms;
}

bool small(Dims d) { return d.m * d.k * d.n < kParallelThreshold; }

}  // namespace

namespace serial {

void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c, Dims d) {
  gemm_nn_rows(a.data(), b.data(), c.data(), d, 0, d.m);
}

void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c, Dims d) {
  gemm_nt_rows(a.data(), b.data(), c.data(), d, 0, d.m);
}

void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c, Dims d) {
  gemm_tn_rows(a.data(), b.data(), c.data(), d, 0, d.m);
}

std::vector<double> pairwise_cosine(std::span<const double> x, std::size_t n, std::size_t dim) {
  auto norms = row_norms(x.data(), n, dim);
  std::vector<double> out(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = cosine_rows(x.data(), i, j, dim, norms);
  return out;
}

std::vector<double> presence(const std::vector<std::vector<std::size_t>>& members,
                             std::size_t cols) {
  std::vector<double> out(members.size() * cols, 0.0);
  for (std::size_t r = 0; r < members.size(); ++r)
    for (auto c : members[r]) out[r * cols + c] = 1.0;
  return out;
}

}  // namespace serial

namespace parallel {

void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c, Dims d) {
  if (small(d)) return serial::gemm_nn(a, b, c, d);
  const auto m = static_cast<long>(d.m);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < m; ++i)
    gemm_nn_rows(a.data(), b.data(), c.data(), d, static_cast<std::size_t>(i),
                 static_cast<std::size_t>(i) + 1);
}

void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c, Dims d) {
  if (small(d)) return serial::gemm_nt(a, b, c, d);
  const auto m = static_cast<long>(d.m);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < m; ++i)
    gemm_nt_rows(a.data(), b.data(), c.data(), d, static_cast<std::size_t>(i),
                 static_cast<std::size_t>(i) + 1);
}

void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c, Dims d) {
  if (small(d)) return serial::gemm_tn(a, b, c, d);
  const auto m = static_cast<long>(d.m);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < m; ++i)
    gemm_tn_rows(a.data(), b.data(), c.data(), d, static_cast<std::size_t>(i),
                 static_cast<std::size_t>(i) + 1);
}

std::vector<double> pairwise_cosine(std::span<const double> x, std::size_t n, std::size_t dim) {
  auto norms = row_norms(x.data(), n, dim);
  std::vector<double> out(n * n);
  const auto rows = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic, 8)
  for (long ii = 0; ii < rows; ++ii) {
    auto i = static_cast<std::size_t>(ii);
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = cosine_rows(x.data(), i, j, dim, norms);
  }
  return out;
}

std::vector<double> presence(const std::vector<std::vector<std::size_t>>& members,
                             std::size_t cols) {
  std::vector<double> out(members.size() * cols, 0.0);
  const auto rows = static_cast<long>(members.size());
#pragma omp parallel for schedule(static)
  for (long r = 0; r < rows; ++r)
    for (auto c : members[static_cast<std::size_t>(r)])
      out[static_cast<std::size_t>(r) * cols + c] = 1.0;
  return out;
}

}  // namespace parallel

}  // namespace socq::kernels
