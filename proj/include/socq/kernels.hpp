#pragma once

// Dense kernels used by the model, embedding and evaluation code.
//
// Every kernel exists twice: `serial` is the straightforward reference that
// the tests compare against, `parallel` splits the outer loop with OpenMP.
// Both write each output element from exactly one thread with the same
// summation order, so their results are bitwise identical.

#include <cstddef>
#include <span>
#include <vector>

namespace socq::kernels {

// Row-major matrix shapes. All kernels accumulate into C (C += op(A) op(B)).
struct Dims {
  std::size_t m, k, n;
};

namespace serial {
void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c, Dims d);
void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c, Dims d);
void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c, Dims d);
// n x n cosine similarities between the rows of x (n x dim).
std::vector<double> pairwise_cosine(std::span<const double> x, std::size_t n, std::size_t dim);
// counts[r * cols + c] = 1 if c appears in members[r]
std::vector<double> presence(const std::vector<std::vector<std::size_t>>& members,
                             std::size_t cols);
}  // namespace serial

namespace parallel {
void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c, Dims d);
void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c, Dims d);
void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c, Dims d);
std::vector<double> pairwise_cosine(std::span<const double> x, std::size_t n, std::size_t dim);
std::vector<double> presence(const std::vector<std::vector<std::size_t>>& members,
                             std::size_t cols);
}  // namespace parallel

// Below this many multiply-adds the parallel kernels fall back to serial.
inline constexpr std::size_t kParallelThreshold = 1 << 15;

}  // namespace socq::kernels
