// Serial vs OpenMP timings for the dense kernels.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <vector>

#include "socq/kernels.hpp"

using namespace socq::kernels;

namespace {

double time_ms(const std::function<void()>& f, int reps) {
  f();
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) f();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count() / reps;
}

std::vector<double> random_vec(std::size_t n, std::mt19937& rng) {
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

void row(const char* name, double serial_ms, double parallel_ms) {
  std::printf("%-18s %10.3f %10.3f %8.2fx\n", name, serial_ms, parallel_ms, serial_ms / parallel_ms);
}

}  // namespace

int main() {
  std::mt19937 rng(1);
  std::printf("threads: %d\n%-18s %10s %10s %9s\n", omp_get_max_threads(), "kernel", "serial ms", "omp ms", "speedup");

  for (std::size_t n : {64u, 256u, 512u}) {
    const Dims d{n, n, n};
    auto a = random_vec(n * n, rng), b = random_vec(n * n, rng);
    std::vector<double> c(n * n);
    const int reps = n > 256 ? 3 : 20;
    char name[32];
    std::snprintf(name, sizeof name, "gemm_nn %zu", n);
    row(name, time_ms([&] { serial::gemm_nn(a, b, c, d); }, reps),
        time_ms([&] { parallel::gemm_nn(a, b, c, d); }, reps));
    std::snprintf(name, sizeof name, "gemm_nt %zu", n);
    row(name, time_ms([&] { serial::gemm_nt(a, b, c, d); }, reps),
        time_ms([&] { parallel::gemm_nt(a, b, c, d); }, reps));
    std::snprintf(name, sizeof name, "gemm_tn %zu", n);
    row(name, time_ms([&] { serial::gemm_tn(a, b, c, d); }, reps),
        time_ms([&] { parallel::gemm_tn(a, b, c, d); }, reps));
  }

  const std::size_t items = 1000, dim = 256;
  auto x = random_vec(items * dim, rng);
  row("pairwise_cos 1000", time_ms([&] { serial::pairwise_cosine(x, items, dim); }, 3),
      time_ms([&] { parallel::pairwise_cosine(x, items, dim); }, 3));

  std::vector<std::vector<std::size_t>> members(5000);
  for (auto& m : members)
    for (int k = 0; k < 40; ++k) m.push_back(rng() % 2000);
  row("presence 5000x2000", time_ms([&] { serial::presence(members, 2000); }, 5),
      time_ms([&] { parallel::presence(members, 2000); }, 5));
  return 0;
}
