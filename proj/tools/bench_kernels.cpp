// Times the serial and OpenMP kernels on random operators and checks that
// both give the same bits.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <vector>

#include "varclust/kernels.hpp"

using namespace varclust;

namespace {

template <class F>
double best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  const Index n = argc > 1 ? std::atol(argv[1]) : 60;
  const Index k = argc > 2 ? std::atol(argv[2]) : 40;
  const int reps = 5;

  std::mt19937_64 rng(7);
  std::normal_distribution<double> z;
  std::vector<Matrix> ops;
  for (Index i = 0; i < k; ++i) {
    Matrix x(n, 3);
    for (Index r = 0; r < n; ++r)
      for (Index c = 0; c < 3; ++c) x(r, c) = z(rng);
    ops.push_back(x * x.transpose() / static_cast<double>(n));
  }
  std::vector<const Matrix*> refs;
  for (const auto& m : ops) refs.push_back(&m);
  const Weights w = Weights::uniform(n);
  Matrix u(n, 3);
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < 3; ++c) u(r, c) = z(rng);
  const Vector coeff = Vector::Constant(k, 1.0 / static_cast<double>(k));

  std::printf("n = %ld, K = %ld, threads = %d\n", static_cast<long>(n), static_cast<long>(k), kernels::thread_count());
  std::printf("%-16s %12s %12s %8s %s\n", "kernel", "serial ms", "omp ms", "speedup", "identical");

  bool all_same = true;
  auto row = [&](const char* name, auto serial, auto parallel) {
    Matrix a, b;
    const double ts = best_of(reps, [&] { a = serial(); });
    const double tp = best_of(reps, [&] { b = parallel(); });
    const bool same = a == b;
    all_same = all_same && same;
    std::printf("%-16s %12.3f %12.3f %8.2f %s\n", name, ts, tp, ts / tp, same ? "yes" : "NO");
  };
  row("gram", [&] { return kernels::serial::gram(refs); }, [&] { return kernels::gram(refs); });
  row("dot_matrix", [&] { return kernels::serial::dot_matrix(refs, refs); },
      [&] { return kernels::dot_matrix(refs, refs); });
  row("weighted_sum", [&] { return kernels::serial::weighted_sum(refs, coeff); },
      [&] { return kernels::weighted_sum(refs, coeff); });
  row("quadratic_forms", [&] { return kernels::serial::quadratic_forms(refs, u, w); },
      [&] { return kernels::quadratic_forms(refs, u, w); });
  return all_same ? 0 : 1;
}
