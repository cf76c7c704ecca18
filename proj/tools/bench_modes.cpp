// Compares the serial reference map against the OpenMP map on a
// representative kernel: a family of mode integrations over a rough
// coefficient.  Results must agree bitwise.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#include "hypdamp/coefficients.hpp"
#include "hypdamp/mode_solver.hpp"
#include "hypdamp/parallel.hpp"

using namespace hypdamp;

namespace {

std::vector<double> run_family(const Coefficient& c, const std::vector<double>& lambdas,
                               bool parallel, double horizon) {
  std::vector<double> out(lambdas.size());
  auto body = [&](std::size_t i) {
    ModeParams p{lambdas[i], 0.3, 1.0};
    Trajectory traj = integrate(p, c, {1.0, 0.0}, 0.0, horizon, 1e-9);
    out[i] = traj.energies.back().logE_classic;
  };
  if (parallel)
    par::for_each_index(lambdas.size(), body);
  else
    par::for_each_index_serial(lambdas.size(), body);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  int n = argc > 1 ? std::atoi(argv[1]) : 24;
  double horizon = argc > 2 ? std::atof(argv[2]) : 3.0;
  Coefficient c = synthesize_hoelder(0.6, 0.2, 42, 1.7);
  std::vector<double> lambdas;
  for (int i = 0; i < n; ++i) lambdas.push_back(8.0 * std::pow(1.35, i));

  using clock = std::chrono::steady_clock;
  auto t0 = clock::now();
  auto serial = run_family(c, lambdas, false, horizon);
  auto t1 = clock::now();
  auto parallel = run_family(c, lambdas, true, horizon);
  auto t2 = clock::now();

  double max_diff = 0.0;
  for (std::size_t i = 0; i < serial.size(); ++i)
    max_diff = std::max(max_diff, std::fabs(serial[i] - parallel[i]));

  double ts = std::chrono::duration<double>(t1 - t0).count();
  double tp = std::chrono::duration<double>(t2 - t1).count();
  std::printf("modes            : %d (lambda %.1f .. %.1f, horizon %.1f)\n", n, lambdas.front(),
              lambdas.back(), horizon);
  std::printf("serial reference : %8.3f s\n", ts);
  std::printf("openmp map       : %8.3f s  (x%.2f, %d workers%s)\n", tp, ts / tp,
              par::resolve_jobs(0), par::parallel_enabled() ? "" : ", OpenMP disabled");
  std::printf("max |difference| : %g\n", max_diff);
  return max_diff == 0.0 ? 0 : 1;
}
