#include "doctest.h"

#include <cmath>
#include <numeric>
#include <vector>

#include "hypdamp/parallel.hpp"

namespace par = hypdamp::par;

TEST_CASE("parallel map matches the serial reference bitwise") {
  const std::size_t n = 4096;
  std::vector<double> a(n), b(n);
  auto body = [](std::vector<double>& out) {
    return [&out](std::size_t i) {
      double x = static_cast<double>(i) * 0.37 + 1.0;
      out[i] = std::sin(x) * std::exp(-x / 100.0) + std::log(x);
    };
  };
  par::for_each_index_serial(n, body(a));
  par::for_each_index(n, body(b));
  CHECK(a == b);
}

TEST_CASE("jobs resolution prefers explicit argument") {
  CHECK(par::resolve_jobs(3) == 3);
  CHECK(par::resolve_jobs(0) >= 1);
}
