#pragma once

#include <cmath>
#include <initializer_list>
#include <limits>

namespace hypdamp {

// log(exp(a) + exp(b)) without leaving log space.
inline double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

inline double log_add(std::initializer_list<double> terms) {
  double acc = -std::numeric_limits<double>::infinity();
  for (double t : terms) acc = log_add(acc, t);
  return acc;
}

}  // namespace hypdamp
