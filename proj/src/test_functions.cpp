#include "heatk/test_functions.hpp"

#include <cmath>
#include <string>

#include "heatk/error.hpp"

namespace heatk {

namespace {

double ipow(double base, int e) {
  double out = 1.0;
  for (int k = 0; k < e; ++k) out *= base;
  return out;
}

}  // namespace

ValueGrad TestFunction::eval(double x, double /*y*/) const {
  const double w = 1.0 - x;
  ValueGrad out;
  out.v = ipow(x, m) * ipow(w, n);
  out.dx = m * ipow(x, m - 1) * ipow(w, n) - n * ipow(x, m) * ipow(w, n - 1);
  out.dy = 0.0;
  return out;
}

std::vector<TestFunction> enumerate_family(int M) {
  if (M < 1) throw InvalidArgument("family size M must be >= 1, got " + std::to_string(M));
  std::vector<TestFunction> family;
  family.reserve(static_cast<std::size_t>(M) * M);
  for (int m = 1; m <= M; ++m) {
    for (int n = 1; n <= M; ++n) family.push_back({m, n, (m - 1) * M + n});
  }
  return family;
}

}  // namespace heatk
