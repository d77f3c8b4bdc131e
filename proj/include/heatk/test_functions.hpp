#pragma once

#include <vector>

namespace heatk {

/// Value and gradient of a scalar function at one point.
struct ValueGrad {
  double v = 0.0;
  double dx = 0.0;
  double dy = 0.0;
};

/// v(x, y) = x^m (1 - x)^n. Vanishes on x = 0 and x = 1 for m, n >= 1, so it
/// is an admissible variation on the Dirichlet edges of the unit square.
struct TestFunction {
  int m = 1;
  int n = 1;
  int r = 1;  // single index, r = (m - 1) * M + n

  ValueGrad eval(double x, double y) const;
};

/// All (m, n) with 1 <= m, n <= M ordered by r = (m - 1) * M + n.
std::vector<TestFunction> enumerate_family(int M);

inline ValueGrad eval_with_grad(const TestFunction& tf, double x, double y) {
  return tf.eval(x, y);
}

}  // namespace heatk
