#include <doctest.h>

#include <cmath>
#include <random>

#include "heatk/error.hpp"
#include "heatk/test_functions.hpp"

using namespace heatk;

TEST_CASE("enumerate_family") {
  CHECK(enumerate_family(1).size() == 1);
  CHECK(enumerate_family(5).size() == 25);
  const auto f2 = enumerate_family(2);
  const int mn[4][2] = {{1, 1}, {1, 2}, {2, 1}, {2, 2}};
  for (int r = 0; r < 4; ++r) {
    CHECK(f2[r].m == mn[r][0]);
    CHECK(f2[r].n == mn[r][1]);
    CHECK(f2[r].r == r + 1);
  }
  for (const TestFunction& t : enumerate_family(7)) CHECK(t.r == (t.m - 1) * 7 + t.n);
  CHECK_THROWS_AS(enumerate_family(0), InvalidArgument);
}

TEST_CASE("closed-form values") {
  const ValueGrad a = eval_with_grad({1, 1, 1}, 0.5, 0.2);
  CHECK(a.v == doctest::Approx(0.25));
  CHECK(a.dx == doctest::Approx(0.0));
  CHECK(a.dy == 0.0);
  const ValueGrad b = eval_with_grad({2, 1, 3}, 0.5, 0.9);
  CHECK(b.v == doctest::Approx(0.125));
  CHECK(b.dx == doctest::Approx(0.25));
  CHECK(b.dy == 0.0);
}

TEST_CASE("boundary vanishing and y-independence") {
  for (const TestFunction& t : enumerate_family(6)) {
    for (double y : {0.0, 0.3, 1.0}) {
      CHECK(t.eval(0.0, y).v == 0.0);
      CHECK(t.eval(1.0, y).v == 0.0);
      CHECK(t.eval(0.37, y).dy == 0.0);
    }
  }
}

TEST_CASE("derivative matches central differences") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> U(0.01, 0.99);
  const double h = 1e-6;
  for (const TestFunction& t : enumerate_family(5)) {
    for (int k = 0; k < 100; ++k) {
      const double x = U(gen), y = U(gen);
      const double fd = (t.eval(x + h, y).v - t.eval(x - h, y).v) / (2 * h);
      const double an = t.eval(x, y).dx;
      CHECK(std::abs(fd - an) <= 1e-8 * std::max(std::abs(an), 1e-2));
    }
  }
}
