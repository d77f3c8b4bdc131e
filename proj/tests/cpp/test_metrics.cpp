#include <doctest.h>

#include <random>
#include <sstream>

#include "heatk/error.hpp"
#include "heatk/metrics.hpp"

using namespace heatk;

TEST_CASE("relative_l2") {
  const Grid g = build_grid(Domain::unit_square(), 10, 10);
  const ScalarField one = ScalarField::constant(g, 1.0);
  CHECK(relative_l2(one, one) == 0.0);
  CHECK(relative_l2(ScalarField::constant(g, 2.0), one) == doctest::Approx(1.0));
  std::vector<double> v(100, 1.0);
  v[37] = 2.0;
  CHECK(relative_l2(ScalarField(g, v), one) == doctest::Approx(0.1));
  CHECK_THROWS_AS(relative_l2(one, ScalarField::constant(g, 0.0)), InvalidArgument);
  CHECK_THROWS_AS(relative_l2(one, ScalarField::constant(build_grid(Domain::unit_square(), 5, 20), 1.0)),
                  InvalidArgument);
}

TEST_CASE("triangle inequality") {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> N(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> a(30), b(30), c(30);
    for (int i = 0; i < 30; ++i) {
      a[i] = N(gen);
      b[i] = N(gen);
      c[i] = N(gen);
    }
    const double nc = relative_l2(std::vector<double>(30, 0.0), c);  // |c| / |c| = 1
    CHECK(nc == doctest::Approx(1.0));
    // |a - c| <= |a - b| + |b - c|, all scaled by |c|.
    const double bc = relative_l2(b, c);
    std::vector<double> ab_scaled(30);
    double nb = 0, ncc = 0;
    for (int i = 0; i < 30; ++i) {
      nb += b[i] * b[i];
      ncc += c[i] * c[i];
    }
    const double ab = relative_l2(a, b) * std::sqrt(nb / ncc);
    CHECK(relative_l2(a, c) <= ab + bc + 1e-12);
  }
}

TEST_CASE("classify") {
  const MaterialPair pr(1.0, 300.0);
  CHECK(classify(std::vector<double>(4, 300.0), pr) == std::vector<double>(4, 300.0));
  CHECK(classify(std::vector<double>{150.5}, pr) == std::vector<double>{1.0});
  CHECK(classify(std::vector<double>{0.4, 180.0, 150.5}, pr) ==
        std::vector<double>{1.0, 300.0, 1.0});
  CHECK(classify(std::vector<double>{150.50001, -7.0, 1e9}, pr) ==
        std::vector<double>{300.0, 1.0, 300.0});
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> U(-100.0, 500.0);
  std::vector<double> K(50);
  for (double& v : K) v = U(gen);
  const auto c = classify(K, pr);
  CHECK(classify(c, pr) == c);
}

TEST_CASE("misclassification rate") {
  std::vector<double> a(100, 1.0), b(100, 1.0), comp(100, 300.0);
  CHECK(misclassification_rate(a, b) == 0.0);
  CHECK(misclassification_rate(a, comp) == 1.0);
  for (int i = 0; i < 7; ++i) b[i * 13] = 300.0;
  CHECK(misclassification_rate(a, b) == doctest::Approx(0.07));
  CHECK(misclassification_rate(b, a) == misclassification_rate(a, b));
  std::vector<std::uint8_t> ex(100, 0);
  ex[0] = ex[13] = 1;
  ex[1] = 1;
  CHECK(misclassification_rate(a, b, ex) == doctest::Approx(5.0 / 97));
  CHECK_THROWS_AS(misclassification_rate(a, b, std::vector<std::uint8_t>(100, 1)), InvalidArgument);
  CHECK_THROWS_AS(misclassification_rate(a, std::vector<double>(99, 1.0)), InvalidArgument);
}

TEST_CASE("flat-gradient mask and pair inference") {
  const Grid g = build_grid(Domain::unit_square(), 3, 1);
  const ScalarField ux(g, {0.0, 1e-7, 2.0}), uy(g, {0.0, 0.0, 0.0});
  const auto m = flat_gradient_mask(ux, uy);
  CHECK(m == std::vector<std::uint8_t>{1, 1, 0});
  CHECK(flat_gradient_mask(ux, uy, 1e-8) == std::vector<std::uint8_t>{1, 0, 0});
  const auto pr = infer_pair(ScalarField(g, {20.0, 125.0, 20.0}));
  REQUIRE(pr);
  CHECK(*pr == MaterialPair(20.0, 125.0));
  CHECK_FALSE(infer_pair(ScalarField(g, {1.0, 1.0, 1.0})));
  CHECK_FALSE(infer_pair(ScalarField(g, {1.0, 2.0, 3.0})));
}

TEST_CASE("compare and report") {
  const Grid g = build_grid(Domain::unit_square(), 2, 2);
  const MaterialPair pr(1.0, 300.0);
  const ScalarField truth(g, {1, 300, 1, 300});
  const ScalarField rec(g, {2, 290, 200, 310});
  const std::vector<std::uint8_t> flat{0, 0, 1, 0};
  const MetricsReport r = compare(rec, truth, pr, flat);
  CHECK(r.cells == 4);
  CHECK(r.excluded == 1);
  CHECK(r.misclassification == doctest::Approx(0.25));
  REQUIRE(r.misclassification_identifiable);
  CHECK(*r.misclassification_identifiable == 0.0);
  std::ostringstream os;
  write_report(os, r);
  CHECK(os.str().find("misclassification=0.25\n") != std::string::npos);
  CHECK(os.str().find("excluded_flat=1\n") != std::string::npos);
  std::ostringstream csv;
  write_report_csv(csv, "t", r, true);
  CHECK(csv.str().rfind("experiment,", 0) == 0);
  const MetricsReport same = compare(truth, truth, pr);
  CHECK(same.misclassification == 0.0);
  CHECK(same.relative_l2 == 0.0);
  CHECK_FALSE(same.misclassification_identifiable);
}
