#include <doctest.h>

#include <cmath>
#include <random>

#include "heatk/error.hpp"
#include "heatk/inverse_solver.hpp"
#include "heatk/pipeline.hpp"
#include "oracles.hpp"

using namespace heatk;

namespace {

DesignSystem sys(Eigen::MatrixXd A, Eigen::VectorXd F) {
  DesignSystem s;
  s.A = std::move(A);
  s.F = std::move(F);
  return s;
}

double rel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

}  // namespace

TEST_CASE("min-norm least squares examples") {
  const Eigen::VectorXd F = Eigen::VectorXd::LinSpaced(4, -1.0, 2.0);
  CHECK(rel(min_norm_least_squares(sys(Eigen::MatrixXd::Identity(4, 4), F)).K, F) <= 1e-15);

  Eigen::MatrixXd A(1, 2);
  A << 1, 1;
  const Eigen::VectorXd K = min_norm_least_squares(sys(A, Eigen::VectorXd::Constant(1, 2.0))).K;
  CHECK(K[0] == doctest::Approx(1.0));
  CHECK(K[1] == doctest::Approx(1.0));
  // Every solution is (1 + t, 1 - t); none on a fine sweep is shorter.
  for (int i = -1000; i <= 1000; ++i) {
    const double t = i * 1e-3;
    CHECK(std::hypot(1 + t, 1 - t) >= K.norm() - 1e-15);
  }
}

TEST_CASE("min-norm least squares against the pseudo-inverse oracle") {
  std::mt19937_64 gen(21);
  std::normal_distribution<double> N(0.0, 1.0);
  for (int t = 0; t < 10; ++t) {
    Eigen::MatrixXd A(5, 12);
    for (auto& v : A.reshaped()) v = N(gen);
    if (t % 2) A.row(4) = A.row(0) - 2.0 * A.row(1);  // rank 4
    Eigen::VectorXd F(5);
    for (auto& v : F) v = N(gen);
    const Eigen::VectorXd K = min_norm_least_squares(sys(A, F)).K;
    CHECK(rel(K, oracle::pinv_from_triples(A) * F) <= 1e-10);
  }
}

TEST_CASE("zero matrix is flagged degenerate") {
  const InverseResult r = min_norm_least_squares(sys(Eigen::MatrixXd::Zero(3, 5), Eigen::VectorXd::Zero(3)));
  CHECK(r.diagnostics.degenerate);
  CHECK(r.K.isZero(0.0));
  CHECK(r.diagnostics.rank == 0);
}

TEST_CASE("condition numbers") {
  CHECK(condition_number(Eigen::MatrixXd::Identity(3, 3)).condition_number == doctest::Approx(1.0));
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(2, 2);
  D(0, 0) = 1.0;
  D(1, 1) = 1e-8;
  CHECK(condition_number(D).condition_number == doctest::Approx(1e8));
  D(1, 1) = 0.0;
  CHECK(std::isinf(condition_number(D).condition_number));
}

TEST_CASE("W2 examples") {
  SUBCASE("2 x 2 toy") {
    Eigen::MatrixXd A(2, 2);
    A << 1, 0, 0, 0;
    const std::vector<std::uint8_t> b{0, 1};
    const InverseResult r = MaskedTikhonovSolver(sys(A, Eigen::Vector2d(1, 0)), b, 3.0).solve(1.0);
    CHECK(r.K[0] == doctest::Approx(1.0));
    CHECK(r.K[1] == doctest::Approx(3.0));
  }
  SUBCASE("huge alpha pins every masked cell") {
    std::mt19937_64 gen(4);
    std::normal_distribution<double> N(0.0, 1.0);
    Eigen::MatrixXd A(6, 9);
    for (auto& v : A.reshaped()) v = N(gen);
    Eigen::VectorXd F(6);
    for (auto& v : F) v = 10 * N(gen);
    const DesignSystem s = sys(A, F);
    const double smax = condition_number(s).sigma_max;
    const std::vector<std::uint8_t> all(9, 1);
    const Eigen::VectorXd K = MaskedTikhonovSolver(s, all, 2.0).solve(1e8 * smax * smax).K;
    CHECK((K.array() - 2.0).abs().maxCoeff() <= 1e-3 * 2.0);
  }
  SUBCASE("small alpha approaches the min-norm solution") {
    std::mt19937_64 gen(8);
    std::normal_distribution<double> N(0.0, 1.0);
    Eigen::MatrixXd A(5, 12);
    for (auto& v : A.reshaped()) v = N(gen);
    Eigen::VectorXd F(5);
    for (auto& v : F) v = N(gen);
    const DesignSystem s = sys(A, F);
    const double smax = condition_number(s).sigma_max;
    const std::vector<std::uint8_t> all(12, 1);
    const Eigen::VectorXd K = MaskedTikhonovSolver(s, all, 0.0).solve(1e-12 * smax * smax).K;
    CHECK(rel(K, min_norm_least_squares(s).K) <= 1e-6);
  }
  SUBCASE("invalid input") {
    const DesignSystem s = sys(Eigen::MatrixXd::Identity(2, 2), Eigen::Vector2d(1, 1));
    const std::vector<std::uint8_t> b{1, 0};
    CHECK_THROWS_AS(MaskedTikhonovSolver(s, b, 1.0).solve(0.0), InvalidArgument);
    CHECK_THROWS_AS(MaskedTikhonovSolver(s, std::vector<std::uint8_t>{1}, 1.0), InvalidArgument);
  }
}

TEST_CASE("W2 matches ridge-stabilized least squares") {
  std::mt19937_64 gen(31);
  std::normal_distribution<double> N(0.0, 1.0);
  for (int t = 0; t < 8; ++t) {
    const int R = 4 + t % 3, L = 20 + 4 * t;
    Eigen::MatrixXd A(R, L);
    for (auto& v : A.reshaped()) v = N(gen);
    Eigen::VectorXd F(R);
    for (auto& v : F) v = N(gen);
    std::vector<std::uint8_t> b(L);
    for (auto& v : b) v = (gen() % 3) != 0;
    const DesignSystem s = sys(A, F);
    const double smax = condition_number(s).sigma_max;
    for (double a : {1e-3, 1.0, 1e2}) {
      const double alpha = a * smax * smax;
      const Eigen::VectorXd K = MaskedTikhonovSolver(s, b, 1.5).solve(alpha).K;
      const Eigen::VectorXd ref = oracle::ridge_w2(A, F, b, 1.5, alpha, 1e-20 * smax * smax);
      CHECK(rel(K, ref) <= 1e-6);
    }
  }
}

TEST_CASE("W2 trade-off is monotone in alpha") {
  std::mt19937_64 gen(9);
  std::normal_distribution<double> N(0.0, 1.0);
  Eigen::MatrixXd A(8, 30);
  for (auto& v : A.reshaped()) v = N(gen);
  Eigen::VectorXd F(8);
  for (auto& v : F) v = 5 * N(gen);
  std::vector<std::uint8_t> b(30);
  for (auto& v : b) v = gen() & 1;
  const DesignSystem s = sys(A, F);
  const MaskedTikhonovSolver solver(s, b, 1.0);
  const auto alphas = default_alphas(condition_number(s).sigma_max, 30);
  double prev_rho = -1.0, prev_eta = INFINITY;
  for (double a : alphas) {
    const InverseResult r = solver.solve(a);
    // round-off floor: rho reaches ~1e-15 once A has full row rank
    CHECK(r.diagnostics.residual_norm >= prev_rho * (1 - 1e-9) - 1e-12 * F.norm());
    CHECK(r.diagnostics.penalty_value <= prev_eta * (1 + 1e-9) + 1e-20);
    prev_rho = r.diagnostics.residual_norm;
    prev_eta = r.diagnostics.penalty_value;
  }
}

TEST_CASE("W1 descent") {
  const MaterialPair pr(1.0, 3.0);
  SUBCASE("no data: entries roll into the nearer well") {
    const DesignSystem s = sys(Eigen::MatrixXd::Zero(2, 4), Eigen::VectorXd::Zero(2));
    Eigen::VectorXd init(4);
    init << 1.4, 2.6, 1.9, 2.2;
    const InverseResult r = solve_w1(s, pr, 1.0, init);
    CHECK(r.diagnostics.converged);
    CHECK(r.K[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.K[1] == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(r.K[2] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.K[3] == doctest::Approx(3.0).epsilon(1e-6));
  }
  SUBCASE("an exact two-level solution is returned unchanged") {
    Eigen::MatrixXd A(2, 3);
    A << 1, 2, 0, 0, 1, 1;
    const Eigen::Vector3d K0(1, 3, 1);
    const InverseResult r = solve_w1(sys(A, A * K0), pr, 0.5, K0);
    CHECK(r.K == K0);
    CHECK(r.diagnostics.iterations == 0);
    CHECK(r.diagnostics.converged);
  }
  SUBCASE("objective never increases") {
    std::mt19937_64 gen(12);
    std::normal_distribution<double> N(0.0, 1.0);
    Eigen::MatrixXd A(5, 20);
    for (auto& v : A.reshaped()) v = N(gen);
    Eigen::VectorXd F(5);
    for (auto& v : F) v = 4 * N(gen);
    const DesignSystem s = sys(A, F);
    const InverseResult r = solve_w1(s, pr, 0.3, default_w1_init(s, pr));
    REQUIRE(r.objective_history.size() >= 2);
    for (std::size_t i = 1; i < r.objective_history.size(); ++i) {
      CHECK(r.objective_history[i] <= r.objective_history[i - 1]);
    }
    CHECK(r.diagnostics.gradient_norm >= 0.0);
  }
  SUBCASE("iteration cap is reported") {
    const DesignSystem s = sys(Eigen::MatrixXd::Zero(1, 2), Eigen::VectorXd::Zero(1));
    W1Options opt;
    opt.max_iters = 2;
    opt.grad_tol = 1e-30;
    const InverseResult r = solve_w1(s, pr, 1.0, Eigen::Vector2d(1.2, 2.9), opt);
    CHECK_FALSE(r.diagnostics.converged);
    CHECK(r.diagnostics.iterations == 2);
    CHECK(r.diagnostics.message == "iteration limit reached");
  }
  SUBCASE("invalid input") {
    const DesignSystem s = sys(Eigen::MatrixXd::Identity(2, 2), Eigen::Vector2d(1, 1));
    CHECK_THROWS_AS(solve_w1(s, pr, 0.0, Eigen::Vector2d(1, 1)), InvalidArgument);
    CHECK_THROWS_AS(solve_w1(s, pr, 1.0, Eigen::Vector3d(1, 1, 1)), InvalidArgument);
  }
  SUBCASE("init is the clipped least-squares solution") {
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(3, 3);
    const Eigen::VectorXd K0 = default_w1_init(sys(A, Eigen::Vector3d(-5, 2, 9)), pr);
    CHECK(K0 == Eigen::Vector3d(1, 2, 3));
  }
}

TEST_CASE("TikhonovProblem dispatch and validation") {
  TikhonovProblem p;
  p.system = sys(Eigen::MatrixXd::Identity(2, 2), Eigen::Vector2d(2, 5));
  CHECK(solve(p).K == Eigen::Vector2d(2, 5));
  p.penalizer = Penalizer::w2;
  p.alpha = 1.0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);  // no pair, no mask
  p.pair = MaterialPair(1.0, 3.0);
  GradientMask m;
  m.b = {1, 0};
  p.mask = m;
  const Eigen::VectorXd K = solve(p).K;
  CHECK(K[0] == doctest::Approx(1.5));
  CHECK(K[1] == doctest::Approx(5.0));
  p.penalizer = Penalizer::none;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);  // alpha must be 0 without a penalizer
}

TEST_CASE("Case I: ill-conditioning and the min-norm property") {
  const PhantomSpec spec = make_case(CaseId::I);
  const Grid grid = build_grid(Domain::unit_square(), 100, 100);
  const DesignSystem s = assemble_from(forward_samples(spec, grid, 200), spec.c, 5);
  const Conditioning c = condition_number(s);
  CHECK(c.condition_number >= 1e12);
  const TruncatedSvd svd = truncated_svd(s.A);
  const Eigen::VectorXd K = svd.solve(s.F);
  const Eigen::VectorXd r = s.A * K - s.F;
  CHECK((s.A.transpose() * r).norm() <= 1e-8 * s.A.norm() * s.F.norm());
  // Component of K outside the retained row space.
  const Eigen::MatrixXd Vr = svd.V.leftCols(svd.rank);
  const Eigen::VectorXd outside = K - Vr * (Vr.transpose() * K);
  CHECK(outside.norm() <= 1e-8 * K.norm());
}
