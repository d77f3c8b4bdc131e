#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "heatk/assembler.hpp"
#include "heatk/regularizers.hpp"

namespace heatk {

/// Thin SVD with singular values at or below threshold treated as zero.
struct TruncatedSvd {
  Eigen::MatrixXd U;
  Eigen::VectorXd sigma;  // descending, length min(rows, cols)
  Eigen::MatrixXd V;
  double threshold = 0.0;
  Eigen::Index rank = 0;

  /// Minimal-norm least-squares solution using the retained triples.
  Eigen::VectorXd solve(const Eigen::Ref<const Eigen::VectorXd>& b) const;
};

/// Default relative truncation: machine epsilon * max(rows, cols).
double default_truncation(Eigen::Index rows, Eigen::Index cols);

/// relative_tol < 0 selects default_truncation.
TruncatedSvd truncated_svd(const Eigen::Ref<const Eigen::MatrixXd>& A, double relative_tol = -1.0);

struct Conditioning {
  double sigma_max = 0.0;
  double sigma_min = 0.0;  // smallest computed singular value
  double condition_number = 1.0;  // +inf when sigma_min == 0
  double threshold = 0.0;          // truncation level used by the solvers
};

Conditioning condition_number(const DesignSystem& system);
Conditioning condition_number(const Eigen::Ref<const Eigen::MatrixXd>& A);

struct SolveDiagnostics {
  double residual_norm = 0.0;
  double penalty_value = 0.0;
  int iterations = 0;
  bool converged = true;
  bool degenerate = false;  // A == 0
  double gradient_norm = 0.0;
  Conditioning conditioning;
  Eigen::Index rank = 0;
  std::string message;
};

struct InverseResult {
  Eigen::VectorXd K;
  SolveDiagnostics diagnostics;
  std::vector<double> objective_history;  // W1 only: J at each accepted iterate
};

/// K = A^+ F through the truncated SVD.
InverseResult min_norm_least_squares(const DesignSystem& system, double relative_tol = -1.0);

/// Minimizer of |A K - F|^2 + alpha |B (K - reference)|^2 with B = diag(mask),
/// minimal in norm among all minimizers. Equivalent to the minimal-norm
/// solution of the stacked system [A; sqrt(alpha) B] K = [F; sqrt(alpha) B ref].
///
/// Solved by eliminating the masked block: for masked cells the optimal
/// deviation is A_S^T (A_S A_S^T + alpha I)^{-1} r, which leaves a weighted
/// least-squares problem in the unmasked cells with the R x R weight
/// alpha (A_S A_S^T + alpha I)^{-1}. Both factorizations are R-dimensional and
/// independent of alpha except through scalar weights, so one instance can
/// serve a whole alpha sweep.
class MaskedTikhonovSolver {
 public:
  MaskedTikhonovSolver(const DesignSystem& system, std::span<const std::uint8_t> mask,
                       double reference);

  InverseResult solve(double alpha) const;
  const Conditioning& conditioning() const { return cond_; }

 private:
  Eigen::MatrixXd A_;
  Eigen::VectorXd F_;
  std::vector<std::uint8_t> mask_;
  double reference_;
  std::vector<Eigen::Index> masked_;
  std::vector<Eigen::Index> free_;
  Eigen::MatrixXd A_free_;
  Eigen::MatrixXd Us_;       // R x R left singular vectors of A_S
  Eigen::VectorXd s_;        // length R, zero-padded
  Eigen::MatrixXd Vs_;       // |S| x p
  Eigen::VectorXd F_shift_;  // F - reference * A_S 1
  Conditioning cond_;
};

InverseResult solve_w2(const DesignSystem& system, const GradientMask& mask,
                       const MaterialPair& pair, double alpha);

struct W1Options {
  int max_iters = 5000;
  double grad_tol = 1e-8;
  double armijo = 1e-4;
  int max_halvings = 60;
  // Largest change of any single entry per iteration, as a fraction of
  // k_U - k_L. Keeps entries from jumping across the barrier between wells.
  double max_step_fraction = 0.25;
};

/// Steepest descent with backtracking on J(K) = |A K - F|^2 + alpha W1(K).
/// The trial step is the Barzilai-Borwein length, halved until the
/// sufficient-decrease condition holds, so J never increases.
InverseResult solve_w1(const DesignSystem& system, const MaterialPair& pair, double alpha,
                       const Eigen::VectorXd& init, const W1Options& options = {});

/// Setting-1 solution clipped to [k_L, k_U].
Eigen::VectorXd default_w1_init(const DesignSystem& system, const MaterialPair& pair);

enum class Penalizer { none, w1, w2 };

/// One regularized problem. alpha == 0 only with Penalizer::none; a mask is
/// required exactly when the penalizer is W2.
struct TikhonovProblem {
  DesignSystem system;
  double alpha = 0.0;
  Penalizer penalizer = Penalizer::none;
  std::optional<MaterialPair> pair;
  std::optional<GradientMask> mask;
  W1Options w1;
  std::optional<Eigen::VectorXd> init;

  void validate() const;
};

InverseResult solve(const TikhonovProblem& problem);

}  // namespace heatk
