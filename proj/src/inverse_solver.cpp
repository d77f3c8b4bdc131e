#include "heatk/inverse_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/SVD>

#include "heatk/error.hpp"

namespace heatk {

double default_truncation(Eigen::Index rows, Eigen::Index cols) {
  return std::numeric_limits<double>::epsilon() * static_cast<double>(std::max(rows, cols));
}

Eigen::VectorXd TruncatedSvd::solve(const Eigen::Ref<const Eigen::VectorXd>& b) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(V.rows());
  for (Eigen::Index i = 0; i < rank; ++i) {
    x.noalias() += V.col(i) * (U.col(i).dot(b) / sigma[i]);
  }
  return x;
}

TruncatedSvd truncated_svd(const Eigen::Ref<const Eigen::MatrixXd>& A, double relative_tol) {
  TruncatedSvd out;
  const double tol = relative_tol < 0.0 ? default_truncation(A.rows(), A.cols()) : relative_tol;
  if (A.size() == 0) {
    out.U.resize(A.rows(), 0);
    out.V.resize(A.cols(), 0);
    return out;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  out.U = svd.matrixU();
  out.V = svd.matrixV();
  out.sigma = svd.singularValues();
  out.threshold = tol * out.sigma[0];
  for (Eigen::Index i = 0; i < out.sigma.size(); ++i) {
    if (out.sigma[i] > out.threshold) out.rank = i + 1;
  }
  return out;
}

namespace {

Conditioning conditioning_from(const Eigen::VectorXd& sigma, double threshold) {
  Conditioning c;
  if (sigma.size() == 0) return c;
  c.sigma_max = sigma[0];
  c.sigma_min = sigma[sigma.size() - 1];
  c.threshold = threshold;
  if (c.sigma_max == 0.0) {
    c.condition_number = std::numeric_limits<double>::infinity();
  } else {
    c.condition_number = c.sigma_min > 0.0 ? c.sigma_max / c.sigma_min
                                           : std::numeric_limits<double>::infinity();
  }
  return c;
}

double residual_norm(const Eigen::MatrixXd& A, const Eigen::VectorXd& F,
                     const Eigen::VectorXd& K) {
  return (A * K - F).norm();
}

}  // namespace

Conditioning condition_number(const Eigen::Ref<const Eigen::MatrixXd>& A) {
  if (A.size() == 0) return {};
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  const Eigen::VectorXd s = svd.singularValues();
  return conditioning_from(s, default_truncation(A.rows(), A.cols()) * s[0]);
}

Conditioning condition_number(const DesignSystem& system) { return condition_number(system.A); }

InverseResult min_norm_least_squares(const DesignSystem& system, double relative_tol) {
  if (system.A.rows() != system.F.size()) {
    throw InvalidArgument("design system: A has " + std::to_string(system.A.rows()) +
                          " rows but F has " + std::to_string(system.F.size()) + " entries");
  }
  const TruncatedSvd svd = truncated_svd(system.A, relative_tol);
  InverseResult out;
  out.K = svd.solve(system.F);
  auto& d = out.diagnostics;
  d.conditioning = conditioning_from(svd.sigma, svd.threshold);
  d.rank = svd.rank;
  d.degenerate = svd.sigma.size() == 0 || svd.sigma[0] == 0.0;
  if (d.degenerate) d.message = "degenerate system: A is identically zero";
  d.residual_norm = residual_norm(system.A, system.F, out.K);
  return out;
}

MaskedTikhonovSolver::MaskedTikhonovSolver(const DesignSystem& system,
                                           std::span<const std::uint8_t> mask, double reference)
    : A_(system.A), F_(system.F), mask_(mask.begin(), mask.end()), reference_(reference) {
  const Eigen::Index R = A_.rows();
  const Eigen::Index L = A_.cols();
  if (F_.size() != R) throw InvalidArgument("design system: A and F disagree in rows");
  if (static_cast<Eigen::Index>(mask_.size()) != L) {
    throw InvalidArgument("W2 mask has " + std::to_string(mask_.size()) + " entries for " +
                          std::to_string(L) + " unknowns");
  }
  for (Eigen::Index l = 0; l < L; ++l) {
    (mask_[static_cast<std::size_t>(l)] ? masked_ : free_).push_back(l);
  }
  const auto S = static_cast<Eigen::Index>(masked_.size());
  Eigen::MatrixXd A_s(R, S);
  for (Eigen::Index k = 0; k < S; ++k) A_s.col(k) = A_.col(masked_[static_cast<std::size_t>(k)]);
  A_free_.resize(R, static_cast<Eigen::Index>(free_.size()));
  for (std::size_t k = 0; k < free_.size(); ++k) {
    A_free_.col(static_cast<Eigen::Index>(k)) = A_.col(free_[k]);
  }

  s_ = Eigen::VectorXd::Zero(R);
  if (S > 0 && R > 0) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A_s, Eigen::ComputeFullU | Eigen::ComputeThinV);
    Us_ = svd.matrixU();
    Vs_ = svd.matrixV();
    s_.head(svd.singularValues().size()) = svd.singularValues();
    F_shift_ = F_ - reference_ * A_s.rowwise().sum();
  } else {
    Us_ = Eigen::MatrixXd::Identity(R, R);
    Vs_.resize(S, 0);
    F_shift_ = F_;
  }
  cond_ = condition_number(A_);
}

InverseResult MaskedTikhonovSolver::solve(double alpha) const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    std::ostringstream msg;
    msg << "W2 solve needs alpha > 0, got " << alpha;
    throw InvalidArgument(msg.str());
  }
  const Eigen::Index R = A_.rows();
  const Eigen::Index L = A_.cols();

  // Square root of the weight alpha (A_S A_S^T + alpha I)^{-1}.
  Eigen::VectorXd w(R);
  for (Eigen::Index i = 0; i < R; ++i) w[i] = std::sqrt(alpha / (s_[i] * s_[i] + alpha));
  const Eigen::MatrixXd Wh = Us_ * w.asDiagonal() * Us_.transpose();

  Eigen::VectorXd K_free = Eigen::VectorXd::Zero(A_free_.cols());
  Eigen::Index rank = 0;
  if (A_free_.cols() > 0) {
    const Eigen::MatrixXd Aw = Wh * A_free_;
    const Eigen::Index stacked_rows = R + static_cast<Eigen::Index>(masked_.size());
    const TruncatedSvd svd = truncated_svd(Aw, default_truncation(stacked_rows, L));
    K_free = svd.solve(Wh * F_shift_);
    rank = svd.rank;
  }

  InverseResult out;
  out.K.resize(L);
  for (std::size_t k = 0; k < free_.size(); ++k) out.K[free_[k]] = K_free[static_cast<Eigen::Index>(k)];
  if (!masked_.empty()) {
    const Eigen::VectorXd r0 = F_shift_ - A_free_ * K_free;
    const Eigen::Index p = Vs_.cols();
    Eigen::VectorXd coeff = Us_.leftCols(p).transpose() * r0;
    for (Eigen::Index i = 0; i < p; ++i) coeff[i] *= s_[i] / (s_[i] * s_[i] + alpha);
    const Eigen::VectorXd dev = Vs_ * coeff;
    for (std::size_t k = 0; k < masked_.size(); ++k) {
      out.K[masked_[k]] = reference_ + dev[static_cast<Eigen::Index>(k)];
    }
    rank += static_cast<Eigen::Index>(masked_.size());
  }

  auto& d = out.diagnostics;
  d.conditioning = cond_;
  d.rank = rank;
  d.degenerate = cond_.sigma_max == 0.0;
  d.residual_norm = residual_norm(A_, F_, out.K);
  d.penalty_value = w2_value_grad(out.K, mask_, reference_).value;
  return out;
}

InverseResult solve_w2(const DesignSystem& system, const GradientMask& mask,
                       const MaterialPair& pair, double alpha) {
  if (!(alpha > 0.0)) throw InvalidArgument("W2 solve needs alpha > 0");
  return MaskedTikhonovSolver(system, mask.b, pair.low()).solve(alpha);
}

Eigen::VectorXd default_w1_init(const DesignSystem& system, const MaterialPair& pair) {
  Eigen::VectorXd K = min_norm_least_squares(system).K;
  return K.cwiseMax(pair.low()).cwiseMin(pair.high());
}

InverseResult solve_w1(const DesignSystem& system, const MaterialPair& pair, double alpha,
                       const Eigen::VectorXd& init, const W1Options& opt) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("W1 solve needs alpha > 0");
  const Eigen::MatrixXd& A = system.A;
  const Eigen::VectorXd& F = system.F;
  if (init.size() != A.cols()) {
    throw InvalidArgument("W1 init has " + std::to_string(init.size()) + " entries, expected " +
                          std::to_string(A.cols()));
  }

  struct Eval {
    double J;
    double misfit;
    double penalty;
    Eigen::VectorXd grad;
  };
  auto evaluate = [&](const Eigen::VectorXd& K, bool with_grad) {
    const Eigen::VectorXd r = A * K - F;
    const PenaltyEval w = w1_value_grad(K, pair);
    Eval e{r.squaredNorm() + alpha * w.value, r.norm(), w.value, {}};
    if (with_grad) e.grad = 2.0 * (A.transpose() * r) + alpha * w.gradient;
    return e;
  };

  Eigen::VectorXd K = init;
  Eval cur = evaluate(K, true);
  if (!std::isfinite(cur.J)) throw InvalidArgument("W1 objective is not finite at the initial point");

  InverseResult out;
  out.objective_history.push_back(cur.J);
  const double g0 = cur.grad.norm();
  const double target = opt.grad_tol * (1.0 + g0);
  const double max_move =
      opt.max_step_fraction > 0.0 ? opt.max_step_fraction * (pair.high() - pair.low())
                                  : std::numeric_limits<double>::infinity();

  // First trial step from a curvature bound of the two terms.
  const Conditioning cond = condition_number(A);
  const double sig = cond.sigma_max;
  const double gap = pair.high() - pair.low();
  double step = 1.0 / (2.0 * sig * sig + 2.0 * alpha * gap * gap + 1e-300);

  int it = 0;
  bool converged = false;
  std::string message;
  Eigen::VectorXd K_prev, g_prev;
  for (; it < opt.max_iters; ++it) {
    const double gnorm = cur.grad.norm();
    if (gnorm <= target) {
      converged = true;
      break;
    }
    if (it > 0) {
      const Eigen::VectorXd dk = K - K_prev;
      const Eigen::VectorXd dg = cur.grad - g_prev;
      const double curv = dk.dot(dg);
      if (curv > 0.0) step = dk.squaredNorm() / curv;
      else step *= 2.0;
    }
    const double ginf = cur.grad.lpNorm<Eigen::Infinity>();
    if (ginf > 0.0) step = std::min(step, max_move / ginf);

    bool accepted = false;
    Eval next;
    Eigen::VectorXd trial;
    for (int h = 0; h <= opt.max_halvings; ++h) {
      trial = K - step * cur.grad;
      next = evaluate(trial, false);
      if (std::isfinite(next.J) && next.J <= cur.J - opt.armijo * step * gnorm * gnorm) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      message = "line search could not reduce the objective";
      break;
    }
    K_prev = std::move(K);
    g_prev = std::move(cur.grad);
    K = std::move(trial);
    cur = evaluate(K, true);
    out.objective_history.push_back(cur.J);
  }
  if (!converged && message.empty() && it >= opt.max_iters) {
    message = "iteration limit reached";
  }

  out.K = std::move(K);
  auto& d = out.diagnostics;
  d.iterations = it;
  d.converged = converged;
  d.gradient_norm = cur.grad.norm();
  d.residual_norm = cur.misfit;
  d.penalty_value = cur.penalty;
  d.conditioning = cond;
  d.message = message;
  return out;
}

void TikhonovProblem::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw InvalidArgument("alpha must be >= 0");
  if (alpha == 0.0 && penalizer != Penalizer::none) {
    throw InvalidArgument("penalized solve needs alpha > 0");
  }
  if (mask.has_value() != (penalizer == Penalizer::w2)) {
    throw InvalidArgument("a gradient mask is required exactly for the W2 penalizer");
  }
  if (penalizer != Penalizer::none && !pair) {
    throw InvalidArgument("penalized solve needs a material pair");
  }
}

InverseResult solve(const TikhonovProblem& p) {
  p.validate();
  switch (p.penalizer) {
    case Penalizer::none:
      return min_norm_least_squares(p.system);
    case Penalizer::w2:
      return solve_w2(p.system, *p.mask, *p.pair, p.alpha);
    case Penalizer::w1:
      return solve_w1(p.system, *p.pair, p.alpha,
                      p.init ? *p.init : default_w1_init(p.system, *p.pair), p.w1);
  }
  throw InvalidArgument("unknown penalizer");
}

}  // namespace heatk
