#include "heatk/lcurve.hpp"

#include <algorithm>
#include <functional>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <limits>
#include <memory>
#include <ostream>
#include <thread>

#include "heatk/error.hpp"

namespace heatk {

unsigned thread_budget() {
  if (const char* env = std::getenv("HEATK_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<double> default_alphas(double sigma_max, int count, double lo, double hi) {
  if (count < 3) throw InvalidArgument("an L-curve sweep needs at least 3 alphas");
  if (!(sigma_max > 0.0)) throw InvalidArgument("cannot scale alphas: sigma_max is zero");
  std::vector<double> out(static_cast<std::size_t>(count));
  const double s2 = sigma_max * sigma_max;
  const double a = std::log10(lo), b = std::log10(hi);
  for (int i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] = s2 * std::pow(10.0, a + (b - a) * i / (count - 1));
  }
  return out;
}

namespace {

void finish_point(LCurvePoint& p) {
  p.valid = !p.failed && p.rho > 0.0 && p.eta > 0.0 && std::isfinite(p.rho) &&
            std::isfinite(p.eta);
  if (p.valid) {
    p.log_rho = std::log(p.rho);
    p.log_eta = std::log(p.eta);
  } else if (!p.failed) {
    p.note = "zero residual or penalty";
  }
}

}  // namespace

std::vector<LCurvePoint> sweep(const DesignSystem& system, const PenalizerSpec& penalizer,
                               const std::vector<double>& alphas, unsigned max_threads) {
  if (alphas.size() < 3) throw InvalidArgument("an L-curve sweep needs at least 3 alphas");
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] > 0.0) || (i > 0 && !(alphas[i] > alphas[i - 1]))) {
      throw InvalidArgument("sweep alphas must be positive and strictly increasing");
    }
  }

  std::vector<LCurvePoint> points(alphas.size());
  std::function<void(std::size_t)> work;

  std::unique_ptr<MaskedTikhonovSolver> w2;
  Eigen::VectorXd w1_init;
  if (const auto* p2 = std::get_if<W2Penalty>(&penalizer)) {
    w2 = std::make_unique<MaskedTikhonovSolver>(system, p2->mask, p2->reference);
    work = [&](std::size_t i) {
      const InverseResult r = w2->solve(alphas[i]);
      points[i].rho = r.diagnostics.residual_norm;
      points[i].eta = r.diagnostics.penalty_value;
    };
  } else {
    const auto& p1 = std::get<W1Penalty>(penalizer);
    w1_init = p1.init ? *p1.init : default_w1_init(system, p1.pair);
    work = [&](std::size_t i) {
      const InverseResult r = solve_w1(system, p1.pair, alphas[i], w1_init, p1.options);
      points[i].rho = r.diagnostics.residual_norm;
      points[i].eta = r.diagnostics.penalty_value;
      if (!r.diagnostics.converged) points[i].note = r.diagnostics.message;
    };
  }

  auto run_one = [&](std::size_t i) {
    points[i].alpha = alphas[i];
    try {
      work(i);
    } catch (const std::exception& e) {
      points[i].failed = true;
      points[i].note = e.what();
    }
    finish_point(points[i]);
  };

  const unsigned budget = max_threads ? max_threads : thread_budget();
  const unsigned nthreads =
      static_cast<unsigned>(std::min<std::size_t>(budget, alphas.size()));
  if (nthreads <= 1) {
    for (std::size_t i = 0; i < alphas.size(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nthreads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < alphas.size(); i = next++) run_one(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  const auto usable = std::count_if(points.begin(), points.end(),
                                    [](const LCurvePoint& p) { return p.valid; });
  if (usable < 3) {
    throw SolverError("L-curve sweep produced only " + std::to_string(usable) +
                      " usable points");
  }
  return points;
}

double three_point_curvature(double x1, double y1, double x2, double y2, double x3,
                             double y3) {
  const double ax = x2 - x1, ay = y2 - y1;
  const double bx = x3 - x2, by = y3 - y2;
  const double cx = x3 - x1, cy = y3 - y1;
  const double la = std::hypot(ax, ay), lb = std::hypot(bx, by), lc = std::hypot(cx, cy);
  const double denom = la * lb * lc;
  if (denom == 0.0) return 0.0;
  const double cross = ax * by - ay * bx;
  // Relative collinearity cut-off so round-off does not invent a corner.
  if (std::abs(cross) <= 1e-12 * la * lb) return 0.0;
  return 2.0 * cross / denom;
}

Corner select_corner(const std::vector<LCurvePoint>& points) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].valid) idx.push_back(i);
  }
  if (idx.size() < 3) throw InvalidArgument("corner detection needs at least 3 valid points");

  Corner out;
  out.curvature.assign(points.size(), std::numeric_limits<double>::quiet_NaN());
  double best = 0.0;
  bool found = false;
  for (std::size_t k = 1; k + 1 < idx.size(); ++k) {
    const LCurvePoint& a = points[idx[k - 1]];
    const LCurvePoint& b = points[idx[k]];
    const LCurvePoint& c = points[idx[k + 1]];
    const double kappa =
        three_point_curvature(a.log_rho, a.log_eta, b.log_rho, b.log_eta, c.log_rho, c.log_eta);
    out.curvature[idx[k]] = kappa;
    if (kappa > best) {
      best = kappa;
      out.index = idx[k];
      found = true;
    }
  }
  if (!found) {
    throw NoCornerError("L-curve has no convex corner; choose alpha manually");
  }
  out.alpha = points[out.index].alpha;
  return out;
}

void write_lcurve_csv(std::ostream& os, const std::vector<LCurvePoint>& points,
                      const std::optional<Corner>& corner) {
  os << "alpha,rho,eta,curvature,selected\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const LCurvePoint& p = points[i];
    os << p.alpha << ',' << p.rho << ',' << p.eta << ',';
    if (corner && std::isfinite(corner->curvature[i])) os << corner->curvature[i];
    else os << "nan";
    os << ',' << ((corner && corner->index == i) ? 1 : 0) << '\n';
  }
}

}  // namespace heatk
