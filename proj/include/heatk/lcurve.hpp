#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "heatk/inverse_solver.hpp"

namespace heatk {

struct W1Penalty {
  MaterialPair pair;
  W1Options options;
  std::optional<Eigen::VectorXd> init;  // default_w1_init when unset
};

struct W2Penalty {
  std::vector<std::uint8_t> mask;
  double reference = 0.0;  // k_L for the material problem

  static W2Penalty from(const GradientMask& mask, const MaterialPair& pair) {
    return {mask.b, pair.low()};
  }
};

using PenalizerSpec = std::variant<W1Penalty, W2Penalty>;

struct LCurvePoint {
  double alpha = 0.0;
  double rho = 0.0;  // |A K(alpha) - F|
  double eta = 0.0;  // W(K(alpha))
  double log_rho = 0.0;
  double log_eta = 0.0;
  bool valid = false;  // usable for corner detection
  bool failed = false;
  std::string note;
};

/// count values log-spaced over [lo, hi] * sigma_max^2.
std::vector<double> default_alphas(double sigma_max, int count = 40, double lo = 1e-10,
                                   double hi = 1e2);

/// One solve per alpha with the matching penalized solver; order preserved.
/// Solves run concurrently on up to max_threads threads (0 reads
/// HEATK_THREADS, falling back to the hardware concurrency). Points whose
/// solver throws are flagged failed. Throws SolverError if fewer than three
/// usable points remain.
std::vector<LCurvePoint> sweep(const DesignSystem& system, const PenalizerSpec& penalizer,
                               const std::vector<double>& alphas, unsigned max_threads = 0);

struct Corner {
  double alpha = 0.0;
  std::size_t index = 0;           // into the points passed in
  std::vector<double> curvature;   // NaN where undefined
};

/// Maximum signed three-point (circumcircle) curvature of the log-log curve,
/// restricted to convex turns. Ties go to the smaller alpha. Throws
/// NoCornerError when no interior point turns the right way.
Corner select_corner(const std::vector<LCurvePoint>& points);

/// Signed curvature of the circle through three points (positive for a
/// counter-clockwise turn); 0 for collinear or coincident points.
double three_point_curvature(double x1, double y1, double x2, double y2, double x3, double y3);

// CSV with header alpha,rho,eta,curvature,selected
void write_lcurve_csv(std::ostream& os, const std::vector<LCurvePoint>& points,
                      const std::optional<Corner>& corner);

/// HEATK_THREADS if set and positive, else hardware concurrency (>= 1).
unsigned thread_budget();

}  // namespace heatk
