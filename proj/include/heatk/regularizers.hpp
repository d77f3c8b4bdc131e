#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "heatk/grid.hpp"

namespace heatk {

/// The two admissible conductivities, 0 < k_L < k_U.
class MaterialPair {
 public:
  MaterialPair(double k_low, double k_high);

  double low() const { return low_; }
  double high() const { return high_; }
  double midpoint() const { return 0.5 * (low_ + high_); }

  bool operator==(const MaterialPair&) const = default;

 private:
  double low_;
  double high_;
};

/// p(z) = (z - k_L)(z - k_U) = z^2 + b z + c.
struct IndicatorPolynomial {
  double b = 0.0;
  double c = 0.0;

  double value(double z) const { return (z + b) * z + c; }
  double derivative(double z) const { return 2.0 * z + b; }
};

IndicatorPolynomial indicator_polynomial(const MaterialPair& pair);

struct PenaltyEval {
  double value = 0.0;
  Eigen::VectorXd gradient;
};

/// W1(K) = sum_i p(K_i)^2, zero exactly when every entry is k_L or k_U.
PenaltyEval w1_value_grad(const Eigen::Ref<const Eigen::VectorXd>& K, const MaterialPair& pair);

/// What the threshold fraction is measured against.
enum class GammaNormalizer : std::uint8_t {
  temperature,  // max_i |u_i|
  gradient,     // max_i |grad u(x_i)|
};

std::string to_string(GammaNormalizer n);
GammaNormalizer parse_gamma_normalizer(const std::string& s);

/// b_i = 1 iff |grad u(x_i)| > gamma, with gamma = fraction * normalizer.
struct GradientMask {
  std::vector<std::uint8_t> b;
  double gamma = 0.0;
  double fraction = 0.0;
  double normalizer = 0.0;

  std::size_t size() const { return b.size(); }
  std::size_t count() const;
};

GradientMask build_mask(const ScalarField& ux, const ScalarField& uy, const ScalarField& u,
                        double fraction,
                        GammaNormalizer normalizer = GammaNormalizer::temperature);

/// Mask from an explicit threshold, bypassing the max|u| normalizer.
GradientMask mask_from_threshold(const ScalarField& ux, const ScalarField& uy, double gamma);

/// W2(K) = sum_i b_i (K_i - k_L)^2.
PenaltyEval w2_value_grad(const Eigen::Ref<const Eigen::VectorXd>& K, const GradientMask& mask,
                          const MaterialPair& pair);
PenaltyEval w2_value_grad(const Eigen::Ref<const Eigen::VectorXd>& K,
                          std::span<const std::uint8_t> mask, double reference);

/// Mask as a 0/1 field for export.
ScalarField mask_field(const GradientMask& mask, const Grid& grid);

}  // namespace heatk
