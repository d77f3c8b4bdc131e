#include "heatk/regularizers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "heatk/error.hpp"

namespace heatk {

MaterialPair::MaterialPair(double k_low, double k_high) : low_(k_low), high_(k_high) {
  if (!(std::isfinite(k_low) && std::isfinite(k_high)) || !(k_low > 0.0) ||
      !(k_low < k_high)) {
    std::ostringstream msg;
    msg << "material pair needs 0 < k_L < k_U < inf, got (" << k_low << ", " << k_high << ")";
    throw InvalidArgument(msg.str());
  }
}

IndicatorPolynomial indicator_polynomial(const MaterialPair& pair) {
  return {-(pair.low() + pair.high()), pair.low() * pair.high()};
}

PenaltyEval w1_value_grad(const Eigen::Ref<const Eigen::VectorXd>& K, const MaterialPair& pair) {
  const IndicatorPolynomial p = indicator_polynomial(pair);
  PenaltyEval out;
  out.gradient.resize(K.size());
  for (Eigen::Index i = 0; i < K.size(); ++i) {
    // (z - k_L)(z - k_U) is better conditioned near the roots than the
    // expanded form.
    const double pz = (K[i] - pair.low()) * (K[i] - pair.high());
    out.value += pz * pz;
    out.gradient[i] = 2.0 * pz * p.derivative(K[i]);
  }
  return out;
}

std::size_t GradientMask::count() const {
  return static_cast<std::size_t>(std::count(b.begin(), b.end(), std::uint8_t{1}));
}

GradientMask mask_from_threshold(const ScalarField& ux, const ScalarField& uy, double gamma) {
  if (!(ux.grid() == uy.grid())) throw InvalidArgument("mask: gradient fields differ in grid");
  GradientMask m;
  m.gamma = gamma;
  m.b.resize(ux.size());
  for (std::size_t i = 0; i < ux.size(); ++i) {
    m.b[i] = std::hypot(ux[i], uy[i]) > gamma ? 1 : 0;
  }
  return m;
}

std::string to_string(GammaNormalizer n) {
  return n == GammaNormalizer::temperature ? "temperature" : "gradient";
}

GammaNormalizer parse_gamma_normalizer(const std::string& s) {
  if (s == "temperature" || s == "value") return GammaNormalizer::temperature;
  if (s == "gradient") return GammaNormalizer::gradient;
  throw InvalidArgument("unknown gamma normalizer '" + s + "' (expected temperature or gradient)");
}

GradientMask build_mask(const ScalarField& ux, const ScalarField& uy, const ScalarField& u,
                        double fraction, GammaNormalizer normalizer) {
  if (!(fraction > 0.0)) throw InvalidArgument("mask fraction must be positive");
  if (!(u.grid() == ux.grid())) throw InvalidArgument("mask: u and gradient grids differ");
  if (!(ux.grid() == uy.grid())) throw InvalidArgument("mask: gradient fields differ in grid");
  double mx = 0.0;
  if (normalizer == GammaNormalizer::temperature) {
    for (double v : u.values()) mx = std::max(mx, std::abs(v));
  } else {
    for (std::size_t i = 0; i < ux.size(); ++i) mx = std::max(mx, std::hypot(ux[i], uy[i]));
  }
  GradientMask m = mask_from_threshold(ux, uy, fraction * mx);
  m.fraction = fraction;
  m.normalizer = mx;
  return m;
}

PenaltyEval w2_value_grad(const Eigen::Ref<const Eigen::VectorXd>& K,
                          std::span<const std::uint8_t> mask, double reference) {
  if (static_cast<std::size_t>(K.size()) != mask.size()) {
    throw InvalidArgument("W2: K has " + std::to_string(K.size()) + " entries, mask has " +
                          std::to_string(mask.size()));
  }
  PenaltyEval out;
  out.gradient = Eigen::VectorXd::Zero(K.size());
  for (Eigen::Index i = 0; i < K.size(); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    const double d = K[i] - reference;
    out.value += d * d;
    out.gradient[i] = 2.0 * d;
  }
  return out;
}

PenaltyEval w2_value_grad(const Eigen::Ref<const Eigen::VectorXd>& K, const GradientMask& mask,
                          const MaterialPair& pair) {
  return w2_value_grad(K, mask.b, pair.low());
}

ScalarField mask_field(const GradientMask& mask, const Grid& grid) {
  std::vector<double> v(mask.b.begin(), mask.b.end());
  return ScalarField(grid, std::move(v));
}

}  // namespace heatk
