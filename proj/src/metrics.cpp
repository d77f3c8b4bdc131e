#include "heatk/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <set>

#include "heatk/error.hpp"

namespace heatk {

double relative_l2(std::span<const double> k_rec, std::span<const double> k_true) {
  if (k_rec.size() != k_true.size()) throw InvalidArgument("relative_l2: size mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < k_rec.size(); ++i) {
    const double d = k_rec[i] - k_true[i];
    num += d * d;
    den += k_true[i] * k_true[i];
  }
  if (den == 0.0) throw InvalidArgument("relative_l2: reference field is zero");
  return std::sqrt(num / den);
}

double relative_l2(const ScalarField& k_rec, const ScalarField& k_true) {
  if (!(k_rec.grid() == k_true.grid())) throw InvalidArgument("relative_l2: grid mismatch");
  return relative_l2(k_rec.values(), k_true.values());
}

std::vector<double> classify(std::span<const double> K, const MaterialPair& pair) {
  std::vector<double> out(K.size());
  const double mid = pair.midpoint();
  for (std::size_t i = 0; i < K.size(); ++i) out[i] = K[i] <= mid ? pair.low() : pair.high();
  return out;
}

ScalarField classify(const ScalarField& K, const MaterialPair& pair) {
  return ScalarField(K.grid(), classify(K.values(), pair), FieldRole::conductivity);
}

double misclassification_rate(std::span<const double> class_rec,
                              std::span<const double> class_true,
                              std::span<const std::uint8_t> exclude) {
  if (class_rec.size() != class_true.size()) {
    throw InvalidArgument("misclassification_rate: size mismatch");
  }
  if (!exclude.empty() && exclude.size() != class_rec.size()) {
    throw InvalidArgument("misclassification_rate: exclusion mask has the wrong size");
  }
  std::size_t counted = 0, wrong = 0;
  for (std::size_t i = 0; i < class_rec.size(); ++i) {
    if (!exclude.empty() && exclude[i]) continue;
    ++counted;
    if (class_rec[i] != class_true[i]) ++wrong;
  }
  if (counted == 0) throw InvalidArgument("misclassification_rate: every cell is excluded");
  return static_cast<double>(wrong) / static_cast<double>(counted);
}

std::vector<std::uint8_t> flat_gradient_mask(const ScalarField& ux, const ScalarField& uy,
                                             double rel_eps) {
  if (!(ux.grid() == uy.grid())) throw InvalidArgument("flat mask: gradient grids differ");
  std::vector<double> g(ux.size());
  double mx = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = std::hypot(ux[i], uy[i]);
    mx = std::max(mx, g[i]);
  }
  std::vector<std::uint8_t> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = g[i] <= rel_eps * mx ? 1 : 0;
  return out;
}

std::optional<MaterialPair> infer_pair(const ScalarField& k_true) {
  std::set<double> distinct(k_true.values().begin(), k_true.values().end());
  if (distinct.size() != 2 || *distinct.begin() <= 0.0) return std::nullopt;
  return MaterialPair(*distinct.begin(), *distinct.rbegin());
}

MetricsReport compare(const ScalarField& k_rec, const ScalarField& k_true,
                      const MaterialPair& pair, std::span<const std::uint8_t> flat_mask) {
  MetricsReport r;
  r.cells = k_rec.size();
  r.relative_l2 = relative_l2(k_rec, k_true);
  const auto cr = classify(k_rec.values(), pair);
  const auto ct = classify(k_true.values(), pair);
  r.misclassification = misclassification_rate(cr, ct);
  if (!flat_mask.empty()) {
    r.excluded = static_cast<std::size_t>(std::count(flat_mask.begin(), flat_mask.end(), 1));
    if (r.excluded < r.cells) r.misclassification_identifiable = misclassification_rate(cr, ct, flat_mask);
  }
  return r;
}

void write_report(std::ostream& os, const MetricsReport& r) {
  os << std::setprecision(10);
  os << "cells=" << r.cells << '\n';
  os << "relative_l2=" << r.relative_l2 << '\n';
  os << "misclassification=" << r.misclassification << '\n';
  if (r.misclassification_identifiable) {
    os << "excluded_flat=" << r.excluded << '\n';
    os << "misclassification_identifiable=" << *r.misclassification_identifiable << '\n';
  }
}

void write_report_csv(std::ostream& os, const std::string& experiment, const MetricsReport& r,
                      bool header) {
  if (header) {
    os << "experiment,cells,relative_l2,misclassification,excluded_flat,"
          "misclassification_identifiable\n";
  }
  os << std::setprecision(10) << experiment << ',' << r.cells << ',' << r.relative_l2 << ','
     << r.misclassification << ',' << r.excluded << ',';
  if (r.misclassification_identifiable) os << *r.misclassification_identifiable;
  os << '\n';
}

}  // namespace heatk
