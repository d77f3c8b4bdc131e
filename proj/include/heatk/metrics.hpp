#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "heatk/grid.hpp"
#include "heatk/regularizers.hpp"

namespace heatk {

/// |k_rec - k_true| / |k_true| over cell values.
double relative_l2(const ScalarField& k_rec, const ScalarField& k_true);
double relative_l2(std::span<const double> k_rec, std::span<const double> k_true);

/// Nearest of {k_L, k_U} per entry; the exact midpoint maps to k_L.
std::vector<double> classify(std::span<const double> K, const MaterialPair& pair);
ScalarField classify(const ScalarField& K, const MaterialPair& pair);

/// Fraction of cells whose classes differ, ignoring cells with
/// exclude[i] != 0.
double misclassification_rate(std::span<const double> class_rec,
                              std::span<const double> class_true,
                              std::span<const std::uint8_t> exclude = {});

/// Cells where |grad u| <= rel_eps * max |grad u|; k is not identifiable
/// there.
std::vector<std::uint8_t> flat_gradient_mask(const ScalarField& ux, const ScalarField& uy,
                                             double rel_eps = 1e-6);

/// The two distinct values of a two-material field, or nullopt.
std::optional<MaterialPair> infer_pair(const ScalarField& k_true);

struct MetricsReport {
  std::size_t cells = 0;
  std::size_t excluded = 0;
  double relative_l2 = 0.0;
  double misclassification = 0.0;
  std::optional<double> misclassification_identifiable;
};

MetricsReport compare(const ScalarField& k_rec, const ScalarField& k_true,
                      const MaterialPair& pair,
                      std::span<const std::uint8_t> flat_mask = {});

void write_report(std::ostream& os, const MetricsReport& report);
void write_report_csv(std::ostream& os, const std::string& experiment,
                      const MetricsReport& report, bool header);

}  // namespace heatk
