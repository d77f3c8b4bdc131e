#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "heatk/assembler.hpp"
#include "heatk/fem_forward.hpp"
#include "heatk/inverse_solver.hpp"
#include "heatk/lcurve.hpp"
#include "heatk/metrics.hpp"
#include "heatk/phantoms.hpp"

namespace heatk {

enum class Setting { lsq, w1, w2 };

Setting parse_setting(const std::string& s);
std::string to_string(Setting s);

struct SweepOptions {
  int points = 40;
  double lo = 1e-10;  // times sigma_max^2
  double hi = 1e2;
  unsigned threads = 0;
};

struct ReconstructOptions {
  Setting setting = Setting::w2;
  std::optional<double> alpha;  // unset: L-curve
  SweepOptions sweep;
  W1Options w1;
};

struct Reconstruction {
  Setting setting = Setting::lsq;
  double alpha = 0.0;
  InverseResult result;
  std::optional<GradientMask> mask;
  std::vector<LCurvePoint> lcurve;
  std::optional<Corner> corner;
};

/// Solve one setting on an assembled system. The W2 mask is built from the
/// sampled solution.
Reconstruction reconstruct(const DesignSystem& system, const SampledSolution& samples,
                           const MaterialPair& pair, double gamma_fraction,
                           const ReconstructOptions& options,
                           GammaNormalizer normalizer = GammaNormalizer::temperature);

/// Same with a prebuilt mask, which W2 requires and the other settings
/// ignore.
Reconstruction reconstruct(const DesignSystem& system, const MaterialPair& pair,
                           const ReconstructOptions& options,
                           std::optional<GradientMask> mask);

/// key=value lines: setting, alpha, solver diagnostics and conditioning.
void write_diagnostics(std::ostream& os, const Reconstruction& rec);

struct PipelineConfig {
  PhantomSpec spec;
  int nx = 100;
  int ny = 100;
  int mesh_n = 200;
  int M = 5;
  ReconstructOptions reconstruct;
  double noise_level = 0.0;  // relative, applied to u, u_x, u_y samples
  std::uint64_t seed = 0;
};

struct PipelineResult {
  ScalarField k_true;
  SampledSolution samples;
  DesignSystem system;
  Reconstruction reconstruction;
  ScalarField K;
  ScalarField classes;
  MetricsReport metrics;
};

/// Forward solve on the FEM mesh, sampled at the inverse-grid centers.
SampledSolution forward_samples(const PhantomSpec& spec, const Grid& grid, int mesh_n);

SampledSolution with_noise(const SampledSolution& s, double level, std::uint64_t seed);

DesignSystem assemble_from(const SampledSolution& samples, double c, int M);

PipelineResult run_pipeline(const PipelineConfig& config);

/// Experiment record: the phantom keys plus "grid" [nx, ny], "mesh_n", "M",
/// "setting", "alpha" (number or "auto"), "noise_level" and "seed". Missing
/// keys keep their defaults. "case" ("I".."IV") seeds the phantom keys from
/// a reference experiment, which explicit keys then override. An unknown top-level key is a ParseError naming
/// it.
std::string to_json(const PipelineConfig& config);
PipelineConfig pipeline_config_from_json(const std::string& text);

}  // namespace heatk
