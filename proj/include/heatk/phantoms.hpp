#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "heatk/fem_forward.hpp"
#include "heatk/grid.hpp"
#include "heatk/regularizers.hpp"

namespace heatk {

enum class Material : std::uint8_t { low, high };

struct Rectangle {
  double x0, x1, y0, y1;
};
struct Disk {
  double cx, cy, r;
};
struct Polygon {
  std::vector<Point> vertices;  // closed implicitly, even-odd rule
};

struct Shape {
  std::variant<Rectangle, Disk, Polygon> geometry;
  Material fill = Material::high;

  bool contains(Point p) const;
};

/// Two-material layout on the unit square plus the boundary temperatures
/// and coefficients of one experiment.
struct PhantomSpec {
  std::string name;
  MaterialPair pair{1.0, 300.0};
  Material background = Material::low;
  std::vector<Shape> shapes;
  double T1 = 322.0;  // left edge
  double T2 = 283.0;  // right edge
  double c = 1.0;
  double gamma_fraction = 0.01;
  GammaNormalizer gamma_normalizer = GammaNormalizer::temperature;

  double value(Material m) const { return m == Material::low ? pair.low() : pair.high(); }
  /// Fill of the last shape containing p, else the background.
  double conductivity_at(Point p) const;
  void validate() const;
};

enum class CaseId { I, II, III, IV };

CaseId parse_case(const std::string& id);
std::string to_string(CaseId id);

/// Parameters of the four reference experiments. Layouts are fixed
/// approximations chosen for this library; the scalar settings are the
/// published ones.
PhantomSpec make_case(CaseId id);

ScalarField rasterize(const PhantomSpec& spec, const Grid& grid);

/// Forward problem on the unit square with k from the layout, constant c,
/// T1/T2 on the left/right edges and f = h = 0.
ForwardProblem forward_problem(const PhantomSpec& spec, int mesh_n);

/// values[i] += level * rms(values) * g_i, g_i ~ N(0, 1) from a seeded
/// mt19937_64.
ScalarField add_noise(const ScalarField& field, double relative_level, std::uint64_t seed);

std::string to_json(const PhantomSpec& spec);
PhantomSpec phantom_from_json(const std::string& text);

}  // namespace heatk
