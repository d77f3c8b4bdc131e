#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace heatk {

enum class Edge : std::uint8_t { left = 0, right = 1, bottom = 2, top = 3 };

std::string to_string(Edge e);

class EdgeSet {
 public:
  constexpr EdgeSet() = default;
  constexpr EdgeSet(std::initializer_list<Edge> edges) {
    for (Edge e : edges) insert(e);
  }

  constexpr void insert(Edge e) { bits_ |= bit(e); }
  constexpr bool contains(Edge e) const { return (bits_ & bit(e)) != 0; }
  constexpr bool intersects(EdgeSet o) const { return (bits_ & o.bits_) != 0; }
  constexpr EdgeSet united(EdgeSet o) const {
    EdgeSet s;
    s.bits_ = bits_ | o.bits_;
    return s;
  }
  constexpr bool all_four() const { return bits_ == 0x0F; }
  constexpr bool operator==(const EdgeSet&) const = default;

 private:
  static constexpr std::uint8_t bit(Edge e) {
    return static_cast<std::uint8_t>(1u << static_cast<unsigned>(e));
  }
  std::uint8_t bits_ = 0;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Axis-aligned rectangle with its boundary split into Dirichlet and Neumann
/// parts. The default is the unit square with temperature prescribed on the
/// vertical edges and flux on the horizontal ones.
struct Domain {
  double x0 = 0.0;
  double x1 = 1.0;
  double y0 = 0.0;
  double y1 = 1.0;
  EdgeSet dirichlet_edges{Edge::left, Edge::right};
  EdgeSet neumann_edges{Edge::bottom, Edge::top};

  static Domain unit_square() { return Domain{}; }

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }

  /// Closed-rectangle membership with a small relative slack.
  bool contains(Point p, double slack = 1e-12) const;

  /// Throws InvalidArgument if the coordinates are degenerate or the edge
  /// sets do not partition the boundary.
  void validate() const;

  bool operator==(const Domain&) const = default;
};

/// Regular nx-by-ny partition of a Domain into equal cells. Cell indices are
/// row-major with x varying fastest: index = j * nx + i.
class Grid {
 public:
  Grid(Domain domain, int nx, int ny);

  const Domain& domain() const { return domain_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  std::size_t size() const { return static_cast<std::size_t>(nx_) * ny_; }
  double hx() const { return domain_.width() / nx_; }
  double hy() const { return domain_.height() / ny_; }
  double cell_measure() const { return hx() * hy(); }

  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * nx_ + i;
  }
  std::pair<int, int> ij(std::size_t index) const {
    return {static_cast<int>(index % nx_), static_cast<int>(index / nx_)};
  }
  Point center(std::size_t index) const;
  std::vector<Point> centers() const;

  bool operator==(const Grid&) const = default;

 private:
  Domain domain_;
  int nx_;
  int ny_;
};

Grid build_grid(const Domain& domain, int nx, int ny);

enum class FieldRole : std::uint8_t { coefficient, temperature, conductivity };

/// Optional admissible range for conductivity fields (0 < lower <= upper).
struct ConductivityBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Values of a scalar quantity at the cell centers of a Grid.
class ScalarField {
 public:
  ScalarField(Grid grid, std::vector<double> values,
              FieldRole role = FieldRole::coefficient);

  /// Conductivity field checked against explicit bounds.
  static ScalarField conductivity(Grid grid, std::vector<double> values,
                                  ConductivityBounds bounds);

  static ScalarField constant(const Grid& grid, double value,
                              FieldRole role = FieldRole::coefficient);

  const Grid& grid() const { return grid_; }
  FieldRole role() const { return role_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Value of the cell whose closed rectangle contains p (smaller index wins
  /// on shared edges).
  double at(Point p) const;

  ScalarField with_role(FieldRole role) const;

 private:
  Grid grid_;
  std::vector<double> values_;
  FieldRole role_;
};

using PlaneFunction = std::function<double(double, double)>;

/// values[i] = f(center_i). Non-finite output raises EvaluationError naming
/// the cell.
ScalarField sample_function(const Grid& grid, const PlaneFunction& f,
                            FieldRole role = FieldRole::coefficient);

/// Cell along one axis for the scaled coordinate t = (x - x0) / h. Points on
/// a shared edge belong to the cell with the smaller index; t within 1e-9 of
/// an integer is snapped first so that round-off cannot flip ownership.
int owner_cell(double t, int n);

/// Cell index owning p, or throws OutOfDomain.
std::size_t locate_cell(const Grid& grid, Point p);

// Text format: "FIELD nx ny x0 x1 y0 y1" then ny rows of nx values, first
// row is j = 0.
void write_field(std::ostream& os, const ScalarField& field);
ScalarField read_field(std::istream& is, FieldRole role = FieldRole::coefficient);
void save_field(const std::string& path, const ScalarField& field);
ScalarField load_field(const std::string& path,
                       FieldRole role = FieldRole::coefficient);

}  // namespace heatk
