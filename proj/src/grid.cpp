#include "heatk/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "heatk/error.hpp"

namespace heatk {

std::string to_string(Edge e) {
  switch (e) {
    case Edge::left: return "left";
    case Edge::right: return "right";
    case Edge::bottom: return "bottom";
    case Edge::top: return "top";
  }
  return "?";
}

bool Domain::contains(Point p, double slack) const {
  const double sx = slack * std::max(1.0, width());
  const double sy = slack * std::max(1.0, height());
  return p.x >= x0 - sx && p.x <= x1 + sx && p.y >= y0 - sy && p.y <= y1 + sy;
}

void Domain::validate() const {
  if (!(std::isfinite(x0) && std::isfinite(x1) && std::isfinite(y0) &&
        std::isfinite(y1))) {
    throw InvalidArgument("domain coordinates must be finite");
  }
  if (!(x0 < x1) || !(y0 < y1)) {
    throw InvalidArgument("domain requires x0 < x1 and y0 < y1");
  }
  if (dirichlet_edges.intersects(neumann_edges)) {
    throw InvalidArgument("an edge cannot be both Dirichlet and Neumann");
  }
  if (!dirichlet_edges.united(neumann_edges).all_four()) {
    throw InvalidArgument("Dirichlet and Neumann edges must cover the boundary");
  }
}

Grid::Grid(Domain domain, int nx, int ny) : domain_(domain), nx_(nx), ny_(ny) {
  if (nx < 1 || ny < 1) {
    throw InvalidArgument("grid cell counts must be positive, got " +
                          std::to_string(nx) + "x" + std::to_string(ny));
  }
  domain_.validate();
}

Point Grid::center(std::size_t index) const {
  auto [i, j] = ij(index);
  return {domain_.x0 + (i + 0.5) * hx(), domain_.y0 + (j + 0.5) * hy()};
}

std::vector<Point> Grid::centers() const {
  std::vector<Point> out(size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = center(k);
  return out;
}

Grid build_grid(const Domain& domain, int nx, int ny) { return Grid(domain, nx, ny); }

namespace {

void check_conductivity(std::span<const double> values, double lower, double upper) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    if (!std::isfinite(v) || v < lower || v > upper) {
      std::ostringstream msg;
      msg << "conductivity at cell " << i << " is " << v << ", outside [" << lower
          << ", " << upper << "]";
      throw InvalidArgument(msg.str());
    }
  }
}

}  // namespace

ScalarField::ScalarField(Grid grid, std::vector<double> values, FieldRole role)
    : grid_(std::move(grid)), values_(std::move(values)), role_(role) {
  if (values_.size() != grid_.size()) {
    throw InvalidArgument("field has " + std::to_string(values_.size()) +
                          " values for a grid of " + std::to_string(grid_.size()) +
                          " cells");
  }
  if (role_ == FieldRole::conductivity) {
    check_conductivity(values_, std::numeric_limits<double>::min(),
                       std::numeric_limits<double>::max());
  }
}

ScalarField ScalarField::conductivity(Grid grid, std::vector<double> values,
                                      ConductivityBounds bounds) {
  if (!(bounds.lower > 0.0) || !(bounds.lower <= bounds.upper)) {
    throw InvalidArgument("conductivity bounds need 0 < lower <= upper");
  }
  check_conductivity(values, bounds.lower, bounds.upper);
  return ScalarField(std::move(grid), std::move(values), FieldRole::conductivity);
}

ScalarField ScalarField::constant(const Grid& grid, double value, FieldRole role) {
  return ScalarField(grid, std::vector<double>(grid.size(), value), role);
}

double ScalarField::at(Point p) const { return values_[locate_cell(grid_, p)]; }

ScalarField ScalarField::with_role(FieldRole role) const {
  return ScalarField(grid_, values_, role);
}

ScalarField sample_function(const Grid& grid, const PlaneFunction& f, FieldRole role) {
  std::vector<double> values(grid.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    const Point c = grid.center(k);
    const double v = f(c.x, c.y);
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "function is not finite at cell " << k << " (" << c.x << ", " << c.y
          << ")";
      throw EvaluationError(msg.str());
    }
    values[k] = v;
  }
  return ScalarField(grid, std::move(values), role);
}

int owner_cell(double t, int n) {
  const double r = std::round(t);
  if (std::abs(t - r) <= 1e-9 * std::max(1.0, std::abs(t))) t = r;
  const int i = static_cast<int>(std::ceil(t)) - 1;
  return std::clamp(i, 0, n - 1);
}

std::size_t locate_cell(const Grid& grid, Point p) {
  const Domain& d = grid.domain();
  if (!d.contains(p)) {
    std::ostringstream msg;
    msg << "point (" << p.x << ", " << p.y << ") lies outside the domain";
    throw OutOfDomain(msg.str());
  }
  const int i = owner_cell((p.x - d.x0) / grid.hx(), grid.nx());
  const int j = owner_cell((p.y - d.y0) / grid.hy(), grid.ny());
  return grid.index(i, j);
}

void write_field(std::ostream& os, const ScalarField& field) {
  const Grid& g = field.grid();
  const Domain& d = g.domain();
  os << std::setprecision(17);
  os << "FIELD " << g.nx() << ' ' << g.ny() << ' ' << d.x0 << ' ' << d.x1 << ' '
     << d.y0 << ' ' << d.y1 << '\n';
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      if (i) os << ' ';
      os << field[g.index(i, j)];
    }
    os << '\n';
  }
}

namespace {

[[noreturn]] void parse_fail(int line, const std::string& what) {
  throw ParseError("line " + std::to_string(line) + ": " + what);
}

std::vector<double> parse_numbers(const std::string& text, int line) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') parse_fail(line, "not a number: '" + tok + "'");
    if (!std::isfinite(v)) parse_fail(line, "non-finite value '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

ScalarField read_field(std::istream& is, FieldRole role) {
  std::string line;
  int lineno = 1;
  if (!std::getline(is, line)) parse_fail(lineno, "missing FIELD header");
  std::istringstream header(line);
  std::string tag;
  long nx = 0, ny = 0;
  double x0, x1, y0, y1;
  if (!(header >> tag) || tag != "FIELD") parse_fail(lineno, "expected 'FIELD' header");
  if (!(header >> nx >> ny >> x0 >> x1 >> y0 >> y1)) {
    parse_fail(lineno, "header needs: FIELD nx ny x0 x1 y0 y1");
  }
  if (nx < 1 || ny < 1) parse_fail(lineno, "cell counts must be positive");

  Domain dom;
  dom.x0 = x0;
  dom.x1 = x1;
  dom.y0 = y0;
  dom.y1 = y1;
  Grid grid(dom, static_cast<int>(nx), static_cast<int>(ny));

  std::vector<double> values;
  values.reserve(grid.size());
  for (long j = 0; j < ny; ++j) {
    ++lineno;
    if (!std::getline(is, line)) parse_fail(lineno, "expected " + std::to_string(ny) + " data rows");
    auto row = parse_numbers(line, lineno);
    if (static_cast<long>(row.size()) != nx) {
      parse_fail(lineno, "expected " + std::to_string(nx) + " values, found " +
                             std::to_string(row.size()));
    }
    values.insert(values.end(), row.begin(), row.end());
  }
  while (std::getline(is, line)) {
    ++lineno;
    if (!blank(line)) parse_fail(lineno, "unexpected data after last row");
  }
  return ScalarField(grid, std::move(values), role);
}

void save_field(const std::string& path, const ScalarField& field) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_field(os, field);
}

ScalarField load_field(const std::string& path, FieldRole role) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  try {
    return read_field(is, role);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace heatk
