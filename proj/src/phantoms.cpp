#include "heatk/phantoms.hpp"

#include <cmath>
#include <random>

#include <json.hpp>

#include "heatk/error.hpp"

namespace heatk {

using nlohmann::json;

namespace {

struct ContainsVisitor {
  Point p;
  bool operator()(const Rectangle& r) const {
    return p.x >= r.x0 && p.x <= r.x1 && p.y >= r.y0 && p.y <= r.y1;
  }
  bool operator()(const Disk& d) const {
    const double dx = p.x - d.cx, dy = p.y - d.cy;
    return dx * dx + dy * dy <= d.r * d.r;
  }
  bool operator()(const Polygon& poly) const {
    bool inside = false;
    const auto& v = poly.vertices;
    for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
      if ((v[i].y > p.y) != (v[j].y > p.y)) {
        const double xc = v[j].x + (p.y - v[j].y) * (v[i].x - v[j].x) / (v[i].y - v[j].y);
        if (p.x < xc) inside = !inside;
      }
    }
    return inside;
  }
};

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

Shape rect(double x0, double x1, double y0, double y1, Material m) {
  return {Rectangle{x0, x1, y0, y1}, m};
}

}  // namespace

bool Shape::contains(Point p) const { return std::visit(ContainsVisitor{p}, geometry); }

double PhantomSpec::conductivity_at(Point p) const {
  Material m = background;
  for (const Shape& s : shapes) {
    if (s.contains(p)) m = s.fill;
  }
  return value(m);
}

void PhantomSpec::validate() const {
  if (!(T1 > T2)) throw InvalidArgument("phantom requires T1 > T2");
  if (!(c >= 0.0) || !std::isfinite(c)) throw InvalidArgument("phantom requires c >= 0");
  if (!(gamma_fraction > 0.0)) throw InvalidArgument("phantom requires gamma_fraction > 0");
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const auto& g = shapes[i].geometry;
    bool ok = true;
    if (const auto* r = std::get_if<Rectangle>(&g)) {
      ok = in_unit(r->x0) && in_unit(r->x1) && in_unit(r->y0) && in_unit(r->y1) &&
           r->x0 < r->x1 && r->y0 < r->y1;
    } else if (const auto* d = std::get_if<Disk>(&g)) {
      ok = d->r > 0.0 && in_unit(d->cx - d->r) && in_unit(d->cx + d->r) &&
           in_unit(d->cy - d->r) && in_unit(d->cy + d->r);
    } else {
      const auto& v = std::get<Polygon>(g).vertices;
      ok = v.size() >= 3;
      for (const Point& p : v) ok = ok && in_unit(p.x) && in_unit(p.y);
    }
    if (!ok) throw InvalidArgument("shape " + std::to_string(i) + " does not lie inside the unit square");
  }
}

CaseId parse_case(const std::string& id) {
  if (id == "I" || id == "1") return CaseId::I;
  if (id == "II" || id == "2") return CaseId::II;
  if (id == "III" || id == "3") return CaseId::III;
  if (id == "IV" || id == "4") return CaseId::IV;
  throw InvalidArgument("unknown case '" + id + "' (expected I, II, III or IV)");
}

std::string to_string(CaseId id) {
  switch (id) {
    case CaseId::I: return "I";
    case CaseId::II: return "II";
    case CaseId::III: return "III";
    case CaseId::IV: return "IV";
  }
  return "?";
}

PhantomSpec make_case(CaseId id) {
  PhantomSpec s;
  s.name = "case-" + to_string(id);
  s.c = 1.0;
  switch (id) {
    case CaseId::I:
      // Low-conductivity matrix with three axis-aligned high-conductivity blocks.
      s.pair = MaterialPair(1.0, 300.0);
      s.T1 = 322.0;
      s.T2 = 283.0;
      s.gamma_fraction = 0.01;
      s.background = Material::low;
      s.shapes = {rect(0.15, 0.35, 0.20, 0.80, Material::high),
                  rect(0.45, 0.85, 0.60, 0.80, Material::high),
                  rect(0.55, 0.75, 0.15, 0.40, Material::high)};
      break;
    case CaseId::II:
      // No conductivities are stated for this case; the Case I pair is reused.
      s.pair = MaterialPair(1.0, 300.0);
      s.T1 = 318.15;
      s.T2 = 288.15;
      s.gamma_fraction = 0.0125;
      s.background = Material::low;
      s.shapes = {{Disk{0.30, 0.50, 0.18}, Material::high},
                  rect(0.55, 0.85, 0.25, 0.75, Material::high),
                  rect(0.62, 0.78, 0.42, 0.58, Material::low)};
      break;
    case CaseId::III:
      s.pair = MaterialPair(0.7, 100.0);
      s.T1 = 373.15;
      s.T2 = 353.15;
      s.gamma_fraction = 0.0125;
      s.background = Material::low;
      s.shapes = {rect(0.20, 0.80, 0.60, 0.75, Material::high),
                  rect(0.20, 0.35, 0.20, 0.60, Material::high),
                  rect(0.55, 0.80, 0.20, 0.35, Material::high)};
      break;
    case CaseId::IV:
      s.pair = MaterialPair(20.0, 125.0);
      s.T1 = 308.15;
      s.T2 = 298.15;
      s.gamma_fraction = 0.3153;
      s.background = Material::low;
      s.shapes = {{Polygon{{{0.20, 0.25}, {0.42, 0.15}, {0.55, 0.32}, {0.78, 0.22},
                            {0.85, 0.48}, {0.66, 0.58}, {0.80, 0.80}, {0.52, 0.86},
                            {0.44, 0.62}, {0.28, 0.78}, {0.16, 0.55}, {0.32, 0.44}}},
                   Material::high}};
      break;
  }
  return s;
}

ScalarField rasterize(const PhantomSpec& spec, const Grid& grid) {
  std::vector<double> v(grid.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = spec.conductivity_at(grid.center(k));
  return ScalarField::conductivity(grid, std::move(v), {spec.pair.low(), spec.pair.high()});
}

ForwardProblem forward_problem(const PhantomSpec& spec, int mesh_n) {
  spec.validate();
  ForwardProblem p;
  p.mesh_n = mesh_n;
  p.k = [spec](double x, double y) { return spec.conductivity_at({x, y}); };
  const double c = spec.c;
  p.c = [c](double, double) { return c; };
  p.g_left = spec.T1;
  p.g_right = spec.T2;
  return p;
}

ScalarField add_noise(const ScalarField& field, double relative_level, std::uint64_t seed) {
  if (!(relative_level >= 0.0)) throw InvalidArgument("noise level must be >= 0");
  if (relative_level == 0.0) return field;
  double ss = 0.0;
  for (double v : field.values()) ss += v * v;
  const double rms = std::sqrt(ss / static_cast<double>(field.size()));
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> out(field.values().begin(), field.values().end());
  for (double& v : out) v += relative_level * rms * normal(gen);
  const FieldRole role =
      field.role() == FieldRole::conductivity ? FieldRole::coefficient : field.role();
  return ScalarField(field.grid(), std::move(out), role);
}

namespace {

std::string material_name(Material m) { return m == Material::low ? "k_L" : "k_U"; }

Material material_from(const json& j, const std::string& key) {
  const std::string s = j.at(key).get<std::string>();
  if (s == "k_L" || s == "low") return Material::low;
  if (s == "k_U" || s == "high") return Material::high;
  throw ParseError("'" + key + "' must be \"k_L\" or \"k_U\", got \"" + s + "\"");
}

}  // namespace

std::string to_json(const PhantomSpec& spec) {
  json j;
  j["name"] = spec.name;
  j["pair"] = {{"k_L", spec.pair.low()}, {"k_U", spec.pair.high()}};
  j["background"] = material_name(spec.background);
  j["shapes"] = json::array();
  for (const Shape& s : spec.shapes) {
    json o;
    if (const auto* r = std::get_if<Rectangle>(&s.geometry)) {
      o = {{"kind", "rectangle"}, {"x0", r->x0}, {"x1", r->x1}, {"y0", r->y0}, {"y1", r->y1}};
    } else if (const auto* d = std::get_if<Disk>(&s.geometry)) {
      o = {{"kind", "disk"}, {"cx", d->cx}, {"cy", d->cy}, {"r", d->r}};
    } else {
      json verts = json::array();
      for (const Point& p : std::get<Polygon>(s.geometry).vertices) verts.push_back({p.x, p.y});
      o = {{"kind", "polygon"}, {"vertices", verts}};
    }
    o["fill"] = material_name(s.fill);
    j["shapes"].push_back(o);
  }
  j["T1"] = spec.T1;
  j["T2"] = spec.T2;
  j["c"] = spec.c;
  j["gamma_fraction"] = spec.gamma_fraction;
  j["gamma_normalizer"] = to_string(spec.gamma_normalizer);
  return j.dump(2);
}

PhantomSpec phantom_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("phantom JSON: ") + e.what());
  }
  try {
    PhantomSpec s;
    s.name = j.value("name", std::string{});
    const json& pr = j.at("pair");
    s.pair = pr.is_array() ? MaterialPair(pr.at(0).get<double>(), pr.at(1).get<double>())
                           : MaterialPair(pr.at("k_L").get<double>(), pr.at("k_U").get<double>());
    s.background = material_from(j, "background");
    for (const json& o : j.at("shapes")) {
      const std::string kind = o.at("kind").get<std::string>();
      Shape sh;
      sh.fill = material_from(o, "fill");
      if (kind == "rectangle") {
        sh.geometry = Rectangle{o.at("x0").get<double>(), o.at("x1").get<double>(),
                                o.at("y0").get<double>(), o.at("y1").get<double>()};
      } else if (kind == "disk") {
        sh.geometry = Disk{o.at("cx").get<double>(), o.at("cy").get<double>(),
                           o.at("r").get<double>()};
      } else if (kind == "polygon") {
        Polygon poly;
        for (const json& v : o.at("vertices")) {
          poly.vertices.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
        }
        sh.geometry = std::move(poly);
      } else {
        throw ParseError("unknown shape kind '" + kind + "'");
      }
      s.shapes.push_back(std::move(sh));
    }
    s.T1 = j.at("T1").get<double>();
    s.T2 = j.at("T2").get<double>();
    s.c = j.at("c").get<double>();
    s.gamma_fraction = j.at("gamma_fraction").get<double>();
    if (j.contains("gamma_normalizer")) {
      try {
        s.gamma_normalizer = parse_gamma_normalizer(j.at("gamma_normalizer").get<std::string>());
      } catch (const InvalidArgument& e) {
        throw ParseError(std::string("phantom JSON: ") + e.what());
      }
    }
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw ParseError(std::string("phantom JSON: ") + e.what());
  }
}

}  // namespace heatk
