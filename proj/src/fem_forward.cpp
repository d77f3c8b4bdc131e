#include "heatk/fem_forward.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <array>
#include <cmath>
#include <sstream>

#include "heatk/error.hpp"

namespace heatk {

namespace {

constexpr std::array<double, 4> kXiA{-1.0, 1.0, 1.0, -1.0};
constexpr std::array<double, 4> kEtaA{-1.0, -1.0, 1.0, 1.0};
const double kGauss = 1.0 / std::sqrt(3.0);

struct Shape {
  std::array<double, 4> n;
  std::array<double, 4> dx;
  std::array<double, 4> dy;
};

Shape shape(double xi, double eta, double hx, double hy) {
  Shape s;
  for (int a = 0; a < 4; ++a) {
    s.n[a] = 0.25 * (1.0 + kXiA[a] * xi) * (1.0 + kEtaA[a] * eta);
    s.dx[a] = 0.25 * kXiA[a] * (1.0 + kEtaA[a] * eta) * 2.0 / hx;
    s.dy[a] = 0.25 * kEtaA[a] * (1.0 + kXiA[a] * xi) * 2.0 / hy;
  }
  return s;
}

double checked(double v, const char* what, Point p) {
  if (!std::isfinite(v)) {
    std::ostringstream msg;
    msg << what << " is not finite at (" << p.x << ", " << p.y << ")";
    throw EvaluationError(msg.str());
  }
  return v;
}

struct MeshView {
  Domain d;
  int n;
  double hx;
  double hy;

  MeshView(const Domain& dom, int mesh_n)
      : d(dom), n(mesh_n), hx(dom.width() / mesh_n), hy(dom.height() / mesh_n) {}

  std::size_t element(int i, int j) const { return static_cast<std::size_t>(j) * n + i; }
  Point to_global(int i, int j, double xi, double eta) const {
    return {d.x0 + (i + 0.5 * (1.0 + xi)) * hx, d.y0 + (j + 0.5 * (1.0 + eta)) * hy};
  }
  std::array<std::size_t, 4> nodes(int i, int j) const {
    const std::size_t s = static_cast<std::size_t>(n) + 1;
    const std::size_t n0 = static_cast<std::size_t>(j) * s + i;
    return {n0, n0 + 1, n0 + s + 1, n0 + s};
  }
};

std::vector<double> element_conductivity(const ForwardProblem& p, const MeshView& m) {
  std::vector<double> k(static_cast<std::size_t>(m.n) * m.n);
  for (int j = 0; j < m.n; ++j) {
    for (int i = 0; i < m.n; ++i) {
      const Point c = m.to_global(i, j, 0.0, 0.0);
      const double v = checked(p.k(c.x, c.y), "conductivity", c);
      if (v <= 0.0) {
        std::ostringstream msg;
        msg << "conductivity must be positive, got " << v << " at (" << c.x << ", " << c.y
            << ")";
        throw InvalidArgument(msg.str());
      }
      k[m.element(i, j)] = v;
    }
  }
  return k;
}

// Sum over elements and 2x2 Gauss points of vol(i, j, xi, eta, p, k_e) * w,
// plus the 2-point Gauss sum of bnd(i, j, xi, eta, p) * w over Neumann edges.
template <class Vol, class Bnd>
double integrate(const ForwardProblem& prob, const MeshView& m,
                 std::span<const double> elem_k, Vol&& vol, Bnd&& bnd) {
  const double det = 0.25 * m.hx * m.hy;
  double total = 0.0;
  for (int j = 0; j < m.n; ++j) {
    for (int i = 0; i < m.n; ++i) {
      const double ke = elem_k[m.element(i, j)];
      double acc = 0.0;
      for (double eta : {-kGauss, kGauss}) {
        for (double xi : {-kGauss, kGauss}) {
          acc += vol(i, j, xi, eta, m.to_global(i, j, xi, eta), ke);
        }
      }
      total += acc * det;
    }
  }
  const EdgeSet& neu = prob.domain.neumann_edges;
  auto edge_sum = [&](int i, int j, bool along_x, double fixed) {
    double acc = 0.0;
    for (double s : {-kGauss, kGauss}) {
      const double xi = along_x ? s : fixed;
      const double eta = along_x ? fixed : s;
      acc += bnd(i, j, xi, eta, m.to_global(i, j, xi, eta));
    }
    return acc * 0.5 * (along_x ? m.hx : m.hy);
  };
  for (int i = 0; i < m.n; ++i) {
    if (neu.contains(Edge::bottom)) total += edge_sum(i, 0, true, -1.0);
    if (neu.contains(Edge::top)) total += edge_sum(i, m.n - 1, true, 1.0);
  }
  for (int j = 0; j < m.n; ++j) {
    if (neu.contains(Edge::left)) total += edge_sum(0, j, false, -1.0);
    if (neu.contains(Edge::right)) total += edge_sum(m.n - 1, j, false, 1.0);
  }
  return total;
}

void validate(const ForwardProblem& p) {
  p.domain.validate();
  if (p.mesh_n < 2) {
    throw InvalidArgument("forward mesh needs at least 2 elements per axis, got " +
                          std::to_string(p.mesh_n));
  }
}

double coefficient_c(const ForwardProblem& p, Point x) {
  const double c = checked(p.c(x.x, x.y), "reaction coefficient", x);
  if (c < 0.0) {
    std::ostringstream msg;
    msg << "reaction coefficient must be >= 0, got " << c << " at (" << x.x << ", " << x.y
        << ")";
    throw InvalidArgument(msg.str());
  }
  return c;
}

}  // namespace

double ForwardProblem::dirichlet_value(Edge e) const {
  switch (e) {
    case Edge::left: return g_left;
    case Edge::right: return g_right;
    case Edge::bottom: return g_bottom;
    case Edge::top: return g_top;
  }
  return 0.0;
}

PlaneFunction field_function(const ScalarField& field) {
  return [field](double x, double y) { return field.at({x, y}); };
}

TemperatureSolution::TemperatureSolution(Domain domain, int mesh_n,
                                         std::vector<double> nodal,
                                         std::vector<double> element_k)
    : domain_(domain), n_(mesh_n), nodal_(std::move(nodal)), element_k_(std::move(element_k)) {
  const std::size_t s = static_cast<std::size_t>(n_) + 1;
  if (n_ < 1 || nodal_.size() != s * s ||
      element_k_.size() != static_cast<std::size_t>(n_) * n_) {
    throw InvalidArgument("inconsistent temperature solution sizes");
  }
}

Point TemperatureSolution::node_position(std::size_t id) const {
  const std::size_t s = static_cast<std::size_t>(n_) + 1;
  return {domain_.x0 + static_cast<double>(id % s) * hx(),
          domain_.y0 + static_cast<double>(id / s) * hy()};
}

std::size_t TemperatureSolution::element_of(Point p) const {
  if (!domain_.contains(p)) {
    std::ostringstream msg;
    msg << "point (" << p.x << ", " << p.y << ") lies outside the domain";
    throw OutOfDomain(msg.str());
  }
  const int i = owner_cell((p.x - domain_.x0) / hx(), n_);
  const int j = owner_cell((p.y - domain_.y0) / hy(), n_);
  return static_cast<std::size_t>(j) * n_ + i;
}

ValueGrad TemperatureSolution::interpolate(std::span<const double> nodal, std::size_t e,
                                           double xi, double eta) const {
  const MeshView m(domain_, n_);
  const int i = static_cast<int>(e % n_);
  const int j = static_cast<int>(e / n_);
  const auto nd = m.nodes(i, j);
  const Shape s = shape(xi, eta, m.hx, m.hy);
  ValueGrad out;
  for (int a = 0; a < 4; ++a) {
    const double ua = nodal[nd[a]];
    out.v += s.n[a] * ua;
    out.dx += s.dx[a] * ua;
    out.dy += s.dy[a] * ua;
  }
  return out;
}

ValueGrad TemperatureSolution::at_local(std::size_t e, double xi, double eta) const {
  return interpolate(nodal_, e, xi, eta);
}

ValueGrad TemperatureSolution::at(Point p) const {
  const std::size_t e = element_of(p);
  const int i = static_cast<int>(e % n_);
  const int j = static_cast<int>(e / n_);
  const double xi = 2.0 * ((p.x - domain_.x0) / hx() - i) - 1.0;
  const double eta = 2.0 * ((p.y - domain_.y0) / hy() - j) - 1.0;
  return at_local(e, std::clamp(xi, -1.0, 1.0), std::clamp(eta, -1.0, 1.0));
}

std::vector<ValueGrad> TemperatureSolution::evaluate(std::span<const Point> points) const {
  std::vector<ValueGrad> out;
  out.reserve(points.size());
  for (const Point& p : points) out.push_back(at(p));
  return out;
}

std::vector<ValueGrad> evaluate(const TemperatureSolution& sol, std::span<const Point> points) {
  return sol.evaluate(points);
}

TemperatureSolution solve_forward(const ForwardProblem& problem) {
  validate(problem);
  const MeshView m(problem.domain, problem.mesh_n);
  const int n = m.n;
  const std::size_t s = static_cast<std::size_t>(n) + 1;
  const std::size_t nn = s * s;
  std::vector<double> elem_k = element_conductivity(problem, m);

  // Dirichlet marking; vertical edges take precedence at corners.
  const EdgeSet& dir = problem.domain.dirichlet_edges;
  std::vector<char> fixed(nn, 0);
  std::vector<double> u(nn, 0.0);
  auto mark = [&](std::size_t id, double g) {
    fixed[id] = 1;
    u[id] = g;
  };
  for (int i = 0; i <= n; ++i) {
    if (dir.contains(Edge::bottom)) mark(static_cast<std::size_t>(i), problem.g_bottom);
    if (dir.contains(Edge::top)) mark(static_cast<std::size_t>(n) * s + i, problem.g_top);
  }
  for (int j = 0; j <= n; ++j) {
    if (dir.contains(Edge::left)) mark(static_cast<std::size_t>(j) * s, problem.g_left);
    if (dir.contains(Edge::right)) mark(static_cast<std::size_t>(j) * s + n, problem.g_right);
  }

  std::vector<Eigen::Index> free_id(nn, -1);
  Eigen::Index nfree = 0;
  for (std::size_t id = 0; id < nn; ++id) {
    if (!fixed[id]) free_id[id] = nfree++;
  }
  if (nfree == 0) {
    return TemperatureSolution(problem.domain, n, std::move(u), std::move(elem_k));
  }

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(n) * n * 16);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nfree);
  const double det = 0.25 * m.hx * m.hy;

  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const auto nd = m.nodes(i, j);
      const double ke = elem_k[m.element(i, j)];
      double kloc[4][4] = {};
      double floc[4] = {};
      for (double eta : {-kGauss, kGauss}) {
        for (double xi : {-kGauss, kGauss}) {
          const Point x = m.to_global(i, j, xi, eta);
          const double c = coefficient_c(problem, x);
          const double f = checked(problem.f(x.x, x.y), "source", x);
          const Shape sh = shape(xi, eta, m.hx, m.hy);
          for (int a = 0; a < 4; ++a) {
            floc[a] += f * sh.n[a] * det;
            for (int b = 0; b < 4; ++b) {
              kloc[a][b] += (ke * (sh.dx[a] * sh.dx[b] + sh.dy[a] * sh.dy[b]) +
                             c * sh.n[a] * sh.n[b]) * det;
            }
          }
        }
      }
      for (int a = 0; a < 4; ++a) {
        const Eigen::Index ra = free_id[nd[a]];
        if (ra < 0) continue;
        rhs[ra] += floc[a];
        for (int b = 0; b < 4; ++b) {
          const Eigen::Index cb = free_id[nd[b]];
          if (cb < 0) {
            rhs[ra] -= kloc[a][b] * u[nd[b]];
          } else {
            trips.emplace_back(ra, cb, kloc[a][b]);
          }
        }
      }
    }
  }

  // Neumann flux contributions.
  const EdgeSet& neu = problem.domain.neumann_edges;
  auto add_flux = [&](std::size_t na, std::size_t nb, Point pa, Point pb, double len) {
    for (double sg : {-kGauss, kGauss}) {
      const double wa = 0.5 * (1.0 - sg);
      const double wb = 0.5 * (1.0 + sg);
      const Point x{wa * pa.x + wb * pb.x, wa * pa.y + wb * pb.y};
      const double h = checked(problem.h(x.x, x.y), "boundary flux", x);
      if (free_id[na] >= 0) rhs[free_id[na]] += h * wa * 0.5 * len;
      if (free_id[nb] >= 0) rhs[free_id[nb]] += h * wb * 0.5 * len;
    }
  };
  const TemperatureSolution geom(problem.domain, n, std::vector<double>(nn, 0.0), elem_k);
  for (int i = 0; i < n; ++i) {
    if (neu.contains(Edge::bottom)) {
      const std::size_t a = i, b = i + 1;
      add_flux(a, b, geom.node_position(a), geom.node_position(b), m.hx);
    }
    if (neu.contains(Edge::top)) {
      const std::size_t a = static_cast<std::size_t>(n) * s + i, b = a + 1;
      add_flux(a, b, geom.node_position(a), geom.node_position(b), m.hx);
    }
  }
  for (int j = 0; j < n; ++j) {
    if (neu.contains(Edge::left)) {
      const std::size_t a = static_cast<std::size_t>(j) * s, b = a + s;
      add_flux(a, b, geom.node_position(a), geom.node_position(b), m.hy);
    }
    if (neu.contains(Edge::right)) {
      const std::size_t a = static_cast<std::size_t>(j) * s + n, b = a + s;
      add_flux(a, b, geom.node_position(a), geom.node_position(b), m.hy);
    }
  }

  Eigen::SparseMatrix<double> K(nfree, nfree);
  K.setFromTriplets(trips.begin(), trips.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(K);
  if (ldlt.info() != Eigen::Success) {
    throw SolverError("stiffness factorization failed (singular or indefinite system)");
  }
  Eigen::VectorXd x = ldlt.solve(rhs);
  if (ldlt.info() != Eigen::Success || !x.allFinite()) {
    throw SolverError("stiffness solve failed");
  }
  const double rnorm = (K * x - rhs).norm();
  const double scale = std::max(rhs.norm(), (K * x).norm());
  if (scale > 0.0 && rnorm > 1e-10 * scale) {
    std::ostringstream msg;
    msg << "forward solve relative residual " << rnorm / scale << " exceeds 1e-10";
    throw SolverError(msg.str());
  }
  for (std::size_t id = 0; id < nn; ++id) {
    if (free_id[id] >= 0) u[id] = x[free_id[id]];
  }
  return TemperatureSolution(problem.domain, n, std::move(u), std::move(elem_k));
}

SampledSolution sample_solution(const TemperatureSolution& sol, const Grid& grid) {
  const std::size_t L = grid.size();
  std::vector<double> u(L), ux(L), uy(L);
  for (std::size_t k = 0; k < L; ++k) {
    const ValueGrad vg = sol.at(grid.center(k));
    u[k] = vg.v;
    ux[k] = vg.dx;
    uy[k] = vg.dy;
  }
  return {ScalarField(grid, std::move(u), FieldRole::temperature),
          ScalarField(grid, std::move(ux)), ScalarField(grid, std::move(uy))};
}

namespace {

void require_same_mesh(const ForwardProblem& p, const TemperatureSolution& sol) {
  if (!(p.domain == sol.domain()) || p.mesh_n != sol.mesh_n()) {
    throw InvalidArgument("problem and solution use different meshes");
  }
}

// Candidate-generic energy: w(i, j, xi, eta, p) -> ValueGrad.
template <class W>
double energy_impl(const ForwardProblem& p, const MeshView& m, std::span<const double> ek,
                   W&& w) {
  return integrate(
      p, m, ek,
      [&](int i, int j, double xi, double eta, Point x, double ke) {
        const ValueGrad g = w(i, j, xi, eta, x);
        const double c = coefficient_c(p, x);
        const double f = checked(p.f(x.x, x.y), "source", x);
        return 0.5 * (ke * (g.dx * g.dx + g.dy * g.dy) + c * g.v * g.v) - f * g.v;
      },
      [&](int i, int j, double xi, double eta, Point x) {
        return -checked(p.h(x.x, x.y), "boundary flux", x) * w(i, j, xi, eta, x).v;
      });
}

template <class V>
double residual_impl(const ForwardProblem& p, const TemperatureSolution& sol, V&& v) {
  require_same_mesh(p, sol);
  const MeshView m(p.domain, p.mesh_n);
  const auto ek = sol.element_conductivity();
  return integrate(
      p, m, ek,
      [&](int i, int j, double xi, double eta, Point x, double ke) {
        const ValueGrad u = sol.at_local(m.element(i, j), xi, eta);
        const ValueGrad t = v(i, j, xi, eta, x);
        const double c = coefficient_c(p, x);
        const double f = checked(p.f(x.x, x.y), "source", x);
        return ke * (u.dx * t.dx + u.dy * t.dy) + c * u.v * t.v - f * t.v;
      },
      [&](int i, int j, double xi, double eta, Point x) {
        return -checked(p.h(x.x, x.y), "boundary flux", x) * v(i, j, xi, eta, x).v;
      });
}

ValueGrad combine(const ValueGrad& a, const ValueGrad& b, double t) {
  return {a.v + t * b.v, a.dx + t * b.dx, a.dy + t * b.dy};
}

}  // namespace

double variational_residual(const ForwardProblem& problem, const TemperatureSolution& sol,
                            const ValueGradFunction& v) {
  return residual_impl(problem, sol,
                       [&](int, int, double, double, Point x) { return v(x.x, x.y); });
}

double variational_residual(const ForwardProblem& problem, const TemperatureSolution& sol,
                            std::span<const double> v_nodal) {
  if (v_nodal.size() != sol.node_count()) {
    throw InvalidArgument("nodal test function has the wrong length");
  }
  const int n = sol.mesh_n();
  return residual_impl(problem, sol, [&](int i, int j, double xi, double eta, Point) {
    return sol.interpolate(v_nodal, static_cast<std::size_t>(j) * n + i, xi, eta);
  });
}

double energy(const ForwardProblem& problem, const ValueGradFunction& w) {
  validate(problem);
  const MeshView m(problem.domain, problem.mesh_n);
  const auto ek = element_conductivity(problem, m);
  return energy_impl(problem, m, ek,
                     [&](int, int, double, double, Point x) { return w(x.x, x.y); });
}

double energy(const ForwardProblem& problem, const TemperatureSolution& sol) {
  return energy(problem, sol, std::span<const double>(sol.nodal()), 0.0);
}

double energy(const ForwardProblem& problem, const TemperatureSolution& sol,
              const ValueGradFunction& v, double t) {
  require_same_mesh(problem, sol);
  const MeshView m(problem.domain, problem.mesh_n);
  return energy_impl(problem, m, sol.element_conductivity(),
                     [&](int i, int j, double xi, double eta, Point x) {
                       return combine(sol.at_local(m.element(i, j), xi, eta), v(x.x, x.y), t);
                     });
}

double energy(const ForwardProblem& problem, const TemperatureSolution& sol,
              std::span<const double> v_nodal, double t) {
  require_same_mesh(problem, sol);
  if (v_nodal.size() != sol.node_count()) {
    throw InvalidArgument("nodal variation has the wrong length");
  }
  const MeshView m(problem.domain, problem.mesh_n);
  return energy_impl(problem, m, sol.element_conductivity(),
                     [&](int i, int j, double xi, double eta, Point) {
                       const std::size_t e = m.element(i, j);
                       return combine(sol.at_local(e, xi, eta),
                                      sol.interpolate(v_nodal, e, xi, eta), t);
                     });
}

namespace {

template <class W>
double energy_norm_impl(const ForwardProblem& p, const MeshView& m,
                        std::span<const double> ek, W&& w) {
  ForwardProblem no_boundary = p;
  no_boundary.domain.neumann_edges = EdgeSet{};
  const double sq = integrate(
      no_boundary, m, ek,
      [&](int i, int j, double xi, double eta, Point x, double ke) {
        const ValueGrad g = w(i, j, xi, eta, x);
        return ke * (g.dx * g.dx + g.dy * g.dy) + coefficient_c(p, x) * g.v * g.v;
      },
      [](int, int, double, double, Point) { return 0.0; });
  return std::sqrt(std::max(sq, 0.0));
}

}  // namespace

double energy_norm(const ForwardProblem& problem, const ValueGradFunction& w) {
  validate(problem);
  const MeshView m(problem.domain, problem.mesh_n);
  const auto ek = element_conductivity(problem, m);
  return energy_norm_impl(problem, m, ek,
                          [&](int, int, double, double, Point x) { return w(x.x, x.y); });
}

double energy_norm(const ForwardProblem& problem, const TemperatureSolution& sol) {
  require_same_mesh(problem, sol);
  const MeshView m(problem.domain, problem.mesh_n);
  return energy_norm_impl(problem, m, sol.element_conductivity(),
                          [&](int i, int j, double xi, double eta, Point) {
                            return sol.at_local(m.element(i, j), xi, eta);
                          });
}

double l2_error(const TemperatureSolution& sol, const PlaneFunction& exact) {
  const MeshView m(sol.domain(), sol.mesh_n());
  const double g = std::sqrt(0.6);
  const std::array<double, 3> pts{-g, 0.0, g};
  const std::array<double, 3> wts{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  const double det = 0.25 * m.hx * m.hy;
  double sum = 0.0;
  for (int j = 0; j < m.n; ++j) {
    for (int i = 0; i < m.n; ++i) {
      for (int b = 0; b < 3; ++b) {
        for (int a = 0; a < 3; ++a) {
          const Point x = m.to_global(i, j, pts[a], pts[b]);
          const double d = sol.at_local(m.element(i, j), pts[a], pts[b]).v - exact(x.x, x.y);
          sum += wts[a] * wts[b] * d * d * det;
        }
      }
    }
  }
  return std::sqrt(sum);
}

}  // namespace heatk
