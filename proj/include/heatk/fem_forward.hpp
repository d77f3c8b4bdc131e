#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "heatk/grid.hpp"
#include "heatk/test_functions.hpp"

namespace heatk {

using ValueGradFunction = std::function<ValueGrad(double, double)>;

/// Steady conduction -div(k grad u) + c u = f with u = g on the Dirichlet
/// edges and k du/dn = h on the Neumann edges, discretized by bilinear
/// quadrilaterals on a regular mesh_n x mesh_n mesh.
///
/// k is sampled once per element at its centroid (piecewise constant, so
/// material interfaces stay sharp); c and f are evaluated at the 2x2 Gauss
/// points and h at the 2-point Gauss points of each Neumann edge segment.
/// Dirichlet values are constant per edge; a corner shared by two Dirichlet
/// edges takes the value of the vertical edge.
struct ForwardProblem {
  Domain domain;
  int mesh_n = 200;
  PlaneFunction k = [](double, double) { return 1.0; };
  PlaneFunction c = [](double, double) { return 0.0; };
  PlaneFunction f = [](double, double) { return 0.0; };
  PlaneFunction h = [](double, double) { return 0.0; };
  double g_left = 0.0;
  double g_right = 0.0;
  double g_bottom = 0.0;
  double g_top = 0.0;

  double dirichlet_value(Edge e) const;
};

/// Piecewise-constant lookup of a cell field, usable as a coefficient.
PlaneFunction field_function(const ScalarField& field);

/// Nodal Q1 solution on the forward mesh. Nodes are row-major with x
/// fastest; element e = j * n + i spans nodes (i, j) .. (i + 1, j + 1).
class TemperatureSolution {
 public:
  TemperatureSolution(Domain domain, int mesh_n, std::vector<double> nodal,
                      std::vector<double> element_k);

  const Domain& domain() const { return domain_; }
  int mesh_n() const { return n_; }
  double hx() const { return domain_.width() / n_; }
  double hy() const { return domain_.height() / n_; }
  std::size_t node_count() const { return nodal_.size(); }
  std::size_t element_count() const { return element_k_.size(); }
  std::span<const double> nodal() const { return nodal_; }
  std::span<const double> element_conductivity() const { return element_k_; }

  std::size_t node(int i, int j) const {
    return static_cast<std::size_t>(j) * (n_ + 1) + i;
  }
  Point node_position(std::size_t id) const;

  /// Element containing p; on shared edges the smaller index wins. Throws
  /// OutOfDomain for points outside the closed domain.
  std::size_t element_of(Point p) const;

  ValueGrad at(Point p) const;
  std::vector<ValueGrad> evaluate(std::span<const Point> points) const;

  /// Value and physical gradient at reference coordinates (xi, eta) in
  /// [-1, 1]^2 of element e.
  ValueGrad at_local(std::size_t e, double xi, double eta) const;

  /// Same interpolation applied to an arbitrary nodal vector on this mesh.
  ValueGrad interpolate(std::span<const double> nodal, std::size_t e, double xi,
                        double eta) const;

 private:
  Domain domain_;
  int n_;
  std::vector<double> nodal_;
  std::vector<double> element_k_;
};

/// Galerkin solve. Throws InvalidArgument for mesh_n < 2, k <= 0 or c < 0,
/// EvaluationError for non-finite coefficients and SolverError when the
/// factorization fails or the relative residual exceeds 1e-10.
TemperatureSolution solve_forward(const ForwardProblem& problem);

std::vector<ValueGrad> evaluate(const TemperatureSolution& sol,
                                std::span<const Point> points);

/// u, u_x, u_y sampled at the cell centers of an inverse grid.
struct SampledSolution {
  ScalarField u;
  ScalarField ux;
  ScalarField uy;
};
SampledSolution sample_solution(const TemperatureSolution& sol, const Grid& grid);

// Weak-form quantities, integrated elementwise with 2x2 Gauss points and
// the same coefficient sampling as the assembly.

/// F(u, v) = int(k grad u . grad v + c u v) - int f v - int_N h v.
double variational_residual(const ForwardProblem& problem,
                            const TemperatureSolution& sol,
                            const ValueGradFunction& v);
/// Same with v given by nodal values on the solution mesh.
double variational_residual(const ForwardProblem& problem,
                            const TemperatureSolution& sol,
                            std::span<const double> v_nodal);

/// J(w) = 1/2 int(k |grad w|^2 + c w^2) - int f w - int_N h w.
double energy(const ForwardProblem& problem, const ValueGradFunction& w);
double energy(const ForwardProblem& problem, const TemperatureSolution& sol);
/// J(u + t v) for an analytic variation v.
double energy(const ForwardProblem& problem, const TemperatureSolution& sol,
              const ValueGradFunction& v, double t);
/// J(u + t v) for a nodal variation v.
double energy(const ForwardProblem& problem, const TemperatureSolution& sol,
              std::span<const double> v_nodal, double t);

/// sqrt(int k |grad w|^2 + c w^2).
double energy_norm(const ForwardProblem& problem, const ValueGradFunction& w);
double energy_norm(const ForwardProblem& problem, const TemperatureSolution& sol);

/// L2 distance to an exact solution, 3x3 Gauss points per element.
double l2_error(const TemperatureSolution& sol, const PlaneFunction& exact);

}  // namespace heatk
