#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "heatk/grid.hpp"
#include "heatk/test_functions.hpp"

namespace heatk {

/// Collocated optimality equations A K = F. Row r belongs to the test
/// function with single index r + 1; column l to inverse-grid cell l.
struct DesignSystem {
  Eigen::MatrixXd A;
  Eigen::VectorXd F;
  // provenance
  std::optional<Grid> grid;  // unset when loaded from bare matrix files
  int family_M = 0;
  std::string source;

  Eigen::Index rows() const { return A.rows(); }
  Eigen::Index cols() const { return A.cols(); }
};

/// a_rl = u_x,l v^r_x,l + u_y,l v^r_y,l and f_r = -sum_i c_i u_i v^r_i. The
/// common cell measure is dropped from both sides. Test functions are
/// evaluated in the x-coordinate normalized to [0, 1] across the domain.
DesignSystem assemble(const ScalarField& u, const ScalarField& ux, const ScalarField& uy,
                      const ScalarField& c, const std::vector<TestFunction>& family);

// "MATRIX rows cols" followed by one line per row.
void write_matrix(std::ostream& os, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix(std::istream& is);
void save_matrix(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd load_matrix(const std::string& path);

}  // namespace heatk
