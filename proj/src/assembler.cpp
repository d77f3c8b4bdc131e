#include "heatk/assembler.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "heatk/error.hpp"

namespace heatk {

namespace {

void require_finite(const ScalarField& f, const char* name) {
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!std::isfinite(f[i])) {
      throw EvaluationError(std::string(name) + " sample at cell " + std::to_string(i) +
                            " is not finite");
    }
  }
}

}  // namespace

DesignSystem assemble(const ScalarField& u, const ScalarField& ux, const ScalarField& uy,
                      const ScalarField& c, const std::vector<TestFunction>& family) {
  const Grid& g = u.grid();
  if (!(ux.grid() == g) || !(uy.grid() == g) || !(c.grid() == g)) {
    throw InvalidArgument("assemble: all sample fields must share one grid");
  }
  if (family.empty()) throw InvalidArgument("assemble: empty test-function family");
  require_finite(u, "u");
  require_finite(ux, "u_x");
  require_finite(uy, "u_y");
  require_finite(c, "c");

  const Eigen::Index R = static_cast<Eigen::Index>(family.size());
  const Eigen::Index L = static_cast<Eigen::Index>(g.size());
  const Domain& d = g.domain();
  const double sx = 1.0 / d.width();

  DesignSystem sys;
  sys.A.resize(R, L);
  sys.F.resize(R);
  for (Eigen::Index r = 0; r < R; ++r) {
    const TestFunction& tf = family[static_cast<std::size_t>(r)];
    double fr = 0.0;
    for (Eigen::Index l = 0; l < L; ++l) {
      const std::size_t li = static_cast<std::size_t>(l);
      const Point p = g.center(li);
      const ValueGrad v = tf.eval((p.x - d.x0) * sx, p.y);
      sys.A(r, l) = ux[li] * v.dx * sx + uy[li] * v.dy;
      fr -= c[li] * u[li] * v.v;
    }
    sys.F[r] = fr;
  }
  sys.grid = g;
  for (const TestFunction& tf : family) sys.family_M = std::max({sys.family_M, tf.m, tf.n});
  return sys;
}

void write_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
  os << std::setprecision(17);
  os << "MATRIX " << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) os << ' ';
      os << m(r, c);
    }
    os << '\n';
  }
}

Eigen::MatrixXd read_matrix(std::istream& is) {
  std::string line;
  int lineno = 1;
  auto fail = [&](const std::string& what) -> void {
    throw ParseError("line " + std::to_string(lineno) + ": " + what);
  };
  if (!std::getline(is, line)) fail("missing MATRIX header");
  std::istringstream header(line);
  std::string tag;
  long rows = -1, cols = -1;
  if (!(header >> tag) || tag != "MATRIX" || !(header >> rows >> cols) || rows < 0 ||
      cols < 0) {
    fail("header needs: MATRIX rows cols");
  }
  Eigen::MatrixXd m(rows, cols);
  for (long r = 0; r < rows; ++r) {
    ++lineno;
    if (!std::getline(is, line)) fail("expected " + std::to_string(rows) + " rows");
    std::istringstream in(line);
    std::string tok;
    long c = 0;
    while (in >> tok) {
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0' || !std::isfinite(v)) {
        fail("bad number '" + tok + "'");
      }
      if (c >= cols) fail("more than " + std::to_string(cols) + " values");
      m(r, c++) = v;
    }
    if (c != cols) {
      fail("expected " + std::to_string(cols) + " values, found " + std::to_string(c));
    }
  }
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") != std::string::npos) fail("unexpected trailing data");
  }
  return m;
}

void save_matrix(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_matrix(os, m);
}

Eigen::MatrixXd load_matrix(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  try {
    return read_matrix(is);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace heatk
