#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "acfb/geometry.hpp"

namespace acfb {

// Uniform tensor grid on a box, d in {1,2}. Nodes are the unknowns, cells
// carry the quadrature: integrals are midpoint sums over cells, gradients are
// forward differences anchored at each cell's lower corner.
struct Grid {
  int dim = 1;
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{1.0, 0.0};
  std::array<int, 2> n{2, 1};  // nodes per axis; n[1] == 1 in 1d
  std::array<double, 2> h{1.0, 0.0};

  static Grid line(double a, double b, int n1);
  static Grid box(double ax, double bx, double ay, double by, int n1, int n2);

  int node_count() const { return n[0] * n[1]; }
  int cells(int axis) const { return dim == 1 && axis == 1 ? 1 : n[axis] - 1; }
  int cell_count() const { return dim == 1 ? n[0] - 1 : (n[0] - 1) * (n[1] - 1); }

  int node_index(int i, int j) const { return i + n[0] * j; }
  int cell_index(int ci, int cj) const { return ci + (n[0] - 1) * cj; }

  Vec2 node(int i, int j) const {
    return {lo[0] + i * h[0], dim == 2 ? lo[1] + j * h[1] : 0.0};
  }
  Vec2 node(int idx) const { return node(idx % n[0], idx / n[0]); }

  Vec2 cell_center(int ci, int cj) const {
    return {lo[0] + (ci + 0.5) * h[0], dim == 2 ? lo[1] + (cj + 0.5) * h[1] : 0.0};
  }

  double cell_measure() const { return dim == 1 ? h[0] : h[0] * h[1]; }

  bool on_border(int i, int j) const {
    if (i == 0 || i == n[0] - 1) return true;
    return dim == 2 && (j == 0 || j == n[1] - 1);
  }

  bool same_layout(const Grid& o) const;
};

// Nodal scalar field with a mask of fixed (Dirichlet) nodes.
struct Field {
  Grid grid;
  std::vector<double> v;
  std::vector<std::uint8_t> fixed;  // 1 = value pinned (never touched by solvers)

  static Field zeros(const Grid& g);
  // Evaluates fn at every node; the box border becomes the fixed mask.
  static Field from_function(const Grid& g, const std::function<double(Vec2)>& fn);

  double& at(int i, int j) { return v[grid.node_index(i, j)]; }
  double at(int i, int j) const { return v[grid.node_index(i, j)]; }

  double sup_abs() const;
  double min_value() const;
  double max_value() const;
};

// Per-cell scalar values (gradient magnitudes, integrands).
struct CellField {
  Grid grid;
  std::vector<double> v;
};

// Per-cell gradient, forward differences on the lower corner stencil.
struct GradientField {
  Grid grid;
  std::vector<double> gx, gy;  // gy empty in 1d

  CellField magnitude() const;
};

GradientField gradient(const Field& u);

// Midpoint quadrature: sum of cell values times the cell measure.
double integrate(const CellField& f);

// Node sets of a Euclidean ball. interior: |x - c| < r. ring: nodes outside
// the ball with a grid neighbor inside; they carry the Dirichlet data when a
// ball problem is solved. cells: cells touching at least one interior node.
struct BallNodes {
  std::vector<int> interior;
  std::vector<int> ring;
  std::vector<int> cells;
};

BallNodes ball_nodes(const Grid& g, const Ball& b);
std::vector<int> nodes_in_closed_ball(const Grid& g, const Ball& b);
std::vector<int> cells_with_center_in(const Grid& g, const Ball& b);

// Average of nodal values over the open ball's interior nodes.
double node_average(const Field& u, const Ball& b);
// Average of cell values over cells whose center lies in the ball.
double cell_average(const CellField& f, const Ball& b);

// Values of a field restricted to a ball, with the boundary ring trace.
struct BallPatch {
  Ball ball;
  BallNodes nodes;
  std::vector<double> interior_values;
  std::vector<double> ring_values;
};

BallPatch restrict_to_ball(const Field& u, const Ball& b);
std::vector<std::pair<int, double>> boundary_trace(const Field& u, const Ball& b);

// Bilinear (linear in 1d) interpolation; x is clamped to the box.
double interpolate(const Field& u, Vec2 x);

// Little-endian binary snapshot: header (dims, box) then node values, then
// the fixed mask. CSV export lists x1[,x2],value per node.
void save_field(const Field& u, const std::string& path);
Field load_field(const std::string& path);
void save_field_csv(const Field& u, const std::string& path);

}  // namespace acfb
