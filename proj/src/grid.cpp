#include "acfb/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace acfb {

Grid Grid::line(double a, double b, int n1) {
  if (n1 < 3) throw std::invalid_argument("grid needs at least 3 nodes per axis");
  if (!(b > a)) throw std::invalid_argument("empty interval");
  Grid g;
  g.dim = 1;
  g.lo = {a, 0.0};
  g.hi = {b, 0.0};
  g.n = {n1, 1};
  g.h = {(b - a) / (n1 - 1), 0.0};
  return g;
}

Grid Grid::box(double ax, double bx, double ay, double by, int n1, int n2) {
  if (n1 < 3 || n2 < 3) throw std::invalid_argument("grid needs at least 3 nodes per axis");
  if (!(bx > ax) || !(by > ay)) throw std::invalid_argument("empty box");
  Grid g;
  g.dim = 2;
  g.lo = {ax, ay};
  g.hi = {bx, by};
  g.n = {n1, n2};
  g.h = {(bx - ax) / (n1 - 1), (by - ay) / (n2 - 1)};
  return g;
}

bool Grid::same_layout(const Grid& o) const {
  return dim == o.dim && n == o.n && lo == o.lo && hi == o.hi;
}

Field Field::zeros(const Grid& g) {
  Field f;
  f.grid = g;
  f.v.assign(g.node_count(), 0.0);
  f.fixed.assign(g.node_count(), 0);
  for (int j = 0; j < g.n[1]; ++j)
    for (int i = 0; i < g.n[0]; ++i)
      if (g.on_border(i, j)) f.fixed[g.node_index(i, j)] = 1;
  return f;
}

Field Field::from_function(const Grid& g, const std::function<double(Vec2)>& fn) {
  Field f = zeros(g);
  for (int j = 0; j < g.n[1]; ++j)
    for (int i = 0; i < g.n[0]; ++i) f.v[g.node_index(i, j)] = fn(g.node(i, j));
  return f;
}

double Field::sup_abs() const {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

double Field::min_value() const {
  double m = v.empty() ? 0.0 : v[0];
  for (double x : v) m = std::min(m, x);
  return m;
}

double Field::max_value() const {
  double m = v.empty() ? 0.0 : v[0];
  for (double x : v) m = std::max(m, x);
  return m;
}

GradientField gradient(const Field& u) {
  const Grid& g = u.grid;
  GradientField out;
  out.grid = g;
  if (g.dim == 1) {
    int nc = g.n[0] - 1;
    out.gx.resize(nc);
    for (int i = 0; i < nc; ++i) out.gx[i] = (u.v[i + 1] - u.v[i]) / g.h[0];
    return out;
  }
  int ncx = g.n[0] - 1, ncy = g.n[1] - 1;
  out.gx.resize(ncx * ncy);
  out.gy.resize(ncx * ncy);
  for (int cj = 0; cj < ncy; ++cj) {
    for (int ci = 0; ci < ncx; ++ci) {
      int a = g.node_index(ci, cj);
      int c = g.cell_index(ci, cj);
      out.gx[c] = (u.v[a + 1] - u.v[a]) / g.h[0];
      out.gy[c] = (u.v[a + g.n[0]] - u.v[a]) / g.h[1];
    }
  }
  return out;
}

CellField GradientField::magnitude() const {
  CellField m;
  m.grid = grid;
  m.v.resize(gx.size());
  if (grid.dim == 1) {
    for (std::size_t i = 0; i < gx.size(); ++i) m.v[i] = std::fabs(gx[i]);
  } else {
    for (std::size_t i = 0; i < gx.size(); ++i)
      m.v[i] = std::sqrt(gx[i] * gx[i] + gy[i] * gy[i]);
  }
  return m;
}

double integrate(const CellField& f) {
  double s = 0.0;
  for (double x : f.v) s += x;
  return s * f.grid.cell_measure();
}

BallNodes ball_nodes(const Grid& g, const Ball& b) {
  if (!(b.radius > 0.0)) throw std::invalid_argument("ball radius must be positive");
  BallNodes out;
  std::vector<std::uint8_t> inside(g.node_count(), 0);
  for (int j = 0; j < g.n[1]; ++j) {
    for (int i = 0; i < g.n[0]; ++i) {
      if (dist(g.node(i, j), b.center) < b.radius) {
        inside[g.node_index(i, j)] = 1;
        out.interior.push_back(g.node_index(i, j));
      }
    }
  }
  if (out.interior.empty()) throw std::invalid_argument("degenerate ball: contains no grid node");
  auto is_inside = [&](int i, int j) {
    return i >= 0 && i < g.n[0] && j >= 0 && j < g.n[1] && inside[g.node_index(i, j)];
  };
  for (int j = 0; j < g.n[1]; ++j) {
    for (int i = 0; i < g.n[0]; ++i) {
      if (inside[g.node_index(i, j)]) continue;
      bool touches = is_inside(i - 1, j) || is_inside(i + 1, j);
      if (g.dim == 2) touches = touches || is_inside(i, j - 1) || is_inside(i, j + 1);
      if (touches) out.ring.push_back(g.node_index(i, j));
    }
  }
  int ncx = g.n[0] - 1, ncy = g.dim == 2 ? g.n[1] - 1 : 1;
  for (int cj = 0; cj < ncy; ++cj) {
    for (int ci = 0; ci < ncx; ++ci) {
      bool touch = inside[g.node_index(ci, cj)] || inside[g.node_index(ci + 1, cj)];
      if (g.dim == 2)
        touch = touch || inside[g.node_index(ci, cj + 1)] || inside[g.node_index(ci + 1, cj + 1)];
      if (touch) out.cells.push_back(g.cell_index(ci, cj));
    }
  }
  return out;
}

std::vector<int> nodes_in_closed_ball(const Grid& g, const Ball& b) {
  std::vector<int> out;
  double r = b.radius * (1.0 + 1e-12);
  for (int j = 0; j < g.n[1]; ++j)
    for (int i = 0; i < g.n[0]; ++i)
      if (dist(g.node(i, j), b.center) <= r) out.push_back(g.node_index(i, j));
  return out;
}

std::vector<int> cells_with_center_in(const Grid& g, const Ball& b) {
  std::vector<int> out;
  int ncx = g.n[0] - 1, ncy = g.dim == 2 ? g.n[1] - 1 : 1;
  for (int cj = 0; cj < ncy; ++cj)
    for (int ci = 0; ci < ncx; ++ci)
      if (dist(g.cell_center(ci, cj), b.center) < b.radius)
        out.push_back(g.cell_index(ci, cj));
  return out;
}

double node_average(const Field& u, const Ball& b) {
  BallNodes bn = ball_nodes(u.grid, b);
  double s = 0.0;
  for (int idx : bn.interior) s += u.v[idx];
  return s / static_cast<double>(bn.interior.size());
}

double cell_average(const CellField& f, const Ball& b) {
  std::vector<int> cells = cells_with_center_in(f.grid, b);
  if (cells.empty()) throw std::invalid_argument("degenerate ball: contains no cell center");
  double s = 0.0;
  for (int c : cells) s += f.v[c];
  return s / static_cast<double>(cells.size());
}

BallPatch restrict_to_ball(const Field& u, const Ball& b) {
  BallPatch p;
  p.ball = b;
  p.nodes = ball_nodes(u.grid, b);
  p.interior_values.reserve(p.nodes.interior.size());
  for (int idx : p.nodes.interior) p.interior_values.push_back(u.v[idx]);
  p.ring_values.reserve(p.nodes.ring.size());
  for (int idx : p.nodes.ring) p.ring_values.push_back(u.v[idx]);
  return p;
}

std::vector<std::pair<int, double>> boundary_trace(const Field& u, const Ball& b) {
  BallNodes bn = ball_nodes(u.grid, b);
  std::vector<std::pair<int, double>> out;
  out.reserve(bn.ring.size());
  for (int idx : bn.ring) out.emplace_back(idx, u.v[idx]);
  return out;
}

double interpolate(const Field& u, Vec2 x) {
  const Grid& g = u.grid;
  double sx = (x.x1 - g.lo[0]) / g.h[0];
  sx = std::clamp(sx, 0.0, static_cast<double>(g.n[0] - 1));
  int i = std::min(static_cast<int>(sx), g.n[0] - 2);
  double fx = sx - i;
  if (g.dim == 1) return (1.0 - fx) * u.v[i] + fx * u.v[i + 1];
  double sy = (x.x2 - g.lo[1]) / g.h[1];
  sy = std::clamp(sy, 0.0, static_cast<double>(g.n[1] - 1));
  int j = std::min(static_cast<int>(sy), g.n[1] - 2);
  double fy = sy - j;
  int a = g.node_index(i, j);
  double v00 = u.v[a], v10 = u.v[a + 1];
  double v01 = u.v[a + g.n[0]], v11 = u.v[a + g.n[0] + 1];
  return (1.0 - fy) * ((1.0 - fx) * v00 + fx * v10) + fy * ((1.0 - fx) * v01 + fx * v11);
}

namespace {
constexpr char kMagic[4] = {'A', 'C', 'F', 'B'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ofstream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<char*>(b), 4);
}

std::uint32_t get_u32(std::ifstream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f64(std::ofstream& os, double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
  os.write(reinterpret_cast<char*>(b), 8);
}

double get_f64(std::ifstream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}
}  // namespace

void save_field(const Field& u, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os.write(kMagic, 4);
  put_u32(os, kVersion);
  put_u32(os, static_cast<std::uint32_t>(u.grid.dim));
  for (int a = 0; a < 2; ++a) put_u32(os, static_cast<std::uint32_t>(u.grid.n[a]));
  for (int a = 0; a < 2; ++a) {
    put_f64(os, u.grid.lo[a]);
    put_f64(os, u.grid.hi[a]);
  }
  for (double x : u.v) put_f64(os, x);
  os.write(reinterpret_cast<const char*>(u.fixed.data()),
           static_cast<std::streamsize>(u.fixed.size()));
  if (!os) throw std::runtime_error("write failed: " + path);
}

Field load_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw std::runtime_error("bad field file: " + path);
  std::uint32_t version = get_u32(is);
  if (version != kVersion) throw std::runtime_error("unsupported field version in " + path);
  int dim = static_cast<int>(get_u32(is));
  int n1 = static_cast<int>(get_u32(is));
  int n2 = static_cast<int>(get_u32(is));
  double lo1 = get_f64(is), hi1 = get_f64(is);
  double lo2 = get_f64(is), hi2 = get_f64(is);
  Grid g = dim == 1 ? Grid::line(lo1, hi1, n1) : Grid::box(lo1, hi1, lo2, hi2, n1, n2);
  Field f = Field::zeros(g);
  for (double& x : f.v) x = get_f64(is);
  is.read(reinterpret_cast<char*>(f.fixed.data()), static_cast<std::streamsize>(f.fixed.size()));
  if (!is) throw std::runtime_error("truncated field file: " + path);
  return f;
}

void save_field_csv(const Field& u, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << (u.grid.dim == 1 ? "x1,value\n" : "x1,x2,value\n");
  char buf[96];
  for (int j = 0; j < u.grid.n[1]; ++j) {
    for (int i = 0; i < u.grid.n[0]; ++i) {
      Vec2 x = u.grid.node(i, j);
      if (u.grid.dim == 1)
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", x.x1, u.at(i, j));
      else
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", x.x1, x.x2, u.at(i, j));
      os << buf;
    }
  }
}

}  // namespace acfb
