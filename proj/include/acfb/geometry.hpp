#pragma once

#include <cmath>

namespace acfb {

// Points and gradients live in R^2; 1d problems keep x2 = 0.
struct Vec2 {
  double x1 = 0.0;
  double x2 = 0.0;

  double norm() const { return std::sqrt(x1 * x1 + x2 * x2); }
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x1 + b.x1, a.x2 + b.x2}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x1 - b.x1, a.x2 - b.x2}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x1, s * a.x2}; }
inline double dot(Vec2 a, Vec2 b) { return a.x1 * b.x1 + a.x2 * b.x2; }
inline double dist(Vec2 a, Vec2 b) { return (a - b).norm(); }

struct Ball {
  Vec2 center;
  double radius = 0.0;

  Ball scaled(double factor) const { return {center, factor * radius}; }
};

// Lebesgue measure of the continuum ball, used by the smallness conditions.
inline double ball_measure(int dim, double r) {
  return dim == 1 ? 2.0 * r : M_PI * r * r;
}

}  // namespace acfb
