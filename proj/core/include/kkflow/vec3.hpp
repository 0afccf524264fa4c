#pragma once

#include <array>
#include <cmath>

namespace kkflow {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm2(const Vec3& v) { return dot(v, v); }
inline double norm(const Vec3& v) { return std::sqrt(norm2(v)); }
inline Vec3 normalized(const Vec3& v) { return v / norm(v); }

// Row-major 3x3 matrix; m[i][j].
using Mat3 = std::array<std::array<double, 3>, 3>;
// Rank-3 array; t[i][j][k].
using Ten3 = std::array<Mat3, 3>;

inline Mat3 zero_mat3() { return Mat3{}; }
inline Ten3 zero_ten3() { return Ten3{}; }

inline double levi_civita(int i, int j, int k) {
  return 0.5 * (i - j) * (j - k) * (k - i);
}

inline double max_abs(const Mat3& m) {
  double r = 0.0;
  for (const auto& row : m)
    for (double v : row) r = std::max(r, std::abs(v));
  return r;
}

inline double max_abs(const Ten3& t) {
  double r = 0.0;
  for (const auto& m : t) r = std::max(r, max_abs(m));
  return r;
}

}  // namespace kkflow
