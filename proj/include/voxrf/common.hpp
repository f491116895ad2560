#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace voxrf {

// Input or configuration rejected before any work happened.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem or serialization failure.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Optimization blew up and was aborted.
struct DivergenceError : std::runtime_error {
  explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3() = default;
  Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline Vec3 normalized(const Vec3& v) {
  double n = norm(v);
  if (n == 0.0) throw ValidationError("cannot normalize zero vector");
  return v / n;
}

struct Aabb {
  Vec3 lo, hi;

  bool contains(const Vec3& p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z && p.z <= hi.z;
  }
  Vec3 extent() const { return hi - lo; }
  double diagonal() const { return norm(hi - lo); }
  void validate() const {
    if (!(lo.x < hi.x && lo.y < hi.y && lo.z < hi.z))
      throw ValidationError("degenerate bounds: lo must be strictly below hi on every axis");
  }
};

// Column-major 3x3, columns are the camera basis vectors.
struct Mat3 {
  std::array<Vec3, 3> col;

  Vec3 operator*(const Vec3& v) const { return col[0] * v.x + col[1] * v.y + col[2] * v.z; }
  Mat3 transposed() const {
    Mat3 t;
    t.col[0] = {col[0].x, col[1].x, col[2].x};
    t.col[1] = {col[0].y, col[1].y, col[2].y};
    t.col[2] = {col[0].z, col[1].z, col[2].z};
    return t;
  }
  static Mat3 identity() {
    return {{Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}}};
  }
};

inline double determinant(const Mat3& m) { return dot(m.col[0], cross(m.col[1], m.col[2])); }

inline double softplus(double x) {
  // Overflow-safe: for large x, log1p(exp(-|x|)) + max(x, 0).
  if (x > 0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

inline double softplus_deriv(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Inverse of softplus; input must be positive.
inline double softplus_inverse(double y) {
  if (y <= 0) throw ValidationError("softplus_inverse requires positive input");
  if (y > 30) return y;
  return std::log(std::expm1(y));
}

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

inline double sigmoid_deriv(double x) {
  double s = sigmoid(x);
  return s * (1.0 - s);
}

// Maps a raw density to [0, 1) for display and histograms.
inline double softened_density(double sigma) { return 2.0 * (sigmoid(sigma) - 0.5); }

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

}  // namespace voxrf
