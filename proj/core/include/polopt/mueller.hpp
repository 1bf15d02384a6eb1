#pragma once

// Stokes-Mueller algebra for ideal polarization elements.
//
// Element builders are templates over the scalar type so the same formulas
// serve plain doubles and the reverse-mode tape (polopt::ad::Var). Every
// element depends on its angle only through cos 2θ and sin 2θ.

#include <array>
#include <cmath>
#include <numbers>

namespace polopt {

template <class T>
using Vec4 = std::array<T, 4>;

template <class T>
using Mat4 = std::array<std::array<T, 4>, 4>;

/// Rotation angle about the optical axis, in radians.
class Angle {
 public:
  constexpr Angle() = default;
  constexpr explicit Angle(double radians) : radians_(radians) {}

  static Angle from_degrees(double degrees) {
    return Angle(degrees * std::numbers::pi / 180.0);
  }

  constexpr double radians() const { return radians_; }
  double degrees() const { return radians_ * 180.0 / std::numbers::pi; }

  /// Representative in [0, π).
  Angle canonical() const;

  friend constexpr bool operator==(Angle, Angle) = default;

 private:
  double radians_ = 0.0;
};

/// Wraps an angle in radians to [0, π).
double wrap_half_turn(double radians);

/// Wraps an angle difference in radians to (-π/2, π/2].
double wrap_symmetric(double radians);

struct StokesVector {
  Vec4<double> s{0.0, 0.0, 0.0, 0.0};

  double& operator[](int i) { return s[i]; }
  double operator[](int i) const { return s[i]; }

  static StokesVector unpolarized(double intensity) { return {{intensity, 0.0, 0.0, 0.0}}; }

  double degree_of_polarization() const;

  /// s0 >= 0 and s1²+s2²+s3² <= s0², both to within `tol`.
  bool is_physical(double tol = 1e-9) const;
};

/// Real 4x4 polarimetric transfer matrix, row-major m[i][j].
struct MuellerMatrix {
  Mat4<double> m{};

  double& operator()(int i, int j) { return m[i][j]; }
  double operator()(int i, int j) const { return m[i][j]; }

  static MuellerMatrix identity();
  static MuellerMatrix zero() { return {}; }
  static MuellerMatrix diagonal(double a, double b, double c, double d);
  static MuellerMatrix from_row_major(const std::array<double, 16>& values);
  std::array<double, 16> row_major() const;

  MuellerMatrix transposed() const;

  /// |m[i][j]| <= m[0][0] for every entry, to within `tol`.
  bool is_passive(double tol = 1e-9) const;

  double max_abs_diff(const MuellerMatrix& other) const;
  double frobenius_distance(const MuellerMatrix& other) const;
};

MuellerMatrix operator*(const MuellerMatrix& a, const MuellerMatrix& b);
MuellerMatrix operator*(double c, const MuellerMatrix& a);
MuellerMatrix operator+(const MuellerMatrix& a, const MuellerMatrix& b);
StokesVector operator*(const MuellerMatrix& m, const StokesVector& s);

// ---------------------------------------------------------------------------
// Generic element formulas.

namespace detail {

template <class T>
Mat4<T> zero_mat() {
  Mat4<T> out;
  for (auto& row : out) row.fill(T(0.0));
  return out;
}

}  // namespace detail

template <class T>
Mat4<T> linear_polarizer_t(const T& theta) {
  using std::cos;
  using std::sin;
  const T c = cos(theta * 2.0);
  const T s = sin(theta * 2.0);
  const T hc = c * 0.5;
  const T hs = s * 0.5;
  const T half(0.5);
  const T zero(0.0);
  return {{{half, hc, hs, zero},
           {hc, hc * c, hc * s, zero},
           {hs, hs * c, hs * s, zero},
           {zero, zero, zero, zero}}};
}

template <class T>
Mat4<T> quarter_wave_plate_t(const T& theta) {
  using std::cos;
  using std::sin;
  const T c = cos(theta * 2.0);
  const T s = sin(theta * 2.0);
  const T one(1.0);
  const T zero(0.0);
  return {{{one, zero, zero, zero},
           {zero, c * c, s * c, -s},
           {zero, s * c, s * s, c},
           {zero, s, -c, zero}}};
}

template <class T>
Mat4<T> rotator_t(const T& theta) {
  using std::cos;
  using std::sin;
  const T c = cos(theta * 2.0);
  const T s = sin(theta * 2.0);
  const T one(1.0);
  const T zero(0.0);
  return {{{one, zero, zero, zero},
           {zero, c, s, zero},
           {zero, -s, c, zero},
           {zero, zero, zero, one}}};
}

template <class T>
Vec4<T> mat_vec(const Mat4<T>& a, const Vec4<T>& v) {
  Vec4<T> out;
  for (int i = 0; i < 4; ++i) {
    T acc = a[i][0] * v[0];
    for (int j = 1; j < 4; ++j) acc = acc + a[i][j] * v[j];
    out[i] = acc;
  }
  return out;
}

/// Row vector times matrix: (vᵀ a)ᵀ.
template <class T>
Vec4<T> vec_mat(const Vec4<T>& v, const Mat4<T>& a) {
  Vec4<T> out;
  for (int j = 0; j < 4; ++j) {
    T acc = v[0] * a[0][j];
    for (int i = 1; i < 4; ++i) acc = acc + v[i] * a[i][j];
    out[j] = acc;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Double-precision element matrices.

MuellerMatrix linear_polarizer(Angle theta);
MuellerMatrix quarter_wave_plate(Angle theta);
MuellerMatrix rotator(Angle theta);

/// C(-θ) · m · C(θ): the matrix of `m` after rotating the object by θ.
MuellerMatrix rotate_mueller(const MuellerMatrix& m, Angle theta);

StokesVector apply(const MuellerMatrix& m, const StokesVector& s);

}  // namespace polopt
