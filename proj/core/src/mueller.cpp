#include "polopt/mueller.hpp"

#include <algorithm>

namespace polopt {

namespace {

MuellerMatrix wrap(const Mat4<double>& m) { return MuellerMatrix{m}; }

}  // namespace

double wrap_half_turn(double radians) {
  double r = std::fmod(radians, std::numbers::pi);
  if (r < 0.0) r += std::numbers::pi;
  // fmod of a tiny negative value plus π can round up to π itself.
  if (r >= std::numbers::pi) r = 0.0;
  return r;
}

double wrap_symmetric(double radians) {
  double r = wrap_half_turn(radians);
  if (r > std::numbers::pi / 2.0) r -= std::numbers::pi;
  return r;
}

Angle Angle::canonical() const { return Angle(wrap_half_turn(radians_)); }

double StokesVector::degree_of_polarization() const {
  if (s[0] <= 0.0) return 0.0;
  return std::sqrt(s[1] * s[1] + s[2] * s[2] + s[3] * s[3]) / s[0];
}

bool StokesVector::is_physical(double tol) const {
  if (s[0] < -tol) return false;
  const double pol = std::sqrt(s[1] * s[1] + s[2] * s[2] + s[3] * s[3]);
  return pol <= s[0] + tol;
}

MuellerMatrix MuellerMatrix::identity() { return diagonal(1.0, 1.0, 1.0, 1.0); }

MuellerMatrix MuellerMatrix::diagonal(double a, double b, double c, double d) {
  MuellerMatrix out;
  out.m[0][0] = a;
  out.m[1][1] = b;
  out.m[2][2] = c;
  out.m[3][3] = d;
  return out;
}

MuellerMatrix MuellerMatrix::from_row_major(const std::array<double, 16>& values) {
  MuellerMatrix out;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out.m[i][j] = values[4 * i + j];
  return out;
}

std::array<double, 16> MuellerMatrix::row_major() const {
  std::array<double, 16> out{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out[4 * i + j] = m[i][j];
  return out;
}

MuellerMatrix MuellerMatrix::transposed() const {
  MuellerMatrix out;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out.m[i][j] = m[j][i];
  return out;
}

bool MuellerMatrix::is_passive(double tol) const {
  const double m00 = m[0][0];
  for (const auto& row : m)
    for (double v : row)
      if (std::abs(v) > m00 + tol) return false;
  return true;
}

double MuellerMatrix::max_abs_diff(const MuellerMatrix& other) const {
  double worst = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) worst = std::max(worst, std::abs(m[i][j] - other.m[i][j]));
  return worst;
}

double MuellerMatrix::frobenius_distance(const MuellerMatrix& other) const {
  double acc = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const double d = m[i][j] - other.m[i][j];
      acc += d * d;
    }
  return std::sqrt(acc);
}

MuellerMatrix operator*(const MuellerMatrix& a, const MuellerMatrix& b) {
  MuellerMatrix out;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) acc += a.m[i][k] * b.m[k][j];
      out.m[i][j] = acc;
    }
  return out;
}

MuellerMatrix operator*(double c, const MuellerMatrix& a) {
  MuellerMatrix out = a;
  for (auto& row : out.m)
    for (double& v : row) v *= c;
  return out;
}

MuellerMatrix operator+(const MuellerMatrix& a, const MuellerMatrix& b) {
  MuellerMatrix out = a;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out.m[i][j] += b.m[i][j];
  return out;
}

StokesVector operator*(const MuellerMatrix& m, const StokesVector& s) { return apply(m, s); }

MuellerMatrix linear_polarizer(Angle theta) { return wrap(linear_polarizer_t(theta.radians())); }

MuellerMatrix quarter_wave_plate(Angle theta) { return wrap(quarter_wave_plate_t(theta.radians())); }

MuellerMatrix rotator(Angle theta) { return wrap(rotator_t(theta.radians())); }

MuellerMatrix rotate_mueller(const MuellerMatrix& m, Angle theta) {
  return rotator(Angle(-theta.radians())) * m * rotator(theta);
}

StokesVector apply(const MuellerMatrix& m, const StokesVector& s) {
  return StokesVector{mat_vec(m.m, s.s)};
}

}  // namespace polopt
