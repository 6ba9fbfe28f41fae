#pragma once

/// @file mat2.hpp
/// Fixed-size 2x2 matrices and dense real polynomials.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "bdz/errors.hpp"

namespace bdz {

inline constexpr double kDetThreshold = 1e-14;

template <typename T>
struct Mat2 {
  // row-major: (0,0) (0,1) (1,0) (1,1)
  std::array<T, 4> v{};

  constexpr Mat2() = default;
  constexpr Mat2(T m00, T m01, T m10, T m11) : v{m00, m01, m10, m11} {}

  template <typename U>
  explicit constexpr Mat2(const Mat2<U>& o)
      : v{T(o.v[0]), T(o.v[1]), T(o.v[2]), T(o.v[3])} {}

  static constexpr Mat2 identity() { return {T(1), T(0), T(0), T(1)}; }
  static constexpr Mat2 zero() { return {}; }
  static constexpr Mat2 diag(T d0, T d1) { return {d0, T(0), T(0), d1}; }

  constexpr T& operator()(int i, int j) { return v[2 * i + j]; }
  constexpr const T& operator()(int i, int j) const { return v[2 * i + j]; }

  constexpr Mat2 transpose() const { return {v[0], v[2], v[1], v[3]}; }
  constexpr T det() const { return v[0] * v[3] - v[1] * v[2]; }
  constexpr T trace() const { return v[0] + v[3]; }

  /// Adjugate over determinant; throws SingularError when |det| < 1e-14.
  Mat2 inverse() const {
    const T d = det();
    if (std::abs(d) < kDetThreshold) throw SingularError("2x2 matrix is singular");
    return {v[3] / d, -v[1] / d, -v[2] / d, v[0] / d};
  }

  constexpr Mat2& operator+=(const Mat2& o) {
    for (std::size_t k = 0; k < 4; ++k) v[k] += o.v[k];
    return *this;
  }
  constexpr Mat2& operator-=(const Mat2& o) {
    for (std::size_t k = 0; k < 4; ++k) v[k] -= o.v[k];
    return *this;
  }
  constexpr Mat2& operator*=(T s) {
    for (auto& e : v) e *= s;
    return *this;
  }

  friend constexpr Mat2 operator+(Mat2 a, const Mat2& b) { return a += b; }
  friend constexpr Mat2 operator-(Mat2 a, const Mat2& b) { return a -= b; }
  friend constexpr Mat2 operator-(const Mat2& a) { return {-a.v[0], -a.v[1], -a.v[2], -a.v[3]}; }
  friend constexpr Mat2 operator*(Mat2 a, T s) { return a *= s; }
  friend constexpr Mat2 operator*(T s, Mat2 a) { return a *= s; }
  friend constexpr Mat2 operator*(const Mat2& a, const Mat2& b) {
    return {a.v[0] * b.v[0] + a.v[1] * b.v[2], a.v[0] * b.v[1] + a.v[1] * b.v[3],
            a.v[2] * b.v[0] + a.v[3] * b.v[2], a.v[2] * b.v[1] + a.v[3] * b.v[3]};
  }
  friend constexpr bool operator==(const Mat2&, const Mat2&) = default;
};

using Mat2d = Mat2<double>;
using Mat2c = Mat2<std::complex<double>>;

/// Largest absolute entry.
template <typename T>
double max_abs(const Mat2<T>& m) {
  double r = 0.0;
  for (const auto& e : m.v) r = std::max(r, static_cast<double>(std::abs(e)));
  return r;
}

inline bool is_symmetric(const Mat2d& m, double tol) { return std::abs(m(0, 1) - m(1, 0)) <= tol; }

inline bool is_diagonal(const Mat2d& m, double tol) {
  return std::abs(m(0, 1)) <= tol && std::abs(m(1, 0)) <= tol;
}

/// Positive semi-definite test for a (near) symmetric 2x2 matrix.
inline bool is_psd(const Mat2d& m, double tol) {
  if (!is_symmetric(m, tol)) return false;
  const double off = 0.5 * (m(0, 1) + m(1, 0));
  return m(0, 0) >= -tol && m(1, 1) >= -tol && m(0, 0) * m(1, 1) - off * off >= -tol;
}

/// Dense real polynomial, coefficients in ascending powers.
class Poly {
 public:
  Poly() = default;
  explicit Poly(std::vector<double> coeffs) : c_(std::move(coeffs)) { trim(); }
  static Poly constant(double v) { return Poly({v}); }
  /// Coefficients given highest power first, as polynomials are usually written.
  static Poly from_descending(std::vector<double> coeffs) {
    std::reverse(coeffs.begin(), coeffs.end());
    return Poly(std::move(coeffs));
  }

  const std::vector<double>& coeffs() const { return c_; }
  int degree() const { return c_.empty() ? -1 : static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  double coeff(std::size_t k) const { return k < c_.size() ? c_[k] : 0.0; }

  template <typename T>
  T operator()(T x) const {
    T acc = T(0);
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + T(*it);
    return acc;
  }

  Poly derivative() const {
    std::vector<double> d;
    for (std::size_t k = 1; k < c_.size(); ++k) d.push_back(static_cast<double>(k) * c_[k]);
    return Poly(std::move(d));
  }

  /// Synthetic division by (x - root); the remainder is returned through `remainder`.
  Poly deflate(double root, double* remainder = nullptr) const {
    if (c_.empty()) {
      if (remainder) *remainder = 0.0;
      return {};
    }
    std::vector<double> q(c_.size() - 1);
    double acc = 0.0;
    for (std::size_t k = c_.size(); k-- > 0;) {
      acc = acc * root + c_[k];
      if (k > 0) q[k - 1] = acc;
    }
    if (remainder) *remainder = acc;
    return Poly(std::move(q));
  }

  friend Poly operator+(const Poly& a, const Poly& b) {
    std::vector<double> r(std::max(a.c_.size(), b.c_.size()), 0.0);
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = a.coeff(k) + b.coeff(k);
    return Poly(std::move(r));
  }
  friend Poly operator-(const Poly& a) { return a * -1.0; }
  friend Poly operator-(const Poly& a, const Poly& b) { return a + (-b); }
  friend Poly operator*(const Poly& a, double s) {
    std::vector<double> r = a.c_;
    for (auto& e : r) e *= s;
    return Poly(std::move(r));
  }
  friend Poly operator*(double s, const Poly& a) { return a * s; }
  friend Poly operator*(const Poly& a, const Poly& b) {
    if (a.c_.empty() || b.c_.empty()) return {};
    std::vector<double> r(a.c_.size() + b.c_.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
    return Poly(std::move(r));
  }

 private:
  void trim() {
    while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
  }
  std::vector<double> c_;
};

}  // namespace bdz
