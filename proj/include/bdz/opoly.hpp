#pragma once

/// @file opoly.hpp
/// Scalar polynomial families on Z and 2x2 matrix-valued polynomial families
/// attached to a block chain and its RA / AR factors. Polynomials are
/// represented by pointwise evaluation of their recurrences.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "bdz/errors.hpp"
#include "bdz/factor.hpp"
#include "bdz/mat2.hpp"
#include "bdz/seqcore.hpp"

namespace bdz {

// ---------------------------------------------------------------------------
// Scalar families

/// Q^1_n(x), Q^2_n(x) for |n| <= range; Q^1_0 = 1, Q^1_{-1} = 0, Q^2_0 = 0, Q^2_{-1} = 1.
struct ScalarQ {
  long range = 0;
  std::vector<double> q1, q2;  // element n + range

  double Q1(long n) const { return q1.at(static_cast<std::size_t>(n + range)); }
  double Q2(long n) const { return q2.at(static_cast<std::size_t>(n + range)); }

  /// Stacked matrix [[Q^1_n, Q^2_n], [Q^1_{-n-1}, Q^2_{-n-1}]].
  Mat2d stacked(std::size_t n) const {
    const long k = static_cast<long>(n);
    return {Q1(k), Q2(k), Q1(-k - 1), Q2(-k - 1)};
  }
};

inline ScalarQ eval_scalar_q(const BDChain& chain, double x, long range) {
  require_valid(chain);
  range = std::max(range, 1L);
  ScalarQ out;
  out.range = range;
  out.q1.assign(static_cast<std::size_t>(2 * range + 1), 0.0);
  out.q2.assign(out.q1.size(), 0.0);
  auto at = [range](std::vector<double>& v, long n) -> double& { return v[static_cast<std::size_t>(n + range)]; };
  at(out.q1, 0) = 1.0;
  at(out.q2, -1) = 1.0;
  for (auto* v : {&out.q1, &out.q2}) {
    for (long n = 0; n < range; ++n)
      at(*v, n + 1) = ((x - chain.b(n)) * at(*v, n) - chain.c(n) * at(*v, n - 1)) / chain.a(n);
    for (long n = -1; n > -range; --n)
      at(*v, n - 1) = ((x - chain.b(n)) * at(*v, n) - chain.a(n) * at(*v, n + 1)) / chain.c(n);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Matrix families

/// Q_0..Q_n at x from x Q_k = A_k Q_{k+1} + B_k Q_k + C_k Q_{k-1}, Q_0 = I.
inline std::vector<Mat2d> recurrence_family(const BlockChain& blocks, double x, std::size_t n) {
  std::vector<Mat2d> q;
  q.reserve(n + 1);
  q.push_back(Mat2d::identity());
  for (std::size_t k = 0; k < n; ++k) {
    const Blocks b = blocks.at(k);
    Mat2d rhs = (x * Mat2d::identity() - b.B) * q[k];
    if (k > 0) rhs -= b.C * q[k - 1];
    q.push_back(b.A.inverse() * rhs);
  }
  return q;
}

enum class MOPKind { Q, U, T, Qtilde, Qhat };

inline const char* to_string(MOPKind k) {
  switch (k) {
    case MOPKind::Q: return "Q";
    case MOPKind::U: return "U";
    case MOPKind::T: return "T";
    case MOPKind::Qtilde: return "Qtilde";
    case MOPKind::Qhat: return "Qhat";
  }
  return "?";
}

/// A matrix polynomial family over a source block chain.
///   U_0 = S_0, U_n = R_n Q_{n-1} + S_n Q_n;          Qtilde_n = U_n S_0^{-1}
///   T_0 = S~_0^{-1}, T_n = S~_n^{-1}(Q_n - R~_n T_{n-1}); Qhat_n = T_n S~_0
class MOPFamily {
 public:
  MOPFamily(MOPKind kind, BlockChain source, std::optional<FactorPair> factors = std::nullopt)
      : kind_(kind), source_(std::move(source)), factors_(std::move(factors)) {
    if (kind_ != MOPKind::Q && !factors_) throw ConfigError(std::string("family ") + to_string(kind_) + " needs factors");
  }

  static MOPFamily q(BlockChain blocks) { return {MOPKind::Q, std::move(blocks)}; }
  static MOPFamily u(const RAFactors& f) { return {MOPKind::U, ra_block_product(f), f}; }
  static MOPFamily qtilde(const RAFactors& f) { return {MOPKind::Qtilde, ra_block_product(f), f}; }
  static MOPFamily t(const ARFactors& f) { return {MOPKind::T, ar_block_product(f), f}; }
  static MOPFamily qhat(const ARFactors& f) { return {MOPKind::Qhat, ar_block_product(f), f}; }

  MOPKind kind() const { return kind_; }
  const BlockChain& source() const { return source_; }

  /// Values at x for indices 0..n.
  std::vector<Mat2d> evaluate(double x, std::size_t n) const {
    if (kind_ == MOPKind::Q) return recurrence_family(source_, x, n);
    const FactorPair& f = *factors_;
    const auto q = recurrence_family(source_, x, n);
    std::vector<Mat2d> out;
    out.reserve(n + 1);
    switch (kind_) {
      case MOPKind::U:
      case MOPKind::Qtilde: {
        const Mat2d right = kind_ == MOPKind::Qtilde ? f.S(0).inverse() : Mat2d::identity();
        for (std::size_t k = 0; k <= n; ++k) {
          const Mat2d u = k == 0 ? f.S(0) : f.R(k) * q[k - 1] + f.S(k) * q[k];
          out.push_back(u * right);
        }
        break;
      }
      case MOPKind::T:
      case MOPKind::Qhat: {
        std::vector<Mat2d> t;
        for (std::size_t k = 0; k <= n; ++k)
          t.push_back(k == 0 ? f.S(0).inverse() : f.S(k).inverse() * (q[k] - f.R(k) * t[k - 1]));
        const Mat2d right = kind_ == MOPKind::Qhat ? f.S(0) : Mat2d::identity();
        for (const auto& m : t) out.push_back(m * right);
        break;
      }
      case MOPKind::Q:
        break;
    }
    return out;
  }

 private:
  MOPKind kind_;
  BlockChain source_;
  std::optional<FactorPair> factors_;
};

inline std::vector<Mat2d> eval_mop(const MOPFamily& family, double x, std::size_t n) { return family.evaluate(x, n); }

/// U_n(0) = (-1)^n X_{n-1}^{-1} Y_{n-1} ... X_0^{-1} Y_0 S_0.
inline Mat2d u_at_zero(const RAFactors& f, std::size_t n) {
  Mat2d m = f.S(0);
  for (std::size_t k = 0; k < n; ++k) {
    const Mat2d xk = f.X(k);
    if (std::abs(xk.det()) < kDetThreshold) throw SingularError("X_" + std::to_string(k) + " is singular");
    m = -1.0 * (xk.inverse() * f.Y(k) * m);
  }
  return m;
}

inline double inf_norm(const Mat2d& m) {
  return std::max(std::abs(m(0, 0)) + std::abs(m(0, 1)), std::abs(m(1, 0)) + std::abs(m(1, 1)));
}

/// || U_n(x) - U_n(0) [I + x sum_{k<n} U_{k+1}(0)^{-1} X_k^{-1} Q_k(x)] ||_inf relative to the
/// magnitude of the terms on each side: max(1, ||R_n|| ||Q_{n-1}(x)|| + ||S_n|| ||Q_n(x)||,
/// ||U_n(0)|| (1 + sum_k ||x U_{k+1}(0)^{-1} X_k^{-1} Q_k(x)||)), all in the inf-norm.
/// U_{k+1}(0)^{-1} X_k^{-1} is formed from the factor inverses (-1)^{k+1} S_0^{-1} Y_0^{-1} X_0 ... Y_k^{-1}.
inline double u_sum_identity_check(const RAFactors& f, double x, std::size_t n) {
  const auto u = MOPFamily::u(f).evaluate(x, n);
  const auto q = recurrence_family(ra_block_product(f), x, n);
  Mat2d sum = Mat2d::identity();
  double mass = 1.0;
  Mat2d w = f.S(0).inverse();  // (-1)^k U_k(0)^{-1}
  double sign = -1.0;
  for (std::size_t k = 0; k < n; ++k, sign = -sign) {
    const Mat2d yk = f.Y(k);
    if (std::abs(yk.det()) < kDetThreshold) throw SingularError("Y_" + std::to_string(k) + " is singular");
    const Mat2d wy = w * yk.inverse();
    const Mat2d term = (sign * x) * (wy * q[k]);
    sum += term;
    mass += inf_norm(term);
    w = wy * f.X(k);
  }
  const Mat2d rhs = u_at_zero(f, n) * sum;
  double lhs_scale = inf_norm(f.S(n)) * inf_norm(q[n]);
  if (n > 0) lhs_scale += inf_norm(f.R(n)) * inf_norm(q[n - 1]);
  return inf_norm(u[n] - rhs) / std::max({1.0, lhs_scale, inf_norm(u_at_zero(f, n)) * mass});
}

// ---------------------------------------------------------------------------
// Norm matrices

enum class NormKind { Pi, PiTilde, PiHat };

struct NormMatrices {
  NormKind kind = NormKind::Pi;
  std::vector<Mat2d> values;  // n = 0..N

  const Mat2d& operator[](std::size_t n) const { return values.at(n); }
  std::size_t size() const { return values.size(); }
};

/// Pi_n = diag(pi_n, pi_{-n-1}) for n = 0..N.
inline NormMatrices norm_matrices(const PotentialCoeffs& pot, std::size_t n) {
  NormMatrices out{NormKind::Pi, {}};
  for (std::size_t k = 0; k <= n; ++k) out.values.push_back(pot.Pi(k));
  return out;
}

/// Pi~_n = Y_n^T Pi_n S_n^{-1} (RA) or Pi^_n = Y~_n^{-T} Pi_n S~_n (AR), n = 0..N.
/// `pot` holds the potential coefficients of the original chain.
inline NormMatrices norm_matrices(NormKind kind, const FactorPair& f, const PotentialCoeffs& pot, std::size_t n) {
  if (kind == NormKind::Pi) return norm_matrices(pot, n);
  if (pot.range() < static_cast<long>(n) + 1) throw std::out_of_range("potential range too small for norm matrices");
  NormMatrices out{kind, {}};
  for (std::size_t k = 0; k <= n; ++k) {
    if (kind == NormKind::PiTilde) {
      if (f.degenerate) throw DegenerateError("y0 = 0: Pi~ is undefined");
      out.values.push_back(f.Y(k).transpose() * pot.Pi(k) * f.S(k).inverse());
    } else {
      out.values.push_back(f.Y(k).transpose().inverse() * pot.Pi(k) * f.S(k));
    }
  }
  return out;
}

}  // namespace bdz
