#pragma once

/// @file factor.hpp
/// Stochastic reflecting-absorbing (RA) and absorbing-reflecting (AR)
/// factorizations of chains on Z and their Darboux transforms.
///
/// Both factorizations use the same two factor shapes:
///   reflecting: row 0 = (alpha, y0, x0) on states (-1, 0, 1); row n > 0
///               holds y_n and moves up with x_n; row -n holds y_{-n} and
///               moves down with x_{-n}.
///   absorbing:  state 0 absorbing; row n > 0 moves toward 0 with r_n and
///               holds s_n; same on the negative side.
/// RA: P = P_R P_A (two free parameters alpha, x0), Darboux P~ = P_A P_R.
/// AR: P = P~_A P~_R (unique), Darboux P^ = P~_R P~_A.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "bdz/cfrac.hpp"
#include "bdz/errors.hpp"
#include "bdz/mat2.hpp"
#include "bdz/seqcore.hpp"

namespace bdz {

inline constexpr double kDivisorThreshold = 1e-14;

/// Coefficients of one reflecting factor and one absorbing factor.
struct FactorPair {
  double alpha = 0.0;
  CoeffSeq x, y, s, r;
  long horizon = 0;
  bool stabilized = true;  // every sequence was constant at the horizon
  bool degenerate = false; // y0 == 0

  double reflecting(long i, long j) const {
    if (i == 0) {
      if (j == -1) return alpha;
      if (j == 0) return y(0);
      if (j == 1) return x(0);
      return 0.0;
    }
    if (j == i) return y(i);
    if (i > 0 && j == i + 1) return x(i);
    if (i < 0 && j == i - 1) return x(i);
    return 0.0;
  }

  double absorbing(long i, long j) const {
    if (i == 0) return j == 0 ? 1.0 : 0.0;
    if (j == i) return s(i);
    if (i > 0 && j == i - 1) return r(i);
    if (i < 0 && j == i + 1) return r(i);
    return 0.0;
  }

  // Block forms after relabeling.
  Mat2d Y(std::size_t n) const {
    if (n == 0) return {y(0), alpha, 0.0, y(-1)};
    return Mat2d::diag(y(idx(n)), y(-idx(n) - 1));
  }
  Mat2d X(std::size_t n) const { return Mat2d::diag(x(idx(n)), x(-idx(n) - 1)); }
  Mat2d S(std::size_t n) const {
    if (n == 0) return {1.0, 0.0, r(-1), s(-1)};
    return Mat2d::diag(s(idx(n)), s(-idx(n) - 1));
  }
  Mat2d R(std::size_t n) const { return Mat2d::diag(r(idx(n)), r(-idx(n) - 1)); }

 private:
  static long idx(std::size_t n) { return static_cast<long>(n); }
};

struct RAFactors : FactorPair {};
struct ARFactors : FactorPair {};

struct FactorOptions {
  long horizon = kDefaultHorizon;
  double snap_tol = 1e-12;  // parameter this close to its lower bound is taken as the bound
  CFOptions cf;
};

namespace detail {

inline double checked_prob(double v, const char* name, long index) {
  if (!std::isfinite(v) || v < -kClampTol || v > 1.0 + kClampTol)
    throw StochasticityError(std::string(name) + " = " + std::to_string(v) + " outside [0, 1]", index);
  return std::clamp(v, 0.0, 1.0);
}

inline double checked_div(double num, double den, long index) {
  if (std::abs(den) < kDivisorThreshold)
    throw SingularError("recursion divisor vanishes at index " + std::to_string(index));
  return num / den;
}

struct SideValues {
  std::vector<double> x, y, s, r;  // element m-1 holds index +-m
};

inline CoeffSeq assemble(double at_zero, const std::vector<double>& neg, const std::vector<double>& pos) {
  const long n = static_cast<long>(pos.size());
  std::vector<double> w(static_cast<std::size_t>(2 * n + 1));
  for (long m = 1; m <= n; ++m) {
    w[static_cast<std::size_t>(n - m)] = neg[static_cast<std::size_t>(m - 1)];
    w[static_cast<std::size_t>(n + m)] = pos[static_cast<std::size_t>(m - 1)];
  }
  w[static_cast<std::size_t>(n)] = at_zero;
  return CoeffSeq(neg.back(), -n, std::move(w), pos.back());
}

inline bool settled(const std::vector<double>& v) {
  const std::size_t n = v.size();
  return n < 2 || std::abs(v[n - 1] - v[n - 2]) <= 1e-13;
}

inline bool settled(const SideValues& v) { return settled(v.x) && settled(v.y) && settled(v.s) && settled(v.r); }

inline void push(SideValues& v, double x, double y, double s, double r, long index) {
  v.x.push_back(checked_prob(x, "x", index));
  v.y.push_back(checked_prob(y, "y", index));
  v.s.push_back(checked_prob(s, "s", index));
  v.r.push_back(checked_prob(r, "r", index));
}

inline long effective_horizon(const BDChain& t, long horizon) {
  auto [lo, hi] = t.window();
  return std::max({horizon, -lo + 8, hi + 8, 2L});
}

template <typename Left, typename Right>
double product_entry(const Left& left, const Right& right, long i, long j) {
  double sum = 0.0;
  for (long k = i - 1; k <= i + 1; ++k) sum += left(i, k) * right(k, j);
  return sum;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// RA

struct RAAdmissibility {
  double H = 0.0;
  double H_prime = 0.0;
  bool feasible = false;  // H + H' <= 1
};

inline RAAdmissibility ra_admissible(const BDChain& chain, const CFOptions& opt = {}) {
  require_valid(chain);
  const double h = eval_H(chain, opt).value;
  const double hp = eval_H_prime(chain, opt).value;
  return {h, hp, h + hp <= 1.0 + kRowSumTol};
}

/// Factor P = P_R P_A with boundary probability alpha (state 0 -> -1) and x0 (0 -> 1).
/// Requires alpha >= H', x0 >= H, alpha + x0 <= 1.
inline RAFactors ra_factorize(const BDChain& chain, double alpha, double x0, const FactorOptions& opt = {}) {
  const RAAdmissibility adm = ra_admissible(chain, opt.cf);
  if (alpha < adm.H_prime - opt.snap_tol)
    throw BoundError("alpha >= H' violated: alpha = " + std::to_string(alpha) + ", H' = " + std::to_string(adm.H_prime));
  if (x0 < adm.H - opt.snap_tol)
    throw BoundError("x0 >= H violated: x0 = " + std::to_string(x0) + ", H = " + std::to_string(adm.H));
  if (alpha + x0 > 1.0 + kRowSumTol) throw BoundError("alpha + x0 <= 1 violated");

  const BDChain& t = chain;
  const long n = detail::effective_horizon(t, opt.horizon);
  detail::SideValues neg, pos;

  // The forward recursion is unstable at the lower bound, so the minimal
  // solution is read off the tail continued fractions instead.
  if (std::abs(alpha - adm.H_prime) <= opt.snap_tol) {
    const auto tail = cf_tail_values(hp_numerators(t), 2 * n + 1);
    alpha = tail[0];
    for (long m = 1; m <= n; ++m) {
      const double r = tail[static_cast<std::size_t>(2 * m - 1)];
      const double x = tail[static_cast<std::size_t>(2 * m)];
      detail::push(neg, x, 1.0 - x, 1.0 - r, r, -m);
    }
  } else {
    double prev_x = alpha;
    for (long m = 1; m <= n; ++m) {
      const double s = detail::checked_div(t.c(-m + 1), prev_x, -m);
      const double r = 1.0 - s;
      const double y = detail::checked_div(t.a(-m), r, -m);
      const double x = 1.0 - y;
      detail::push(neg, x, y, s, r, -m);
      prev_x = neg.x.back();
    }
  }

  if (std::abs(x0 - adm.H) <= opt.snap_tol) {
    const auto tail = cf_tail_values(h_numerators(t), 2 * n + 1);
    x0 = tail[0];
    for (long m = 1; m <= n; ++m) {
      const double r = tail[static_cast<std::size_t>(2 * m - 1)];
      const double x = tail[static_cast<std::size_t>(2 * m)];
      detail::push(pos, x, 1.0 - x, 1.0 - r, r, m);
    }
  } else {
    double prev_x = x0;
    for (long m = 1; m <= n; ++m) {
      const double s = detail::checked_div(t.a(m - 1), prev_x, m);
      const double r = 1.0 - s;
      const double y = detail::checked_div(t.c(m), r, m);
      const double x = 1.0 - y;
      detail::push(pos, x, y, s, r, m);
      prev_x = pos.x.back();
    }
  }

  const double y0 = detail::checked_prob(1.0 - alpha - x0, "y", 0);
  RAFactors f;
  f.alpha = alpha;
  f.x = detail::assemble(x0, neg.x, pos.x);
  f.y = detail::assemble(y0, neg.y, pos.y);
  f.s = detail::assemble(1.0, neg.s, pos.s);
  f.r = detail::assemble(0.0, neg.r, pos.r);
  f.horizon = n;
  f.stabilized = detail::settled(neg) && detail::settled(pos);
  f.degenerate = y0 < kDivisorThreshold;
  return f;
}

/// Max |P_ij - (P_R P_A)_ij| over |i| <= range, |i - j| <= 2.
inline double ra_reconstruction_error(const BDChain& chain, const RAFactors& f, long range) {
  auto left = [&f](long i, long k) { return f.reflecting(i, k); };
  auto right = [&f](long k, long j) { return f.absorbing(k, j); };
  double worst = 0.0;
  for (long i = -range; i <= range; ++i)
    for (long j = i - 2; j <= i + 2; ++j)
      worst = std::max(worst, std::abs(chain.transition(i, j) - detail::product_entry(left, right, i, j)));
  return worst;
}

/// Block UL product P_R P_A: A_n = X_n S_{n+1}, B_n = Y_n S_n + X_n R_{n+1}, C_n = Y_n R_n.
inline BlockChain ra_block_product(const RAFactors& f) {
  return BlockChain([f](std::size_t n) {
    Blocks b;
    b.A = f.X(n) * f.S(n + 1);
    b.B = f.Y(n) * f.S(n) + f.X(n) * f.R(n + 1);
    b.C = n == 0 ? Mat2d::zero() : f.Y(n) * f.R(n);
    return b;
  });
}

struct DarbouxRA {
  AlmostBDChain chain;
  BlockChain blocks;
};

/// P~ = P_A P_R: tridiagonal plus d~_1 = r_1 alpha and d~_{-1} = r_{-1} x0.
inline DarbouxRA darboux_ra(const RAFactors& f) {
  auto left = [&f](long i, long k) { return f.absorbing(i, k); };
  auto right = [&f](long k, long j) { return f.reflecting(k, j); };
  auto entry = [&](long i, long j) { return detail::product_entry(left, right, i, j); };

  const long n = f.horizon + 1;
  std::vector<double> a, b, c;
  for (long i = -n; i <= n; ++i) {
    a.push_back(entry(i, i + 1));
    b.push_back(entry(i, i));
    c.push_back(entry(i, i - 1));
  }
  const long far = n + 3;
  DarbouxRA out;
  out.chain.base.a = CoeffSeq(entry(-far, -far + 1), -n, std::move(a), entry(far, far + 1));
  out.chain.base.b = CoeffSeq(entry(-far, -far), -n, std::move(b), entry(far, far));
  out.chain.base.c = CoeffSeq(entry(-far, -far - 1), -n, std::move(c), entry(far, far - 1));
  out.chain.d_plus = entry(1, -1);
  out.chain.d_minus = entry(-1, 1);
  out.blocks = BlockChain([f](std::size_t k) {
    Blocks blk;
    blk.A = f.S(k) * f.X(k);
    blk.B = k == 0 ? f.S(0) * f.Y(0) : f.R(k) * f.X(k - 1) + f.S(k) * f.Y(k);
    blk.C = k == 0 ? Mat2d::zero() : f.R(k) * f.Y(k - 1);
    return blk;
  });
  return out;
}

// ---------------------------------------------------------------------------
// AR

/// d_{-1} = a_{-1} a0 / b0 and d_1 = c0 c1 / b0 (to 1e-12), with b0 > max{a_{-1} a0, c0 c1}.
inline bool ar_compatible(const AlmostBDChain& chain) {
  const BDChain& t = chain.base;
  const double b0 = t.b(0);
  if (std::abs(b0) < kDivisorThreshold) throw DegenerateError("b0 = 0: AR compatibility undefined");
  const double dm = t.a(-1) * t.a(0) / b0;
  const double dp = t.c(0) * t.c(1) / b0;
  return std::abs(chain.d_minus - dm) <= 1e-12 && std::abs(chain.d_plus - dp) <= 1e-12 &&
         b0 > std::max(t.a(-1) * t.a(0), t.c(0) * t.c(1));
}

/// Unique factorization P = P~_A P~_R, seeded on both sides by y~0 = b0.
inline ARFactors ar_factorize(const AlmostBDChain& chain, const FactorOptions& opt = {}) {
  require_valid(chain);
  if (!ar_compatible(chain)) throw CompatibilityError("d_{+1}, d_{-1} violate d_{-1} = a_{-1}a_0/b_0, d_1 = c_0c_1/b_0");
  const BDChain& t = chain.base;
  const auto [ht, htp] = eval_H_ar(chain, opt.cf);
  const double b0 = t.b(0);
  if (!(b0 > std::max(ht.value, htp.value)))
    throw BoundError("b0 > max{H~, H~'} violated: b0 = " + std::to_string(b0) + ", H~ = " + std::to_string(ht.value) +
                     ", H~' = " + std::to_string(htp.value));

  const long n = detail::effective_horizon(t, opt.horizon);
  detail::SideValues neg, pos;
  double prev_y = b0;
  for (long m = 1; m <= n; ++m) {
    const double r = detail::checked_div(t.c(m), prev_y, m);
    const double s = 1.0 - r;
    const double x = detail::checked_div(t.a(m), s, m);
    detail::push(pos, x, 1.0 - x, s, r, m);
    prev_y = pos.y.back();
  }
  prev_y = b0;
  for (long m = 1; m <= n; ++m) {
    const double r = detail::checked_div(t.a(-m), prev_y, -m);
    const double s = 1.0 - r;
    const double x = detail::checked_div(t.c(-m), s, -m);
    detail::push(neg, x, 1.0 - x, s, r, -m);
    prev_y = neg.y.back();
  }

  ARFactors f;
  f.alpha = detail::checked_prob(t.c(0), "alpha", 0);
  f.x = detail::assemble(detail::checked_prob(t.a(0), "x", 0), neg.x, pos.x);
  f.y = detail::assemble(b0, neg.y, pos.y);
  f.s = detail::assemble(1.0, neg.s, pos.s);
  f.r = detail::assemble(0.0, neg.r, pos.r);
  f.horizon = n;
  f.stabilized = detail::settled(neg) && detail::settled(pos);
  f.degenerate = false;
  return f;
}

/// Max |P_ij - (P~_A P~_R)_ij| over |i| <= range, |i - j| <= 2.
inline double ar_reconstruction_error(const AlmostBDChain& chain, const ARFactors& f, long range) {
  auto left = [&f](long i, long k) { return f.absorbing(i, k); };
  auto right = [&f](long k, long j) { return f.reflecting(k, j); };
  double worst = 0.0;
  for (long i = -range; i <= range; ++i)
    for (long j = i - 2; j <= i + 2; ++j)
      worst = std::max(worst, std::abs(chain.transition(i, j) - detail::product_entry(left, right, i, j)));
  return worst;
}

/// Block LU product P~_A P~_R: A_n = S~_n X~_n, B_0 = S~_0 Y~_0,
/// B_n = S~_n Y~_n + R~_n X~_{n-1}, C_n = R~_n Y~_{n-1}.
inline BlockChain ar_block_product(const ARFactors& f) {
  return BlockChain([f](std::size_t n) {
    Blocks b;
    b.A = f.S(n) * f.X(n);
    b.B = n == 0 ? f.S(0) * f.Y(0) : f.S(n) * f.Y(n) + f.R(n) * f.X(n - 1);
    b.C = n == 0 ? Mat2d::zero() : f.R(n) * f.Y(n - 1);
    return b;
  });
}

struct DarbouxAR {
  BDChain chain;
  BlockChain blocks;
};

/// P^ = P~_R P~_A, a pure birth-death chain.
inline DarbouxAR darboux_ar(const ARFactors& f) {
  auto left = [&f](long i, long k) { return f.reflecting(i, k); };
  auto right = [&f](long k, long j) { return f.absorbing(k, j); };
  auto entry = [&](long i, long j) { return detail::product_entry(left, right, i, j); };

  const long n = f.horizon + 1;
  std::vector<double> a, b, c;
  for (long i = -n; i <= n; ++i) {
    a.push_back(entry(i, i + 1));
    b.push_back(entry(i, i));
    c.push_back(entry(i, i - 1));
  }
  const long far = n + 3;
  DarbouxAR out;
  out.chain.a = CoeffSeq(entry(-far, -far + 1), -n, std::move(a), entry(far, far + 1));
  out.chain.b = CoeffSeq(entry(-far, -far), -n, std::move(b), entry(far, far));
  out.chain.c = CoeffSeq(entry(-far, -far - 1), -n, std::move(c), entry(far, far - 1));
  out.blocks = BlockChain([f](std::size_t k) {
    Blocks blk;
    blk.A = f.X(k) * f.S(k + 1);
    blk.B = f.X(k) * f.R(k + 1) + f.Y(k) * f.S(k);
    blk.C = k == 0 ? Mat2d::zero() : f.Y(k) * f.R(k);
    return blk;
  });
  return out;
}

}  // namespace bdz
