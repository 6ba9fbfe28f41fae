#pragma once

/// @file cfrac.hpp
/// Continued fractions of the form k1/(1 - k2/(1 - k3/(1 - ...))) with
/// nonnegative partial numerators, as they arise from factorizing a
/// birth-death chain into a reflecting and an absorbing factor.
///
/// Forward convergents h_k = A_k / B_k follow the standard recursion
///   A_k = A_{k-1} + s_k A_{k-2},  B_k = B_{k-1} + s_k B_{k-2},
/// with s_1 = k1 and s_k = -k_k for k >= 2; pairs are rescaled when B_k
/// drifts toward overflow or underflow. All chains here have constant tails,
/// so every fraction is eventually 2-periodic and its tail has a closed form.

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bdz/errors.hpp"
#include "bdz/seqcore.hpp"

namespace bdz {

struct Convergent {
  long k;
  double numerator;    // A_k (after rescaling)
  double denominator;  // B_k (after rescaling)
  double value;        // h_k
};

class DivergenceError : public ConvergenceError {
 public:
  DivergenceError(const std::string& what, std::vector<Convergent> last)
      : ConvergenceError(what), last_(std::move(last)) {}
  const std::vector<Convergent>& last_convergents() const { return last_; }

 private:
  std::vector<Convergent> last_;
};

struct CFOptions {
  double tol = 1e-13;
  long max_iter = 10'000;
};

struct CFResult {
  double value = 0.0;
  std::vector<Convergent> convergents;
  bool converged_by_iteration = false;
  bool closed_form_tail = false;  // value taken from the exact periodic tail
  bool positivity = true;         // 0 < A_k < B_k held for every k >= 1
};

/// Partial numerators k_1, k_2, ...; from index `periodic_from` on they
/// alternate between term(periodic_from) and term(periodic_from + 1).
struct PartialNumerators {
  std::function<double(long)> term;
  long periodic_from = 1;
};

/// Value of p/(1 - q/(1 - p/(1 - ...))), or nullopt when the fraction diverges.
inline std::optional<double> periodic_tail_value(double p, double q) {
  if (p == 0.0) return 0.0;
  const double disc = (1.0 + p - q) * (1.0 + p - q) - 4.0 * p;
  if (disc < 0.0) return std::nullopt;
  return 0.5 * (1.0 + p - q - std::sqrt(disc));
}

/// Tail values T_k = k_k / (1 - T_{k+1}) for k = 1..count, by backward
/// recursion from the closed-form periodic tail. Element k-1 holds T_k.
inline std::vector<double> cf_tail_values(const PartialNumerators& s, long count) {
  const long start = std::max(count + 1, s.periodic_from);
  const auto tail = periodic_tail_value(s.term(start), s.term(start + 1));
  if (!tail) throw ConvergenceError("continued fraction tail diverges (negative discriminant)");
  std::vector<double> out(static_cast<std::size_t>(std::max(count, 0L)));
  double t = *tail;
  for (long k = start - 1; k >= 1; --k) {
    const double den = 1.0 - t;
    if (std::abs(den) < 1e-14) throw SingularError("continued fraction tail hits 1 at index " + std::to_string(k));
    t = s.term(k) / den;
    if (k <= count) out[static_cast<std::size_t>(k - 1)] = t;
  }
  return out;
}

inline CFResult evaluate_cf(const PartialNumerators& s, const CFOptions& opt = {}) {
  CFResult res;
  double a_prev = 1.0, a_cur = 0.0;  // A_{-1}, A_0
  double b_prev = 0.0, b_cur = 1.0;  // B_{-1}, B_0
  double h_prev = 0.0;
  int streak = 0;
  res.convergents.push_back({0, a_cur, b_cur, 0.0});
  if (s.term(1) == 0.0) {
    res.convergents.push_back({1, 0.0, 1.0, 0.0});
    res.converged_by_iteration = true;
    return res;
  }
  for (long k = 1; k <= opt.max_iter; ++k) {
    const double sk = k == 1 ? s.term(1) : -s.term(k);
    const double a_next = a_cur + sk * a_prev;
    const double b_next = b_cur + sk * b_prev;
    a_prev = a_cur;
    a_cur = a_next;
    b_prev = b_cur;
    b_cur = b_next;
    const double mag = std::abs(b_cur);
    if (mag != 0.0 && (mag > 1e100 || mag < 1e-100)) {
      a_prev /= mag;
      a_cur /= mag;
      b_prev /= mag;
      b_cur /= mag;
    }
    if (!(a_cur >= 0.0 && a_cur < b_cur) || (a_cur == 0.0 && s.term(1) != 0.0)) res.positivity = false;
    const double h = b_cur != 0.0 ? a_cur / b_cur : std::nan("");
    res.convergents.push_back({k, a_cur, b_cur, h});
    if (std::isfinite(h) && std::abs(h - h_prev) < opt.tol) {
      if (++streak >= 3) {
        res.value = h;
        res.converged_by_iteration = true;
        return res;
      }
    } else {
      streak = 0;
    }
    h_prev = h;
  }
  const auto start = s.periodic_from;
  if (periodic_tail_value(s.term(start), s.term(start + 1))) {
    res.value = cf_tail_values(s, 1).front();
    res.closed_form_tail = true;
    return res;
  }
  std::vector<Convergent> last(res.convergents.end() - std::min<std::ptrdiff_t>(5, std::ssize(res.convergents)),
                               res.convergents.end());
  throw DivergenceError("continued fraction did not converge in " + std::to_string(opt.max_iter) + " steps",
                        std::move(last));
}

// ---------------------------------------------------------------------------
// The four fractions attached to a chain.

namespace detail {
inline long right_extent(const BDChain& t) { return std::max(0L, t.window().second) + 1; }
inline long left_extent(const BDChain& t) { return std::max(0L, -t.window().first) + 1; }
}  // namespace detail

/// H = a0/(1 - c1/(1 - a1/(1 - c2/ ...))).
inline PartialNumerators h_numerators(const BDChain& t) {
  return {[t](long k) { return k == 1 ? t.a(0) : (k % 2 == 0 ? t.c(k / 2) : t.a(k / 2)); },
          2 * detail::right_extent(t)};
}

/// H' = c0/(1 - a_{-1}/(1 - c_{-1}/(1 - a_{-2}/ ...))).
inline PartialNumerators hp_numerators(const BDChain& t) {
  return {[t](long k) { return k == 1 ? t.c(0) : (k % 2 == 0 ? t.a(-k / 2) : t.c(-(k / 2))); },
          2 * detail::left_extent(t)};
}

/// H~ = c1/(1 - a1/(1 - c2/(1 - a2/ ...))).
inline PartialNumerators ht_numerators(const BDChain& t) {
  return {[t](long k) { return k % 2 == 1 ? t.c((k + 1) / 2) : t.a(k / 2); }, 2 * detail::right_extent(t) - 1};
}

/// H~' = a_{-1}/(1 - c_{-1}/(1 - a_{-2}/(1 - c_{-2}/ ...))).
inline PartialNumerators htp_numerators(const BDChain& t) {
  return {[t](long k) { return k % 2 == 1 ? t.a(-(k + 1) / 2) : t.c(-k / 2); }, 2 * detail::left_extent(t) - 1};
}

inline CFResult eval_H(const BDChain& chain, const CFOptions& opt = {}) { return evaluate_cf(h_numerators(chain), opt); }
inline CFResult eval_H_prime(const BDChain& chain, const CFOptions& opt = {}) {
  return evaluate_cf(hp_numerators(chain), opt);
}

/// (H~, H~') for an almost birth-death chain; the couplings d do not enter.
inline std::pair<CFResult, CFResult> eval_H_ar(const AlmostBDChain& chain, const CFOptions& opt = {}) {
  return {evaluate_cf(ht_numerators(chain.base), opt), evaluate_cf(htp_numerators(chain.base), opt)};
}

// ---------------------------------------------------------------------------
// Constant-coefficient closed forms.

inline double rw_discriminant(double a, double c) { return (1.0 + c - a) * (1.0 + c - a) - 4.0 * c; }

inline double h_closed(double a, double c) { return 0.5 * (1.0 + a - c - std::sqrt(rw_discriminant(a, c))); }
inline double hp_closed(double a, double c) { return 0.5 * (1.0 + c - a - std::sqrt(rw_discriminant(a, c))); }

/// Larger root of J^2 - (1 + c - a) J + c = 0.
inline double j_jjp_root(double a, double c) { return 0.5 * (1.0 + c - a + std::sqrt(rw_discriminant(a, c))); }
inline double jp_jjp_root(double a, double c) { return 0.5 * (1.0 + a - c + std::sqrt(rw_discriminant(a, c))); }

/// Limit of c/(1 - a/(1 - c/(1 - ...))): the smaller root, c / j_jjp_root.
inline double j_limit(double a, double c) {
  if (rw_discriminant(a, c) < 0.0) throw ConvergenceError("J diverges: a > (1 - sqrt(c))^2");
  return 0.5 * (1.0 + c - a - std::sqrt(rw_discriminant(a, c)));
}

inline double ht_closed(double a, double b, double c) { return b * c / (j_jjp_root(a, c) * (1.0 - a)); }
inline double htp_closed(double a, double b, double c) { return a * b / (jp_jjp_root(a, c) * (1.0 - c)); }

/// Convergents j_0..j_n of J = c/(1 - a/(1 - c/(1 - ...))) from
///   alpha_{2m} = alpha_{2m-1} - a alpha_{2m-2},  alpha_{2m+1} = alpha_{2m} - c alpha_{2m-1},
/// with alpha_{-1} = -1, alpha_0 = 0, beta_{-1} = 0, beta_0 = 1 (same for beta).
inline std::vector<double> j_convergents(double a, double c, long n) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n + 1));
  double al_prev = -1.0, al = 0.0, be_prev = 0.0, be = 1.0;
  out.push_back(al / be);
  for (long k = 1; k <= n; ++k) {
    const double coef = k % 2 == 0 ? a : c;
    const double al_next = al - coef * al_prev;
    const double be_next = be - coef * be_prev;
    al_prev = al;
    al = al_next;
    be_prev = be;
    be = be_next;
    const double mag = std::abs(be);
    if (mag != 0.0 && (mag > 1e100 || mag < 1e-100)) {
      al_prev /= mag;
      al /= mag;
      be_prev /= mag;
      be /= mag;
    }
    out.push_back(al / be);
  }
  return out;
}

}  // namespace bdz
