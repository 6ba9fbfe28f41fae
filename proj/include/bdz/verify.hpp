#pragma once

/// @file verify.hpp
/// Exact finite-truncation oracle and cross-check suites.
///
/// A chain restricted to states {-R..R} reproduces every n-step probability
/// between states with |i|, |j| <= R - n exactly: |state| changes by at most
/// one per step, so no path through the truncated boundary contributes.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "bdz/cfrac.hpp"
#include "bdz/factor.hpp"
#include "bdz/opoly.hpp"
#include "bdz/seqcore.hpp"
#include "bdz/spectral.hpp"

namespace bdz {

/// Dense restriction of a chain to {-radius..radius}; boundary rows leak mass.
class TruncatedOperator {
 public:
  template <TransitionOperator Chain>
  TruncatedOperator(const Chain& chain, long radius)
      : radius_(radius), dim_(static_cast<std::size_t>(2 * radius + 1)), p_(dim_ * dim_, 0.0) {
    for (long i = -radius; i <= radius; ++i)
      for (long j = std::max(-radius, i - 2); j <= std::min(radius, i + 2); ++j) at(i, j) = chain.transition(i, j);
  }

  long radius() const { return radius_; }
  double operator()(long i, long j) const { return p_[index(i) * dim_ + index(j)]; }

  /// Row i of P^n over {-radius..radius}; element k + radius holds state k.
  std::vector<double> row_power(long i, int n) const {
    std::vector<double> v(dim_, 0.0), next(dim_, 0.0);
    v[index(i)] = 1.0;
    for (int step = 0; step < n; ++step) {
      for (long j = -radius_; j <= radius_; ++j) {
        double sum = 0.0;
        for (long k = std::max(-radius_, j - 2); k <= std::min(radius_, j + 2); ++k) sum += v[index(k)] * (*this)(k, j);
        next[index(j)] = sum;
      }
      std::swap(v, next);
    }
    return v;
  }

 private:
  std::size_t index(long s) const { return static_cast<std::size_t>(s + radius_); }
  double& at(long i, long j) { return p_[index(i) * dim_ + index(j)]; }

  long radius_;
  std::size_t dim_;
  std::vector<double> p_;
};

inline long oracle_radius(long i, long j, int n) { return std::max(std::abs(i), std::abs(j)) + n + 1; }

/// Exact n-step probability from state i to state j.
template <TransitionOperator Chain>
double truncated_power(const Chain& chain, long i, long j, int n) {
  const long r = oracle_radius(i, j, n);
  const TruncatedOperator op(chain, r);
  return op.row_power(i, n)[static_cast<std::size_t>(j + r)];
}

/// (0,0) block of P^n: [[P_00, P_0,-1], [P_-1,0, P_-1,-1]].
template <TransitionOperator Chain>
Mat2d truncated_block00(const Chain& chain, int n) {
  const long r = n + 2;
  const TruncatedOperator op(chain, r);
  const auto row0 = op.row_power(0, n);
  const auto rowm = op.row_power(-1, n);
  auto at = [r](const std::vector<double>& v, long s) { return v[static_cast<std::size_t>(s + r)]; };
  return {at(row0, 0), at(row0, -1), at(rowm, 0), at(rowm, -1)};
}

// ---------------------------------------------------------------------------
// Cross checks

struct CheckEntry {
  std::string name;
  double max_error = 0.0;
  double tolerance = 0.0;
  long samples = 0;
  bool passed() const { return max_error < tolerance; }
};

struct CrossCheckReport {
  std::string suite;
  std::vector<CheckEntry> entries;
  bool passed() const {
    return std::all_of(entries.begin(), entries.end(), [](const CheckEntry& e) { return e.passed(); });
  }
};

struct SuiteParams {
  double a = 0.125;
  double c = 0.125;
  long state_radius = 5;  // |i|, |j| <= state_radius
  int max_steps = 10;     // n <= max_steps
  std::size_t max_degree = 10;
  double alpha_shift = 0.0;  // RA parameters (H' + shift, H + shift)
  double x0_shift = 0.0;
};

/// Max |km - oracle| over the grid; `oracle(i, n)` returns row i of P^n on {-R..R}.
template <typename Oracle>
CheckEntry km_vs_oracle(const std::string& name, const MatrixMeasure& m, const MOPFamily& fam,
                        const NormMatrices& norms, const Oracle& oracle, long radius, int steps, double tol) {
  CheckEntry e{name, 0.0, tol, 0};
  for (long i = -radius; i <= radius; ++i)
    for (int n = 0; n <= steps; ++n) {
      const long r = radius + n + 1;
      const auto row = oracle(i, n, r);
      for (long j = -radius; j <= radius; ++j) {
        const KMResult km = km_nstep(m, fam, norms, i, j, n);
        const double err = std::abs(km.raw - row[static_cast<std::size_t>(j + r)]);
        e.max_error = std::max(e.max_error, km.in_range ? err : std::max(err, 1.0));
        ++e.samples;
      }
    }
  return e;
}

/// Max || integral Q_n dPsi Q_m^T - delta_nm Pi_n^{-1} ||.
inline CheckEntry orthogonality(const std::string& name, const MatrixMeasure& m, const MOPFamily& fam,
                                const NormMatrices& norms, std::size_t degree, double tol) {
  CheckEntry e{name, 0.0, tol, 0};
  for (std::size_t n = 0; n <= degree; ++n)
    for (std::size_t k = 0; k <= n; ++k) {
      const auto res = integrate(m, [&](double x) {
        const auto v = fam.evaluate(x, n);
        return std::pair{v[n], v[k]};
      });
      const Mat2d expect = n == k ? norms[n].inverse() : Mat2d::zero();
      e.max_error = std::max(e.max_error, max_abs(res.value - expect));
      ++e.samples;
    }
  return e;
}

namespace detail {
template <TransitionOperator Chain>
auto row_oracle(const Chain& chain) {
  return [chain](long i, int n, long r) { return TruncatedOperator(chain, r).row_power(i, n); };
}
}  // namespace detail

inline CrossCheckReport cross_check_rw(const SuiteParams& p) {
  CrossCheckReport rep{"rw", {}};
  const double b = 1.0 - p.a - p.c;
  const BDChain chain = make_random_walk(p.a, b, p.c);
  const MatrixMeasure psi = rw_spectral(p.a, b, p.c);
  const auto fam = MOPFamily::q(relabel_to_blocks(chain));
  const std::size_t top = std::max(p.max_degree, static_cast<std::size_t>(std::max(p.state_radius, 0L))) + 1;
  const auto norms = norm_matrices(potential_coeffs(chain, static_cast<long>(top) + 1), top);
  if (p.state_radius >= 0 && p.max_steps >= 0)
    rep.entries.push_back(km_vs_oracle("km_vs_oracle", psi, fam, norms, detail::row_oracle(chain), p.state_radius,
                                       p.max_steps, 5e-9));
  rep.entries.push_back(orthogonality("orthogonality_Q", psi, fam, norms, p.max_degree, 1e-9));
  return rep;
}

inline CrossCheckReport cross_check_ra_darboux(const SuiteParams& p) {
  CrossCheckReport rep{"ra-darboux", {}};
  const double b = 1.0 - p.a - p.c;
  const BDChain chain = make_random_walk(p.a, b, p.c);
  const RAAdmissibility adm = ra_admissible(chain);
  const RAFactors f = ra_factorize(chain, adm.H_prime + p.alpha_shift, adm.H + p.x0_shift);
  rep.entries.push_back({"reconstruction", ra_reconstruction_error(chain, f, 64), 1e-12, 129});
  const DarbouxRA dt = darboux_ra(f);
  rep.entries.push_back({"darboux_row_sums", validate_stochastic(dt.chain).max_residual, 1e-12, 1});
  const std::size_t top = std::max(p.max_degree, static_cast<std::size_t>(std::max(p.state_radius, 0L))) + 1;
  const auto pot = potential_coeffs(chain, static_cast<long>(top) + 1);
  const MatrixMeasure psit = geronimus(rw_spectral(p.a, b, p.c), f, pot);
  const auto fam = MOPFamily::qtilde(f);
  const auto norms = norm_matrices(NormKind::PiTilde, f, pot, top);
  rep.entries.push_back(orthogonality("orthogonality_Qtilde", psit, fam, norms, p.max_degree, 1e-8));
  if (p.state_radius >= 0 && p.max_steps >= 0)
    rep.entries.push_back(km_vs_oracle("km_vs_oracle", psit, fam, norms, detail::row_oracle(dt.chain),
                                       p.state_radius, p.max_steps, 5e-8));
  return rep;
}

inline CrossCheckReport cross_check_ar_darboux(const SuiteParams& p) {
  CrossCheckReport rep{"ar-darboux", {}};
  const double b = 1.0 - p.a - p.c;
  const AlmostBDChain chain = make_ar_example(p.a, b, p.c);
  const ARFactors f = ar_factorize(chain);
  rep.entries.push_back({"reconstruction", ar_reconstruction_error(chain, f, 64), 1e-12, 129});
  const DarbouxAR dt = darboux_ar(f);
  rep.entries.push_back({"darboux_row_sums", validate_stochastic(dt.chain).max_residual, 1e-12, 1});
  const std::size_t top = std::max(p.max_degree, static_cast<std::size_t>(std::max(p.state_radius, 0L))) + 1;
  const auto pot = potential_coeffs(chain, static_cast<long>(top) + 1);
  const auto inv = stieltjes_invert(stieltjes_solve_ar(p.a, b, p.c));
  const MatrixMeasure psih = christoffel(inv.measure, f);
  const auto fam = MOPFamily::qhat(f);
  const auto norms = norm_matrices(NormKind::PiHat, f, pot, top);
  rep.entries.push_back(orthogonality("orthogonality_Qhat", psih, fam, norms, p.max_degree, 1e-8));
  if (p.state_radius >= 0 && p.max_steps >= 0)
    rep.entries.push_back(km_vs_oracle("km_vs_oracle", psih, fam, norms, detail::row_oracle(dt.chain),
                                       p.state_radius, p.max_steps, 5e-8));
  return rep;
}

inline CrossCheckReport cross_check_stieltjes(const SuiteParams& p) {
  CrossCheckReport rep{"stieltjes", {}};
  const double b = 1.0 - p.a - p.c;
  const StieltjesMatrix s = stieltjes_solve_ar(p.a, b, p.c);

  CheckEntry lin{"closed_form_vs_linear_solve", 0.0, 1e-9, 0};
  for (int k = 0; k < 20; ++k) {
    const double t = 2.0 * std::numbers::pi * (k + 0.5) / 20.0;
    const cplx z = cplx(0.5 * (s.lower + s.upper), 0.0) + (0.6 + 0.05 * k) * cplx(std::cos(t), std::sin(t));
    lin.max_error = std::max(lin.max_error, max_abs(s.evaluate(z) - s.linear_solve(z)));
    ++lin.samples;
  }
  rep.entries.push_back(lin);

  const auto inv = stieltjes_invert(s);
  CheckEntry res{"residues", 0.0, kResidueTol, 0};
  for (const auto& pr : inv.poles) {
    res.max_error = std::max(res.max_error, max_abs(pr.weight));
    ++res.samples;
  }
  rep.entries.push_back(res);

  const AlmostBDChain chain = make_ar_example(p.a, b, p.c);
  const Mat2d pi0_inv = potential_coeffs(chain, 1).Pi(0).inverse();
  CheckEntry mom{"moments_vs_oracle", 0.0, 1e-8, 0};
  for (int k = 0; k <= 12; ++k) {
    mom.max_error = std::max(mom.max_error, max_abs(moment(inv.measure, k) - truncated_block00(chain, k) * pi0_inv));
    ++mom.samples;
  }
  rep.entries.push_back(mom);
  return rep;
}

inline CrossCheckReport cross_check(const std::string& suite, const SuiteParams& p = {}) {
  if (suite == "rw") return cross_check_rw(p);
  if (suite == "ra-darboux") return cross_check_ra_darboux(p);
  if (suite == "ar-darboux") return cross_check_ar_darboux(p);
  if (suite == "stieltjes") return cross_check_stieltjes(p);
  throw ConfigError("unknown suite '" + suite + "'");
}

}  // namespace bdz
