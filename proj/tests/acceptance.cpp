// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <string>
#include <vector>

#include "bdz/bdz.hpp"

using namespace bdz;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

struct Tracker {
  Outcome out;
  void check(bool cond, const std::string& what, double value) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s%s=%.3g", out.detail.empty() ? "" : " ", what.c_str(), value);
    out.detail += buf;
    if (!cond) {
      out.ok = false;
      out.detail += "(!)";
    }
  }
  void below(const std::string& what, double value, double tol) { check(value < tol, what, value); }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const std::pair<double, double> kChains[] = {{0.125, 0.125}, {0.1, 0.2}};

Outcome ac1() {
  Tracker t;
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (auto [a, c] : kChains) {
    const BDChain ch = make_random_walk(a, 1.0 - a - c, c);
    const RAAdmissibility adm = ra_admissible(ch);
    const double slack = 1.0 - adm.H - adm.H_prime;
    for (int i = 0; i < 5; ++i)
      for (int k = 0; k < 5; ++k) {
        const RAFactors f = ra_factorize(ch, adm.H_prime + i / 4.0 * 0.45 * slack, adm.H + k / 4.0 * 0.45 * slack);
        worst = std::max(worst, ra_reconstruction_error(ch, f, 64));
      }
  }
  t.below("max_err", worst, 1e-12);
  t.below("seconds", seconds_since(t0), 1.0);
  return t.out;
}

Outcome ac2() {
  Tracker t;
  for (auto [a, c] : kChains) {
    const BDChain ch = make_random_walk(a, 1.0 - a - c, c);
    const CFOptions opt{1e-13, 200};
    const CFResult h = eval_H(ch, opt), hp = eval_H_prime(ch, opt);
    t.check(h.converged_by_iteration && hp.converged_by_iteration, "iterative", 1.0);
    const double root = std::sqrt((1 + c - a) * (1 + c - a) - 4 * c);
    t.below("H_err", std::abs(h.value - 0.5 * (1 + a - c - root)), 1e-10);
    t.below("Hp_err", std::abs(hp.value - 0.5 * (1 + c - a - root)), 1e-10);
  }
  return t.out;
}

Outcome ac3() {
  Tracker t;
  const auto t0 = std::chrono::steady_clock::now();
  SuiteParams p;
  p.state_radius = 5;
  p.max_steps = 10;
  const CrossCheckReport rep = cross_check("rw", p);
  for (const auto& e : rep.entries)
    if (e.name == "km_vs_oracle") t.below("km_err", e.max_error, 5e-9);
  t.below("seconds", seconds_since(t0), 10.0);
  return t.out;
}

Outcome ac4() {
  Tracker t;
  const BDChain ch = make_random_walk(0.125, 0.75, 0.125);
  const RAAdmissibility adm = ra_admissible(ch);
  const PotentialCoeffs pot = potential_coeffs(ch, 12);
  for (double shift : {0.0, 0.05}) {
    const RAFactors f = ra_factorize(ch, adm.H_prime + shift, adm.H + shift);
    const MatrixMeasure psi = geronimus(rw_spectral(0.125, 0.75, 0.125), f, pot);
    const CheckEntry e = orthogonality("orth", psi, MOPFamily::qtilde(f), norm_matrices(NormKind::PiTilde, f, pot, 8),
                                       8, 1e-8);
    t.below(shift == 0.0 ? "orth_min" : "orth_interior", e.max_error, 1e-8);
    if (shift == 0.0) t.below("atom", max_abs(psi.atoms.at(0).weight), 1e-10);
  }
  return t.out;
}

Outcome ac5() {
  Tracker t;
  for (double shift : {0.0, 0.05}) {
    SuiteParams p;
    p.state_radius = 4;
    p.max_steps = 8;
    p.max_degree = 8;
    p.alpha_shift = shift;
    p.x0_shift = shift;
    for (const auto& e : cross_check("ra-darboux", p).entries)
      if (e.name == "km_vs_oracle") t.below(shift == 0.0 ? "km_min" : "km_interior", e.max_error, 5e-8);
  }
  return t.out;
}

Outcome ac6() {
  Tracker t;
  for (auto [a, c] : kChains) {
    const AlmostBDChain ch = make_ar_example(a, 1.0 - a - c, c);
    t.check(ar_compatible(ch), "compatible", 1.0);
    const ARFactors f = ar_factorize(ch);
    const auto j = j_convergents(a, c, 2 * 32 + 2);
    double worst = 0.0;
    for (long n = 0; n <= 32; ++n) {
      const auto jj = [&](long k) { return j[static_cast<std::size_t>(k)]; };
      worst = std::max(worst, std::abs(f.x(n) - a / (1 - jj(2 * n))));
      worst = std::max(worst, std::abs(f.r(n) - jj(2 * n)));
      worst = std::max(worst, std::abs(f.s(n) - (1 - jj(2 * n))));
      if (n >= 1) {
        worst = std::max(worst, std::abs(f.x(-n) - jj(2 * n + 1)));
        worst = std::max(worst, std::abs(f.y(-n) - (1 - jj(2 * n + 1))));
        worst = std::max(worst, std::abs(f.y(n) - (1 - a / (1 - jj(2 * n)))));
        worst = std::max(worst, std::abs(f.r(-n) - a / (1 - jj(2 * n - 1))));
      }
    }
    t.below("closed_form_err", worst, 1e-12);
  }
  return t.out;
}

Outcome ac7() {
  Tracker t;
  SuiteParams p;
  for (const auto& e : cross_check("stieltjes", p).entries) {
    if (e.name == "moments_vs_oracle") t.below("moments", e.max_error, 1e-8);
    if (e.name == "residues") {
      t.below("residues", e.max_error, 1e-9);
      t.check(e.samples == 4, "poles", static_cast<double>(e.samples));
    }
  }
  return t.out;
}

Outcome ac8() {
  Tracker t;
  SuiteParams p;
  p.state_radius = 4;
  p.max_steps = 8;
  p.max_degree = 8;
  for (const auto& e : cross_check("ar-darboux", p).entries) {
    if (e.name == "orthogonality_Qhat") t.below("orth", e.max_error, 1e-8);
    if (e.name == "km_vs_oracle") t.below("km", e.max_error, 5e-8);
  }
  return t.out;
}

/// Max |P^(n+m)_ij - sum_k P^(n)_ik P^(m)_kj| for |i|, |j| <= 4.
template <TransitionOperator Chain>
double chapman_kolmogorov(const Chain& chain) {
  const long radius = 20;
  const TruncatedOperator op(chain, radius);
  double worst = 0.0;
  for (auto [n, m] : {std::pair{2, 3}, std::pair{4, 4}})
    for (long i = -4; i <= 4; ++i) {
      const auto whole = op.row_power(i, n + m);
      const auto first = op.row_power(i, n);
      for (long j = -4; j <= 4; ++j) {
        double sum = 0.0;
        for (long k = -radius; k <= radius; ++k) sum += first[static_cast<std::size_t>(k + radius)] * truncated_power(chain, k, j, m);
        worst = std::max(worst, std::abs(whole[static_cast<std::size_t>(j + radius)] - sum));
      }
    }
  return worst;
}

Outcome ac9() {
  Tracker t;
  const BDChain rw = make_random_walk(0.125, 0.75, 0.125);
  const BDChain as = make_random_walk(0.1, 0.7, 0.2);
  const AlmostBDChain ar = make_ar_example(0.1, 0.7, 0.2);
  const RAAdmissibility adm = ra_admissible(as);
  const RAFactors fi = ra_factorize(as, adm.H_prime + 0.05, adm.H + 0.05);
  const RAAdmissibility adm_rw = ra_admissible(rw);
  const RAFactors fm = ra_factorize(rw, adm_rw.H_prime, adm_rw.H);
  const DarbouxRA dra = darboux_ra(fi);
  const DarbouxAR dar = darboux_ar(ar_factorize(ar));

  double ck = std::max({chapman_kolmogorov(rw), chapman_kolmogorov(ar), chapman_kolmogorov(dra.chain),
                        chapman_kolmogorov(dar.chain)});
  t.below("chapman_kolmogorov", ck, 1e-12);

  double rows = std::max({block_row_sum_residual(relabel_to_blocks(rw), 64), block_row_sum_residual(relabel_to_blocks(ar), 64),
                          block_row_sum_residual(dra.blocks, 64), block_row_sum_residual(dar.blocks, 64)});
  t.below("block_row_sums", rows, 1e-12);

  double sym = 0.0;
  for (const BDChain* ch : {&rw, &as, &dar.chain}) sym = std::max(sym, symmetry_residual(*ch, potential_coeffs(*ch, 32)));
  t.below("symmetry", sym, 1e-14);

  double usum = 0.0;
  for (const RAFactors* f : {&fm, &fi})
    for (double x : {-1.0, -0.5, 0.0, 0.25, 0.5, 1.0})
      for (std::size_t n = 0; n <= 12; ++n) usum = std::max(usum, u_sum_identity_check(*f, x, n));
  t.below("u_sum", usum, 1e-10);
  return t.out;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"AC1 RA reconstruction on 5x5 admissible grid", ac1},
      {"AC2 continued fractions match closed forms", ac2},
      {"AC3 Karlin-McGregor vs oracle (random walk)", ac3},
      {"AC4 Geronimus orthogonality and vanishing atom", ac4},
      {"AC5 Darboux-RA chain law vs oracle", ac5},
      {"AC6 AR compatibility and convergent closed forms", ac6},
      {"AC7 Stieltjes inversion moments and residues", ac7},
      {"AC8 Christoffel orthogonality and Darboux-AR law", ac8},
      {"AC9 property suites", ac9},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.ok) ++failures;
    std::printf("[%s] %s: %s\n", o.ok ? "PASS" : "FAIL", name, o.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
