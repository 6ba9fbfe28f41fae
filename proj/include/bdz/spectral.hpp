#pragma once

/// @file spectral.hpp
/// 2x2 matrix measures on [sigma_-, sigma_+] with finitely many atoms,
/// quadrature against them, Geronimus / Christoffel transforms, the
/// Stieltjes transform of the AR example and Karlin-McGregor formulas.
///
/// A density is stored in closed form:
///   W(x) = scale * x^p * (x - sigma_-)^e_- * (sigma_+ - x)^e_+ * N(x) / D(x)
/// with N a symmetric 2x2 polynomial matrix and e_+- in {-1/2, +1/2}.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "bdz/errors.hpp"
#include "bdz/factor.hpp"
#include "bdz/mat2.hpp"
#include "bdz/opoly.hpp"
#include "bdz/seqcore.hpp"

namespace bdz {

struct Atom {
  double location = 0.0;
  Mat2d weight;
};

struct DensityDescriptor {
  std::array<Poly, 3> numerator;  // entries (0,0), (0,1) = (1,0), (1,1)
  Poly denominator = Poly::constant(1.0);
  double scale = 1.0;
  int x_power = 0;
  double lower_exponent = -0.5;  // on (x - sigma_-)
  double upper_exponent = -0.5;  // on (sigma_+ - x)

  /// N(x) / D(x) * x^p * scale, without the endpoint factors.
  Mat2d rational_part(double x) const {
    const double f = scale * std::pow(x, x_power) / denominator(x);
    const double n01 = numerator[1](x);
    return {f * numerator[0](x), f * n01, f * n01, f * numerator[2](x)};
  }
};

struct MatrixMeasure {
  double lower = 0.0;  // sigma_-
  double upper = 0.0;  // sigma_+
  DensityDescriptor density;
  std::vector<Atom> atoms;
  bool proper = true;  // every atom weight is symmetric PSD

  /// Density matrix at an interior point.
  Mat2d density_at(double x) const {
    if (!(x > lower && x < upper)) return Mat2d::zero();
    return std::pow(x - lower, density.lower_exponent) * std::pow(upper - x, density.upper_exponent) *
           density.rational_part(x);
  }
};

inline constexpr double kQuadratureTol = 1e-11;
inline constexpr long kQuadratureMinNodes = 32;
inline constexpr long kQuadratureMaxNodes = 1L << 14;
inline constexpr double kAtomPsdTol = 1e-10;
inline constexpr double kCancelTol = 1e-13;

struct QuadratureResult {
  Mat2d value;
  long nodes = 0;
  bool converged = true;  // false: node cap hit before the doubling test passed
};

namespace detail {

/// Midpoint rule in theta with x = m + h cos(theta); the endpoint factors and
/// dx become (2h)^(e_+ + e_- + 1) sin(theta/2)^(2e_+ + 1) cos(theta/2)^(2e_- + 1).
template <typename Integrand>
Mat2d theta_rule(const MatrixMeasure& m, const Integrand& g, long nodes) {
  const double mid = 0.5 * (m.upper + m.lower);
  const double half = 0.5 * (m.upper - m.lower);
  const double ep = m.density.upper_exponent;
  const double em = m.density.lower_exponent;
  const double pre = std::pow(2.0 * half, ep + em + 1.0) * std::numbers::pi / static_cast<double>(nodes);
  Mat2d acc;
  for (long k = 0; k < nodes; ++k) {
    const double th = (static_cast<double>(k) + 0.5) * std::numbers::pi / static_cast<double>(nodes);
    const double x = mid + half * std::cos(th);
    const double w = pre * std::pow(std::sin(0.5 * th), 2.0 * ep + 1.0) * std::pow(std::cos(0.5 * th), 2.0 * em + 1.0);
    acc += w * g(x, m.density.rational_part(x));
  }
  return acc;
}

}  // namespace detail

/// Integral of L(x) dPsi(x) R(x)^T, atoms included as point evaluations.
/// `lr(x)` returns the pair (L(x), R(x)).
template <typename LR>
QuadratureResult integrate(const MatrixMeasure& m, const LR& lr) {
  auto g = [&lr](double x, const Mat2d& w) {
    const auto [l, r] = lr(x);
    return l * w * r.transpose();
  };
  QuadratureResult res;
  Mat2d prev = detail::theta_rule(m, g, kQuadratureMinNodes);
  long n = kQuadratureMinNodes;
  res.converged = false;
  while (n < kQuadratureMaxNodes) {
    n *= 2;
    const Mat2d cur = detail::theta_rule(m, g, n);
    const double diff = max_abs(cur - prev);
    prev = cur;
    if (diff < kQuadratureTol * std::max(1.0, max_abs(cur))) {
      res.converged = true;
      break;
    }
  }
  res.value = prev;
  res.nodes = n;
  for (const Atom& a : m.atoms) {
    const auto [l, r] = lr(a.location);
    res.value += l * a.weight * r.transpose();
  }
  return res;
}

/// M_k = integral of x^k dPsi. k = -1 requires 0 outside the support and no atom at 0.
inline Mat2d moment(const MatrixMeasure& m, int k) {
  if (k < -1) throw UndefinedMomentError("only moments k >= -1 are supported");
  if (k == -1) {
    if (m.lower <= 0.0 && m.upper >= 0.0)
      throw UndefinedMomentError("M_{-1} undefined: 0 lies in [sigma_-, sigma_+]");
    for (const Atom& a : m.atoms)
      if (a.location == 0.0) throw UndefinedMomentError("M_{-1} undefined: atom at 0");
  }
  return integrate(m, [k](double x) { return std::pair{std::pow(x, k) * Mat2d::identity(), Mat2d::identity()}; })
      .value;
}

// ---------------------------------------------------------------------------
// Base measure of the constant random walk

inline std::pair<double, double> rw_support(double a, double c) {
  const double sa = std::sqrt(a), sc = std::sqrt(c);
  return {1.0 - (sa + sc) * (sa + sc), 1.0 - (sa - sc) * (sa - sc)};
}

/// (1/pi) ((x - s_-)(s_+ - x))^{-1/2} [[1, (x-b)/(2c)], [(x-b)/(2c), a/c]].
inline MatrixMeasure rw_spectral(double a, double b, double c) {
  if (!(a > 0.0 && c > 0.0) || std::abs(a + b + c - 1.0) > kRowSumTol)
    throw ValidationError("random walk needs a, c > 0 and a + b + c = 1");
  MatrixMeasure m;
  std::tie(m.lower, m.upper) = rw_support(a, c);
  m.density.numerator = {Poly::constant(1.0), Poly({-b / (2.0 * c), 1.0 / (2.0 * c)}), Poly::constant(a / c)};
  m.density.scale = 1.0 / std::numbers::pi;
  return m;
}

// ---------------------------------------------------------------------------
// Transforms

namespace detail {

/// M N M^T for a symmetric polynomial matrix N given by its three entries.
inline std::array<Poly, 3> congruence(const Mat2d& m, const std::array<Poly, 3>& n) {
  const Poly& n00 = n[0];
  const Poly& n01 = n[1];
  const Poly& n11 = n[2];
  auto entry = [&](int i, int j) {
    return m(i, 0) * m(j, 0) * n00 + (m(i, 0) * m(j, 1) + m(i, 1) * m(j, 0)) * n01 + m(i, 1) * m(j, 1) * n11;
  };
  return {entry(0, 0), entry(0, 1), entry(1, 1)};
}

inline bool atoms_proper(const std::vector<Atom>& atoms) {
  for (const Atom& a : atoms)
    if (!is_psd(a.weight, kAtomPsdTol)) return false;
  return true;
}

}  // namespace detail

/// S0 [Psi/x + ((Pi_0 Y_0 S_0)^{-1} - M_{-1}) delta_0] S0^T.
inline MatrixMeasure geronimus(const MatrixMeasure& m, const RAFactors& f, const PotentialCoeffs& pot) {
  if (f.degenerate) throw DegenerateError("y0 = 0: Geronimus transform undefined");
  const Mat2d m_1 = moment(m, -1);
  const Mat2d s0 = f.S(0);
  MatrixMeasure out = m;
  out.density.numerator = detail::congruence(s0, m.density.numerator);
  out.density.x_power = m.density.x_power - 1;
  out.atoms.clear();
  for (const Atom& a : m.atoms) out.atoms.push_back({a.location, s0 * ((1.0 / a.location) * a.weight) * s0.transpose()});
  const Mat2d head = (pot.Pi(0) * f.Y(0) * s0).inverse();
  Mat2d bracket = head - m_1;
  // Entries that cancel to roundoff are exact zeros (alpha = H', x0 = H); a
  // residue of 1e-16 would be amplified by |Q~_n(0)|^2 downstream.
  for (std::size_t k = 0; k < 4; ++k)
    if (std::abs(bracket.v[k]) <= kCancelTol * std::max(std::abs(head.v[k]), std::abs(m_1.v[k]))) bracket.v[k] = 0.0;
  out.atoms.push_back({0.0, s0 * bracket * s0.transpose()});
  out.proper = detail::atoms_proper(out.atoms);
  return out;
}

/// x S~0^{-1} Psi S~0^{-T}; atoms at 0 are annihilated.
inline MatrixMeasure christoffel(const MatrixMeasure& m, const ARFactors& f) {
  const Mat2d inv = f.S(0).inverse();
  MatrixMeasure out = m;
  out.density.numerator = detail::congruence(inv, m.density.numerator);
  out.density.x_power = m.density.x_power + 1;
  out.atoms.clear();
  for (const Atom& a : m.atoms)
    if (a.location != 0.0) out.atoms.push_back({a.location, inv * (a.location * a.weight) * inv.transpose()});
  out.proper = detail::atoms_proper(out.atoms);
  return out;
}

// ---------------------------------------------------------------------------
// Stieltjes transform of the AR example

using cplx = std::complex<double>;

/// B(psi_ij; z) = (p_ij + eps_ij q_ij s(z)) / r_ij with s(z) = sqrt(z - s_+) sqrt(z - s_-).
struct StieltjesMatrix {
  double a = 0.0, b = 0.0, c = 0.0;
  double lower = 0.0, upper = 0.0;
  std::array<Poly, 3> p, q, r;     // entries (1,1), (1,2), (2,2)
  std::array<int, 3> branch{};     // eps_ij
  Mat2d A0, B0, C1;                // blocks of the chain

  cplx sqrt_factor(cplx z) const { return std::sqrt(z - upper) * std::sqrt(z - lower); }

  Mat2c evaluate(cplx z) const {
    const cplx s = sqrt_factor(z);
    std::array<cplx, 3> v;
    for (std::size_t k = 0; k < 3; ++k) v[k] = (p[k](z) + double(branch[k]) * q[k](z) * s) / r[k](z);
    return {v[0], v[1], v[1], v[2]};
  }

  /// Direct solution of B Pi_Psi [z I - B0 - g(z) A0 C1] = I with g = (z - b - s)/(2ac).
  Mat2c linear_solve(cplx z) const {
    const cplx g = (z - b - sqrt_factor(z)) / (2.0 * a * c);
    const Mat2c m = Mat2c(z, 0.0, 0.0, z) - Mat2c(B0) - g * Mat2c(A0 * C1);
    const Mat2c pi_inv = Mat2c::diag(1.0, a * b / (c * (1.0 - c)));
    return m.inverse() * pi_inv;
  }
};

inline StieltjesMatrix stieltjes_solve_ar(double a, double b, double c) {
  if (std::abs(a + b + c - 1.0) > kRowSumTol || !(a > 0.0 && c > 0.0 && b > 0.0))
    throw ValidationError("AR example needs a, b, c > 0 and a + b + c = 1");
  if (a > (1.0 - std::sqrt(c)) * (1.0 - std::sqrt(c)) + 1e-15)
    throw ConvergenceError("a <= (1 - sqrt(c))^2 required");
  StieltjesMatrix s;
  s.a = a;
  s.b = b;
  s.c = c;
  std::tie(s.lower, s.upper) = rw_support(a, c);

  const double ia = 1.0 - a, ic = 1.0 - c, bb = b * b;
  const double g11 = 2 * ia * ia * ia + 2 * ic * ic * ic - 2 + 2 * a * c * (2 + a + c - 4 * a * c) + bb * (2 * a * c - a - c);
  const double g12 = a * a * a + a * a * (2 * c * c + 2 * c - 3) + a * ic * (2 * c * c - 4 * c + 3) - ic * ic * (1 - 3 * c);
  const double g22 = -2 * a * a * (1 + c) + a * (2 * c * c - 5 * c + 5) - 3 * ic * ic;
  using P = Poly;
  const P r11 = P::from_descending({2 * ia * ic, -4 * b * ia * ic, g11 - bb * (2 * a * c - a - c), 4 * a * bb * c,
                                    -2 * a * bb * c});
  s.p = {P::from_descending({2 * ia * ic, -4 * b * ia * ic, g11, -bb * ((a - c) * (a - c) - a - c)}),
         b * P::from_descending({-ia * ic, b * ia * (2 - 3 * c), g12, -b * c * (ic * ic - a * (1 + c))}),
         bb * P::from_descending({-ia, ia * (b + 2 * ic), g22, -b * (a * c - c * c + a + 2 * c - 1)})};
  s.q = {b * P::from_descending({-2 * ia * ic, -a * ia - c * ic}),
         b * P::from_descending({-ia * ic, ia * (1 + 2 * c * c - a - 3 * c), b * c * ic}),
         b * P::from_descending({-ia * (ic + a), 2 * b * ia * ic, -bb * ic})};
  s.r = {r11, c * r11, c * r11};

  const BlockChain blocks = relabel_to_blocks(make_ar_example(a, b, c));
  s.A0 = blocks.A(0);
  s.B0 = blocks.B(0);
  s.C1 = blocks.C(1);

  // Branch per entry: the sign that reproduces the decaying linear solution.
  const cplx probe(s.upper + 1.0, 0.5);
  const Mat2c ref = s.linear_solve(probe);
  const std::array<cplx, 3> target{ref(0, 0), ref(0, 1), ref(1, 1)};
  const cplx sq = s.sqrt_factor(probe);
  for (std::size_t k = 0; k < 3; ++k) {
    const cplx plus = (s.p[k](probe) + s.q[k](probe) * sq) / s.r[k](probe);
    const cplx minus = (s.p[k](probe) - s.q[k](probe) * sq) / s.r[k](probe);
    s.branch[k] = std::abs(plus - target[k]) < std::abs(minus - target[k]) ? 1 : -1;
  }
  return s;
}

struct PoleResidue {
  double location = 0.0;
  Mat2d weight;          // residue of B(Psi; z) at the pole = atom weight
  bool vanishing = true; // max |entry| < 1e-9
  bool at_endpoint = false;
};

struct StieltjesInversion {
  MatrixMeasure measure;
  std::vector<PoleResidue> poles;
};

inline constexpr double kResidueTol = 1e-9;

/// Real roots of a polynomial from companion-matrix eigenvalues, Newton-polished.
inline std::vector<double> real_roots(const Poly& poly, double imag_tol = 1e-8) {
  const int deg = poly.degree();
  std::vector<double> roots;
  if (deg < 1) return roots;
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
  const double lead = poly.coeff(static_cast<std::size_t>(deg));
  for (int i = 0; i < deg; ++i) comp(0, i) = -poly.coeff(static_cast<std::size_t>(deg - 1 - i)) / lead;
  for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
  const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(comp, false).eigenvalues();
  const Poly d = poly.derivative();
  for (const auto& z : ev) {
    if (std::abs(z.imag()) > imag_tol * std::max(1.0, std::abs(z))) continue;
    double x = z.real();
    for (int it = 0; it < 8; ++it) {
      const double dv = d(x);
      if (dv == 0.0) break;
      const double step = poly(x) / dv;
      x -= step;
      if (std::abs(step) < 1e-16 * std::max(1.0, std::abs(x))) break;
    }
    roots.push_back(x);
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

/// Stieltjes-Perron inversion: continuous part on [s_-, s_+] and residues at
/// the real zeros of r11. Non-vanishing residues become atoms.
inline StieltjesInversion stieltjes_invert(const StieltjesMatrix& s) {
  constexpr double kSnap = 1e-9;
  StieltjesInversion out;
  MatrixMeasure& m = out.measure;
  m.lower = s.lower;
  m.upper = s.upper;
  m.density.scale = 1.0 / std::numbers::pi;
  m.density.lower_exponent = 0.5;
  m.density.upper_exponent = 0.5;
  // psi = -eps q w / (pi r); the (1,1) entry is brought over the common denominator c r11.
  m.density.numerator = {(-s.branch[0] * s.c) * s.q[0], double(-s.branch[1]) * s.q[1], double(-s.branch[2]) * s.q[2]};
  Poly denom = s.c * s.r[0];

  const Poly r11 = s.r[0];
  const Poly dr11 = r11.derivative();
  for (double z0 : real_roots(r11)) {
    PoleResidue pr;
    if (std::abs(z0 - s.upper) < kSnap) {
      z0 = s.upper;
      pr.at_endpoint = true;
    } else if (std::abs(z0 - s.lower) < kSnap) {
      z0 = s.lower;
      pr.at_endpoint = true;
    } else if (z0 > s.lower && z0 < s.upper) {
      throw InconsistencyError("zero of r11 at " + std::to_string(z0) + " inside the support");
    }
    pr.location = z0;
    const double sq = std::real(s.sqrt_factor(cplx(z0, 0.0)));
    std::array<double, 3> w{};
    for (std::size_t k = 0; k < 3; ++k) {
      const double scale = k == 0 ? 1.0 : s.c;
      w[k] = (s.p[k](z0) + s.branch[k] * s.q[k](z0) * sq) / (scale * dr11(z0));
    }
    pr.weight = {w[0], w[1], w[1], w[2]};
    pr.vanishing = max_abs(pr.weight) < kResidueTol;
    if (!pr.vanishing) m.atoms.push_back({z0, pr.weight});
    if (pr.at_endpoint) {
      // Fold the endpoint zero into the endpoint exponent.
      denom = denom.deflate(z0);
      if (z0 == s.upper) {
        for (auto& p : m.density.numerator) p = -1.0 * p;
        m.density.upper_exponent -= 1.0;
      } else {
        m.density.lower_exponent -= 1.0;
      }
    }
    out.poles.push_back(pr);
  }
  m.density.denominator = denom;
  m.proper = detail::atoms_proper(m.atoms);
  return out;
}

// ---------------------------------------------------------------------------
// Karlin-McGregor

inline constexpr double kProbabilitySlack = 1e-9;

struct KMResult {
  double raw = 0.0;
  double probability = 0.0;  // raw clamped to [0, 1]
  bool in_range = true;      // raw within [-1e-9, 1 + 1e-9]
  bool converged = true;
};

/// Block n-step matrix (integral of x^n Q_i dPsi Q_j^T) Pi_j.
inline std::pair<Mat2d, bool> km_block(const MatrixMeasure& m, const MOPFamily& family, const NormMatrices& norms,
                                       std::size_t i, std::size_t j, int n) {
  const std::size_t top = std::max(i, j);
  const auto res = integrate(m, [&](double x) {
    const auto vals = family.evaluate(x, top);
    return std::pair{std::pow(x, n) * vals[i], vals[j]};
  });
  return {res.value * norms[j], res.converged};
}

/// Scalar n-step probability P^(n)_{ij} for states i, j on Z.
inline KMResult km_nstep(const MatrixMeasure& m, const MOPFamily& family, const NormMatrices& norms, long i, long j,
                         int n) {
  const BlockIndex bi = block_of(i), bj = block_of(j);
  const auto [blk, conv] = km_block(m, family, norms, bi.block, bj.block, n);
  KMResult r;
  r.raw = blk(bi.comp, bj.comp);
  r.probability = std::clamp(r.raw, 0.0, 1.0);
  r.in_range = r.raw >= -kProbabilitySlack && r.raw <= 1.0 + kProbabilitySlack;
  r.converged = conv;
  return r;
}

}  // namespace bdz
