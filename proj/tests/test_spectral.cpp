#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "bdz/spectral.hpp"
#include "bdz/verify.hpp"

using namespace bdz;

namespace {

constexpr double kPi = std::numbers::pi;

Mat2d integral_of(const MatrixMeasure& m, const MOPFamily& fam, std::size_t n, std::size_t k, int power = 0) {
  return integrate(m, [&](double x) {
           const auto v = fam.evaluate(x, std::max(n, k));
           return std::pair{std::pow(x, power) * v[n], v[k]};
         })
      .value;
}

double orthogonality_error(const MatrixMeasure& m, const MOPFamily& fam, const NormMatrices& norms, std::size_t deg) {
  double worst = 0.0;
  for (std::size_t n = 0; n <= deg; ++n)
    for (std::size_t k = 0; k <= n; ++k) {
      const Mat2d expect = n == k ? norms[n].inverse() : Mat2d::zero();
      worst = std::max(worst, max_abs(integral_of(m, fam, n, k) - expect));
    }
  return worst;
}

struct GeronimusSetup {
  BDChain chain;
  RAAdmissibility adm;
  RAFactors f;
  PotentialCoeffs pot;
  MatrixMeasure psi;
};

GeronimusSetup geronimus_setup(double a, double c, double shift) {
  const double b = 1.0 - a - c;
  const BDChain chain = make_random_walk(a, b, c);
  const RAAdmissibility adm = ra_admissible(chain);
  const RAFactors f = ra_factorize(chain, adm.H_prime + shift, adm.H + shift);
  const PotentialCoeffs pot = potential_coeffs(chain, 12);
  return {chain, adm, f, pot, geronimus(rw_spectral(a, b, c), f, pot)};
}

}  // namespace

// ---------------------------------------------------------------------------
// Base measure

TEST(RwSpectral, Support) {
  const auto m = rw_spectral(0.125, 0.75, 0.125);
  EXPECT_NEAR(m.lower, 0.5, 1e-15);
  EXPECT_NEAR(m.upper, 1.0, 1e-15);
  EXPECT_TRUE(m.atoms.empty());
  EXPECT_THROW(rw_spectral(0.0, 0.9, 0.1), ValidationError);
}

TEST(RwSpectral, DensityShape) {
  const double a = 0.1, b = 0.7, c = 0.2;
  const auto m = rw_spectral(a, b, c);
  for (double t : {0.1, 0.4, 0.9}) {
    const double x = m.lower + t * (m.upper - m.lower);
    const Mat2d w = m.density_at(x);
    EXPECT_NEAR(w(1, 1) / w(0, 0), a / c, 1e-14);
    EXPECT_NEAR(w(0, 1) / w(0, 0), (x - b) / (2.0 * c), 1e-14);
    EXPECT_NEAR(w(0, 0), 1.0 / (kPi * std::sqrt((x - m.lower) * (m.upper - x))), 1e-12);
    EXPECT_EQ(w(0, 1), w(1, 0));
  }
}

TEST(Moment, ZerothAndFirst) {
  for (auto [a, c] : {std::pair{0.125, 0.125}, std::pair{0.1, 0.2}}) {
    const double b = 1.0 - a - c;
    const auto m = rw_spectral(a, b, c);
    const Mat2d m0 = moment(m, 0);
    EXPECT_NEAR(m0(0, 0), 1.0, 1e-12);
    EXPECT_NEAR(m0(0, 1), 0.0, 1e-12);
    EXPECT_NEAR(m0(1, 1), a / c, 1e-12);
    EXPECT_NEAR(moment(m, 1)(0, 0), b, 1e-12);
  }
  EXPECT_NEAR(moment(rw_spectral(0.125, 0.75, 0.125), 1)(0, 0), 0.75, 1e-12);
}

TEST(Moment, InverseMoment) {
  EXPECT_NEAR(moment(rw_spectral(0.125, 0.75, 0.125), -1)(0, 0), std::sqrt(2.0), 1e-12);
  const double a = 0.1, b = 0.7, c = 0.2;
  const auto m = rw_spectral(a, b, c);
  const double g = std::sqrt(m.lower * m.upper);
  const Mat2d mm = moment(m, -1);
  EXPECT_NEAR(mm(0, 0), 1.0 / g, 1e-12);
  EXPECT_NEAR(mm(0, 1), (1.0 - b / g) / (2.0 * c), 1e-12);
  EXPECT_NEAR(mm(1, 1), a / (c * g), 1e-12);
}

TEST(Moment, UndefinedCases) {
  EXPECT_THROW(moment(rw_spectral(0.25, 0.5, 0.25), -1), UndefinedMomentError);
  EXPECT_THROW(moment(rw_spectral(0.125, 0.75, 0.125), -2), UndefinedMomentError);
  auto m = rw_spectral(0.125, 0.75, 0.125);
  m.atoms.push_back({0.0, Mat2d::identity()});
  EXPECT_THROW(moment(m, -1), UndefinedMomentError);
}

TEST(Integrate, Orthogonality) {
  const BDChain ch = make_random_walk(0.125, 0.75, 0.125);
  const auto m = rw_spectral(0.125, 0.75, 0.125);
  const auto fam = MOPFamily::q(relabel_to_blocks(ch));
  const auto pot = potential_coeffs(ch, 12);
  EXPECT_LT(max_abs(integral_of(m, fam, 0, 0) - pot.Pi(0).inverse()), 1e-12);
  EXPECT_LT(max_abs(integral_of(m, fam, 1, 0)), 1e-12);
  EXPECT_LT(orthogonality_error(m, fam, norm_matrices(pot, 10), 10), 1e-9);

  const BDChain as = make_random_walk(0.1, 0.7, 0.2);
  EXPECT_LT(orthogonality_error(rw_spectral(0.1, 0.7, 0.2), MOPFamily::q(relabel_to_blocks(as)),
                                norm_matrices(potential_coeffs(as, 12), 10), 10),
            1e-9);
}

TEST(Integrate, AtomsArePointEvaluations) {
  MatrixMeasure m = rw_spectral(0.125, 0.75, 0.125);
  const Mat2d w{0.2, 0.1, 0.1, 0.3};
  m.atoms.push_back({-0.5, w});
  const Mat2d diff = moment(m, 2) - moment(rw_spectral(0.125, 0.75, 0.125), 2);
  EXPECT_LT(max_abs(diff - 0.25 * w), 1e-14);
}

// ---------------------------------------------------------------------------
// Geronimus

TEST(Geronimus, MinimalParametersGiveNoAtomMass) {
  const auto g = geronimus_setup(0.125, 0.125, 0.0);
  ASSERT_EQ(g.psi.atoms.size(), 1u);
  EXPECT_EQ(g.psi.atoms[0].location, 0.0);
  EXPECT_LT(max_abs(g.psi.atoms[0].weight), 1e-10);
  EXPECT_TRUE(g.psi.proper);
}

TEST(Geronimus, AtomMatchesClosedForm) {
  for (auto [a, c] : {std::pair{0.125, 0.125}, std::pair{0.1, 0.2}}) {
    const auto g = geronimus_setup(a, c, 0.05);
    const double al = g.f.alpha, x0 = g.f.x(0), y0 = g.f.y(0), h = g.adm.H, hp = g.adm.H_prime;
    const double den = 1.0 - h - hp;
    const Mat2d w = g.psi.atoms.at(0).weight;
    EXPECT_NEAR(w(0, 0), (x0 - h + al - hp) / (y0 * den), 1e-10);
    EXPECT_NEAR(w(0, 1), (hp - al) / (al * den), 1e-10);
    EXPECT_NEAR(w(1, 0), w(0, 1), 1e-15);
    EXPECT_NEAR(w(1, 1), (al - hp) * (1.0 - h - al) / (al * al * den), 1e-10);
  }
}

TEST(Geronimus, ContinuousPart) {
  const double a = 0.1, c = 0.2;
  const auto g = geronimus_setup(a, c, 0.05);
  const double al = g.f.alpha, h = g.adm.H, hp = g.adm.H_prime;
  const Mat2d ta{1.0, (2 * al + h - hp - 1) / (2 * al), (2 * al + h - hp - 1) / (2 * al), (al - hp) * (h + al - 1) / (al * al)};
  const Mat2d tb = (1.0 / (2 * al)) * Mat2d{0.0, 1.0, 1.0, 2 * (al - c) / al};
  for (double t : {0.05, 0.3, 0.6, 0.95}) {
    const double x = g.psi.lower + t * (g.psi.upper - g.psi.lower);
    const Mat2d w = g.psi.density_at(x);
    const double k = kPi * x * std::sqrt((x - g.psi.lower) * (g.psi.upper - x));
    EXPECT_LT(max_abs(k * w - (ta + x * tb)), 1e-12) << x;
    EXPECT_EQ(w(0, 1), w(1, 0));
  }
}

TEST(Geronimus, BracketMatchesGeneralForm) {
  const auto g = geronimus_setup(0.1, 0.2, 0.05);
  const double y0 = g.f.y(0), rs = g.f.r(-1) / g.f.s(-1), sm = g.f.s(-1);
  const Mat2d bracket = (1.0 / y0) * Mat2d{1.0, -rs, -rs, rs * rs + y0 * g.f.r(-1) / (g.f.alpha * sm * sm)};
  const Mat2d general = (g.pot.Pi(0) * g.f.Y(0) * g.f.S(0)).inverse();
  EXPECT_LT(max_abs(bracket - general), 1e-12);
}

TEST(Geronimus, Orthogonality) {
  for (auto [a, c, shift] : {std::tuple{0.125, 0.125, 0.0}, std::tuple{0.125, 0.125, 0.05}, std::tuple{0.1, 0.2, 0.05}}) {
    const auto g = geronimus_setup(a, c, shift);
    const auto fam = MOPFamily::qtilde(g.f);
    const auto norms = norm_matrices(NormKind::PiTilde, g.f, g.pot, 8);
    EXPECT_LT(orthogonality_error(g.psi, fam, norms, 8), 1e-8) << a << " " << c << " " << shift;
  }
}

TEST(Geronimus, AtomCancelsLowerDegrees) {
  const auto g = geronimus_setup(0.125, 0.125, 0.05);
  const auto fam = MOPFamily::qtilde(g.f);
  for (std::size_t n = 1; n <= 6; ++n) {
    const Mat2d v = integrate(g.psi, [&](double x) { return std::pair{fam.evaluate(x, n)[n], Mat2d::identity()}; }).value;
    EXPECT_LT(max_abs(v), 1e-9) << n;
  }
}

TEST(Geronimus, Errors) {
  const BDChain edge = make_random_walk(0.25, 0.5, 0.25);
  const auto adm = ra_admissible(edge);
  const RAFactors f = ra_factorize(edge, adm.H_prime, adm.H);
  ASSERT_TRUE(f.degenerate);
  EXPECT_THROW(geronimus(rw_spectral(0.25, 0.5, 0.25), f, potential_coeffs(edge, 4)), DegenerateError);
  EXPECT_FALSE(detail::atoms_proper({{0.0, Mat2d{-1.0, 0.0, 0.0, 1.0}}}));
  EXPECT_TRUE(detail::atoms_proper({{0.0, Mat2d{1.0, 0.5, 0.5, 1.0}}}));
}

// ---------------------------------------------------------------------------
// Stieltjes transform of the AR example

TEST(Stieltjes, Structure) {
  const auto s = stieltjes_solve_ar(0.1, 0.7, 0.2);
  for (double z : {-0.7, 0.3, 2.0}) {
    EXPECT_NEAR(s.r[1](z), 0.2 * s.r[0](z), 1e-15);
    EXPECT_NEAR(s.r[2](z), 0.2 * s.r[0](z), 1e-15);
  }
  for (double z : {1e4, 1e6}) EXPECT_NEAR(std::real(z * s.evaluate(cplx(z, 0.0))(0, 0)), 1.0, 1e-3);
  EXPECT_THROW(stieltjes_solve_ar(0.1, 0.8, 0.2), ValidationError);
  EXPECT_THROW(stieltjes_solve_ar(0.6, 0.3, 0.1), ConvergenceError);
}

TEST(Stieltjes, SymmetricDenominator) {
  const double a = 0.125, b = 0.75;
  const auto s = stieltjes_solve_ar(a, b, a);
  auto closed = [=](double z) { return 2 * (1 - z) * (z * (1 - a) + a) * ((a - 1) * z * z + b * b * z - a * b * b); };
  for (double z : {-0.9, -0.2, 0.3, 0.7, 1.5}) EXPECT_NEAR(s.r[0](z), closed(z), 1e-14) << z;
}

TEST(Stieltjes, AgreesWithLinearSolve) {
  for (auto [a, c] : {std::pair{0.125, 0.125}, std::pair{0.1, 0.2}}) {
    const auto s = stieltjes_solve_ar(a, 1.0 - a - c, c);
    for (int k = 0; k < 20; ++k) {
      const double t = 2.0 * kPi * (k + 0.5) / 20.0;
      const cplx z = cplx(0.75, 0.0) + (0.4 + 0.1 * k) * cplx(std::cos(t), std::sin(t));
      EXPECT_LT(max_abs(s.evaluate(z) - s.linear_solve(z)), 1e-9) << z;
    }
  }
}

TEST(Stieltjes, PolesVanishForSymmetricExample) {
  const double a = 0.125, b = 0.75;
  const auto inv = stieltjes_invert(stieltjes_solve_ar(a, b, a));
  std::vector<double> expect{1.0, -a / (1 - a), b * (b - std::sqrt(2 * b * b - 1)) / (1 + b),
                             b * (b + std::sqrt(2 * b * b - 1)) / (1 + b)};
  EXPECT_NEAR(expect[2], 0.16991, 1e-5);
  EXPECT_NEAR(expect[3], 0.47295, 1e-5);
  ASSERT_EQ(inv.poles.size(), 4u);
  for (double z : expect) {
    bool found = false;
    for (const auto& p : inv.poles)
      if (std::abs(p.location - z) < 1e-9) {
        found = true;
        EXPECT_TRUE(p.vanishing) << z;
        EXPECT_LT(max_abs(p.weight), 1e-9) << z;
      }
    EXPECT_TRUE(found) << z;
  }
  EXPECT_TRUE(inv.measure.atoms.empty());
}

TEST(Stieltjes, ContinuousPartMatchesClosedForm) {
  const double a = 0.125, c = 0.125;
  const auto s = stieltjes_solve_ar(a, 1 - 2 * a, c);
  const auto m = stieltjes_invert(s).measure;
  const double lo = 1 - 4 * a;
  EXPECT_NEAR(m.lower, lo, 1e-15);
  EXPECT_NEAR(m.upper, 1.0, 1e-15);
  for (double x : {0.55, 0.7, 0.8, 0.95}) {
    const double l = x * (1 - a) + a;
    const double q11 = -2 * (1 - 2 * a) * (1 - a) * l;
    const double q12 = -(1 - 2 * a) * (1 - a) * l * (x - 1 + 2 * a);
    const double q22 = -(1 - 2 * a) * (1 - a) * (x * x - 2 * (1 - a) * (1 - 2 * a) * x + (1 - 2 * a) * (1 - 2 * a));
    const double f = std::sqrt((1 - x) * (x - lo)) / (c * kPi * s.r[0](x));
    const Mat2d w = m.density_at(x);
    EXPECT_NEAR(w(0, 0), f * c * q11, 1e-12);
    EXPECT_NEAR(w(0, 1), f * q12, 1e-12);
    EXPECT_NEAR(w(1, 1), f * q22, 1e-12);
    EXPECT_GT(w(0, 0), 0.0);
  }
}

TEST(Stieltjes, MomentsMatchOracle) {
  for (auto [a, c] : {std::pair{0.125, 0.125}, std::pair{0.1, 0.2}}) {
    const double b = 1.0 - a - c;
    const auto inv = stieltjes_invert(stieltjes_solve_ar(a, b, c));
    const AlmostBDChain ch = make_ar_example(a, b, c);
    const Mat2d pi0_inv = potential_coeffs(ch, 1).Pi(0).inverse();
    for (int k = 0; k <= 12; ++k)
      EXPECT_LT(max_abs(moment(inv.measure, k) - truncated_block00(ch, k) * pi0_inv), 1e-8) << k;
  }
}

TEST(Stieltjes, RootInsideSupportIsInconsistent) {
  auto s = stieltjes_solve_ar(0.125, 0.75, 0.125);
  s.r[0] = Poly::from_descending({1.0, -0.75}) * Poly::from_descending({1.0, 2.0});
  EXPECT_THROW(stieltjes_invert(s), InconsistencyError);
}

// ---------------------------------------------------------------------------
// Christoffel

TEST(Christoffel, InverseS0) {
  for (auto [a, c] : {std::pair{0.125, 0.125}, std::pair{0.1, 0.2}}) {
    const double b = 1.0 - a - c;
    const ARFactors f = ar_factorize(make_ar_example(a, b, c));
    EXPECT_LT(max_abs(f.S(0).inverse() - Mat2d{1.0, 0.0, -a / b, (1 - c) / b}), 1e-14);
  }
}

TEST(Christoffel, DensityAtSamplePoint) {
  const double a = 0.125, b = 0.75, c = 0.125;
  const auto s = stieltjes_solve_ar(a, b, c);
  const auto psih = christoffel(stieltjes_invert(s).measure, ar_factorize(make_ar_example(a, b, c)));
  const double x = 0.8;
  const double q11 = s.q[0](x), q12 = s.q[1](x), q22 = s.q[2](x);
  const double f = x * std::sqrt((s.upper - x) * (x - s.lower)) / (c * kPi * s.r[0](x));
  const double e01 = -a * c / b * q11 + (1 - c) / b * q12;
  const double e11 = a * a * c / (b * b) * q11 - 2 * a * (1 - c) / (b * b) * q12 + (1 - c) * (1 - c) / (b * b) * q22;
  const Mat2d w = psih.density_at(x);
  EXPECT_NEAR(w(0, 0), f * c * q11, 1e-12);
  EXPECT_NEAR(w(0, 1), f * e01, 1e-12);
  EXPECT_NEAR(w(1, 1), f * e11, 1e-12);
  EXPECT_EQ(w(0, 1), w(1, 0));
}

TEST(Christoffel, DropsAtomsAtZero) {
  MatrixMeasure m = rw_spectral(0.125, 0.75, 0.125);
  m.atoms.push_back({0.0, Mat2d::identity()});
  m.atoms.push_back({-0.5, Mat2d::identity()});
  const auto out = christoffel(m, ar_factorize(make_ar_example(0.125, 0.75, 0.125)));
  ASSERT_EQ(out.atoms.size(), 1u);
  EXPECT_EQ(out.atoms[0].location, -0.5);
  EXPECT_FALSE(out.proper);
}

TEST(Christoffel, Orthogonality) {
  for (auto [a, c] : {std::pair{0.125, 0.125}, std::pair{0.1, 0.2}}) {
    const double b = 1.0 - a - c;
    const AlmostBDChain ch = make_ar_example(a, b, c);
    const ARFactors f = ar_factorize(ch);
    const auto psih = christoffel(stieltjes_invert(stieltjes_solve_ar(a, b, c)).measure, f);
    const auto norms = norm_matrices(NormKind::PiHat, f, potential_coeffs(ch, 12), 8);
    EXPECT_LT(orthogonality_error(psih, MOPFamily::qhat(f), norms, 8), 1e-8) << a << " " << c;
  }
}

// ---------------------------------------------------------------------------
// Karlin-McGregor

TEST(KarlinMcGregor, RandomWalk) {
  const BDChain ch = make_random_walk(0.125, 0.75, 0.125);
  const auto m = rw_spectral(0.125, 0.75, 0.125);
  const auto fam = MOPFamily::q(relabel_to_blocks(ch));
  const auto norms = norm_matrices(potential_coeffs(ch, 8), 6);
  for (long i = -2; i <= 2; ++i)
    for (long j = -2; j <= 2; ++j) EXPECT_NEAR(km_nstep(m, fam, norms, i, j, 0).raw, i == j ? 1.0 : 0.0, 1e-10);
  EXPECT_NEAR(km_nstep(m, fam, norms, 0, 0, 1).raw, 0.75, 1e-10);
  EXPECT_NEAR(km_nstep(m, fam, norms, 0, 0, 2).raw, 0.59375, 1e-10);
  EXPECT_NEAR(km_nstep(m, fam, norms, 0, -1, 1).raw, 0.125, 1e-10);
  for (long i = -3; i <= 3; ++i)
    for (long j = -3; j <= 3; ++j) {
      const KMResult r = km_nstep(m, fam, norms, i, j, 4);
      EXPECT_TRUE(r.in_range);
      EXPECT_TRUE(r.converged);
      EXPECT_NEAR(r.raw, truncated_power(ch, i, j, 4), 5e-9) << i << " " << j;
    }
}

TEST(KarlinMcGregor, DarbouxRA) {
  const auto g = geronimus_setup(0.1, 0.2, 0.05);
  const DarbouxRA dt = darboux_ra(g.f);
  const auto fam = MOPFamily::qtilde(g.f);
  const auto norms = norm_matrices(NormKind::PiTilde, g.f, g.pot, 6);
  for (long i = -3; i <= 3; ++i)
    for (long j = -3; j <= 3; ++j)
      for (int n : {1, 3}) EXPECT_NEAR(km_nstep(g.psi, fam, norms, i, j, n).raw, truncated_power(dt.chain, i, j, n), 5e-8);
}
