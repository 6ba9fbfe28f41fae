// Command-line front end: one subcommand per pipeline stage.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "bdz/bdz.hpp"
#include "bdz/io.hpp"

namespace {

using namespace bdz;
using io::Csv;
using io::Json;

enum Exit : int {
  kOk = 0,
  kOther = 1,
  kConfig = 2,
  kValidation = 3,
  kConvergence = 4,
  kBound = 5,
  kStochasticity = 6,
  kSingular = 7,
  kDegenerate = 8,
  kCompatibility = 9,
  kUndefinedMoment = 10,
  kInconsistency = 11,
  kVerifyFailed = 12,
};

struct Options {
  std::string format = "csv";
  std::string output;
  std::string chain_file;
  std::string example;
  double a = 0.125;
  double c = 0.125;
  std::optional<double> b;
  double tol = 1e-13;
  long max_iter = 10'000;
  long horizon = kDefaultHorizon;
};

void emit(const Options& o, const std::string& text) {
  if (o.output.empty() || o.output == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream out(o.output, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + o.output + "'");
  out << text;
}

double hold(const Options& o) { return o.b.value_or(1.0 - o.a - o.c); }

io::ChainSpec load(const Options& o) {
  if (!o.chain_file.empty() && !o.example.empty()) throw ConfigError("give either --chain or --example, not both");
  if (!o.chain_file.empty()) return io::load_chain(o.chain_file);
  if (o.example == "rw" || o.example.empty()) return {make_random_walk(o.a, hold(o), o.c), std::nullopt, std::nullopt};
  if (o.example == "ar") {
    const AlmostBDChain ch = make_ar_example(o.a, hold(o), o.c);
    return {ch.base, ch.d_plus, ch.d_minus};
  }
  throw ConfigError("unknown example '" + o.example + "' (rw|ar)");
}

CFOptions cf_options(const Options& o) { return {o.tol, o.max_iter}; }

FactorOptions factor_options(const Options& o) {
  FactorOptions f;
  f.horizon = o.horizon;
  f.cf = cf_options(o);
  return f;
}

/// "min" selects the lower bound.
double parameter(const std::string& text, double lower, const char* name) {
  if (text == "min") return lower;
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(std::string("--") + name + " must be a number or 'min'");
}

Json mat_json(const Mat2d& m) {
  return Json(Json::Array{Json(Json::Array{m(0, 0), m(0, 1)}), Json(Json::Array{m(1, 0), m(1, 1)})});
}

template <TransitionOperator Chain>
std::string rows_csv(const Chain& ch, long k) {
  Csv csv({"i", "to_i-2", "to_i-1", "stay", "to_i+1", "to_i+2", "row_sum"});
  for (long i = -k; i <= k; ++i) {
    std::vector<double> r{static_cast<double>(i)};
    double sum = 0.0;
    for (long j = i - 2; j <= i + 2; ++j) {
      r.push_back(ch.transition(i, j));
      sum += r.back();
    }
    r.push_back(sum);
    csv.row(r);
  }
  return csv.str();
}

std::string chain_text(const Options& o, const io::ChainSpec& spec, long k) {
  if (o.format == "json") {
    auto d = spec.almost() ? std::optional(std::pair{*spec.d_plus, *spec.d_minus}) : std::nullopt;
    return io::chain_json(spec.base, d).dump();
  }
  return spec.almost() ? rows_csv(spec.as_almost(), k) : rows_csv(spec.base, k);
}

std::string factors_text(const Options& o, const FactorPair& f, long range, Json head) {
  if (o.format == "json") {
    Json rows = Json::array();
    for (long n = -range; n <= range; ++n)
      rows.push(Json::object().set("n", n).set("x", f.x(n)).set("y", f.y(n)).set("s", f.s(n)).set("r", f.r(n)));
    head.set("alpha", f.alpha)
        .set("horizon", f.horizon)
        .set("stabilized", f.stabilized)
        .set("degenerate", f.degenerate)
        .set("rows", std::move(rows));
    return head.dump();
  }
  Csv csv({"n", "x", "y", "s", "r", "alpha"});
  for (long n = -range; n <= range; ++n) {
    std::vector<std::string> cells{std::to_string(n), io::fmt(f.x(n)), io::fmt(f.y(n)), io::fmt(f.s(n)),
                                   io::fmt(f.r(n)), n == 0 ? io::fmt(f.alpha) : ""};
    csv.row_strings(cells);
  }
  return csv.str();
}

struct RAArgs {
  std::string alpha = "min";
  std::string x0 = "min";
};

RAFactors factorize_ra(const Options& o, const RAArgs& p, Json* head = nullptr) {
  const io::ChainSpec spec = load(o);
  if (spec.almost()) throw ConfigError("RA factorization needs a birth-death chain (no d_plus/d_minus)");
  const RAAdmissibility adm = ra_admissible(spec.base, cf_options(o));
  const double alpha = parameter(p.alpha, adm.H_prime, "alpha");
  const double x0 = parameter(p.x0, adm.H, "x0");
  if (head) *head = Json::object().set("H", adm.H).set("H_prime", adm.H_prime).set("feasible", adm.feasible);
  return ra_factorize(spec.base, alpha, x0, factor_options(o));
}

ARFactors factorize_ar(const Options& o, Json* head = nullptr) {
  const io::ChainSpec spec = load(o);
  if (!spec.almost()) throw ConfigError("AR factorization needs d_plus and d_minus");
  const AlmostBDChain ch = spec.as_almost();
  if (head) {
    const auto [ht, htp] = eval_H_ar(ch, cf_options(o));
    *head = Json::object().set("H_tilde", ht.value).set("H_tilde_prime", htp.value);
  }
  return ar_factorize(ch, factor_options(o));
}

// ---------------------------------------------------------------------------
// Spectral pipeline shared by spectrum and kmstep.

struct Pipeline {
  MatrixMeasure measure;
  std::optional<MOPFamily> family;
  NormMatrices norms;
  std::vector<PoleResidue> poles;
  std::function<double(long, long, int)> oracle;
};

Pipeline build_pipeline(const Options& o, const std::string& transform, const RAArgs& ra, std::size_t top) {
  const double a = o.a, b = hold(o), c = o.c;
  Pipeline p;
  const long range = static_cast<long>(top) + 1;
  if (o.example == "rw" || o.example.empty()) {
    const BDChain ch = make_random_walk(a, b, c);
    const auto pot = potential_coeffs(ch, range);
    const MatrixMeasure base = rw_spectral(a, b, c);
    if (transform == "none") {
      p.measure = base;
      p.family = MOPFamily::q(relabel_to_blocks(ch));
      p.norms = norm_matrices(pot, top);
      p.oracle = [ch](long i, long j, int n) { return truncated_power(ch, i, j, n); };
    } else if (transform == "geronimus") {
      const RAAdmissibility adm = ra_admissible(ch, cf_options(o));
      const RAFactors f = ra_factorize(ch, parameter(ra.alpha, adm.H_prime, "alpha"), parameter(ra.x0, adm.H, "x0"),
                                       factor_options(o));
      p.measure = geronimus(base, f, pot);
      p.family = MOPFamily::qtilde(f);
      p.norms = norm_matrices(NormKind::PiTilde, f, pot, top);
      const AlmostBDChain dt = darboux_ra(f).chain;
      p.oracle = [dt](long i, long j, int n) { return truncated_power(dt, i, j, n); };
    } else {
      throw ConfigError("transform '" + transform + "' does not apply to the rw example (none|geronimus)");
    }
  } else if (o.example == "ar") {
    const AlmostBDChain ch = make_ar_example(a, b, c);
    const auto pot = potential_coeffs(ch, range);
    auto inv = stieltjes_invert(stieltjes_solve_ar(a, b, c));
    p.poles = inv.poles;
    if (transform == "none") {
      p.measure = inv.measure;
      p.family = MOPFamily::q(relabel_to_blocks(ch));
      p.norms = norm_matrices(pot, top);
      p.oracle = [ch](long i, long j, int n) { return truncated_power(ch, i, j, n); };
    } else if (transform == "christoffel") {
      const ARFactors f = ar_factorize(ch, factor_options(o));
      p.measure = christoffel(inv.measure, f);
      p.family = MOPFamily::qhat(f);
      p.norms = norm_matrices(NormKind::PiHat, f, pot, top);
      const BDChain dt = darboux_ar(f).chain;
      p.oracle = [dt](long i, long j, int n) { return truncated_power(dt, i, j, n); };
    } else {
      throw ConfigError("transform '" + transform + "' does not apply to the ar example (none|christoffel)");
    }
  } else {
    throw ConfigError("spectral subcommands need --example rw|ar");
  }
  return p;
}

int run(int argc, char** argv) {
  Options o;
  if (const char* env = std::getenv("BDZ_TOL")) {
    try {
      o.tol = std::stod(env);
    } catch (const std::exception&) {
      throw ConfigError("BDZ_TOL is not a number");
    }
    if (!(o.tol > 0.0)) throw ConfigError("BDZ_TOL must be positive");
  }

  CLI::App app{"Factorizations, Darboux transforms and spectral matrices of birth-death chains on Z"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("-o,--output", o.output, "Output path (default stdout)");

  auto chain_opts = [&o](CLI::App* sub) {
    sub->add_option("--chain", o.chain_file, "Chain definition file (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--example", o.example, "Built-in example chain")->check(CLI::IsMember({"rw", "ar"}));
    sub->add_option("--a", o.a, "Example birth probability");
    sub->add_option("--b", o.b, "Example hold probability (default 1 - a - c)");
    sub->add_option("--c", o.c, "Example death probability");
    sub->add_option("--tol", o.tol, "Continued-fraction tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--max-iter", o.max_iter, "Continued-fraction iteration cap")->check(CLI::PositiveNumber);
    sub->add_option("--horizon", o.horizon, "Recursion horizon")->check(CLI::PositiveNumber);
  };

  long k = 5;
  auto* inspect = app.add_subcommand("inspect", "Print chain rows i in [-k, k]");
  chain_opts(inspect);
  inspect->add_option("-k", k, "Row range")->check(CLI::NonNegativeNumber);

  std::string which = "H";
  long terms = 50;
  auto* cfrac = app.add_subcommand("cfrac", "Convergent table of H, Hp, Ht, Htp or J");
  chain_opts(cfrac);
  cfrac->add_option("--which", which, "Fraction")->check(CLI::IsMember({"H", "Hp", "Ht", "Htp", "J"}));
  cfrac->add_option("--terms", terms, "Number of J convergents")->check(CLI::NonNegativeNumber);

  RAArgs ra;
  long range = 8;
  auto* fra = app.add_subcommand("factorize-ra", "Reflecting-absorbing factorization");
  chain_opts(fra);
  fra->add_option("--alpha", ra.alpha, "alpha, or 'min' for H'");
  fra->add_option("--x0", ra.x0, "x0, or 'min' for H");
  fra->add_option("--range", range, "Rows |n| <= range")->check(CLI::NonNegativeNumber);

  auto* far = app.add_subcommand("factorize-ar", "Absorbing-reflecting factorization");
  chain_opts(far);
  far->add_option("--range", range, "Rows |n| <= range")->check(CLI::NonNegativeNumber);

  std::string kind = "ra";
  auto* dar = app.add_subcommand("darboux", "Darboux transform (P_A P_R or P~_R P~_A)");
  chain_opts(dar);
  dar->add_option("--kind", kind, "Factorization")->check(CLI::IsMember({"ra", "ar"}));
  dar->add_option("--alpha", ra.alpha, "RA alpha, or 'min'");
  dar->add_option("--x0", ra.x0, "RA x0, or 'min'");
  dar->add_option("-k", k, "Row range for CSV")->check(CLI::NonNegativeNumber);

  std::string family = "Q";
  double x = 0.0;
  long degree = 8;
  auto* op = app.add_subcommand("opoly", "Matrix polynomial family values at x");
  chain_opts(op);
  op->add_option("--family", family, "Family")->check(CLI::IsMember({"Q", "U", "T", "Qtilde", "Qhat"}));
  op->add_option("--x", x, "Evaluation point");
  op->add_option("--n", degree, "Highest index")->check(CLI::NonNegativeNumber);
  op->add_option("--alpha", ra.alpha, "RA alpha, or 'min'");
  op->add_option("--x0", ra.x0, "RA x0, or 'min'");

  std::string transform = "none";
  long samples = 64;
  std::string atoms_path;
  auto* spec = app.add_subcommand("spectrum", "Spectral matrix of an example chain");
  chain_opts(spec);
  spec->add_option("--transform", transform, "Transform")->check(
      CLI::IsMember({"none", "geronimus", "christoffel"}));
  spec->add_option("--alpha", ra.alpha, "RA alpha, or 'min'");
  spec->add_option("--x0", ra.x0, "RA x0, or 'min'");
  spec->add_option("--samples", samples, "Density samples")->check(CLI::PositiveNumber);
  spec->add_option("--atoms", atoms_path, "Write atoms as JSON to this path (csv format)");

  long si = 0, sj = 0;
  int sn = 1;
  auto* km = app.add_subcommand("kmstep", "Karlin-McGregor n-step probability vs the exact oracle");
  chain_opts(km);
  km->add_option("--transform", transform, "Transform")->check(CLI::IsMember({"none", "geronimus", "christoffel"}));
  km->add_option("--alpha", ra.alpha, "RA alpha, or 'min'");
  km->add_option("--x0", ra.x0, "RA x0, or 'min'");
  km->add_option("--i", si, "From state")->required();
  km->add_option("--j", sj, "To state")->required();
  km->add_option("--n", sn, "Steps")->required()->check(CLI::NonNegativeNumber);

  std::string suite;
  SuiteParams sp;
  auto* ver = app.add_subcommand("verify", "Cross-check suite against the exact oracle (JSON report)");
  ver->add_option("--suite", suite, "Suite")->required()->check(
      CLI::IsMember({"rw", "ra-darboux", "ar-darboux", "stieltjes"}));
  ver->add_option("--a", sp.a, "Example birth probability");
  ver->add_option("--c", sp.c, "Example death probability");
  ver->add_option("--radius", sp.state_radius, "States |i|, |j| <= radius (negative: skip)");
  ver->add_option("--steps", sp.max_steps, "Steps n <= steps");
  ver->add_option("--degree", sp.max_degree, "Orthogonality degree");
  ver->add_option("--alpha-shift", sp.alpha_shift, "RA alpha = H' + shift")->check(CLI::NonNegativeNumber);
  ver->add_option("--x0-shift", sp.x0_shift, "RA x0 = H + shift")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  if (*inspect) {
    emit(o, chain_text(o, load(o), k));
  } else if (*cfrac) {
    if (which == "J") {
      const io::ChainSpec s = load(o);
      const auto j = j_convergents(s.base.a.right_tail(), s.base.c.right_tail(), terms);
      Csv csv({"k", "j_k"});
      for (std::size_t n = 0; n < j.size(); ++n) csv.row({static_cast<double>(n), j[n]});
      emit(o, csv.str());
    } else {
      const io::ChainSpec s = load(o);
      CFResult r;
      if (which == "H") r = eval_H(s.base, cf_options(o));
      if (which == "Hp") r = eval_H_prime(s.base, cf_options(o));
      if (which == "Ht") r = evaluate_cf(ht_numerators(s.base), cf_options(o));
      if (which == "Htp") r = evaluate_cf(htp_numerators(s.base), cf_options(o));
      if (o.format == "json") {
        Json conv = Json::array();
        for (const auto& cv : r.convergents)
          conv.push(Json::object().set("k", cv.k).set("A_cf", cv.numerator).set("B_cf", cv.denominator).set("h_k",
                                                                                                            cv.value));
        emit(o, Json::object()
                    .set("fraction", which)
                    .set("value", r.value)
                    .set("converged_by_iteration", r.converged_by_iteration)
                    .set("closed_form_tail", r.closed_form_tail)
                    .set("positivity", r.positivity)
                    .set("convergents", std::move(conv))
                    .dump());
      } else {
        Csv csv({"k", "A_cf", "B_cf", "h_k"});
        for (const auto& cv : r.convergents) csv.row({static_cast<double>(cv.k), cv.numerator, cv.denominator, cv.value});
        emit(o, csv.str());
      }
    }
  } else if (*fra) {
    Json head;
    const RAFactors f = factorize_ra(o, ra, &head);
    emit(o, factors_text(o, f, range, std::move(head)));
  } else if (*far) {
    Json head;
    const ARFactors f = factorize_ar(o, &head);
    emit(o, factors_text(o, f, range, std::move(head)));
  } else if (*dar) {
    io::ChainSpec out;
    if (kind == "ra") {
      const DarbouxRA d = darboux_ra(factorize_ra(o, ra));
      out = {d.chain.base, d.chain.d_plus, d.chain.d_minus};
    } else {
      out = {darboux_ar(factorize_ar(o)).chain, std::nullopt, std::nullopt};
    }
    emit(o, chain_text(o, out, k));
  } else if (*op) {
    std::optional<MOPFamily> fam;
    if (family == "Q") {
      const io::ChainSpec s = load(o);
      fam = s.almost() ? MOPFamily::q(relabel_to_blocks(s.as_almost())) : MOPFamily::q(relabel_to_blocks(s.base));
    } else if (family == "U" || family == "Qtilde") {
      const RAFactors f = factorize_ra(o, ra);
      fam = family == "U" ? MOPFamily::u(f) : MOPFamily::qtilde(f);
    } else {
      const ARFactors f = factorize_ar(o);
      fam = family == "T" ? MOPFamily::t(f) : MOPFamily::qhat(f);
    }
    const auto vals = fam->evaluate(x, static_cast<std::size_t>(degree));
    Csv csv({"n", "m00", "m01", "m10", "m11"});
    for (std::size_t n = 0; n < vals.size(); ++n)
      csv.row({static_cast<double>(n), vals[n](0, 0), vals[n](0, 1), vals[n](1, 0), vals[n](1, 1)});
    emit(o, csv.str());
  } else if (*spec) {
    const Pipeline p = build_pipeline(o, transform, ra, 1);
    Json atoms = Json::array();
    for (const auto& at : p.measure.atoms) atoms.push(Json::object().set("location", at.location).set("weight", mat_json(at.weight)));
    Json poles = Json::array();
    for (const auto& pr : p.poles)
      poles.push(Json::object()
                     .set("location", pr.location)
                     .set("residue", mat_json(pr.weight))
                     .set("vanishing", pr.vanishing)
                     .set("at_endpoint", pr.at_endpoint));
    Csv csv({"x", "w00", "w01", "w11"});
    Json rows = Json::array();
    const double lo = p.measure.lower, hi = p.measure.upper;
    for (long s = 0; s < samples; ++s) {
      const double xs = lo + (hi - lo) * (static_cast<double>(s) + 0.5) / static_cast<double>(samples);
      const Mat2d w = p.measure.density_at(xs);
      csv.row({xs, w(0, 0), w(0, 1), w(1, 1)});
      rows.push(Json(Json::Array{xs, w(0, 0), w(0, 1), w(1, 1)}));
    }
    if (o.format == "json") {
      emit(o, Json::object()
                  .set("support", Json(Json::Array{lo, hi}))
                  .set("proper", p.measure.proper)
                  .set("samples", std::move(rows))
                  .set("atoms", std::move(atoms))
                  .set("poles", std::move(poles))
                  .dump());
    } else {
      emit(o, csv.str());
      if (!atoms_path.empty()) {
        std::ofstream out(atoms_path, std::ios::binary);
        if (!out) throw ConfigError("cannot write '" + atoms_path + "'");
        out << atoms.dump();
      }
    }
  } else if (*km) {
    const std::size_t top = std::max(block_of(si).block, block_of(sj).block);
    const Pipeline p = build_pipeline(o, transform, ra, top + 1);
    const KMResult r = km_nstep(p.measure, *p.family, p.norms, si, sj, sn);
    const double oracle = p.oracle(si, sj, sn);
    if (o.format == "json") {
      emit(o, Json::object()
                  .set("i", si)
                  .set("j", sj)
                  .set("n", sn)
                  .set("raw", r.raw)
                  .set("probability", r.probability)
                  .set("oracle", oracle)
                  .set("abs_error", std::abs(r.raw - oracle))
                  .set("in_range", r.in_range)
                  .set("quadrature_converged", r.converged)
                  .dump());
    } else {
      Csv csv({"i", "j", "n", "raw", "probability", "oracle", "abs_error", "in_range"});
      csv.row_strings({std::to_string(si), std::to_string(sj), std::to_string(sn), io::fmt(r.raw),
                       io::fmt(r.probability), io::fmt(oracle), io::fmt(std::abs(r.raw - oracle)),
                       r.in_range ? "true" : "false"});
      emit(o, csv.str());
    }
  } else if (*ver) {
    const CrossCheckReport rep = cross_check(suite, sp);
    Json entries = Json::array();
    for (const auto& e : rep.entries)
      entries.push(Json::object()
                       .set("name", e.name)
                       .set("max_error", e.max_error)
                       .set("tolerance", e.tolerance)
                       .set("samples", e.samples)
                       .set("passed", e.passed()));
    emit(o, Json::object().set("suite", rep.suite).set("passed", rep.passed()).set("checks", std::move(entries)).dump());
    if (!rep.passed()) return kVerifyFailed;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  auto fail = [](int code, const std::exception& e) {
    std::fprintf(stderr, "bdz: %s\n", e.what());
    return code;
  };
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    return fail(kConfig, e);
  } catch (const ValidationError& e) {
    return fail(kValidation, e);
  } catch (const ConvergenceError& e) {
    return fail(kConvergence, e);
  } catch (const BoundError& e) {
    return fail(kBound, e);
  } catch (const StochasticityError& e) {
    return fail(kStochasticity, e);
  } catch (const SingularError& e) {
    return fail(kSingular, e);
  } catch (const DegenerateError& e) {
    return fail(kDegenerate, e);
  } catch (const CompatibilityError& e) {
    return fail(kCompatibility, e);
  } catch (const UndefinedMomentError& e) {
    return fail(kUndefinedMoment, e);
  } catch (const InconsistencyError& e) {
    return fail(kInconsistency, e);
  } catch (const std::exception& e) {
    return fail(kOther, e);
  }
}
