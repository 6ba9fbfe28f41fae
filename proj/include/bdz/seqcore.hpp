#pragma once

/// @file seqcore.hpp
/// Doubly-infinite coefficient sequences, birth-death chains on the integers,
/// and their relabeling into semi-infinite 2x2 block tridiagonal form.
///
/// State relabeling: n >= 0 goes to block n, component 0; -n-1 goes to block
/// n, component 1. A chain on Z then becomes a quasi-birth-death process on
/// Z_{>=0} x {0, 1}.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "bdz/errors.hpp"
#include "bdz/mat2.hpp"

namespace bdz {

inline constexpr double kRowSumTol = 1e-12;
inline constexpr double kClampTol = 1e-12;
inline constexpr long kDefaultHorizon = 256;

/// Real sequence on Z: an explicit window [lo, hi] with constant tails.
class CoeffSeq {
 public:
  CoeffSeq() = default;
  CoeffSeq(double left_tail, long lo, std::vector<double> window, double right_tail)
      : left_(left_tail), right_(right_tail), lo_(lo), window_(std::move(window)) {}

  static CoeffSeq constant(double v) { return CoeffSeq(v, 0, {}, v); }

  double operator()(long n) const {
    if (window_.empty()) return n < lo_ ? left_ : right_;
    if (n < lo_) return left_;
    if (n > hi()) return right_;
    return window_[static_cast<std::size_t>(n - lo_)];
  }

  /// Copy with the value at n replaced; the window grows contiguously and
  /// the gap is filled from the tail on that side.
  CoeffSeq with(long n, double value) const {
    CoeffSeq out = *this;
    if (out.window_.empty()) {
      out.lo_ = n;
      out.window_ = {value};
      return out;
    }
    if (n < out.lo_) {
      std::vector<double> grown(static_cast<std::size_t>(out.lo_ - n), left_);
      grown.insert(grown.end(), out.window_.begin(), out.window_.end());
      out.window_ = std::move(grown);
      out.lo_ = n;
    } else if (n > out.hi()) {
      out.window_.resize(static_cast<std::size_t>(n - out.lo_ + 1), right_);
    }
    out.window_[static_cast<std::size_t>(n - out.lo_)] = value;
    return out;
  }

  bool empty() const { return window_.empty(); }
  long lo() const { return lo_; }
  long hi() const { return lo_ + static_cast<long>(window_.size()) - 1; }
  double left_tail() const { return left_; }
  double right_tail() const { return right_; }
  const std::vector<double>& window() const { return window_; }

 private:
  double left_ = 0.0;
  double right_ = 0.0;
  long lo_ = 0;
  std::vector<double> window_;
};

/// Smallest index range covering every non-tail entry of the given sequences.
inline std::pair<long, long> joint_window(std::initializer_list<const CoeffSeq*> seqs) {
  long lo = 0, hi = 0;
  for (const CoeffSeq* s : seqs) {
    if (s->empty()) continue;
    lo = std::min(lo, s->lo());
    hi = std::max(hi, s->hi());
  }
  return {lo, hi};
}

/// Tridiagonal transition operator: a = birth, b = hold, c = death.
struct BDChain {
  CoeffSeq a, b, c;

  double transition(long i, long j) const {
    if (j == i + 1) return a(i);
    if (j == i) return b(i);
    if (j == i - 1) return c(i);
    return 0.0;
  }
  std::pair<long, long> window() const { return joint_window({&a, &b, &c}); }

  /// 0 < a_n, c_n < 1 on the window and both tails.
  bool is_irreducible() const {
    auto [lo, hi] = window();
    for (long n = lo - 1; n <= hi + 1; ++n)
      if (!(a(n) > 0.0 && a(n) < 1.0 && c(n) > 0.0 && c(n) < 1.0)) return false;
    return true;
  }
};

/// Tridiagonal chain plus the couplings 1 -> -1 (d_plus) and -1 -> 1 (d_minus).
struct AlmostBDChain {
  BDChain base;
  double d_plus = 0.0;
  double d_minus = 0.0;

  double transition(long i, long j) const {
    if (i == 1 && j == -1) return d_plus;
    if (i == -1 && j == 1) return d_minus;
    return base.transition(i, j);
  }
  std::pair<long, long> window() const { return base.window(); }
};

inline const BDChain& tridiagonal(const BDChain& c) { return c; }
inline const BDChain& tridiagonal(const AlmostBDChain& c) { return c.base; }

template <typename C>
concept TransitionOperator = requires(const C& c, long i, long j) {
  { c.transition(i, j) } -> std::convertible_to<double>;
  { c.window() } -> std::convertible_to<std::pair<long, long>>;
};

inline BDChain make_random_walk(double a, double b, double c) {
  return {CoeffSeq::constant(a), CoeffSeq::constant(b), CoeffSeq::constant(c)};
}

/// Constant chain with couplings between 1 and -1 chosen so that an AR
/// factorization exists: a_{-1} = ab/(1-c), c_1 = bc/(1-a),
/// d_{-1} = a^2/(1-c), d_1 = c^2/(1-a).
inline AlmostBDChain make_ar_example(double a, double b, double c) {
  BDChain base = make_random_walk(a, b, c);
  base.a = base.a.with(-1, a * b / (1.0 - c));
  base.c = base.c.with(1, b * c / (1.0 - a));
  return {base, c * c / (1.0 - a), a * a / (1.0 - c)};
}

// ---------------------------------------------------------------------------
// Validation

struct RowResidual {
  long index;
  double residual;
};

struct NegativeEntry {
  long row, col;
  double value;
};

struct StochasticReport {
  std::vector<RowResidual> rows;
  std::vector<NegativeEntry> negatives;
  double max_residual = 0.0;
  long worst_row = 0;

  bool ok(double tol = kRowSumTol) const {
    if (max_residual > tol) return false;
    return std::all_of(negatives.begin(), negatives.end(),
                       [tol](const NegativeEntry& e) { return e.value >= -tol; });
  }
};

/// Row sums and sign audit on the window, two rows of each tail, and rows +-1.
template <TransitionOperator Chain>
StochasticReport validate_stochastic(const Chain& chain) {
  auto [lo, hi] = chain.window();
  lo = std::min(lo, -2L) - 2;
  hi = std::max(hi, 2L) + 2;
  StochasticReport rep;
  for (long i = lo; i <= hi; ++i) {
    double sum = 0.0;
    for (long j = i - 2; j <= i + 2; ++j) {
      const double p = chain.transition(i, j);
      if (p < 0.0) rep.negatives.push_back({i, j, p});
      sum += p;
    }
    const double res = std::abs(sum - 1.0);
    rep.rows.push_back({i, res});
    if (res > rep.max_residual) {
      rep.max_residual = res;
      rep.worst_row = i;
    }
  }
  return rep;
}

template <TransitionOperator Chain>
void require_valid(const Chain& chain) {
  const auto rep = validate_stochastic(chain);
  if (!rep.ok()) {
    throw ValidationError("chain is not stochastic: row " + std::to_string(rep.worst_row) +
                          " residual " + std::to_string(rep.max_residual) +
                          (rep.negatives.empty() ? "" : ", negative entries present"));
  }
}

// ---------------------------------------------------------------------------
// Block relabeling

struct BlockIndex {
  std::size_t block;
  int comp;
};

constexpr BlockIndex block_of(long state) {
  return state >= 0 ? BlockIndex{static_cast<std::size_t>(state), 0}
                    : BlockIndex{static_cast<std::size_t>(-state - 1), 1};
}

constexpr long state_of(std::size_t block, int comp) {
  return comp == 0 ? static_cast<long>(block) : -static_cast<long>(block) - 1;
}

/// One block row: A_n (to n+1), B_n (to n), C_n (to n-1; zero for n = 0).
struct Blocks {
  Mat2d A, B, C;
};

/// Semi-infinite block tridiagonal operator, generated lazily and memoized.
/// Copies share the cache; concurrent readers are serialized on the fill.
class BlockChain {
 public:
  using Generator = std::function<Blocks(std::size_t)>;

  BlockChain() = default;
  explicit BlockChain(Generator gen) : state_(std::make_shared<State>()) {
    state_->gen = std::move(gen);
  }

  Blocks at(std::size_t n) const {
    std::lock_guard lock(state_->mutex);
    while (state_->cache.size() <= n) state_->cache.push_back(state_->gen(state_->cache.size()));
    return state_->cache[n];
  }
  Mat2d A(std::size_t n) const { return at(n).A; }
  Mat2d B(std::size_t n) const { return at(n).B; }
  Mat2d C(std::size_t n) const { return at(n).C; }

  /// Scalar entry of the flattened operator on Z.
  double transition(long i, long j) const {
    const auto bi = block_of(i);
    const auto bj = block_of(j);
    if (bj.block == bi.block) return B(bi.block)(bi.comp, bj.comp);
    if (bj.block == bi.block + 1) return A(bi.block)(bi.comp, bj.comp);
    if (bj.block + 1 == bi.block) return C(bi.block)(bi.comp, bj.comp);
    return 0.0;
  }

 private:
  struct State {
    Generator gen;
    std::mutex mutex;
    std::deque<Blocks> cache;
  };
  std::shared_ptr<State> state_;
};

/// Relabel a chain on Z into block form; rejects non-stochastic input.
template <TransitionOperator Chain>
BlockChain relabel_to_blocks(const Chain& chain) {
  require_valid(chain);
  return BlockChain([chain](std::size_t n) {
    Blocks blk;
    for (int r = 0; r < 2; ++r) {
      const long from = state_of(n, r);
      for (int s = 0; s < 2; ++s) {
        blk.A(r, s) = chain.transition(from, state_of(n + 1, s));
        blk.B(r, s) = chain.transition(from, state_of(n, s));
        blk.C(r, s) = n == 0 ? 0.0 : chain.transition(from, state_of(n - 1, s));
      }
    }
    return blk;
  });
}

/// Maximum |(C_n + B_n + A_n) 1 - 1| over blocks 0..horizon.
inline double block_row_sum_residual(const BlockChain& blocks, std::size_t horizon) {
  double worst = 0.0;
  for (std::size_t n = 0; n <= horizon; ++n) {
    const Blocks b = blocks.at(n);
    const Mat2d sum = b.A + b.B + b.C;
    for (int r = 0; r < 2; ++r) worst = std::max(worst, std::abs(sum(r, 0) + sum(r, 1) - 1.0));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Potential coefficients

/// pi_n for |n| <= range with pi_0 = 1, and the block form Pi_n = diag(pi_n, pi_{-n-1}).
class PotentialCoeffs {
 public:
  PotentialCoeffs(long range, std::vector<double> values) : range_(range), values_(std::move(values)) {}

  long range() const { return range_; }
  double pi(long n) const {
    if (n < -range_ || n > range_) throw std::out_of_range("potential coefficient outside range");
    return values_[static_cast<std::size_t>(n + range_)];
  }
  Mat2d Pi(std::size_t n) const { return Mat2d::diag(pi(static_cast<long>(n)), pi(-static_cast<long>(n) - 1)); }

 private:
  long range_;
  std::vector<double> values_;
};

template <typename Chain>
PotentialCoeffs potential_coeffs(const Chain& chain, long range) {
  if (range < 0) throw std::invalid_argument("range must be nonnegative");
  require_valid(chain);
  const BDChain& t = tridiagonal(chain);
  std::vector<double> v(static_cast<std::size_t>(2 * range + 1));
  v[static_cast<std::size_t>(range)] = 1.0;
  for (long n = 1; n <= range; ++n) {
    v[static_cast<std::size_t>(range + n)] = v[static_cast<std::size_t>(range + n - 1)] * t.a(n - 1) / t.c(n);
    v[static_cast<std::size_t>(range - n)] = v[static_cast<std::size_t>(range - n + 1)] * t.c(-n + 1) / t.a(-n);
  }
  return {range, std::move(v)};
}

/// Worst relative violation of P_ij pi_i = P_ji pi_j over |i| < range, |i - j| <= 2.
template <TransitionOperator Chain>
double symmetry_residual(const Chain& chain, const PotentialCoeffs& pot) {
  double worst = 0.0;
  const long r = pot.range();
  for (long i = -r; i <= r; ++i) {
    for (long j = std::max(-r, i - 2); j <= std::min(r, i + 2); ++j) {
      const double lhs = chain.transition(i, j) * pot.pi(i);
      const double rhs = chain.transition(j, i) * pot.pi(j);
      const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
      if (lhs != rhs) worst = std::max(worst, std::abs(lhs - rhs) / scale);
    }
  }
  return worst;
}

}  // namespace bdz
