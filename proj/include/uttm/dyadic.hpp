#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "uttm/embedding.hpp"
#include "uttm/spectra.hpp"
#include "uttm/toeplitz.hpp"
#include "uttm/types.hpp"

namespace uttm {

// ---------------------------------------------------------------------------
// Measures: finitely many rational-weight atoms plus absolutely continuous
// pieces with piecewise-linear density bounded below.
// ---------------------------------------------------------------------------

struct Rational {
  long long num = 0;
  long long den = 1;

  double value() const {
    return static_cast<double>(num) / static_cast<double>(den);
  }

  Rational reduced() const {
    long long g = std::gcd(num < 0 ? -num : num, den);
    if (g == 0) return {0, 1};
    return {num / g, den / g};
  }
};

/// Parses "p/q" (or a bare integer "p") exactly.
inline Rational parse_rational(const std::string& text) {
  try {
    const auto slash = text.find('/');
    if (slash == std::string::npos) {
      return Rational{std::stoll(text), 1}.reduced();
    }
    const long long p = std::stoll(text.substr(0, slash));
    const long long q = std::stoll(text.substr(slash + 1));
    if (q <= 0) throw InvalidConfig("rational with nonpositive denominator: " + text);
    return Rational{p, q}.reduced();
  } catch (const std::invalid_argument&) {
    throw InvalidConfig("malformed rational: '" + text + "'");
  } catch (const std::out_of_range&) {
    throw InvalidConfig("rational out of range: '" + text + "'");
  }
}

struct PiecewiseLinearDensity {
  std::vector<std::array<double, 2>> nodes;  // (x, y), x strictly increasing

  double front() const { return nodes.front()[0]; }
  double back() const { return nodes.back()[0]; }

  double min_node_density() const {
    double m = nodes.front()[1];
    for (const auto& nd : nodes) m = std::min(m, nd[1]);
    return m;
  }

  /// integral of the density over [lo, hi]
  double mass_between(double lo, double hi) const {
    return integral(lo, hi, /*first_moment=*/false);
  }

  /// integral of t * density(t) over [lo, hi]
  double moment_between(double lo, double hi) const {
    return integral(lo, hi, /*first_moment=*/true);
  }

 private:
  double integral(double lo, double hi, bool first_moment) const {
    lo = std::max(lo, front());
    hi = std::min(hi, back());
    if (hi <= lo) return 0.0;
    double acc = 0.0;
    for (std::size_t s = 0; s + 1 < nodes.size(); ++s) {
      const double x0 = nodes[s][0], y0 = nodes[s][1];
      const double x1 = nodes[s + 1][0], y1 = nodes[s + 1][1];
      const double a = std::max(lo, x0), b = std::min(hi, x1);
      if (b <= a) continue;
      const double slope = (y1 - y0) / (x1 - x0);
      if (!first_moment) {
        // int y0 + slope (t - x0) dt
        acc += y0 * (b - a) + 0.5 * slope * ((b - x0) * (b - x0) - (a - x0) * (a - x0));
      } else {
        // int t (y0 + slope (t - x0)) dt
        const double c0 = y0 - slope * x0;
        acc += 0.5 * c0 * (b * b - a * a) + slope * (b * b * b - a * a * a) / 3.0;
      }
    }
    return acc;
  }
};

struct Atom {
  double x = 0.0;
  Rational w;
};

struct AcPiece {
  double a = 0.0;
  double b = 0.0;
  PiecewiseLinearDensity density;
  double delta = 0.0;  // certified lower bound on the density
  Rational mass;
};

struct MeasureSpec {
  std::vector<Atom> atoms;
  std::vector<AcPiece> pieces;
};

/// Validates masses, density floors, interval disjointness and the
/// trace-zero (mean zero) requirement.
inline const MeasureSpec& validate_measure(const MeasureSpec& spec) {
  double total = 0.0, mean = 0.0, scale = 1.0;
  for (const auto& atom : spec.atoms) {
    if (atom.w.num <= 0) throw InvalidConfig("atom with nonpositive weight");
    total += atom.w.value();
    mean += atom.w.value() * atom.x;
    scale = std::max(scale, std::abs(atom.x));
  }
  for (std::size_t i = 0; i < spec.pieces.size(); ++i) {
    const auto& piece = spec.pieces[i];
    if (!(piece.a < piece.b)) throw InvalidConfig("piece interval must have a < b");
    if (!(piece.delta > 0.0)) throw InvalidConfig("piece delta must be positive");
    if (piece.density.nodes.size() < 2)
      throw InvalidConfig("piece density needs at least two nodes");
    for (std::size_t s = 0; s + 1 < piece.density.nodes.size(); ++s)
      if (!(piece.density.nodes[s][0] < piece.density.nodes[s + 1][0]))
        throw InvalidConfig("density nodes must be strictly increasing");
    if (std::abs(piece.density.front() - piece.a) > 1e-12 ||
        std::abs(piece.density.back() - piece.b) > 1e-12)
      throw InvalidConfig("density table must span the piece interval");
    if (piece.density.min_node_density() < piece.delta)
      throw DensityBelowDelta("piece " + std::to_string(i) +
                              ": density drops below delta at a table node");
    const double integral = piece.density.mass_between(piece.a, piece.b);
    if (std::abs(integral - piece.mass.value()) > 1e-9)
      throw NonUnitMass("piece " + std::to_string(i) +
                        ": density integrates to " + std::to_string(integral) +
                        " but declares mass " + std::to_string(piece.mass.value()));
    total += piece.mass.value();
    mean += piece.density.moment_between(piece.a, piece.b);
    scale = std::max({scale, std::abs(piece.a), std::abs(piece.b)});
  }
  if (spec.atoms.empty() && spec.pieces.empty())
    throw EmptyInput("measure has no atoms and no pieces");
  if (std::abs(total - 1.0) > 1e-12)
    throw NonUnitMass("measure mass " + std::to_string(total) + " != 1");
  if (std::abs(mean) > 1e-10 * scale)
    throw SumTooFarFromZero("measure mean " + std::to_string(mean) +
                            " violates the trace-zero requirement");
  // intervals pairwise disjoint
  std::vector<std::pair<double, double>> iv;
  for (const auto& piece : spec.pieces) iv.emplace_back(piece.a, piece.b);
  std::sort(iv.begin(), iv.end());
  for (std::size_t i = 0; i + 1 < iv.size(); ++i)
    if (iv[i + 1].first <= iv[i].second)
      throw InvalidConfig("piece intervals overlap");
  return spec;
}

namespace detail {

/// Location t in [lo, hi] with cdf(t) - cdf(lo) == target, by bisection on
/// the monotone CDF (absolute tolerance 1e-12, at most 200 halvings).
inline double quantile_cut(const PiecewiseLinearDensity& density, double lo,
                           double hi, double target) {
  double a = lo, b = hi;
  for (int iter = 0; iter < 200 && (b - a) > 1e-12; ++iter) {
    const double mid = 0.5 * (a + b);
    (density.mass_between(lo, mid) < target ? a : b) = mid;
  }
  return 0.5 * (a + b);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Dyadic stages
// ---------------------------------------------------------------------------

/// Doubling stage plan: sizes n1, 2 n1, ..., n1 2^{J-1}.
struct StagePlan {
  std::size_t n1 = 1;
  std::size_t stages = 1;  // J

  std::vector<std::size_t> sizes() const {
    std::vector<std::size_t> out(stages);
    for (std::size_t j = 0; j < stages; ++j) out[j] = n1 << j;
    return out;
  }

  std::size_t final_size() const { return n1 << (stages - 1); }
};

/// Conditional-expectation values of a measure on nested equal-mass cells.
/// stage_values[j-1] holds the stage-j cell means (left to right);
/// boundaries[j-1] the corresponding cut points including both endpoints.
struct DyadicApproximation {
  std::size_t stages = 0;
  std::vector<std::vector<double>> stage_values;
  std::vector<std::vector<double>> boundaries;
  std::vector<double> increment_norms;  // ||E_j - E_{j-1}||_inf, E_0 = 0
};

/// Equal-mass quantile refinement of a single absolutely continuous piece
/// of full mass. Stage j has 2^j cells; cut points are nested exactly by
/// construction. Cell widths stay below 2^{-j} / delta.
inline DyadicApproximation dyadic_approximation(const AcPiece& piece,
                                                std::size_t stages) {
  if (stages < 1) throw DomainError("dyadic_approximation: need J >= 1");
  if (stages > 20) throw TooLarge("dyadic_approximation: 2^J cells is too many");
  MeasureSpec single;
  single.pieces.push_back(piece);
  validate_measure(single);  // enforces mass 1, mean 0, density >= delta

  const auto& density = piece.density;
  DyadicApproximation out;
  out.stages = stages;
  out.stage_values.resize(stages);
  out.boundaries.resize(stages);
  out.increment_norms.assign(stages, 0.0);

  // Deepest cuts first; coarser stages subsample them.
  const std::size_t deep = std::size_t{1} << stages;
  std::vector<double> cuts(deep + 1);
  cuts.front() = piece.a;
  cuts.back() = piece.b;
  const double cell_mass = 1.0 / static_cast<double>(deep);
  for (std::size_t k = 1; k < deep; ++k)
    cuts[k] = detail::quantile_cut(density, piece.a, piece.b,
                                   static_cast<double>(k) * cell_mass);

  for (std::size_t j = 1; j <= stages; ++j) {
    const std::size_t cells = std::size_t{1} << j;
    const std::size_t stride = deep / cells;
    auto& bounds = out.boundaries[j - 1];
    auto& values = out.stage_values[j - 1];
    bounds.resize(cells + 1);
    values.resize(cells);
    for (std::size_t k = 0; k <= cells; ++k) bounds[k] = cuts[k * stride];
    for (std::size_t k = 0; k < cells; ++k) {
      const double mass = density.mass_between(bounds[k], bounds[k + 1]);
      values[k] = density.moment_between(bounds[k], bounds[k + 1]) / mass;
    }
    double inc = 0.0;
    for (std::size_t k = 0; k < cells; ++k) {
      const double prev = j == 1 ? 0.0 : out.stage_values[j - 2][k / 2];
      inc = std::max(inc, std::abs(values[k] - prev));
    }
    out.increment_norms[j - 1] = inc;
  }
  return out;
}

/// Stage-j increments grouped by parent cell; each pair is recentered to an
/// exact zero sum (the numerical residue of quantile inversion is removed).
inline PairedSpectrum increments_to_pairs(const DyadicApproximation& approx,
                                          std::size_t j) {
  if (j < 2 || j > approx.stages)
    throw DomainError("increments_to_pairs: need 2 <= j <= J");
  const auto& fine = approx.stage_values[j - 1];
  const auto& coarse = approx.stage_values[j - 2];
  if (fine.size() != 2 * coarse.size())
    throw RefinementInconsistent("increments_to_pairs: stage sizes do not double");
  std::vector<std::array<double, 2>> pairs(coarse.size());
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    const double left = fine[2 * i] - coarse[i];
    const double right = fine[2 * i + 1] - coarse[i];
    if (std::abs(left + right) > 1e-10)
      throw RefinementInconsistent(
          "increments_to_pairs: children of cell " + std::to_string(i) +
          " do not average to the parent value");
    const double half = 0.5 * (left + right);
    pairs[i] = {left - half, right - half};
  }
  return PairedSpectrum{std::move(pairs)};
}

// ---------------------------------------------------------------------------
// Assembly of the commuting nilpotent sum
// ---------------------------------------------------------------------------

inline void require_centered(std::span<const double> v, double tol,
                             const std::string& what) {
  double sup = 0.0;
  for (double x : v) sup = std::max(sup, std::abs(x));
  if (std::abs(sum_of(v)) > tol * std::max(1.0, sup))
    throw SumTooFarFromZero(what + ": sequence is not centered");
}

struct StageAssembly {
  StagePlan plan;
  std::vector<std::vector<double>> rearranged;  // kappa_j per stage
  std::vector<std::size_t> stage1_permutation;
  std::vector<std::vector<bool>> flips;            // flips[0] stays empty
  std::vector<ToeplitzCoefficients> stage_strips;  // at stage size
  ToeplitzCoefficients assembled;                  // at final size
  std::vector<double> stage_norms;                 // ||T_{a_j}||
  std::vector<double> stage_sup_norms;             // ||a_j||_inf

  double sup_norm_sum() const {
    return std::accumulate(stage_sup_norms.begin(), stage_sup_norms.end(), 0.0);
  }

  double stage_norm_sum() const {
    return std::accumulate(stage_norms.begin(), stage_norms.end(), 0.0);
  }

  /// Norm budget for the assembled sum (the paired-stage constant applied
  /// to every stage; the first stage actually satisfies the smaller greedy
  /// bound).
  double norm_bound() const { return kPairedNormBound * sup_norm_sum(); }
};

/// Rearranges each stage increment (greedy for the first stage, the
/// pair-preserving rule afterwards), converts to coefficient strips,
/// dilates every strip to the final size and sums. Stage j >= 2 inputs use
/// the flip-embedding layout: entry i is the first-child increment of
/// parent i, entry m+i the second-child increment.
inline StageAssembly assemble(const StagePlan& plan,
                              const std::vector<std::vector<double>>& increments) {
  if (increments.size() != plan.stages)
    throw LengthMismatch("assemble: expected one increment list per stage");
  if (plan.stages > 63 || plan.final_size() > 8192)
    throw TooLarge("assemble: final size " +
                   std::to_string(plan.stages > 63 ? 0 : plan.final_size()) +
                   " is not dense-feasible (cap 8192)");
  const std::size_t N = plan.final_size();

  StageAssembly out;
  out.plan = plan;
  out.assembled = ToeplitzCoefficients{N, std::vector<Complex>(N - 1)};
  out.flips.resize(plan.stages);

  for (std::size_t j = 1; j <= plan.stages; ++j) {
    const auto& inc = increments[j - 1];
    const std::size_t expected = plan.n1 << (j - 1);
    if (inc.size() != expected)
      throw LengthMismatch("assemble: stage " + std::to_string(j) +
                           " increment has length " + std::to_string(inc.size()) +
                           ", expected " + std::to_string(expected));
    require_centered(inc, 1e-10, "assemble stage " + std::to_string(j));

    std::vector<double> kappa;
    if (j == 1) {
      SpectrumSequence s;
      s.values = inc;
      RearrangementPlan g = greedy_rearrange(s);
      kappa = apply_permutation(inc, g.permutation);
      out.stage1_permutation = std::move(g.permutation);
    } else {
      const std::size_t m = expected / 2;
      std::vector<std::array<double, 2>> pairs(m);
      for (std::size_t i = 0; i < m; ++i) pairs[i] = {inc[i], inc[m + i]};
      PairedArrangement arr = paired_rearrange(validate_pairs(std::move(pairs)));
      kappa = std::move(arr.kappa.values);
      out.flips[j - 1] = std::move(arr.flips);
    }

    SpectrumSequence stage_seq;
    stage_seq.values = kappa;
    ToeplitzCoefficients strip = toeplitz_coefficients(stage_seq);
    out.stage_norms.push_back(operator_norm(build_T(strip)));
    double sup = 0.0;
    for (double v : kappa) sup = std::max(sup, std::abs(v));
    out.stage_sup_norms.push_back(sup);

    const ToeplitzCoefficients dilated =
        dilate_strip(strip, std::size_t{1} << (plan.stages - j));
    for (std::size_t d = 1; d < N; ++d)
      out.assembled.strip[d - 1] += dilated.strip[d - 1];

    out.rearranged.push_back(std::move(kappa));
    out.stage_strips.push_back(std::move(strip));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Quasinilpotency proxies
// ---------------------------------------------------------------------------

/// The sequence ||z^m||^{1/m} for m = 1..m_max. Strictly upper triangular
/// inputs hit exact zero from m = N on (the zeros are structural).
inline std::vector<double> power_norm_profile(const CMatrix& z,
                                              std::size_t m_max) {
  if (z.rows() != z.cols())
    throw DimensionMismatch("power_norm_profile: matrix must be square");
  std::vector<double> profile(m_max, 0.0);
  CMatrix power = z;
  for (std::size_t m = 1; m <= m_max; ++m) {
    const double norm = operator_norm(power);
    if (norm == 0.0) break;  // nilpotent from here on; the tail stays zero
    profile[m - 1] = std::pow(norm, 1.0 / static_cast<double>(m));
    if (m < m_max) power = power * z;
  }
  return profile;
}

/// Power-norm profile of a block-diagonal sum, computed blockwise:
/// || (+)_i z_i^m || = max_i || z_i^m ||.
inline std::vector<double> direct_sum_profile(const std::vector<CMatrix>& blocks,
                                              std::size_t m_max) {
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const CMatrix& z = blocks[b];
    if (z.rows() != z.cols())
      throw DimensionMismatch("direct_sum_profile: block must be square");
    for (Eigen::Index i = 0; i < z.rows(); ++i)
      for (Eigen::Index j = 0; j <= i; ++j)
        if (z(i, j) != Complex{0.0, 0.0})
          throw NotNilpotentBlock("direct_sum_profile: block " +
                                  std::to_string(b) +
                                  " is not strictly upper triangular");
  }
  std::vector<double> profile(m_max, 0.0);
  std::vector<CMatrix> powers = blocks;
  for (std::size_t m = 1; m <= m_max; ++m) {
    double norm = 0.0;
    for (std::size_t b = 0; b < powers.size(); ++b) {
      norm = std::max(norm, operator_norm(powers[b]));
    }
    if (norm == 0.0) break;
    profile[m - 1] = std::pow(norm, 1.0 / static_cast<double>(m));
    if (m < m_max)
      for (std::size_t b = 0; b < powers.size(); ++b)
        powers[b] = powers[b] * blocks[b];
  }
  return profile;
}

// ---------------------------------------------------------------------------
// The diverging-increment example
// ---------------------------------------------------------------------------

struct CounterexampleRow {
  std::size_t N = 0;
  double s_N = 0.0;            // tail sum over n > N of 1 / (n 2^n)
  double increment_norm = 0.0; // max(s_N - s_{N+1}, |s_N - 1/(N+1)|)
  double partial_sum = 0.0;    // running sum of increment norms
};

namespace detail {

inline double tail_sum_direct(std::size_t N) {
  double acc = 0.0;
  // smallest terms first
  for (std::size_t n = N + 64; n > N; --n) {
    acc += 1.0 / (static_cast<double>(n) * std::exp2(static_cast<double>(n)));
  }
  return acc;
}

inline double head_sum_kahan(std::size_t N) {
  double acc = 0.0, comp = 0.0;
  for (std::size_t n = 1; n <= N; ++n) {
    const double term =
        1.0 / (static_cast<double>(n) * std::exp2(static_cast<double>(n)));
    const double y = term - comp;
    const double t = acc + y;
    comp = (t - acc) - y;
    acc = t;
  }
  return acc;
}

}  // namespace detail

/// Increment norms for the dyadic approximation of the function with
/// distribution sum_{n>=2} 2^{-n} (delta_{-1/n} + delta_{1/n}): the running
/// sums diverge, so this family admits no summable stage decomposition.
/// s_N is computed both as ln 2 minus the head sum and by direct tail
/// summation; the two routes must agree to 1e-14.
inline std::vector<CounterexampleRow> counterexample_series(std::size_t N_max) {
  if (N_max < 1) throw DomainError("counterexample_series: need N_max >= 1");
  std::vector<CounterexampleRow> rows(N_max);
  double running = 0.0;
  for (std::size_t N = 1; N <= N_max; ++N) {
    const double direct = detail::tail_sum_direct(N);
    const double via_log2 = std::numbers::ln2 - detail::head_sum_kahan(N);
    if (std::abs(direct - via_log2) > 1e-14)
      throw Error("counterexample_series: tail-sum routes disagree at N = " +
                  std::to_string(N));
    const double next = detail::tail_sum_direct(N + 1);
    const double increment =
        std::max(direct - next, std::abs(direct - 1.0 / static_cast<double>(N + 1)));
    running += increment;
    rows[N - 1] = CounterexampleRow{N, direct, increment, running};
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Full measure realization
// ---------------------------------------------------------------------------

namespace detail {

/// One equal-trace cell of the stage partition: an atom copy or a quantile
/// interval of one AC piece.
struct MeasureCell {
  int piece = -1;  // -1 marks an atom copy
  double lo = 0.0, hi = 0.0;
  double value = 0.0;  // atom location or conditional mean
};

inline MeasureCell piece_cell(const MeasureSpec& spec, int piece, double lo,
                              double hi) {
  const auto& density = spec.pieces[static_cast<std::size_t>(piece)].density;
  const double mass = density.mass_between(lo, hi);
  return MeasureCell{piece, lo, hi, density.moment_between(lo, hi) / mass};
}

/// Splits a cell into two of equal measure.
inline std::pair<MeasureCell, MeasureCell> split_cell(const MeasureSpec& spec,
                                                      const MeasureCell& cell) {
  if (cell.piece < 0) return {cell, cell};
  const auto& density = spec.pieces[static_cast<std::size_t>(cell.piece)].density;
  const double half = 0.5 * density.mass_between(cell.lo, cell.hi);
  const double mid = quantile_cut(density, cell.lo, cell.hi, half);
  return {piece_cell(spec, cell.piece, cell.lo, mid),
          piece_cell(spec, cell.piece, mid, cell.hi)};
}

}  // namespace detail

/// One cell of the final partition: an atom copy (piece = -1) or a
/// quantile interval of one AC piece, with its conditional mean.
struct CellSummary {
  int piece = -1;
  double lo = 0.0;
  double hi = 0.0;
  double value = 0.0;
};

struct MeasureRealization {
  StagePlan plan;
  std::vector<std::vector<double>> stage_values;  // E_j in cell order
  std::vector<double> increment_norms;
  std::vector<std::vector<double>> increments;  // assemble() inputs, aligned
  StageAssembly assembly;
  std::vector<CellSummary> final_cells;  // stage-J partition, cell order
  std::vector<double> final_diagonal;  // position order, after rearrangement
};

/// Realizes a measure as the spectrum of z + z* for the assembled nilpotent
/// sum z. The initial partition holds n1 equal-trace cells (atom copies
/// plus per-piece quantile cells, n1 the least common denominator of the
/// rational masses, capped at 4096); every later stage splits each cell in
/// two. Rearrangements permute cells, so the stage-j pairing must follow
/// the cells' current positions; this is the bookkeeping done here, and the
/// final diagonal is exactly a rearrangement of the stage-J cell values.
inline MeasureRealization realize_measure(const MeasureSpec& spec,
                                          std::size_t stages) {
  validate_measure(spec);
  if (stages < 1) throw DomainError("realize_measure: need stages >= 1");

  long long n1 = 1;
  for (const auto& atom : spec.atoms)
    n1 = std::lcm(n1, atom.w.reduced().den);
  for (const auto& piece : spec.pieces)
    n1 = std::lcm(n1, piece.mass.reduced().den);
  if (n1 == 1) n1 = 2;  // doubling stages pair cells, so start with at least two
  if (n1 > 4096)
    throw TooLarge("realize_measure: initial partition needs n1 = " +
                   std::to_string(n1) + " > 4096 cells");
  if (stages > 63 ||
      static_cast<unsigned long long>(n1) << (stages - 1) > 8192ULL)
    throw TooLarge("realize_measure: final size exceeds the dense cap 8192");

  // Stage-1 cells: atom copies first, then per-piece quantile cells.
  std::vector<detail::MeasureCell> cells;
  cells.reserve(static_cast<std::size_t>(n1));
  for (const auto& atom : spec.atoms) {
    const long long copies = n1 / atom.w.reduced().den * atom.w.reduced().num;
    for (long long c = 0; c < copies; ++c)
      cells.push_back(detail::MeasureCell{-1, atom.x, atom.x, atom.x});
  }
  for (std::size_t p = 0; p < spec.pieces.size(); ++p) {
    const auto& piece = spec.pieces[p];
    const long long count =
        n1 / piece.mass.reduced().den * piece.mass.reduced().num;
    const double cell_mass = piece.mass.value() / static_cast<double>(count);
    double lo = piece.a;
    for (long long c = 0; c < count; ++c) {
      const double hi = c + 1 == count
                            ? piece.b
                            : detail::quantile_cut(piece.density, piece.a, piece.b,
                                                   static_cast<double>(c + 1) * cell_mass);
      cells.push_back(detail::piece_cell(spec, static_cast<int>(p), lo, hi));
      lo = hi;
    }
  }

  MeasureRealization out;
  out.plan = StagePlan{static_cast<std::size_t>(n1), stages};

  // Stage 1: values in cell order; greedy rearrangement fixes the cell
  // positions for every later stage.
  std::vector<double> values(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) values[i] = cells[i].value;
  out.stage_values.push_back(values);
  double inc1 = 0.0;
  for (double v : values) inc1 = std::max(inc1, std::abs(v));
  out.increment_norms.push_back(inc1);
  out.increments.push_back(values);

  SpectrumSequence stage1;
  stage1.values = values;
  std::vector<std::size_t> position = greedy_rearrange(stage1).permutation;

  std::vector<detail::MeasureCell> current = cells;
  for (std::size_t j = 2; j <= stages; ++j) {
    const std::size_t m = current.size();
    // children of every cell, indexed by the parent's original order
    std::vector<std::pair<detail::MeasureCell, detail::MeasureCell>> children(m);
    for (std::size_t c = 0; c < m; ++c) children[c] = detail::split_cell(spec, current[c]);

    std::vector<double> stage_vals(2 * m);
    for (std::size_t c = 0; c < m; ++c) {
      stage_vals[2 * c] = children[c].first.value;
      stage_vals[2 * c + 1] = children[c].second.value;
    }
    out.stage_values.push_back(stage_vals);

    // Pair increments in position order, recentered exactly.
    std::vector<std::array<double, 2>> pairs(m);
    double inc_norm = 0.0;
    for (std::size_t l = 0; l < m; ++l) {
      const std::size_t c = position[l];
      const double parent = current[c].value;
      double left = children[c].first.value - parent;
      double right = children[c].second.value - parent;
      const double half = 0.5 * (left + right);
      left -= half;
      right -= half;
      pairs[l] = {left, right};
      inc_norm = std::max({inc_norm, std::abs(left), std::abs(right)});
    }
    out.increment_norms.push_back(inc_norm);

    std::vector<double> aligned(2 * m);
    for (std::size_t l = 0; l < m; ++l) {
      aligned[l] = pairs[l][0];
      aligned[m + l] = pairs[l][1];
    }
    out.increments.push_back(aligned);

    const PairedArrangement arr = paired_rearrange(PairedSpectrum{pairs});

    // Advance positions: slot l keeps the chosen child, slot m+l its twin.
    std::vector<detail::MeasureCell> next(2 * m);
    std::vector<std::size_t> next_position(2 * m);
    for (std::size_t l = 0; l < m; ++l) {
      const std::size_t c = position[l];
      next[2 * c] = children[c].first;
      next[2 * c + 1] = children[c].second;
      next_position[l] = arr.flips[l] ? 2 * c + 1 : 2 * c;
      next_position[m + l] = arr.flips[l] ? 2 * c : 2 * c + 1;
    }
    current = std::move(next);
    position = std::move(next_position);
  }

  out.assembly = assemble(out.plan, out.increments);
  out.final_cells.reserve(current.size());
  for (const auto& cell : current)
    out.final_cells.push_back(CellSummary{cell.piece, cell.lo, cell.hi, cell.value});
  out.final_diagonal.resize(current.size());
  for (std::size_t p = 0; p < position.size(); ++p)
    out.final_diagonal[p] = current[position[p]].value;
  return out;
}

}  // namespace uttm
