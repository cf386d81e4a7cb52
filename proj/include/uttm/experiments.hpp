#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "uttm/dyadic.hpp"
#include "uttm/spectra.hpp"
#include "uttm/toeplitz.hpp"
#include "uttm/types.hpp"
#include "uttm/util.hpp"

namespace uttm {

enum class SpectrumDistribution { kUniform, kTwoPoint };

inline std::string serialize_values(std::span<const double> v) {
  std::ostringstream os;
  os.precision(17);
  os << "[";
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << "]";
  return os.str();
}

namespace detail {

inline SpectrumSequence draw_spectrum(std::size_t n, SpectrumDistribution dist,
                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> values(n);
  if (dist == SpectrumDistribution::kUniform) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (double& v : values) v = u(rng);
    const double mean = sum_of(values) / static_cast<double>(n);
    for (double& v : values) v -= mean;
  } else {
    if (n % 2 != 0)
      throw InvalidConfig("two-point spectra need even length to balance");
    for (std::size_t i = 0; i < n; ++i) values[i] = i < n / 2 ? 1.0 : -1.0;
    std::shuffle(values.begin(), values.end(), rng);
  }
  return validate_spectrum(std::move(values));
}

}  // namespace detail

/// Greedy-realization ratio ||T_{lambda o sigma}|| / ||lambda||_inf; zero
/// spectra count as ratio 0.
inline double greedy_realization_ratio(const SpectrumSequence& lambda) {
  const double sup = lambda.sup_norm();
  if (sup == 0.0) return 0.0;
  const RearrangementPlan plan = greedy_rearrange(lambda);
  SpectrumSequence rearranged;
  rearranged.values = apply_permutation(lambda.values, plan.permutation);
  const CMatrix T = build_T(toeplitz_coefficients(rearranged));
  return operator_norm(T) / sup;
}

struct SweepResult {
  std::size_t n = 0;
  std::size_t trials = 0;
  double worst_ratio = 0.0;
  std::uint64_t seed = 0;
};

/// Random sweep of the greedy norm bound. Trials run independently with
/// per-trial seeds derived from the master seed, so the worst ratio does
/// not depend on scheduling. Throws BoundViolation (with the offending
/// spectrum serialized) if any ratio exceeds the greedy constant.
inline std::vector<SweepResult> bound_sweep(std::span<const std::size_t> sizes,
                                            std::size_t trials_per_size,
                                            SpectrumDistribution dist,
                                            std::uint64_t seed) {
  for (std::size_t n : sizes)
    if (n > 1024) throw TooLarge("bound_sweep: sizes are capped at 1024");

  std::vector<SweepResult> results;
  results.reserve(sizes.size());
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    const std::size_t n = sizes[si];
    std::vector<double> ratios(trials_per_size, 0.0);
    std::vector<std::uint64_t> trial_seeds(trials_per_size);
    for (std::size_t t = 0; t < trials_per_size; ++t)
      trial_seeds[t] = derive_seed(seed, si * trials_per_size + t);
    parallel_for(trials_per_size, [&](std::size_t t) {
      ratios[t] =
          greedy_realization_ratio(detail::draw_spectrum(n, dist, trial_seeds[t]));
    });
    SweepResult r{n, trials_per_size, 0.0, seed};
    std::size_t argmax = 0;
    for (std::size_t t = 0; t < trials_per_size; ++t) {
      if (ratios[t] > r.worst_ratio) {
        r.worst_ratio = ratios[t];
        argmax = t;
      }
    }
    if (r.worst_ratio > kGreedyNormBound + 1e-8) {
      const SpectrumSequence bad =
          detail::draw_spectrum(n, dist, trial_seeds[argmax]);
      throw BoundViolation(
          "bound_sweep: ratio " + std::to_string(r.worst_ratio) +
          " exceeds the greedy constant at n = " + std::to_string(n) +
          "; offending spectrum " + serialize_values(bad.values));
    }
    results.push_back(r);
  }
  return results;
}

struct GrowthResult {
  std::vector<std::size_t> half_sizes;  // n; the matrix has size 2n
  std::vector<double> norms;            // ||T_lambda||
  std::vector<double> quad_re;          // Re <T g, g>, 1/2 exactly
  std::vector<double> quad_im;          // Im <T g, g>
  std::vector<double> lower_bounds;     // (1/pi) log n - 3/(2 pi)
  double fitted_slope = 0.0;            // LS slope of norms against log(2n)
  bool norms_nondecreasing = true;      // reported, never asserted
};

namespace detail {

inline double least_squares_slope(std::span<const double> x,
                                  std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace detail

/// Norm growth of the unrearranged balanced family lambda = (1^n, (-1)^n).
/// Verifies the odd-offset closed form of the coefficients, the exact
/// real part 1/2 of the quadratic form on the normalized all-ones vector,
/// and the logarithmic lower bound on the norm.
inline GrowthResult lowerbound_growth(std::span<const std::size_t> half_sizes) {
  GrowthResult out;
  for (std::size_t n : half_sizes) {
    if (n < 1 || n > 1024)
      throw TooLarge("lowerbound_growth: need 1 <= n <= 1024");
    const std::size_t N = 2 * n;
    std::vector<double> values(N);
    for (std::size_t i = 0; i < N; ++i) values[i] = i < n ? 1.0 : -1.0;
    SpectrumSequence lambda;
    lambda.values = std::move(values);

    const ToeplitzCoefficients c = toeplitz_coefficients(lambda);
    for (std::size_t d = 1; d < N; ++d) {
      const Complex expected =
          d % 2 == 0
              ? Complex{0.0, 0.0}
              : Complex{1.0, 1.0 / std::tan(std::numbers::pi *
                                            static_cast<double>(d) /
                                            static_cast<double>(N))} /
                    static_cast<double>(n);
      if (std::abs(c.t(d) - expected) > 1e-10)
        throw BoundViolation(
            "lowerbound_growth: coefficient t_" + std::to_string(d) +
            " deviates from the closed form at n = " + std::to_string(n));
    }

    // <T g, g> = (1/2n) sum_k (2n - k) t_k on the normalized all-ones g.
    Complex quad{0.0, 0.0};
    for (std::size_t k = 1; k < N; ++k)
      quad += static_cast<double>(N - k) * c.t(k);
    quad /= static_cast<double>(N);

    const double norm = operator_norm(build_T(c));
    const double lower =
        std::log(static_cast<double>(n)) / std::numbers::pi -
        1.5 / std::numbers::pi;
    if (std::abs(quad.real() - 0.5) > 1e-10)
      throw BoundViolation("lowerbound_growth: Re<Tg,g> != 1/2 at n = " +
                           std::to_string(n));
    if (quad.imag() < lower)
      throw BoundViolation("lowerbound_growth: Im<Tg,g> < (1/pi) log n - "
                           "3/(2 pi) at n = " + std::to_string(n));
    if (norm < lower)
      throw BoundViolation("lowerbound_growth: ||T|| < (1/pi) log n - 3/(2 pi) "
                           "at n = " + std::to_string(n));
    if (norm + 1e-9 < std::abs(quad))
      throw BoundViolation("lowerbound_growth: ||T|| < |<Tg,g>| at n = " +
                           std::to_string(n));

    out.half_sizes.push_back(n);
    out.norms.push_back(norm);
    out.quad_re.push_back(quad.real());
    out.quad_im.push_back(quad.imag());
    out.lower_bounds.push_back(lower);
  }
  if (out.half_sizes.size() >= 2) {
    std::vector<double> logs(out.half_sizes.size());
    for (std::size_t i = 0; i < logs.size(); ++i)
      logs[i] = std::log(2.0 * static_cast<double>(out.half_sizes[i]));
    out.fitted_slope = detail::least_squares_slope(logs, out.norms);
  }
  for (std::size_t i = 0; i + 1 < out.norms.size(); ++i)
    if (out.norms[i + 1] < out.norms[i] - 1e-9) out.norms_nondecreasing = false;
  return out;
}

struct FiberResult {
  CMatrix T;
  double ratio = 0.0;
};

struct BatchResult {
  std::vector<FiberResult> fibers;
  std::vector<double> profile;  // direct-sum power-norm profile
};

/// Independent greedy realization of a list of fibers, with the
/// block-diagonal power profile of the result. Every ratio must satisfy
/// the greedy constant.
inline BatchResult batch_realize(const std::vector<SpectrumSequence>& fibers) {
  BatchResult out;
  std::size_t max_n = 0;
  std::vector<CMatrix> blocks;
  for (const auto& lambda : fibers) {
    const RearrangementPlan plan = greedy_rearrange(lambda);
    SpectrumSequence rearranged;
    rearranged.values = apply_permutation(lambda.values, plan.permutation);
    CMatrix T = build_T(toeplitz_coefficients(rearranged));
    const double sup = lambda.sup_norm();
    const double ratio = sup == 0.0 ? 0.0 : operator_norm(T) / sup;
    if (ratio > kGreedyNormBound + 1e-8)
      throw BoundViolation("batch_realize: fiber ratio " + std::to_string(ratio) +
                           " exceeds the greedy constant; fiber " +
                           serialize_values(lambda.values));
    max_n = std::max(max_n, lambda.size());
    blocks.push_back(T);
    out.fibers.push_back(FiberResult{std::move(T), ratio});
  }
  if (max_n > 0) out.profile = direct_sum_profile(blocks, max_n);
  return out;
}

struct IrrationalRow {
  std::size_t n = 0;
  std::size_t ones = 0;  // entries equal to 1 - tau before centering
  double norm = 0.0;
  double ratio = 0.0;
  double profile_1 = 0.0;     // ||z||
  double profile_half = 0.0;  // ||z^{n/2}||^{2/n}
  double profile_n = 0.0;     // ||z^n||^{1/n}, exactly 0
};

/// Two-valued projection-like spectra with irrational trace parameter tau:
/// round(tau n) entries at 1 - tau, the rest at -tau, mean-centered.
/// Exploratory: reports norms and power-profile samples, asserts only the
/// greedy constant.
inline std::vector<IrrationalRow> irrational_explorer(
    double tau, std::span<const std::size_t> n_list) {
  if (!(tau > 0.0 && tau < 1.0))
    throw DomainError("irrational_explorer: need 0 < tau < 1");
  std::vector<IrrationalRow> rows;
  for (std::size_t n : n_list) {
    if (n < 2 || n > 1024)
      throw TooLarge("irrational_explorer: need 2 <= n <= 1024");
    const auto ones =
        static_cast<std::size_t>(std::lround(tau * static_cast<double>(n)));
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = i < ones ? 1.0 - tau : -tau;
    const double mean = sum_of(values) / static_cast<double>(n);
    for (double& v : values) v -= mean;
    const SpectrumSequence lambda = validate_spectrum(std::move(values));

    const RearrangementPlan plan = greedy_rearrange(lambda);
    SpectrumSequence rearranged;
    rearranged.values = apply_permutation(lambda.values, plan.permutation);
    const CMatrix z = build_T(toeplitz_coefficients(rearranged));
    const double sup = lambda.sup_norm();
    const double norm = operator_norm(z);
    const double ratio = sup == 0.0 ? 0.0 : norm / sup;
    if (ratio > kGreedyNormBound + 1e-8)
      throw BoundViolation("irrational_explorer: ratio " + std::to_string(ratio) +
                           " exceeds the greedy constant at n = " +
                           std::to_string(n));

    const std::vector<double> profile = power_norm_profile(z, n);
    IrrationalRow row;
    row.n = n;
    row.ones = ones;
    row.norm = norm;
    row.ratio = ratio;
    row.profile_1 = profile[0];
    row.profile_half = profile[n / 2 - 1];
    row.profile_n = profile[n - 1];
    rows.push_back(row);
  }
  return rows;
}

}  // namespace uttm
