#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

namespace uttm {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Universal norm bound achieved by the greedy (prefix-sum bounded)
/// rearrangement: ||T|| <= (1/2 + 4/pi) * ||lambda||_inf.
inline constexpr double kGreedyNormBound = 0.5 + 4.0 / std::numbers::pi;

/// Norm bound achieved by the pair-preserving rearrangement used at
/// doubling stages: ||T|| <= (1/2 + 12/pi) * ||lambda||_inf.
inline constexpr double kPairedNormBound = 0.5 + 12.0 / std::numbers::pi;

/// Relative tolerance under which a sequence counts as summing to zero.
inline constexpr double kZeroSumTol = 1e-12;

/// Inputs whose mean exceeds this (relative to the sup norm) are rejected
/// instead of being silently centered.
inline constexpr double kCenteringTol = 1e-6;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyInput : Error { using Error::Error; };
struct SumTooFarFromZero : Error { using Error::Error; };
struct PairNotCentered : Error { using Error::Error; };
struct TooLarge : Error { using Error::Error; };
struct NotMonotone : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };
struct SymmetryViolation : Error { using Error::Error; };
struct ConvergenceFailure : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct DensityBelowDelta : Error { using Error::Error; };
struct NonUnitMass : Error { using Error::Error; };
struct RefinementInconsistent : Error { using Error::Error; };
struct NotNilpotentBlock : Error { using Error::Error; };
struct InvalidConfig : Error { using Error::Error; };

/// A claimed norm bound failed on a concrete instance. The message carries
/// the offending instance serialized for debugging.
struct BoundViolation : Error { using Error::Error; };

}  // namespace uttm
