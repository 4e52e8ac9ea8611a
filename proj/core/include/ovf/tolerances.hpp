#pragma once

namespace ovf::tol {

// Projection algebra (entries are O(1) by construction).
inline constexpr double kIdempotency = 1e-12;
inline constexpr double kStrictMargin = 1e-9;   // min(a, 1-a) on the rank-1 part
inline constexpr double kPhaseFloor = 1e-12;    // |off-diagonal| below this is "diagonal"
inline constexpr double kSupport = 1e-12;       // range projection support cut
inline constexpr double kUnimodular = 1e-12;

// Identity verification.
inline constexpr double kIdentity = 1e-10;
inline constexpr double kAbsoluteFloor = 1e-12;
// Vanishing-operand floor, relative to the field's largest table vector: an
// operand with norm below kOperandFloor * scale is treated as zero-length.
inline constexpr double kOperandFloor = 1e-2;

// Stationary decomposition.
inline constexpr double kStationarity = 1e-9;
inline constexpr double kPsdFloor = -1e-12;
inline constexpr double kRankCliff = 1e-12;     // Case 1 iff lambda_min <= kRankCliff * trace
inline constexpr double kSlack = 1e-12;
inline constexpr double kSumRule = 1e-12;       // phi + psi = rho entry-wise
inline constexpr double kGramClip = 1e-12;      // relative to largest Gram eigenvalue
inline constexpr double kGramNegative = -1e-10;

}  // namespace ovf::tol
