#pragma once

namespace kocp::tol {

// Membership margins are relative: a matrix A is accepted as PSD iff
// lambda_min(A) >= -psd * max(1, ||A||_F).
inline constexpr double psd = 1e-9;

// Decomposition reconstruction: ||X - sum lift(M_s)||_F <= recon * max(1, ||X||_F).
inline constexpr double recon = 1e-8;

// Strict-interior cushion used by the barrier: a truncation counts as
// positive definite only when its margin exceeds this, scaled.
inline constexpr double interior = 1e-12;

// Hard cap on |J|; exceeding it requires an explicit override.
inline constexpr long long tuple_cap = 200000;

// Cap on monomial basis size C(n+d, d).
inline constexpr int basis_cap = 2000;

// Pivot threshold for detecting linearly dependent equality constraints.
inline constexpr double rank_pivot = 1e-10;

// Phase-I slack above this value certifies infeasibility.
inline constexpr double infeasible = 1e-7;

}  // namespace kocp::tol
