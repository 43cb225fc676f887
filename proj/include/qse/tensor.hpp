// tensor.hpp — dense complex linear algebra used by every other module.
//
// Thin layer over Eigen: CMatrix/CVector aliases plus the handful of
// operations the estimator and the quantum model are written against
// (adjoint, Hermitian matrix exponential, operator norms, positive-definite
// solves). Tolerances here encode double-precision expectations and are
// deliberately not configurable.

#pragma once

#include <complex>
#include <Eigen/Dense>

namespace qse {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

namespace tol {
inline constexpr double unitarity = 1e-10;       // ‖U†U − I‖_F bound for generated unitaries
inline constexpr double hermiticity_rel = 1e-10; // relative Hermiticity check
inline constexpr double pd_floor = 1e-12;        // relative eigenvalue floor for PD solves
inline constexpr double zero_norm = 1e-14;       // below this a norm is unusable for scaling
}  // namespace tol

enum class NormKind { spectral, frobenius, state_dependent };

// Conjugate transpose. result(j,k) = conj(M(k,j)).
CMatrix adjoint(const CMatrix& m);

// True when ‖M − M†‖_F ≤ rel_tol·‖M‖_F (zero matrix counts as Hermitian).
bool is_hermitian(const CMatrix& m, double rel_tol = tol::hermiticity_rel);

// exp(−i·H·t/ħ) for Hermitian H via eigendecomposition H = VΛV†,
// U = V·exp(−iΛt/ħ)·V†. Unitary up to round-off by construction.
// Throws DimensionMismatch (non-square) or NonHermitianInput.
CMatrix hermitian_expm(const CMatrix& h, double t, double hbar = 1.0);

// spectral: largest singular value. frobenius: √Σ|entries|².
// state_dependent: √(⟨ψ|M†M|ψ⟩) = ‖Mψ‖ for the given reference state.
// Throws ZeroNorm when the result is below tol::zero_norm.
double operator_norm(const CMatrix& m, NormKind kind, const CVector* psi = nullptr);

// Solve S·X = B for Hermitian positive-definite S through its
// eigendecomposition. Positive definiteness is enforced as
// λ_min > tol::pd_floor·max|λ|; violations throw SingularSystem.
CMatrix solve_hermitian_pd(const CMatrix& s, const CMatrix& b);

// (M + M†)/2 — cheap re-Hermitianization for covariance updates.
CMatrix hermitize(const CMatrix& m);

// Smallest eigenvalue of the Hermitian part; used by PSD validators.
double min_eigenvalue(const CMatrix& m);

}  // namespace qse
