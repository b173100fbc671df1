#pragma once

// Dense complex-matrix kernel. Every numerical primitive the other modules
// need lives here: matrix exponential, Sylvester/Lyapunov solves, spectra and
// positive-semidefiniteness checks.

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace qnet {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using CVector = Eigen::VectorXcd;

namespace tolerance {
inline constexpr double kResidual = 1e-10;
inline constexpr double kPsdSlack = 1e-9;
inline constexpr double kHurwitzMargin = 1e-10;
}  // namespace tolerance

/// e^M by scaling and squaring with a diagonal Pade approximant (degree 3..13
/// chosen from the 1-norm of M).
CMatrix expm(const CMatrix& m);

/// Solves A X + X B + Q = 0 through the Kronecker-vectorized system
/// (I (x) A + B^T (x) I) vec(X) = -vec(Q). Dense, intended for rows(A)*cols(B)
/// up to a few thousand. Throws SolvabilityError when the spectra of A and -B
/// (numerically) intersect.
CMatrix solve_sylvester(const CMatrix& a, const CMatrix& b, const CMatrix& q);

/// Residual ||A X + X B + Q||_F.
double sylvester_residual(const CMatrix& a, const CMatrix& b, const CMatrix& q, const CMatrix& x);

/// Eigenvalues in the order returned by the complex Schur iteration.
CVector eigenvalues(const CMatrix& m);

double spectral_radius(const CMatrix& m);

/// Largest real part over the spectrum.
double spectral_abscissa(const CMatrix& m);

bool is_hurwitz(const CMatrix& m, double margin = tolerance::kHurwitzMargin);

/// (M + M*) / 2
CMatrix hermitize(const CMatrix& m);

/// True iff min eig((M+M*)/2) >= -tol and ||M - M*|| <= tol * ||M||.
bool psd_check(const CMatrix& m, double tol);

/// Smallest eigenvalue of the Hermitian part.
double min_hermitian_eigenvalue(const CMatrix& m);

CMatrix kron(const CMatrix& a, const CMatrix& b);

inline CMatrix to_complex(const RMatrix& m) { return m.cast<cplx>(); }

}  // namespace qnet
