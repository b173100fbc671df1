#include "qnet/cmatrix.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "qnet/errors.hpp"

namespace qnet {

namespace {

void require_square(const CMatrix& m, const char* where) {
    if (m.rows() != m.cols()) {
        throw DimensionError(std::string(where) + ": matrix is " + std::to_string(m.rows()) + "x" +
                             std::to_string(m.cols()) + ", expected square");
    }
}

double one_norm(const CMatrix& m) {
    if (m.size() == 0) return 0.0;
    return m.cwiseAbs().colwise().sum().maxCoeff();
}

// Pade numerator/denominator pair (U, V) so that r(M) = (V - U)^{-1} (V + U).
template <std::size_t K>
void pade_low(const CMatrix& m, const std::array<double, K>& b, CMatrix& u, CMatrix& v) {
    const auto n = m.rows();
    const CMatrix ident = CMatrix::Identity(n, n);
    const CMatrix m2 = m * m;
    CMatrix power = ident;
    CMatrix odd = CMatrix::Zero(n, n);
    CMatrix even = CMatrix::Zero(n, n);
    for (std::size_t k = 0; k < K; k += 2) {
        even += b[k] * power;
        if (k + 1 < K) odd += b[k + 1] * power;
        power = power * m2;
    }
    u = m * odd;
    v = even;
}

void pade13(const CMatrix& m, CMatrix& u, CMatrix& v) {
    static constexpr std::array<double, 14> b = {
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
        129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
        1323241920.0,        40840800.0,          960960.0,           16380.0,
        182.0,               1.0};
    const auto n = m.rows();
    const CMatrix ident = CMatrix::Identity(n, n);
    const CMatrix m2 = m * m;
    const CMatrix m4 = m2 * m2;
    const CMatrix m6 = m4 * m2;
    const CMatrix inner_u = b[13] * m6 + b[11] * m4 + b[9] * m2;
    u = m * (m6 * inner_u + b[7] * m6 + b[5] * m4 + b[3] * m2 + b[1] * ident);
    const CMatrix inner_v = b[12] * m6 + b[10] * m4 + b[8] * m2;
    v = m6 * inner_v + b[6] * m6 + b[4] * m4 + b[2] * m2 + b[0] * ident;
}

}  // namespace

CMatrix expm(const CMatrix& m) {
    require_square(m, "expm");
    const auto n = m.rows();
    if (n == 0) return m;

    static constexpr std::array<double, 4> b3 = {120.0, 60.0, 12.0, 1.0};
    static constexpr std::array<double, 6> b5 = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
    static constexpr std::array<double, 8> b7 = {17297280.0, 8648640.0, 1995840.0, 277200.0,
                                                 25200.0,    1512.0,    56.0,      1.0};
    static constexpr std::array<double, 10> b9 = {17643225600.0, 8821612800.0, 2075673600.0, 302702400.0,
                                                  30270240.0,    2162160.0,    110880.0,     3960.0,
                                                  90.0,          1.0};
    static constexpr double theta3 = 1.495585217958292e-2;
    static constexpr double theta5 = 2.539398330063230e-1;
    static constexpr double theta7 = 9.504178996162932e-1;
    static constexpr double theta9 = 2.097847961257068e0;
    static constexpr double theta13 = 5.371920351148152e0;

    const double norm = one_norm(m);
    if (!std::isfinite(norm)) throw NumericError("expm: non-finite input");

    CMatrix u;
    CMatrix v;
    int squarings = 0;
    if (norm <= theta3) {
        pade_low(m, b3, u, v);
    } else if (norm <= theta5) {
        pade_low(m, b5, u, v);
    } else if (norm <= theta7) {
        pade_low(m, b7, u, v);
    } else if (norm <= theta9) {
        pade_low(m, b9, u, v);
    } else {
        squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / theta13))));
        const CMatrix scaled = m / std::ldexp(1.0, squarings);
        pade13(scaled, u, v);
    }
    CMatrix result = (v - u).partialPivLu().solve(v + u);
    for (int k = 0; k < squarings; ++k) result = result * result;
    return result;
}

double sylvester_residual(const CMatrix& a, const CMatrix& b, const CMatrix& q, const CMatrix& x) {
    return (a * x + x * b + q).norm();
}

CMatrix solve_sylvester(const CMatrix& a, const CMatrix& b, const CMatrix& q) {
    require_square(a, "solve_sylvester(A)");
    require_square(b, "solve_sylvester(B)");
    if (q.rows() != a.rows() || q.cols() != b.rows()) {
        throw DimensionError("solve_sylvester: Q is " + std::to_string(q.rows()) + "x" + std::to_string(q.cols()) +
                             ", expected " + std::to_string(a.rows()) + "x" + std::to_string(b.rows()));
    }
    const auto p = a.rows();
    const auto r = b.rows();
    const auto size = p * r;
    if (size == 0) return CMatrix::Zero(p, r);

    // Column-major vec: vec(A X) = (I_r (x) A) vec(X), vec(X B) = (B^T (x) I_p) vec(X).
    CMatrix kmat = CMatrix::Zero(size, size);
    for (Eigen::Index col = 0; col < r; ++col) {
        kmat.block(col * p, col * p, p, p) += a;
    }
    for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index j = 0; j < r; ++j) {
            const cplx coeff = b(j, i);
            if (coeff == cplx(0.0, 0.0)) continue;
            for (Eigen::Index k = 0; k < p; ++k) kmat(i * p + k, j * p + k) += coeff;
        }
    }
    const CVector rhs = -Eigen::Map<const CVector>(CMatrix(q).data(), size);

    Eigen::FullPivLU<CMatrix> lu(kmat);
    const double rcond = lu.rcond();
    if (!lu.isInvertible() || !(rcond > 64.0 * std::numeric_limits<double>::epsilon())) {
        Eigen::JacobiSVD<CMatrix> svd(kmat);
        const double smin = svd.singularValues().size() ? svd.singularValues().tail(1)(0) : 0.0;
        throw SolvabilityError("solve_sylvester: spectra of A and -B intersect (smallest singular value " +
                                   std::to_string(smin) + ")",
                               smin);
    }
    CVector sol = lu.solve(rhs);
    // One step of iterative refinement.
    const CVector correction = lu.solve(rhs - kmat * sol);
    sol += correction;
    return Eigen::Map<const CMatrix>(sol.data(), p, r);
}

CVector eigenvalues(const CMatrix& m) {
    require_square(m, "eigenvalues");
    if (m.rows() == 0) return CVector(0);
    Eigen::ComplexEigenSolver<CMatrix> solver(m, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) throw NumericError("eigenvalues: QR iteration did not converge");
    return solver.eigenvalues();
}

double spectral_radius(const CMatrix& m) {
    const CVector ev = eigenvalues(m);
    return ev.size() ? ev.cwiseAbs().maxCoeff() : 0.0;
}

double spectral_abscissa(const CMatrix& m) {
    const CVector ev = eigenvalues(m);
    if (ev.size() == 0) return -std::numeric_limits<double>::infinity();
    return ev.real().maxCoeff();
}

bool is_hurwitz(const CMatrix& m, double margin) { return spectral_abscissa(m) < -margin; }

CMatrix hermitize(const CMatrix& m) {
    require_square(m, "hermitize");
    return (m + m.adjoint()) / 2.0;
}

double min_hermitian_eigenvalue(const CMatrix& m) {
    require_square(m, "min_hermitian_eigenvalue");
    if (m.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitize(m), Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericError("min_hermitian_eigenvalue: no convergence");
    return solver.eigenvalues().minCoeff();
}

bool psd_check(const CMatrix& m, double tol) {
    require_square(m, "psd_check");
    if ((m - m.adjoint()).norm() > tol * m.norm()) return false;
    return min_hermitian_eigenvalue(m) >= -tol;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

}  // namespace qnet
