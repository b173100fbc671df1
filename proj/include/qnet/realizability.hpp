#pragma once

#include <string>
#include <vector>

#include "qnet/cmatrix.hpp"
#include "qnet/frequency.hpp"
#include "qnet/network_model.hpp"

namespace qnet {

struct ConditionResidual {
    std::string label;
    double norm = 0.0;
};

/// Outcome of a realizability check. Raw residual norms are always reported;
/// pass compares each against tolerance * scale, scale = 1 + max parameter norm.
struct PRReport {
    int theorem = 1;
    std::vector<ConditionResidual> residuals;
    bool pass = false;
    double tolerance = 0.0;
    double scale = 1.0;
    std::string worst_offender;  // e.g. "z=e^{2pi i 3/8}" or "p=2"
    double worst_residual = 0.0;
};

inline constexpr double kDefaultPrTolerance = 1e-8;

/// CCR preservation on a periodic fragment of N sites per axis: the Lyapunov
/// identity at every z in U_N (U_N^2 on the torus) and the summed
/// state/output commutator drift for p = 0..n-1.
PRReport check_theorem1(const BlockParams& params, int n_sites, double tol = kDefaultPrTolerance);

/// Size-independent algebraic conditions on the building block (chains only).
PRReport check_theorem2(const BlockParams& params, double tol = kDefaultPrTolerance);

/// L_z = A_z Theta + Theta A_z^* + B_z J B_z^*.
CMatrix ccr_lyapunov_residual(const BlockParams& params, const FreqPoint& z);

struct ThetaSolution {
    RMatrix theta;
    double residual = 0.0;           // Frobenius norm of the stacked Theta-linear conditions
    double theta_free_residual = 0.0;  // conditions not involving Theta
    bool degenerate = false;         // normal equations rank deficient; minimum-norm solution returned
    Eigen::Index rank = 0;
};

/// Least-squares antisymmetric Theta for the Theta-linear conditions of the
/// algebraic test (chains only). Theta in params, if any, is ignored.
ThetaSolution solve_theta(const BlockParams& params);

struct CommutatorFlow {
    CMatrix ccr_drift;      // d/dt [X_z, X_v^dagger]
    CMatrix xy_commutator;  // [X_z(t), Y_v(t)^dagger]
};

/// Commutator dynamics between spatial modes z, v in U_N at time t >= 0.
CommutatorFlow commutator_flow(const BlockParams& params, int n_sites, cplx z, cplx v, double t);

/// int_0^t e^{tau M} d tau, evaluated without inverting M.
CMatrix integrated_exponential(const CMatrix& m, double t);

}  // namespace qnet
