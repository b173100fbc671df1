#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qnet/cmatrix.hpp"

namespace qnet {

/// Coupling of a building block to its two neighbours along one lattice axis.
/// The "+" channel carries fields in the positive direction (input from the
/// previous site, output to the next), "-" the opposite way.
struct AxisCoupling {
    RMatrix c_plus;   // m+ x n
    RMatrix c_minus;  // m- x n
    RMatrix d_plus;   // m+ x m0
    RMatrix d_minus;  // m- x m0
    RMatrix e_plus;   // n x m+
    RMatrix e_minus;  // n x m-

    Eigen::Index m_plus() const { return c_plus.rows(); }
    Eigen::Index m_minus() const { return c_minus.rows(); }
};

/// Real state-space data of one building block plus the noise and CCR structure.
struct BlockParams {
    RMatrix a;  // n x n
    RMatrix b;  // n x m0
    std::vector<AxisCoupling> axes;  // one entry per lattice axis (1 or 2)
    RMatrix j;  // m0 x m0, antisymmetric
    std::optional<RMatrix> theta;  // n x n, antisymmetric

    Eigen::Index n() const { return a.rows(); }
    Eigen::Index m0() const { return b.cols(); }
    int num_axes() const { return static_cast<int>(axes.size()); }

    /// Stacked output matrices C = [C+^(1); C-^(1); C+^(2); C-^(2)].
    RMatrix c_stacked() const;
    RMatrix d_stacked() const;

    /// Omega = I + iJ.
    CMatrix ito_matrix() const;

    /// 1 + the largest Frobenius norm among the block matrices.
    double scale() const;
};

enum class NoiseRegime {
    Strict,    // spectral radius of J strictly below 1
    Boundary,  // spectral radius of J equal to 1 (within tolerance)
    Invalid,   // spectral radius above 1
};

NoiseRegime noise_regime(const BlockParams& params, double tol = 1e-12);
const char* to_string(NoiseRegime regime);

/// Human-readable list of violated invariants; empty iff the parameters are
/// dimensionally consistent, J is antisymmetric with spectral radius <= 1 and
/// Theta (when present) is antisymmetric.
std::vector<std::string> validate(const BlockParams& params, double tol = 1e-12);

/// Periodic fragment geometry.
struct FragmentSpec {
    int n_sites = 1;  // sites per axis
    int axes = 1;

    /// Smallest fragment for which the algebraic and sampled realizability
    /// conditions coincide: max(5, n + 1).
    static int minimal_equivalent_size(Eigen::Index n) { return std::max<int>(5, static_cast<int>(n) + 1); }
};

/// Real block-circulant drift of the whole ring of N blocks, neighbour fields
/// eliminated. Block row k has A on the diagonal, E+C+ at column k-1 and E-C-
/// at column k+1 (indices modulo N).
RMatrix assemble_chain_generator(const BlockParams& params, int n_sites);

/// Matching noise-input matrix of the ring: block row k has B at column k,
/// E+D+ at k-1 and E-D- at k+1 (acting on the stacked site noises w_0..w_{N-1}).
RMatrix assemble_chain_input(const BlockParams& params, int n_sites);

/// Unitary DFT matrix (e^{-2 pi i l mu / N} / sqrt(N)).
CMatrix dft_matrix(int n_sites);

}  // namespace qnet
