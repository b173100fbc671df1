#pragma once

// Seeded generators for test and demo instances.

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "qnet/cmatrix.hpp"
#include "qnet/network_model.hpp"

namespace qnet {

/// mt19937_64 with hand-written uniform and normal maps, so draws are identical
/// across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    double uniform();  // [0, 1)
    double normal();
    RMatrix normal_matrix(Eigen::Index rows, Eigen::Index cols, double scale = 1.0);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

struct InstanceDims {
    int n = 2;
    int m0 = 2;
    std::vector<std::pair<int, int>> axes{{1, 1}};  // (m+, m-) per axis
};

/// I_{m0/2} (x) [[0, 1], [-1, 0]], padded with a zero row/column when m0 is odd.
RMatrix canonical_j(int m0);

/// Gaussian block matrices with canonical J and no Theta.
BlockParams random_instance(std::uint64_t seed, const InstanceDims& dims, double coupling_scale = 1.0);

/// random_instance with A shifted by a multiple of I so that every mode
/// matrix on a dense circle grid has spectral abscissa <= -margin.
BlockParams random_stable_instance(std::uint64_t seed, const InstanceDims& dims, double margin = 0.5,
                                   double coupling_scale = 0.5);

/// Realizable block (even n): a damped oscillator array coupled passively to
/// its own noise channels, neighbour outputs tapping one quadrature each of
/// distinct channels, arbitrary E (scaled by coupling_scale). m0 is
/// 2 * (total outputs + extra_channels). Redrawn until every mode matrix is
/// Hurwitz; Theta is the one recovered by solve_theta on chains.
BlockParams pr_consistent_instance(std::uint64_t seed, int n, const std::vector<std::pair<int, int>>& axes,
                                   int extra_channels = 1, double coupling_scale = 0.3);

/// Two-state chain block that preserves commutators on a 4-site ring but not
/// on larger rings: its s = -2 Lyapunov coefficient is nonzero and aliases
/// onto s = 2 on U_4.
BlockParams aliasing_witness_instance(std::uint64_t seed);

/// Copy of params with Theta moved by eps along (e_0 e_1^T - e_1 e_0^T)/sqrt(2)
/// (Frobenius size eps).
BlockParams perturb_theta(const BlockParams& params, double eps);

}  // namespace qnet
