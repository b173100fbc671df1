#pragma once

// Mean-square (LQG) performance of the network with block-Toeplitz weights:
// stability over the spatial spectrum, per-mode steady covariances, the exact
// finite-fragment cost and its thermodynamic limit per site.

#include <array>
#include <map>
#include <optional>
#include <vector>

#include "qnet/cmatrix.hpp"
#include "qnet/frequency.hpp"
#include "qnet/network_model.hpp"

namespace qnet {

/// Lag between sites; the second component is 0 on chains.
using Lag = std::array<int, 2>;

/// Real block-Toeplitz weighting sequence sigma_k with sigma_{-k} = sigma_k^T.
class WeightSequence {
public:
    enum class Kind { Finite, Geometric };

    /// Finite support. Blocks may be given for either sign of a lag; the
    /// mirrored transpose is filled in. Throws ConfigError if a supplied pair
    /// violates sigma_{-k} = sigma_k^T or sigma_0 is not symmetric.
    static WeightSequence finite(int axes, const std::map<Lag, RMatrix>& blocks);

    /// sigma_k = rho^{|k_1| + |k_2|} sigma_bar, 0 <= rho < 1, sigma_bar symmetric.
    static WeightSequence geometric(int axes, double rho, const RMatrix& sigma_bar);

    Kind kind() const { return kind_; }
    int axes() const { return axes_; }
    Eigen::Index n() const { return n_; }
    double rho() const { return rho_; }
    const RMatrix& sigma_bar() const { return sigma_bar_; }
    const std::map<Lag, RMatrix>& finite_blocks() const { return blocks_; }

    RMatrix block(const Lag& k) const;

    /// Largest |k_alpha| with a non-negligible block (geometric: truncation
    /// where rho^k drops below 1e-18).
    int support_radius() const;

    /// Sigma_z = sum_k z^{-k} sigma_k (Hermitian).
    CMatrix spectrum(const FreqPoint& z) const;

    /// Triangle-weighted partial sum sum_{|l| < N} prod_alpha (1 - |l_alpha|/N) z^{-l} sigma_l.
    CMatrix fejer(int n_sites, const FreqPoint& z) const;

    /// sum_l ||sigma_l|| (1 - prod_alpha (1 - |l_alpha|/N)_+); on chains this is
    /// 2 sum_{l>=1} ||sigma_l|| min(1, l/N), a uniform bound on ||fejer - spectrum||.
    double fejer_error_bound(int n_sites) const;

private:
    WeightSequence() = default;
    template <typename Fn>
    void for_each_block(Fn&& fn) const;

    Kind kind_ = Kind::Finite;
    int axes_ = 1;
    Eigen::Index n_ = 0;
    double rho_ = 0.0;
    RMatrix sigma_bar_;
    std::map<Lag, RMatrix> blocks_;
};

enum class Verdict { Stable, Unstable, Inconclusive };
const char* to_string(Verdict v);

struct StabilityReport {
    Verdict verdict = Verdict::Inconclusive;
    double margin = 0.0;  // -max Re eig(A_z) over the densest grid used
    FreqPoint worst = FreqPoint::on_circle({1.0, 0.0});
    int grid_per_axis = 0;
};

inline constexpr int kMaxGridPerAxis = 4096;
inline constexpr int kMaxTorusGridPerAxis = 256;

/// Max real eigenvalue part of A_z over a uniform grid on the circle (torus),
/// doubling the grid until the margin moves by < 1e-6 or the cap is reached
/// (4096 points on chains, 256 per axis on the torus). At the cap the verdict is
/// Stable only if the margin exceeds the last change, Unstable if a grid point
/// already fails the Hurwitz test, and Inconclusive otherwise.
StabilityReport check_stability(const BlockParams& params, int grid_size = 8,
                                double hurwitz_margin = tolerance::kHurwitzMargin);

/// Unique S_z with A_z S + S A_z^* + B_z Omega B_z^* = 0. Throws StabilityError if A_z is not Hurwitz.
CMatrix steady_covariance(const BlockParams& params, const FreqPoint& z);

/// Same with Omega replaced by an arbitrary m0 x m0 noise intensity.
CMatrix steady_covariance(const BlockParams& params, const FreqPoint& z, const CMatrix& noise_intensity);

/// Commutator part (S_z - S_{1/z}^T) / (2i) of the steady moments; equals Theta
/// for realizable blocks. This is the "imaginary part" in the quantum sense: the
/// entrywise imaginary part of S_z differs from it whenever A_z is not real.
CMatrix commutator_part(const BlockParams& params, const FreqPoint& z);

struct ModeSample {
    std::array<double, 2> angle{0.0, 0.0};  // phi in [0, 2pi) per axis
    double trace = 0.0;                     // Re Tr(Sigma S_z) (Fejer-weighted for finite N)
    CMatrix s;
};

struct CostResult {
    std::optional<int> n_sites;  // empty: thermodynamic limit
    double cost_per_site = 0.0;
    long long quadrature_points = 0;
    double error_estimate = 0.0;
    bool converged = true;
    double previous_estimate = 0.0;  // value on the previous grid level (limit only)
    std::vector<ModeSample> samples;  // ordered by grid index
};

struct QuadratureOptions {
    double tolerance = 1e-9;
    int initial_grid = 16;
    int max_grid_per_axis = 0;  // 0 selects 65536 on chains and 1024 on the torus
    bool keep_samples = true;
};

/// Exact steady cost per site of an N-site (N x N) periodic fragment:
/// N^{-d} sum_{z in U_N^d} Tr(fejer_N(z) S_z).
CostResult finite_cost(const BlockParams& params, const WeightSequence& w, int n_sites);

/// Thermodynamic limit (2 pi)^{-d} int Tr(Sigma S) dphi by the periodic
/// trapezoid rule with grid doubling.
CostResult cost_limit(const BlockParams& params, const WeightSequence& w, const QuadratureOptions& opts = {});

/// Lag-j Fourier coefficient of S_z: (2 pi)^{-1} int e^{i j phi} S dphi, i.e.
/// the steady site covariance E(x_{k+j} x_k^T) in the thermodynamic limit.
CMatrix spatial_covariance(const BlockParams& params, int lag, double tol = 1e-12);
CMatrix spatial_covariance(const BlockParams& params, int lag1, int lag2, double tol = 1e-12);

}  // namespace qnet
