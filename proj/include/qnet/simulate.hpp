#pragma once

// Time-domain second moments of a periodic chain: the per-mode Lyapunov ODE
// and, as an independent check, the dense moment ODE of the whole ring.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qnet/cmatrix.hpp"
#include "qnet/network_model.hpp"

namespace qnet {

/// (l_z, l_v): indices of z = z_{l_z}, v = z_{l_v} in U_N.
using ModePair = std::pair<int, int>;

struct IntegratorOptions {
    double rtol = 1e-9;
    double atol = 1e-12;
    double initial_step = 1e-2;
    bool stop_at_steady_state = false;
    double steady_tol = 1e-9;  // ||dS/dt|| <= steady_tol * ||S||
    bool record_every_step = true;
};

inline constexpr double kSteadyHorizonCap = 1e4;

struct MomentTrajectory {
    int n_sites = 0;
    std::string step_policy;
    std::vector<double> times;
    std::vector<std::map<ModePair, CMatrix>> values;  // one map per recorded time
    bool reached_steady_state = false;
    long long accepted_steps = 0;
    long long rejected_steps = 0;

    const std::map<ModePair, CMatrix>& final_values() const { return values.back(); }
};

/// Zero initial moments for every diagonal pair (z, z), or for all of U_N^2.
std::map<ModePair, CMatrix> zero_moments(const BlockParams& params, int n_sites, bool all_pairs = false);

/// Integrates dS_{z,v}/dt = A_z S + S A_v^* + N delta_{zv} B_z Omega B_v^* for
/// the pairs present in s0 (chains only) with an adaptive Dormand-Prince 5(4)
/// pair. With stop_at_steady_state the run ends early once the derivative is
/// negligible; the horizon may then be at most kSteadyHorizonCap.
/// Throws IntegrationError on step-size underflow.
MomentTrajectory integrate_moments(const BlockParams& params, int n_sites, const std::map<ModePair, CMatrix>& s0,
                                   double horizon, const IntegratorOptions& opts = {});

struct FullChainTrajectory {
    int n_sites = 0;
    std::vector<double> times;
    std::vector<std::vector<CMatrix>> site_blocks;  // E(x_k x_k^T) per recorded time, k = 0..N-1
    CMatrix final_moments;                          // full Nn x Nn matrix at the last time
    bool reached_steady_state = false;

    /// Covariance E(x_j x_k^T) at the last recorded time.
    CMatrix block(int j, int k) const;
};

inline constexpr int kMaxFullChainSites = 64;
inline constexpr int kMaxFullChainState = 8;

/// Dense moment ODE of the ring, dS/dt = G S + S G^T + F (I (x) Omega) F^T with
/// G, F from assemble_chain_generator / assemble_chain_input, from S(0) = 0.
/// Throws ResourceError for N > 64 or n > 8.
FullChainTrajectory fullchain_moments(const BlockParams& params, int n_sites, double horizon,
                                      const IntegratorOptions& opts = {});

}  // namespace qnet
