#include "qnet/simulate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "qnet/errors.hpp"
#include "qnet/frequency.hpp"

namespace qnet {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr std::array<double, 7> kC{0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA21 = 1.0 / 5;
constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187, kA53 = 64448.0 / 6561, kA54 = -212.0 / 729;
constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33, kA63 = 46732.0 / 5247, kA64 = 49.0 / 176,
                 kA65 = -5103.0 / 18656;
constexpr std::array<double, 7> kB{35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0};
constexpr std::array<double, 7> kE{71.0 / 57600,      0.0, -71.0 / 16695, 71.0 / 1920, -17253.0 / 339200,
                                   22.0 / 525, -1.0 / 40};

using Rhs = std::function<void(const CVector&, CVector&)>;

struct OdeResult {
    bool steady = false;
    long long accepted = 0;
    long long rejected = 0;
};

// Autonomous y' = f(y) from t = 0 to horizon; on_step(t, y, dy) after every accepted step.
OdeResult dopri5(const Rhs& f, CVector& y, double horizon, const IntegratorOptions& opts,
                 const std::function<void(double, const CVector&)>& on_step) {
    OdeResult res;
    const Eigen::Index dim = y.size();
    std::array<CVector, 7> k;
    for (auto& v : k) v.resize(dim);
    CVector tmp(dim);
    CVector y_new(dim);
    f(y, k[0]);

    double t = 0.0;
    double h = std::min(opts.initial_step, horizon);
    double prev_err = 1e-4;
    while (t < horizon) {
        if (t + h > horizon) h = horizon - t;
        if (h < 1e-14 * std::max(1.0, t)) throw IntegrationError("moment integration: step size underflow", t);

        tmp = y + h * kA21 * k[0];
        f(tmp, k[1]);
        tmp = y + h * (kA31 * k[0] + kA32 * k[1]);
        f(tmp, k[2]);
        tmp = y + h * (kA41 * k[0] + kA42 * k[1] + kA43 * k[2]);
        f(tmp, k[3]);
        tmp = y + h * (kA51 * k[0] + kA52 * k[1] + kA53 * k[2] + kA54 * k[3]);
        f(tmp, k[4]);
        tmp = y + h * (kA61 * k[0] + kA62 * k[1] + kA63 * k[2] + kA64 * k[3] + kA65 * k[4]);
        f(tmp, k[5]);
        y_new = y + h * (kB[0] * k[0] + kB[2] * k[2] + kB[3] * k[3] + kB[4] * k[4] + kB[5] * k[5]);
        f(y_new, k[6]);

        double err = 0.0;
        for (Eigen::Index i = 0; i < dim; ++i) {
            cplx e = 0.0;
            for (std::size_t s = 0; s < 7; ++s) e += kE[s] * k[s](i);
            const double sc = opts.atol + opts.rtol * std::max(std::abs(y(i)), std::abs(y_new(i)));
            const double r = std::abs(h * e) / sc;
            err += r * r;
        }
        err = dim > 0 ? std::sqrt(err / static_cast<double>(dim)) : 0.0;
        if (!std::isfinite(err)) throw IntegrationError("moment integration: non-finite state", t);

        if (err <= 1.0) {
            t = (horizon - t - h < 1e-12 * horizon) ? horizon : t + h;
            y.swap(y_new);
            k[0] = k[6];
            ++res.accepted;
            on_step(t, y);
            if (opts.stop_at_steady_state && k[0].norm() <= opts.steady_tol * y.norm()) {
                res.steady = true;
                return res;
            }
            // PI step control.
            const double e = std::max(err, 1e-10);
            double fac = 0.9 * std::pow(e, -0.7 / 5.0) * std::pow(prev_err, 0.4 / 5.0);
            fac = std::clamp(fac, 0.2, 5.0);
            prev_err = e;
            h *= fac;
        } else {
            ++res.rejected;
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
        }
    }
    return res;
}

void require_chain_sites(const BlockParams& params, int n_sites, const char* where) {
    if (params.num_axes() != 1) throw UnsupportedError(std::string(where) + ": chains only");
    if (n_sites < 1) throw DomainError(std::string(where) + ": N must be positive");
}

void check_horizon(double horizon, const IntegratorOptions& opts, const char* where) {
    if (!(horizon > 0.0)) throw DomainError(std::string(where) + ": horizon must be positive");
    if (opts.stop_at_steady_state && horizon > kSteadyHorizonCap) {
        throw DomainError(std::string(where) + ": steady-state runs are capped at 1e4 time units");
    }
}

}  // namespace

std::map<ModePair, CMatrix> zero_moments(const BlockParams& params, int n_sites, bool all_pairs) {
    std::map<ModePair, CMatrix> out;
    const Eigen::Index n = params.n();
    for (int lz = 0; lz < n_sites; ++lz) {
        if (!all_pairs) {
            out[{lz, lz}] = CMatrix::Zero(n, n);
            continue;
        }
        for (int lv = 0; lv < n_sites; ++lv) out[{lz, lv}] = CMatrix::Zero(n, n);
    }
    return out;
}

MomentTrajectory integrate_moments(const BlockParams& params, int n_sites, const std::map<ModePair, CMatrix>& s0,
                                   double horizon, const IntegratorOptions& opts) {
    require_chain_sites(params, n_sites, "integrate_moments");
    check_horizon(horizon, opts, "integrate_moments");
    if (s0.empty()) throw DomainError("integrate_moments: no mode pairs given");
    const Eigen::Index n = params.n();

    std::vector<ModeMatrices> modes;
    modes.reserve(static_cast<std::size_t>(n_sites));
    for (int l = 0; l < n_sites; ++l) modes.push_back(mode_matrices(params, FreqPoint::on_circle(root_of_unity(l, n_sites))));
    const CMatrix omega = params.ito_matrix();

    struct Slot {
        ModePair key;
        const CMatrix* az;
        CMatrix av_adj;
        CMatrix forcing;
    };
    std::vector<Slot> slots;
    CVector y(static_cast<Eigen::Index>(s0.size()) * n * n);
    Eigen::Index off = 0;
    for (const auto& [key, s] : s0) {
        const auto [lz, lv] = key;
        if (lz < 0 || lz >= n_sites || lv < 0 || lv >= n_sites) {
            throw DomainError("integrate_moments: mode index outside U_N");
        }
        if (s.rows() != n || s.cols() != n) throw DimensionError("integrate_moments: initial moment has wrong shape");
        const auto& mz = modes[static_cast<std::size_t>(lz)];
        const auto& mv = modes[static_cast<std::size_t>(lv)];
        CMatrix forcing = CMatrix::Zero(n, n);
        if (lz == lv) forcing = static_cast<double>(n_sites) * mz.b * omega * mv.b.adjoint();
        slots.push_back(Slot{key, &mz.a, mv.a.adjoint(), std::move(forcing)});
        y.segment(off, n * n) = Eigen::Map<const CVector>(s.data(), n * n);
        off += n * n;
    }

    auto rhs = [&](const CVector& state, CVector& dy) {
        for (std::size_t i = 0; i < slots.size(); ++i) {
            const Eigen::Index o = static_cast<Eigen::Index>(i) * n * n;
            Eigen::Map<const CMatrix> s(state.data() + o, n, n);
            Eigen::Map<CMatrix> d(dy.data() + o, n, n);
            d.noalias() = *slots[i].az * s;
            d.noalias() += s * slots[i].av_adj;
            d += slots[i].forcing;
        }
    };

    MomentTrajectory traj;
    traj.n_sites = n_sites;
    traj.step_policy = "dopri5(4) rtol=" + std::to_string(opts.rtol) + " atol=" + std::to_string(opts.atol);
    auto unpack = [&](const CVector& state) {
        std::map<ModePair, CMatrix> m;
        for (std::size_t i = 0; i < slots.size(); ++i) {
            const Eigen::Index o = static_cast<Eigen::Index>(i) * n * n;
            m[slots[i].key] = Eigen::Map<const CMatrix>(state.data() + o, n, n);
        }
        return m;
    };
    traj.times.push_back(0.0);
    traj.values.push_back(unpack(y));
    double last_t = 0.0;
    const OdeResult r = dopri5(rhs, y, horizon, opts, [&](double t, const CVector& state) {
        last_t = t;
        if (opts.record_every_step) {
            traj.times.push_back(t);
            traj.values.push_back(unpack(state));
        }
    });
    if (!opts.record_every_step) {
        traj.times.push_back(last_t);
        traj.values.push_back(unpack(y));
    }
    traj.reached_steady_state = r.steady;
    traj.accepted_steps = r.accepted;
    traj.rejected_steps = r.rejected;
    return traj;
}

CMatrix FullChainTrajectory::block(int j, int k) const {
    const Eigen::Index n = final_moments.rows() / n_sites;
    return final_moments.block(j * n, k * n, n, n);
}

FullChainTrajectory fullchain_moments(const BlockParams& params, int n_sites, double horizon,
                                      const IntegratorOptions& opts) {
    require_chain_sites(params, n_sites, "fullchain_moments");
    check_horizon(horizon, opts, "fullchain_moments");
    if (n_sites > kMaxFullChainSites || params.n() > kMaxFullChainState) {
        throw ResourceError("fullchain_moments: dense path limited to N <= 64 and n <= 8");
    }
    const Eigen::Index n = params.n();
    const Eigen::Index big = n * n_sites;
    const CMatrix g = to_complex(assemble_chain_generator(params, n_sites));
    const CMatrix gt = g.transpose();
    const CMatrix f = to_complex(assemble_chain_input(params, n_sites));
    const CMatrix noise = kron(CMatrix::Identity(n_sites, n_sites), params.ito_matrix());
    const CMatrix forcing = f * noise * f.transpose();

    auto rhs = [&](const CVector& state, CVector& dy) {
        Eigen::Map<const CMatrix> s(state.data(), big, big);
        Eigen::Map<CMatrix> d(dy.data(), big, big);
        d.noalias() = g * s;
        d.noalias() += s * gt;
        d += forcing;
    };

    FullChainTrajectory traj;
    traj.n_sites = n_sites;
    auto record = [&](double t, const CVector& state) {
        Eigen::Map<const CMatrix> s(state.data(), big, big);
        std::vector<CMatrix> blocks;
        blocks.reserve(static_cast<std::size_t>(n_sites));
        for (int k = 0; k < n_sites; ++k) blocks.emplace_back(s.block(k * n, k * n, n, n));
        traj.times.push_back(t);
        traj.site_blocks.push_back(std::move(blocks));
    };
    CVector y = CVector::Zero(big * big);
    record(0.0, y);
    double last_t = 0.0;
    const OdeResult r = dopri5(rhs, y, horizon, opts, [&](double t, const CVector& state) {
        last_t = t;
        if (opts.record_every_step) record(t, state);
    });
    if (!opts.record_every_step) record(last_t, y);
    traj.final_moments = Eigen::Map<const CMatrix>(y.data(), big, big);
    traj.reached_steady_state = r.steady;
    return traj;
}

}  // namespace qnet
