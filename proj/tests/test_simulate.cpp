#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "qnet/errors.hpp"
#include "qnet/frequency.hpp"
#include "qnet/instances.hpp"
#include "qnet/performance.hpp"
#include "qnet/simulate.hpp"

using namespace qnet;

namespace {

BlockParams scalar_decoupled() {
    BlockParams p;
    p.a = RMatrix::Constant(1, 1, -1.0);
    p.b = RMatrix(1, 2);
    p.b << 1.0, 0.0;
    p.j = canonical_j(2);
    AxisCoupling ax;
    ax.c_plus = RMatrix::Zero(1, 1);
    ax.c_minus = RMatrix::Zero(1, 1);
    ax.d_plus = RMatrix::Zero(1, 2);
    ax.d_minus = RMatrix::Zero(1, 2);
    ax.e_plus = RMatrix::Zero(1, 1);
    ax.e_minus = RMatrix::Zero(1, 1);
    p.axes.push_back(ax);
    return p;
}

IntegratorOptions steady_opts() {
    IntegratorOptions o;
    o.stop_at_steady_state = true;
    o.record_every_step = false;
    return o;
}

CMatrix mode_cov(const BlockParams& p, int l, int n_sites) {
    return steady_covariance(p, FreqPoint::on_circle(root_of_unity(l, n_sites)));
}

}  // namespace

TEST(Moments, CrossModesStayZero) {
    const BlockParams p = random_stable_instance(3, InstanceDims{3, 2, {{1, 1}}});
    const auto traj = integrate_moments(p, 5, zero_moments(p, 5, true), 5.0);
    for (const auto& values : traj.values) {
        for (const auto& [key, s] : values) {
            if (key.first != key.second) EXPECT_EQ(s.norm(), 0.0);
        }
    }
}

TEST(Moments, ScalarClosedForm) {
    const BlockParams p = scalar_decoupled();
    const int n_sites = 3;
    std::map<ModePair, CMatrix> s0;
    s0[{1, 1}] = CMatrix::Constant(1, 1, 5.0);
    const auto traj = integrate_moments(p, n_sites, s0, 6.0);
    ASSERT_GT(traj.times.size(), 5u);
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const double t = traj.times[i];
        const double want = n_sites / 2.0 + (5.0 - n_sites / 2.0) * std::exp(-2.0 * t);
        EXPECT_NEAR(traj.values[i].at({1, 1})(0, 0).real(), want, 1e-8) << t;
    }
    EXPECT_DOUBLE_EQ(traj.times.back(), 6.0);
}

TEST(Moments, MatchesClosedFormWithInitialMoments) {
    const BlockParams p = random_stable_instance(9, InstanceDims{2, 2, {{1, 1}}});
    const int n_sites = 4;
    Rng rng(1);
    const RMatrix g = rng.normal_matrix(2, 2);
    const CMatrix s0 = to_complex(g * g.transpose());
    std::map<ModePair, CMatrix> init{{{1, 1}, s0}, {{1, 2}, s0}};
    const double t = 1.5;
    const auto traj = integrate_moments(p, n_sites, init, t);
    const CMatrix az = mode_matrices(p, FreqPoint::on_circle(root_of_unity(1, n_sites))).a;
    const CMatrix av = mode_matrices(p, FreqPoint::on_circle(root_of_unity(2, n_sites))).a;
    const CMatrix bz = mode_matrices(p, FreqPoint::on_circle(root_of_unity(1, n_sites))).b;
    const CMatrix ez = oracle::taylor_expm(t * az);
    const CMatrix ev = oracle::taylor_expm(t * av);
    // Forced part: int_0^t e^{tau A} Q e^{tau A^*} d tau by RK4 of X' = A X + X A^* + Q.
    const CMatrix forced = oracle::lyapunov_integral(az, n_sites * bz * p.ito_matrix() * bz.adjoint(), t, 20000);
    const CMatrix want_diag = ez * s0 * ez.adjoint() + forced;
    const CMatrix want_cross = ez * s0 * ev.adjoint();
    EXPECT_LT((traj.final_values().at({1, 1}) - want_diag).norm(), 1e-7 * want_diag.norm());
    EXPECT_LT((traj.final_values().at({1, 2}) - want_cross).norm(), 1e-7 * std::max(1.0, want_cross.norm()));
}

TEST(Moments, ConvergesToSteadyCovariance) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const BlockParams p = random_stable_instance(seed, InstanceDims{3, 2, {{1, 1}}});
        const int n_sites = 5;
        const double margin = check_stability(p).margin;
        IntegratorOptions o;
        o.record_every_step = false;
        const auto traj = integrate_moments(p, n_sites, zero_moments(p, n_sites), 40.0 / margin, o);
        for (const auto& [key, s] : traj.final_values()) {
            EXPECT_LE((s - n_sites * mode_cov(p, key.first, n_sites)).norm(), 1e-6);
        }
    }
}

TEST(Moments, SteadyStopAndEnergyBalance) {
    const BlockParams p = pr_consistent_instance(5, 4, {{1, 1}});
    const int n_sites = 4;
    const auto traj = integrate_moments(p, n_sites, zero_moments(p, n_sites), kSteadyHorizonCap, steady_opts());
    EXPECT_TRUE(traj.reached_steady_state);
    EXPECT_LT(traj.times.back(), kSteadyHorizonCap);
    for (const auto& [key, s] : traj.final_values()) {
        const ModeMatrices mm = mode_matrices(p, FreqPoint::on_circle(root_of_unity(key.first, n_sites)));
        const CMatrix sz = s / static_cast<double>(n_sites);
        const CMatrix res = mm.a * sz + sz * mm.a.adjoint() + mm.b * p.ito_matrix() * mm.b.adjoint();
        EXPECT_LT(res.norm(), 1e-6);
    }
}

TEST(Moments, HermitianPsdAlongTrajectory) {
    const BlockParams p = random_stable_instance(12, InstanceDims{3, 2, {{1, 1}}});
    const auto traj = integrate_moments(p, 3, zero_moments(p, 3), 4.0);
    for (const auto& values : traj.values) {
        for (const auto& [key, s] : values) EXPECT_TRUE(s.norm() == 0.0 || psd_check(s, 1e-8));
    }
}

TEST(Moments, InputErrors) {
    const BlockParams p = scalar_decoupled();
    EXPECT_THROW(integrate_moments(p, 3, zero_moments(p, 3), 0.0), DomainError);
    EXPECT_THROW(integrate_moments(p, 3, {{{0, 5}, CMatrix::Zero(1, 1)}}, 1.0), DomainError);
    EXPECT_THROW(integrate_moments(p, 3, zero_moments(p, 3), 2e4, steady_opts()), DomainError);
}

TEST(Moments, StepUnderflowReportsLastGoodTime) {
    BlockParams p = scalar_decoupled();
    p.a(0, 0) = 50.0;  // blows up quickly
    try {
        integrate_moments(p, 1, zero_moments(p, 1), 100.0);
        FAIL() << "expected IntegrationError";
    } catch (const IntegrationError& e) {
        EXPECT_GT(e.last_good_time(), 0.0);
        EXPECT_LT(e.last_good_time(), 100.0);
    }
}

TEST(FullChain, DecoupledMatchesSingleSystem) {
    BlockParams p = random_stable_instance(2, InstanceDims{2, 2, {{1, 1}}});
    p.axes[0].e_plus.setZero();
    p.axes[0].e_minus.setZero();
    p.a -= 0.5 * RMatrix::Identity(2, 2);
    const auto fc = fullchain_moments(p, 4, kSteadyHorizonCap, steady_opts());
    const CMatrix single = solve_sylvester(to_complex(p.a), to_complex(p.a.transpose()),
                                           to_complex(p.b) * p.ito_matrix() * to_complex(p.b.transpose()));
    for (int k = 0; k < 4; ++k) EXPECT_LT((fc.block(k, k) - single).norm(), 1e-6);
}

TEST(FullChain, AgreesWithPerModeAverage) {
    for (int n_sites : {4, 8}) {
        const BlockParams p = random_stable_instance(30 + n_sites, InstanceDims{3, 2, {{1, 1}}});
        const auto fc = fullchain_moments(p, n_sites, kSteadyHorizonCap, steady_opts());
        CMatrix avg = CMatrix::Zero(3, 3);
        for (int l = 0; l < n_sites; ++l) avg += mode_cov(p, l, n_sites);
        avg /= n_sites;
        EXPECT_LT((fc.block(0, 0) - avg).norm(), 1e-6) << n_sites;
        for (int j = 0; j < n_sites; ++j) {
            EXPECT_LT((fc.block(j, j) - fc.block(0, 0)).norm(), 1e-8);
            EXPECT_LT((fc.block(j, (j + 1) % n_sites) - fc.block(0, 1)).norm(), 1e-8);
        }
    }
}

TEST(FullChain, ResourceCap) {
    const BlockParams p = scalar_decoupled();
    EXPECT_THROW(fullchain_moments(p, 65, 1.0), ResourceError);
    const BlockParams big = random_stable_instance(1, InstanceDims{9, 2, {{1, 1}}});
    EXPECT_THROW(fullchain_moments(big, 4, 1.0), ResourceError);
}
