#include "qnet/instances.hpp"

#include <cmath>
#include <numbers>

#include "qnet/errors.hpp"
#include "qnet/performance.hpp"
#include "qnet/realizability.hpp"

namespace qnet {

namespace {

constexpr int kMaxDraws = 200;

RMatrix j2() {
    RMatrix j(2, 2);
    j << 0.0, 1.0, -1.0, 0.0;
    return j;
}

}  // namespace

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
}

RMatrix Rng::normal_matrix(Eigen::Index rows, Eigen::Index cols, double scale) {
    RMatrix m(rows, cols);
    // Row-major draw order, independent of Eigen's storage.
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = scale * normal();
    }
    return m;
}

RMatrix canonical_j(int m0) {
    if (m0 < 0) throw DomainError("canonical_j: negative size");
    RMatrix j = RMatrix::Zero(m0, m0);
    for (int i = 0; i + 1 < m0; i += 2) j.block(i, i, 2, 2) = j2();
    return j;
}

BlockParams random_instance(std::uint64_t seed, const InstanceDims& dims, double coupling_scale) {
    if (dims.n < 1 || dims.m0 < 1) throw DomainError("random_instance: n and m0 must be positive");
    if (dims.axes.empty() || dims.axes.size() > 2) throw DomainError("random_instance: one or two axes");
    Rng rng(seed);
    BlockParams p;
    p.a = rng.normal_matrix(dims.n, dims.n);
    p.b = rng.normal_matrix(dims.n, dims.m0);
    for (const auto& [mp, mm] : dims.axes) {
        if (mp < 0 || mm < 0) throw DomainError("random_instance: negative channel count");
        AxisCoupling ax;
        ax.c_plus = rng.normal_matrix(mp, dims.n);
        ax.c_minus = rng.normal_matrix(mm, dims.n);
        ax.d_plus = rng.normal_matrix(mp, dims.m0);
        ax.d_minus = rng.normal_matrix(mm, dims.m0);
        ax.e_plus = rng.normal_matrix(dims.n, mp, coupling_scale);
        ax.e_minus = rng.normal_matrix(dims.n, mm, coupling_scale);
        p.axes.push_back(std::move(ax));
    }
    p.j = canonical_j(dims.m0);
    return p;
}

BlockParams random_stable_instance(std::uint64_t seed, const InstanceDims& dims, double margin,
                                   double coupling_scale) {
    BlockParams p = random_instance(seed, dims, coupling_scale);
    const StabilityReport rep = check_stability(p);
    const double shift = margin - rep.margin;
    if (shift > 0.0) p.a -= shift * RMatrix::Identity(dims.n, dims.n);
    return p;
}

BlockParams pr_consistent_instance(std::uint64_t seed, int n, const std::vector<std::pair<int, int>>& axes,
                                   int extra_channels, double coupling_scale) {
    if (n < 2 || n % 2 != 0) throw DomainError("pr_consistent_instance: n must be even and positive");
    if (axes.empty() || axes.size() > 2) throw DomainError("pr_consistent_instance: one or two axes");
    if (extra_channels < 0) throw DomainError("pr_consistent_instance: negative extra channel count");
    const int k = n / 2;
    int outputs = 0;
    for (const auto& [mp, mm] : axes) {
        if (mp < 0 || mm < 0) throw DomainError("pr_consistent_instance: negative channel count");
        outputs += mp + mm;
    }
    const int channels = outputs + extra_channels;
    if (channels < 1) throw DomainError("pr_consistent_instance: need at least one noise channel");
    const int m0 = 2 * channels;

    const RMatrix theta = kron(CMatrix::Identity(k, k), to_complex(j2())).real() / 2.0;
    const RMatrix theta_inv = theta.inverse();
    const RMatrix j = canonical_j(m0);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

    Rng rng(seed);
    for (int draw = 0; draw < kMaxDraws; ++draw) {
        // Passive coupling L = Lambda a with a_j = (q_j + i p_j)/sqrt(2).
        const CMatrix lambda = (to_complex(rng.normal_matrix(channels, k)) +
                                cplx(0.0, 1.0) * to_complex(rng.normal_matrix(channels, k))) *
                               inv_sqrt2;
        const CMatrix g = to_complex(rng.normal_matrix(k, k)) + cplx(0.0, 1.0) * to_complex(rng.normal_matrix(k, k));
        const CMatrix h = (g + g.adjoint()) / 2.0;

        CMatrix coupling(channels, n);
        for (int c = 0; c < k; ++c) {
            coupling.col(2 * c) = lambda.col(c) * inv_sqrt2;
            coupling.col(2 * c + 1) = lambda.col(c) * cplx(0.0, inv_sqrt2);
        }
        RMatrix m(m0, n);
        for (int r = 0; r < channels; ++r) {
            m.row(2 * r) = coupling.row(r).real();
            m.row(2 * r + 1) = coupling.row(r).imag();
        }
        RMatrix ham(n, n);
        for (int r = 0; r < k; ++r) {
            for (int c = 0; c < k; ++c) {
                ham(2 * r, 2 * c) = h(r, c).real();
                ham(2 * r + 1, 2 * c + 1) = h(r, c).real();
                ham(2 * r, 2 * c + 1) = -h(r, c).imag();
                ham(2 * r + 1, 2 * c) = h(r, c).imag();
            }
        }

        BlockParams p;
        p.j = j;
        p.b = 2.0 * theta * m.transpose();
        p.a = 2.0 * theta * (ham + m.transpose() * j * m);
        RMatrix d = RMatrix::Zero(outputs, m0);
        for (int r = 0; r < outputs; ++r) d(r, 2 * r) = 1.0;
        const RMatrix c = -d * j * p.b.transpose() * theta_inv;

        int row = 0;
        for (const auto& [mp, mm] : axes) {
            AxisCoupling ax;
            ax.c_plus = c.middleRows(row, mp);
            ax.d_plus = d.middleRows(row, mp);
            row += mp;
            ax.c_minus = c.middleRows(row, mm);
            ax.d_minus = d.middleRows(row, mm);
            row += mm;
            ax.e_plus = rng.normal_matrix(n, mp, coupling_scale);
            ax.e_minus = rng.normal_matrix(n, mm, coupling_scale);
            p.axes.push_back(std::move(ax));
        }
        if (check_stability(p).verdict != Verdict::Stable) continue;

        if (p.num_axes() == 1) {
            const ThetaSolution sol = solve_theta(p);
            const double tol = 1e-10 * p.scale();
            if (sol.residual > tol || sol.theta_free_residual > tol) {
                throw NumericError("pr_consistent_instance: generated block is not realizable");
            }
            p.theta = sol.theta;
        } else {
            p.theta = theta;
        }
        return p;
    }
    throw NumericError("pr_consistent_instance: no stable draw found");
}

BlockParams aliasing_witness_instance(std::uint64_t seed) {
    const RMatrix j = j2();
    const RMatrix theta = j / 2.0;
    const RMatrix theta_inv = theta.inverse();
    Rng rng(seed);
    for (int draw = 0; draw < kMaxDraws; ++draw) {
        const RMatrix b = rng.normal_matrix(2, 1);
        const RMatrix g = rng.normal_matrix(2, 1);
        const RMatrix r0 = rng.normal_matrix(2, 2);
        const double alpha = rng.normal();
        const double ratio = rng.normal();

        BlockParams p;
        p.j = j;
        p.theta = theta;
        p.b = b * g.transpose();
        p.a = 2.0 * theta * (r0 + r0.transpose()) / 2.0 - 0.5 * p.b * j * p.b.transpose() * theta_inv;
        const RMatrix c = 2.0 * j * p.b.transpose() * j;
        AxisCoupling ax;
        ax.c_plus = c.topRows(1);
        ax.c_minus = c.bottomRows(1);
        ax.d_plus = RMatrix::Identity(2, 2).topRows(1);
        ax.d_minus = RMatrix::Identity(2, 2).bottomRows(1);
        ax.e_plus = alpha * b;
        ax.e_minus = ratio * alpha * b;
        p.axes.push_back(std::move(ax));

        // Keep draws whose s = -2 coefficient is clearly nonzero.
        const RMatrix m2 = p.axes[0].e_plus * p.axes[0].d_plus * j * p.axes[0].d_minus.transpose() *
                           p.axes[0].e_minus.transpose();
        if (m2.norm() > 0.05 * p.scale()) return p;
    }
    throw NumericError("aliasing_witness_instance: no admissible draw found");
}

BlockParams perturb_theta(const BlockParams& params, double eps) {
    if (!params.theta) throw ConfigError("perturb_theta: CCR matrix Theta is missing");
    if (params.n() < 2) throw DomainError("perturb_theta: needs n >= 2");
    BlockParams p = params;
    const double s = eps / std::sqrt(2.0);
    (*p.theta)(0, 1) += s;
    (*p.theta)(1, 0) -= s;
    return p;
}

}  // namespace qnet
