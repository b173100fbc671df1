#include "qnet/realizability.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qnet/errors.hpp"

namespace qnet {

namespace {

const RMatrix& require_theta(const BlockParams& params, const char* where) {
    if (!params.theta) throw ConfigError(std::string(where) + ": CCR matrix Theta is missing");
    return *params.theta;
}

std::string describe_root(int l, int n_sites) {
    std::ostringstream os;
    os << "z=e^{2pi i " << l << "/" << n_sites << "}";
    return os.str();
}

void finalize(PRReport& report) {
    report.pass = true;
    report.worst_residual = -1.0;
    for (const auto& r : report.residuals) {
        if (!(r.norm <= report.tolerance * report.scale)) report.pass = false;
        if (r.norm > report.worst_residual || std::isnan(r.norm)) {
            report.worst_residual = r.norm;
            report.worst_offender = r.label;
        }
    }
}

// Residual matrices of the five algebraic condition families for a chain,
// evaluated at a given Theta.
struct AlgebraicResiduals {
    RMatrix lyap_s0;
    RMatrix lyap_sm1;
    RMatrix lyap_sm2;
    RMatrix xy_p0;
    std::vector<RMatrix> xy_p;  // p = 1..n-1
};

AlgebraicResiduals algebraic_residuals(const BlockParams& params, const RMatrix& theta) {
    const auto& ax = params.axes.front();
    const RMatrix& a = params.a;
    const RMatrix& b = params.b;
    const RMatrix& j = params.j;
    const RMatrix c = params.c_stacked();
    const RMatrix d = params.d_stacked();
    const RMatrix epdp = ax.e_plus * ax.d_plus;
    const RMatrix emdm = ax.e_minus * ax.d_minus;

    AlgebraicResiduals r;
    r.lyap_s0 = a * theta + theta * a.transpose() + b * j * b.transpose() + epdp * j * epdp.transpose() +
                emdm * j * emdm.transpose();
    r.lyap_sm1 = ax.e_plus * ax.c_plus * theta + theta * ax.c_minus.transpose() * ax.e_minus.transpose() +
                 b * j * emdm.transpose() + epdp * j * b.transpose();
    r.lyap_sm2 = epdp * j * emdm.transpose();
    r.xy_p0 = theta * c.transpose() + b * j * d.transpose();
    const int n = static_cast<int>(params.n());
    if (n > 1) {
        for (int p = 1; p <= n - 1; ++p) {
            const LaurentTable tp = aps_table(params, p);
            r.xy_p.push_back((tp.at(1) * epdp + tp.at(-1) * emdm) * j * d.transpose());
        }
    }
    return r;
}

// Enumerates U_N (chains) or U_N^2 (torus) in lexicographic index order.
template <typename Fn>
void for_each_grid_point(int axes, int n_sites, Fn&& fn) {
    if (axes == 1) {
        for (int l = 0; l < n_sites; ++l) fn(FreqPoint::on_circle(root_of_unity(l, n_sites)), l, -1);
    } else {
        for (int l1 = 0; l1 < n_sites; ++l1) {
            for (int l2 = 0; l2 < n_sites; ++l2) {
                fn(FreqPoint::on_torus(root_of_unity(l1, n_sites), root_of_unity(l2, n_sites)), l1, l2);
            }
        }
    }
}

}  // namespace

CMatrix ccr_lyapunov_residual(const BlockParams& params, const FreqPoint& z) {
    const CMatrix theta = to_complex(require_theta(params, "ccr_lyapunov_residual"));
    const ModeMatrices mm = mode_matrices(params, z);
    return mm.a * theta + theta * mm.a.adjoint() + mm.b * to_complex(params.j) * mm.b.adjoint();
}

PRReport check_theorem1(const BlockParams& params, int n_sites, double tol) {
    const RMatrix& theta_r = require_theta(params, "check_theorem1");
    if (n_sites < 1) throw DomainError("check_theorem1: N must be positive");
    const CMatrix theta = to_complex(theta_r);
    const CMatrix jc = to_complex(params.j);
    const CMatrix ct = to_complex(params.c_stacked().transpose());
    const CMatrix dt = to_complex(params.d_stacked().transpose());
    const int n = static_cast<int>(params.n());

    PRReport report;
    report.theorem = 1;
    report.tolerance = tol;
    report.scale = params.scale();

    double worst_lyap = 0.0;
    std::string worst_z = "z=1";
    std::vector<CMatrix> xy_sums(static_cast<std::size_t>(n), CMatrix::Zero(params.n(), ct.cols()));

    for_each_grid_point(params.num_axes(), n_sites, [&](const FreqPoint& z, int l1, int l2) {
        const ModeMatrices mm = mode_matrices(params, z);
        const double lyap = (mm.a * theta + theta * mm.a.adjoint() + mm.b * jc * mm.b.adjoint()).norm();
        if (lyap > worst_lyap) {
            worst_lyap = lyap;
            worst_z = l2 < 0 ? describe_root(l1, n_sites)
                             : describe_root(l1, n_sites) + "," + describe_root(l2, n_sites).substr(2);
        }
        // A_z^p (Theta C^T + B_z J D^T) accumulated by repeated multiplication.
        CMatrix term = theta * ct + mm.b * jc * dt;
        for (int p = 0; p < n; ++p) {
            xy_sums[static_cast<std::size_t>(p)] += term;
            if (p + 1 < n) term = mm.a * term;
        }
    });

    report.residuals.push_back({"ccr_lyapunov_max_over_grid", worst_lyap});
    for (int p = 0; p < n; ++p) {
        report.residuals.push_back({"xy_sum_p" + std::to_string(p), xy_sums[static_cast<std::size_t>(p)].norm()});
    }
    finalize(report);
    if (report.worst_offender == "ccr_lyapunov_max_over_grid") {
        report.worst_offender = worst_z;
    } else if (report.worst_offender.rfind("xy_sum_p", 0) == 0) {
        report.worst_offender = "p=" + report.worst_offender.substr(8);
    }
    return report;
}

PRReport check_theorem2(const BlockParams& params, double tol) {
    if (params.num_axes() != 1) {
        throw UnsupportedError("check_theorem2: the algebraic conditions are available for 1-D chains only");
    }
    const RMatrix& theta = require_theta(params, "check_theorem2");
    const AlgebraicResiduals r = algebraic_residuals(params, theta);

    PRReport report;
    report.theorem = 2;
    report.tolerance = tol;
    report.scale = params.scale();
    report.residuals.push_back({"lyapunov_coeff_s0", r.lyap_s0.norm()});
    report.residuals.push_back({"lyapunov_coeff_s-1", r.lyap_sm1.norm()});
    report.residuals.push_back({"lyapunov_coeff_s-2", r.lyap_sm2.norm()});
    report.residuals.push_back({"state_output_p0", r.xy_p0.norm()});
    for (std::size_t k = 0; k < r.xy_p.size(); ++k) {
        report.residuals.push_back({"state_output_p" + std::to_string(k + 1), r.xy_p[k].norm()});
    }
    finalize(report);
    return report;
}

ThetaSolution solve_theta(const BlockParams& params) {
    if (params.num_axes() != 1) throw UnsupportedError("solve_theta: defined for 1-D chains only");
    const Eigen::Index n = params.n();
    const auto& ax = params.axes.front();
    const RMatrix c = params.c_stacked();
    const RMatrix zero = RMatrix::Zero(n, n);

    // Stacked residual of the Theta-linear conditions: lin(Theta) + constant.
    const AlgebraicResiduals at_zero = algebraic_residuals(params, zero);
    const RMatrix fwd = ax.e_plus * ax.c_plus;
    const RMatrix bwd_t = ax.c_minus.transpose() * ax.e_minus.transpose();
    auto linear_part = [&](const RMatrix& th) {
        std::vector<RMatrix> parts{params.a * th + th * params.a.transpose(), fwd * th + th * bwd_t,
                                   th * c.transpose()};
        return parts;
    };
    auto flatten = [](const std::vector<RMatrix>& parts) {
        Eigen::Index len = 0;
        for (const auto& p : parts) len += p.size();
        Eigen::VectorXd v(len);
        Eigen::Index off = 0;
        for (const auto& p : parts) {
            v.segment(off, p.size()) = Eigen::Map<const Eigen::VectorXd>(p.data(), p.size());
            off += p.size();
        }
        return v;
    };
    const Eigen::VectorXd constant = flatten({at_zero.lyap_s0, at_zero.lyap_sm1, at_zero.xy_p0});

    const Eigen::Index unknowns = n * (n - 1) / 2;
    RMatrix design(constant.size(), unknowns);
    std::vector<std::pair<Eigen::Index, Eigen::Index>> basis;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = i + 1; k < n; ++k) basis.emplace_back(i, k);
    }
    for (Eigen::Index col = 0; col < unknowns; ++col) {
        RMatrix th = RMatrix::Zero(n, n);
        th(basis[col].first, basis[col].second) = 1.0;
        th(basis[col].second, basis[col].first) = -1.0;
        design.col(col) = flatten(linear_part(th));
    }

    ThetaSolution sol;
    sol.theta = RMatrix::Zero(n, n);
    if (unknowns > 0) {
        Eigen::CompleteOrthogonalDecomposition<RMatrix> cod(design);
        const double largest = design.cwiseAbs().maxCoeff();
        cod.setThreshold(largest > 0 ? 1e-12 : 1.0);
        cod.compute(design);
        const Eigen::VectorXd coeffs = largest > 0 ? Eigen::VectorXd(cod.solve(-constant))
                                                   : Eigen::VectorXd::Zero(unknowns);
        sol.rank = largest > 0 ? cod.rank() : 0;
        sol.degenerate = sol.rank < unknowns;
        for (Eigen::Index col = 0; col < unknowns; ++col) {
            sol.theta(basis[col].first, basis[col].second) = coeffs(col);
            sol.theta(basis[col].second, basis[col].first) = -coeffs(col);
        }
    } else {
        sol.degenerate = false;
    }

    const AlgebraicResiduals final_res = algebraic_residuals(params, sol.theta);
    sol.residual = flatten({final_res.lyap_s0, final_res.lyap_sm1, final_res.xy_p0}).norm();
    double free_sq = final_res.lyap_sm2.squaredNorm();
    for (const auto& m : final_res.xy_p) free_sq += m.squaredNorm();
    sol.theta_free_residual = std::sqrt(free_sq);
    return sol;
}

CMatrix integrated_exponential(const CMatrix& m, double t) {
    const Eigen::Index n = m.rows();
    CMatrix augmented = CMatrix::Zero(2 * n, 2 * n);
    augmented.topLeftCorner(n, n) = t * m;
    augmented.topRightCorner(n, n) = t * CMatrix::Identity(n, n);
    return expm(augmented).topRightCorner(n, n);
}

CommutatorFlow commutator_flow(const BlockParams& params, int n_sites, cplx z, cplx v, double t) {
    if (params.num_axes() != 1) throw UnsupportedError("commutator_flow: defined for 1-D chains only");
    const RMatrix& theta_r = require_theta(params, "commutator_flow");
    if (t < 0) throw DomainError("commutator_flow: negative time");
    const int lz = root_index(z, n_sites);
    const int lv = root_index(v, n_sites);
    if (lz < 0 || lv < 0) throw DomainError("commutator_flow: z and v must be roots of unity of order N");

    const Eigen::Index n = params.n();
    const Eigen::Index m = params.c_stacked().rows();
    CommutatorFlow flow{CMatrix::Zero(n, n), CMatrix::Zero(n, m)};
    if (lz != lv) return flow;

    const cplx factor = cplx(0.0, 2.0 * n_sites);
    const CMatrix theta = to_complex(theta_r);
    const CMatrix jc = to_complex(params.j);
    const ModeMatrices mz = mode_matrices(params, FreqPoint::on_circle(root_of_unity(lz, n_sites)));
    flow.ccr_drift = factor * (mz.a * theta + theta * mz.a.adjoint() + mz.b * jc * mz.b.adjoint());
    const CMatrix forcing = theta * to_complex(params.c_stacked().transpose()) +
                            mz.b * jc * to_complex(params.d_stacked().transpose());
    flow.xy_commutator = factor * integrated_exponential(mz.a, t) * forcing;
    return flow;
}

}  // namespace qnet
