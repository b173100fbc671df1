#include "qnet/frequency.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qnet/errors.hpp"

namespace qnet {

namespace {

constexpr double kUnitTol = 1e-12;

void require_unit(cplx z) {
    if (std::abs(std::abs(z) - 1.0) > kUnitTol) {
        throw DomainError("frequency point is off the unit circle (|z| = " + std::to_string(std::abs(z)) + ")");
    }
}

}  // namespace

FreqPoint FreqPoint::on_circle(cplx z) {
    require_unit(z);
    return FreqPoint({z, cplx(1.0, 0.0)}, 1);
}

FreqPoint FreqPoint::on_torus(cplx z1, cplx z2) {
    require_unit(z1);
    require_unit(z2);
    return FreqPoint({z1, z2}, 2);
}

FreqPoint FreqPoint::from_angle(double phi) { return FreqPoint({std::polar(1.0, phi), cplx(1.0, 0.0)}, 1); }

FreqPoint FreqPoint::from_angles(double phi1, double phi2) {
    return FreqPoint({std::polar(1.0, phi1), std::polar(1.0, phi2)}, 2);
}

FreqPoint FreqPoint::inverse() const { return FreqPoint({std::conj(z_[0]), std::conj(z_[1])}, dims_); }

cplx root_of_unity(int l, int n_sites) {
    const int k = ((l % n_sites) + n_sites) % n_sites;
    return std::polar(1.0, 2.0 * std::numbers::pi * k / n_sites);
}

std::vector<cplx> roots_of_unity(int n_sites) {
    if (n_sites < 1) throw DomainError("roots_of_unity: N must be positive");
    std::vector<cplx> out;
    out.reserve(static_cast<std::size_t>(n_sites));
    for (int l = 0; l < n_sites; ++l) out.push_back(root_of_unity(l, n_sites));
    return out;
}

int root_index(cplx z, int n_sites, double tol) {
    if (n_sites < 1) return -1;
    double angle = std::arg(z);
    if (angle < 0) angle += 2.0 * std::numbers::pi;
    const int l = static_cast<int>(std::lround(angle * n_sites / (2.0 * std::numbers::pi))) % n_sites;
    return std::abs(z - root_of_unity(l, n_sites)) <= tol ? l : -1;
}

CMatrix coupling_matrix(const FreqPoint& z, const BlockParams& params) {
    if (z.dims() != params.num_axes()) {
        throw DimensionError("coupling_matrix: frequency point has " + std::to_string(z.dims()) +
                             " components, model has " + std::to_string(params.num_axes()) + " axes");
    }
    Eigen::Index m = 0;
    for (const auto& ax : params.axes) m += ax.m_plus() + ax.m_minus();
    CMatrix k = CMatrix::Zero(m, m);
    Eigen::Index off = 0;
    for (int alpha = 0; alpha < params.num_axes(); ++alpha) {
        const auto& ax = params.axes[static_cast<std::size_t>(alpha)];
        const cplx za = z[alpha];
        for (Eigen::Index i = 0; i < ax.m_plus(); ++i, ++off) k(off, off) = std::conj(za);
        for (Eigen::Index i = 0; i < ax.m_minus(); ++i, ++off) k(off, off) = za;
    }
    return k;
}

ModeMatrices mode_matrices(const BlockParams& params, const FreqPoint& z) {
    if (z.dims() != params.num_axes()) {
        throw DimensionError("mode_matrices: frequency point has " + std::to_string(z.dims()) +
                             " components, model has " + std::to_string(params.num_axes()) + " axes");
    }
    CMatrix a = to_complex(params.a);
    CMatrix b = to_complex(params.b);
    for (int alpha = 0; alpha < params.num_axes(); ++alpha) {
        const auto& ax = params.axes[static_cast<std::size_t>(alpha)];
        if (ax.e_plus.cols() != ax.c_plus.rows() || ax.e_minus.cols() != ax.c_minus.rows() ||
            ax.e_plus.rows() != params.n() || ax.c_plus.cols() != params.n() || ax.d_plus.cols() != params.m0() ||
            ax.d_minus.cols() != params.m0()) {
            throw DimensionError("mode_matrices: inconsistent coupling dimensions on axis " +
                                 std::to_string(alpha + 1));
        }
        // z^{-1} = conj(z) on the unit circle.
        const cplx zinv = std::conj(z[alpha]);
        const cplx zfwd = z[alpha];
        a += zinv * to_complex(ax.e_plus * ax.c_plus) + zfwd * to_complex(ax.e_minus * ax.c_minus);
        b += zinv * to_complex(ax.e_plus * ax.d_plus) + zfwd * to_complex(ax.e_minus * ax.d_minus);
    }
    return ModeMatrices{std::move(a), std::move(b), z};
}

std::map<int, CMatrix> laurent_coeffs(const std::vector<CMatrix>& samples, int q) {
    const int n_sites = static_cast<int>(samples.size());
    if (q < 0) throw DomainError("laurent_coeffs: negative order range");
    if (n_sites <= 2 * q) {
        throw AliasingError("laurent_coeffs: " + std::to_string(n_sites) + " samples cannot resolve orders in [-" +
                                std::to_string(q) + ", " + std::to_string(q) + "]; need N >= " +
                                std::to_string(2 * q + 1),
                            2 * q + 1);
    }
    std::map<int, CMatrix> out;
    for (int s = -q; s <= q; ++s) {
        CMatrix acc = CMatrix::Zero(samples.front().rows(), samples.front().cols());
        for (int l = 0; l < n_sites; ++l) {
            // z_l^{-s} = z_{-l s}
            const long long idx = -static_cast<long long>(l) * s;
            acc += root_of_unity(static_cast<int>(idx % n_sites), n_sites) * samples[static_cast<std::size_t>(l)];
        }
        out.emplace(s, acc / static_cast<double>(n_sites));
    }
    return out;
}

std::map<int, CMatrix> laurent_coeffs(int n_sites, int q, const std::function<CMatrix(cplx)>& f) {
    std::vector<CMatrix> samples;
    samples.reserve(static_cast<std::size_t>(std::max(n_sites, 0)));
    for (cplx z : roots_of_unity(n_sites)) samples.push_back(f(z));
    return laurent_coeffs(samples, q);
}

LaurentTable::LaurentTable(int order, std::vector<RMatrix> blocks) : order_(order), blocks_(std::move(blocks)) {
    if (static_cast<int>(blocks_.size()) != 2 * order_ + 1) {
        throw DimensionError("LaurentTable: expected " + std::to_string(2 * order_ + 1) + " blocks");
    }
}

RMatrix LaurentTable::at(int s) const {
    if (s < -order_ || s > order_) return RMatrix::Zero(n(), n());
    return blocks_[static_cast<std::size_t>(s + order_)];
}

CMatrix LaurentTable::evaluate(cplx z) const {
    CMatrix acc = CMatrix::Zero(n(), n());
    for (int s = -order_; s <= order_; ++s) {
        acc += std::pow(z, s) * to_complex(blocks_[static_cast<std::size_t>(s + order_)]);
    }
    return acc;
}

LaurentTable aps_table(const BlockParams& params, int p) {
    if (params.num_axes() != 1) throw UnsupportedError("aps_table: defined for 1-D chains only");
    if (p < 0) throw DomainError("aps_table: order must be nonnegative");
    const auto n = params.n();
    const auto& ax = params.axes.front();
    const RMatrix fwd = ax.e_plus * ax.c_plus;   // coefficient of z^{-1}
    const RMatrix bwd = ax.e_minus * ax.c_minus;  // coefficient of z

    std::vector<RMatrix> prev{RMatrix::Identity(n, n)};
    for (int order = 1; order <= p; ++order) {
        auto get = [&](int s) -> RMatrix {
            const int po = order - 1;
            if (s < -po || s > po) return RMatrix::Zero(n, n);
            return prev[static_cast<std::size_t>(s + po)];
        };
        std::vector<RMatrix> next;
        next.reserve(static_cast<std::size_t>(2 * order + 1));
        for (int s = -order; s <= order; ++s) {
            next.push_back(params.a * get(s) + fwd * get(s + 1) + bwd * get(s - 1));
        }
        prev = std::move(next);
    }
    return LaurentTable(p, std::move(prev));
}

}  // namespace qnet
