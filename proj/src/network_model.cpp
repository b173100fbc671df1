#include "qnet/network_model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "qnet/errors.hpp"

namespace qnet {

namespace {

std::string dims(const RMatrix& m) {
    std::ostringstream os;
    os << m.rows() << "x" << m.cols();
    return os.str();
}

void expect_shape(std::vector<std::string>& out, const std::string& name, const RMatrix& m, Eigen::Index rows,
                  Eigen::Index cols) {
    if (m.rows() != rows || m.cols() != cols) {
        std::ostringstream os;
        os << name << " is " << dims(m) << ", expected " << rows << "x" << cols;
        out.push_back(os.str());
    }
}

double max_norm(double acc, const RMatrix& m) { return std::max(acc, m.norm()); }

}  // namespace

RMatrix BlockParams::c_stacked() const {
    Eigen::Index rows = 0;
    for (const auto& ax : axes) rows += ax.m_plus() + ax.m_minus();
    RMatrix out(rows, n());
    Eigen::Index r = 0;
    for (const auto& ax : axes) {
        out.middleRows(r, ax.m_plus()) = ax.c_plus;
        r += ax.m_plus();
        out.middleRows(r, ax.m_minus()) = ax.c_minus;
        r += ax.m_minus();
    }
    return out;
}

RMatrix BlockParams::d_stacked() const {
    Eigen::Index rows = 0;
    for (const auto& ax : axes) rows += ax.m_plus() + ax.m_minus();
    RMatrix out(rows, m0());
    Eigen::Index r = 0;
    for (const auto& ax : axes) {
        out.middleRows(r, ax.m_plus()) = ax.d_plus;
        r += ax.m_plus();
        out.middleRows(r, ax.m_minus()) = ax.d_minus;
        r += ax.m_minus();
    }
    return out;
}

CMatrix BlockParams::ito_matrix() const {
    return CMatrix::Identity(m0(), m0()) + cplx(0.0, 1.0) * to_complex(j);
}

double BlockParams::scale() const {
    double s = 0.0;
    s = max_norm(s, a);
    s = max_norm(s, b);
    s = max_norm(s, j);
    if (theta) s = max_norm(s, *theta);
    for (const auto& ax : axes) {
        s = max_norm(s, ax.c_plus);
        s = max_norm(s, ax.c_minus);
        s = max_norm(s, ax.d_plus);
        s = max_norm(s, ax.d_minus);
        s = max_norm(s, ax.e_plus);
        s = max_norm(s, ax.e_minus);
    }
    return 1.0 + s;
}

NoiseRegime noise_regime(const BlockParams& params, double tol) {
    if (params.j.rows() == 0) return NoiseRegime::Strict;
    const double rho = spectral_radius(to_complex(params.j));
    if (rho > 1.0 + tol) return NoiseRegime::Invalid;
    if (rho >= 1.0 - tol) return NoiseRegime::Boundary;
    return NoiseRegime::Strict;
}

const char* to_string(NoiseRegime regime) {
    switch (regime) {
        case NoiseRegime::Strict: return "strict (spectral radius of J < 1)";
        case NoiseRegime::Boundary: return "boundary (spectral radius of J = 1)";
        case NoiseRegime::Invalid: return "invalid (spectral radius of J > 1)";
    }
    return "unknown";
}

std::vector<std::string> validate(const BlockParams& params, double tol) {
    std::vector<std::string> out;
    const Eigen::Index n = params.a.rows();
    const Eigen::Index m0 = params.b.cols();
    if (n <= 0) out.push_back("state dimension n must be positive");
    if (params.a.rows() != params.a.cols()) out.push_back("A is " + dims(params.a) + ", expected square");
    if (params.b.rows() != n) expect_shape(out, "B", params.b, n, m0);
    if (m0 <= 0) out.push_back("noise dimension m0 must be positive");
    if (params.num_axes() != 1 && params.num_axes() != 2) {
        out.push_back("number of lattice axes must be 1 or 2, got " + std::to_string(params.num_axes()));
    }
    for (std::size_t k = 0; k < params.axes.size(); ++k) {
        const auto& ax = params.axes[k];
        const std::string tag = params.axes.size() > 1 ? "^(" + std::to_string(k + 1) + ")" : "";
        const Eigen::Index mp = ax.c_plus.rows();
        const Eigen::Index mm = ax.c_minus.rows();
        expect_shape(out, "C+" + tag, ax.c_plus, mp, n);
        expect_shape(out, "C-" + tag, ax.c_minus, mm, n);
        expect_shape(out, "D+" + tag, ax.d_plus, mp, m0);
        expect_shape(out, "D-" + tag, ax.d_minus, mm, m0);
        expect_shape(out, "E+" + tag, ax.e_plus, n, mp);
        expect_shape(out, "E-" + tag, ax.e_minus, n, mm);
    }

    if (params.j.rows() != m0 || params.j.cols() != m0) {
        expect_shape(out, "J", params.j, m0, m0);
    } else {
        if ((params.j + params.j.transpose()).norm() > tol * (1.0 + params.j.norm())) {
            out.push_back("J not antisymmetric");
        }
        if (m0 > 0 && noise_regime(params, tol) == NoiseRegime::Invalid) {
            out.push_back("spectral radius of J exceeds 1");
        }
    }
    if (params.theta) {
        const RMatrix& th = *params.theta;
        if (th.rows() != n || th.cols() != n) {
            expect_shape(out, "Theta", th, n, n);
        } else if ((th + th.transpose()).norm() > tol * (1.0 + th.norm())) {
            out.push_back("Theta not antisymmetric");
        }
    }
    return out;
}

namespace {

void require_chain(const BlockParams& params, int n_sites, const char* where) {
    if (params.num_axes() != 1) throw UnsupportedError(std::string(where) + ": only 1-D chains are supported");
    if (n_sites < 3) {
        throw UnsupportedError(std::string(where) + ": fragment of " + std::to_string(n_sites) +
                               " sites is too small, need N >= 3");
    }
}

RMatrix ring(const RMatrix& diag, const RMatrix& from_prev, const RMatrix& from_next, int n_sites) {
    const Eigen::Index r = diag.rows();
    const Eigen::Index c = diag.cols();
    RMatrix out = RMatrix::Zero(r * n_sites, c * n_sites);
    for (int k = 0; k < n_sites; ++k) {
        const int prev = (k + n_sites - 1) % n_sites;
        const int next = (k + 1) % n_sites;
        out.block(k * r, k * c, r, c) += diag;
        out.block(k * r, prev * c, r, c) += from_prev;
        out.block(k * r, next * c, r, c) += from_next;
    }
    return out;
}

}  // namespace

RMatrix assemble_chain_generator(const BlockParams& params, int n_sites) {
    require_chain(params, n_sites, "assemble_chain_generator");
    const auto& ax = params.axes.front();
    return ring(params.a, ax.e_plus * ax.c_plus, ax.e_minus * ax.c_minus, n_sites);
}

RMatrix assemble_chain_input(const BlockParams& params, int n_sites) {
    require_chain(params, n_sites, "assemble_chain_input");
    const auto& ax = params.axes.front();
    return ring(params.b, ax.e_plus * ax.d_plus, ax.e_minus * ax.d_minus, n_sites);
}

CMatrix dft_matrix(int n_sites) {
    if (n_sites < 1) throw DomainError("dft_matrix: N must be positive");
    CMatrix phi(n_sites, n_sites);
    const double norm = 1.0 / std::sqrt(static_cast<double>(n_sites));
    for (int l = 0; l < n_sites; ++l) {
        for (int mu = 0; mu < n_sites; ++mu) {
            // Reduce the exponent first so large N keeps full phase accuracy.
            const int k = static_cast<int>((static_cast<long long>(l) * mu) % n_sites);
            const double angle = -2.0 * std::numbers::pi * k / n_sites;
            phi(l, mu) = std::polar(norm, angle);
        }
    }
    return phi;
}

}  // namespace qnet
