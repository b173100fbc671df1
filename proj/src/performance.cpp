#include "qnet/performance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "qnet/errors.hpp"

namespace qnet {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kNegligible = 1e-18;

bool is_positive_lag(const Lag& k) { return k[0] > 0 || (k[0] == 0 && k[1] > 0); }

Lag negate(const Lag& k) { return {-k[0], -k[1]}; }

cplx character(const FreqPoint& z, const Lag& k) {
    // z^{-k} on the unit circle is conj(z)^k.
    cplx out = std::pow(std::conj(z[0]), k[0]);
    if (z.dims() == 2) out *= std::pow(std::conj(z[1]), k[1]);
    return out;
}

// Sum_{|l| < N} (1 - |l|/N) rho^{|l|} z^{-l} for one axis (N = 0: untruncated, no triangle).
cplx geometric_factor(double rho, cplx z, int n_sites) {
    if (n_sites <= 0) {
        const double c = std::real(z);
        return (1.0 - rho * rho) / (1.0 - 2.0 * rho * c + rho * rho);
    }
    cplx acc = 1.0;
    double rk = 1.0;
    for (int l = 1; l < n_sites; ++l) {
        rk *= rho;
        if (rk < kNegligible) break;
        const double w = 1.0 - static_cast<double>(l) / n_sites;
        acc += w * rk * 2.0 * std::cos(l * std::arg(z));
    }
    return acc;
}

double fejer_weight(const Lag& l, int axes, int n_sites) {
    double w = 1.0;
    for (int a = 0; a < axes; ++a) {
        const double f = 1.0 - static_cast<double>(std::abs(l[static_cast<std::size_t>(a)])) / n_sites;
        w *= std::max(f, 0.0);
    }
    return w;
}

std::string describe(const FreqPoint& z) {
    std::ostringstream os;
    os.precision(6);
    os << "phi=" << std::arg(z[0]);
    if (z.dims() == 2) os << ",phi2=" << std::arg(z[1]);
    return os.str();
}

FreqPoint grid_point(int axes, int i1, int i2, int m) {
    if (axes == 1) return FreqPoint::on_circle(root_of_unity(i1, m));
    return FreqPoint::on_torus(root_of_unity(i1, m), root_of_unity(i2, m));
}

// Visits the grid points of level m; when refining, only those absent from level m/2.
template <typename Fn>
void visit_level(int axes, int m, bool refining, Fn&& fn) {
    if (axes == 1) {
        for (int i = refining ? 1 : 0; i < m; i += refining ? 2 : 1) fn(i, 0);
        return;
    }
    for (int i1 = 0; i1 < m; ++i1) {
        for (int i2 = 0; i2 < m; ++i2) {
            if (refining && i1 % 2 == 0 && i2 % 2 == 0) continue;
            fn(i1, i2);
        }
    }
}

int default_cap(int axes, int requested) {
    if (requested > 0) return requested;
    return axes == 1 ? (1 << 16) : 1024;
}

void require_stable(const BlockParams& params) {
    const StabilityReport rep = check_stability(params);
    if (rep.verdict == Verdict::Unstable) {
        throw StabilityError("mode matrix not Hurwitz at " + describe(rep.worst) +
                                 " (margin " + std::to_string(rep.margin) + ")",
                             rep.worst[0], rep.worst[1]);
    }
    if (rep.verdict == Verdict::Inconclusive) {
        throw InconclusiveError("stability could not be certified on a " + std::to_string(rep.grid_per_axis) +
                                "-point grid (margin " + std::to_string(rep.margin) + ")");
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// WeightSequence

WeightSequence WeightSequence::finite(int axes, const std::map<Lag, RMatrix>& blocks) {
    if (axes != 1 && axes != 2) throw ConfigError("weights: axes must be 1 or 2");
    WeightSequence w;
    w.kind_ = Kind::Finite;
    w.axes_ = axes;
    w.n_ = blocks.empty() ? 0 : blocks.begin()->second.rows();
    for (const auto& [k, sigma] : blocks) {
        if (sigma.rows() != w.n_ || sigma.cols() != w.n_) throw ConfigError("weights: blocks must share one square size");
        if (axes == 1 && k[1] != 0) throw ConfigError("weights: chain lags must have a zero second component");
        const double scale = 1e-12 * (1.0 + sigma.norm());
        if (k == Lag{0, 0}) {
            if ((sigma - sigma.transpose()).norm() > scale) throw ConfigError("weights: sigma_0 must be symmetric");
            w.blocks_[k] = (sigma + sigma.transpose()) / 2.0;
            continue;
        }
        const Lag mirror = negate(k);
        if (auto it = blocks.find(mirror); it != blocks.end()) {
            if ((it->second - sigma.transpose()).norm() > scale) {
                throw ConfigError("weights: sigma_{-k} must equal sigma_k^T");
            }
        }
        const Lag canonical = is_positive_lag(k) ? k : mirror;
        const RMatrix canon_block = is_positive_lag(k) ? sigma : RMatrix(sigma.transpose());
        w.blocks_[canonical] = canon_block;
        w.blocks_[negate(canonical)] = canon_block.transpose();
    }
    return w;
}

WeightSequence WeightSequence::geometric(int axes, double rho, const RMatrix& sigma_bar) {
    if (axes != 1 && axes != 2) throw ConfigError("weights: axes must be 1 or 2");
    if (!(rho >= 0.0 && rho < 1.0)) throw ConfigError("weights: geometric decay needs 0 <= rho < 1");
    if (sigma_bar.rows() != sigma_bar.cols()) throw ConfigError("weights: sigma_bar must be square");
    if ((sigma_bar - sigma_bar.transpose()).norm() > 1e-12 * (1.0 + sigma_bar.norm())) {
        throw ConfigError("weights: sigma_bar must be symmetric");
    }
    WeightSequence w;
    w.kind_ = Kind::Geometric;
    w.axes_ = axes;
    w.n_ = sigma_bar.rows();
    w.rho_ = rho;
    w.sigma_bar_ = (sigma_bar + sigma_bar.transpose()) / 2.0;
    return w;
}

int WeightSequence::support_radius() const {
    if (kind_ == Kind::Geometric) {
        if (rho_ == 0.0) return 0;
        return static_cast<int>(std::ceil(std::log(kNegligible) / std::log(rho_)));
    }
    int r = 0;
    for (const auto& [k, sigma] : blocks_) r = std::max({r, std::abs(k[0]), std::abs(k[1])});
    return r;
}

RMatrix WeightSequence::block(const Lag& k) const {
    if (kind_ == Kind::Geometric) {
        const int dist = std::abs(k[0]) + (axes_ == 2 ? std::abs(k[1]) : (k[1] == 0 ? 0 : -1));
        if (dist < 0) return RMatrix::Zero(n_, n_);
        return std::pow(rho_, dist) * sigma_bar_;
    }
    if (auto it = blocks_.find(k); it != blocks_.end()) return it->second;
    return RMatrix::Zero(n_, n_);
}

template <typename Fn>
void WeightSequence::for_each_block(Fn&& fn) const {
    for (const auto& [k, sigma] : blocks_) fn(k, sigma);
}

CMatrix WeightSequence::spectrum(const FreqPoint& z) const {
    if (z.dims() != axes_) throw DimensionError("weights: frequency point dimension does not match the weights");
    if (kind_ == Kind::Geometric) {
        cplx f = geometric_factor(rho_, z[0], 0);
        if (axes_ == 2) f *= geometric_factor(rho_, z[1], 0);
        return f * to_complex(sigma_bar_);
    }
    CMatrix acc = CMatrix::Zero(n_, n_);
    for_each_block([&](const Lag& k, const RMatrix& sigma) { acc += character(z, k) * to_complex(sigma); });
    return acc;
}

CMatrix WeightSequence::fejer(int n_sites, const FreqPoint& z) const {
    if (n_sites < 1) throw DomainError("weights: N must be positive");
    if (z.dims() != axes_) throw DimensionError("weights: frequency point dimension does not match the weights");
    if (kind_ == Kind::Geometric) {
        cplx f = geometric_factor(rho_, z[0], n_sites);
        if (axes_ == 2) f *= geometric_factor(rho_, z[1], n_sites);
        return f * to_complex(sigma_bar_);
    }
    CMatrix acc = CMatrix::Zero(n_, n_);
    for_each_block([&](const Lag& k, const RMatrix& sigma) {
        const double w = fejer_weight(k, axes_, n_sites);
        if (w > 0.0) acc += (w * character(z, k)) * to_complex(sigma);
    });
    return acc;
}

double WeightSequence::fejer_error_bound(int n_sites) const {
    if (n_sites < 1) throw DomainError("weights: N must be positive");
    if (kind_ == Kind::Geometric) {
        // Separable: sum_l rho^{|l|} (1 - w(l)) = total^d - weighted^d.
        const double total = (1.0 + rho_) / (1.0 - rho_);
        double weighted = 1.0;
        double rk = 1.0;
        for (int l = 1; l < n_sites; ++l) {
            rk *= rho_;
            if (rk < kNegligible) break;
            weighted += 2.0 * rk * (1.0 - static_cast<double>(l) / n_sites);
        }
        const double d_total = axes_ == 2 ? total * total : total;
        const double d_weighted = axes_ == 2 ? weighted * weighted : weighted;
        return sigma_bar_.norm() * std::max(0.0, d_total - d_weighted);
    }
    double acc = 0.0;
    for_each_block([&](const Lag& k, const RMatrix& sigma) {
        acc += sigma.norm() * (1.0 - fejer_weight(k, axes_, n_sites));
    });
    return acc;
}

// ---------------------------------------------------------------------------
// Stability and steady covariances

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Stable: return "stable";
        case Verdict::Unstable: return "unstable";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

StabilityReport check_stability(const BlockParams& params, int grid_size, double hurwitz_margin) {
    if (grid_size < 8) throw DomainError("check_stability: grid size must be at least 8");
    const int axes = params.num_axes();
    const int cap = axes == 1 ? kMaxGridPerAxis : kMaxTorusGridPerAxis;

    double abscissa = -std::numeric_limits<double>::infinity();
    int worst_i1 = 0;
    int worst_i2 = 0;
    int worst_m = grid_size;
    auto scan = [&](int m, bool refining) {
        visit_level(axes, m, refining, [&](int i1, int i2) {
            const double s = spectral_abscissa(mode_matrices(params, grid_point(axes, i1, i2, m)).a);
            if (s > abscissa) {
                abscissa = s;
                worst_i1 = i1;
                worst_i2 = i2;
                worst_m = m;
            }
        });
    };

    int m = grid_size;
    scan(m, false);
    bool converged = false;
    double last_change = std::numeric_limits<double>::infinity();
    while (2 * m <= std::max(cap, grid_size)) {
        const double before = abscissa;
        m *= 2;
        scan(m, true);
        last_change = abscissa - before;
        if (last_change < 1e-6) {
            converged = true;
            break;
        }
    }

    StabilityReport rep;
    rep.margin = -abscissa;
    rep.worst = grid_point(axes, worst_i1, worst_i2, worst_m);
    rep.grid_per_axis = m;
    if (rep.margin <= hurwitz_margin) {
        rep.verdict = Verdict::Unstable;
    } else if (converged || rep.margin > last_change + hurwitz_margin) {
        rep.verdict = Verdict::Stable;
    } else {
        rep.verdict = Verdict::Inconclusive;
    }
    return rep;
}

CMatrix steady_covariance(const BlockParams& params, const FreqPoint& z, const CMatrix& noise_intensity) {
    const ModeMatrices mm = mode_matrices(params, z);
    if (!is_hurwitz(mm.a)) {
        throw StabilityError("steady_covariance: mode matrix not Hurwitz at " + describe(z), z[0], z[1]);
    }
    const CMatrix forcing = mm.b * noise_intensity * mm.b.adjoint();
    return hermitize(solve_sylvester(mm.a, mm.a.adjoint(), forcing));
}

CMatrix steady_covariance(const BlockParams& params, const FreqPoint& z) {
    return steady_covariance(params, z, params.ito_matrix());
}

CMatrix commutator_part(const BlockParams& params, const FreqPoint& z) {
    const CMatrix s = steady_covariance(params, z);
    const CMatrix s_inv = steady_covariance(params, z.inverse());
    return (s - s_inv.transpose()) / cplx(0.0, 2.0);
}

// ---------------------------------------------------------------------------
// Costs

CostResult finite_cost(const BlockParams& params, const WeightSequence& w, int n_sites) {
    if (n_sites < 1) throw DomainError("finite_cost: N must be positive");
    const int axes = params.num_axes();
    if (w.axes() != axes) throw ConfigError("finite_cost: weights and model have different numbers of axes");
    if (w.n() != params.n()) throw DimensionError("finite_cost: weight blocks do not match the state dimension");

    CostResult res;
    res.n_sites = n_sites;
    double sum = 0.0;
    visit_level(axes, n_sites, false, [&](int i1, int i2) {
        const FreqPoint z = grid_point(axes, i1, i2, n_sites);
        const CMatrix s = steady_covariance(params, z);
        const double tr = (w.fejer(n_sites, z) * s).trace().real();
        sum += tr;
        res.samples.push_back(ModeSample{{kTwoPi * i1 / n_sites, axes == 2 ? kTwoPi * i2 / n_sites : 0.0}, tr, s});
    });
    res.quadrature_points = static_cast<long long>(res.samples.size());
    res.cost_per_site = sum / static_cast<double>(res.quadrature_points);
    res.previous_estimate = res.cost_per_site;
    return res;
}

CostResult cost_limit(const BlockParams& params, const WeightSequence& w, const QuadratureOptions& opts) {
    const int axes = params.num_axes();
    if (w.axes() != axes) throw ConfigError("cost_limit: weights and model have different numbers of axes");
    if (w.n() != params.n()) throw DimensionError("cost_limit: weight blocks do not match the state dimension");
    if (opts.initial_grid < 2) throw DomainError("cost_limit: initial grid too small");
    require_stable(params);

    const int cap = default_cap(axes, opts.max_grid_per_axis);
    struct Raw {
        int i1, i2, m;
        double trace;
        CMatrix s;
    };
    std::vector<Raw> raw;
    double sum = 0.0;
    auto level = [&](int m, bool refining) {
        visit_level(axes, m, refining, [&](int i1, int i2) {
            const FreqPoint z = grid_point(axes, i1, i2, m);
            const CMatrix s = steady_covariance(params, z);
            const double tr = (w.spectrum(z) * s).trace().real();
            sum += tr;
            if (opts.keep_samples) raw.push_back(Raw{i1, i2, m, tr, s});
        });
    };
    auto points = [axes](int m) { return axes == 1 ? static_cast<double>(m) : static_cast<double>(m) * m; };

    CostResult res;
    int m = opts.initial_grid;
    level(m, false);
    double estimate = sum / points(m);
    double previous = estimate;
    res.converged = false;
    while (2 * m <= cap) {
        m *= 2;
        level(m, true);
        previous = estimate;
        estimate = sum / points(m);
        if (std::abs(estimate - previous) < opts.tolerance) {
            res.converged = true;
            break;
        }
    }
    res.cost_per_site = estimate;
    res.previous_estimate = previous;
    res.error_estimate = std::abs(estimate - previous);
    res.quadrature_points = static_cast<long long>(points(m));

    if (opts.keep_samples) {
        std::vector<std::pair<std::pair<long long, long long>, std::size_t>> order;
        order.reserve(raw.size());
        for (std::size_t k = 0; k < raw.size(); ++k) {
            const long long f = m / raw[k].m;
            order.push_back({{raw[k].i1 * f, raw[k].i2 * f}, k});
        }
        std::sort(order.begin(), order.end());
        res.samples.reserve(order.size());
        for (const auto& [idx, k] : order) {
            res.samples.push_back(ModeSample{{kTwoPi * static_cast<double>(idx.first) / m,
                                              axes == 2 ? kTwoPi * static_cast<double>(idx.second) / m : 0.0},
                                             raw[k].trace, std::move(raw[k].s)});
        }
    }
    return res;
}

namespace {

CMatrix spatial_coefficient(const BlockParams& params, const Lag& lag, double tol) {
    require_stable(params);
    const int axes = params.num_axes();
    const int cap = default_cap(axes, 0);
    const int reach = std::max(std::abs(lag[0]), std::abs(lag[1]));
    int m = 16;
    while (m < 4 * (reach + 1)) m *= 2;

    const Eigen::Index n = params.n();
    CMatrix sum = CMatrix::Zero(n, n);
    auto level = [&](int mm, bool refining) {
        visit_level(axes, mm, refining, [&](int i1, int i2) {
            const FreqPoint z = grid_point(axes, i1, i2, mm);
            // e^{i j phi} = z^j
            cplx phase = std::pow(z[0], lag[0]);
            if (axes == 2) phase *= std::pow(z[1], lag[1]);
            sum += phase * steady_covariance(params, z);
        });
    };
    auto points = [axes](int mm) { return axes == 1 ? static_cast<double>(mm) : static_cast<double>(mm) * mm; };

    level(m, false);
    CMatrix estimate = sum / points(m);
    while (2 * m <= cap) {
        m *= 2;
        level(m, true);
        const CMatrix next = sum / points(m);
        const double change = (next - estimate).norm();
        estimate = next;
        if (change <= tol * std::max(1.0, estimate.norm())) return estimate;
    }
    throw InconclusiveError("spatial_covariance: quadrature did not converge on a " + std::to_string(m) +
                            "-point grid");
}

}  // namespace

CMatrix spatial_covariance(const BlockParams& params, int lag, double tol) {
    if (params.num_axes() != 1) throw DimensionError("spatial_covariance: model is a 2-D lattice, give two lags");
    return spatial_coefficient(params, {lag, 0}, tol);
}

CMatrix spatial_covariance(const BlockParams& params, int lag1, int lag2, double tol) {
    if (params.num_axes() != 2) throw DimensionError("spatial_covariance: model is a chain, give one lag");
    return spatial_coefficient(params, {lag1, lag2}, tol);
}

}  // namespace qnet
