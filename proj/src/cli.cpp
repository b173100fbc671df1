#include "qnet/cli.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qnet/errors.hpp"
#include "qnet/frequency.hpp"
#include "qnet/instances.hpp"
#include "qnet/model_io.hpp"
#include "qnet/performance.hpp"
#include "qnet/realizability.hpp"
#include "qnet/simulate.hpp"

namespace qnet {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Options {
    std::string model;
    std::string out_dir = ".";
    int n_sites = 0;
    std::string theorem;
    int grid = 0;
    double tol = 0.0;
    std::uint64_t seed = 0;
    double horizon = 0.0;
    bool limit = false;
    bool steady = false;
    std::string ns = "8,16,32,64";
    std::string kind = "random";
    int n = 2;
    int m0 = 2;
    int m_plus = 1;
    int m_minus = 1;
    int axes = 1;
    std::string output;
};

struct Given {
    CLI::Option* n_sites = nullptr;
    CLI::Option* tol = nullptr;
    CLI::Option* grid = nullptr;
    CLI::Option* horizon = nullptr;
    CLI::Option* seed = nullptr;
    CLI::Option* m0 = nullptr;
};

bool given(const CLI::Option* o) { return o != nullptr && o->count() > 0; }

std::string num(double x) { return fmt::format("{:.17g}", x); }

std::filesystem::path prepare_dir(const std::string& dir) {
    std::filesystem::path p(dir);
    std::error_code ec;
    std::filesystem::create_directories(p, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
    return p;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write '" + path.string() + "'");
    os << content;
}

void write_json(const std::filesystem::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

std::string theta_source(Model& model) {
    if (model.params.theta) return "model";
    if (model.params.num_axes() != 1) throw ConfigError("Theta is required for 2-D lattices");
    const ThetaSolution sol = solve_theta(model.params);
    model.params.theta = sol.theta;
    return sol.degenerate ? "solved (minimum norm, degenerate)" : "solved";
}

json report_json(const PRReport& r) {
    json res = json::array();
    for (const auto& c : r.residuals) res.push_back({{"label", c.label}, {"norm", c.norm}});
    return {{"theorem", r.theorem},       {"pass", r.pass},
            {"tolerance", r.tolerance},   {"scale", r.scale},
            {"worst_offender", r.worst_offender}, {"worst_residual", r.worst_residual},
            {"residuals", res}};
}

void print_report(std::ostream& out, const PRReport& r) {
    fmt::print(out, "Theorem {}: {} (tolerance {:.1e} x scale {:.6g})\n", r.theorem, r.pass ? "PASS" : "FAIL",
               r.tolerance, r.scale);
    for (const auto& c : r.residuals) {
        const bool ok = c.norm <= r.tolerance * r.scale;
        fmt::print(out, "  {:<28} {:>12.4e}  {}\n", c.label, c.norm, ok ? "ok" : "VIOLATED");
    }
    fmt::print(out, "  worst: {} ({:.4e})\n", r.worst_offender, r.worst_residual);
}

std::string angle_header(int axes) { return axes == 1 ? "phi" : "phi1,phi2"; }

std::string angle_cells(int axes, const std::array<double, 2>& a) {
    return axes == 1 ? num(a[0]) : num(a[0]) + "," + num(a[1]);
}

const WeightSequence& require_weights(const Model& model) {
    if (!model.weights) throw ConfigError("the model has no weights section");
    return *model.weights;
}

json cost_json(const CostResult& c) {
    json j;
    if (c.n_sites) {
        j["mode"] = "finite";
        j["N"] = *c.n_sites;
    } else {
        j["mode"] = "limit";
        j["previous_estimate"] = c.previous_estimate;
    }
    j["cost_per_site"] = c.cost_per_site;
    j["quadrature_points"] = c.quadrature_points;
    j["error_estimate"] = c.error_estimate;
    j["converged"] = c.converged;
    return j;
}

std::string samples_csv(const CostResult& c, int axes) {
    std::string s = angle_header(axes) + ",trace,cumulative\n";
    double acc = 0.0;
    const double total = static_cast<double>(c.quadrature_points);
    for (const auto& m : c.samples) {
        acc += m.trace;
        s += angle_cells(axes, m.angle) + "," + num(m.trace) + "," + num(acc / total) + "\n";
    }
    return s;
}

// ---------------------------------------------------------------------------

int cmd_check_pr(const Options& o, const Given& g, std::ostream& out) {
    Model model = load_model(o.model);
    const BlockParams& p = model.params;
    const std::string src = theta_source(model);
    const int n_sites = given(g.n_sites) ? o.n_sites
                        : model.run.n_sites ? *model.run.n_sites
                                            : FragmentSpec::minimal_equivalent_size(p.n());
    if (n_sites < 1) throw DomainError("--N must be positive");
    const double tol = given(g.tol) ? o.tol : model.run.tol.value_or(kDefaultPrTolerance);
    std::string theorem = o.theorem.empty() ? (p.num_axes() == 1 ? "both" : "1") : o.theorem;
    if (theorem != "1" && theorem != "2" && theorem != "both") throw ConfigError("--theorem must be 1, 2 or both");

    std::vector<PRReport> reports;
    if (theorem == "1" || theorem == "both") reports.push_back(check_theorem1(p, n_sites, tol));
    if (theorem == "2" || theorem == "both") reports.push_back(check_theorem2(p, tol));

    bool pass = true;
    json arr = json::array();
    fmt::print(out, "N = {}, Theta: {}\n", n_sites, src);
    for (const auto& r : reports) {
        pass = pass && r.pass;
        arr.push_back(report_json(r));
        print_report(out, r);
    }
    json doc{{"N", n_sites}, {"theta_source", src}, {"pass", pass}, {"reports", arr}};
    doc["theta"] = matrix_to_json(*p.theta);
    if (reports.size() == 2) {
        doc["verdicts_agree"] = reports[0].pass == reports[1].pass;
        fmt::print(out, "verdicts {}\n", reports[0].pass == reports[1].pass ? "agree" : "DISAGREE");
    }
    write_json(prepare_dir(o.out_dir) / "check_pr.json", doc);
    return pass ? exit_code::kOk : exit_code::kPrFail;
}

int cmd_cost(const Options& o, const Given& g, std::ostream& out) {
    const Model model = load_model(o.model);
    const WeightSequence& w = require_weights(model);
    const int axes = model.params.num_axes();
    const bool finite = !o.limit && (given(g.n_sites) || model.run.n_sites.has_value());

    CostResult c;
    json doc;
    if (finite) {
        const int n_sites = given(g.n_sites) ? o.n_sites : *model.run.n_sites;
        c = finite_cost(model.params, w, n_sites);
        doc = cost_json(c);
        doc["weight_truncation_bound"] = w.fejer_error_bound(n_sites);
        fmt::print(out, "cost per site, N = {}: {:.12g}\n", n_sites, c.cost_per_site);
    } else {
        QuadratureOptions q;
        if (given(g.tol)) q.tolerance = o.tol;
        c = cost_limit(model.params, w, q);
        doc = cost_json(c);
        doc["tolerance"] = q.tolerance;
        fmt::print(out, "cost per site, limit: {:.12g} ({} points, last change {:.3e})\n", c.cost_per_site,
                   c.quadrature_points, c.error_estimate);
    }
    const auto dir = prepare_dir(o.out_dir);
    write_json(dir / "cost.json", doc);
    write_file(dir / "cost_samples.csv", samples_csv(c, axes));
    if (!c.converged) {
        fmt::print(out, "quadrature did not converge: last two values {:.17g} and {:.17g}\n", c.previous_estimate,
                   c.cost_per_site);
        return exit_code::kInconclusive;
    }
    return exit_code::kOk;
}

std::vector<double> sorted_real(const CVector& v) {
    std::vector<double> r;
    r.reserve(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) r.push_back(v(i).real());
    std::sort(r.begin(), r.end());
    return r;
}

int cmd_spectrum(const Options& o, const Given& g, std::ostream& out) {
    Model model = load_model(o.model);
    const int grid = given(g.grid) ? o.grid : model.run.grid.value_or(64);
    if (grid < 8) throw DomainError("--grid must be at least 8");
    const BlockParams& p = model.params;
    const int axes = p.num_axes();
    const Eigen::Index n = p.n();
    if (!p.theta && axes == 1) theta_source(model);

    std::string csv = angle_header(axes) + ",hurwitz";
    for (Eigen::Index i = 1; i <= n; ++i) csv += ",re_eig_a_" + std::to_string(i);
    for (Eigen::Index i = 1; i <= n; ++i) csv += ",eig_s_" + std::to_string(i);
    csv += ",im_s_minus_theta\n";

    int unstable = 0;
    double worst_dev = 0.0;
    const int rows = axes == 1 ? grid : grid * grid;
    for (int idx = 0; idx < rows; ++idx) {
        const int i1 = axes == 1 ? idx : idx / grid;
        const int i2 = axes == 1 ? 0 : idx % grid;
        const FreqPoint z = axes == 1 ? FreqPoint::on_circle(root_of_unity(i1, grid))
                                      : FreqPoint::on_torus(root_of_unity(i1, grid), root_of_unity(i2, grid));
        const std::array<double, 2> ang{2.0 * std::numbers::pi * i1 / grid, 2.0 * std::numbers::pi * i2 / grid};
        const ModeMatrices mm = mode_matrices(p, z);
        const bool hurwitz = is_hurwitz(mm.a);
        csv += angle_cells(axes, ang) + (hurwitz ? ",1" : ",0");
        for (double x : sorted_real(eigenvalues(mm.a))) csv += "," + num(x);
        if (hurwitz) {
            const CMatrix s = steady_covariance(p, z);
            for (double x : sorted_real(eigenvalues(hermitize(s)))) csv += "," + num(x);
            double dev = kNaN;
            if (p.theta) {
                dev = (commutator_part(p, z) - to_complex(*p.theta)).norm();
                worst_dev = std::max(worst_dev, dev);
            }
            csv += "," + num(dev) + "\n";
        } else {
            ++unstable;
            for (Eigen::Index i = 0; i < n; ++i) csv += "," + num(kNaN);
            csv += "," + num(kNaN) + "\n";
        }
    }
    const auto dir = prepare_dir(o.out_dir);
    write_file(dir / "spectrum.csv", csv);
    fmt::print(out, "{} grid points, {} unstable, max |Im S_z - Theta| = {:.3e}\n", rows, unstable, worst_dev);
    return unstable > 0 ? exit_code::kStability : exit_code::kOk;
}

int cmd_simulate(const Options& o, const Given& g, std::ostream& out) {
    const Model model = load_model(o.model);
    const BlockParams& p = model.params;
    const int n_sites = given(g.n_sites) ? o.n_sites : model.run.n_sites.value_or(4);
    const double horizon = given(g.horizon) ? o.horizon : model.run.horizon.value_or(20.0);
    if (n_sites < 1) throw DomainError("--N must be positive");

    auto s0 = zero_moments(p, n_sites);
    if (n_sites >= 2) s0[{0, 1}] = CMatrix::Zero(p.n(), p.n());
    IntegratorOptions opts;
    opts.stop_at_steady_state = o.steady;
    if (given(g.tol)) opts.rtol = o.tol;
    const MomentTrajectory traj = integrate_moments(p, n_sites, s0, horizon, opts);

    std::string csv = "t";
    for (const auto& [key, v] : s0) csv += fmt::format(",norm_s_{}_{}", key.first, key.second);
    csv += "\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        csv += num(traj.times[i]);
        for (const auto& [key, v] : traj.values[i]) csv += "," + num(v.norm());
        csv += "\n";
    }

    json doc{{"N", n_sites},
             {"horizon", horizon},
             {"final_time", traj.times.back()},
             {"accepted_steps", traj.accepted_steps},
             {"rejected_steps", traj.rejected_steps},
             {"reached_steady_state", traj.reached_steady_state},
             {"step_policy", traj.step_policy}};
    try {
        double dev = 0.0;
        for (const auto& [key, v] : traj.final_values()) {
            if (key.first != key.second) continue;
            const CMatrix s = steady_covariance(p, FreqPoint::on_circle(root_of_unity(key.first, n_sites)));
            dev = std::max(dev, (v - static_cast<double>(n_sites) * s).norm());
        }
        doc["steady_deviation"] = dev;
        fmt::print(out, "integrated to t = {:.6g} in {} steps; max ||S_zz - N S_z|| = {:.3e}\n", traj.times.back(),
                   traj.accepted_steps, dev);
    } catch (const StabilityError&) {
        doc["steady_deviation"] = nullptr;
        fmt::print(out, "integrated to t = {:.6g} in {} steps; some mode is not Hurwitz\n", traj.times.back(),
                   traj.accepted_steps);
    }
    const auto dir = prepare_dir(o.out_dir);
    write_file(dir / "simulate.csv", csv);
    write_json(dir / "simulate.json", doc);
    return exit_code::kOk;
}

int cmd_gen(const Options& o, const Given& g, std::ostream& out) {
    if (o.axes != 1 && o.axes != 2) throw DomainError("--axes must be 1 or 2");
    std::vector<std::pair<int, int>> axes(static_cast<std::size_t>(o.axes), {o.m_plus, o.m_minus});
    Model model;
    if (o.kind == "random" || o.kind == "random-stable") {
        const InstanceDims dims{o.n, o.m0, axes};
        model.params = o.kind == "random" ? random_instance(o.seed, dims) : random_stable_instance(o.seed, dims);
    } else if (o.kind == "pr-consistent") {
        if (given(g.m0)) throw ConfigError("--m0 is derived for pr-consistent instances; do not pass it");
        model.params = pr_consistent_instance(o.seed, o.n, axes);
    } else if (o.kind == "aliasing-witness") {
        model.params = aliasing_witness_instance(o.seed);
    } else {
        throw ConfigError("--kind must be random, random-stable, pr-consistent or aliasing-witness");
    }
    const auto problems = validate(model.params);
    if (!problems.empty()) throw NumericError("generated instance failed validation: " + problems.front());
    const int n = static_cast<int>(model.params.n());
    model.weights = WeightSequence::geometric(model.params.num_axes(), 0.5, RMatrix::Identity(n, n));
    model.run.n_sites = FragmentSpec::minimal_equivalent_size(n);
    model.run.seed = o.seed;

    const std::filesystem::path path =
        o.output.empty() ? prepare_dir(o.out_dir) / "model.json" : std::filesystem::path(o.output);
    if (!o.output.empty() && path.has_parent_path()) prepare_dir(path.parent_path().string());
    write_json(path, model_to_json(model));
    fmt::print(out, "wrote {} ({} instance, n = {}, m0 = {}, seed {})\n", path.string(), o.kind, n,
               model.params.m0(), o.seed);
    return exit_code::kOk;
}

int cmd_sweep(const Options& o, const Given& g, std::ostream& out) {
    const Model model = load_model(o.model);
    const WeightSequence& w = require_weights(model);
    std::vector<int> ns;
    std::stringstream ss(o.ns);
    for (std::string tok; std::getline(ss, tok, ',');) {
        try {
            ns.push_back(std::stoi(tok));
        } catch (const std::exception&) {
            throw ConfigError("--Ns must be a comma-separated list of integers");
        }
        if (ns.back() < 1) throw DomainError("--Ns entries must be positive");
    }
    QuadratureOptions q;
    if (given(g.tol)) q.tolerance = o.tol;
    q.keep_samples = false;
    const CostResult lim = cost_limit(model.params, w, q);

    std::string csv = "N,cost_per_site,limit,abs_error,abs_error_times_N\n";
    json rows = json::array();
    fmt::print(out, "{:>6} {:>22} {:>12}\n", "N", "cost per site", "|error|");
    for (int n_sites : ns) {
        const CostResult c = finite_cost(model.params, w, n_sites);
        const double err = std::abs(c.cost_per_site - lim.cost_per_site);
        csv += fmt::format("{},{},{},{},{}\n", n_sites, num(c.cost_per_site), num(lim.cost_per_site), num(err),
                           num(err * n_sites));
        rows.push_back({{"N", n_sites}, {"cost_per_site", c.cost_per_site}, {"abs_error", err}});
        fmt::print(out, "{:>6} {:>22.15g} {:>12.4e}\n", n_sites, c.cost_per_site, err);
    }
    fmt::print(out, "{:>6} {:>22.15g}\n", "limit", lim.cost_per_site);
    const auto dir = prepare_dir(o.out_dir);
    write_file(dir / "sweep.csv", csv);
    write_json(dir / "sweep.json", {{"limit", cost_json(lim)}, {"finite", rows}});
    return lim.converged ? exit_code::kOk : exit_code::kInconclusive;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"qnet: translation-invariant networks of linear quantum stochastic systems"};
    app.require_subcommand(1);
    Options o;
    Given g;

    auto common = [&](CLI::App* sub, bool needs_model) {
        if (needs_model) sub->add_option("--model", o.model, "model file (JSON, schema qnet-model/1)")->required();
        sub->add_option("--out-dir", o.out_dir, "directory for JSON/CSV results");
    };

    auto* check = app.add_subcommand("check-pr", "physical realizability on a periodic fragment");
    common(check, true);
    g.n_sites = check->add_option("--N", o.n_sites, "sites per axis");
    check->add_option("--theorem", o.theorem, "1, 2 or both");
    g.tol = check->add_option("--tol", o.tol, "relative pass tolerance");

    auto* cost = app.add_subcommand("cost", "steady LQG cost per site");
    common(cost, true);
    auto* cost_n = cost->add_option("--N", o.n_sites, "finite fragment size");
    cost->add_flag("--limit", o.limit, "thermodynamic limit (default unless N is given)");
    auto* cost_tol = cost->add_option("--tol", o.tol, "quadrature tolerance for the limit");

    auto* spec = app.add_subcommand("spectrum", "mode spectra and steady covariances on a grid");
    common(spec, true);
    g.grid = spec->add_option("--grid", o.grid, "grid points per axis (>= 8)");

    auto* sim = app.add_subcommand("simulate", "integrate the per-mode moment ODE");
    common(sim, true);
    auto* sim_n = sim->add_option("--N", o.n_sites, "sites");
    g.horizon = sim->add_option("--horizon", o.horizon, "final time");
    auto* sim_tol = sim->add_option("--tol", o.tol, "relative step tolerance");
    sim->add_flag("--steady", o.steady, "stop once the moments are stationary");

    auto* gen = app.add_subcommand("gen", "write a seeded model file");
    common(gen, false);
    g.seed = gen->add_option("--seed", o.seed, "random seed");
    gen->add_option("--kind", o.kind, "random, random-stable, pr-consistent or aliasing-witness");
    gen->add_option("--n", o.n, "state dimension");
    g.m0 = gen->add_option("--m0", o.m0, "noise dimension (random kinds)");
    gen->add_option("--m-plus", o.m_plus, "forward channels per axis");
    gen->add_option("--m-minus", o.m_minus, "backward channels per axis");
    gen->add_option("--axes", o.axes, "1 (chain) or 2 (lattice)");
    gen->add_option("--output", o.output, "model path (default <out-dir>/model.json)");

    auto* sweep = app.add_subcommand("sweep", "finite-N costs against the limit");
    common(sweep, true);
    sweep->add_option("--Ns", o.ns, "comma-separated fragment sizes");
    auto* sweep_tol = sweep->add_option("--tol", o.tol, "quadrature tolerance for the limit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? exit_code::kOk : exit_code::kInput;
    }

    try {
        if (*check) return cmd_check_pr(o, g, out);
        if (*cost) {
            g.n_sites = cost_n;
            g.tol = cost_tol;
            return cmd_cost(o, g, out);
        }
        if (*spec) return cmd_spectrum(o, g, out);
        if (*sim) {
            g.n_sites = sim_n;
            g.tol = sim_tol;
            return cmd_simulate(o, g, out);
        }
        if (*gen) return cmd_gen(o, g, out);
        if (*sweep) {
            g.tol = sweep_tol;
            return cmd_sweep(o, g, out);
        }
    } catch (const StabilityError& e) {
        fmt::print(err, "stability error: {}\n", e.what());
        return exit_code::kStability;
    } catch (const InconclusiveError& e) {
        fmt::print(err, "inconclusive: {}\n", e.what());
        return exit_code::kInconclusive;
    } catch (const SolvabilityError& e) {
        fmt::print(err, "numeric error: {} (smallest singular value {:.3e})\n", e.what(), e.smallest_singular_value());
        return exit_code::kInconclusive;
    } catch (const IntegrationError& e) {
        fmt::print(err, "integration error: {} (last good time {:.6g})\n", e.what(), e.last_good_time());
        return exit_code::kInconclusive;
    } catch (const NumericError& e) {
        fmt::print(err, "numeric error: {}\n", e.what());
        return exit_code::kInconclusive;
    } catch (const Error& e) {
        fmt::print(err, "error: {}\n", e.what());
        return exit_code::kInput;
    }
    return exit_code::kInput;
}

}  // namespace qnet
