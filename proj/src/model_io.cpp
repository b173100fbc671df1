#include "qnet/model_io.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include "qnet/errors.hpp"

namespace qnet {

using nlohmann::json;

namespace {

struct Collector {
    std::vector<std::string> errors;
    void add(std::string msg) { errors.push_back(std::move(msg)); }
};

std::string shape(Eigen::Index r, Eigen::Index c) {
    return std::to_string(r) + "x" + std::to_string(c);
}

RMatrix read_matrix(const json& j, Eigen::Index rows, Eigen::Index cols, const std::string& name, Collector& col) {
    RMatrix m = RMatrix::Zero(rows, cols);
    if (!j.is_array()) {
        col.add(name + ": expected an array of rows");
        return m;
    }
    if (static_cast<Eigen::Index>(j.size()) != rows) {
        col.add(name + ": expected " + shape(rows, cols) + ", got " + std::to_string(j.size()) + " rows");
        return m;
    }
    for (Eigen::Index r = 0; r < rows; ++r) {
        const json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            col.add(name + ": row " + std::to_string(r) + " should have " + std::to_string(cols) + " entries");
            return m;
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            const json& v = row[static_cast<std::size_t>(c)];
            if (!v.is_number()) {
                col.add(name + ": entry (" + std::to_string(r) + "," + std::to_string(c) + ") is not a number");
                return m;
            }
            m(r, c) = v.get<double>();
        }
    }
    return m;
}

const json* member(const json& obj, const char* key) {
    if (!obj.is_object()) return nullptr;
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

int read_count(const json& obj, const char* key, const std::string& where, Collector& col, int min_value) {
    const json* v = member(obj, key);
    if (!v || !v->is_number_integer()) {
        col.add(where + "." + key + ": missing or not an integer");
        return min_value;
    }
    const int x = v->get<int>();
    if (x < min_value) {
        col.add(where + "." + key + ": must be >= " + std::to_string(min_value));
        return min_value;
    }
    return x;
}

Lag read_lag(const json& j, int axes) {
    if (axes == 1 && j.is_number_integer()) return {j.get<int>(), 0};
    if (j.is_array() && static_cast<int>(j.size()) == axes) {
        Lag k{0, 0};
        for (int a = 0; a < axes; ++a) k[static_cast<std::size_t>(a)] = j[static_cast<std::size_t>(a)].get<int>();
        return k;
    }
    throw ConfigError("weights: lag must be an integer (chains) or a pair [k1, k2] (lattices)");
}

WeightSequence read_weights(const json& w, int axes, Eigen::Index n) {
    const json* kind = member(w, "kind");
    if (!kind || !kind->is_string()) throw ConfigError("weights.kind: expected \"finite\" or \"geometric\"");
    const std::string k = kind->get<std::string>();
    Collector col;
    if (k == "geometric") {
        const json* rho = member(w, "rho");
        const json* sb = member(w, "sigma_bar");
        if (!rho || !rho->is_number()) throw ConfigError("weights.rho: missing or not a number");
        if (!sb) throw ConfigError("weights.sigma_bar: missing");
        const RMatrix s = read_matrix(*sb, n, n, "weights.sigma_bar", col);
        if (!col.errors.empty()) throw ConfigError(col.errors.front());
        return WeightSequence::geometric(axes, rho->get<double>(), s);
    }
    if (k == "finite") {
        const json* blocks = member(w, "blocks");
        if (!blocks || !blocks->is_array()) throw ConfigError("weights.blocks: expected an array");
        std::map<Lag, RMatrix> out;
        for (std::size_t i = 0; i < blocks->size(); ++i) {
            const json& b = (*blocks)[i];
            const json* lag = member(b, "lag");
            const json* sigma = member(b, "sigma");
            if (!lag || !sigma) throw ConfigError("weights.blocks[" + std::to_string(i) + "]: needs lag and sigma");
            const Lag key = read_lag(*lag, axes);
            if (out.count(key)) throw ConfigError("weights.blocks: lag given twice");
            out[key] = read_matrix(*sigma, n, n, "weights.blocks[" + std::to_string(i) + "].sigma", col);
        }
        if (!col.errors.empty()) throw ConfigError(col.errors.front());
        if (out.empty()) out[{0, 0}] = RMatrix::Zero(n, n);
        return WeightSequence::finite(axes, out);
    }
    throw ConfigError("weights.kind: unknown family '" + k + "'");
}

json lag_to_json(const Lag& k, int axes) {
    if (axes == 1) return k[0];
    return json::array({k[0], k[1]});
}

}  // namespace

json matrix_to_json(const RMatrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

RMatrix matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols, const std::string& name) {
    Collector col;
    RMatrix m = read_matrix(j, rows, cols, name, col);
    if (!col.errors.empty()) throw ConfigError(col.errors.front());
    return m;
}

Model parse_model(const json& doc) {
    try {
        if (!doc.is_object()) throw ConfigError("model: top level must be an object");
        const json* schema = member(doc, "schema");
        if (!schema || !schema->is_string() || schema->get<std::string>() != kModelSchema) {
            throw ConfigError(std::string("model: schema tag must be \"") + kModelSchema + "\"");
        }
        if (const json* bnd = member(doc, "boundary")) {
            if (!bnd->is_string() || bnd->get<std::string>() != "periodic") {
                throw ConfigError("boundary: only \"periodic\" is supported");
            }
        }

        Collector col;
        const json* dims = member(doc, "dims");
        const json* mats = member(doc, "matrices");
        if (!dims || !dims->is_object()) throw ConfigError("dims: missing section");
        if (!mats || !mats->is_object()) throw ConfigError("matrices: missing section");
        const int n = read_count(*dims, "n", "dims", col, 1);
        const int m0 = read_count(*dims, "m0", "dims", col, 1);
        const json* dax = member(*dims, "axes");
        if (!dax || !dax->is_array() || dax->empty() || dax->size() > 2) {
            throw ConfigError("dims.axes: expected one or two axis entries");
        }

        Model model;
        BlockParams& p = model.params;
        auto mat = [&](const json& obj, const char* key, Eigen::Index r, Eigen::Index c, const std::string& where) {
            const json* v = member(obj, key);
            if (!v) {
                col.add(where + key + ": missing");
                return RMatrix(RMatrix::Zero(r, c));
            }
            return read_matrix(*v, r, c, where + key, col);
        };
        p.a = mat(*mats, "A", n, n, "matrices.");
        p.b = mat(*mats, "B", n, m0, "matrices.");
        p.j = mat(*mats, "J", m0, m0, "matrices.");
        if (const json* th = member(*mats, "Theta"); th && !th->is_null()) {
            p.theta = read_matrix(*th, n, n, "matrices.Theta", col);
        }
        const json* max = member(*mats, "axes");
        if (!max || !max->is_array() || max->size() != dax->size()) {
            throw ConfigError("matrices.axes: expected one entry per axis in dims.axes");
        }
        for (std::size_t a = 0; a < dax->size(); ++a) {
            const std::string where = "dims.axes[" + std::to_string(a) + "]";
            const int mp = read_count((*dax)[a], "m_plus", where, col, 0);
            const int mm = read_count((*dax)[a], "m_minus", where, col, 0);
            const json& src = (*max)[a];
            const std::string mw = "matrices.axes[" + std::to_string(a) + "].";
            AxisCoupling ax;
            ax.c_plus = mat(src, "C_plus", mp, n, mw);
            ax.c_minus = mat(src, "C_minus", mm, n, mw);
            ax.d_plus = mat(src, "D_plus", mp, m0, mw);
            ax.d_minus = mat(src, "D_minus", mm, m0, mw);
            ax.e_plus = mat(src, "E_plus", n, mp, mw);
            ax.e_minus = mat(src, "E_minus", n, mm, mw);
            p.axes.push_back(std::move(ax));
        }
        if (col.errors.empty()) {
            for (auto& v : validate(p)) col.add(std::move(v));
        }
        if (!col.errors.empty()) {
            std::ostringstream os;
            os << "model is invalid:";
            for (const auto& e : col.errors) os << "\n  - " << e;
            throw ConfigError(os.str());
        }

        if (const json* w = member(doc, "weights"); w && !w->is_null()) {
            model.weights = read_weights(*w, p.num_axes(), n);
        }
        if (const json* run = member(doc, "run"); run && run->is_object()) {
            if (const json* v = member(*run, "N")) model.run.n_sites = v->get<int>();
            if (const json* v = member(*run, "tol")) model.run.tol = v->get<double>();
            if (const json* v = member(*run, "grid")) model.run.grid = v->get<int>();
            if (const json* v = member(*run, "seed")) model.run.seed = v->get<std::uint64_t>();
            if (const json* v = member(*run, "horizon")) model.run.horizon = v->get<double>();
        }
        return model;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }
}

Model load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open model file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("model file '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_model(doc);
}

json model_to_json(const Model& model) {
    const BlockParams& p = model.params;
    json doc;
    doc["schema"] = kModelSchema;
    doc["boundary"] = "periodic";
    json dax = json::array();
    json max = json::array();
    for (const auto& ax : p.axes) {
        dax.push_back({{"m_plus", ax.m_plus()}, {"m_minus", ax.m_minus()}});
        max.push_back({{"C_plus", matrix_to_json(ax.c_plus)},
                       {"C_minus", matrix_to_json(ax.c_minus)},
                       {"D_plus", matrix_to_json(ax.d_plus)},
                       {"D_minus", matrix_to_json(ax.d_minus)},
                       {"E_plus", matrix_to_json(ax.e_plus)},
                       {"E_minus", matrix_to_json(ax.e_minus)}});
    }
    doc["dims"] = {{"n", p.n()}, {"m0", p.m0()}, {"axes", dax}};
    json mats;
    mats["A"] = matrix_to_json(p.a);
    mats["B"] = matrix_to_json(p.b);
    mats["J"] = matrix_to_json(p.j);
    if (p.theta) mats["Theta"] = matrix_to_json(*p.theta);
    mats["axes"] = max;
    doc["matrices"] = mats;

    if (model.weights) {
        const WeightSequence& w = *model.weights;
        if (w.kind() == WeightSequence::Kind::Geometric) {
            doc["weights"] = {{"kind", "geometric"}, {"rho", w.rho()}, {"sigma_bar", matrix_to_json(w.sigma_bar())}};
        } else {
            json blocks = json::array();
            for (const auto& [k, sigma] : w.finite_blocks()) {
                if (k[0] < 0 || (k[0] == 0 && k[1] < 0)) continue;  // mirrored partner is implied
                blocks.push_back({{"lag", lag_to_json(k, w.axes())}, {"sigma", matrix_to_json(sigma)}});
            }
            doc["weights"] = {{"kind", "finite"}, {"blocks", blocks}};
        }
    }
    json run = json::object();
    if (model.run.n_sites) run["N"] = *model.run.n_sites;
    if (model.run.tol) run["tol"] = *model.run.tol;
    if (model.run.grid) run["grid"] = *model.run.grid;
    if (model.run.seed) run["seed"] = *model.run.seed;
    if (model.run.horizon) run["horizon"] = *model.run.horizon;
    doc["run"] = run;
    return doc;
}

}  // namespace qnet
