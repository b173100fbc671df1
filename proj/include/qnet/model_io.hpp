#pragma once

// Versioned JSON model files ("schema": "qnet-model/1").

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"
#include "qnet/network_model.hpp"
#include "qnet/performance.hpp"

namespace qnet {

inline constexpr const char* kModelSchema = "qnet-model/1";

struct RunDefaults {
    std::optional<int> n_sites;
    std::optional<double> tol;
    std::optional<int> grid;
    std::optional<std::uint64_t> seed;
    std::optional<double> horizon;
};

struct Model {
    BlockParams params;
    std::optional<WeightSequence> weights;
    RunDefaults run;
};

/// Parses and validates; throws ConfigError listing every violation found.
Model parse_model(const nlohmann::json& doc);
Model load_model(const std::string& path);

nlohmann::json model_to_json(const Model& model);

nlohmann::json matrix_to_json(const RMatrix& m);
RMatrix matrix_from_json(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols, const std::string& name);

}  // namespace qnet
