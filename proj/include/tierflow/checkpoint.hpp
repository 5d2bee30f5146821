#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "tierflow/network.hpp"

namespace tierflow {

// Checkpoint documents:
//   {"input_dim": N,
//    "layers": [{"rows": R, "cols": C, "activation": "relu",
//                "weights": [row-major R*C], "biases": [R]}, ...]}
// Floats are written with 17 significant digits so a reload is exact.

std::string network_to_json(const DenseNetwork& net);
DenseNetwork network_from_json(const nlohmann::json& doc);
DenseNetwork parse_network_json(std::string_view text);

void save_network(const DenseNetwork& net, const std::filesystem::path& path);
DenseNetwork load_network(const std::filesystem::path& path);

namespace detail {
void append_layer_json(std::string& out, const DenseLayer& layer);
void append_network_json(std::string& out, const DenseNetwork& net);
DenseLayer layer_from_json(const nlohmann::json& doc);
}  // namespace detail

}  // namespace tierflow
