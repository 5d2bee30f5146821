#include "tierflow/checkpoint.hpp"

#include "tierflow/error.hpp"
#include "tierflow/io.hpp"

namespace tierflow {

namespace detail {

namespace {

void append_array(std::string& out, std::span<const double> values) {
  out += '[';
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_exact(values[i]);
  }
  out += ']';
}

std::vector<double> read_array(const nlohmann::json& doc, const char* key) {
  const auto& arr = doc.at(key);
  if (!arr.is_array()) throw DataError(std::string("checkpoint: '") + key + "' is not an array");
  std::vector<double> values;
  values.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_number()) throw DataError(std::string("checkpoint: non-numeric entry in ") + key);
    values.push_back(v.get<double>());
  }
  return values;
}

}  // namespace

void append_layer_json(std::string& out, const DenseLayer& layer) {
  out += "{\"rows\":" + std::to_string(layer.out_dim());
  out += ",\"cols\":" + std::to_string(layer.in_dim());
  out += ",\"activation\":\"" + std::string(to_string(layer.activation())) + "\"";
  out += ",\"weights\":";
  append_array(out, layer.weights().values());
  out += ",\"biases\":";
  append_array(out, layer.biases());
  out += '}';
}

void append_network_json(std::string& out, const DenseNetwork& net) {
  out += "{\"input_dim\":" + std::to_string(net.input_dim()) + ",\"layers\":[";
  for (std::size_t i = 0; i < net.layers().size(); ++i) {
    if (i) out += ",\n";
    append_layer_json(out, net.layer(i));
  }
  out += "]}";
}

DenseLayer layer_from_json(const nlohmann::json& doc) {
  try {
    const auto rows = doc.at("rows").get<std::size_t>();
    const auto cols = doc.at("cols").get<std::size_t>();
    const auto act = parse_activation(doc.at("activation").get<std::string>());
    return DenseLayer(Tensor2(rows, cols, read_array(doc, "weights")),
                      read_array(doc, "biases"), act);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint layer: ") + e.what());
  } catch (const ShapeError& e) {
    throw DataError(std::string("checkpoint layer: ") + e.what());
  }
}

}  // namespace detail

std::string network_to_json(const DenseNetwork& net) {
  std::string out;
  detail::append_network_json(out, net);
  out += '\n';
  return out;
}

DenseNetwork network_from_json(const nlohmann::json& doc) {
  try {
    std::vector<DenseLayer> layers;
    for (const auto& l : doc.at("layers")) layers.push_back(detail::layer_from_json(l));
    return DenseNetwork(doc.at("input_dim").get<std::size_t>(), std::move(layers));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  } catch (const ShapeError& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }
}

DenseNetwork parse_network_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }
  return network_from_json(doc);
}

void save_network(const DenseNetwork& net, const std::filesystem::path& path) {
  write_text_file(path, network_to_json(net));
}

DenseNetwork load_network(const std::filesystem::path& path) {
  return parse_network_json(read_text_file(path));
}

}  // namespace tierflow
