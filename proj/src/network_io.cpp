#include "nnreach/network_io.hpp"

#include "json_util.hpp"

#include <fstream>
#include <sstream>

namespace nnreach {

namespace json_util {

json read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open file: " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("parse error in " + path.string() + ": " + e.what());
    }
}

} // namespace json_util

using json_util::json;

namespace {

Network network_from_json(const json& doc)
{
    const json& layers = json_util::field(doc, "layers", "network");
    if (!layers.is_array()) throw ConfigError("network: \"layers\" must be an array");
    std::vector<DenseLayer<double>> hidden;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const std::string where = "network.layers[" + std::to_string(i) + "]";
        const json& l = layers[i];
        DenseLayer<double> layer;
        layer.weight = json_util::to_matrix(json_util::field(l, "W", where), where + ".W");
        layer.bias = json_util::to_vector(json_util::field(l, "b", where), where + ".b");
        const json& act = json_util::field(l, "act", where);
        if (!act.is_string()) throw ConfigError(where + ".act must be a string");
        auto parsed = parse_activation(act.get<std::string>());
        if (!parsed) throw ConfigError(where + ": unknown activation \"" + act.get<std::string>() + "\"");
        layer.activation = *parsed;
        hidden.push_back(std::move(layer));
    }
    const json& out = json_util::field(doc, "out", "network");
    MatrixXd w = json_util::to_matrix(json_util::field(out, "W", "network.out"), "network.out.W");
    VectorXd b = json_util::to_vector(json_util::field(out, "b", "network.out"), "network.out.b");
    try {
        return Network(std::move(hidden), std::move(w), std::move(b));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("network: ") + e.what());
    }
}

} // namespace

Network parse_network(const std::string& json_text)
{
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("network: parse error: ") + e.what());
    }
    return network_from_json(doc);
}

Network load_network(const std::filesystem::path& path)
{
    try {
        return network_from_json(json_util::read_json_file(path));
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::string network_to_json(const Network& net)
{
    json layers = json::array();
    for (const auto& l : net.hidden())
        layers.push_back(json{{"W", json_util::from_matrix(l.weight)},
                              {"b", json_util::from_vector(l.bias)},
                              {"act", std::string(to_string(l.activation))}});
    json doc{{"layers", layers},
             {"out", json{{"W", json_util::from_matrix(net.out_weight())},
                          {"b", json_util::from_vector(net.out_bias())}}}};
    return doc.dump();
}

void save_network(const Network& net, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write file: " + path.string());
    out << network_to_json(net) << '\n';
}

} // namespace nnreach
