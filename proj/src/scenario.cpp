#include "nnreach/scenario.hpp"

#include "nnreach/errors.hpp"
#include "nnreach/network_io.hpp"
#include "json_util.hpp"

namespace nnreach {

using json_util::field;
using json_util::json;

namespace {

std::shared_ptr<const SystemModel> system_from_json(const json& j)
{
    const std::string where = "system";
    const auto type = field(j, "type", where).get<std::string>();
    if (type == "vehicle") {
        VehicleParams p;
        p.lf = j.value("lf", p.lf);
        p.lr = j.value("lr", p.lr);
        if (!(p.lf > 0.0) || !(p.lr > 0.0))
            throw ConfigError("system: vehicle lf and lr must be positive");
        return std::make_shared<VehicleModel>(p);
    }
    if (type == "quadrotor6d") return quadrotor6d(j.value("g", 9.8));
    if (type == "linear") {
        MatrixXd a = json_util::to_matrix(field(j, "A", where), "system.A");
        const Eigen::Index n = a.rows();
        MatrixXd b = j.contains("B") ? json_util::to_matrix(j["B"], "system.B") : MatrixXd(n, 0);
        MatrixXd c = j.contains("C") ? json_util::to_matrix(j["C"], "system.C") : MatrixXd(n, 0);
        VectorXd offset =
            j.contains("c") ? json_util::to_vector(j["c"], "system.c") : VectorXd::Zero(n);
        try {
            return std::make_shared<LinearSystemModel>(std::move(a), std::move(b), std::move(c),
                                                       std::move(offset),
                                                       j.value("name", std::string("linear")));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("system: ") + e.what());
        }
    }
    throw ConfigError("system: unknown type \"" + type + "\" (expected vehicle, quadrotor6d or linear)");
}

template <typename Enum, typename Parse>
Enum parse_enum(const json& j, const char* key, Enum fallback, Parse parse, const char* allowed)
{
    if (!j.contains(key)) return fallback;
    const auto text = j.at(key).get<std::string>();
    const auto v = parse(text);
    if (!v) throw ConfigError(std::string(key) + ": unknown value \"" + text + "\" (expected " + allowed + ")");
    return *v;
}

int positive_int(const json& j, const char* key, int fallback)
{
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number_integer()) throw ConfigError(std::string(key) + " must be an integer");
    return j.at(key).get<int>();
}

} // namespace

std::shared_ptr<const LinearSystemModel> quadrotor6d(double g)
{
    MatrixXd a = MatrixXd::Zero(6, 6);
    a.topRightCorner(3, 3) = MatrixXd::Identity(3, 3);
    MatrixXd b = MatrixXd::Zero(6, 3);
    b(3, 0) = g;
    b(4, 1) = -g;
    b(5, 2) = 1.0;
    VectorXd c = VectorXd::Zero(6);
    c(5) = -g;
    return std::make_shared<LinearSystemModel>(a, b, MatrixXd(6, 0), c, "quadrotor6d");
}

std::shared_ptr<const SystemModel> make_system(const std::string& json_text)
{
    try {
        return system_from_json(json::parse(json_text));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("system: ") + e.what());
    }
}

namespace {

ScenarioConfig scenario_from_json(const json& j, const std::filesystem::path& base_dir)
{
    try {
        ScenarioConfig sc;
        sc.name = j.value("name", std::string("scenario"));
        sc.system = system_from_json(field(j, "system", "scenario"));

        sc.network_path = field(j, "network", "scenario").get<std::string>();
        std::filesystem::path net_path(sc.network_path);
        if (net_path.is_relative()) net_path = base_dir / net_path;
        sc.network = std::make_shared<const Network>(load_network(net_path));

        sc.initial_set = json_util::to_box(field(j, "initial_set", "scenario"), "initial_set");
        if (j.contains("disturbance"))
            sc.disturbance = json_util::to_box(j["disturbance"], "disturbance");
        else
            sc.disturbance = BoxXd(VectorXd(0), VectorXd(0));

        sc.horizon = field(j, "horizon", "scenario").get<double>();
        const double dt = field(j, "dt", "scenario").get<double>();
        sc.integrator = IntegratorConfig::defaults(dt);
        if (j.contains("integrator")) {
            const json& ij = j["integrator"];
            sc.integrator.method = parse_enum(ij, "method", sc.integrator.method,
                                              parse_integrator, "euler or rk4");
            sc.integrator.step = ij.value("step", sc.integrator.step);
        }

        sc.partitions = positive_int(j, "partitions", 1);
        sc.subpartitions = positive_int(j, "subpartitions", 1);
        sc.strategy = parse_enum(j, "strategy", Strategy::frozen_hybrid, parse_strategy,
                                 "global, hybrid, local, frozen-hybrid, linear or linear-hybrid");

        if (j.contains("crown")) {
            const json& cj = j["crown"];
            sc.crown.intermediate = parse_enum(
                cj, "intermediate", sc.crown.intermediate,
                [](const std::string& s) -> std::optional<IntermediateBounds> {
                    if (s == "ibp") return IntermediateBounds::ibp;
                    if (s == "crown") return IntermediateBounds::crown;
                    return std::nullopt;
                },
                "ibp or crown");
            sc.crown.relaxation = parse_enum(
                cj, "relaxation", sc.crown.relaxation,
                [](const std::string& s) -> std::optional<RelaxationMode> {
                    if (s == "linear") return RelaxationMode::linear;
                    if (s == "interval") return RelaxationMode::interval;
                    return std::nullopt;
                },
                "linear or interval");
            sc.crown.relu_lower = parse_enum(
                cj, "relu_lower", sc.crown.relu_lower,
                [](const std::string& s) -> std::optional<ReluLowerSlope> {
                    if (s == "adaptive") return ReluLowerSlope::adaptive;
                    if (s == "zero") return ReluLowerSlope::zero;
                    return std::nullopt;
                },
                "adaptive or zero");
        }

        if (j.contains("obstacles")) {
            for (const auto& oj : j["obstacles"]) {
                Obstacle o;
                if (oj.contains("dims")) {
                    const auto dims = oj["dims"].get<std::vector<Eigen::Index>>();
                    if (dims.size() != 2) throw ConfigError("obstacle dims must list two indices");
                    o.dim_x = dims[0];
                    o.dim_y = dims[1];
                }
                const auto center = json_util::to_vector(field(oj, "center", "obstacle"), "obstacle.center");
                if (center.size() != 2) throw ConfigError("obstacle center must have two entries");
                o.center_x = center(0);
                o.center_y = center(1);
                o.radius = field(oj, "radius", "obstacle").get<double>();
                o.padding = oj.value("padding", 0.0);
                sc.obstacles.push_back(o);
            }
        }
        sc.seed = j.value("seed", std::uint64_t{0});
        sc.workers = j.value("workers", std::size_t{1});
        sc.output_dir = j.value("output", "out/" + sc.name);
        sc.validate();
        return sc;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scenario: ") + e.what());
    }
}

} // namespace

ScenarioConfig parse_scenario(const std::string& json_text, const std::filesystem::path& base_dir)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
    }
    return scenario_from_json(j, base_dir);
}

ScenarioConfig load_scenario(const std::filesystem::path& path)
{
    const json j = json_util::read_json_file(path);
    try {
        return scenario_from_json(j, path.parent_path());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

} // namespace nnreach
