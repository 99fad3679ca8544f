// Command-line front end: reach, compare, validate, plotdata, bounds.

#include "nnreach/bounds.hpp"
#include "nnreach/errors.hpp"
#include "nnreach/network_io.hpp"
#include "nnreach/reach.hpp"
#include "nnreach/scenario.hpp"
#include "nnreach/tube_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace nnreach;

namespace {

enum ExitCode { ok = 0, property_violation = 1, usage_error = 2, numerical_failure = 3 };

// REACH_LOG: 0 quiet, 1 info (default), 2 debug. Names are accepted too.
int log_level()
{
    static const int level = [] {
        const char* env = std::getenv("REACH_LOG");
        if (!env) return 1;
        const std::string v(env);
        if (v == "quiet" || v == "0") return 0;
        if (v == "debug" || v == "2") return 2;
        return 1;
    }();
    return level;
}

void log(int level, const std::string& msg)
{
    if (level <= log_level()) std::cerr << "[nnreach] " << msg << '\n';
}

struct Manifest
{
    std::string scenario;
    std::optional<std::string> strategy;
    std::optional<int> Da, Ds;
    std::optional<double> dt, T, step;
    std::optional<std::string> integrator;
    std::optional<std::uint64_t> seed;
    std::size_t workers = 1;
    std::size_t repeat = 1;
    std::optional<std::string> out;
};

void add_manifest_options(CLI::App* cmd, Manifest& m)
{
    cmd->add_option("--scenario", m.scenario, "Scenario JSON file")->required();
    cmd->add_option("--strategy", m.strategy,
                    "global, hybrid, local, frozen-hybrid, linear or linear-hybrid");
    cmd->add_option("--Da", m.Da, "Partitions per actuation step (power of two)");
    cmd->add_option("--Ds", m.Ds, "Sub-partitions per partition (power of two)");
    cmd->add_option("--dt", m.dt, "Actuation step");
    cmd->add_option("--T", m.T, "Horizon");
    cmd->add_option("--integrator", m.integrator, "euler or rk4");
    cmd->add_option("--step", m.step, "Integration step");
    cmd->add_option("--seed", m.seed, "Monte Carlo seed");
    cmd->add_option("--workers", m.workers, "Worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--repeat", m.repeat, "Timing repetitions")->check(CLI::PositiveNumber);
    cmd->add_option("--out", m.out, "Output directory");
}

ScenarioConfig configure(const Manifest& m)
{
    ScenarioConfig sc = load_scenario(m.scenario);
    if (m.strategy) {
        const auto s = parse_strategy(*m.strategy);
        if (!s) throw ConfigError("unknown strategy \"" + *m.strategy + "\"");
        sc.strategy = *s;
    }
    if (m.Da) sc.partitions = *m.Da;
    if (m.Ds) sc.subpartitions = *m.Ds;
    if (m.dt) sc.integrator.actuation_step = *m.dt;
    if (m.T) sc.horizon = *m.T;
    if (m.integrator) {
        const auto method = parse_integrator(*m.integrator);
        if (!method) throw ConfigError("unknown integrator \"" + *m.integrator + "\"");
        sc.integrator.method = *method;
    }
    if (m.step) sc.integrator.step = *m.step;
    if (m.seed) sc.seed = *m.seed;
    sc.workers = m.workers;
    if (m.out) sc.output_dir = *m.out;
    sc.validate();
    return sc;
}

fs::path output_dir(const ScenarioConfig& sc)
{
    fs::path dir = sc.output_dir.empty() ? fs::path("out") : fs::path(sc.output_dir);
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
}

json manifest_json(const Manifest& m, const ScenarioConfig& sc)
{
    return json{{"scenario", m.scenario},
                {"strategy", std::string(to_string(sc.strategy))},
                {"Da", sc.partitions},
                {"Ds", sc.subpartitions},
                {"dt", sc.actuation_step()},
                {"T", sc.horizon},
                {"integrator", std::string(to_string(sc.integrator.method))},
                {"step", sc.integrator.step},
                {"seed", sc.seed},
                {"workers", sc.workers},
                {"repeat", m.repeat},
                {"out", sc.output_dir}};
}

struct TimedRun
{
    ReachTube tube;
    ReachStats stats;
    double mean_seconds = 0.0;
    double std_seconds = 0.0;
};

TimedRun timed_reach(const ScenarioConfig& sc, std::size_t repeat)
{
    TimedRun run;
    std::vector<double> totals;
    for (std::size_t r = 0; r < repeat; ++r) {
        ReachStats stats;
        run.tube = run_algorithm1(sc, &stats);
        totals.push_back(stats.total_seconds);
        run.stats = stats;
        log(2, "run " + std::to_string(r + 1) + "/" + std::to_string(repeat) + ": " +
                   format_double(stats.total_seconds) + " s");
    }
    run.mean_seconds = std::accumulate(totals.begin(), totals.end(), 0.0) / totals.size();
    double var = 0.0;
    for (double t : totals) var += (t - run.mean_seconds) * (t - run.mean_seconds);
    run.std_seconds = totals.size() > 1 ? std::sqrt(var / (totals.size() - 1)) : 0.0;
    return run;
}

json timing_json(const TimedRun& run, std::size_t repeat)
{
    return json{{"repeat", repeat},
                {"mean_seconds", run.mean_seconds},
                {"std_seconds", run.std_seconds},
                {"crown_calls", run.stats.crown_calls},
                {"frame_seconds", run.stats.frame_seconds}};
}

json safety_json(const ReachTube& tube, const std::vector<Obstacle>& obstacles,
                 const SafetyReport& report)
{
    json obs = json::array();
    for (const auto& o : obstacles)
        obs.push_back(json{{"dims", {o.dim_x, o.dim_y}},
                           {"center", {o.center_x, o.center_y}},
                           {"radius", o.radius},
                           {"padding", o.padding}});
    json frames = json::array();
    for (std::size_t j = 0; j < report.frames.size(); ++j)
        frames.push_back(json{{"index", j},
                              {"time", tube.frames[j].time},
                              {"verdict", report.frames[j] == Verdict::safe ? "safe" : "unknown"}});
    return json{{"obstacles", obs}, {"frames", frames}, {"all_safe", report.all_safe()}};
}

void write_tube_artifacts(const ReachTube& tube, const fs::path& dir, const std::string& stem)
{
    save_tube(tube, dir / (stem + ".json"));
    std::ofstream csv(dir / (stem + ".csv"), std::ios::binary);
    write_tube_csv(tube, csv);
}

int cmd_reach(const Manifest& m)
{
    const auto sc = configure(m);
    log(1, "running " + sc.name + " with strategy " + std::string(to_string(sc.strategy)) +
               ", Da=" + std::to_string(sc.partitions) + ", Ds=" + std::to_string(sc.subpartitions));
    const auto run = timed_reach(sc, m.repeat);
    const auto dir = output_dir(sc);
    write_tube_artifacts(run.tube, dir, "tube");
    const auto safety = check_safety(run.tube, sc.obstacles);
    write_text(dir / "safety.json", safety_json(run.tube, sc.obstacles, safety).dump(1) + "\n");
    write_text(dir / "timing.json", timing_json(run, m.repeat).dump(1) + "\n");
    write_text(dir / "manifest.json", manifest_json(m, sc).dump(1) + "\n");

    const auto final_hull = run.tube.frames.back().hull();
    std::cout << "tube: " << run.tube.frames.size() - 1 << " frames, "
              << run.tube.frames.back().boxes.size() << " boxes per frame\n";
    std::cout << "final hull: [" << final_hull.lower().transpose() << "] .. ["
              << final_hull.upper().transpose() << "]\n";
    std::cout << "safety: " << (safety.all_safe() ? "safe" : "unknown") << " ("
              << std::count(safety.frames.begin(), safety.frames.end(), Verdict::safe) << "/"
              << safety.frames.size() << " frames certified)\n";
    std::cout << "time: " << format_double(run.mean_seconds) << " s +- "
              << format_double(run.std_seconds) << " s over " << m.repeat << " run(s), "
              << run.stats.crown_calls << " CROWN calls\n";
    std::cout << "artifacts: " << dir.string() << '\n';
    return ok;
}

// Known containment relations between strategies, as (inner, outer, label).
struct Relation
{
    Strategy inner, outer;
    const char* label;
};

constexpr Relation relations[] = {
    {Strategy::local, Strategy::hybrid, "L ⊆ H"},
    {Strategy::hybrid, Strategy::global, "H ⊆ G"},
    {Strategy::linear, Strategy::linear_hybrid, "Lin ⊆ LinH"},
    {Strategy::linear_hybrid, Strategy::hybrid, "LinH ⊆ H"},
};

int cmd_compare(const Manifest& m, const std::string& list)
{
    const auto base = configure(m);
    std::vector<Strategy> strategies;
    std::stringstream ss(list);
    for (std::string item; std::getline(ss, item, ',');) {
        const auto s = parse_strategy(item);
        if (!s) throw ConfigError("unknown strategy \"" + item + "\" in --strategies");
        strategies.push_back(*s);
    }
    if (strategies.empty()) throw ConfigError("--strategies is empty");

    const auto dir = output_dir(base);
    std::vector<TimedRun> runs;
    for (auto s : strategies) {
        ScenarioConfig sc = base;
        sc.strategy = s;
        sc.validate();
        log(1, "strategy " + std::string(to_string(s)));
        runs.push_back(timed_reach(sc, m.repeat));
        write_tube_artifacts(runs.back().tube, dir, "tube_" + std::string(to_string(s)));
    }

    std::ostringstream table;
    table << std::left << std::setw(16) << "strategy" << std::setw(26) << "final_volume"
          << std::setw(16) << "mean_s" << std::setw(16) << "std_s" << "crown_calls\n";
    std::ofstream csv(dir / "compare.csv", std::ios::binary);
    csv << "strategy,final_volume,mean_seconds,std_seconds,crown_calls\n";
    for (std::size_t i = 0; i < strategies.size(); ++i) {
        const auto vol = runs[i].tube.frames.back().hull().volume();
        const std::string name(to_string(strategies[i]));
        table << std::setw(16) << name << std::setw(26) << format_double(vol) << std::setw(16)
              << format_double(runs[i].mean_seconds) << std::setw(16)
              << format_double(runs[i].std_seconds) << runs[i].stats.crown_calls << '\n';
        csv << name << ',' << format_double(vol) << ',' << format_double(runs[i].mean_seconds)
            << ',' << format_double(runs[i].std_seconds) << ',' << runs[i].stats.crown_calls
            << '\n';
    }

    auto index_of = [&](Strategy s) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < strategies.size(); ++i)
            if (strategies[i] == s) return i;
        return std::nullopt;
    };
    bool all_nested = true;
    json verdicts = json::array();
    for (const auto& r : relations) {
        const auto a = index_of(r.inner), b = index_of(r.outer);
        if (!a || !b) continue;
        const auto rep = check_nesting(runs[*a].tube, runs[*b].tube, 1e-7);
        all_nested = all_nested && rep.nested;
        table << r.label << ": " << (rep.nested ? "PASS" : "FAIL");
        if (!rep.nested) table << " (first failing frame " << rep.first_failure << ")";
        table << ", worst excess " << format_double(rep.worst_excess) << '\n';
        verdicts.push_back(json{{"relation", r.label},
                                {"nested", rep.nested},
                                {"worst_excess", rep.worst_excess}});
    }
    write_text(dir / "compare.txt", table.str());
    write_text(dir / "nesting.json", verdicts.dump(1) + "\n");
    std::cout << table.str();
    return all_nested ? ok : property_violation;
}

int cmd_validate(const Manifest& m, std::size_t samples, const std::optional<std::string>& tube_path,
                 double slack)
{
    const auto sc = configure(m);
    const auto tube = tube_path ? load_tube(*tube_path) : run_algorithm1(sc);
    if (tube.frames.size() != sc.frame_count() + 1)
        throw ConfigError("tube has " + std::to_string(tube.frames.size()) +
                          " frames, scenario expects " + std::to_string(sc.frame_count() + 1));
    if (samples == 0) log(0, "warning: 0 samples requested, containment check is vacuous");
    const auto traj = monte_carlo_trajectories(sc, samples, sc.seed);
    const auto report = check_containment(tube, traj, slack);

    const auto dir = output_dir(sc);
    std::ofstream csv(dir / "mc.csv", std::ios::binary);
    write_trajectories_csv(traj, tube, csv);

    std::cout << report.violations << " violations / " << report.frames << " frames ("
              << report.samples << " samples, seed " << sc.seed << ")\n";
    if (samples > 0) std::cout << "min margin: " << format_double(report.min_margin) << '\n';
    for (std::size_t j = 0; j < report.violations_per_frame.size(); ++j)
        if (report.violations_per_frame[j] > 0)
            std::cout << "frame " << j << ": " << report.violations_per_frame[j]
                      << " samples outside the hull\n";
    return report.violations == 0 ? ok : property_violation;
}

int cmd_plotdata(const std::string& tube_path, const std::vector<int>& dims,
                 const std::optional<std::string>& out)
{
    const auto tube = load_tube(tube_path);
    if (out) {
        std::ofstream f(*out, std::ios::binary);
        if (!f) throw ConfigError("cannot write " + *out);
        write_plotdata_csv(tube, dims[0], dims[1], f);
    } else {
        write_plotdata_csv(tube, dims[0], dims[1], std::cout);
    }
    return ok;
}

int cmd_bounds(const std::string& network, const std::vector<double>& lo,
               const std::vector<double>& hi, const std::string& intermediate,
               const std::string& relu_lower)
{
    const auto net = load_network(network);
    if (lo.size() != hi.size()) throw ConfigError("--lower and --upper differ in length");
    const VectorXd l = Eigen::Map<const VectorXd>(lo.data(), static_cast<Eigen::Index>(lo.size()));
    const VectorXd h = Eigen::Map<const VectorXd>(hi.data(), static_cast<Eigen::Index>(hi.size()));
    if (l.size() != net.input_dim())
        throw ConfigError("box has dimension " + std::to_string(l.size()) + ", network expects " +
                          std::to_string(net.input_dim()));
    CrownOptions opt;
    opt.intermediate = intermediate == "crown" ? IntermediateBounds::crown : IntermediateBounds::ibp;
    opt.relu_lower = relu_lower == "zero" ? ReluLowerSlope::zero : ReluLowerSlope::adaptive;
    BoxXd box;
    try {
        box = BoxXd(l, h);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    const auto lb = crown_bounds(net, box, opt);
    const auto out = inclusion_G(lb, l, h);
    auto mat = [](const MatrixXd& a) {
        json rows = json::array();
        for (Eigen::Index r = 0; r < a.rows(); ++r) {
            json row = json::array();
            for (Eigen::Index c = 0; c < a.cols(); ++c) row.push_back(a(r, c));
            rows.push_back(row);
        }
        return rows;
    };
    auto vec = [](const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    const json doc{{"A_lower", mat(lb.A_lower)}, {"b_lower", vec(lb.b_lower)},
                   {"A_upper", mat(lb.A_upper)}, {"b_upper", vec(lb.b_upper)},
                   {"output_lower", vec(out.lower)}, {"output_upper", vec(out.upper)}};
    std::cout << doc.dump(1) << '\n';
    return ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Reachability of neural-network controlled systems via interval embeddings"};
    app.require_subcommand(1);

    Manifest reach_m, compare_m, validate_m;
    auto* reach = app.add_subcommand("reach", "Compute a reach tube");
    add_manifest_options(reach, reach_m);

    auto* compare = app.add_subcommand("compare", "Run several strategies on one scenario");
    add_manifest_options(compare, compare_m);
    std::string strategies = "global,hybrid,local";
    compare->add_option("--strategies", strategies, "Comma-separated strategy list");

    auto* validate = app.add_subcommand("validate", "Monte Carlo containment check");
    add_manifest_options(validate, validate_m);
    std::size_t samples = 1000;
    std::optional<std::string> validate_tube;
    double slack = 1e-7;
    validate->add_option("--samples", samples, "Number of sampled trajectories");
    validate->add_option("--tube", validate_tube, "Check this tube file instead of recomputing");
    validate->add_option("--slack", slack, "Allowed distance outside a hull");

    auto* plotdata = app.add_subcommand("plotdata", "Rectangle corners of a 2D projection");
    std::string plot_tube;
    std::vector<int> dims{0, 1};
    std::optional<std::string> plot_out;
    plotdata->add_option("--tube", plot_tube, "Tube JSON file")->required();
    plotdata->add_option("--dims", dims, "Two state indices")->expected(2);
    plotdata->add_option("--out", plot_out, "CSV output file (default stdout)");

    auto* bounds = app.add_subcommand("bounds", "Print CROWN bounds of a network over a box");
    std::string bounds_net, intermediate = "ibp", relu_lower = "adaptive";
    std::vector<double> lo, hi;
    bounds->add_option("--network", bounds_net, "Network JSON file")->required();
    bounds->add_option("--lower", lo, "Box lower corner")->required();
    bounds->add_option("--upper", hi, "Box upper corner")->required();
    bounds->add_option("--intermediate", intermediate, "ibp or crown")
        ->check(CLI::IsMember({"ibp", "crown"}));
    bounds->add_option("--relu-lower", relu_lower, "adaptive or zero")
        ->check(CLI::IsMember({"adaptive", "zero"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : usage_error;
    }

    try {
        if (*reach) return cmd_reach(reach_m);
        if (*compare) return cmd_compare(compare_m, strategies);
        if (*validate) return cmd_validate(validate_m, samples, validate_tube, slack);
        if (*plotdata) return cmd_plotdata(plot_tube, dims, plot_out);
        if (*bounds) return cmd_bounds(bounds_net, lo, hi, intermediate, relu_lower);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return usage_error;
    } catch (const BoundsEscape& e) {
        std::cerr << "bounds escape: " << e.what()
                  << "\nhint: increase --Da or shrink --dt so the state stays inside the frozen box\n";
        return numerical_failure;
    } catch (const OrderingViolation& e) {
        std::cerr << "ordering violation: " << e.what() << '\n';
        return numerical_failure;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return numerical_failure;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return usage_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return numerical_failure;
    }
    return usage_error;
}
