#include "support.hpp"

#include "nnreach/errors.hpp"
#include "nnreach/reach.hpp"
#include "nnreach/scenario.hpp"
#include "nnreach/tube_io.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

using namespace nnreach;
using testsupport::Rng;

namespace {

Network zero_network(Eigen::Index in, Eigen::Index out)
{
    return Network({{MatrixXd::Zero(3, in), VectorXd::Zero(3), Activation::relu}},
                   MatrixXd::Zero(out, 3), VectorXd::Zero(out));
}

// Two-state linear plant with a small random controller.
ScenarioConfig synthetic(Rng& rng, const MatrixXd& a, const VectorXd& offset, double net_scale)
{
    ScenarioConfig sc;
    sc.name = "synthetic";
    sc.system = std::make_shared<LinearSystemModel>(a, testsupport::random_matrix(rng, 2, 1, 1.0),
                                                    MatrixXd::Ones(2, 1), offset);
    const auto net = testsupport::random_network(rng, 2, 1, {6});
    sc.network = std::make_shared<Network>(
        Network(net.hidden(), net_scale * net.out_weight(), net_scale * net.out_bias()));
    sc.initial_set = BoxXd(Eigen::Vector2d(-0.5, -0.4), Eigen::Vector2d(0.5, 0.4));
    sc.disturbance = BoxXd(VectorXd::Constant(1, -0.01), VectorXd::Constant(1, 0.01));
    sc.horizon = 1.0;
    sc.integrator = {IntegratorMethod::rk4, 0.01, 0.25};
    sc.strategy = Strategy::hybrid;
    return sc;
}

ScenarioConfig shipped(const std::string& name)
{
    return load_scenario(testsupport::source_dir() / "scenarios" / (name + ".json"));
}

} // namespace

TEST_CASE("uniform partition examples")
{
    const BoxXd wide(Eigen::Vector2d(0, 0), Eigen::Vector2d(2, 1));
    const auto two = uniform_partition(wide, 2);
    REQUIRE(two.size() == 2);
    CHECK(two[0].upper() == Eigen::Vector2d(1, 1));
    CHECK(two[1].lower() == Eigen::Vector2d(1, 0));

    const BoxXd unit(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1));
    const auto halves = uniform_partition(unit, 2);
    CHECK(halves[0].upper() == Eigen::Vector2d(0.5, 1)); // tie goes to axis 0
    const auto four = uniform_partition(unit, 4);
    REQUIRE(four.size() == 4);
    CHECK(four[0].lower() == Eigen::Vector2d(0, 0));
    CHECK(four[1].lower() == Eigen::Vector2d(0, 0.5));
    CHECK(four[2].lower() == Eigen::Vector2d(0.5, 0));
    CHECK(four[3].upper() == Eigen::Vector2d(1, 1));

    CHECK(partition_cuts(wide, 8) == std::vector<int>{4, 2});
    CHECK_THROWS_AS(uniform_partition(unit, 3), ConfigError);
    CHECK_THROWS_AS(uniform_partition(unit, 0), ConfigError);
    CHECK(uniform_partition(unit, 1).front().lower() == unit.lower());
}

TEST_CASE("uniform partitions tile the box")
{
    Rng rng(61);
    for (int trial = 0; trial < 100; ++trial) {
        const auto b = testsupport::random_box(rng, testsupport::uniform_int(rng, 1, 4), 5.0, 3.0);
        const int D = 1 << testsupport::uniform_int(rng, 0, 5);
        const auto cells = uniform_partition(b, D);
        REQUIRE(cells.size() == static_cast<std::size_t>(D));
        double volume = 0;
        for (const auto& c : cells) {
            CHECK(box_contains(b, c));
            volume += c.volume();
        }
        CHECK(volume == doctest::Approx(b.volume()).epsilon(1e-12));
        const auto h = hull(cells);
        CHECK(h.lower() == b.lower());
        CHECK(h.upper() == b.upper());
        for (int k = 0; k < 50; ++k) {
            const VectorXd z = testsupport::sample_in(rng, b);
            bool found = false;
            for (const auto& c : cells) found = found || c.contains(z);
            CHECK(found);
        }
    }
}

TEST_CASE("zero horizon yields only the initial partition")
{
    Rng rng(62);
    auto sc = synthetic(rng, -MatrixXd::Identity(2, 2), VectorXd::Zero(2), 0.1);
    sc.horizon = 0.0;
    sc.partitions = 4;
    const auto tube = run_algorithm1(sc);
    REQUIRE(tube.frames.size() == 1);
    CHECK(tube.frames[0].boxes.size() == 4);
    CHECK(tube.frames[0].hull().lower() == sc.initial_set.lower());
}

TEST_CASE("stable linear plant without control contracts like the closed-form flow")
{
    ScenarioConfig sc;
    MatrixXd a = MatrixXd::Zero(2, 2);
    a.diagonal() << -1.0, -2.0;
    sc.system = std::make_shared<LinearSystemModel>(a, MatrixXd::Ones(2, 1), MatrixXd::Zero(2, 0),
                                                    VectorXd::Zero(2));
    sc.network = std::make_shared<Network>(zero_network(2, 1));
    sc.initial_set = BoxXd(Eigen::Vector2d(1, -1), Eigen::Vector2d(2, 3));
    sc.disturbance = BoxXd(VectorXd(0), VectorXd(0));
    sc.horizon = 2.0;
    sc.integrator = {IntegratorMethod::rk4, 0.01, 0.5};
    for (auto s : {Strategy::global, Strategy::hybrid, Strategy::local, Strategy::linear}) {
        sc.strategy = s;
        const auto tube = run_algorithm1(sc);
        REQUIRE(tube.frames.size() == 5);
        for (const auto& f : tube.frames) {
            const BoxXd h = f.hull();
            const Eigen::Vector2d decay(std::exp(-f.time), std::exp(-2 * f.time));
            CHECK((h.lower() - sc.initial_set.lower().cwiseProduct(decay)).cwiseAbs().maxCoeff() <= 1e-8);
            CHECK((h.upper() - sc.initial_set.upper().cwiseProduct(decay)).cwiseAbs().maxCoeff() <= 1e-8);
        }
    }
}

TEST_CASE("frozen-hybrid tube contains sampled trajectories on a slow plant")
{
    Rng rng(63);
    auto sc = synthetic(rng, -MatrixXd::Identity(2, 2), VectorXd::Zero(2), 0.05);
    sc.strategy = Strategy::frozen_hybrid;
    sc.subpartitions = 4;
    sc.horizon = 0.5;
    ReachStats stats;
    const auto tube = run_algorithm1(sc, &stats);
    CHECK(tube.frames.size() == 3);
    CHECK(tube.frames[1].boxes.size() == 4);
    CHECK(stats.crown_calls == 2);
    CHECK(stats.frame_seconds.size() == 2);
    const auto samples = monte_carlo_trajectories(sc, 200, 7);
    const auto report = check_containment(tube, samples, 1e-9);
    CHECK(report.violations == 0);
    CHECK(report.frames == 2);
}

TEST_CASE("frozen-hybrid escape names the branch")
{
    Rng rng(64);
    auto sc = synthetic(rng, MatrixXd::Zero(2, 2), Eigen::Vector2d(1.0, 0.0), 0.05);
    sc.strategy = Strategy::frozen_hybrid;
    try {
        run_algorithm1(sc);
        FAIL("expected BoundsEscape");
    } catch (const BoundsEscape& e) {
        CHECK(std::string(e.what()).find("frame 0, partition 0, sub-partition 0: ") == 0);
        CHECK(e.coordinate() == 0);
    }
}

TEST_CASE("Monte Carlo sampling")
{
    Rng rng(65);
    auto sc = synthetic(rng, -MatrixXd::Identity(2, 2), VectorXd::Zero(2), 0.1);
    CHECK(monte_carlo_trajectories(sc, 0, 1).empty());

    sc.initial_set = BoxXd(Eigen::Vector2d(0.2, 0.1), Eigen::Vector2d(0.2, 0.1));
    sc.disturbance = BoxXd(VectorXd::Zero(1), VectorXd::Zero(1));
    const auto same = monte_carlo_trajectories(sc, 5, 1);
    REQUIRE(same.size() == 5);
    CHECK(same[0].states.size() == sc.frame_count() + 1);
    for (const auto& t : same)
        for (std::size_t j = 0; j < t.states.size(); ++j) CHECK(t.states[j] == same[0].states[j]);

    auto varied = synthetic(rng, -MatrixXd::Identity(2, 2), VectorXd::Zero(2), 0.1);
    const auto one = monte_carlo_trajectories(varied, 10, 3);
    varied.workers = 4;
    const auto four = monte_carlo_trajectories(varied, 10, 3);
    for (std::size_t s = 0; s < 10; ++s)
        for (std::size_t j = 0; j < one[s].states.size(); ++j) CHECK(one[s].states[j] == four[s].states[j]);
}

TEST_CASE("safety verdicts against a padded circle")
{
    const Obstacle o{0, 1, 4.0, 4.0, 2.4, 0.25};
    CHECK(o.padded_radius() == doctest::Approx(3.0));
    CHECK(box_clear_of(BoxXd(Eigen::Vector2d(10, 10), Eigen::Vector2d(11, 11)), o));
    CHECK_FALSE(box_clear_of(BoxXd(Eigen::Vector2d(3, 3), Eigen::Vector2d(5, 5)), o));
    const Obstacle unit{0, 1, 0.0, 0.0, 1.0, 0.0};
    CHECK_FALSE(box_clear_of(BoxXd(Eigen::Vector2d(1, -1), Eigen::Vector2d(2, 1)), unit));
    CHECK(box_clear_of(BoxXd(Eigen::Vector2d(1 + 1e-12, -1), Eigen::Vector2d(2, 1)), unit));
    CHECK_THROWS_AS(box_clear_of(BoxXd(VectorXd::Zero(1), VectorXd::Ones(1)), o), ConfigError);

    ReachTube tube;
    tube.frames.push_back({0.0, {BoxXd(Eigen::Vector2d(10, 10), Eigen::Vector2d(11, 11))}});
    tube.frames.push_back({0.25, {BoxXd(Eigen::Vector2d(10, 10), Eigen::Vector2d(11, 11)),
                                  BoxXd(Eigen::Vector2d(3, 3), Eigen::Vector2d(5, 5))}});
    const auto report = check_safety(tube, {o});
    CHECK(report.frames == std::vector<Verdict>{Verdict::safe, Verdict::unknown});
    CHECK_FALSE(report.all_safe());
}

TEST_CASE("containment and nesting reports")
{
    Rng rng(66);
    auto sc = synthetic(rng, -MatrixXd::Identity(2, 2), VectorXd::Zero(2), 0.1);
    const auto tube = run_algorithm1(sc);
    const auto samples = monte_carlo_trajectories(sc, 100, 5);
    const auto clean = check_containment(tube, samples, 1e-9);
    CHECK(clean.violations == 0);
    CHECK(clean.min_margin >= 0.0);

    auto corrupted = tube;
    const BoxXd h = corrupted.frames[2].hull();
    corrupted.frames[2].boxes = {BoxXd(h.lower(), h.lower())};
    const auto bad = check_containment(corrupted, samples, 1e-9);
    CHECK(bad.violations > 0);
    CHECK(bad.violations_per_frame[2] == bad.violations);
    CHECK(bad.min_margin < 0.0);

    CHECK(check_nesting(tube, tube, 0.0).nested);
    CHECK(check_nesting(corrupted, tube, 0.0).nested);
    const auto out = check_nesting(tube, corrupted, 1e-7);
    CHECK_FALSE(out.nested);
    CHECK(out.first_failure == 2);
    CHECK(out.worst_excess > 0.0);

    auto shortened = tube;
    shortened.frames.pop_back();
    CHECK_THROWS_AS(check_nesting(tube, shortened, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(check_containment(shortened, samples, 0.0), std::invalid_argument);
}

TEST_CASE("tubes do not depend on the worker count")
{
    Rng rng(67);
    auto sc = synthetic(rng, -MatrixXd::Identity(2, 2), VectorXd::Zero(2), 0.1);
    sc.partitions = 8;
    sc.subpartitions = 2;
    const auto one = tube_to_json(run_algorithm1(sc));
    sc.workers = 5;
    CHECK(tube_to_json(run_algorithm1(sc)) == one);
}

TEST_CASE("scenario loading")
{
    const auto vehicle = shipped("vehicle");
    CHECK(vehicle.frame_count() == 20);
    CHECK(vehicle.partitions == 16);
    CHECK(vehicle.system->name() == "vehicle");
    CHECK(vehicle.obstacles.size() == 1);
    const auto quad = shipped("quadrotor6d");
    CHECK(quad.system->state_dim() == 6);
    CHECK(quad.strategy == Strategy::linear);

    try {
        load_scenario("/nonexistent/missing.json");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("/nonexistent/missing.json") != std::string::npos);
    }

    std::ifstream in(testsupport::source_dir() / "scenarios" / "vehicle.json");
    auto doc = nlohmann::json::parse(in);
    doc["partitions"] = 3;
    const auto dir = testsupport::source_dir() / "scenarios";
    CHECK_THROWS_AS(parse_scenario(doc.dump(), dir), ConfigError);
    doc["partitions"] = 16;
    doc["strategy"] = "linear";
    CHECK_THROWS_AS(parse_scenario(doc.dump(), dir), ConfigError);
    doc["strategy"] = "hybrid";
    doc["dt"] = 0.3;
    CHECK_THROWS_AS(parse_scenario(doc.dump(), dir), ConfigError);
    CHECK_THROWS_AS(parse_scenario("{not json", dir), ConfigError);
}

TEST_CASE("quadrotor model")
{
    const auto q = quadrotor6d(9.8);
    VectorXd x = VectorXd::Zero(6);
    x << 1, 2, 3, 4, 5, 6;
    const VectorXd f = q->field(x, Eigen::Vector3d(1, 1, 1), VectorXd(0));
    VectorXd expect(6);
    expect << 4, 5, 6, 9.8, -9.8, 1 - 9.8;
    CHECK((f - expect).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("tube JSON round trip and plot data")
{
    Rng rng(68);
    auto sc = synthetic(rng, -MatrixXd::Identity(2, 2), VectorXd::Zero(2), 0.1);
    sc.partitions = 2;
    const auto tube = run_algorithm1(sc);
    const auto text = tube_to_json(tube);
    const auto back = tube_from_json(text);
    CHECK(tube_to_json(back) == text);
    REQUIRE(back.frames.size() == tube.frames.size());
    for (std::size_t j = 0; j < tube.frames.size(); ++j)
        for (std::size_t b = 0; b < tube.frames[j].boxes.size(); ++b) {
            CHECK(back.frames[j].boxes[b].lower() == tube.frames[j].boxes[b].lower());
            CHECK(back.frames[j].boxes[b].upper() == tube.frames[j].boxes[b].upper());
        }
    CHECK(back.info.partitions == 2);
    CHECK(format_double(0.1) == "0.1");

    std::ostringstream plot;
    write_plotdata_csv(tube, 0, 1, plot);
    CHECK(plot.str().rfind("frame,time,branch,corner,x,y\n", 0) == 0);
    std::ostringstream sink;
    CHECK_THROWS_AS(write_plotdata_csv(tube, 0, 9, sink), ConfigError);
    CHECK_THROWS_AS(tube_from_json("{}"), ConfigError);
}
