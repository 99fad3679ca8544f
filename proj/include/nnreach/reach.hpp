#ifndef NNREACH_REACH_HPP
#define NNREACH_REACH_HPP

#include "nnreach/bounds.hpp"
#include "nnreach/embedding.hpp"
#include "nnreach/integrate.hpp"
#include "nnreach/interval.hpp"
#include "nnreach/network.hpp"
#include "nnreach/systems.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace nnreach {

/// Circle in the plane spanned by two state coordinates.
struct Obstacle
{
    Eigen::Index dim_x = 0;
    Eigen::Index dim_y = 1;
    double center_x = 0.0;
    double center_y = 0.0;
    double radius = 0.0;
    double padding = 0.0; // fraction of the radius

    double padded_radius() const { return radius * (1.0 + padding); }
};

struct ScenarioConfig
{
    std::string name;
    std::shared_ptr<const SystemModel> system;
    std::shared_ptr<const Network> network;
    std::string network_path;
    BoxXd initial_set;
    BoxXd disturbance;
    double horizon = 0.0;
    IntegratorConfig integrator;
    int partitions = 1;    // D_a
    int subpartitions = 1; // D_s
    Strategy strategy = Strategy::frozen_hybrid;
    CrownOptions crown;
    std::vector<Obstacle> obstacles;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    std::string output_dir;

    double actuation_step() const { return integrator.actuation_step; }
    /// Number of propagated frames, horizon / actuation_step.
    std::size_t frame_count() const;
    ClosedLoop closed_loop() const;

    /// Throws ConfigError naming the violated constraint.
    void validate() const;
};

/// Metadata copied from the scenario into every tube.
struct TubeInfo
{
    std::string scenario;
    std::string system;
    Strategy strategy = Strategy::hybrid;
    int partitions = 1;
    int subpartitions = 1;
    double actuation_step = 0.0;
    double horizon = 0.0;
    IntegratorMethod method = IntegratorMethod::rk4;
    double step = 0.0;
    std::vector<std::string> state_labels;
};

struct ReachFrame
{
    double time = 0.0;
    std::vector<BoxXd> boxes;

    BoxXd hull() const { return nnreach::hull(boxes); }
};

struct ReachTube
{
    TubeInfo info;
    std::vector<ReachFrame> frames;

    std::vector<double> times() const;
    Eigen::Index state_dim() const;
};

struct ReachStats
{
    std::size_t crown_calls = 0;
    std::vector<double> frame_seconds;
    double total_seconds = 0.0;
};

/// Widest-axis bisection of b into exactly D cells. D must be a power of two;
/// ties between equally wide axes go to the lowest index. Cells are ordered
/// lexicographically with axis 0 varying slowest and share faces exactly.
std::vector<BoxXd> uniform_partition(const BoxXd& b, int D);

/// Per-axis cut counts used by uniform_partition.
std::vector<int> partition_cuts(const BoxXd& b, int D);

/// Partitioned reachability loop: re-hull, partition into D_a boxes, bound the network on each
/// (frozen strategy only), sub-partition into D_s boxes, integrate each for one
/// actuation step and collect the results in branch order.
ReachTube run_algorithm1(const ScenarioConfig& sc, ReachStats* stats = nullptr);

struct Trajectory
{
    std::vector<VectorXd> states; // one per actuation instant, starting at t = 0
};

/// Closed-loop samples with uniform initial states and piecewise-constant
/// uniform disturbances, integrated with the scenario's integrator settings.
std::vector<Trajectory> monte_carlo_trajectories(const ScenarioConfig& sc, std::size_t count,
                                                 std::uint64_t seed);

enum class Verdict { safe, unknown };

struct SafetyReport
{
    std::vector<Verdict> frames;

    bool all_safe() const;
};

/// True when the projection of b onto the obstacle plane stays strictly
/// farther than the padded radius from the center.
bool box_clear_of(const BoxXd& b, const Obstacle& o);

SafetyReport check_safety(const ReachTube& tube, const std::vector<Obstacle>& obstacles);

struct ContainmentReport
{
    std::size_t samples = 0;
    std::size_t frames = 0; // propagated frames
    std::size_t violations = 0;
    std::vector<std::size_t> violations_per_frame; // indexed by frame, including frame 0
    double min_margin = 0.0; // smallest signed distance to a hull face, negative = outside
};

/// Checks every sample state against the hull of the matching frame.
ContainmentReport check_containment(const ReachTube& tube, const std::vector<Trajectory>& samples,
                                    double slack);

struct NestingReport
{
    bool nested = true;
    std::size_t first_failure = 0; // frame index, meaningful when !nested
    double worst_excess = 0.0;     // largest amount by which inner leaves outer
};

/// Frame-by-frame check that the hulls of inner lie inside the hulls of outer.
NestingReport check_nesting(const ReachTube& inner, const ReachTube& outer, double slack);

} // namespace nnreach

#endif
