#include "nnreach/reach.hpp"

#include "nnreach/errors.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

namespace nnreach {

namespace {

bool is_power_of_two(int d) { return d > 0 && (d & (d - 1)) == 0; }

// Runs fn(0..count-1) on up to `workers` threads. Exceptions are kept per
// index; the caller decides which to report.
std::vector<std::exception_ptr> parallel_for(std::size_t count, std::size_t workers,
                                             const std::function<void(std::size_t)>& fn)
{
    std::vector<std::exception_ptr> errors(count);
    auto run = [&](std::size_t i) {
        try {
            fn(i);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };
    workers = std::max<std::size_t>(1, std::min(workers, count));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) run(i);
        return errors;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) run(i);
        });
    for (auto& th : pool) th.join();
    return errors;
}

// Re-throws err with `context` prepended, keeping the error category.
[[noreturn]] void rethrow_with_context(const std::exception_ptr& err, const std::string& context)
{
    try {
        std::rethrow_exception(err);
    } catch (const BoundsEscape& e) {
        throw BoundsEscape(context + e.what(), e.coordinate());
    } catch (const OrderingViolation& e) {
        throw OrderingViolation(context + e.what());
    } catch (const ConfigError& e) {
        throw ConfigError(context + e.what());
    } catch (const std::exception& e) {
        throw NumericalError(context + e.what());
    }
}

double seconds_since(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

} // namespace

std::size_t ScenarioConfig::frame_count() const
{
    return step_count(horizon, integrator.actuation_step);
}

ClosedLoop ScenarioConfig::closed_loop() const { return ClosedLoop{system, network, crown}; }

void ScenarioConfig::validate() const
{
    if (!system) throw ConfigError("scenario has no system");
    if (!network) throw ConfigError("scenario has no network");
    if (network->input_dim() != system->state_dim() || network->output_dim() != system->input_dim())
        throw ConfigError("network " + std::to_string(network->input_dim()) + " -> " +
                          std::to_string(network->output_dim()) + " does not fit the " +
                          system->name() + " plant (state " + std::to_string(system->state_dim()) +
                          ", input " + std::to_string(system->input_dim()) + ")");
    if (initial_set.size() != system->state_dim())
        throw ConfigError("initial set has dimension " + std::to_string(initial_set.size()) +
                          ", expected " + std::to_string(system->state_dim()));
    if (disturbance.size() != system->disturbance_dim())
        throw ConfigError("disturbance box has dimension " + std::to_string(disturbance.size()) +
                          ", expected " + std::to_string(system->disturbance_dim()));
    if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw ConfigError("horizon T must be >= 0");
    integrator.validate();
    frame_count();
    if (!is_power_of_two(partitions))
        throw ConfigError("Da = " + std::to_string(partitions) +
                          " is not reachable by widest-axis bisection (must be a power of two)");
    if (!is_power_of_two(subpartitions))
        throw ConfigError("Ds = " + std::to_string(subpartitions) +
                          " is not reachable by widest-axis bisection (must be a power of two)");
    if ((strategy == Strategy::linear || strategy == Strategy::linear_hybrid) &&
        !dynamic_cast<const LinearSystemModel*>(system.get()))
        throw ConfigError("strategy " + std::string(to_string(strategy)) +
                          " requires a linear plant");
    for (const auto& o : obstacles) {
        const auto n = system->state_dim();
        if (o.dim_x < 0 || o.dim_x >= n || o.dim_y < 0 || o.dim_y >= n || o.dim_x == o.dim_y)
            throw ConfigError("obstacle coordinates must be two distinct state indices below " +
                              std::to_string(n));
        if (!(o.radius >= 0.0) || !(o.padding >= 0.0))
            throw ConfigError("obstacle radius and padding must be non-negative");
    }
    if (workers == 0) throw ConfigError("workers must be at least 1");
}

std::vector<double> ReachTube::times() const
{
    std::vector<double> t;
    for (const auto& f : frames) t.push_back(f.time);
    return t;
}

Eigen::Index ReachTube::state_dim() const
{
    if (frames.empty() || frames.front().boxes.empty()) return 0;
    return frames.front().boxes.front().size();
}

// ---------------------------------------------------------------------------

std::vector<int> partition_cuts(const BoxXd& b, int D)
{
    if (D < 1) throw ConfigError("partition count must be at least 1");
    const Eigen::Index n = b.size();
    if (n == 0) throw std::invalid_argument("uniform_partition: empty box");
    std::vector<int> cuts(static_cast<std::size_t>(n), 1);
    long long cells = 1;
    while (cells < D) {
        Eigen::Index widest = 0;
        for (Eigen::Index i = 1; i < n; ++i)
            if (b.width(i) / cuts[i] > b.width(widest) / cuts[widest]) widest = i;
        cuts[widest] *= 2;
        cells *= 2;
    }
    if (cells != D)
        throw ConfigError("partition count " + std::to_string(D) +
                          " is not reachable by widest-axis bisection (must be a power of two)");
    return cuts;
}

std::vector<BoxXd> uniform_partition(const BoxXd& b, int D)
{
    const auto cuts = partition_cuts(b, D);
    const Eigen::Index n = b.size();
    auto edge = [&](Eigen::Index i, int k) {
        if (k == cuts[i]) return b.upper()(i);
        return b.lower()(i) + b.width(i) * static_cast<double>(k) / cuts[i];
    };
    std::vector<BoxXd> out;
    out.reserve(static_cast<std::size_t>(D));
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    while (true) {
        VectorXd lo(n), hi(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            lo(i) = edge(i, idx[i]);
            hi(i) = edge(i, idx[i] + 1);
        }
        out.emplace_back(std::move(lo), std::move(hi));
        Eigen::Index i = n - 1;
        while (i >= 0 && ++idx[i] == cuts[i]) idx[i--] = 0;
        if (i < 0) break;
    }
    return out;
}

// ---------------------------------------------------------------------------

ReachTube run_algorithm1(const ScenarioConfig& sc, ReachStats* stats)
{
    sc.validate();
    const auto total_start = std::chrono::steady_clock::now();
    const std::size_t frames = sc.frame_count();
    const double dt = sc.actuation_step();
    const auto loop = sc.closed_loop();
    const bool frozen = sc.strategy == Strategy::frozen_hybrid;

    ReachTube tube;
    tube.info = TubeInfo{sc.name,
                         sc.system->name(),
                         sc.strategy,
                         sc.partitions,
                         sc.subpartitions,
                         dt,
                         sc.horizon,
                         sc.integrator.method,
                         sc.integrator.step,
                         sc.system->state_labels()};

    ReachFrame first;
    for (const auto& part : uniform_partition(sc.initial_set, sc.partitions))
        for (auto& sub : uniform_partition(part, sc.subpartitions)) first.boxes.push_back(sub);
    tube.frames.push_back(std::move(first));

    const EmbeddingRHS prototype(loop, sc.disturbance, sc.strategy);
    const auto Ds = static_cast<std::size_t>(sc.subpartitions);
    std::size_t crown_calls = 0;

    for (std::size_t j = 0; j < frames; ++j) {
        const auto frame_start = std::chrono::steady_clock::now();
        const BoxXd current = tube.frames.back().hull();
        const auto parts = uniform_partition(current, sc.partitions);

        std::vector<BoxXd> subs;
        for (const auto& part : parts)
            for (auto& sub : uniform_partition(part, sc.subpartitions)) subs.push_back(sub);

        std::vector<std::optional<LinearBounds<double>>> frozen_bounds(parts.size());
        if (frozen) {
            const auto errors = parallel_for(parts.size(), sc.workers, [&](std::size_t k) {
                frozen_bounds[k] = crown_bounds(*loop.network, parts[k], loop.crown);
            });
            for (std::size_t k = 0; k < errors.size(); ++k)
                if (errors[k])
                    rethrow_with_context(errors[k], "frame " + std::to_string(j) + ", partition " +
                                                        std::to_string(k) + ": ");
            crown_calls += parts.size();
        }

        std::vector<BoxXd> results(subs.size());
        std::vector<std::size_t> calls(subs.size(), 0);
        const auto errors = parallel_for(subs.size(), sc.workers, [&](std::size_t b) {
            EmbeddingRHS rhs = prototype;
            if (frozen) rhs.freeze(*frozen_bounds[b / Ds]);
            const auto end = integrate_embedding(rhs, EmbeddingState<double>::from_box(subs[b]), dt,
                                                 sc.integrator);
            results[b] = BoxXd(end.x.cwiseMin(end.xhat), end.x.cwiseMax(end.xhat));
            calls[b] = rhs.crown_calls();
        });
        for (std::size_t b = 0; b < errors.size(); ++b)
            if (errors[b])
                rethrow_with_context(errors[b], "frame " + std::to_string(j) + ", partition " +
                                                    std::to_string(b / Ds) + ", sub-partition " +
                                                    std::to_string(b % Ds) + ": ");
        for (auto c : calls) crown_calls += c;

        ReachFrame next;
        next.time = static_cast<double>(j + 1) * dt;
        next.boxes = std::move(results);
        tube.frames.push_back(std::move(next));
        if (stats) stats->frame_seconds.push_back(seconds_since(frame_start));
    }
    if (stats) {
        stats->crown_calls = crown_calls;
        stats->total_seconds = seconds_since(total_start);
    }
    return tube;
}

// ---------------------------------------------------------------------------

std::vector<Trajectory> monte_carlo_trajectories(const ScenarioConfig& sc, std::size_t count,
                                                 std::uint64_t seed)
{
    sc.validate();
    const std::size_t frames = sc.frame_count();
    const double dt = sc.actuation_step();
    const Eigen::Index n = sc.system->state_dim();
    const Eigen::Index q = sc.system->disturbance_dim();

    // All draws happen up front so the samples do not depend on the worker count.
    std::mt19937_64 rng(seed);
    auto uniform = [&rng](double lo, double hi) {
        if (lo == hi) return lo;
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };
    std::vector<VectorXd> starts(count);
    std::vector<std::vector<VectorXd>> disturbances(count);
    for (std::size_t s = 0; s < count; ++s) {
        starts[s].resize(n);
        for (Eigen::Index i = 0; i < n; ++i)
            starts[s](i) = uniform(sc.initial_set.lower()(i), sc.initial_set.upper()(i));
        disturbances[s].resize(frames);
        for (auto& w : disturbances[s]) {
            w.resize(q);
            for (Eigen::Index i = 0; i < q; ++i)
                w(i) = uniform(sc.disturbance.lower()(i), sc.disturbance.upper()(i));
        }
    }

    const auto loop = sc.closed_loop();
    std::vector<Trajectory> out(count);
    const auto errors = parallel_for(count, sc.workers, [&](std::size_t s) {
        auto& states = out[s].states;
        states.reserve(frames + 1);
        states.push_back(starts[s]);
        for (std::size_t j = 0; j < frames; ++j) {
            const VectorXd& w = disturbances[s][j];
            const OdeRhs f = [&](const VectorXd& x) { return loop.field(x, w); };
            states.push_back(
                integrate_fixed(f, states.back(), dt, sc.integrator.step, sc.integrator.method));
        }
    });
    for (std::size_t s = 0; s < count; ++s)
        if (errors[s]) rethrow_with_context(errors[s], "sample " + std::to_string(s) + ": ");
    return out;
}

// ---------------------------------------------------------------------------

bool SafetyReport::all_safe() const
{
    return std::all_of(frames.begin(), frames.end(), [](Verdict v) { return v == Verdict::safe; });
}

bool box_clear_of(const BoxXd& b, const Obstacle& o)
{
    if (o.dim_x < 0 || o.dim_x >= b.size() || o.dim_y < 0 || o.dim_y >= b.size())
        throw ConfigError("obstacle coordinates outside the state dimension");
    const double px = std::clamp(o.center_x, b.lower()(o.dim_x), b.upper()(o.dim_x));
    const double py = std::clamp(o.center_y, b.lower()(o.dim_y), b.upper()(o.dim_y));
    return std::hypot(px - o.center_x, py - o.center_y) > o.padded_radius();
}

SafetyReport check_safety(const ReachTube& tube, const std::vector<Obstacle>& obstacles)
{
    SafetyReport report;
    for (const auto& frame : tube.frames) {
        bool safe = true;
        for (const auto& b : frame.boxes)
            for (const auto& o : obstacles) safe = box_clear_of(b, o) && safe;
        report.frames.push_back(safe ? Verdict::safe : Verdict::unknown);
    }
    return report;
}

ContainmentReport check_containment(const ReachTube& tube, const std::vector<Trajectory>& samples,
                                    double slack)
{
    ContainmentReport r;
    r.samples = samples.size();
    r.frames = tube.frames.empty() ? 0 : tube.frames.size() - 1;
    r.violations_per_frame.assign(tube.frames.size(), 0);
    r.min_margin = std::numeric_limits<double>::infinity();
    std::vector<BoxXd> hulls;
    for (const auto& f : tube.frames) hulls.push_back(f.hull());
    for (const auto& traj : samples) {
        if (traj.states.size() != tube.frames.size())
            throw std::invalid_argument("check_containment: trajectory has " +
                                        std::to_string(traj.states.size()) + " states, tube has " +
                                        std::to_string(tube.frames.size()) + " frames");
        for (std::size_t j = 0; j < hulls.size(); ++j) {
            const VectorXd& z = traj.states[j];
            detail::require_same_size(z.size(), hulls[j].size(), "check_containment");
            const double margin =
                std::min((z - hulls[j].lower()).minCoeff(), (hulls[j].upper() - z).minCoeff());
            r.min_margin = std::min(r.min_margin, margin);
            if (margin < -slack) {
                ++r.violations;
                ++r.violations_per_frame[j];
            }
        }
    }
    return r;
}

NestingReport check_nesting(const ReachTube& inner, const ReachTube& outer, double slack)
{
    if (inner.frames.size() != outer.frames.size())
        throw std::invalid_argument("check_nesting: tubes have different frame counts");
    NestingReport r;
    for (std::size_t j = 0; j < inner.frames.size(); ++j) {
        const BoxXd a = inner.frames[j].hull();
        const BoxXd b = outer.frames[j].hull();
        const double excess = std::max((b.lower() - a.lower()).maxCoeff(),
                                       (a.upper() - b.upper()).maxCoeff());
        r.worst_excess = std::max(r.worst_excess, excess);
        if (excess > slack && r.nested) {
            r.nested = false;
            r.first_failure = j;
        }
    }
    return r;
}

} // namespace nnreach
