#include "nnreach/tube_io.hpp"

#include "nnreach/errors.hpp"
#include "json_util.hpp"

#include <charconv>
#include <fstream>
#include <ostream>

namespace nnreach {

using json_util::field;
using json_util::json;

std::string format_double(double v)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string tube_to_json(const ReachTube& tube)
{
    const auto& in = tube.info;
    json info{{"scenario", in.scenario},
              {"system", in.system},
              {"strategy", std::string(to_string(in.strategy))},
              {"Da", in.partitions},
              {"Ds", in.subpartitions},
              {"dt", in.actuation_step},
              {"T", in.horizon},
              {"integrator", std::string(to_string(in.method))},
              {"step", in.step},
              {"state_labels", in.state_labels}};
    json frames = json::array();
    for (std::size_t j = 0; j < tube.frames.size(); ++j) {
        json boxes = json::array();
        for (const auto& b : tube.frames[j].boxes) boxes.push_back(json_util::from_box(b));
        frames.push_back(json{{"index", j}, {"time", tube.frames[j].time}, {"boxes", boxes}});
    }
    return json{{"info", info}, {"frames", frames}}.dump(1) + "\n";
}

ReachTube tube_from_json(const std::string& text)
{
    try {
        const json j = json::parse(text);
        ReachTube tube;
        const json& info = field(j, "info", "tube");
        tube.info.scenario = info.value("scenario", std::string());
        tube.info.system = info.value("system", std::string());
        const auto strategy = parse_strategy(info.value("strategy", std::string("hybrid")));
        if (!strategy) throw ConfigError("tube: unknown strategy");
        tube.info.strategy = *strategy;
        tube.info.partitions = info.value("Da", 1);
        tube.info.subpartitions = info.value("Ds", 1);
        tube.info.actuation_step = info.value("dt", 0.0);
        tube.info.horizon = info.value("T", 0.0);
        const auto method = parse_integrator(info.value("integrator", std::string("rk4")));
        if (!method) throw ConfigError("tube: unknown integrator");
        tube.info.method = *method;
        tube.info.step = info.value("step", 0.0);
        tube.info.state_labels = info.value("state_labels", std::vector<std::string>{});

        for (const auto& fj : field(j, "frames", "tube")) {
            ReachFrame f;
            f.time = field(fj, "time", "frame").get<double>();
            for (const auto& bj : field(fj, "boxes", "frame"))
                f.boxes.push_back(json_util::to_box(bj, "frame box"));
            if (f.boxes.empty()) throw ConfigError("tube: frame without boxes");
            tube.frames.push_back(std::move(f));
        }
        if (tube.frames.empty()) throw ConfigError("tube: no frames");
        return tube;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("tube: ") + e.what());
    }
}

void save_tube(const ReachTube& tube, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << tube_to_json(tube);
}

ReachTube load_tube(const std::filesystem::path& path)
{
    const json j = json_util::read_json_file(path);
    try {
        return tube_from_json(j.dump());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void write_tube_csv(const ReachTube& tube, std::ostream& os)
{
    os << "time,frame,branch,dim,lower,upper\n";
    for (std::size_t j = 0; j < tube.frames.size(); ++j) {
        const auto& f = tube.frames[j];
        for (std::size_t b = 0; b < f.boxes.size(); ++b)
            for (Eigen::Index i = 0; i < f.boxes[b].size(); ++i)
                os << format_double(f.time) << ',' << j << ',' << b << ',' << i << ','
                   << format_double(f.boxes[b].lower()(i)) << ','
                   << format_double(f.boxes[b].upper()(i)) << '\n';
    }
}

void write_trajectories_csv(const std::vector<Trajectory>& samples, const ReachTube& tube,
                            std::ostream& os)
{
    os << "sample,frame,time";
    const Eigen::Index n = tube.state_dim();
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        os << ',' << (k < tube.info.state_labels.size() ? tube.info.state_labels[k] : "x" + std::to_string(i));
    }
    os << '\n';
    for (std::size_t s = 0; s < samples.size(); ++s)
        for (std::size_t j = 0; j < samples[s].states.size(); ++j) {
            os << s << ',' << j << ','
               << format_double(j < tube.frames.size() ? tube.frames[j].time : 0.0);
            for (Eigen::Index i = 0; i < samples[s].states[j].size(); ++i)
                os << ',' << format_double(samples[s].states[j](i));
            os << '\n';
        }
}

void write_plotdata_csv(const ReachTube& tube, Eigen::Index dim_x, Eigen::Index dim_y,
                        std::ostream& os)
{
    const Eigen::Index n = tube.state_dim();
    if (dim_x < 0 || dim_x >= n || dim_y < 0 || dim_y >= n)
        throw ConfigError("plot dims (" + std::to_string(dim_x) + ", " + std::to_string(dim_y) +
                          ") outside the " + std::to_string(n) + "-dimensional tube");
    os << "frame,time,branch,corner,x,y\n";
    for (std::size_t j = 0; j < tube.frames.size(); ++j) {
        const auto& f = tube.frames[j];
        for (std::size_t b = 0; b < f.boxes.size(); ++b) {
            const auto& box = f.boxes[b];
            const double xs[4] = {box.lower()(dim_x), box.upper()(dim_x), box.upper()(dim_x),
                                  box.lower()(dim_x)};
            const double ys[4] = {box.lower()(dim_y), box.lower()(dim_y), box.upper()(dim_y),
                                  box.upper()(dim_y)};
            for (int c = 0; c < 4; ++c)
                os << j << ',' << format_double(f.time) << ',' << b << ',' << c << ','
                   << format_double(xs[c]) << ',' << format_double(ys[c]) << '\n';
        }
    }
}

} // namespace nnreach
