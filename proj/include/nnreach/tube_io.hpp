#ifndef NNREACH_TUBE_IO_HPP
#define NNREACH_TUBE_IO_HPP

#include "nnreach/reach.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace nnreach {

/// Tube document: {"info": {...}, "frames": [{"index", "time", "boxes": [{"lower", "upper"}]}]}.
/// Output depends only on the tube contents, so equal tubes give equal bytes.
std::string tube_to_json(const ReachTube& tube);
ReachTube tube_from_json(const std::string& text);

void save_tube(const ReachTube& tube, const std::filesystem::path& path);
ReachTube load_tube(const std::filesystem::path& path);

/// Flat CSV with columns time,frame,branch,dim,lower,upper.
void write_tube_csv(const ReachTube& tube, std::ostream& os);

/// CSV with columns sample,frame,time,<state labels>.
void write_trajectories_csv(const std::vector<Trajectory>& samples, const ReachTube& tube,
                            std::ostream& os);

/// Rectangle corners (counter-clockwise from the lower-left) of every box
/// projected onto (dim_x, dim_y): frame,time,branch,corner,x,y.
void write_plotdata_csv(const ReachTube& tube, Eigen::Index dim_x, Eigen::Index dim_y,
                        std::ostream& os);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

} // namespace nnreach

#endif
