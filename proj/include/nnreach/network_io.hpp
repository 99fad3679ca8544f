#ifndef NNREACH_NETWORK_IO_HPP
#define NNREACH_NETWORK_IO_HPP

#include "nnreach/network.hpp"

#include <filesystem>
#include <string>

namespace nnreach {

// Weight file: {"layers":[{"W":[[..]],"b":[..],"act":"relu"},..],"out":{"W":..,"b":..}}
// with row-major matrices. Doubles are written in shortest round-trip form.

Network parse_network(const std::string& json_text);
Network load_network(const std::filesystem::path& path);

std::string network_to_json(const Network& net);
void save_network(const Network& net, const std::filesystem::path& path);

} // namespace nnreach

#endif
