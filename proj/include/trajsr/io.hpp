#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "trajsr/trajectory.hpp"

namespace trajsr::io {

// Trajectory interchange format: JSON Lines, one object per point,
//   {"traj_id":<string>,"seq":<int>,"lat":<float>,"lon":<float>,"t":<float>}
// seq ascending from 0 within each trajectory. Trajectories are grouped by
// traj_id in order of first appearance.
std::vector<Trajectory> read_trajectories(std::istream& in, const std::string& source_name = "<stream>");
std::vector<Trajectory> read_trajectories_file(const std::string& path);

void write_trajectories(std::ostream& out, const std::vector<Trajectory>& trajs);
void write_trajectories_file(const std::string& path, const std::vector<Trajectory>& trajs);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace trajsr::io
