#pragma once

#include <string>
#include <vector>

#include "mvreg/geometry.hpp"
#include "mvreg/lie.hpp"
#include "mvreg/losses.hpp"

namespace mvreg {

// Pose text format: one transform per line, 12 whitespace-separated decimals
// (row-major 3x3 rotation then translation x y z), 17 significant digits.
std::string pose_to_line(const RigidTransform& T);
RigidTransform pose_from_line(const std::string& line);
void save_pose_file(const std::string& path, const PoseSet& poses);
PoseSet load_pose_file(const std::string& path);

// Scene directory: `manifest` (structured text with n_scans, config, gt
// poses), `scan_<i>.csv` with header id,x,y,z, and `world.csv`.
void save_scene(const std::string& dir, const Scene& scene);
Scene load_scene(const std::string& dir);

// Per-pair error rows: CSV i,j,RE_deg,TE_m.
void save_pair_csv(const std::string& path, const std::vector<PairError>& pairs);
std::vector<PairError> load_pair_csv(const std::string& path);

}  // namespace mvreg
