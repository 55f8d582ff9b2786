#include "mvreg/scene_io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mvreg/structured_text.hpp"

namespace mvreg {

namespace fs = std::filesystem;

std::string pose_to_line(const RigidTransform& T) {
  std::ostringstream out;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out << format_double(T.R(r, c)) << ' ';
  out << format_double(T.t.x()) << ' ' << format_double(T.t.y()) << ' '
      << format_double(T.t.z());
  return out.str();
}

RigidTransform pose_from_line(const std::string& line) {
  std::istringstream in(line);
  double v[12];
  for (int k = 0; k < 12; ++k) {
    if (!(in >> v[k])) throw std::runtime_error("pose line needs 12 numbers: '" + line + "'");
  }
  RigidTransform T;
  T.R << v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8];
  T.t << v[9], v[10], v[11];
  return T;
}

void save_pose_file(const std::string& path, const PoseSet& poses) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (const auto& T : poses.poses) out << pose_to_line(T) << "\n";
}

PoseSet load_pose_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  PoseSet poses;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    poses.poses.push_back(pose_from_line(line));
  }
  return poses;
}

namespace {

void save_cloud_csv(const std::string& path, const PointCloud& cloud) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "id,x,y,z\n";
  for (std::size_t k = 0; k < cloud.size(); ++k) {
    out << cloud.ids[k] << ',' << format_double(cloud.points[k].x()) << ','
        << format_double(cloud.points[k].y()) << ',' << format_double(cloud.points[k].z())
        << "\n";
  }
}

PointCloud load_cloud_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  PointCloud cloud;
  std::string line;
  if (!std::getline(in, line) || line.rfind("id,x,y,z", 0) != 0)
    throw std::runtime_error(path + ": expected header id,x,y,z");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    std::int64_t id;
    Vec3 p;
    if (!(row >> id >> p.x() >> p.y() >> p.z()))
      throw std::runtime_error(path + ": malformed row '" + line + "'");
    cloud.ids.push_back(id);
    cloud.points.push_back(p);
  }
  return cloud;
}

}  // namespace

void save_scene(const std::string& dir, const Scene& scene) {
  fs::create_directories(dir);

  StNode root;
  StNode& m = root.add_child("scene");
  m.set_int("n_scans", scene.cfg.n_scans);
  StNode& cfg = m.add_child("config");
  cfg.set_int("world_points", scene.cfg.world_points);
  cfg.set_double("room_extent", scene.cfg.room_extent);
  cfg.set_double("view_radius", scene.cfg.view_radius);
  cfg.set_double("point_noise", scene.cfg.point_noise);
  cfg.set_double("overlap_threshold", scene.cfg.overlap_threshold);
  cfg.set_int("seed", static_cast<long long>(scene.cfg.seed));
  StNode& gt = m.add_child("gt_poses");
  for (const auto& T : scene.gt.poses) gt.set("pose", pose_to_line(T));
  save_structured_file((fs::path(dir) / "manifest").string(), root);

  save_cloud_csv((fs::path(dir) / "world.csv").string(), scene.world);
  for (int i = 0; i < scene.n_scans(); ++i)
    save_cloud_csv((fs::path(dir) / ("scan_" + std::to_string(i) + ".csv")).string(),
                   scene.scans[i]);
}

Scene load_scene(const std::string& dir) {
  const StNode root = load_structured_file((fs::path(dir) / "manifest").string());
  const StNode* m = root.child("scene");
  if (!m) throw std::runtime_error(dir + "/manifest: missing 'scene' block");

  Scene scene;
  scene.cfg.n_scans = static_cast<int>(m->get_int("n_scans"));
  const StNode* cfg = m->child("config");
  if (!cfg) throw std::runtime_error(dir + "/manifest: missing 'config' block");
  scene.cfg.world_points = static_cast<int>(cfg->get_int("world_points"));
  scene.cfg.room_extent = cfg->get_double("room_extent");
  scene.cfg.view_radius = cfg->get_double("view_radius");
  scene.cfg.point_noise = cfg->get_double("point_noise");
  scene.cfg.overlap_threshold = cfg->get_double("overlap_threshold");
  scene.cfg.seed = static_cast<std::uint64_t>(cfg->get_int("seed"));

  const StNode* gt = m->child("gt_poses");
  if (!gt) throw std::runtime_error(dir + "/manifest: missing 'gt_poses' block");
  for (const std::string& line : gt->get_all("pose"))
    scene.gt.poses.push_back(pose_from_line(line));
  if (static_cast<int>(scene.gt.size()) != scene.cfg.n_scans)
    throw std::runtime_error(dir + "/manifest: pose count does not match n_scans");

  scene.world = load_cloud_csv((fs::path(dir) / "world.csv").string());
  scene.scans.resize(scene.cfg.n_scans);
  for (int i = 0; i < scene.cfg.n_scans; ++i)
    scene.scans[i] = load_cloud_csv((fs::path(dir) / ("scan_" + std::to_string(i) + ".csv")).string());

  const int n = scene.cfg.n_scans;
  scene.overlap.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) scene.overlap(i, j) = overlap_ratio(scene, i, j);
  return scene;
}

void save_pair_csv(const std::string& path, const std::vector<PairError>& pairs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "i,j,RE_deg,TE_m\n";
  for (const auto& p : pairs)
    out << p.i << ',' << p.j << ',' << format_double(p.re_deg) << ',' << format_double(p.te_m)
        << "\n";
}

std::vector<PairError> load_pair_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<PairError> pairs;
  std::string line;
  if (!std::getline(in, line) || line.rfind("i,j,RE_deg,TE_m", 0) != 0)
    throw std::runtime_error(path + ": expected header i,j,RE_deg,TE_m");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    PairError p;
    if (!(row >> p.i >> p.j >> p.re_deg >> p.te_m))
      throw std::runtime_error(path + ": malformed row '" + line + "'");
    pairs.push_back(p);
  }
  return pairs;
}

}  // namespace mvreg
