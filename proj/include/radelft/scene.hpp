#ifndef RADELFT_SCENE_HPP
#define RADELFT_SCENE_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace radelft {

using Vec3 = std::array<double, 3>;

// Single ideal point reflector.
struct Scatterer {
  Vec3 position{0.0, 0.0, 0.0};  // m, at scene time zero
  Vec3 velocity{0.0, 0.0, 0.0};  // m/s
  double rcs_amplitude = 1.0;    // linear voltage gain
};

// Axis-aligned box target occupying multiple resolution cells. The lidar
// samples its exposed faces (four sides plus the top) at surface_density;
// the radar sees radar_scatterer_count persistent surface scatterers of
// amplitude `reflectivity` each.
struct ExtendedTarget {
  Vec3 center{0.0, 0.0, 0.0};  // m, at scene time zero
  Vec3 size{1.0, 1.0, 1.0};    // (w, l, h) along (x, y, z), m
  Vec3 velocity{0.0, 0.0, 0.0};
  double surface_density = 25.0;  // lidar samples per m^2
  double reflectivity = 1.0;
  int radar_scatterer_count = 8;

  double exposedArea() const {
    return 2.0 * size[2] * (size[0] + size[1]) + size[0] * size[1];
  }
};

struct Scene {
  std::vector<Scatterer> scatterers;
  std::vector<ExtendedTarget> extended_targets;
  double duration_s = 1.0;
  double frame_rate_hz = 10.0;
  std::uint64_t rng_seed = 0;
  double sensor_height_m = 1.5;     // ground plane sits at z = -sensor_height_m
  double ground_density = 0.5;      // lidar ground samples per m^2 (0 disables)
  double ground_range_m = 0.0;      // 0 = follow the waveform's r_max

  int frameCount() const {
    return static_cast<int>(duration_s * frame_rate_hz + 0.5);
  }
  void validate() const;

  static Scene fromJsonFile(const std::string& path);
  static Scene fromJsonText(const std::string& text);
  std::string toJsonText() const;
};

}  // namespace radelft

#endif
