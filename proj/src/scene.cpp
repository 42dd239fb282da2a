#include "radelft/scene.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>

#include "radelft/errors.hpp"

namespace radelft {

using nlohmann::json;

namespace {

Vec3 vec3Of(const json& j, const char* key, Vec3 fallback = {0.0, 0.0, 0.0}) {
  if (!j.contains(key)) return fallback;
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != 3)
    throwError(ErrorCode::Format, std::string("scene: ") + key + " must be a 3-element array");
  return Vec3{a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

}  // namespace

void Scene::validate() const {
  if (!(frame_rate_hz > 0.0)) throwError(ErrorCode::Config, "scene: frame_rate must be positive");
  if (!(duration_s > 0.0)) throwError(ErrorCode::Config, "scene: duration must be positive");
  for (const auto& s : scatterers)
    for (double v : s.velocity)
      if (!std::isfinite(v)) throwError(ErrorCode::Config, "scene: scatterer speed must be finite");
  for (const auto& t : extended_targets) {
    if (!(t.size[0] > 0.0 && t.size[1] > 0.0 && t.size[2] > 0.0))
      throwError(ErrorCode::Config, "scene: extended target size must be positive");
    if (t.surface_density < 0.0 || t.radar_scatterer_count < 1)
      throwError(ErrorCode::Config, "scene: extended target sampling parameters invalid");
  }
}

Scene Scene::fromJsonText(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throwError(ErrorCode::Format, std::string("scene: invalid JSON: ") + e.what());
  }
  Scene s;
  s.duration_s = j.value("duration_s", s.duration_s);
  s.frame_rate_hz = j.value("frame_rate_hz", s.frame_rate_hz);
  s.rng_seed = j.value("rng_seed", s.rng_seed);
  s.sensor_height_m = j.value("sensor_height_m", s.sensor_height_m);
  s.ground_density = j.value("ground_density_per_m2", s.ground_density);
  s.ground_range_m = j.value("ground_range_m", s.ground_range_m);
  for (const auto& js : j.value("scatterers", json::array())) {
    Scatterer sc;
    sc.position = vec3Of(js, "position_m");
    sc.velocity = vec3Of(js, "velocity_mps");
    sc.rcs_amplitude = js.value("rcs_amplitude", 1.0);
    s.scatterers.push_back(sc);
  }
  for (const auto& jt : j.value("extended_targets", json::array())) {
    ExtendedTarget t;
    t.center = vec3Of(jt, "center_m");
    t.size = vec3Of(jt, "size_m", {1.0, 1.0, 1.0});
    t.velocity = vec3Of(jt, "velocity_mps");
    t.surface_density = jt.value("surface_density_per_m2", t.surface_density);
    t.reflectivity = jt.value("reflectivity", t.reflectivity);
    t.radar_scatterer_count = jt.value("radar_scatterer_count", t.radar_scatterer_count);
    s.extended_targets.push_back(t);
  }
  s.validate();
  return s;
}

Scene Scene::fromJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throwError(ErrorCode::Io, "scene: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return fromJsonText(text);
}

std::string Scene::toJsonText() const {
  json j;
  j["duration_s"] = duration_s;
  j["frame_rate_hz"] = frame_rate_hz;
  j["rng_seed"] = rng_seed;
  j["sensor_height_m"] = sensor_height_m;
  j["ground_density_per_m2"] = ground_density;
  j["ground_range_m"] = ground_range_m;
  j["scatterers"] = json::array();
  for (const auto& s : scatterers)
    j["scatterers"].push_back({{"position_m", s.position},
                               {"velocity_mps", s.velocity},
                               {"rcs_amplitude", s.rcs_amplitude}});
  j["extended_targets"] = json::array();
  for (const auto& t : extended_targets)
    j["extended_targets"].push_back({{"center_m", t.center},
                                     {"size_m", t.size},
                                     {"velocity_mps", t.velocity},
                                     {"surface_density_per_m2", t.surface_density},
                                     {"reflectivity", t.reflectivity},
                                     {"radar_scatterer_count", t.radar_scatterer_count}});
  return j.dump(2);
}

}  // namespace radelft
