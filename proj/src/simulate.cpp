#include "radelft/simulate.hpp"

#include <cmath>
#include <random>

#include "radelft/errors.hpp"
#include "radelft/parallel.hpp"
#include "radelft/rng.hpp"

namespace radelft {
namespace sim {

namespace {

struct Reflector {
  Vec3 pos;  // at scene time zero
  Vec3 vel;
  double amplitude;
};

double norm3(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

Vec3 at(const Vec3& p, const Vec3& v, double t) {
  return Vec3{p[0] + v[0] * t, p[1] + v[1] * t, p[2] + v[2] * t};
}

// Deterministic body-frame surface samples of a box: four sides plus the
// top, counts split by face area with largest-remainder rounding so the
// total is ceil(density * exposed area).
std::vector<Vec3> boxSurfaceSamples(const ExtendedTarget& t, int total, std::uint64_t seed) {
  const double w = t.size[0], l = t.size[1], h = t.size[2];
  struct Face {
    double area;
    int axis;    // fixed axis: 0=x, 1=y, 2=z
    double side; // -1 or +1 along the fixed axis
  };
  const std::vector<Face> faces = {
      {l * h, 0, -1.0}, {l * h, 0, 1.0}, {w * h, 1, -1.0}, {w * h, 1, 1.0}, {w * l, 2, 1.0}};
  double area_sum = 0.0;
  for (const auto& f : faces) area_sum += f.area;

  std::vector<int> counts(faces.size(), 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  int assigned = 0;
  for (std::size_t i = 0; i < faces.size(); ++i) {
    const double exact = total * faces[i].area / area_sum;
    counts[i] = static_cast<int>(exact);
    assigned += counts[i];
    remainders.push_back({exact - counts[i], i});
  }
  std::sort(remainders.begin(), remainders.end(),
            [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
  for (int k = 0; k < total - assigned; ++k) counts[remainders[k].second]++;

  std::mt19937_64 rng = makeRng(seed);
  std::uniform_real_distribution<double> uni(-0.5, 0.5);
  std::vector<Vec3> out;
  out.reserve(total);
  const Vec3 half{w / 2.0, l / 2.0, h / 2.0};
  for (std::size_t i = 0; i < faces.size(); ++i) {
    for (int k = 0; k < counts[i]; ++k) {
      Vec3 p{uni(rng) * w, uni(rng) * l, uni(rng) * h};
      p[faces[i].axis] = faces[i].side * half[faces[i].axis];
      out.push_back(p);
    }
  }
  return out;
}

std::vector<Reflector> radarReflectors(const Scene& scene) {
  std::vector<Reflector> out;
  for (const auto& s : scene.scatterers)
    out.push_back({s.position, s.velocity, s.rcs_amplitude});
  for (std::size_t i = 0; i < scene.extended_targets.size(); ++i) {
    const auto& t = scene.extended_targets[i];
    const auto body = boxSurfaceSamples(t, t.radar_scatterer_count,
                                        mixSeed(scene.rng_seed, kStreamRadarSurface, i));
    for (const auto& b : body)
      out.push_back({Vec3{t.center[0] + b[0], t.center[1] + b[1], t.center[2] + b[2]},
                     t.velocity, t.reflectivity});
  }
  return out;
}

}  // namespace

AdcFrame synthesizeAdc(const Scene& scene, const WaveformConfig& cfg, const ArrayGeometry& geom,
                       double noise_power, int frame_index) {
  scene.validate();
  cfg.validate();
  if (noise_power < 0.0) throwError(ErrorCode::InvalidArgument, "synthesizeAdc: noise_power < 0");
  if (geom.numTx() != cfg.n_tx || geom.numRx() != cfg.n_rx)
    throwError(ErrorCode::Config, "synthesizeAdc: array element counts disagree with waveform");

  const DerivedQuantities der = derivedQuantities(cfg);
  const double lambda = cfg.lambda();
  const double dt = cfg.chirpStep();
  const double t_frame = frame_index / scene.frame_rate_hz;
  const int n_fast = cfg.n_adc;
  const int n_slow = cfg.n_chirps;
  const int n_chirps_total = cfg.n_chirps * cfg.n_tx;
  const int n_vchan = geom.numVirtual();

  AdcFrame frame;
  frame.timestamp_s = t_frame;
  frame.data = Tensor<Cplx>({static_cast<std::size_t>(n_fast), static_cast<std::size_t>(n_slow),
                             static_cast<std::size_t>(n_vchan)});
  frame.tx_of_chirp.resize(n_chirps_total);
  for (int c = 0; c < n_chirps_total; ++c) frame.tx_of_chirp[c] = c % cfg.n_tx;

  const auto reflectors = radarReflectors(scene);
  for (const auto& ref : reflectors) {
    const double r0 = norm3(at(ref.pos, ref.vel, t_frame));
    if (!(r0 > 0.0) || r0 >= der.r_max_m)
      throwError(ErrorCode::InvalidArgument, "synthesizeAdc: reflector outside (0, r_max)");
  }

  // Chirps are independent; parallelize over the raw chirp index.
  parallelFor(static_cast<std::size_t>(n_chirps_total), [&](std::size_t ci) {
    const int c = static_cast<int>(ci);
    const int tx = frame.tx_of_chirp[c];
    const int s = c / cfg.n_tx;
    const double tau = t_frame + c * dt;
    Cplx* slow_slice = frame.data.data();
    for (const auto& ref : reflectors) {
      const Vec3 p = at(ref.pos, ref.vel, tau);
      const double range = norm3(p);
      const double u = p[0] / range;
      const double w = p[2] / range;
      const double f_b = 2.0 * range * cfg.slope_hz_per_s / kSpeedOfLight;
      const double phi_dopp = 4.0 * M_PI * range / lambda;
      const Cplx step = std::polar(1.0, 2.0 * M_PI * f_b / cfg.f_s_hz);
      for (int rx = 0; rx < cfg.n_rx; ++rx) {
        const int ch = geom.channelIndex(tx, rx);
        const VirtualElement& ve = geom.virtual_pos[ch];
        const double phi_array = M_PI * (u * ve.x + w * ve.z);
        Cplx sample = std::polar(ref.amplitude, phi_dopp + phi_array);
        for (int n = 0; n < n_fast; ++n) {
          slow_slice[(static_cast<std::size_t>(n) * n_slow + s) * n_vchan + ch] += sample;
          sample *= step;
        }
      }
    }
  });

  if (noise_power > 0.0) {
    const double sigma = std::sqrt(noise_power / 2.0);
    std::mt19937_64 rng = makeRng(mixSeed(scene.rng_seed, kStreamNoise, frame_index));
    std::normal_distribution<double> gauss(0.0, sigma);
    for (auto& v : frame.data) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      v += Cplx{re, im};
    }
  }
  return frame;
}

PointCloud sampleGroundTruthLabeled(const Scene& scene, int frame_index, double r_max,
                                    std::vector<int>* labels) {
  scene.validate();
  const double t = frame_index / scene.frame_rate_hz;
  PointCloud pc;
  if (labels) labels->clear();
  auto push = [&](const Vec3& p, int label) {
    pc.append(p[0], p[1], p[2]);
    if (labels) labels->push_back(label);
  };

  // Ground patch: forward half-disc, area-uniform samples, fixed pattern.
  if (scene.ground_density > 0.0) {
    const double radius = scene.ground_range_m > 0.0 ? scene.ground_range_m : r_max;
    const double area = 0.5 * M_PI * radius * radius;
    const int count = static_cast<int>(std::ceil(scene.ground_density * area));
    std::mt19937_64 rng = makeRng(mixSeed(scene.rng_seed, kStreamGround));
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int i = 0; i < count; ++i) {
      const double r = radius * std::sqrt(uni(rng));
      const double az = (uni(rng) - 0.5) * M_PI;  // forward half-plane (y > 0)
      push(Vec3{r * std::sin(az), r * std::cos(az), -scene.sensor_height_m}, 0);
    }
  }

  for (std::size_t i = 0; i < scene.extended_targets.size(); ++i) {
    const auto& target = scene.extended_targets[i];
    const int count = static_cast<int>(std::ceil(target.surface_density * target.exposedArea()));
    const auto body = boxSurfaceSamples(target, count,
                                        mixSeed(scene.rng_seed, kStreamLidarSurface, i));
    const Vec3 c = at(target.center, target.velocity, t);
    for (const auto& b : body) push(Vec3{c[0] + b[0], c[1] + b[1], c[2] + b[2]}, 1);
  }

  for (const auto& s : scene.scatterers) push(at(s.position, s.velocity, t), 2);
  return pc;
}

PointCloud sampleGroundTruth(const Scene& scene, int frame_index, double r_max) {
  return sampleGroundTruthLabeled(scene, frame_index, r_max, nullptr);
}

}  // namespace sim
}  // namespace radelft
