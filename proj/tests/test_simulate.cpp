#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstring>
#include <vector>

#include "radelft/errors.hpp"
#include "radelft/simulate.hpp"

using namespace radelft;
using namespace radelft::sim;

namespace {

// Test-local reference: windowless DFT magnitude of fast-time samples of one
// chirp/channel, padded to n_fft.
std::vector<double> rangeProfile(const AdcFrame& frame, std::size_t slow, std::size_t ch,
                                 std::size_t n_fft) {
  std::vector<double> mag(n_fft);
  for (std::size_t k = 0; k < n_fft; ++k) {
    Cplx acc{0.0, 0.0};
    for (std::size_t n = 0; n < frame.numFast(); ++n)
      acc += frame.data(n, slow, ch) *
             std::polar(1.0, -2.0 * M_PI * static_cast<double>(k * n) / n_fft);
    mag[k] = std::norm(acc);
  }
  return mag;
}

Scene sceneWith(std::vector<Scatterer> scatterers) {
  Scene s;
  s.scatterers = std::move(scatterers);
  s.ground_density = 0.0;
  s.frame_rate_hz = 10.0;
  s.duration_s = 1.0;
  s.rng_seed = 5;
  return s;
}

}  // namespace

TEST_CASE("empty scene with zero noise synthesizes an all-zero frame") {
  const WaveformConfig cfg = WaveformConfig::make(76e9, 35e12, 28e-6, 5e-6, 32, 8, 12e6, 3, 4);
  const AdcFrame f = synthesizeAdc(sceneWith({}), cfg, ArrayGeometry::mini(), 0.0, 0);
  for (const auto& v : f.data) CHECK(v == Cplx{0.0, 0.0});
}

TEST_CASE("boresight scatterer at 10 m lands on the analytic beat-frequency bin") {
  // Reference waveform parameters, single-channel: the expected range bin is
  // round(f_b / (f_s / n_fft)) with f_b = 2 R slope / c, i.e. round(10 / 0.2).
  const WaveformConfig cfg = WaveformConfig::make(76e9, 35e12, 28e-6, 5e-6, 256, 8, 12e6, 1, 1);
  ArrayGeometry single = ArrayGeometry::fromElements({{0, 0}}, {{0, 0}});
  Scatterer sc;
  sc.position = {0.0, 10.0, 0.0};
  const AdcFrame f = synthesizeAdc(sceneWith({sc}), cfg, single, 0.0, 0);

  const double f_b = 2.0 * 10.0 * cfg.slope_hz_per_s / kSpeedOfLight;
  const std::size_t expected = static_cast<std::size_t>(
      std::llround(f_b / (cfg.f_s_hz / cfg.n_adc)));
  CHECK(expected == 50);

  const auto mag = rangeProfile(f, 0, 0, cfg.n_adc);
  std::size_t peak = 0;
  for (std::size_t k = 1; k < mag.size() / 2; ++k)
    if (mag[k] > mag[peak]) peak = k;
  CHECK(peak == expected);
}

TEST_CASE("slow-time phase advance per PRI equals 4 pi v PRI / lambda") {
  const WaveformConfig cfg = WaveformConfig::make(76e9, 35e12, 28e-6, 5e-6, 32, 8, 12e6, 3, 4);
  const ArrayGeometry geom = ArrayGeometry::mini();
  Scatterer sc;
  sc.position = {0.0, 15.0, 0.0};
  sc.velocity = {0.0, 1.0, 0.0};  // 1 m/s radially away
  const AdcFrame f = synthesizeAdc(sceneWith({sc}), cfg, geom, 0.0, 0);

  const double expected = 4.0 * M_PI * 1.0 * cfg.pri() / cfg.lambda();
  // Fast-time sample 0 carries no beat phase, only the Doppler/array terms.
  for (std::size_t s = 0; s + 1 < f.numSlow(); ++s) {
    const double measured = std::arg(f.data(0, s + 1, 0) * std::conj(f.data(0, s, 0)));
    const double wrapped = std::remainder(expected - measured, 2.0 * M_PI);
    CHECK(std::abs(wrapped) < 1e-6);
  }
}

TEST_CASE("energy linearity: doubling the amplitude quadruples the peak power") {
  const WaveformConfig cfg = WaveformConfig::make(76e9, 35e12, 28e-6, 5e-6, 64, 4, 12e6, 1, 1);
  ArrayGeometry single = ArrayGeometry::fromElements({{0, 0}}, {{0, 0}});
  Scatterer sc;
  sc.position = {0.0, 12.0, 0.0};
  sc.rcs_amplitude = 1.0;
  const AdcFrame f1 = synthesizeAdc(sceneWith({sc}), cfg, single, 0.0, 0);
  sc.rcs_amplitude = 2.0;
  const AdcFrame f2 = synthesizeAdc(sceneWith({sc}), cfg, single, 0.0, 0);

  const auto m1 = rangeProfile(f1, 0, 0, cfg.n_adc);
  const auto m2 = rangeProfile(f2, 0, 0, cfg.n_adc);
  std::size_t peak = 0;
  for (std::size_t k = 1; k < m1.size(); ++k)
    if (m1[k] > m1[peak]) peak = k;
  CHECK(m2[peak] == doctest::Approx(4.0 * m1[peak]).epsilon(1e-6));
}

TEST_CASE("single-Tx synthesis matches a direct evaluation of the signal model") {
  const WaveformConfig cfg = WaveformConfig::make(76e9, 35e12, 28e-6, 5e-6, 16, 4, 12e6, 1, 2);
  const ArrayGeometry geom = ArrayGeometry::fromElements({{0, 0}}, {{0, 0}, {1, 0}});
  Scatterer sc;
  sc.position = {3.0, 20.0, 1.0};
  sc.velocity = {0.5, -2.0, 0.0};
  sc.rcs_amplitude = 1.7;
  const Scene scene = sceneWith({sc});
  const int frame_index = 3;
  const AdcFrame f = synthesizeAdc(scene, cfg, geom, 0.0, frame_index);

  const double lambda = cfg.lambda();
  const double dt = cfg.chirpStep();
  const double t0 = frame_index / scene.frame_rate_hz;
  for (std::size_t s = 0; s < f.numSlow(); ++s) {
    const double tau = t0 + s * dt;  // n_tx = 1: chirp index == slow index
    const double px = sc.position[0] + sc.velocity[0] * tau;
    const double py = sc.position[1] + sc.velocity[1] * tau;
    const double pz = sc.position[2] + sc.velocity[2] * tau;
    const double range = std::sqrt(px * px + py * py + pz * pz);
    const double f_b = 2.0 * range * cfg.slope_hz_per_s / kSpeedOfLight;
    for (int rx = 0; rx < 2; ++rx) {
      const double phi_array =
          M_PI * (px / range * geom.virtual_pos[rx].x + pz / range * geom.virtual_pos[rx].z);
      for (std::size_t n = 0; n < f.numFast(); ++n) {
        const Cplx expected =
            std::polar(sc.rcs_amplitude,
                       2.0 * M_PI * f_b * static_cast<double>(n) / cfg.f_s_hz +
                           4.0 * M_PI * range / lambda + phi_array);
        const Cplx got = f.data(n, s, rx);
        CHECK(std::abs(got - expected) < 1e-9 * sc.rcs_amplitude);
      }
    }
  }
}

TEST_CASE("identical scene, config and seed give bit-identical frames") {
  const WaveformConfig cfg = WaveformConfig::make(76e9, 35e12, 28e-6, 5e-6, 32, 8, 12e6, 3, 4);
  Scatterer sc;
  sc.position = {1.0, 25.0, -0.5};
  const Scene scene = sceneWith({sc});
  const AdcFrame a = synthesizeAdc(scene, cfg, ArrayGeometry::mini(), 0.8, 2);
  const AdcFrame b = synthesizeAdc(scene, cfg, ArrayGeometry::mini(), 0.8, 2);
  REQUIRE(a.data.size() == b.data.size());
  CHECK(std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(Cplx)) == 0);
}

TEST_CASE("a reflector beyond the unambiguous range is rejected") {
  const WaveformConfig cfg = WaveformConfig::make(76e9, 35e12, 28e-6, 5e-6, 32, 8, 12e6, 3, 4);
  Scatterer sc;
  sc.position = {0.0, 60.0, 0.0};  // r_max is 51.4 m
  CHECK_THROWS_AS(synthesizeAdc(sceneWith({sc}), cfg, ArrayGeometry::mini(), 0.0, 0), Error);
}

TEST_CASE("ground-truth sampling") {
  SUBCASE("box surface count is ceil(density x exposed area), repeatable") {
    Scene s;
    ExtendedTarget t;
    t.center = {0.0, 20.0, -0.75};
    t.size = {2.0, 4.0, 1.5};
    t.surface_density = 25.0;
    s.extended_targets.push_back(t);
    s.ground_density = 0.5;
    s.rng_seed = 9;

    // Exposed area: four sides plus top = 2 h (w + l) + w l = 26 m^2.
    CHECK(t.exposedArea() == doctest::Approx(26.0).epsilon(1e-12));
    std::vector<int> labels;
    const PointCloud pc = sampleGroundTruthLabeled(s, 0, 50.0, &labels);
    std::size_t target_points = 0;
    for (int l : labels) target_points += l == 1;
    CHECK(target_points == 650);  // ceil(25 * 26)

    const PointCloud pc2 = sampleGroundTruth(s, 0, 50.0);
    REQUIRE(pc2.size() == pc.size());
    for (std::size_t i = 0; i < pc.size(); ++i) {
      CHECK(pc2.x[i] == pc.x[i]);
      CHECK(pc2.y[i] == pc.y[i]);
      CHECK(pc2.z[i] == pc.z[i]);
    }
  }

  SUBCASE("empty scene produces only ground points") {
    Scene s;
    s.ground_density = 0.5;
    s.rng_seed = 4;
    std::vector<int> labels;
    const PointCloud pc = sampleGroundTruthLabeled(s, 0, 40.0, &labels);
    REQUIRE(pc.size() > 0);
    for (std::size_t i = 0; i < pc.size(); ++i) {
      CHECK(labels[i] == 0);
      CHECK(pc.z[i] == doctest::Approx(-s.sensor_height_m).epsilon(1e-12));
    }
  }

  SUBCASE("moving target translates rigidly between frames") {
    Scene s;
    ExtendedTarget t;
    t.center = {0.0, 20.0, 0.0};
    t.size = {1.0, 2.0, 1.0};
    t.velocity = {1.0, -2.0, 0.0};
    s.extended_targets.push_back(t);
    s.ground_density = 0.0;
    s.frame_rate_hz = 10.0;
    s.rng_seed = 2;

    const PointCloud a = sampleGroundTruth(s, 0, 50.0);
    const PointCloud b = sampleGroundTruth(s, 3, 50.0);
    REQUIRE(a.size() == b.size());
    const double dtm = 3.0 / s.frame_rate_hz;
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(b.x[i] == doctest::Approx(a.x[i] + t.velocity[0] * dtm).epsilon(1e-9));
      CHECK(b.y[i] == doctest::Approx(a.y[i] + t.velocity[1] * dtm).epsilon(1e-9));
      CHECK(b.z[i] == doctest::Approx(a.z[i] + t.velocity[2] * dtm).epsilon(1e-9));
    }
  }
}
