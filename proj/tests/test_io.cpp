#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "radelft/config.hpp"
#include "radelft/errors.hpp"
#include "radelft/io.hpp"

using namespace radelft;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("radelft_io_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const char* name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("tensor container round trips bit-exactly") {
  TempDir tmp;

  SUBCASE("doubles") {
    Tensor<double> t({3, 4, 5});
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> uni(-1e6, 1e6);
    for (auto& v : t) v = uni(rng);
    io::writeTensor(tmp.file("t.rdlc"), t);
    const auto back = io::readTensor<double>(tmp.file("t.rdlc"));
    REQUIRE(back.sameShape(t));
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(back[i] == t[i]);
  }

  SUBCASE("complex") {
    Tensor<Cplx> t({2, 6});
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (auto& v : t) v = Cplx{uni(rng), uni(rng)};
    io::writeTensor(tmp.file("c.rdlc"), t);
    const auto back = io::readTensor<Cplx>(tmp.file("c.rdlc"));
    REQUIRE(back.sameShape(t));
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(back[i] == t[i]);
  }

  SUBCASE("bytes and ints") {
    Tensor<std::uint8_t> b({7});
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = static_cast<std::uint8_t>(i * 37);
    io::writeTensor(tmp.file("b.rdlc"), b);
    const auto bb = io::readTensor<std::uint8_t>(tmp.file("b.rdlc"));
    for (std::size_t i = 0; i < b.size(); ++i) CHECK(bb[i] == b[i]);

    Tensor<std::int32_t> k({2, 2});
    k(0, 0) = -5;
    k(1, 1) = 1 << 20;
    io::writeTensor(tmp.file("k.rdlc"), k);
    const auto kk = io::readTensor<std::int32_t>(tmp.file("k.rdlc"));
    CHECK(kk(0, 0) == -5);
    CHECK(kk(1, 1) == 1 << 20);
  }
}

TEST_CASE("readers reject bad magic, version and dtype") {
  TempDir tmp;
  Tensor<double> t({2});
  t[0] = 1.0;
  io::writeTensor(tmp.file("t.rdlc"), t);

  SUBCASE("dtype mismatch") { CHECK_THROWS_AS(io::readTensor<float>(tmp.file("t.rdlc")), Error); }
  SUBCASE("bad magic") {
    std::ofstream out(tmp.file("junk.rdlc"), std::ios::binary);
    out << "NOPEnope";
    out.close();
    CHECK_THROWS_AS(io::readTensor<double>(tmp.file("junk.rdlc")), Error);
  }
  SUBCASE("bad version") {
    std::fstream f(tmp.file("t.rdlc"), std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(4);
    const std::uint16_t v = 999;
    f.write(reinterpret_cast<const char*>(&v), sizeof v);
    f.close();
    CHECK_THROWS_AS(io::readTensor<double>(tmp.file("t.rdlc")), Error);
  }
  SUBCASE("truncated payload") {
    fs::resize_file(tmp.file("t.rdlc"), fs::file_size(tmp.file("t.rdlc")) - 4);
    CHECK_THROWS_AS(io::readTensor<double>(tmp.file("t.rdlc")), Error);
  }
}

TEST_CASE("point cloud PLY and CSV round trips") {
  TempDir tmp;
  PointCloud pc;
  pc.append(1.25, -2.5, 3.0);
  pc.append(0.001953125, 10.0, -0.5);  // exact in binary
  pc.doppler = {0.5, -1.25};
  pc.power_db = {12.5, -3.75};

  io::writePly(tmp.file("a.ply"), pc);
  const PointCloud p2 = io::readPly(tmp.file("a.ply"));
  REQUIRE(p2.size() == 2);
  CHECK(p2.featureCount() == 5);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(p2.x[i] == pc.x[i]);
    CHECK(p2.y[i] == pc.y[i]);
    CHECK(p2.z[i] == pc.z[i]);
    CHECK(p2.doppler[i] == pc.doppler[i]);
    CHECK(p2.power_db[i] == pc.power_db[i]);
  }

  io::writeCsv(tmp.file("a.csv"), pc);
  const PointCloud p3 = io::readCsv(tmp.file("a.csv"));
  REQUIRE(p3.size() == 2);
  CHECK(p3.featureCount() == 5);
  CHECK(p3.x[1] == pc.x[1]);

  SUBCASE("empty cloud still writes a valid zero-point PLY") {
    io::writePly(tmp.file("empty.ply"), PointCloud{});
    const PointCloud e = io::readPly(tmp.file("empty.ply"));
    CHECK(e.size() == 0);
  }
}

TEST_CASE("grid sidecar reconstructs the grid exactly") {
  TempDir tmp;
  const WaveformConfig desk = WaveformConfig::make(76e9, 35e12, 28e-6, 5e-6, 64, 32, 12e6, 5, 8);
  const PolarGrid g = PolarGrid::make(desk, 2, 128, 69, 48, 70.0, 20.0);
  io::writeGridJson(tmp.file("grid.json"), g);
  const PolarGrid g2 = io::readGridJson(tmp.file("grid.json"));
  CHECK(g2.sameGrid(g));
  CHECK(g2.az_fov_deg == g.az_fov_deg);
}

TEST_CASE("BEV PGM header and payload") {
  TempDir tmp;
  const PolarGrid g = PolarGrid::fromSteps(0.5, 4, 0.5, 2, 16, 1, 70.0, 20.0);
  OccupancyGrid occ = OccupancyGrid::zeros(g);
  occ.occ(0, 0, 0) = 1;
  io::writeBevPgm(tmp.file("bev.pgm"), occ);

  std::ifstream in(tmp.file("bev.pgm"), std::ios::binary);
  std::string magic;
  std::size_t w = 0, h = 0;
  int maxval = 0;
  in >> magic >> w >> h >> maxval;
  CHECK(magic == "P5");
  CHECK(w == g.numAzimuth());
  CHECK(h == g.numRange());
  CHECK(maxval == 255);
  in.get();  // single whitespace after the header
  std::vector<unsigned char> data(w * h);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
  REQUIRE(in.good());
  // Near range sits at the bottom row.
  CHECK(data[(h - 1) * w + 0] == 255);
  CHECK(data[0] == 0);
}

TEST_CASE("manifest save/load and pairing skew check") {
  TempDir tmp;
  io::Manifest m;
  io::FrameEntry e;
  e.index = 0;
  e.t_radar_s = 0.0;
  e.t_lidar_s = 0.03;
  e.adc = "adc_000000.rdlc";
  m.frames.push_back(e);
  m.save(tmp.file("manifest.json"));

  const io::Manifest m2 = io::Manifest::load(tmp.file("manifest.json"));
  REQUIRE(m2.frames.size() == 1);
  CHECK(m2.frames[0].adc == "adc_000000.rdlc");
  CHECK_NOTHROW(m2.checkPairing(0.05));
  CHECK_THROWS_AS(m2.checkPairing(0.01), Error);
}

TEST_CASE("config bundle JSON round trip") {
  const ConfigBundle c = ConfigBundle::deskDefault();
  const ConfigBundle c2 = ConfigBundle::fromJsonText(c.toJsonText());
  CHECK(c2.waveform.n_adc == c.waveform.n_adc);
  CHECK(c2.waveform.bandwidth_eff_hz == c.waveform.bandwidth_eff_hz);
  CHECK(c2.grid.az_fft == c.grid.az_fft);
  CHECK(c2.cfar.rank_fraction == c.cfar.rank_fraction);
  CHECK(c2.detector.alpha == c.detector.alpha);
  CHECK(c2.array.numVirtual() == c.array.numVirtual());

  SUBCASE("array/waveform mismatch is rejected") {
    CHECK_THROWS_AS(
        ConfigBundle::fromJsonText(R"({"waveform": {"n_tx": 3}, "array": {"preset": "desk"}})"),
        Error);
  }
  SUBCASE("full-scale preset has the reference cube dimensions") {
    const ConfigBundle f = ConfigBundle::fullScale();
    const PolarGrid g = f.makeGrid();
    CHECK(g.numRange() == 500);
    CHECK(g.numDoppler() == 128);
    CHECK(g.numAzimuth() == 240);
    CHECK(g.numElevation() == 44);
  }
}

TEST_CASE("checkpoint save/load restores config and parameters bit-exactly") {
  TempDir tmp;
  nn::DetectorConfig cfg;
  cfg.frames = 2;
  cfg.enc_channels = 4;
  cfg.backbone_channels = 4;
  cfg.elevation_bins = 2;
  cfg.ablations.quantile_prefilter = true;
  nn::DetectorModel model = nn::DetectorModel::init(cfg, 42);

  io::saveCheckpoint(tmp.file("model.rdck"), model);
  nn::DetectorModel loaded = io::loadCheckpoint(tmp.file("model.rdck"));

  CHECK(loaded.cfg.frames == 2);
  CHECK(loaded.cfg.ablations.quantile_prefilter);
  auto pa = model.params();
  auto pb = loaded.params();
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i].name == pb[i].name);
    REQUIRE(pa[i].value->size() == pb[i].value->size());
    for (std::size_t j = 0; j < pa[i].value->size(); ++j)
      CHECK((*pa[i].value)[j] == (*pb[i].value)[j]);
  }

  SUBCASE("bad magic rejected") {
    std::ofstream out(tmp.file("bad.rdck"), std::ios::binary);
    out << "WXYZ";
    out.close();
    CHECK_THROWS_AS(io::loadCheckpoint(tmp.file("bad.rdck")), Error);
  }
}
