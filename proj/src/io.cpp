#include "radelft/io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "radelft/config.hpp"
#include "radelft/errors.hpp"

namespace radelft {
namespace io {

using nlohmann::json;

namespace {

constexpr char kTensorMagic[4] = {'R', 'D', 'L', 'C'};
constexpr char kCheckpointMagic[4] = {'R', 'D', 'C', 'K'};
constexpr std::uint16_t kTensorVersion = 1;
constexpr std::uint16_t kCheckpointVersion = 1;

template <typename T>
constexpr Dtype dtypeOf();
template <>
constexpr Dtype dtypeOf<std::uint8_t>() { return Dtype::U8; }
template <>
constexpr Dtype dtypeOf<std::int32_t>() { return Dtype::I32; }
template <>
constexpr Dtype dtypeOf<float>() { return Dtype::F32; }
template <>
constexpr Dtype dtypeOf<double>() { return Dtype::F64; }
template <>
constexpr Dtype dtypeOf<Cplx>() { return Dtype::C128; }

template <typename T>
void writeRaw(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T readRaw(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throwError(ErrorCode::Format, "tensor file truncated");
  return v;
}

std::ofstream openOut(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throwError(ErrorCode::Io, "cannot open for writing: " + path);
  return out;
}

std::ifstream openIn(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throwError(ErrorCode::Io, "cannot open: " + path);
  return in;
}

}  // namespace

template <typename T>
void writeTensorStream(std::ostream& out, const Tensor<T>& t) {
  out.write(kTensorMagic, 4);
  writeRaw(out, kTensorVersion);
  writeRaw(out, static_cast<std::uint16_t>(dtypeOf<T>()));
  writeRaw(out, static_cast<std::uint16_t>(t.rank()));
  for (std::size_t d : t.shape()) writeRaw(out, static_cast<std::uint64_t>(d));
  out.write(reinterpret_cast<const char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(T)));
}

template <typename T>
Tensor<T> readTensorStream(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kTensorMagic, 4) != 0)
    throwError(ErrorCode::Format, "not a tensor file (bad magic)");
  const auto version = readRaw<std::uint16_t>(in);
  if (version != kTensorVersion)
    throwError(ErrorCode::Format, "unsupported tensor version " + std::to_string(version));
  const auto dtype = readRaw<std::uint16_t>(in);
  if (dtype != static_cast<std::uint16_t>(dtypeOf<T>()))
    throwError(ErrorCode::Format, "tensor dtype mismatch (got code " + std::to_string(dtype) + ")");
  const auto rank = readRaw<std::uint16_t>(in);
  if (rank > 8) throwError(ErrorCode::Format, "tensor rank too large");
  std::vector<std::size_t> shape(rank);
  std::size_t n = 1;
  for (auto& d : shape) {
    d = static_cast<std::size_t>(readRaw<std::uint64_t>(in));
    n *= d;
  }
  Tensor<T> t(shape);
  in.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(n * sizeof(T)));
  if (!in) throwError(ErrorCode::Format, "tensor payload truncated");
  return t;
}

template <typename T>
void writeTensor(const std::string& path, const Tensor<T>& t) {
  auto out = openOut(path);
  writeTensorStream(out, t);
  if (!out) throwError(ErrorCode::Io, "write failed: " + path);
}

template <typename T>
Tensor<T> readTensor(const std::string& path) {
  auto in = openIn(path);
  return readTensorStream<T>(in);
}

template void writeTensor<std::uint8_t>(const std::string&, const Tensor<std::uint8_t>&);
template void writeTensor<std::int32_t>(const std::string&, const Tensor<std::int32_t>&);
template void writeTensor<float>(const std::string&, const Tensor<float>&);
template void writeTensor<double>(const std::string&, const Tensor<double>&);
template void writeTensor<Cplx>(const std::string&, const Tensor<Cplx>&);
template Tensor<std::uint8_t> readTensor<std::uint8_t>(const std::string&);
template Tensor<std::int32_t> readTensor<std::int32_t>(const std::string&);
template Tensor<float> readTensor<float>(const std::string&);
template Tensor<double> readTensor<double>(const std::string&);
template Tensor<Cplx> readTensor<Cplx>(const std::string&);
template void writeTensorStream<float>(std::ostream&, const Tensor<float>&);
template Tensor<float> readTensorStream<float>(std::istream&);

namespace {

std::string fmtDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

void writePly(const std::string& path, const PointCloud& pc) {
  auto out = openOut(path);
  const bool has_dop = !pc.doppler.empty();
  const bool has_pow = !pc.power_db.empty();
  out << "ply\nformat ascii 1.0\nelement vertex " << pc.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n";
  if (has_dop) out << "property float doppler\n";
  if (has_pow) out << "property float power\n";
  out << "end_header\n";
  for (std::size_t i = 0; i < pc.size(); ++i) {
    out << fmtDouble(pc.x[i]) << ' ' << fmtDouble(pc.y[i]) << ' ' << fmtDouble(pc.z[i]);
    if (has_dop) out << ' ' << fmtDouble(pc.doppler[i]);
    if (has_pow) out << ' ' << fmtDouble(pc.power_db[i]);
    out << '\n';
  }
  if (!out) throwError(ErrorCode::Io, "write failed: " + path);
}

PointCloud readPly(const std::string& path) {
  auto in = openIn(path);
  std::string line;
  std::size_t count = 0;
  std::vector<std::string> props;
  bool header_done = false;
  if (!std::getline(in, line) || line != "ply")
    throwError(ErrorCode::Format, "not a PLY file: " + path);
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "element") {
      std::string what;
      ls >> what >> count;
      if (what != "vertex") throwError(ErrorCode::Format, "PLY: only vertex elements supported");
    } else if (tok == "property") {
      std::string type, name;
      ls >> type >> name;
      props.push_back(name);
    } else if (tok == "end_header") {
      header_done = true;
      break;
    } else if (tok == "format") {
      std::string f;
      ls >> f;
      if (f != "ascii") throwError(ErrorCode::Format, "PLY: only ascii supported");
    }
  }
  if (!header_done) throwError(ErrorCode::Format, "PLY: missing end_header");
  PointCloud pc;
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) throwError(ErrorCode::Format, "PLY: vertex list truncated");
    std::istringstream ls(line);
    double x = 0, y = 0, z = 0;
    ls >> x >> y >> z;
    pc.append(x, y, z);
    for (std::size_t p = 3; p < props.size(); ++p) {
      double v = 0;
      ls >> v;
      if (props[p] == "doppler") pc.doppler.push_back(v);
      if (props[p] == "power") pc.power_db.push_back(v);
    }
  }
  return pc;
}

void writeCsv(const std::string& path, const PointCloud& pc) {
  auto out = openOut(path);
  const bool has_dop = !pc.doppler.empty();
  const bool has_pow = !pc.power_db.empty();
  out << "x,y,z";
  if (has_dop) out << ",doppler";
  if (has_pow) out << ",power";
  out << '\n';
  for (std::size_t i = 0; i < pc.size(); ++i) {
    out << fmtDouble(pc.x[i]) << ',' << fmtDouble(pc.y[i]) << ',' << fmtDouble(pc.z[i]);
    if (has_dop) out << ',' << fmtDouble(pc.doppler[i]);
    if (has_pow) out << ',' << fmtDouble(pc.power_db[i]);
    out << '\n';
  }
  if (!out) throwError(ErrorCode::Io, "write failed: " + path);
}

PointCloud readCsv(const std::string& path) {
  auto in = openIn(path);
  std::string line;
  if (!std::getline(in, line)) throwError(ErrorCode::Format, "CSV: empty file " + path);
  std::vector<std::string> cols;
  {
    std::istringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cols.push_back(c);
  }
  if (cols.size() < 3 || cols[0] != "x" || cols[1] != "y" || cols[2] != "z")
    throwError(ErrorCode::Format, "CSV: expected x,y,z header");
  PointCloud pc;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::vector<double> vals;
    std::string c;
    while (std::getline(ls, c, ',')) vals.push_back(std::stod(c));
    if (vals.size() != cols.size()) throwError(ErrorCode::Format, "CSV: ragged row");
    pc.append(vals[0], vals[1], vals[2]);
    for (std::size_t i = 3; i < cols.size(); ++i) {
      if (cols[i] == "doppler") pc.doppler.push_back(vals[i]);
      if (cols[i] == "power") pc.power_db.push_back(vals[i]);
    }
  }
  return pc;
}

void writeBevPgm(const std::string& path, const OccupancyGrid& grid) {
  const std::size_t R = grid.occ.dim(0), A = grid.occ.dim(1), E = grid.occ.dim(2);
  auto out = openOut(path);
  out << "P5\n" << A << ' ' << R << "\n255\n";
  std::vector<unsigned char> row(A);
  for (std::size_t rr = 0; rr < R; ++rr) {
    const std::size_t r = R - 1 - rr;  // near range at the bottom
    for (std::size_t a = 0; a < A; ++a) {
      unsigned char v = 0;
      for (std::size_t e = 0; e < E; ++e)
        if (grid.occ(r, a, e)) v = 255;
      row[a] = v;
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(A));
  }
  if (!out) throwError(ErrorCode::Io, "write failed: " + path);
}

void writeGridJson(const std::string& path, const PolarGrid& grid) {
  json j;
  j["range_step_m"] = grid.rangeStep();
  j["n_range"] = grid.numRange();
  j["v_res_mps"] = grid.dopplerStep();
  j["n_doppler"] = grid.numDoppler();
  j["az_fft"] = grid.azFftSize();
  j["el_fft"] = grid.elFftSize();
  j["az_fov_deg"] = grid.az_fov_deg;
  j["el_fov_deg"] = grid.el_fov_deg;
  auto out = openOut(path);
  out << j.dump(2) << '\n';
}

PolarGrid readGridJson(const std::string& path) {
  auto in = openIn(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throwError(ErrorCode::Format, std::string("grid sidecar: ") + e.what());
  }
  return PolarGrid::fromSteps(j.at("range_step_m"), j.at("n_range"), j.at("v_res_mps"),
                              j.at("n_doppler"), j.at("az_fft"), j.at("el_fft"),
                              j.at("az_fov_deg"), j.at("el_fov_deg"));
}

void Manifest::checkPairing(double max_skew_s) const {
  for (const auto& f : frames)
    if (std::abs(f.t_radar_s - f.t_lidar_s) > max_skew_s)
      throwError(ErrorCode::Format, "manifest: frame " + std::to_string(f.index) +
                                        " radar/lidar timestamp skew exceeds limit");
}

Manifest Manifest::load(const std::string& path) {
  auto in = openIn(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throwError(ErrorCode::Format, std::string("manifest: ") + e.what());
  }
  if (j.value("version", 0) != 1) throwError(ErrorCode::Format, "manifest: unsupported version");
  Manifest m;
  for (const auto& jf : j.at("frames")) {
    FrameEntry f;
    f.index = jf.at("index");
    f.t_radar_s = jf.at("t_radar_s");
    f.t_lidar_s = jf.at("t_lidar_s");
    f.adc = jf.value("adc", "");
    f.gt_cloud = jf.value("gt_cloud", "");
    f.cube_power = jf.value("cube_power", "");
    f.cube_elev = jf.value("cube_elev", "");
    f.occupancy = jf.value("occupancy", "");
    f.cloud = jf.value("cloud", "");
    m.frames.push_back(f);
  }
  return m;
}

void Manifest::save(const std::string& path) const {
  json j;
  j["version"] = 1;
  j["frames"] = json::array();
  for (const auto& f : frames) {
    json jf = {{"index", f.index}, {"t_radar_s", f.t_radar_s}, {"t_lidar_s", f.t_lidar_s}};
    if (!f.adc.empty()) jf["adc"] = f.adc;
    if (!f.gt_cloud.empty()) jf["gt_cloud"] = f.gt_cloud;
    if (!f.cube_power.empty()) jf["cube_power"] = f.cube_power;
    if (!f.cube_elev.empty()) jf["cube_elev"] = f.cube_elev;
    if (!f.occupancy.empty()) jf["occupancy"] = f.occupancy;
    if (!f.cloud.empty()) jf["cloud"] = f.cloud;
    j["frames"].push_back(jf);
  }
  auto out = openOut(path);
  out << j.dump(2) << '\n';
}

void saveCheckpoint(const std::string& path, nn::DetectorModel& model) {
  auto out = openOut(path);
  out.write(kCheckpointMagic, 4);
  writeRaw(out, kCheckpointVersion);
  const std::string cfg = detectorConfigToJson(model.cfg);
  writeRaw(out, static_cast<std::uint32_t>(cfg.size()));
  out.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));
  auto params = model.params();
  writeRaw(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    writeRaw(out, static_cast<std::uint16_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    writeTensorStream(out, *p.value);
  }
  if (!out) throwError(ErrorCode::Io, "write failed: " + path);
}

nn::DetectorModel loadCheckpoint(const std::string& path) {
  auto in = openIn(path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kCheckpointMagic, 4) != 0)
    throwError(ErrorCode::Format, "not a checkpoint file (bad magic): " + path);
  const auto version = readRaw<std::uint16_t>(in);
  if (version != kCheckpointVersion)
    throwError(ErrorCode::Format, "unsupported checkpoint version " + std::to_string(version));
  const auto cfg_len = readRaw<std::uint32_t>(in);
  std::string cfg_text(cfg_len, '\0');
  in.read(cfg_text.data(), cfg_len);
  if (!in) throwError(ErrorCode::Format, "checkpoint truncated");
  const nn::DetectorConfig cfg = detectorConfigFromJson(cfg_text);

  nn::DetectorModel model = nn::DetectorModel::init(cfg, cfg.seed);
  const auto n_tensors = readRaw<std::uint32_t>(in);
  auto params = model.params();
  if (n_tensors != params.size())
    throwError(ErrorCode::Format, "checkpoint parameter count mismatch");
  for (auto& p : params) {
    const auto name_len = readRaw<std::uint16_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in || name != p.name)
      throwError(ErrorCode::Format, "checkpoint parameter order mismatch at " + p.name);
    Tensor<float> t = readTensorStream<float>(in);
    if (!t.sameShape(*p.value))
      throwError(ErrorCode::Format, "checkpoint parameter shape mismatch at " + p.name);
    *p.value = std::move(t);
  }
  return model;
}

}  // namespace io
}  // namespace radelft
