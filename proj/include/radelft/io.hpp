#ifndef RADELFT_IO_HPP
#define RADELFT_IO_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "radelft/neural.hpp"
#include "radelft/types.hpp"

namespace radelft {
namespace io {

// Tensor container: little-endian, magic "RDLC", u16 version, u16 dtype,
// u16 rank, u64 dims, row-major payload. One tensor per file; grid
// parameters travel in a JSON sidecar.
enum class Dtype : std::uint16_t { U8 = 0, I32 = 1, F32 = 2, F64 = 3, C128 = 4 };

template <typename T>
void writeTensor(const std::string& path, const Tensor<T>& t);
template <typename T>
Tensor<T> readTensor(const std::string& path);

template <typename T>
void writeTensorStream(std::ostream& out, const Tensor<T>& t);
template <typename T>
Tensor<T> readTensorStream(std::istream& in);

// Point clouds: ASCII PLY for viewers, CSV (x,y,z[,doppler,power]) for
// spreadsheets. Feature columns are written when present.
void writePly(const std::string& path, const PointCloud& pc);
PointCloud readPly(const std::string& path);
void writeCsv(const std::string& path, const PointCloud& pc);
PointCloud readCsv(const std::string& path);

// Bird's-eye view: binary PGM of the occupancy max-projected over elevation,
// range rows (near range at the bottom), azimuth columns.
void writeBevPgm(const std::string& path, const OccupancyGrid& grid);

// Grid sidecar (bit-exact round trip).
void writeGridJson(const std::string& path, const PolarGrid& grid);
PolarGrid readGridJson(const std::string& path);

// Dataset manifest pairing radar and ground-truth products per frame.
struct FrameEntry {
  int index = 0;
  double t_radar_s = 0.0;
  double t_lidar_s = 0.0;
  std::string adc;         // file names relative to the manifest directory
  std::string gt_cloud;
  std::string cube_power;
  std::string cube_elev;
  std::string occupancy;
  std::string cloud;
};

struct Manifest {
  std::vector<FrameEntry> frames;

  void checkPairing(double max_skew_s) const;  // throws on excessive skew
  static Manifest load(const std::string& path);
  void save(const std::string& path) const;
};

// Model checkpoint: magic "RDCK", u16 version, config JSON, named f32
// parameter tensors.
void saveCheckpoint(const std::string& path, nn::DetectorModel& model);
nn::DetectorModel loadCheckpoint(const std::string& path);

}  // namespace io
}  // namespace radelft

#endif
