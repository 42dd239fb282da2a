#ifndef RADELFT_COMMANDS_HPP
#define RADELFT_COMMANDS_HPP

#include <string>
#include <vector>

#include "radelft/config.hpp"
#include "radelft/scene.hpp"

namespace radelft {
namespace cmd {

// Every command is deterministic given its inputs and seed, works through
// manifest files in the given directories, and throws radelft::Error on any
// failure.

// ADC frames + ground-truth clouds + manifest. seed == 0 keeps the scene's
// own rng_seed.
void simulate(const ConfigBundle& cfg, const Scene& scene, const std::string& out_dir,
              std::uint64_t seed);

// ADC -> radar cubes (power + elevation argmax) with grid sidecar.
void process(const ConfigBundle& cfg, const std::string& sim_dir, const std::string& out_dir,
             const nn::Ablations& ablations);

// Cascade OS-CFAR baseline: occupancy files + point-cloud exports.
void detectCfar(const ConfigBundle& cfg, const std::string& cube_dir,
                const std::string& out_dir);

// Cross-sensor-supervised training over one or more processed scene
// directories; writes a checkpoint.
void train(const ConfigBundle& cfg, const std::vector<std::string>& data_dirs,
           const std::string& checkpoint_path, std::uint64_t seed, const nn::Ablations& ablations);

// Neural detector inference; threshold < 0 uses the checkpoint's value.
void detectNn(const ConfigBundle& cfg, const std::string& checkpoint_path,
              const std::string& cube_dir, const std::string& out_dir, double threshold);

// Metrics JSON (per-frame and aggregate pd/pfa/chamfer) + BEV images.
void evaluate(const ConfigBundle& cfg, const std::string& pred_dir, const std::string& gt_dir,
              const std::string& out_dir);

// Occupancy (.rdlc + grid sidecar) or point cloud (.ply/.csv) -> PLY or CSV.
void exportFile(const std::string& input_path, const std::string& grid_json_path,
                const std::string& format, const std::string& output_path);

}  // namespace cmd
}  // namespace radelft

#endif
