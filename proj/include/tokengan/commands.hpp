#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tokengan/config.hpp"
#include "tokengan/latent_ops.hpp"
#include "tokengan/trainer.hpp"

namespace tokengan {

// Output directories are created when missing. Every command is a pure
// function of its options and input files, except the wall_ms column of
// the training metrics (see TrainOptions::record_timing).

struct TrainOptions {
  RunConfig config;
  std::string out_dir;
  // false writes wall_ms as 0 so that repeated runs give identical files.
  bool record_timing = true;
  bool quiet = false;
  // Called after every step.
  std::function<void(const StepMetrics&, const Trainer&)> on_step;
};

struct TrainSummary {
  std::size_t steps = 0;
  std::string final_checkpoint;
  std::vector<std::string> checkpoints;  // in write order, including final
};

// Writes config.txt, metrics.csv (step,loss_g,loss_d,r1,wall_ms,
// grad_norm_g,grad_norm_d) and ckpt_<step>.tkgn after 0 steps and every
// checkpoint_every steps, plus final.tkgn.
TrainSummary cmd_train(const TrainOptions& options, std::ostream& log);

std::string metrics_csv_header();
std::string metrics_csv_row(const StepMetrics& m, bool record_timing);

// Image of one latent drawn from `seed`; the unit every command shares.
Tensor sample_image(const Generator& gen, std::uint64_t seed);
LayerStyles seed_styles(const Generator& gen, std::uint64_t seed);

// sample_<seed>.png for seeds seed .. seed+count-1, and grid.png.
void cmd_sample(const std::string& ckpt, std::size_t count, std::uint64_t seed,
                const std::string& out_dir);

// mixed.png and strip.png (a | b | mixed). Token-axis mixing at `inject`
// unless `layer` is given, which mixes along layers instead.
void cmd_mix(const std::string& ckpt, std::uint64_t seed_a,
             std::uint64_t seed_b, std::size_t inject,
             std::optional<std::size_t> layer, const std::string& out_dir);

// strip.png with `steps` panels from seed_a to seed_b, and frame_<i>.png.
void cmd_interp(const std::string& ckpt, std::uint64_t seed_a,
                std::uint64_t seed_b, std::size_t steps,
                const std::string& out_dir);

// recovered.png, styles.tkgn, curve.csv and report.txt (also echoed to
// `report`).
InversionResult cmd_invert(const std::string& ckpt, const std::string& image,
                           const InversionConfig& config,
                           const std::string& out_dir, std::ostream& report);

// sample.png, heat_<j>.png (normalized), heatmaps.png and attention.csv.
AttentionHeatMaps cmd_attn(const std::string& ckpt, std::uint64_t seed,
                           std::size_t layer, const std::string& out_dir);

// Runs every primitive case at each size plus the composed generator.
// Returns true when all pass.
bool cmd_gradcheck(const std::vector<std::size_t>& sizes, std::uint64_t seed,
                   double tolerance, std::ostream& out);

}  // namespace tokengan
