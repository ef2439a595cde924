#include "tokengan/commands.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "tokengan/checkpoint.hpp"
#include "tokengan/errors.hpp"
#include "tokengan/gradcheck.hpp"
#include "tokengan/image_io.hpp"
#include "tokengan/mixing.hpp"
#include "tokengan/ops.hpp"

namespace tokengan {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create directory " + dir);
  }
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

std::ofstream open_text(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  return out;
}

std::string checkpoint_name(std::size_t step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "ckpt_%06zu.tkgn", step);
  return buf;
}

// Grayscale [0, 1] map -> [1 x H x W] image in [-1, 1].
Tensor heat_image(const Tensor& maps, std::size_t j) {
  const std::size_t h = maps.dim(1);
  const std::size_t w = maps.dim(2);
  const auto data = maps.data();
  std::vector<double> out(h * w);
  for (std::size_t i = 0; i < h * w; ++i) out[i] = 2.0 * data[j * h * w + i] - 1.0;
  return Tensor::from({1, h, w}, std::move(out));
}

}  // namespace

std::string metrics_csv_header() {
  return "step,loss_g,loss_d,r1,wall_ms,grad_norm_g,grad_norm_d";
}

std::string metrics_csv_row(const StepMetrics& m, bool record_timing) {
  return std::to_string(m.step) + "," + fmt(m.loss_g) + "," + fmt(m.loss_d) +
         "," + fmt(m.r1) + "," + fmt(record_timing ? m.wall_ms : 0.0) + "," +
         fmt(m.grad_norm_g) + "," + fmt(m.grad_norm_d);
}

TrainSummary cmd_train(const TrainOptions& options, std::ostream& log) {
  const RunConfig& cfg = options.config;
  cfg.validate();
  ensure_dir(options.out_dir);
  {
    auto out = open_text(join(options.out_dir, "config.txt"));
    out << render_run_config(cfg);
  }
  auto csv = open_text(join(options.out_dir, "metrics.csv"));
  csv << metrics_csv_header() << "\n";

  Trainer trainer(cfg.generator, cfg.disc, cfg.train, cfg.data);
  TrainSummary summary;
  auto save = [&](const std::string& name) {
    const std::string path = join(options.out_dir, name);
    save_checkpoint(path, make_model_checkpoint(cfg, trainer.step(),
                                                trainer.generator(),
                                                trainer.discriminator()));
    summary.checkpoints.push_back(path);
  };

  const std::size_t every = cfg.train.checkpoint_every;
  if (every > 0) save(checkpoint_name(0));
  for (std::size_t s = 0; s < cfg.train.total_steps; ++s) {
    const StepMetrics m = trainer.train_step();
    csv << metrics_csv_row(m, options.record_timing) << "\n";
    csv.flush();
    if (!csv) throw IoError("failed to append metrics");
    if (options.on_step) options.on_step(m, trainer);
    if (!options.quiet && (m.step % 100 == 0 || s + 1 == cfg.train.total_steps)) {
      log << "step " << m.step << " loss_g " << m.loss_g << " loss_d "
          << m.loss_d << " r1 " << m.r1 << "\n";
    }
    if (every > 0 && trainer.step() % every == 0) save(checkpoint_name(trainer.step()));
  }
  save("final.tkgn");
  summary.final_checkpoint = summary.checkpoints.back();
  summary.steps = trainer.step();
  return summary;
}

LayerStyles seed_styles(const Generator& gen, std::uint64_t seed) {
  NoGradGuard no_grad;
  return gen.map(sample_latent(seed, gen.latent_width()));
}

Tensor sample_image(const Generator& gen, std::uint64_t seed) {
  NoGradGuard no_grad;
  return gen.synthesize(seed_styles(gen, seed)).image;
}

void cmd_sample(const std::string& ckpt, std::size_t count, std::uint64_t seed,
                const std::string& out_dir) {
  if (count == 0) throw ContractError("sample count must be positive");
  const ModelState model = load_model(ckpt);
  ensure_dir(out_dir);
  std::vector<Tensor> images;
  for (std::size_t i = 0; i < count; ++i) {
    images.push_back(sample_image(model.generator, seed + i));
    write_image(join(out_dir, "sample_" + std::to_string(seed + i) + ".png"),
                images.back());
  }
  write_image(join(out_dir, "grid.png"), image_grid(images, 8, 1));
}

void cmd_mix(const std::string& ckpt, std::uint64_t seed_a,
             std::uint64_t seed_b, std::size_t inject,
             std::optional<std::size_t> layer, const std::string& out_dir) {
  const ModelState model = load_model(ckpt);
  const Generator& gen = model.generator;
  const LayerStyles a = seed_styles(gen, seed_a);
  const LayerStyles b = seed_styles(gen, seed_b);
  LayerStyles mixed;
  if (layer) {
    mixed = mix_layers(a, b, *layer, gen.config().synthesis.layer_count());
  } else {
    for (std::size_t i = 0; i < a.size(); ++i) {
      mixed.push_back(mix_styles(a[i], b[i], inject));
    }
  }
  ensure_dir(out_dir);
  NoGradGuard no_grad;
  const Tensor image = gen.synthesize(mixed).image;
  write_image(join(out_dir, "mixed.png"), image);
  write_image(join(out_dir, "strip.png"),
              image_grid({gen.synthesize(a).image, gen.synthesize(b).image, image}, 3, 1));
}

void cmd_interp(const std::string& ckpt, std::uint64_t seed_a,
                std::uint64_t seed_b, std::size_t steps,
                const std::string& out_dir) {
  const std::vector<double> alphas = interpolation_alphas(steps);
  const ModelState model = load_model(ckpt);
  const Generator& gen = model.generator;
  const LayerStyles a = seed_styles(gen, seed_a);
  const LayerStyles b = seed_styles(gen, seed_b);
  ensure_dir(out_dir);
  NoGradGuard no_grad;
  std::vector<Tensor> frames;
  for (std::size_t i = 0; i < steps; ++i) {
    frames.push_back(gen.synthesize(interpolate(a, b, alphas[i])).image);
    write_image(join(out_dir, "frame_" + std::to_string(i) + ".png"), frames.back());
  }
  write_image(join(out_dir, "strip.png"), image_grid(frames, steps, 0));
}

InversionResult cmd_invert(const std::string& ckpt, const std::string& image,
                           const InversionConfig& config,
                           const std::string& out_dir, std::ostream& report) {
  const ModelState model = load_model(ckpt);
  const Tensor target = read_image(image);
  InversionResult result = invert(target, model.generator, config);
  ensure_dir(out_dir);
  write_image(join(out_dir, "recovered.png"), result.image);

  Checkpoint styles;
  styles.header = "kind=styles\nspace=" +
                  std::string(config.space == InversionSpace::kStyle ? "style" : "latent") +
                  "\n";
  for (std::size_t i = 0; i < result.styles.size(); ++i) {
    styles.tensors.push_back({"styles." + std::to_string(i), result.styles[i].styles});
  }
  if (result.latent.defined()) styles.tensors.push_back({"latent", result.latent});
  save_checkpoint(join(out_dir, "styles.tkgn"), styles);

  {
    auto curve = open_text(join(out_dir, "curve.csv"));
    curve << "iteration,mse\n";
    for (std::size_t i = 0; i < result.mse_curve.size(); ++i) {
      curve << i << "," << fmt(result.mse_curve[i]) << "\n";
    }
  }
  const std::string text =
      "iterations=" + std::to_string(result.mse_curve.size()) + "\n" +
      "mse=" + fmt(result.best_mse) + "\n" +
      "mae=" + fmt(mean_absolute_error(result.image, target)) + "\n";
  auto out = open_text(join(out_dir, "report.txt"));
  out << text;
  report << text;
  return result;
}

AttentionHeatMaps cmd_attn(const std::string& ckpt, std::uint64_t seed,
                           std::size_t layer, const std::string& out_dir) {
  const ModelState model = load_model(ckpt);
  const Generator& gen = model.generator;
  const LayerStyles styles = seed_styles(gen, seed);
  AttentionHeatMaps maps = extract_attention(gen, styles, layer);
  ensure_dir(out_dir);
  write_image(join(out_dir, "sample.png"), sample_image(gen, seed));
  const std::size_t n = maps.normalized.dim(0);
  std::vector<Tensor> tiles;
  for (std::size_t j = 0; j < n; ++j) {
    tiles.push_back(heat_image(maps.normalized, j));
    write_image(join(out_dir, "heat_" + std::to_string(j) + ".png"), tiles.back());
  }
  write_image(join(out_dir, "heatmaps.png"), image_grid(tiles, n, 1));

  auto csv = open_text(join(out_dir, "attention.csv"));
  const auto w = maps.map.weights.data();
  const std::size_t m = maps.map.weights.dim(0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) csv << (j ? "," : "") << fmt(w[i * n + j]);
    csv << "\n";
  }
  return maps;
}

bool cmd_gradcheck(const std::vector<std::size_t>& sizes, std::uint64_t seed,
                   double tolerance, std::ostream& out) {
  GradCheckOptions options;
  options.tolerance = tolerance;
  bool all = true;
  auto row = [&](const GradCheckResult& r, const std::string& size) {
    all = all && r.passed;
    out << std::left << std::setw(24) << r.name << std::setw(8) << size
        << std::setw(10) << r.checked_elements << std::scientific
        << std::setprecision(3) << std::setw(12) << r.max_relative_error
        << std::defaultfloat << (r.passed ? "pass" : "FAIL") << "\n";
  };
  out << std::left << std::setw(24) << "op" << std::setw(8) << "size"
      << std::setw(10) << "elements" << std::setw(12) << "rel_error"
      << "status\n";
  for (std::size_t size : sizes) {
    if (size == 0) throw ContractError("gradcheck sizes must be positive");
    for (const auto& c : primitive_op_cases()) {
      row(c.run(size, seed, options), std::to_string(size));
    }
  }
  row(generator_gradcheck(tiny_generator_config(), seed, options), "tiny");
  out << (all ? "all passed" : "FAILURES") << "\n";
  return all;
}

}  // namespace tokengan
