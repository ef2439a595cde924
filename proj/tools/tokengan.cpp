// tokengan: train, sample and analyze token-based generators.
//
// Exit codes: 0 ok, 2 usage or configuration error, 3 io error,
// 4 numeric failure (non-finite loss, failed gradient check), 1 internal.
// Failures print one line to stderr: "error code=<n> <message>".

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "tokengan/commands.hpp"
#include "tokengan/errors.hpp"

using namespace tokengan;

namespace {

int fail(int code, const std::string& message) {
  std::string line = message;
  for (char& ch : line) {
    if (ch == '\n') ch = ' ';
  }
  std::cerr << "error code=" << code << " " << line << std::endl;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Token-based generator with cross-attention style modulation"};
  app.require_subcommand(1);

  std::string config_path, out, ckpt, image;
  std::optional<std::size_t> steps;
  std::optional<std::uint64_t> seed_override;
  std::uint64_t seed = 0, seed_a = 0, seed_b = 1;
  std::size_t count = 16, inject = 4, interp_steps = 7, layer = 0;
  std::optional<std::size_t> mix_layer;
  bool no_timing = false;
  bool quiet = false;
  InversionConfig inv;
  std::string space = "style";
  std::vector<std::size_t> sizes{3, 5};
  double tolerance = 1e-4;

  auto* train = app.add_subcommand("train", "Train on the toy dataset");
  train->add_option("--config", config_path, "key=value run config (defaults if omitted)");
  train->add_option("--out", out, "Output directory")->required();
  train->add_option("--steps", steps, "Override total_steps");
  train->add_option("--seed", seed_override, "Override the training seed");
  train->add_flag("--no-timing", no_timing, "Write wall_ms as 0 for reproducible metrics");
  train->add_flag("--quiet", quiet, "No progress lines");

  auto* sample = app.add_subcommand("sample", "Sample images from random latents");
  sample->add_option("--ckpt", ckpt)->required();
  sample->add_option("--count", count)->check(CLI::PositiveNumber);
  sample->add_option("--seed", seed);
  sample->add_option("--out", out)->required();

  auto* mix = app.add_subcommand("mix", "Mix the styles of two latents");
  mix->add_option("--ckpt", ckpt)->required();
  mix->add_option("--seed-a", seed_a)->required();
  mix->add_option("--seed-b", seed_b)->required();
  mix->add_option("--inject", inject, "Token inject point t: tokens [0, t) from a");
  mix->add_option("--layer", mix_layer, "Mix along layers instead: layers [0, L) from a");
  mix->add_option("--out", out)->required();

  auto* interp = app.add_subcommand("interp", "Linear interpolation between two latents' styles");
  interp->add_option("--ckpt", ckpt)->required();
  interp->add_option("--seed-a", seed_a)->required();
  interp->add_option("--seed-b", seed_b)->required();
  interp->add_option("--steps", interp_steps)->check(CLI::Range(std::size_t{2}, std::size_t{1000}));
  interp->add_option("--out", out)->required();

  auto* invert_cmd = app.add_subcommand("invert", "Recover styles for an image");
  invert_cmd->add_option("--ckpt", ckpt)->required();
  invert_cmd->add_option("--image", image, "PNG or PPM target")->required();
  invert_cmd->add_option("--iters", inv.iterations)->check(CLI::PositiveNumber);
  invert_cmd->add_option("--lr", inv.step_size);
  invert_cmd->add_option("--space", space)->check(CLI::IsMember({"style", "latent"}));
  invert_cmd->add_option("--init-samples", inv.init_samples);
  invert_cmd->add_option("--seed", inv.seed);
  invert_cmd->add_option("--out", out)->required();

  auto* attn = app.add_subcommand("attn", "Per-style-token attention heat maps");
  attn->add_option("--ckpt", ckpt)->required();
  attn->add_option("--seed", seed);
  attn->add_option("--layer", layer, "Style block index, 0-based");
  attn->add_option("--out", out)->required();

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of every differentiable op");
  gradcheck->add_option("--sizes", sizes, "Maximum dimension per randomized case")->delimiter(',');
  gradcheck->add_option("--seed", seed);
  gradcheck->add_option("--tolerance", tolerance);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(static_cast<int>(ExitCode::kUsage), e.what());
  }

  try {
    if (*train) {
      TrainOptions options;
      options.config = config_path.empty() ? RunConfig{} : load_run_config(config_path);
      if (steps) options.config.train.total_steps = *steps;
      if (seed_override) options.config.train.seed = *seed_override;
      options.out_dir = out;
      options.record_timing = !no_timing;
      options.quiet = quiet;
      const TrainSummary summary = cmd_train(options, std::cout);
      std::cout << "trained " << summary.steps << " steps; final checkpoint "
                << summary.final_checkpoint << "\n";
    } else if (*sample) {
      cmd_sample(ckpt, count, seed, out);
    } else if (*mix) {
      cmd_mix(ckpt, seed_a, seed_b, inject, mix_layer, out);
    } else if (*interp) {
      cmd_interp(ckpt, seed_a, seed_b, interp_steps, out);
    } else if (*invert_cmd) {
      inv.space = space == "latent" ? InversionSpace::kLatent : InversionSpace::kStyle;
      cmd_invert(ckpt, image, inv, out, std::cout);
    } else if (*attn) {
      cmd_attn(ckpt, seed, layer, out);
    } else if (*gradcheck) {
      if (!cmd_gradcheck(sizes, seed, tolerance, std::cout)) {
        return fail(static_cast<int>(ExitCode::kNumeric), "gradient check failed");
      }
    }
  } catch (const Error& e) {
    return fail(static_cast<int>(e.code()), e.what());
  } catch (const std::exception& e) {
    return fail(1, std::string("internal error: ") + e.what());
  }
  return 0;
}
