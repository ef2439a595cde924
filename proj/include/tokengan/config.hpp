#pragma once

#include <string>

#include "tokengan/discriminator.hpp"
#include "tokengan/generator.hpp"
#include "tokengan/toy_data.hpp"
#include "tokengan/trainer.hpp"

namespace tokengan {

// Everything a training run needs. The discriminator resolution and channel
// count and the toy image size follow the generator output.
struct RunConfig {
  GeneratorConfig generator;
  DiscConfig disc;
  TrainConfig train;
  ToyDatasetSpec data;

  // Copies the generator output shape into disc and data.
  void sync_shapes();
  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

// One key=value pair per line; '#' starts a comment. Lists are
// comma-separated, ranges are "lo,hi".
std::string render_run_config(const RunConfig& config);
// Starts from defaults and overrides the keys present. Unknown or repeated
// keys and malformed values raise ConfigError.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

}  // namespace tokengan
