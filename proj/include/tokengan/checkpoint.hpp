#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>

#include "tokengan/config.hpp"
#include "tokengan/nn.hpp"

namespace tokengan {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// File layout, all integers little-endian:
//   "TKGN"  u32 version  u64 header_len  header bytes (key=value text)
//   u64 record_count, then per record:
//   u32 name_len  name bytes  u32 rank  u64 dims[rank]  f64 values[...]
struct Checkpoint {
  std::string header;
  ParamList tensors;
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
// Rejects bad magic, unknown versions and truncated or inconsistent records.
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

// Networks and progress of a training run.
struct ModelState {
  RunConfig config;
  std::size_t step = 0;
  Generator generator;
  Discriminator discriminator;
};

// The header holds the run config followed by a "step=N" line.
Checkpoint make_model_checkpoint(const RunConfig& config, std::size_t step,
                                 const Generator& gen,
                                 const Discriminator& disc);
ModelState restore_model(const Checkpoint& ckpt);
ModelState load_model(const std::string& path);

}  // namespace tokengan
