#include "tokengan/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "tokengan/errors.hpp"

namespace tokengan {

namespace {

constexpr char kMagic[4] = {'T', 'K', 'G', 'N'};
// Guards against allocating absurd sizes from a corrupt file.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 32;

void put_u64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes, 8);
}

void put_u32(std::ostream& out, std::uint32_t v) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes, 4);
}

void get_bytes(std::istream& in, char* dst, std::size_t n, const char* what) {
  if (!in.read(dst, static_cast<std::streamsize>(n))) {
    throw IoError(std::string("truncated checkpoint while reading ") + what);
  }
}

std::uint64_t get_u64(std::istream& in, const char* what) {
  unsigned char bytes[8];
  get_bytes(in, reinterpret_cast<char*>(bytes), 8, what);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{bytes[i]} << (8 * i);
  return v;
}

std::uint32_t get_u32(std::istream& in, const char* what) {
  unsigned char bytes[4];
  get_bytes(in, reinterpret_cast<char*>(bytes), 4, what);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes[i]} << (8 * i);
  return v;
}

std::string get_string(std::istream& in, std::uint64_t n, const char* what) {
  if (n > kMaxElements) throw IoError(std::string("corrupt checkpoint ") + what + " length");
  std::string s(n, '\0');
  if (n) get_bytes(in, s.data(), n, what);
  return s;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  out.write(kMagic, 4);
  put_u32(out, kCheckpointVersion);
  put_u64(out, ckpt.header.size());
  out.write(ckpt.header.data(), static_cast<std::streamsize>(ckpt.header.size()));
  put_u64(out, ckpt.tensors.size());
  for (const auto& [name, tensor] : ckpt.tensors) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u32(out, static_cast<std::uint32_t>(tensor.rank()));
    for (std::size_t d : tensor.shape()) put_u64(out, d);
    for (double v : tensor.data()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  if (!out) throw IoError("failed to write checkpoint");
}

Checkpoint read_checkpoint(std::istream& in) {
  char magic[4];
  get_bytes(in, magic, 4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0) throw IoError("not a TKGN checkpoint");
  const std::uint32_t version = get_u32(in, "version");
  if (version != kCheckpointVersion) {
    throw IoError("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ckpt;
  ckpt.header = get_string(in, get_u64(in, "header length"), "header");
  const std::uint64_t count = get_u64(in, "record count");
  if (count > kMaxElements) throw IoError("corrupt checkpoint record count");
  for (std::uint64_t r = 0; r < count; ++r) {
    std::string name = get_string(in, get_u32(in, "name length"), "name");
    const std::uint32_t rank = get_u32(in, "rank");
    if (rank > 8) throw IoError("tensor " + name + " has implausible rank");
    Shape shape(rank);
    std::uint64_t numel = 1;
    for (auto& d : shape) {
      d = get_u64(in, "dimension");
      if (d == 0 || d > kMaxElements || numel * d > kMaxElements) {
        throw IoError("tensor " + name + " has invalid dimensions");
      }
      numel *= d;
    }
    std::vector<double> values(numel);
    for (auto& v : values) v = std::bit_cast<double>(get_u64(in, "values"));
    ckpt.tensors.push_back({std::move(name), Tensor::from(shape, std::move(values))});
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw IoError("trailing bytes after checkpoint records");
  }
  return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_checkpoint(out, ckpt);
  out.close();
  if (!out) throw IoError("failed to write " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_checkpoint(in);
}

Checkpoint make_model_checkpoint(const RunConfig& config, std::size_t step,
                                 const Generator& gen,
                                 const Discriminator& disc) {
  Checkpoint ckpt;
  ckpt.header = render_run_config(config) + "step=" + std::to_string(step) + "\n";
  ckpt.tensors = gen.parameters();
  for (auto& p : disc.parameters()) ckpt.tensors.push_back(std::move(p));
  return ckpt;
}

ModelState restore_model(const Checkpoint& ckpt) {
  // Split off the trailing step line; the rest is a run config.
  const std::string key = "step=";
  const auto pos = ckpt.header.rfind(key);
  if (pos == std::string::npos || (pos != 0 && ckpt.header[pos - 1] != '\n')) {
    throw IoError("checkpoint header has no step");
  }
  RunConfig config;
  std::size_t step = 0;
  try {
    config = parse_run_config(ckpt.header.substr(0, pos));
    step = std::stoull(ckpt.header.substr(pos + key.size()));
  } catch (const Error& e) {
    throw IoError(std::string("bad checkpoint header: ") + e.what());
  } catch (const std::exception&) {
    throw IoError("bad checkpoint step");
  }

  Rng scratch(0);
  Generator gen(config.generator, scratch);
  Discriminator disc(config.disc, scratch);
  ParamList gen_src;
  ParamList disc_src;
  for (const auto& p : ckpt.tensors) {
    (p.name.rfind("disc.", 0) == 0 ? disc_src : gen_src).push_back(p);
  }
  try {
    assign_params(gen.parameters(), gen_src);
    assign_params(disc.parameters(), disc_src);
  } catch (const Error& e) {
    throw IoError(std::string("checkpoint does not match its config: ") + e.what());
  }
  return {std::move(config), step, std::move(gen), std::move(disc)};
}

ModelState load_model(const std::string& path) {
  return restore_model(load_checkpoint(path));
}

}  // namespace tokengan
