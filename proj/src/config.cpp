#include "tokengan/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <vector>

#include "tokengan/errors.hpp"

namespace tokengan {

void RunConfig::sync_shapes() {
  disc.resolution = generator.synthesis.output_resolution();
  disc.image_channels = generator.synthesis.image_channels;
  data.image_size = generator.synthesis.output_resolution();
}

void RunConfig::validate() const {
  generator.validate();
  disc.validate();
  train.validate();
  data.validate();
  const auto& s = generator.synthesis;
  if (disc.resolution != s.output_resolution() ||
      data.image_size != s.output_resolution() ||
      disc.image_channels != s.image_channels) {
    throw ConfigError("discriminator and data shapes must follow the generator output");
  }
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const auto r = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || r.ec != std::errc() || r.ptr != text.data() + text.size()) {
    throw ConfigError("bad value '" + text + "' for " + key);
  }
  return value;
}

std::string fmt_list(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(v[i]);
  }
  return out;
}

std::vector<std::size_t> parse_list(const std::string& key,
                                    const std::string& text) {
  std::vector<std::size_t> out;
  for (const auto& item : split(text, ',')) {
    out.push_back(parse_number<std::size_t>(key, item));
  }
  if (out.empty()) throw ConfigError("empty list for " + key);
  return out;
}

std::string fmt_range(const Range& r) { return fmt(r.lo) + "," + fmt(r.hi); }

Range parse_range(const std::string& key, const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.size() != 2) throw ConfigError(key + " needs 'lo,hi'");
  return {parse_number<double>(key, parts[0]), parse_number<double>(key, parts[1])};
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError("bad boolean '" + text + "' for " + key);
}

struct Field {
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

#define SIZE_FIELD(name, member)                                          \
  Field {                                                                 \
    name, [](const RunConfig& c) { return std::to_string(c.member); },   \
        [](RunConfig& c, const std::string& v) {                          \
          c.member = parse_number<std::size_t>(name, v);                  \
        }                                                                 \
  }
#define REAL_FIELD(name, member)                                          \
  Field {                                                                 \
    name, [](const RunConfig& c) { return fmt(c.member); },              \
        [](RunConfig& c, const std::string& v) {                          \
          c.member = parse_number<double>(name, v);                       \
        }                                                                 \
  }
#define LIST_FIELD(name, member)                                          \
  Field {                                                                 \
    name, [](const RunConfig& c) { return fmt_list(c.member); },         \
        [](RunConfig& c, const std::string& v) {                          \
          c.member = parse_list(name, v);                                 \
        }                                                                 \
  }
#define RANGE_FIELD(name, member)                                         \
  Field {                                                                 \
    name, [](const RunConfig& c) { return fmt_range(c.member); },        \
        [](RunConfig& c, const std::string& v) {                          \
          c.member = parse_range(name, v);                                \
        }                                                                 \
  }
#define BOOL_FIELD(name, member)                                          \
  Field {                                                                 \
    name,                                                                 \
        [](const RunConfig& c) {                                          \
          return std::string(c.member ? "true" : "false");               \
        },                                                                \
        [](RunConfig& c, const std::string& v) {                          \
          c.member = parse_bool(name, v);                                 \
        }                                                                 \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      LIST_FIELD("resolutions", generator.synthesis.resolutions),
      LIST_FIELD("patch_sizes", generator.synthesis.patch_sizes),
      LIST_FIELD("channels", generator.synthesis.channels),
      SIZE_FIELD("blocks_per_resolution", generator.synthesis.blocks_per_resolution),
      SIZE_FIELD("style_tokens", generator.synthesis.style_tokens),
      SIZE_FIELD("style_width", generator.synthesis.style_width),
      SIZE_FIELD("image_channels", generator.synthesis.image_channels),
      Field{"norm",
            [](const RunConfig& c) { return norm_kind_name(c.generator.synthesis.norm); },
            [](RunConfig& c, const std::string& v) {
              c.generator.synthesis.norm = parse_norm_kind(v);
            }},
      SIZE_FIELD("heads", generator.synthesis.heads),
      Field{"token_upsample",
            [](const RunConfig& c) {
              return std::string(c.generator.synthesis.token_upsample == Resample::kNearest
                                     ? "nearest"
                                     : "bilinear");
            },
            [](RunConfig& c, const std::string& v) {
              if (v == "nearest") {
                c.generator.synthesis.token_upsample = Resample::kNearest;
              } else if (v == "bilinear") {
                c.generator.synthesis.token_upsample = Resample::kBilinear;
              } else {
                throw ConfigError("token_upsample must be nearest or bilinear, got '" + v + "'");
              }
            }},
      BOOL_FIELD("style_adapters", generator.synthesis.style_adapters),
      SIZE_FIELD("mapping_depth", generator.mapping_depth),
      BOOL_FIELD("per_layer_styles", generator.per_layer_styles),
      LIST_FIELD("disc_channels", disc.channels),
      REAL_FIELD("disc_slope", disc.slope),
      SIZE_FIELD("batch_size", train.batch_size),
      REAL_FIELD("lr_g", train.lr_g),
      REAL_FIELD("lr_d", train.lr_d),
      REAL_FIELD("beta1", train.beta1),
      REAL_FIELD("beta2", train.beta2),
      REAL_FIELD("r1_gamma", train.r1_gamma),
      SIZE_FIELD("r1_interval", train.r1_interval),
      REAL_FIELD("mixing_prob", train.mixing_prob),
      REAL_FIELD("layer_mixing_prob", train.layer_mixing_prob),
      SIZE_FIELD("total_steps", train.total_steps),
      SIZE_FIELD("checkpoint_every", train.checkpoint_every),
      SIZE_FIELD("seed", train.seed),
      SIZE_FIELD("data_seed", data.seed),
      RANGE_FIELD("shape_hue", data.shape_hue),
      RANGE_FIELD("background_hue", data.background_hue),
      RANGE_FIELD("position", data.position),
      RANGE_FIELD("scale", data.scale),
      RANGE_FIELD("aspect", data.aspect),
  };
  return table;
}

#undef SIZE_FIELD
#undef REAL_FIELD
#undef LIST_FIELD
#undef RANGE_FIELD
#undef BOOL_FIELD

}  // namespace

std::string render_run_config(const RunConfig& config) {
  std::string out;
  for (const auto& f : fields()) out += f.key + "=" + f.get(config) + "\n";
  return out;
}

RunConfig parse_run_config(const std::string& text) {
  RunConfig config;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError("repeated key " + key);
    const Field* field = nullptr;
    for (const auto& f : fields()) {
      if (f.key == key) field = &f;
    }
    if (!field) throw ConfigError("unknown key " + key);
    field->set(config, value);
  }
  config.sync_shapes();
  config.validate();
  return config;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str());
}

}  // namespace tokengan
