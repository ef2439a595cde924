#include "tokengan/style_block.hpp"

#include <cmath>

#include "tokengan/errors.hpp"
#include "tokengan/ops.hpp"

namespace tokengan {

std::string norm_kind_name(NormKind kind) {
  switch (kind) {
    case NormKind::kLayer: return "layer";
    case NormKind::kInstance: return "instance";
    case NormKind::kPixel: return "pixel";
  }
  return "layer";
}

NormKind parse_norm_kind(const std::string& name) {
  if (name == "layer") return NormKind::kLayer;
  if (name == "instance") return NormKind::kInstance;
  if (name == "pixel") return NormKind::kPixel;
  throw ConfigError("unknown normalization '" + name +
                    "' (expected layer, instance or pixel)");
}

Tensor normalize(const Tensor& c, NormKind kind) {
  switch (kind) {
    case NormKind::kLayer: return layer_norm(c);
    case NormKind::kInstance: return instance_norm(c);
    case NormKind::kPixel: return pixel_norm(c);
  }
  return layer_norm(c);
}

namespace {

void check_attention_shapes(const Tensor& c, const Tensor& keys,
                            const Tensor& styles, const Tensor& qw,
                            const Tensor& qb, std::size_t heads) {
  const auto fail = [&](const std::string& what) {
    throw DimensionError(what + ": content " + shape_str(c.shape()) +
                         ", keys " + shape_str(keys.shape()) + ", styles " +
                         shape_str(styles.shape()) + ", query " +
                         shape_str(qw.shape()));
  };
  if (c.rank() != 2 && c.rank() != 3) fail("content must be [m x d] or [B x m x d]");
  const std::size_t d = c.shape().back();
  if (keys.rank() != 2 || keys.dim(1) != d) fail("key width mismatch");
  if (styles.rank() != 2 && styles.rank() != 3) fail("styles must be [n x d] or [B x n x d]");
  if (styles.shape().back() != d) fail("style width mismatch");
  if (styles.dim(styles.rank() - 2) != keys.dim(0)) fail("key and style counts differ");
  if (styles.rank() == 3 && (c.rank() != 3 || c.dim(0) != styles.dim(0))) {
    fail("batch sizes differ");
  }
  if (qw.rank() != 2 || qw.dim(0) != d || qw.dim(1) != d) fail("query projection mismatch");
  if (qb.shape() != Shape{d}) fail("query bias mismatch");
  if (heads == 0 || d % heads != 0) fail("width not divisible by head count");
}

}  // namespace

StyleComputation compute_styles(const Tensor& c_norm, const Tensor& keys,
                                const Tensor& styles, const Tensor& query_w,
                                const Tensor& query_b, std::size_t heads) {
  check_attention_shapes(c_norm, keys, styles, query_w, query_b, heads);
  const std::size_t d = c_norm.shape().back();
  const std::size_t dh = d / heads;
  const std::size_t last = c_norm.rank() - 1;
  const Tensor q = add(matmul_nt(c_norm, query_w), query_b);

  std::vector<Tensor> head_styles;
  Tensor attention;
  for (std::size_t h = 0; h < heads; ++h) {
    Tensor qh = q, kh = keys, sh = styles;
    if (heads > 1) {
      qh = slice(q, last, h * dh, (h + 1) * dh);
      kh = slice(keys, 1, h * dh, (h + 1) * dh);
      sh = slice(styles, styles.rank() - 1, h * dh, (h + 1) * dh);
    }
    const Tensor logits =
        scale(matmul_nt(qh, kh), 1.0 / std::sqrt(static_cast<double>(dh)));
    const Tensor attn = softmax_rows(logits);
    head_styles.push_back(sh.rank() == 3 ? bmm(attn, sh) : matmul(attn, sh));
    attention = h == 0 ? attn : add(attention, attn);
  }
  if (heads == 1) return {head_styles.front(), attention};
  return {concat(head_styles, last),
          scale(attention, 1.0 / static_cast<double>(heads))};
}

Tensor modulate(const Tensor& c, const Tensor& s_prime) {
  if (c.shape() != s_prime.shape()) {
    throw DimensionError("modulation of " + shape_str(c.shape()) + " by " +
                         shape_str(s_prime.shape()));
  }
  return mul(c, s_prime);
}

StyleBlockParams StyleBlockParams::init(std::size_t width,
                                        std::size_t style_tokens,
                                        std::size_t style_width, NormKind norm,
                                        std::size_t heads, Rng& rng) {
  StyleBlockParams p{SemanticKeySet{rng.normal_tensor({style_tokens, width}, 1.0, true)},
                     DenseLayer::init(width, width, rng),
                     DenseLayer::init(width, width, rng),
                     norm,
                     heads,
                     true,
                     std::nullopt};
  if (style_width != width) {
    p.style_adapter = DenseLayer::init(width, style_width, rng);
  }
  p.validate(style_tokens, style_width);
  return p;
}

void StyleBlockParams::validate(std::size_t style_tokens,
                                std::size_t style_width) const {
  const std::size_t d = width();
  if (embed.in_features() != d || query.in_features() != d ||
      query.out_features() != d) {
    throw DimensionError("style block layers disagree on width " +
                         std::to_string(d));
  }
  if (keys.keys.rank() != 2 || keys.keys.dim(0) != style_tokens ||
      keys.keys.dim(1) != d) {
    throw DimensionError("keys " + shape_str(keys.keys.shape()) +
                         " do not match " + std::to_string(style_tokens) +
                         " style tokens of width " + std::to_string(d));
  }
  if (heads == 0 || d % heads != 0) {
    throw ConfigError("width " + std::to_string(d) +
                      " is not divisible by " + std::to_string(heads) +
                      " heads");
  }
  const std::size_t adapted =
      style_adapter ? style_adapter->out_features() : style_width;
  if (adapted != d || (style_adapter && style_adapter->in_features() != style_width)) {
    throw DimensionError("style width " + std::to_string(style_width) +
                         " cannot feed a block of width " + std::to_string(d));
  }
}

void StyleBlockParams::append_params(const std::string& prefix,
                                     ParamList& out) const {
  out.push_back({prefix + ".keys", keys.keys});
  out.push_back({prefix + ".qw", query.weight});
  out.push_back({prefix + ".qb", query.bias});
  out.push_back({prefix + ".ew", embed.weight});
  out.push_back({prefix + ".eb", embed.bias});
  if (style_adapter) {
    out.push_back({prefix + ".aw", style_adapter->weight});
    out.push_back({prefix + ".ab", style_adapter->bias});
  }
}

StyleBlockOutput style_block_forward(const Tensor& c_in,
                                     const StyleTokenSet& styles,
                                     const StyleBlockParams& params) {
  const Tensor c_norm = normalize(c_in, params.norm);
  const Tensor s = params.style_adapter
                       ? params.style_adapter->forward(styles.styles)
                       : styles.styles;
  auto computed =
      compute_styles(c_norm, params.keys.keys, s,
                     params.query.effective_weight(), params.query.bias,
                     params.heads);
  Tensor out = params.embed.forward(modulate(c_norm, computed.styles));
  if (params.activation) out = leaky_relu(out);
  return {out, computed.attention, computed.styles};
}

}  // namespace tokengan
