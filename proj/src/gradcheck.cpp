#include "tokengan/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tokengan/generator.hpp"
#include "tokengan/ops.hpp"
#include "tokengan/random.hpp"

namespace tokengan {

namespace {

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

GradCheckResult gradcheck(const std::string& name, const GradCheckFn& f,
                          std::vector<Tensor> inputs,
                          const GradCheckOptions& options) {
  for (auto& t : inputs) {
    if (options.clone_inputs) {
      t = t.clone_leaf(true);
    } else {
      t.set_requires_grad(true);
      t.zero_grad();
    }
  }

  Rng rng(options.seed);
  Tensor probe;
  {
    NoGradGuard guard;
    probe = f(inputs);
  }
  const Tensor weights = rng.normal_tensor(probe.shape());
  auto objective = [&](const std::vector<Tensor>& in) {
    return sum(mul(f(in), weights));
  };

  objective(inputs).backward();

  GradCheckResult result{name, 0, 0.0, true};
  for (auto& input : inputs) {
    std::vector<double> analytic(input.numel(), 0.0);
    if (input.has_grad()) {
      analytic.assign(input.grad().begin(), input.grad().end());
    }
    std::vector<double> numeric(input.numel(), 0.0);
    auto values = input.mutable_data();
    NoGradGuard guard;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + options.step;
      const double up = objective(inputs).item();
      values[i] = saved - options.step;
      const double down = objective(inputs).item();
      values[i] = saved;
      numeric[i] = (up - down) / (2.0 * options.step);
    }
    std::vector<double> diff(analytic.size());
    std::transform(analytic.begin(), analytic.end(), numeric.begin(),
                   diff.begin(), std::minus<>());
    const double denom = std::max(norm2(analytic), norm2(numeric));
    const double err =
        denom < options.zero_floor ? norm2(diff) : norm2(diff) / denom;
    result.max_relative_error = std::max(result.max_relative_error, err);
    result.checked_elements += values.size();
  }
  result.passed = result.max_relative_error <= options.tolerance;
  return result;
}

namespace {

using Inputs = std::vector<Tensor>;

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return rng.integer(lo, std::max(lo, hi));
}

OpCase unary_case(std::string name, std::function<Tensor(const Tensor&)> op,
                  std::size_t min_last = 1) {
  return {name, [name, op, min_last](std::size_t max_dim, std::uint64_t seed,
                                     const GradCheckOptions& opt) {
            Rng rng(seed);
            Shape s{pick(rng, 1, max_dim), pick(rng, min_last, max_dim)};
            return gradcheck(
                name, [op](const Inputs& in) { return op(in[0]); },
                {rng.normal_tensor(s)}, opt);
          }};
}

std::vector<OpCase> build_cases() {
  std::vector<OpCase> cases;
  auto binary = [&](std::string name,
                    std::function<Tensor(const Tensor&, const Tensor&)> op,
                    bool broadcast) {
    cases.push_back({name, [name, op, broadcast](std::size_t max_dim,
                                                 std::uint64_t seed,
                                                 const GradCheckOptions& opt) {
                       Rng rng(seed);
                       const std::size_t r = pick(rng, 1, max_dim);
                       const std::size_t c = pick(rng, 1, max_dim);
                       Shape sb = broadcast ? Shape{c} : Shape{r, c};
                       return gradcheck(
                           name,
                           [op](const Inputs& in) { return op(in[0], in[1]); },
                           {rng.normal_tensor({r, c}), rng.normal_tensor(sb)},
                           opt);
                     }});
  };
  binary("add", [](auto& a, auto& b) { return add(a, b); }, false);
  binary("add_broadcast", [](auto& a, auto& b) { return add(a, b); }, true);
  binary("sub", [](auto& a, auto& b) { return sub(a, b); }, false);
  binary("sub_broadcast", [](auto& a, auto& b) { return sub(a, b); }, true);
  binary("mul", [](auto& a, auto& b) { return mul(a, b); }, false);
  binary("mul_broadcast", [](auto& a, auto& b) { return mul(a, b); }, true);

  cases.push_back(unary_case("scale", [](const Tensor& x) { return scale(x, -1.7); }));
  cases.push_back(unary_case("add_scalar", [](const Tensor& x) { return add_scalar(x, 0.3); }));
  cases.push_back(unary_case("square", [](const Tensor& x) { return square(x); }));
  cases.push_back(unary_case("leaky_relu", [](const Tensor& x) { return leaky_relu(x, 0.2); }));
  cases.push_back(unary_case("softplus", [](const Tensor& x) { return softplus(scale(x, 3.0)); }));
  cases.push_back(unary_case("sum", [](const Tensor& x) { return sum(x); }));
  cases.push_back(unary_case("mean", [](const Tensor& x) { return mean(x); }));
  cases.push_back(unary_case("sum_last", [](const Tensor& x) { return sum_last(x); }));
  cases.push_back(unary_case("mean_last", [](const Tensor& x) { return mean_last(x); }));
  cases.push_back(unary_case("var_last", [](const Tensor& x) { return var_last(x); }, 2));
  cases.push_back(unary_case("softmax_rows", [](const Tensor& x) { return softmax_rows(x); }));
  cases.push_back(unary_case("layer_norm", [](const Tensor& x) { return layer_norm(x); }, 3));
  cases.push_back(unary_case("pixel_norm", [](const Tensor& x) { return pixel_norm(x); }, 2));
  cases.push_back(unary_case("transpose", [](const Tensor& x) { return transpose(x); }));
  cases.push_back(unary_case("reshape", [](const Tensor& x) {
    return reshape(x, {x.numel()});
  }));

  cases.push_back({"instance_norm", [](std::size_t max_dim, std::uint64_t seed,
                                       const GradCheckOptions& opt) {
                     Rng rng(seed);
                     Shape s{pick(rng, 1, 3), pick(rng, 3, max_dim),
                             pick(rng, 1, max_dim)};
                     return gradcheck(
                         "instance_norm",
                         [](const Inputs& in) { return instance_norm(in[0]); },
                         {rng.normal_tensor(s)}, opt);
                   }});
  cases.push_back({"permute", [](std::size_t max_dim, std::uint64_t seed,
                                 const GradCheckOptions& opt) {
                     Rng rng(seed);
                     Shape s{pick(rng, 1, max_dim), pick(rng, 1, max_dim),
                             pick(rng, 1, max_dim)};
                     return gradcheck(
                         "permute",
                         [](const Inputs& in) { return permute(in[0], {2, 0, 1}); },
                         {rng.normal_tensor(s)}, opt);
                   }});
  cases.push_back({"slice", [](std::size_t max_dim, std::uint64_t seed,
                               const GradCheckOptions& opt) {
                     Rng rng(seed);
                     const std::size_t n = pick(rng, 2, max_dim);
                     const std::size_t b = pick(rng, 0, n - 1);
                     const std::size_t e = pick(rng, b + 1, n);
                     Shape s{pick(rng, 1, max_dim), n, pick(rng, 1, max_dim)};
                     return gradcheck(
                         "slice",
                         [b, e](const Inputs& in) { return slice(in[0], 1, b, e); },
                         {rng.normal_tensor(s)}, opt);
                   }});
  cases.push_back({"concat", [](std::size_t max_dim, std::uint64_t seed,
                                const GradCheckOptions& opt) {
                     Rng rng(seed);
                     const std::size_t r = pick(rng, 1, max_dim);
                     const std::size_t c = pick(rng, 1, max_dim);
                     return gradcheck(
                         "concat",
                         [](const Inputs& in) { return concat({in[0], in[1]}, 1); },
                         {rng.normal_tensor({r, pick(rng, 1, max_dim), c}),
                          rng.normal_tensor({r, pick(rng, 1, max_dim), c})},
                         opt);
                   }});
  cases.push_back({"repeat_batch", [](std::size_t max_dim, std::uint64_t seed,
                                      const GradCheckOptions& opt) {
                     Rng rng(seed);
                     const std::size_t copies = pick(rng, 1, 4);
                     Shape s{pick(rng, 1, max_dim), pick(rng, 1, max_dim)};
                     return gradcheck(
                         "repeat_batch",
                         [copies](const Inputs& in) { return repeat_batch(in[0], copies); },
                         {rng.normal_tensor(s)}, opt);
                   }});
  cases.push_back({"matmul", [](std::size_t max_dim, std::uint64_t seed,
                                const GradCheckOptions& opt) {
                     Rng rng(seed);
                     const std::size_t r = pick(rng, 1, max_dim),
                                       k = pick(rng, 1, max_dim),
                                       c = pick(rng, 1, max_dim);
                     return gradcheck(
                         "matmul",
                         [](const Inputs& in) { return matmul(in[0], in[1]); },
                         {rng.normal_tensor({r, k}), rng.normal_tensor({k, c})}, opt);
                   }});
  cases.push_back({"matmul_nt", [](std::size_t max_dim, std::uint64_t seed,
                                   const GradCheckOptions& opt) {
                     Rng rng(seed);
                     const std::size_t b = pick(rng, 1, 3), r = pick(rng, 1, max_dim),
                                       k = pick(rng, 1, max_dim),
                                       c = pick(rng, 1, max_dim);
                     return gradcheck(
                         "matmul_nt",
                         [](const Inputs& in) { return matmul_nt(in[0], in[1]); },
                         {rng.normal_tensor({b, r, k}), rng.normal_tensor({c, k})}, opt);
                   }});
  cases.push_back({"bmm", [](std::size_t max_dim, std::uint64_t seed,
                             const GradCheckOptions& opt) {
                     Rng rng(seed);
                     const std::size_t b = pick(rng, 1, 3), r = pick(rng, 1, max_dim),
                                       k = pick(rng, 1, max_dim),
                                       c = pick(rng, 1, max_dim);
                     return gradcheck(
                         "bmm", [](const Inputs& in) { return bmm(in[0], in[1]); },
                         {rng.normal_tensor({b, r, k}), rng.normal_tensor({b, k, c})},
                         opt);
                   }});
  for (auto mode : {Resample::kNearest, Resample::kBilinear}) {
    const std::string suffix = mode == Resample::kNearest ? "nearest" : "bilinear";
    cases.push_back({"upsample2x_" + suffix,
                     [mode, suffix](std::size_t max_dim, std::uint64_t seed,
                                    const GradCheckOptions& opt) {
                       Rng rng(seed);
                       Shape s{pick(rng, 1, 3), pick(rng, 1, max_dim),
                               pick(rng, 1, max_dim)};
                       return gradcheck(
                           "upsample2x_" + suffix,
                           [mode](const Inputs& in) { return upsample2x(in[0], mode); },
                           {rng.normal_tensor(s)}, opt);
                     }});
    cases.push_back({"upsample2x_tokens_" + suffix,
                     [mode, suffix](std::size_t max_dim, std::uint64_t seed,
                                    const GradCheckOptions& opt) {
                       Rng rng(seed);
                       const std::size_t gh = pick(rng, 1, max_dim),
                                         gw = pick(rng, 1, max_dim);
                       Shape s{pick(rng, 1, 2), gh * gw, pick(rng, 1, max_dim)};
                       return gradcheck(
                           "upsample2x_tokens_" + suffix,
                           [gh, gw, mode](const Inputs& in) {
                             return upsample2x_tokens(in[0], gh, gw, mode);
                           },
                           {rng.normal_tensor(s)}, opt);
                     }});
  }
  cases.push_back({"avg_pool2x", [](std::size_t max_dim, std::uint64_t seed,
                                    const GradCheckOptions& opt) {
                     Rng rng(seed);
                     const std::size_t half = std::max<std::size_t>(1, max_dim / 2);
                     Shape s{pick(rng, 1, 3), 2 * pick(rng, 1, half),
                             2 * pick(rng, 1, half)};
                     return gradcheck(
                         "avg_pool2x", [](const Inputs& in) { return avg_pool2x(in[0]); },
                         {rng.normal_tensor(s)}, opt);
                   }});
  for (std::size_t k : {std::size_t{1}, std::size_t{3}}) {
    const std::string name = "conv2d_" + std::to_string(k) + "x" + std::to_string(k);
    cases.push_back({name, [k, name](std::size_t max_dim, std::uint64_t seed,
                                     const GradCheckOptions& opt) {
                       Rng rng(seed);
                       const std::size_t b = pick(rng, 1, 2), c = pick(rng, 1, max_dim),
                                         o = pick(rng, 1, max_dim),
                                         h = pick(rng, 1, max_dim),
                                         w = pick(rng, 1, max_dim);
                       return gradcheck(
                           name,
                           [](const Inputs& in) { return conv2d(in[0], in[1], in[2]); },
                           {rng.normal_tensor({b, c, h, w}),
                            rng.normal_tensor({o, c, k, k}), rng.normal_tensor({o})},
                           opt);
                     }});
  }
  cases.push_back({"conv_adjoint_weight", [](std::size_t max_dim, std::uint64_t seed,
                                             const GradCheckOptions& opt) {
                     Rng rng(seed);
                     Shape s{pick(rng, 1, max_dim), pick(rng, 1, max_dim), 3, 3};
                     return gradcheck(
                         "conv_adjoint_weight",
                         [](const Inputs& in) { return conv_adjoint_weight(in[0]); },
                         {rng.normal_tensor(s)}, opt);
                   }});
  return cases;
}

}  // namespace

const std::vector<OpCase>& primitive_op_cases() {
  static const std::vector<OpCase> cases = build_cases();
  return cases;
}

GeneratorConfig tiny_generator_config() {
  GeneratorConfig config;
  auto& s = config.synthesis;
  s.resolutions = {4, 8};
  // The 8x8 level keeps the 4x4 grid with 2x2 patches of 2 channels, so
  // every token stays 8 wide.
  s.patch_sizes = {1, 2};
  s.channels = {8, 2};
  s.blocks_per_resolution = 2;
  s.style_tokens = 4;
  s.style_width = 8;
  config.mapping_depth = 2;
  return config;
}

GradCheckResult generator_gradcheck(const GeneratorConfig& config,
                                    std::uint64_t seed,
                                    const GradCheckOptions& options) {
  Rng rng(seed);
  const Generator gen(config, rng);
  std::vector<Tensor> inputs{rng.normal_tensor({gen.latent_width()})};
  for (const auto& p : gen.parameters()) inputs.push_back(p.tensor);
  GradCheckOptions opts = options;
  opts.clone_inputs = false;
  return gradcheck(
      "generator",
      [&gen](const std::vector<Tensor>& in) { return gen.generate(in[0]); },
      inputs, opts);
}

}  // namespace tokengan
