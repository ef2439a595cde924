#pragma once

#include <cstddef>
#include <vector>

#include "tokengan/tensor.hpp"

// Differentiable primitives. Unless noted, every op records a backward rule
// and is covered by the finite-difference checks in gradcheck.hpp.
//
// Broadcasting is limited to one form: the second operand of add/sub/mul
// may have a shape equal to a trailing suffix of the first (e.g. a bias
// [c] against rows [r x c], or a scalar [] against anything).
namespace tokengan {

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);
Tensor add_scalar(const Tensor& x, double value);
Tensor neg(const Tensor& x);
Tensor square(const Tensor& x);
Tensor leaky_relu(const Tensor& x, double slope = 0.2);
// log(1 + exp(x)), evaluated without overflow.
Tensor softplus(const Tensor& x);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
// Reductions over the last axis: [..., d] -> [...].
Tensor sum_last(const Tensor& x);
Tensor mean_last(const Tensor& x);
Tensor var_last(const Tensor& x);  // population variance

// Shares storage with `x`; the element count must match.
Tensor reshape(const Tensor& x, Shape shape);
Tensor permute(const Tensor& x, const std::vector<std::size_t>& axes);
// Swaps the last two axes.
Tensor transpose(const Tensor& x);
Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin,
             std::size_t end);
Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);
// [...] -> [copies x ...]
Tensor repeat_batch(const Tensor& x, std::size_t copies);

// a[..., k] . b[k x n] -> [..., n]
Tensor matmul(const Tensor& a, const Tensor& b);
// a[..., k] . b[n x k]^T -> [..., n]
Tensor matmul_nt(const Tensor& a, const Tensor& b);
// a[B x r x k] . b[B x k x c] -> [B x r x c]
Tensor bmm(const Tensor& a, const Tensor& b);

// Row-wise softmax over the last axis with max subtraction.
Tensor softmax_rows(const Tensor& x);
// Per-row (x - mean) / sqrt(var + eps) over the last axis.
Tensor layer_norm(const Tensor& x, double eps = 1e-8);
// Per-row x / sqrt(mean(x^2) + eps), i.e. x * sqrt(d) / |x| for eps -> 0.
Tensor pixel_norm(const Tensor& x, double eps = 1e-8);
// Standardizes each column over the token axis: [..., m, d].
Tensor instance_norm(const Tensor& x, double eps = 1e-8);

enum class Resample { kNearest, kBilinear };

// 2x upsampling of images [..., H, W] (half-pixel centers, edge clamp).
Tensor upsample2x(const Tensor& image, Resample mode);
// 2x upsampling of a token grid [..., gh*gw, d] stored row-major.
Tensor upsample2x_tokens(const Tensor& tokens, std::size_t grid_h,
                         std::size_t grid_w, Resample mode);
// 2x2 average pooling of images [..., H, W]; H and W must be even.
Tensor avg_pool2x(const Tensor& image);

// Same-padded stride-1 convolution: x[B x C x H x W], w[O x C x k x k],
// optional bias[O] (pass an undefined tensor to skip). k must be odd.
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& bias);
// Kernel of the adjoint convolution: out[c][o][i][j] = w[o][c][k-1-i][k-1-j].
Tensor conv_adjoint_weight(const Tensor& w);

// Derivative of leaky_relu evaluated at x (1 or slope). A constant: it
// never participates in differentiation.
Tensor leaky_relu_slope_mask(const Tensor& x, double slope = 0.2);

}  // namespace tokengan
