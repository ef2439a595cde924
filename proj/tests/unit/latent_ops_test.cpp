#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "tokengan/errors.hpp"
#include "tokengan/latent_ops.hpp"
#include "tokengan/ops.hpp"

using namespace tokengan;

namespace {

GeneratorConfig small_gen(std::size_t tokens = 4) {
  GeneratorConfig g;
  g.synthesis.resolutions = {4, 8};
  g.synthesis.patch_sizes = {1, 1};
  g.synthesis.channels = {8, 8};
  g.synthesis.style_tokens = tokens;
  g.synthesis.style_width = 8;
  g.mapping_depth = 2;
  return g;
}

Tensor row(const Tensor& t, std::size_t j) {
  const std::size_t d = t.dim(1);
  return reshape(slice(t, 0, j, j + 1), {d});
}

}  // namespace

TEST(EditTest, RewritingARowWithItselfIsANoOp) {
  Rng rng(1);
  const StyleTokenSet s{rng.normal_tensor({4, 8})};
  for (std::size_t j = 0; j < 4; ++j)
    EXPECT_EQ(edit_style(s, j, row(s.styles, j)).styles.to_vector(), s.styles.to_vector());
}

TEST(EditTest, EditThenRestore) {
  Rng rng(2);
  const StyleTokenSet s{rng.normal_tensor({4, 8})};
  const auto v = rng.normal_tensor({8});
  const auto edited = edit_style(s, 2, v);
  EXPECT_EQ(edit_style(edited, 2, row(s.styles, 2)).styles.to_vector(), s.styles.to_vector());
  std::size_t changed = 0;
  for (std::size_t i = 0; i < 32; ++i) {
    if (edited.styles.at(i) != s.styles.at(i)) {
      ++changed;
      EXPECT_EQ(i / 8, 2u);
      EXPECT_EQ(edited.styles.at(i), v.at(i % 8));
    }
  }
  EXPECT_EQ(changed, 8u);
}

TEST(EditTest, BadIndexOrShapeIsRejected) {
  Rng rng(3);
  const StyleTokenSet s{rng.normal_tensor({4, 8})};
  EXPECT_THROW(edit_style(s, 4, rng.normal_tensor({8})), ContractError);
  EXPECT_THROW(edit_style(s, 0, rng.normal_tensor({7})), DimensionError);
}

TEST(InterpolateTest, EndpointsMidpointAndSelf) {
  const StyleTokenSet a{Tensor::from({1, 1}, {2})}, b{Tensor::from({1, 1}, {4})};
  EXPECT_EQ(interpolate(a, b, 0.5).styles.item(), 3.0);
  Rng rng(4);
  const StyleTokenSet s1{rng.normal_tensor({4, 8})}, s2{rng.normal_tensor({4, 8})};
  EXPECT_EQ(interpolate(s1, s2, 1.0).styles.to_vector(), s1.styles.to_vector());
  EXPECT_EQ(interpolate(s1, s2, 0.0).styles.to_vector(), s2.styles.to_vector());
  // alpha s + (1 - alpha) s rounds to within an ulp or two of s.
  for (double alpha : {0.0, 0.3, 1.0}) {
    const auto same = interpolate(s1, s1, alpha).styles;
    for (std::size_t i = 0; i < same.numel(); ++i)
      EXPECT_NEAR(same.at(i), s1.styles.at(i), 1e-15 * (1 + std::abs(s1.styles.at(i))));
  }
}

TEST(InterpolateTest, AffineInAlpha) {
  Rng rng(5);
  const StyleTokenSet s1{rng.normal_tensor({3, 5})}, s2{rng.normal_tensor({3, 5})};
  for (int trial = 0; trial < 20; ++trial) {
    const double a = rng.uniform(0.0, 1.0), b = rng.uniform(0.0, 1.0), t = rng.uniform(0.0, 1.0);
    const auto lhs = interpolate(s1, s2, t * a + (1 - t) * b).styles;
    const auto ia = interpolate(s1, s2, a).styles, ib = interpolate(s1, s2, b).styles;
    for (std::size_t i = 0; i < lhs.numel(); ++i)
      EXPECT_NEAR(lhs.at(i), t * ia.at(i) + (1 - t) * ib.at(i), 1e-12);
  }
}

TEST(InterpolateTest, AlphaScheduleRunsFromOneToZero) {
  EXPECT_EQ(interpolation_alphas(2), (std::vector<double>{1.0, 0.0}));
  const auto five = interpolation_alphas(5);
  ASSERT_EQ(five.size(), 5u);
  EXPECT_EQ(five.front(), 1.0);
  EXPECT_EQ(five.back(), 0.0);
  EXPECT_EQ(five[2], 0.5);
  EXPECT_THROW(interpolation_alphas(1), ContractError);
}

TEST(InterpolateTest, EndpointImagesEqualDirectSynthesis) {
  Rng rng(6);
  const Generator gen(small_gen(), rng);
  const auto s1 = gen.map(sample_latent(1, 8)), s2 = gen.map(sample_latent(2, 8));
  EXPECT_EQ(gen.synthesize(interpolate(s1, s2, 1.0)).image.to_vector(),
            gen.synthesize(s1).image.to_vector());
  EXPECT_EQ(gen.synthesize(interpolate(s1, s2, 0.0)).image.to_vector(),
            gen.synthesize(s2).image.to_vector());
}

TEST(InversionTest, ExactInitialStylesAreAFixedPoint) {
  Rng rng(7);
  const Generator gen(small_gen(), rng);
  const auto styles = gen.map(sample_latent(3, 8));
  const auto target = gen.synthesize(styles).image.detach();
  InversionConfig config;
  config.iterations = 5;
  const auto result = invert(target, gen, config, &styles);
  EXPECT_EQ(result.mse_curve.front(), 0.0);
  EXPECT_EQ(result.best_mse, 0.0);
  EXPECT_EQ(result.image.to_vector(), target.to_vector());
}

TEST(InversionTest, BestMseIsTheRunningMinimumAndDecreases) {
  Rng rng(8);
  const Generator gen(small_gen(), rng);
  const auto target = gen.generate(sample_latent(11, 8)).detach();
  for (auto space : {InversionSpace::kStyle, InversionSpace::kLatent}) {
    InversionConfig config;
    config.iterations = 60;
    config.init_samples = 50;
    config.space = space;
    const auto result = invert(target, gen, config);
    ASSERT_EQ(result.mse_curve.size(), 60u);
    const double best = *std::min_element(result.mse_curve.begin(), result.mse_curve.end());
    EXPECT_EQ(result.best_mse, best);
    EXPECT_LT(best, result.mse_curve.front());
    EXPECT_NEAR(mean_squared_error(result.image, target), best, 1e-12);
    EXPECT_EQ(result.latent.defined(), space == InversionSpace::kLatent);
  }
}

TEST(InversionTest, GeneratorIsNotModified) {
  Rng rng(9);
  const Generator gen(small_gen(), rng);
  const auto z = sample_latent(4, 8);
  const auto before = gen.generate(z).to_vector();
  InversionConfig config;
  config.iterations = 10;
  config.init_samples = 10;
  invert(gen.generate(sample_latent(5, 8)).detach(), gen, config);
  EXPECT_EQ(gen.generate(z).to_vector(), before);
}

TEST(InversionTest, InvalidConfigAndTargetAreRejected) {
  Rng rng(10);
  const Generator gen(small_gen(), rng);
  InversionConfig config;
  config.iterations = 0;
  EXPECT_THROW(invert(Tensor::zeros({3, 8, 8}), gen, config), ConfigError);
  EXPECT_THROW(invert(Tensor::zeros({3, 16, 16}), gen, InversionConfig{}), DimensionError);
}

TEST(AttentionTest, RowsAndHeatMapsSumToOne) {
  Rng rng(11);
  const Generator gen(small_gen(), rng);
  const auto styles = gen.map(sample_latent(6, 8));
  for (std::size_t layer = 0; layer < 4; ++layer) {
    const auto maps = extract_attention(gen, styles, layer);
    ASSERT_EQ(maps.raw.shape(), (Shape{4, 8, 8}));
    const std::size_t m = maps.map.weights.dim(0);
    for (std::size_t i = 0; i < m; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < 4; ++j) s += maps.map.weights.at(i * 4 + j);
      EXPECT_NEAR(s, 1.0, 1e-6);
    }
    for (std::size_t p = 0; p < 64; ++p) {
      double s = 0.0;
      for (std::size_t j = 0; j < 4; ++j) s += maps.raw.at(j * 64 + p);
      EXPECT_NEAR(s, 1.0, 1e-6);
    }
    for (double v : maps.normalized.data()) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
  EXPECT_THROW(extract_attention(gen, styles, 4), ContractError);
}

TEST(AttentionTest, SingleTokenAttentionIsUniformOne) {
  Rng rng(12);
  const Generator gen(small_gen(1), rng);
  const auto maps = extract_attention(gen, gen.map(sample_latent(7, 8)), 1);
  for (double v : maps.raw.data()) EXPECT_EQ(v, 1.0);
}

TEST(ErrorMetricTest, MeanAbsoluteErrorInByteUnits) {
  const auto a = Tensor::full({3, 2, 2}, -1.0), b = Tensor::full({3, 2, 2}, 1.0);
  EXPECT_EQ(mean_absolute_error(a, a), 0.0);
  EXPECT_EQ(mean_absolute_error(a, b), 255.0);
  EXPECT_EQ(mean_absolute_error(a, Tensor::zeros({3, 2, 2})), 127.5);
  EXPECT_EQ(mean_squared_error(a, b), 4.0);
  EXPECT_THROW(mean_absolute_error(a, Tensor::zeros({3, 2, 1})), DimensionError);
}
