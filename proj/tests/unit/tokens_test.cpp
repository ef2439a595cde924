#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "tokengan/errors.hpp"
#include "tokengan/ops.hpp"
#include "tokengan/tokens.hpp"

using namespace tokengan;

TEST(WithPositionsTest, ZeroPositionsReturnTokens) {
  Rng rng(1);
  auto grid = ContentTokenGrid::init(2, 3, 4, 1, rng);
  grid.pos_encodings = Tensor::zeros({6, 4});
  EXPECT_EQ(with_positions(grid).to_vector(), grid.tokens.to_vector());
}

TEST(WithPositionsTest, ZeroTokensReturnPositions) {
  Rng rng(2);
  auto grid = ContentTokenGrid::init(2, 2, 3, 1, rng);
  grid.tokens = Tensor::zeros({4, 3});
  EXPECT_EQ(with_positions(grid).to_vector(), grid.pos_encodings.to_vector());
}

TEST(WithPositionsTest, ScalarExample) {
  ContentTokenGrid grid{Tensor::from({1, 2}, {1, 2}),
                        Tensor::from({1, 2}, {0.5, -1}), 1, 1, 1};
  EXPECT_EQ(with_positions(grid).to_vector(), (std::vector<double>{1.5, 1}));
}

TEST(WithPositionsTest, ShapeMismatchIsDimensionError) {
  ContentTokenGrid grid{Tensor::zeros({2, 2}), Tensor::zeros({2, 3}), 1, 2, 1};
  EXPECT_THROW(with_positions(grid), DimensionError);
  ContentTokenGrid bad_grid{Tensor::zeros({3, 2}), Tensor::zeros({3, 2}), 2, 2, 1};
  EXPECT_THROW(bad_grid.validate(), DimensionError);
}

TEST(ContentTokenGridTest, InitHasRequestedShapeAndSmallPositions) {
  Rng rng(3);
  const auto grid = ContentTokenGrid::init(4, 4, 16, 1, rng);
  EXPECT_EQ(grid.count(), 16u);
  EXPECT_EQ(grid.width(), 16u);
  EXPECT_EQ(grid.tokens.shape(), grid.pos_encodings.shape());
  EXPECT_TRUE(grid.tokens.requires_grad());
  EXPECT_TRUE(grid.pos_encodings.requires_grad());
  double sq = 0.0;
  for (double v : grid.pos_encodings.data()) sq += v * v;
  const double stddev = std::sqrt(sq / 256.0);
  EXPECT_GT(stddev, 0.01);
  EXPECT_LT(stddev, 0.03);
}

TEST(TokensToImageTest, PixelTokensFillGridRowMajor) {
  const auto tokens = Tensor::from({4, 1}, {1, 2, 3, 4});
  const auto image = tokens_to_image(tokens, 2, 2, 1, 1);
  EXPECT_EQ(image.shape(), (Shape{1, 2, 2}));
  EXPECT_EQ(image.to_vector(), (std::vector<double>{1, 2, 3, 4}));
}

TEST(TokensToImageTest, PatchTokenFillsItsPatchRowMajor) {
  const auto tokens = Tensor::from({1, 4}, {1, 2, 3, 4});
  const auto image = tokens_to_image(tokens, 1, 1, 2, 1);
  EXPECT_EQ(image.shape(), (Shape{1, 2, 2}));
  EXPECT_EQ(image.to_vector(), (std::vector<double>{1, 2, 3, 4}));
}

TEST(TokensToImageTest, MatchesIndexArithmetic) {
  // element (ch, py, px) of token (gy, gx) lands at
  // image[ch][gy * p + py][gx * p + px].
  const std::size_t gh = 2, gw = 3, p = 2, c = 3;
  std::vector<double> values(gh * gw * p * p * c);
  std::iota(values.begin(), values.end(), 0.0);
  const auto image =
      tokens_to_image(Tensor::from({gh * gw, p * p * c}, values), gh, gw, p, c);
  const std::size_t H = gh * p, W = gw * p;
  for (std::size_t gy = 0; gy < gh; ++gy)
    for (std::size_t gx = 0; gx < gw; ++gx)
      for (std::size_t ch = 0; ch < c; ++ch)
        for (std::size_t py = 0; py < p; ++py)
          for (std::size_t px = 0; px < p; ++px) {
            const double want =
                values[(gy * gw + gx) * p * p * c + ch * p * p + py * p + px];
            EXPECT_EQ(image.at((ch * H + gy * p + py) * W + gx * p + px), want);
          }
}

TEST(TokensToImageTest, BadFactorizationIsDimensionError) {
  EXPECT_THROW(tokens_to_image(Tensor::zeros({5, 1}), 2, 2, 1, 1), DimensionError);
  EXPECT_THROW(tokens_to_image(Tensor::zeros({4, 3}), 2, 2, 1, 1), DimensionError);
  EXPECT_THROW(image_to_tokens(Tensor::zeros({1, 3, 4}), 2), DimensionError);
}

// Randomized shapes: the reshape pair is a bijection in both directions.
TEST(TokensToImageTest, RoundTripIsBitExactOverRandomShapes) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t gh = rng.integer(1, 5), gw = rng.integer(1, 5);
    const std::size_t p = rng.integer(1, 3), c = rng.integer(1, 4);
    const bool batched = rng.bernoulli(0.5);
    const std::size_t b = rng.integer(1, 3);
    Shape shape{gh * gw, p * p * c};
    if (batched) shape.insert(shape.begin(), b);
    const Tensor tokens = rng.normal_tensor(shape);
    const Tensor image = tokens_to_image(tokens, gh, gw, p, c);
    EXPECT_EQ(image_to_tokens(image, p).to_vector(), tokens.to_vector());
    EXPECT_EQ(image_to_tokens(image, p).shape(), tokens.shape());

    Shape ishape{c, gh * p, gw * p};
    if (batched) ishape.insert(ishape.begin(), b);
    const Tensor img = rng.normal_tensor(ishape);
    EXPECT_EQ(tokens_to_image(image_to_tokens(img, p), gh, gw, p, c).to_vector(),
              img.to_vector());
  }
}

// Moving token rows together with their grid positions leaves the image
// unchanged.
TEST(TokensToImageTest, PermutingTokensWithPositionsKeepsImage) {
  Rng rng(12);
  const std::size_t gh = 3, gw = 4, p = 2, c = 2, m = gh * gw, w = p * p * c;
  const Tensor tokens = rng.normal_tensor({m, w});
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(5));

  // Store token i at slot perm[i], then place each slot back at the grid
  // position of the token it holds.
  std::vector<double> permuted(m * w);
  for (std::size_t i = 0; i < m; ++i)
    std::copy_n(tokens.data().begin() + i * w, w, permuted.begin() + perm[i] * w);
  std::vector<double> restored(m * w);
  for (std::size_t i = 0; i < m; ++i)
    std::copy_n(permuted.begin() + perm[i] * w, w, restored.begin() + i * w);

  EXPECT_EQ(tokens_to_image(Tensor::from({m, w}, restored), gh, gw, p, c).to_vector(),
            tokens_to_image(tokens, gh, gw, p, c).to_vector());
}

TEST(StyleTokenSetTest, CountWidthBatch) {
  const StyleTokenSet one{Tensor::zeros({8, 32})};
  EXPECT_EQ(one.count(), 8u);
  EXPECT_EQ(one.width(), 32u);
  EXPECT_EQ(one.batch(), 1u);
  const StyleTokenSet many{Tensor::zeros({5, 8, 32})};
  EXPECT_EQ(many.count(), 8u);
  EXPECT_EQ(many.batch(), 5u);
}
