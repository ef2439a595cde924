#include <gtest/gtest.h>

#include <cmath>

#include "tokengan/discriminator.hpp"
#include "tokengan/errors.hpp"
#include "tokengan/gradcheck.hpp"
#include "tokengan/losses.hpp"
#include "tokengan/ops.hpp"

using namespace tokengan;

namespace {

DiscConfig small_disc() {
  DiscConfig c;
  c.resolution = 8;
  c.channels = {3, 4};
  return c;
}

// Rebuilds the critic around externally owned parameter tensors.
Discriminator disc_from(const DiscConfig& c, const Discriminator& like,
                        const std::vector<Tensor>& t) {
  const auto& p = like.params();
  DiscParams params;
  params.from_rgb = {t[0], t[1], p.from_rgb.gain};
  for (std::size_t i = 0; i < p.convs.size(); ++i) {
    params.convs.push_back({t[2 + 2 * i], t[3 + 2 * i], p.convs[i].gain});
  }
  const std::size_t k = 2 + 2 * p.convs.size();
  params.dense = {t[k], t[k + 1], p.dense.gain};
  return Discriminator(c, params);
}

std::vector<Tensor> random_biases(const Discriminator& d, Rng& rng) {
  std::vector<Tensor> out;
  for (const auto& p : d.parameters()) {
    out.push_back(p.name.back() == 'b' ? rng.normal_tensor(p.tensor.shape(), 0.3)
                                       : p.tensor.detach());
  }
  return out;
}

}  // namespace

TEST(DiscriminatorTest, ScoreShapes) {
  Rng rng(1);
  const Discriminator d(DiscConfig{}, rng);
  EXPECT_EQ(d.score(rng.normal_tensor({3, 32, 32})).shape(), Shape{});
  EXPECT_EQ(d.score(rng.normal_tensor({5, 3, 32, 32})).shape(), Shape{5});
  EXPECT_THROW(d.score(rng.normal_tensor({3, 16, 16})), DimensionError);
  EXPECT_THROW(d.score(rng.normal_tensor({2, 1, 32, 32})), DimensionError);
}

TEST(DiscriminatorTest, DeterministicAndSensitiveToInput) {
  Rng rng(2);
  const Discriminator d(DiscConfig{}, rng);
  const auto x = rng.normal_tensor({3, 32, 32});
  EXPECT_EQ(d.score(x).item(), d.score(x.detach()).item());
  const auto y = add(x, rng.normal_tensor({3, 32, 32}, 0.1));
  EXPECT_NE(d.score(x).item(), d.score(y).item());
}

TEST(DiscriminatorTest, BatchScoresMatchSingleImages) {
  Rng rng(3);
  const Discriminator d(DiscConfig{}, rng);
  const auto x = rng.normal_tensor({3, 3, 32, 32});
  const auto batch = d.score(x);
  for (std::size_t b = 0; b < 3; ++b) {
    const auto one = d.score(reshape(slice(x, 0, b, b + 1), {3, 32, 32}));
    EXPECT_NEAR(batch.at(b), one.item(), 1e-12);
  }
}

TEST(DiscriminatorTest, InputGradientMatchesFiniteDifferences) {
  Rng rng(4);
  const auto c = small_disc();
  const Discriminator d(c, rng);
  const auto r = gradcheck(
      "disc_input", [&](const std::vector<Tensor>& in) { return d.score(in[0]); },
      {rng.normal_tensor({2, 3, 8, 8})});
  EXPECT_TRUE(r.passed) << r.max_relative_error;
}

TEST(DiscriminatorTest, HandBuiltInputGradientMatchesAutograd) {
  Rng rng(5);
  const Discriminator d(DiscConfig{}, rng);
  const Tensor x = rng.normal_tensor({2, 3, 32, 32}).clone_leaf(true);
  sum(d.score(x)).backward();
  const Tensor g = d.input_gradient(x);
  ASSERT_EQ(g.shape(), x.shape());
  for (std::size_t i = 0; i < g.numel(); ++i) {
    EXPECT_NEAR(g.at(i), x.grad()[i], 1e-12) << i;
    EXPECT_TRUE(std::isfinite(g.at(i)));
  }
}

TEST(DiscriminatorTest, R1GradientWrtParametersMatchesFiniteDifferences) {
  Rng rng(6);
  const auto c = small_disc();
  const Discriminator like(c, rng);
  const auto real = rng.normal_tensor({2, 3, 8, 8});
  const auto r = gradcheck(
      "r1_params",
      [&](const std::vector<Tensor>& in) {
        return r1_penalty(real, disc_from(c, like, in), 1.0);
      },
      random_biases(like, rng));
  EXPECT_TRUE(r.passed) << r.max_relative_error;
}

TEST(DiscriminatorTest, ParameterNamesAndConfigValidation) {
  Rng rng(7);
  const Discriminator d(DiscConfig{}, rng);
  std::vector<std::string> names;
  for (const auto& p : d.parameters()) names.push_back(p.name);
  EXPECT_EQ(names, (std::vector<std::string>{
                       "disc.fromrgb.w", "disc.fromrgb.b", "disc.32.conv.w", "disc.32.conv.b",
                       "disc.16.conv.w", "disc.16.conv.b", "disc.8.conv.w", "disc.8.conv.b",
                       "disc.4.conv.w", "disc.4.conv.b", "disc.dense.w", "disc.dense.b"}));
  DiscConfig bad;
  bad.channels = {8, 8};
  EXPECT_THROW(Discriminator(bad, rng), ConfigError);
  bad = DiscConfig{};
  bad.resolution = 24;
  EXPECT_THROW(Discriminator(bad, rng), ConfigError);
}
