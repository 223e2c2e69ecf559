// Copyright 2026 The EvaNet Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <gtest/gtest.h>

#include "evanet/kernels.hpp"
#include "layer_oracles.hpp"

namespace evanet::kernels {
namespace {

using testing::dot;
using testing::max_relative_error;
using testing::numeric_gradient;
using testing::oracle_correlate;
using testing::oracle_pool;
using testing::random_tensor;
using testing::RandomGeometry;
using testing::oracle_forward;
using testing::random_geometry;
using testing::random_layer;
using testing::random_tgm;

// --- Gaussian mixture kernel ---------------------------------------------

TEST(GaussianMixtureKernel, SingleCenteredComponentMatchesScalarOracle) {
  TGMParams tgm = make_tgm_params(3, 1, 2);
  tgm.mixing[0] = 0.7;
  tgm.mixing[1] = -3.0;
  const Tensor k = build_gaussian_mixture_kernel(tgm);

  // mu = 1, sigma = 1: taps are exp(-(l-1)^2 / 2) / Z, evaluated in long double.
  const long double e = std::exp(-0.5L);
  const long double z = 2 * e + 1;
  for (std::size_t row = 0; row < 2; ++row) {
    EXPECT_NEAR(k.at({row, 0}), static_cast<double>(e / z), 1e-15);
    EXPECT_NEAR(k.at({row, 1}), static_cast<double>(1 / z), 1e-15);
    EXPECT_NEAR(k.at({row, 2}), static_cast<double>(e / z), 1e-15);
    // Frozen from a 50-digit evaluation.
    EXPECT_NEAR(k.at({row, 0}), 0.27406861906119698, 1e-15);
    EXPECT_NEAR(k.at({row, 1}), 0.45186276187760604, 1e-15);
  }
}

TEST(GaussianMixtureKernel, EqualLogitsAverageComponents) {
  Rng rng = make_rng(3);
  TGMParams tgm = random_tgm(rng, 7, 2, 3);
  tgm.mixing.fill(0.0);
  const Tensor k = build_gaussian_mixture_kernel(tgm);
  const Tensor comp = gaussian_components(tgm);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t l = 0; l < 7; ++l) {
      EXPECT_NEAR(k.at({i, l}), 0.5 * comp.at({0, l}) + 0.5 * comp.at({1, l}), 1e-15);
    }
  }
}

TEST(GaussianMixtureKernel, RowsAreNormalizedAndNonNegative) {
  Rng rng = make_rng(11);
  const int lens[] = {1, 3, 5, 7, 9, 11};
  for (int draw = 0; draw < 1000; ++draw) {
    const int len = lens[draw % 6];
    TGMParams tgm = random_tgm(rng, len, uniform_int(rng, 1, 6), uniform_int(rng, 1, 5));
    for (double& v : tgm.sigma_hat.values()) v = uniform_real(rng, -8.0, 6.0);
    const Tensor k = build_gaussian_mixture_kernel(tgm);
    for (std::size_t i = 0; i < k.dim(0); ++i) {
      double sum = 0.0;
      for (std::size_t l = 0; l < k.dim(1); ++l) {
        ASSERT_GE(k.at({i, l}), 0.0);
        sum += k.at({i, l});
      }
      ASSERT_NEAR(sum, 1.0, 1e-6);
    }
  }
}

TEST(GaussianMixtureKernel, CentersStayInsideTheWindow) {
  Rng rng = make_rng(5);
  for (int draw = 0; draw < 200; ++draw) {
    TGMParams tgm = random_tgm(rng, 11, 4, 1);
    for (double& v : tgm.mu_hat.values()) v = uniform_real(rng, -30.0, 30.0);
    for (double mu : tgm_centers(tgm)) {
      EXPECT_GE(mu, 0.0);
      EXPECT_LE(mu, 10.0);
    }
  }
}

TEST(GaussianMixtureKernel, RejectsNonFiniteParameters) {
  TGMParams tgm = make_tgm_params(3, 2, 2);
  tgm.sigma_hat[1] = std::nan("");
  EXPECT_THROW(build_gaussian_mixture_kernel(tgm), std::invalid_argument);
}

TEST(GaussianMixtureKernel, BackwardMatchesFiniteDifferences) {
  Rng rng = make_rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    TGMParams tgm = random_tgm(rng, 2 * uniform_int(rng, 1, 5) + 1, uniform_int(rng, 1, 4),
                               uniform_int(rng, 1, 4));
    const Tensor r = random_tensor({tgm.out_channels(), static_cast<std::size_t>(tgm.length)}, rng);
    const TGMGrads g = gaussian_mixture_backward(tgm, r);
    auto loss = [&] { return dot(build_gaussian_mixture_kernel(tgm), r); };
    EXPECT_LT(max_relative_error(g.mu_hat, numeric_gradient(tgm.mu_hat, loss)), 1e-4);
    EXPECT_LT(max_relative_error(g.sigma_hat, numeric_gradient(tgm.sigma_hat, loss)), 1e-4);
    EXPECT_LT(max_relative_error(g.mixing, numeric_gradient(tgm.mixing, loss)), 1e-4);
  }
}

TEST(GaussianMixtureKernel, SingleComponentHasNoMixingGradient) {
  Rng rng = make_rng(8);
  TGMParams tgm = random_tgm(rng, 5, 1, 3);
  const TGMGrads g = gaussian_mixture_backward(tgm, random_tensor({3, 5}, rng));
  for (double v : g.mixing.values()) EXPECT_EQ(v, 0.0);
}

// --- stretching -------------------------------------------------------------

TEST(Stretch, SameLengthIsIdentityOnCentersAndWidths) {
  Rng rng = make_rng(2);
  const TGMParams tgm = random_tgm(rng, 5, 3, 2);
  const TGMParams same = stretch_itgm(tgm, 5);
  const auto mu = tgm_centers(tgm), mu2 = tgm_centers(same);
  const auto sd = tgm_widths(tgm), sd2 = tgm_widths(same);
  for (std::size_t m = 0; m < 3; ++m) {
    EXPECT_DOUBLE_EQ(mu[m], mu2[m]);
    EXPECT_DOUBLE_EQ(sd[m], sd2[m]);
  }
}

TEST(Stretch, CenterOfThreeMapsToCenterOfEleven) {
  TGMParams tgm = make_tgm_params(3, 1, 1);
  const TGMParams out = stretch_itgm(tgm, 11);
  EXPECT_EQ(out.length, 11);
  EXPECT_NEAR(tgm_centers(out)[0], 5.0, 1e-12);
  EXPECT_NEAR(tgm_widths(out)[0], 5.0 * tgm_widths(tgm)[0], 1e-12);
}

TEST(Stretch, PreservesRelativeCentersAndNormalization) {
  Rng rng = make_rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const TGMParams tgm = random_tgm(rng, 3, 3, 2);
    const TGMParams out = stretch_itgm(tgm, 11);
    // Invert the reparameterization: mu / (L - 1) = (tanh(mu_hat) + 1) / 2
    // and sigma = exp(sigma_hat / 2), independently of tgm_centers.
    for (std::size_t m = 0; m < 3; ++m) {
      const double before = tgm_centers(tgm)[m] / 2.0;
      const double after = 0.5 * (std::tanh(out.mu_hat[m]) + 1.0);
      EXPECT_NEAR(before, after, 1e-9);
      EXPECT_NEAR(std::exp(0.5 * out.sigma_hat[m]), 5.0 * std::exp(0.5 * tgm.sigma_hat[m]),
                  1e-9 * std::exp(0.5 * out.sigma_hat[m]));
    }
    const Tensor k = build_gaussian_mixture_kernel(out);
    for (std::size_t i = 0; i < k.dim(0); ++i) {
      double sum = 0.0;
      for (std::size_t l = 0; l < 11; ++l) sum += k.at({i, l});
      EXPECT_NEAR(sum, 1.0, 1e-6);
    }
    EXPECT_EQ(out.mixing, tgm.mixing);
  }
}

TEST(Stretch, RejectsLengthOneSourceAndShrinking) {
  EXPECT_THROW(stretch_itgm(make_tgm_params(1, 1, 1), 3), std::invalid_argument);
  EXPECT_THROW(stretch_itgm(make_tgm_params(5, 1, 1), 3), std::invalid_argument);
}

// --- forward passes against oracles -------------------------------------------

class LayerKindTest : public ::testing::TestWithParam<LayerKind> {};

TEST_P(LayerKindTest, ForwardMatchesDirectLoopOracle) {
  Rng rng = make_rng(100 + static_cast<int>(GetParam()));
  for (int trial = 0; trial < 100; ++trial) {
    const RandomGeometry g = random_geometry(rng);
    const Layer layer = random_layer(GetParam(), g, rng);
    const Tensor in = random_tensor({g.t, g.y, g.x, g.cin}, rng);
    const Tensor got = forward(layer, in);
    const Tensor want = oracle_forward(layer, in);
    ASSERT_EQ(got.shape(), want.shape());
    ASSERT_LT(max_abs_difference(got, want), 1e-10) << "trial " << trial;
  }
}

TEST_P(LayerKindTest, BackwardMatchesFiniteDifferences) {
  Rng rng = make_rng(200 + static_cast<int>(GetParam()));
  const bool is_max = GetParam() == LayerKind::MaxPool;
  for (int trial = 0; trial < 20; ++trial) {
    RandomGeometry g = random_geometry(rng);
    g.t = std::min<std::size_t>(g.t, 5);
    g.y = std::min<std::size_t>(g.y, 5);
    g.x = std::min<std::size_t>(g.x, 5);
    Layer layer = random_layer(GetParam(), g, rng);
    Tensor in = is_max ? testing::distinct_tensor({g.t, g.y, g.x, g.cin}, rng)
                       : random_tensor({g.t, g.y, g.x, g.cin}, rng);
    const Tensor r = random_tensor(forward(layer, in).shape(), rng);
    const LayerGrads grads = backward(layer, in, r);
    auto loss = [&] { return dot(forward(layer, in), r); };

    EXPECT_LT(max_relative_error(grads.input, numeric_gradient(in, loss)), 1e-4)
        << "input, trial " << trial;
    const auto params = parameters(layer);
    const auto names = parameter_names(layer);
    ASSERT_EQ(params.size(), grads.params.size());
    for (std::size_t p = 0; p < params.size(); ++p) {
      EXPECT_LT(max_relative_error(grads.params[p], numeric_gradient(*params[p], loss)), 1e-4)
          << names[p] << ", trial " << trial;
    }
  }
}

TEST_P(LayerKindTest, ZeroUpstreamGradientGivesZeroGradients) {
  Rng rng = make_rng(300);
  const RandomGeometry g = random_geometry(rng);
  const Layer layer = random_layer(GetParam(), g, rng);
  const Tensor in = random_tensor({g.t, g.y, g.x, g.cin}, rng);
  const LayerGrads grads = backward(layer, in, Tensor(forward(layer, in).shape()));
  for (double v : grads.input.values()) EXPECT_EQ(v, 0.0);
  for (const Tensor& p : grads.params) {
    for (double v : p.values()) EXPECT_EQ(v, 0.0);
  }
}

TEST_P(LayerKindTest, DumpRoundTripsParameters) {
  Rng rng = make_rng(400);
  const RandomGeometry g = random_geometry(rng);
  const Layer layer = random_layer(GetParam(), g, rng);
  const Layer back = load_layer(dump_layer(layer));
  EXPECT_EQ(layer_kind_name(back), layer_kind_name(layer));
  const auto a = parameters(layer);
  const auto b = parameters(back);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(*a[i], *b[i]);
  const Tensor in = random_tensor({g.t, g.y, g.x, g.cin}, rng);
  EXPECT_EQ(forward(layer, in), forward(back, in));
}

INSTANTIATE_TEST_SUITE_P(AllKinds, LayerKindTest,
                         ::testing::Values(LayerKind::Conv3D, LayerKind::Conv2Plus1D,
                                           LayerKind::ConvITGM, LayerKind::Conv1x1x1,
                                           LayerKind::MaxPool, LayerKind::AvgPool),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(Conv3d, CenteredDeltaIsIdentity) {
  Rng rng = make_rng(1);
  Conv3d conv{Tensor({3, 3, 3, 2, 2}), Tensor({2}), 1};
  conv.weight.at({1, 1, 1, 0, 0}) = 1.0;
  conv.weight.at({1, 1, 1, 1, 1}) = 1.0;
  const Tensor in = random_tensor({4, 5, 3, 2}, rng);
  EXPECT_EQ(forward(conv, in), in);
}

TEST(Conv2Plus1d, IdentityTemporalTapReducesToSpatialConv) {
  Rng rng = make_rng(2);
  Conv2Plus1d conv{random_tensor({3, 3, 2, 3}, rng), Tensor({5, 3, 3}), Tensor({3}), 1};
  for (std::size_t c = 0; c < 3; ++c) conv.temporal.at({2, c, c}) = 1.0;
  const Tensor in = random_tensor({6, 4, 4, 2}, rng);
  const Tensor spatial_only =
      correlate(in, conv.spatial.values(), {1, 3, 3, 2, 3}, 1);
  EXPECT_LT(max_abs_difference(forward(conv, in), spatial_only), 1e-14);
}

TEST(ItgmConv, NarrowCenteredGaussianReducesToSpatialConv) {
  Rng rng = make_rng(3);
  ItgmConv conv{random_tensor({3, 3, 2, 3}, rng), make_tgm_params(3, 1, 3), Tensor({3}), 1};
  conv.tgm.sigma_hat[0] = -20.0;
  const Tensor in = random_tensor({5, 4, 4, 2}, rng);
  const Tensor spatial_only = correlate(in, conv.spatial.values(), {1, 3, 3, 2, 3}, 1);
  EXPECT_LT(max_abs_difference(forward(conv, in), spatial_only), 1e-6);
}

TEST(ItgmConv, PointIdentityWithUniformTapsIsMovingAverage) {
  Rng rng = make_rng(4);
  ItgmConv conv{Tensor({1, 1, 2, 2}), make_tgm_params(3, 1, 2), Tensor({2}), 1};
  conv.spatial.at({0, 0, 0, 0}) = 1.0;
  conv.spatial.at({0, 0, 1, 1}) = 1.0;
  conv.tgm.sigma_hat[0] = 40.0;  // variance e^40: flat taps
  const Tensor in = random_tensor({6, 2, 2, 2}, rng);
  const Tensor out = forward(conv, in);
  for (std::size_t t = 0; t < 6; ++t)
    for (std::size_t y = 0; y < 2; ++y)
      for (std::size_t x = 0; x < 2; ++x)
        for (std::size_t c = 0; c < 2; ++c) {
          double sum = 0.0;
          for (long dt = -1; dt <= 1; ++dt) {
            const long tt = static_cast<long>(t) + dt;
            if (tt >= 0 && tt < 6) sum += in.at({std::size_t(tt), y, x, c});
          }
          EXPECT_NEAR(out.at({t, y, x, c}), sum / 3.0, 1e-9);
        }
}

TEST(ItgmConv, ComposedFullKernelEqualsSeparableEvaluation) {
  Rng rng = make_rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t cin = 2, cout = 3;
    ItgmConv conv{random_tensor({3, 3, cin, cout}, rng), random_tgm(rng, 5, 2, 3),
                  Tensor({cout}), 1};
    const Tensor k = build_gaussian_mixture_kernel(conv.tgm);
    Tensor full({5, 3, 3, cin, cout});
    for (std::size_t l = 0; l < 5; ++l)
      for (std::size_t h = 0; h < 3; ++h)
        for (std::size_t w = 0; w < 3; ++w)
          for (std::size_t i = 0; i < cin; ++i)
            for (std::size_t o = 0; o < cout; ++o)
              full.at({l, h, w, i, o}) = k.at({o, l}) * conv.spatial.at({h, w, i, o});
    const Tensor in = random_tensor({5, 4, 4, cin}, rng);
    const Tensor composed = forward(Conv3d{full, Tensor({cout}), 1}, in);
    EXPECT_LT(max_abs_difference(forward(conv, in), composed), 1e-10);
  }
}

TEST(Pool, UnitWindowIsIdentity) {
  Rng rng = make_rng(6);
  const Tensor in = random_tensor({3, 4, 5, 2}, rng);
  EXPECT_EQ(forward(Pool{PoolKind::Max, 1, 1, 1, 1}, in), in);
  EXPECT_EQ(forward(Pool{PoolKind::Avg, 1, 1, 1, 1}, in), in);
}

TEST(Pool, AverageOfConstantIsConstant) {
  const Tensor in({5, 4, 4, 3}, 0.375);
  const Tensor out = forward(Pool{PoolKind::Avg, 5, 3, 3, 2}, in);
  for (double v : out.values()) EXPECT_DOUBLE_EQ(v, 0.375);
}

TEST(Pool, MaxGradientTiesGoToLowestFlatIndex) {
  const Tensor in({1, 1, 3, 1}, 2.0);
  const Tensor g({1, 1, 3, 1}, 1.0);
  const LayerGrads grads = backward(Pool{PoolKind::Max, 1, 1, 3, 1}, in, g);
  // Windows: x=0 covers {0,1}, x=1 covers {0,1,2}, x=2 covers {1,2}.
  EXPECT_EQ(grads.input[0], 2.0);
  EXPECT_EQ(grads.input[1], 1.0);
  EXPECT_EQ(grads.input[2], 0.0);
}

TEST(Pool, RejectsNonPositiveWindow) {
  const Tensor in({2, 2, 2, 1});
  EXPECT_THROW(forward(Pool{PoolKind::Max, 0, 3, 3, 1}, in), std::invalid_argument);
}

TEST(Layers, ChannelMismatchNamesDims) {
  Rng rng = make_rng(7);
  const Layer layer = make_layer({LayerKind::Conv3D, 3, 4}, 2, 1, kDefaultMixtures, rng);
  try {
    forward(layer, Tensor({3, 3, 3, 5}));
    FAIL() << "expected a shape error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("C=5"), std::string::npos) << e.what();
  }
  const Tensor in({3, 3, 3, 2});
  EXPECT_THROW(backward(layer, in, Tensor({3, 3, 3, 3})), std::invalid_argument);
}

// --- parameter counts -------------------------------------------------------------

TEST(ParamCount, FormulaExamples) {
  EXPECT_EQ(param_count({LayerKind::Conv3D, 3, 64}, 64, 64, 4), 110592);
  EXPECT_EQ(param_count({LayerKind::Conv2Plus1D, 3, 64}, 64, 64, 4), 36864 + 12288);
  EXPECT_EQ(param_count({LayerKind::ConvITGM, 3, 64}, 64, 64, 4), 37128);
  EXPECT_EQ(param_count({LayerKind::ConvITGM, 11, 64}, 64, 64, 4), 37128);
  EXPECT_EQ(param_count({LayerKind::Conv3D, 3, 8}, 4, 8, 4), 864);
  EXPECT_EQ(param_count({LayerKind::ConvITGM, 3, 8}, 4, 8, 4), 328);
  EXPECT_EQ(param_count({LayerKind::Conv1x1x1, 1, 8}, 4, 8, 4), 32);
  EXPECT_EQ(param_count({LayerKind::MaxPool, 5, 8}, 4, 8, 4), 0);
}

TEST(ParamCount, MatchesConstructedWeightTensors) {
  Rng rng = make_rng(9);
  const LayerKind kinds[] = {LayerKind::Conv3D, LayerKind::Conv2Plus1D, LayerKind::ConvITGM,
                             LayerKind::Conv1x1x1, LayerKind::MaxPool, LayerKind::AvgPool};
  for (int trial = 0; trial < 100; ++trial) {
    const LayerKind kind = kinds[trial % 6];
    const int len = kind == LayerKind::Conv1x1x1 ? 1 : 2 * uniform_int(rng, 0, 5) + 1;
    const int cin = uniform_int(rng, 1, 32), cout = uniform_int(rng, 1, 32);
    const int m = uniform_int(rng, 1, 6);
    const LayerSpec spec{kind, len, cout};
    EXPECT_EQ(weight_count(make_layer(spec, cin, 1, m, rng)), param_count(spec, cin, cout, m));
  }
}

// (2+1)D < 3D needs L * Cout < 9 * (L - 1) * Cin, so widths are drawn with
// Cout <= Cin; expanding layers (Cout >> Cin) can invert that pair.
TEST(ParamCount, ItgmIsLengthIndependentAndSmallest) {
  Rng rng = make_rng(10);
  for (int trial = 0; trial < 200; ++trial) {
    const int cout = uniform_int(rng, 2, 64);
    const int cin = uniform_int(rng, cout, 64);
    const int m = uniform_int(rng, 1, std::min(cout, 8));
    const auto base = param_count({LayerKind::ConvITGM, 1, cout}, cin, cout, m);
    for (int len : {3, 5, 7, 9, 11}) {
      const auto itgm = param_count({LayerKind::ConvITGM, len, cout}, cin, cout, m);
      EXPECT_EQ(itgm, base);
      EXPECT_LT(itgm, param_count({LayerKind::Conv2Plus1D, len, cout}, cin, cout, m));
      EXPECT_LT(param_count({LayerKind::Conv2Plus1D, len, cout}, cin, cout, m),
                param_count({LayerKind::Conv3D, len, cout}, cin, cout, m));
    }
  }
}

}  // namespace
}  // namespace evanet::kernels
