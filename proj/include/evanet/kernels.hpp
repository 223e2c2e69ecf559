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

#ifndef EVANET_KERNELS_HPP_
#define EVANET_KERNELS_HPP_

// Numerical core: SAME-padded cross-correlation (temporal stride 1, spatial
// stride 1 or 2), depthwise temporal filtering, space-time pooling, the
// inflated temporal Gaussian mixture (iTGM) kernel and analytic gradients of
// all of them. Feature maps are single examples laid out T x Y x X x C.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "evanet/genome.hpp"
#include "evanet/random.hpp"
#include "evanet/tensor.hpp"

namespace evanet::kernels {

struct KernelShape {
  std::size_t length = 1;
  std::size_t height = 1;
  std::size_t width = 1;
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;

  std::size_t volume() const {
    return length * height * width * in_channels * out_channels;
  }
};

// SAME geometry along one axis.
struct Axis {
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t pad_before = 0;
};
Axis same_axis(std::size_t in, std::size_t kernel, std::size_t stride);

// out[t,y,x,o] = sum_{l,h,w,i} in[t+l-pt, y*s+h-py, x*s+w-px, i] * w[l,h,w,i,o]
// with zeros outside the input.
Tensor correlate(const Tensor& input, std::span<const double> weight,
                 const KernelShape& shape, int spatial_stride);

// Accumulates into grad_input (may be null) and grad_weight.
void correlate_backward(const Tensor& input, std::span<const double> weight,
                        const KernelShape& shape, int spatial_stride,
                        const Tensor& grad_out, Tensor* grad_input,
                        std::span<double> grad_weight);

// out[t,y,x,c] = sum_l taps[c,l] * in[t+l-p, y, x, c].
Tensor depthwise_temporal(const Tensor& input, const Tensor& taps);
void depthwise_temporal_backward(const Tensor& input, const Tensor& taps,
                                 const Tensor& grad_out, Tensor* grad_input,
                                 Tensor* grad_taps);

// --- temporal Gaussian mixture -------------------------------------------

// mu_hat[M], sigma_hat[M], mixing[Cout, M]. Centers are
// mu = (L-1)/2 * (tanh(mu_hat) + 1) in [0, L-1], variances exp(sigma_hat).
struct TGMParams {
  Tensor mu_hat;
  Tensor sigma_hat;
  Tensor mixing;
  int length = 1;

  std::size_t mixtures() const { return mu_hat.size(); }
  std::size_t out_channels() const { return mixing.rank() == 2 ? mixing.dim(0) : 0; }
  // Throws std::invalid_argument on inconsistent shapes or non-finite values.
  void check() const;
};

// Centers spread evenly over mu_hat in [-1, 1], unit variances, uniform mixing.
TGMParams make_tgm_params(int length, int mixtures, int out_channels);

std::vector<double> tgm_centers(const TGMParams& tgm);
std::vector<double> tgm_widths(const TGMParams& tgm);

// Normalized Gaussian rows, M x L.
Tensor gaussian_components(const TGMParams& tgm);
// Softmax(mixing)-weighted sum of the components, Cout x L. Rows sum to 1.
Tensor build_gaussian_mixture_kernel(const TGMParams& tgm);

struct TGMGrads {
  Tensor mu_hat;
  Tensor sigma_hat;
  Tensor mixing;
};
TGMGrads gaussian_mixture_backward(const TGMParams& tgm, const Tensor& grad_kernel);

// Re-instantiates the mixture at a longer temporal length: centers and widths
// scale by (new_length - 1) / (length - 1), mixing weights are unchanged.
TGMParams stretch_itgm(const TGMParams& tgm, int new_length);

// --- layers ----------------------------------------------------------------

struct Conv3d {
  Tensor weight;  // L x H x W x Cin x Cout
  Tensor bias;    // Cout
  int stride = 1;
};

struct Conv2Plus1d {
  Tensor spatial;   // H x W x Cin x Cout
  Tensor temporal;  // L x Cout x Cout
  Tensor bias;      // Cout
  int stride = 1;
};

struct ItgmConv {
  Tensor spatial;  // H x W x Cin x Cout
  TGMParams tgm;
  Tensor bias;  // Cout
  int stride = 1;
};

struct PointwiseConv {
  Tensor weight;  // Cin x Cout
  Tensor bias;    // Cout
};

enum class PoolKind { Max, Avg };

struct Pool {
  PoolKind kind = PoolKind::Max;
  int length = 1;
  int height = 3;
  int width = 3;
  int spatial_stride = 1;
};

using Layer = std::variant<Conv3d, Conv2Plus1d, ItgmConv, PointwiseConv, Pool>;

// Throws std::invalid_argument when the input channel count or rank does not
// match the layer.
Tensor forward(const Layer& layer, const Tensor& input);

struct LayerGrads {
  Tensor input;
  std::vector<Tensor> params;  // aligned with parameters(layer)
};
LayerGrads backward(const Layer& layer, const Tensor& input, const Tensor& grad_out);

// Learnable tensors in a fixed order:
//   Conv3d: weight, bias
//   Conv2Plus1d: spatial, temporal, bias
//   ItgmConv: spatial, mu_hat, sigma_hat, mixing, bias
//   PointwiseConv: weight, bias
//   Pool: none
std::vector<Tensor*> parameters(Layer& layer);
std::vector<const Tensor*> parameters(const Layer& layer);
std::vector<std::string> parameter_names(const Layer& layer);

std::string_view layer_kind_name(const Layer& layer);

// Glorot-uniform weights, zero bias, default mixture parameters.
Layer make_layer(const LayerSpec& spec, int in_channels, int spatial_stride,
                 int mixtures, Rng& rng);
PointwiseConv make_pointwise(int in_channels, int out_channels, Rng& rng);

// Weight count excluding bias. Spatial extent is 3x3 for space-time kinds.
std::int64_t param_count(const LayerSpec& spec, int in_channels, int out_channels,
                         int mixtures);
// Stored weights of a concrete layer, excluding bias.
std::int64_t weight_count(const Layer& layer);

// One JSON header line ({"kind", "shape", "stride", "tensors", "tgm"?}) then
// every parameter tensor as 64-bit little-endian reals in parameters() order.
std::string dump_layer(const Layer& layer);
Layer load_layer(std::string_view blob);

}  // namespace evanet::kernels

#endif  // EVANET_KERNELS_HPP_
