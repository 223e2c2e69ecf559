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

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "evanet/kernels.hpp"

namespace evanet::kernels {
namespace {

constexpr double kMinNormalizer = 1e-30;

void require_feature_map(const Tensor& t, std::size_t channels, const char* what) {
  if (t.rank() != 4) {
    throw std::invalid_argument(std::string(what) + ": expected a T x Y x X x C tensor, got " +
                                t.shape_string());
  }
  if (t.dim(3) != channels) {
    throw std::invalid_argument(std::string(what) + ": channel mismatch, input C=" +
                                std::to_string(t.dim(3)) + " but layer expects " +
                                std::to_string(channels));
  }
}

}  // namespace

Axis same_axis(std::size_t in, std::size_t kernel, std::size_t stride) {
  Axis axis;
  axis.in = in;
  axis.out = (in + stride - 1) / stride;
  const std::size_t span = (axis.out - 1) * stride + kernel;
  axis.pad_before = span > in ? (span - in) / 2 : 0;
  return axis;
}

Tensor correlate(const Tensor& input, std::span<const double> weight,
                 const KernelShape& k, int spatial_stride) {
  require_feature_map(input, k.in_channels, "correlate");
  if (weight.size() != k.volume()) {
    throw std::invalid_argument("correlate: weight size does not match kernel shape");
  }
  const std::size_t s = static_cast<std::size_t>(spatial_stride);
  const Axis at = same_axis(input.dim(0), k.length, 1);
  const Axis ay = same_axis(input.dim(1), k.height, s);
  const Axis ax = same_axis(input.dim(2), k.width, s);
  const std::size_t cin = k.in_channels;
  const std::size_t cout = k.out_channels;

  Tensor out({at.out, ay.out, ax.out, cout});
  const double* in = input.data();
  double* o = out.data();
  for (std::size_t t = 0; t < at.out; ++t) {
    for (std::size_t y = 0; y < ay.out; ++y) {
      for (std::size_t x = 0; x < ax.out; ++x) {
        double* acc = o + ((t * ay.out + y) * ax.out + x) * cout;
        for (std::size_t l = 0; l < k.length; ++l) {
          const std::ptrdiff_t it = static_cast<std::ptrdiff_t>(t + l) -
                                    static_cast<std::ptrdiff_t>(at.pad_before);
          if (it < 0 || it >= static_cast<std::ptrdiff_t>(at.in)) continue;
          for (std::size_t h = 0; h < k.height; ++h) {
            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y * s + h) -
                                      static_cast<std::ptrdiff_t>(ay.pad_before);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(ay.in)) continue;
            for (std::size_t w = 0; w < k.width; ++w) {
              const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(x * s + w) -
                                        static_cast<std::ptrdiff_t>(ax.pad_before);
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(ax.in)) continue;
              const double* src =
                  in + ((static_cast<std::size_t>(it) * ay.in + static_cast<std::size_t>(iy)) *
                            ax.in +
                        static_cast<std::size_t>(ix)) *
                           cin;
              const double* wk = weight.data() + ((l * k.height + h) * k.width + w) * cin * cout;
              for (std::size_t i = 0; i < cin; ++i) {
                const double v = src[i];
                const double* wrow = wk + i * cout;
                for (std::size_t c = 0; c < cout; ++c) acc[c] += v * wrow[c];
              }
            }
          }
        }
      }
    }
  }
  return out;
}

void correlate_backward(const Tensor& input, std::span<const double> weight,
                        const KernelShape& k, int spatial_stride,
                        const Tensor& grad_out, Tensor* grad_input,
                        std::span<double> grad_weight) {
  require_feature_map(input, k.in_channels, "correlate_backward");
  const std::size_t s = static_cast<std::size_t>(spatial_stride);
  const Axis at = same_axis(input.dim(0), k.length, 1);
  const Axis ay = same_axis(input.dim(1), k.height, s);
  const Axis ax = same_axis(input.dim(2), k.width, s);
  const std::size_t cin = k.in_channels;
  const std::size_t cout = k.out_channels;
  if (grad_out.shape() != std::vector<std::size_t>{at.out, ay.out, ax.out, cout}) {
    throw std::invalid_argument("correlate_backward: grad_out shape " +
                                grad_out.shape_string() + " does not match output");
  }
  if (grad_weight.size() != k.volume()) {
    throw std::invalid_argument("correlate_backward: grad_weight size mismatch");
  }
  if (grad_input && !grad_input->same_shape(input)) *grad_input = Tensor(input.shape());

  const double* in = input.data();
  const double* g = grad_out.data();
  double* gin = grad_input ? grad_input->data() : nullptr;
  for (std::size_t t = 0; t < at.out; ++t) {
    for (std::size_t y = 0; y < ay.out; ++y) {
      for (std::size_t x = 0; x < ax.out; ++x) {
        const double* go = g + ((t * ay.out + y) * ax.out + x) * cout;
        for (std::size_t l = 0; l < k.length; ++l) {
          const std::ptrdiff_t it = static_cast<std::ptrdiff_t>(t + l) -
                                    static_cast<std::ptrdiff_t>(at.pad_before);
          if (it < 0 || it >= static_cast<std::ptrdiff_t>(at.in)) continue;
          for (std::size_t h = 0; h < k.height; ++h) {
            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y * s + h) -
                                      static_cast<std::ptrdiff_t>(ay.pad_before);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(ay.in)) continue;
            for (std::size_t w = 0; w < k.width; ++w) {
              const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(x * s + w) -
                                        static_cast<std::ptrdiff_t>(ax.pad_before);
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(ax.in)) continue;
              const std::size_t src_off =
                  ((static_cast<std::size_t>(it) * ay.in + static_cast<std::size_t>(iy)) *
                       ax.in +
                   static_cast<std::size_t>(ix)) *
                  cin;
              const std::size_t w_off = ((l * k.height + h) * k.width + w) * cin * cout;
              const double* src = in + src_off;
              const double* wk = weight.data() + w_off;
              double* gw = grad_weight.data() + w_off;
              for (std::size_t i = 0; i < cin; ++i) {
                const double v = src[i];
                const double* wrow = wk + i * cout;
                double* gwrow = gw + i * cout;
                double sum = 0.0;
                for (std::size_t c = 0; c < cout; ++c) {
                  gwrow[c] += v * go[c];
                  sum += wrow[c] * go[c];
                }
                if (gin) gin[src_off + i] += sum;
              }
            }
          }
        }
      }
    }
  }
}

Tensor depthwise_temporal(const Tensor& input, const Tensor& taps) {
  if (taps.rank() != 2) throw std::invalid_argument("depthwise_temporal: taps must be C x L");
  const std::size_t channels = taps.dim(0);
  const std::size_t len = taps.dim(1);
  require_feature_map(input, channels, "depthwise_temporal");
  const Axis at = same_axis(input.dim(0), len, 1);
  const std::size_t plane = input.dim(1) * input.dim(2);

  Tensor out(input.shape());
  for (std::size_t t = 0; t < at.out; ++t) {
    double* o = out.data() + t * plane * channels;
    for (std::size_t l = 0; l < len; ++l) {
      const std::ptrdiff_t it =
          static_cast<std::ptrdiff_t>(t + l) - static_cast<std::ptrdiff_t>(at.pad_before);
      if (it < 0 || it >= static_cast<std::ptrdiff_t>(at.in)) continue;
      const double* src = input.data() + static_cast<std::size_t>(it) * plane * channels;
      for (std::size_t p = 0; p < plane; ++p) {
        for (std::size_t c = 0; c < channels; ++c) {
          o[p * channels + c] += taps[c * len + l] * src[p * channels + c];
        }
      }
    }
  }
  return out;
}

void depthwise_temporal_backward(const Tensor& input, const Tensor& taps,
                                 const Tensor& grad_out, Tensor* grad_input,
                                 Tensor* grad_taps) {
  const std::size_t channels = taps.dim(0);
  const std::size_t len = taps.dim(1);
  require_feature_map(input, channels, "depthwise_temporal_backward");
  if (!grad_out.same_shape(input)) {
    throw std::invalid_argument("depthwise_temporal_backward: grad_out shape mismatch");
  }
  const Axis at = same_axis(input.dim(0), len, 1);
  const std::size_t plane = input.dim(1) * input.dim(2);
  if (grad_input && !grad_input->same_shape(input)) *grad_input = Tensor(input.shape());
  if (grad_taps && !grad_taps->same_shape(taps)) *grad_taps = Tensor(taps.shape());

  for (std::size_t t = 0; t < at.out; ++t) {
    const double* go = grad_out.data() + t * plane * channels;
    for (std::size_t l = 0; l < len; ++l) {
      const std::ptrdiff_t it =
          static_cast<std::ptrdiff_t>(t + l) - static_cast<std::ptrdiff_t>(at.pad_before);
      if (it < 0 || it >= static_cast<std::ptrdiff_t>(at.in)) continue;
      const std::size_t off = static_cast<std::size_t>(it) * plane * channels;
      const double* src = input.data() + off;
      for (std::size_t p = 0; p < plane; ++p) {
        for (std::size_t c = 0; c < channels; ++c) {
          const double gv = go[p * channels + c];
          if (grad_taps) (*grad_taps)[c * len + l] += gv * src[p * channels + c];
          if (grad_input) (*grad_input)[off + p * channels + c] += gv * taps[c * len + l];
        }
      }
    }
  }
}

// --- temporal Gaussian mixture -------------------------------------------

void TGMParams::check() const {
  if (length < 1) throw std::invalid_argument("tgm: length must be positive");
  const std::size_t m = mu_hat.size();
  if (m == 0) throw std::invalid_argument("tgm: at least one mixture component required");
  if (sigma_hat.size() != m) throw std::invalid_argument("tgm: sigma_hat length differs from mu_hat");
  if (mixing.rank() != 2 || mixing.dim(1) != m) {
    throw std::invalid_argument("tgm: mixing must be Cout x M, got " + mixing.shape_string());
  }
  if (!mu_hat.all_finite() || !sigma_hat.all_finite() || !mixing.all_finite()) {
    throw std::invalid_argument("tgm: non-finite parameters");
  }
}

TGMParams make_tgm_params(int length, int mixtures, int out_channels) {
  if (mixtures < 1 || out_channels < 1) {
    throw std::invalid_argument("tgm: mixtures and out_channels must be positive");
  }
  TGMParams tgm;
  tgm.length = length;
  const auto m = static_cast<std::size_t>(mixtures);
  tgm.mu_hat = Tensor({m});
  tgm.sigma_hat = Tensor({m});
  tgm.mixing = Tensor({static_cast<std::size_t>(out_channels), m});
  for (std::size_t i = 0; i < m; ++i) {
    tgm.mu_hat[i] = m == 1 ? 0.0 : -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(m - 1);
  }
  return tgm;
}

std::vector<double> tgm_centers(const TGMParams& tgm) {
  std::vector<double> mu(tgm.mixtures());
  const double half = 0.5 * (tgm.length - 1);
  for (std::size_t m = 0; m < mu.size(); ++m) mu[m] = half * (std::tanh(tgm.mu_hat[m]) + 1.0);
  return mu;
}

std::vector<double> tgm_widths(const TGMParams& tgm) {
  std::vector<double> sigma(tgm.mixtures());
  for (std::size_t m = 0; m < sigma.size(); ++m) sigma[m] = std::exp(0.5 * tgm.sigma_hat[m]);
  return sigma;
}

Tensor gaussian_components(const TGMParams& tgm) {
  tgm.check();
  const std::size_t mcount = tgm.mixtures();
  const auto len = static_cast<std::size_t>(tgm.length);
  const auto mu = tgm_centers(tgm);
  Tensor comp({mcount, len});
  std::vector<double> e(len);
  for (std::size_t m = 0; m < mcount; ++m) {
    const double var = std::exp(tgm.sigma_hat[m]);
    double emax = -std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < len; ++l) {
      const double d = static_cast<double>(l) - mu[m];
      e[l] = -d * d / (2.0 * var);
      emax = std::max(emax, e[l]);
    }
    double z = 0.0;
    for (std::size_t l = 0; l < len; ++l) {
      e[l] = std::exp(e[l] - emax);
      z += e[l];
    }
    z = std::max(z, kMinNormalizer);
    for (std::size_t l = 0; l < len; ++l) comp[m * len + l] = e[l] / z;
  }
  return comp;
}

namespace {

// Row-wise softmax of the Cout x M mixing logits.
Tensor mixing_weights(const TGMParams& tgm) {
  const std::size_t rows = tgm.out_channels();
  const std::size_t mcount = tgm.mixtures();
  Tensor p(tgm.mixing.shape());
  for (std::size_t i = 0; i < rows; ++i) {
    const double* a = tgm.mixing.data() + i * mcount;
    const double amax = *std::max_element(a, a + mcount);
    double z = 0.0;
    for (std::size_t m = 0; m < mcount; ++m) {
      p[i * mcount + m] = std::exp(a[m] - amax);
      z += p[i * mcount + m];
    }
    for (std::size_t m = 0; m < mcount; ++m) p[i * mcount + m] /= z;
  }
  return p;
}

}  // namespace

Tensor build_gaussian_mixture_kernel(const TGMParams& tgm) {
  const Tensor comp = gaussian_components(tgm);
  const Tensor p = mixing_weights(tgm);
  const std::size_t rows = tgm.out_channels();
  const std::size_t mcount = tgm.mixtures();
  const auto len = static_cast<std::size_t>(tgm.length);
  Tensor kernel({rows, len});
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t m = 0; m < mcount; ++m) {
      const double w = p[i * mcount + m];
      for (std::size_t l = 0; l < len; ++l) kernel[i * len + l] += w * comp[m * len + l];
    }
  }
  return kernel;
}

TGMGrads gaussian_mixture_backward(const TGMParams& tgm, const Tensor& grad_kernel) {
  const Tensor comp = gaussian_components(tgm);
  const Tensor p = mixing_weights(tgm);
  const std::size_t rows = tgm.out_channels();
  const std::size_t mcount = tgm.mixtures();
  const auto len = static_cast<std::size_t>(tgm.length);
  if (grad_kernel.shape() != std::vector<std::size_t>{rows, len}) {
    throw std::invalid_argument("tgm backward: grad_kernel must be Cout x L");
  }

  TGMGrads grads{Tensor({mcount}), Tensor({mcount}), Tensor(tgm.mixing.shape())};

  // Through the softmax mixing.
  for (std::size_t i = 0; i < rows; ++i) {
    std::vector<double> dp(mcount, 0.0);
    double weighted = 0.0;
    for (std::size_t m = 0; m < mcount; ++m) {
      for (std::size_t l = 0; l < len; ++l) dp[m] += grad_kernel[i * len + l] * comp[m * len + l];
      weighted += p[i * mcount + m] * dp[m];
    }
    for (std::size_t m = 0; m < mcount; ++m) {
      grads.mixing[i * mcount + m] = p[i * mcount + m] * (dp[m] - weighted);
    }
  }

  // Through the normalized Gaussians.
  const auto mu = tgm_centers(tgm);
  const double half = 0.5 * (tgm.length - 1);
  for (std::size_t m = 0; m < mcount; ++m) {
    std::vector<double> g(len, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t l = 0; l < len; ++l) g[l] += grad_kernel[i * len + l] * p[i * mcount + m];
    }
    double mean_g = 0.0;
    for (std::size_t l = 0; l < len; ++l) mean_g += comp[m * len + l] * g[l];
    const double var = std::exp(tgm.sigma_hat[m]);
    double d_mu = 0.0;
    double d_sigma_hat = 0.0;
    for (std::size_t l = 0; l < len; ++l) {
      const double k = comp[m * len + l];
      if (k == 0.0) continue;
      const double de = k * (g[l] - mean_g);  // dLoss / d exponent_l
      const double d = static_cast<double>(l) - mu[m];
      d_mu += de * d / var;
      d_sigma_hat += de * d * d / (2.0 * var);
    }
    const double th = std::tanh(tgm.mu_hat[m]);
    grads.mu_hat[m] = d_mu * half * (1.0 - th * th);
    grads.sigma_hat[m] = d_sigma_hat;
  }
  return grads;
}

TGMParams stretch_itgm(const TGMParams& tgm, int new_length) {
  tgm.check();
  if (tgm.length <= 1) {
    throw std::invalid_argument("stretch: source length 1 has no center ratio");
  }
  if (new_length < tgm.length || new_length % 2 == 0) {
    throw std::invalid_argument("stretch: new length must be odd and >= " +
                                std::to_string(tgm.length));
  }
  const double ratio = static_cast<double>(new_length - 1) / static_cast<double>(tgm.length - 1);
  TGMParams out = tgm;
  out.length = new_length;
  // mu / (L - 1) depends on mu_hat alone, so only the variance moves.
  const double shift = 2.0 * std::log(ratio);
  for (std::size_t m = 0; m < out.mixtures(); ++m) out.sigma_hat[m] += shift;
  return out;
}

}  // namespace evanet::kernels
