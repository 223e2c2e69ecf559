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

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

#include "evanet/json_io.hpp"
#include "evanet/kernels.hpp"

namespace evanet::kernels {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

KernelShape spatial_shape(const Tensor& spatial) {
  return {1, spatial.dim(0), spatial.dim(1), spatial.dim(2), spatial.dim(3)};
}

void add_bias(Tensor& out, const Tensor& bias) {
  const std::size_t c = bias.size();
  for (std::size_t i = 0; i < out.size(); i += c) {
    for (std::size_t j = 0; j < c; ++j) out[i + j] += bias[j];
  }
}

Tensor bias_grad(const Tensor& grad_out) {
  const std::size_t c = grad_out.dim(3);
  Tensor g({c});
  for (std::size_t i = 0; i < grad_out.size(); i += c) {
    for (std::size_t j = 0; j < c; ++j) g[j] += grad_out[i + j];
  }
  return g;
}

struct PoolGeometry {
  Axis t, y, x;
  std::size_t channels;
};

PoolGeometry pool_geometry(const Pool& pool, const Tensor& input) {
  if (pool.length < 1 || pool.height < 1 || pool.width < 1 || pool.spatial_stride < 1) {
    throw std::invalid_argument("pool: window and stride must be positive");
  }
  if (input.rank() != 4) {
    throw std::invalid_argument("pool: expected a T x Y x X x C tensor, got " +
                                input.shape_string());
  }
  const auto s = static_cast<std::size_t>(pool.spatial_stride);
  return {same_axis(input.dim(0), static_cast<std::size_t>(pool.length), 1),
          same_axis(input.dim(1), static_cast<std::size_t>(pool.height), s),
          same_axis(input.dim(2), static_cast<std::size_t>(pool.width), s), input.dim(3)};
}

// Visits the in-range window positions of output (t, y, x) in increasing
// flat input order.
template <typename Fn>
void for_window(const Pool& pool, const PoolGeometry& g, std::size_t t, std::size_t y,
                std::size_t x, Fn&& fn) {
  const auto s = static_cast<std::size_t>(pool.spatial_stride);
  for (std::size_t l = 0; l < static_cast<std::size_t>(pool.length); ++l) {
    const std::ptrdiff_t it =
        static_cast<std::ptrdiff_t>(t + l) - static_cast<std::ptrdiff_t>(g.t.pad_before);
    if (it < 0 || it >= static_cast<std::ptrdiff_t>(g.t.in)) continue;
    for (std::size_t h = 0; h < static_cast<std::size_t>(pool.height); ++h) {
      const std::ptrdiff_t iy =
          static_cast<std::ptrdiff_t>(y * s + h) - static_cast<std::ptrdiff_t>(g.y.pad_before);
      if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.y.in)) continue;
      for (std::size_t w = 0; w < static_cast<std::size_t>(pool.width); ++w) {
        const std::ptrdiff_t ix =
            static_cast<std::ptrdiff_t>(x * s + w) - static_cast<std::ptrdiff_t>(g.x.pad_before);
        if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.x.in)) continue;
        fn(((static_cast<std::size_t>(it) * g.y.in + static_cast<std::size_t>(iy)) * g.x.in +
            static_cast<std::size_t>(ix)) *
           g.channels);
      }
    }
  }
}

Tensor pool_forward(const Pool& pool, const Tensor& input) {
  const PoolGeometry g = pool_geometry(pool, input);
  const std::size_t c = g.channels;
  Tensor out({g.t.out, g.y.out, g.x.out, c});
  for (std::size_t t = 0; t < g.t.out; ++t) {
    for (std::size_t y = 0; y < g.y.out; ++y) {
      for (std::size_t x = 0; x < g.x.out; ++x) {
        double* o = out.data() + ((t * g.y.out + y) * g.x.out + x) * c;
        if (pool.kind == PoolKind::Max) {
          std::fill(o, o + c, -std::numeric_limits<double>::infinity());
          for_window(pool, g, t, y, x, [&](std::size_t off) {
            for (std::size_t j = 0; j < c; ++j) o[j] = std::max(o[j], input[off + j]);
          });
        } else {
          std::size_t count = 0;
          for_window(pool, g, t, y, x, [&](std::size_t off) {
            ++count;
            for (std::size_t j = 0; j < c; ++j) o[j] += input[off + j];
          });
          for (std::size_t j = 0; j < c; ++j) o[j] /= static_cast<double>(count);
        }
      }
    }
  }
  return out;
}

Tensor pool_backward(const Pool& pool, const Tensor& input, const Tensor& grad_out) {
  const PoolGeometry g = pool_geometry(pool, input);
  const std::size_t c = g.channels;
  if (grad_out.shape() != std::vector<std::size_t>{g.t.out, g.y.out, g.x.out, c}) {
    throw std::invalid_argument("pool backward: grad_out shape " + grad_out.shape_string() +
                                " does not match output");
  }
  Tensor grad_in(input.shape());
  std::vector<double> best(c);
  std::vector<std::size_t> arg(c);
  for (std::size_t t = 0; t < g.t.out; ++t) {
    for (std::size_t y = 0; y < g.y.out; ++y) {
      for (std::size_t x = 0; x < g.x.out; ++x) {
        const double* go = grad_out.data() + ((t * g.y.out + y) * g.x.out + x) * c;
        if (pool.kind == PoolKind::Max) {
          std::fill(best.begin(), best.end(), -std::numeric_limits<double>::infinity());
          std::fill(arg.begin(), arg.end(), std::numeric_limits<std::size_t>::max());
          for_window(pool, g, t, y, x, [&](std::size_t off) {
            for (std::size_t j = 0; j < c; ++j) {
              // Strict comparison keeps the lowest flat index among ties.
              if (input[off + j] > best[j] || arg[j] == std::numeric_limits<std::size_t>::max()) {
                best[j] = input[off + j];
                arg[j] = off + j;
              }
            }
          });
          for (std::size_t j = 0; j < c; ++j) grad_in[arg[j]] += go[j];
        } else {
          std::size_t count = 0;
          for_window(pool, g, t, y, x, [&](std::size_t) { ++count; });
          const double inv = 1.0 / static_cast<double>(count);
          for_window(pool, g, t, y, x, [&](std::size_t off) {
            for (std::size_t j = 0; j < c; ++j) grad_in[off + j] += go[j] * inv;
          });
        }
      }
    }
  }
  return grad_in;
}

double glorot_limit(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

Tensor glorot(std::vector<std::size_t> shape, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  Tensor t(std::move(shape));
  const double limit = glorot_limit(fan_in, fan_out);
  for (double& v : t.values()) v = uniform_real(rng, -limit, limit);
  return t;
}

}  // namespace

Tensor forward(const Layer& layer, const Tensor& input) {
  return std::visit(
      Overloaded{
          [&](const Conv3d& l) {
            const auto& s = l.weight.shape();
            Tensor out = correlate(input, l.weight.values(), {s[0], s[1], s[2], s[3], s[4]},
                                   l.stride);
            add_bias(out, l.bias);
            return out;
          },
          [&](const Conv2Plus1d& l) {
            const Tensor mid = correlate(input, l.spatial.values(), spatial_shape(l.spatial), l.stride);
            const auto& s = l.temporal.shape();
            Tensor out = correlate(mid, l.temporal.values(), {s[0], 1, 1, s[1], s[2]}, 1);
            add_bias(out, l.bias);
            return out;
          },
          [&](const ItgmConv& l) {
            const Tensor mid = correlate(input, l.spatial.values(), spatial_shape(l.spatial), l.stride);
            Tensor out = depthwise_temporal(mid, build_gaussian_mixture_kernel(l.tgm));
            add_bias(out, l.bias);
            return out;
          },
          [&](const PointwiseConv& l) {
            Tensor out = correlate(input, l.weight.values(),
                                   {1, 1, 1, l.weight.dim(0), l.weight.dim(1)}, 1);
            add_bias(out, l.bias);
            return out;
          },
          [&](const Pool& l) { return pool_forward(l, input); },
      },
      layer);
}

LayerGrads backward(const Layer& layer, const Tensor& input, const Tensor& grad_out) {
  return std::visit(
      Overloaded{
          [&](const Conv3d& l) {
            const auto& s = l.weight.shape();
            LayerGrads g{Tensor(input.shape()), {Tensor(s), bias_grad(grad_out)}};
            correlate_backward(input, l.weight.values(), {s[0], s[1], s[2], s[3], s[4]}, l.stride,
                               grad_out, &g.input, g.params[0].values());
            return g;
          },
          [&](const Conv2Plus1d& l) {
            const KernelShape ks = spatial_shape(l.spatial);
            const Tensor mid = correlate(input, l.spatial.values(), ks, l.stride);
            const auto& s = l.temporal.shape();
            LayerGrads g{Tensor(input.shape()),
                         {Tensor(l.spatial.shape()), Tensor(s), bias_grad(grad_out)}};
            Tensor grad_mid(mid.shape());
            correlate_backward(mid, l.temporal.values(), {s[0], 1, 1, s[1], s[2]}, 1, grad_out,
                               &grad_mid, g.params[1].values());
            correlate_backward(input, l.spatial.values(), ks, l.stride, grad_mid, &g.input,
                               g.params[0].values());
            return g;
          },
          [&](const ItgmConv& l) {
            const KernelShape ks = spatial_shape(l.spatial);
            const Tensor mid = correlate(input, l.spatial.values(), ks, l.stride);
            const Tensor taps = build_gaussian_mixture_kernel(l.tgm);
            Tensor grad_mid(mid.shape());
            Tensor grad_taps(taps.shape());
            depthwise_temporal_backward(mid, taps, grad_out, &grad_mid, &grad_taps);
            TGMGrads tg = gaussian_mixture_backward(l.tgm, grad_taps);
            LayerGrads g{Tensor(input.shape()),
                         {Tensor(l.spatial.shape()), std::move(tg.mu_hat), std::move(tg.sigma_hat),
                          std::move(tg.mixing), bias_grad(grad_out)}};
            correlate_backward(input, l.spatial.values(), ks, l.stride, grad_mid, &g.input,
                               g.params[0].values());
            return g;
          },
          [&](const PointwiseConv& l) {
            LayerGrads g{Tensor(input.shape()), {Tensor(l.weight.shape()), bias_grad(grad_out)}};
            correlate_backward(input, l.weight.values(), {1, 1, 1, l.weight.dim(0), l.weight.dim(1)},
                               1, grad_out, &g.input, g.params[0].values());
            return g;
          },
          [&](const Pool& l) { return LayerGrads{pool_backward(l, input, grad_out), {}}; },
      },
      layer);
}

std::vector<Tensor*> parameters(Layer& layer) {
  return std::visit(
      Overloaded{
          [](Conv3d& l) { return std::vector<Tensor*>{&l.weight, &l.bias}; },
          [](Conv2Plus1d& l) { return std::vector<Tensor*>{&l.spatial, &l.temporal, &l.bias}; },
          [](ItgmConv& l) {
            return std::vector<Tensor*>{&l.spatial, &l.tgm.mu_hat, &l.tgm.sigma_hat,
                                        &l.tgm.mixing, &l.bias};
          },
          [](PointwiseConv& l) { return std::vector<Tensor*>{&l.weight, &l.bias}; },
          [](Pool&) { return std::vector<Tensor*>{}; },
      },
      layer);
}

std::vector<const Tensor*> parameters(const Layer& layer) {
  auto mutable_params = parameters(const_cast<Layer&>(layer));
  return {mutable_params.begin(), mutable_params.end()};
}

std::vector<std::string> parameter_names(const Layer& layer) {
  return std::visit(
      Overloaded{
          [](const Conv3d&) { return std::vector<std::string>{"weight", "bias"}; },
          [](const Conv2Plus1d&) { return std::vector<std::string>{"spatial", "temporal", "bias"}; },
          [](const ItgmConv&) {
            return std::vector<std::string>{"spatial", "mu_hat", "sigma_hat", "mixing", "bias"};
          },
          [](const PointwiseConv&) { return std::vector<std::string>{"weight", "bias"}; },
          [](const Pool&) { return std::vector<std::string>{}; },
      },
      layer);
}

std::string_view layer_kind_name(const Layer& layer) {
  return std::visit(
      Overloaded{
          [](const Conv3d&) { return to_string(LayerKind::Conv3D); },
          [](const Conv2Plus1d&) { return to_string(LayerKind::Conv2Plus1D); },
          [](const ItgmConv&) { return to_string(LayerKind::ConvITGM); },
          [](const PointwiseConv&) { return to_string(LayerKind::Conv1x1x1); },
          [](const Pool& p) {
            return to_string(p.kind == PoolKind::Max ? LayerKind::MaxPool : LayerKind::AvgPool);
          },
      },
      layer);
}

PointwiseConv make_pointwise(int in_channels, int out_channels, Rng& rng) {
  const auto cin = static_cast<std::size_t>(in_channels);
  const auto cout = static_cast<std::size_t>(out_channels);
  return {glorot({cin, cout}, cin, cout, rng), Tensor({cout})};
}

Layer make_layer(const LayerSpec& spec, int in_channels, int spatial_stride, int mixtures,
                 Rng& rng) {
  const auto cin = static_cast<std::size_t>(in_channels);
  const auto cout = static_cast<std::size_t>(spec.out_channels);
  const auto len = static_cast<std::size_t>(spec.temporal_len);
  const std::size_t k = kSpatialKernel;
  switch (spec.kind) {
    case LayerKind::Conv3D:
      return Conv3d{glorot({len, k, k, cin, cout}, len * k * k * cin, len * k * k * cout, rng),
                    Tensor({cout}), spatial_stride};
    case LayerKind::Conv2Plus1D: {
      Tensor spatial = glorot({k, k, cin, cout}, k * k * cin, k * k * cout, rng);
      Tensor temporal = glorot({len, cout, cout}, len * cout, len * cout, rng);
      return Conv2Plus1d{std::move(spatial), std::move(temporal), Tensor({cout}), spatial_stride};
    }
    case LayerKind::ConvITGM:
      return ItgmConv{glorot({k, k, cin, cout}, k * k * cin, k * k * cout, rng),
                      make_tgm_params(spec.temporal_len, mixtures, spec.out_channels),
                      Tensor({cout}), spatial_stride};
    case LayerKind::Conv1x1x1:
      if (spatial_stride != 1) throw std::invalid_argument("conv1x1 does not support stride");
      return make_pointwise(in_channels, spec.out_channels, rng);
    case LayerKind::MaxPool:
    case LayerKind::AvgPool:
      return Pool{spec.kind == LayerKind::MaxPool ? PoolKind::Max : PoolKind::Avg,
                  spec.temporal_len, kSpatialKernel, kSpatialKernel, spatial_stride};
  }
  throw std::invalid_argument("unknown layer kind");
}

std::int64_t param_count(const LayerSpec& spec, int in_channels, int out_channels,
                         int mixtures) {
  const std::int64_t cin = in_channels;
  const std::int64_t cout = out_channels;
  const std::int64_t len = spec.temporal_len;
  const std::int64_t hw = kSpatialKernel * kSpatialKernel;
  switch (spec.kind) {
    case LayerKind::Conv3D:
      return len * hw * cin * cout;
    case LayerKind::Conv2Plus1D:
      return hw * cin * cout + len * cout * cout;
    case LayerKind::ConvITGM:
      return hw * cin * cout + 2 * mixtures + mixtures * cout;
    case LayerKind::Conv1x1x1:
      return cin * cout;
    case LayerKind::MaxPool:
    case LayerKind::AvgPool:
      return 0;
  }
  return 0;
}

std::int64_t weight_count(const Layer& layer) {
  const auto params = parameters(layer);
  std::int64_t total = 0;
  for (std::size_t i = 0; i + 1 < params.size(); ++i) {
    total += static_cast<std::int64_t>(params[i]->size());
  }
  return total;
}

// --- dump format -------------------------------------------------------------

namespace {

void append_le(std::string& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>(bits & 0xFF));
    bits >>= 8;
  }
}

double read_le(const char* p) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) {
    bits = (bits << 8) | static_cast<unsigned char>(p[i]);
  }
  return std::bit_cast<double>(bits);
}

std::vector<std::size_t> shape_from_json(const Json& j) {
  std::vector<std::size_t> shape;
  for (const auto& d : j) shape.push_back(d.get<std::size_t>());
  return shape;
}

}  // namespace

std::string dump_layer(const Layer& layer) {
  Json header;
  header["kind"] = layer_kind_name(layer);
  const auto params = parameters(layer);
  const auto names = parameter_names(layer);
  if (const auto* pool = std::get_if<Pool>(&layer)) {
    header["shape"] = {pool->length, pool->height, pool->width};
    header["stride"] = pool->spatial_stride;
  } else {
    header["shape"] = params.front()->shape();
    header["stride"] = std::visit(
        Overloaded{[](const Conv3d& l) { return l.stride; },
                   [](const Conv2Plus1d& l) { return l.stride; },
                   [](const ItgmConv& l) { return l.stride; }, [](const auto&) { return 1; }},
        layer);
  }
  header["tensors"] = Json::array();
  for (std::size_t i = 0; i < params.size(); ++i) {
    header["tensors"].push_back({{"name", names[i]}, {"shape", params[i]->shape()}});
  }
  if (const auto* itgm = std::get_if<ItgmConv>(&layer)) {
    Json tgm;
    tgm["M"] = itgm->tgm.mixtures();
    tgm["L"] = itgm->tgm.length;
    tgm["mu_hat"] = std::vector<double>(itgm->tgm.mu_hat.values().begin(),
                                        itgm->tgm.mu_hat.values().end());
    tgm["sigma_hat"] = std::vector<double>(itgm->tgm.sigma_hat.values().begin(),
                                           itgm->tgm.sigma_hat.values().end());
    header["tgm"] = std::move(tgm);
  }
  std::string out = header.dump() + "\n";
  for (const Tensor* t : params) {
    for (double v : t->values()) append_le(out, v);
  }
  return out;
}

Layer load_layer(std::string_view blob) {
  const std::size_t newline = blob.find('\n');
  if (newline == std::string_view::npos) throw std::runtime_error("layer dump: missing header");
  Json header;
  try {
    header = Json::parse(blob.substr(0, newline));
  } catch (const Json::parse_error& e) {
    throw std::runtime_error(std::string("layer dump: bad header: ") + e.what());
  }
  const std::string kind_text = header.at("kind").get<std::string>();
  const auto kind = parse_layer_kind(kind_text);
  if (!kind) throw std::runtime_error("layer dump: unknown kind " + kind_text);
  const int stride = header.at("stride").get<int>();

  Layer layer;
  const auto shape = shape_from_json(header.at("shape"));
  switch (*kind) {
    case LayerKind::Conv3D:
      layer = Conv3d{Tensor(shape), Tensor({shape.at(4)}), stride};
      break;
    case LayerKind::Conv2Plus1D: {
      const auto tensors = header.at("tensors");
      layer = Conv2Plus1d{Tensor(shape), Tensor(shape_from_json(tensors.at(1).at("shape"))),
                          Tensor({shape.at(3)}), stride};
      break;
    }
    case LayerKind::ConvITGM: {
      const Json& tgm = header.at("tgm");
      const int m = tgm.at("M").get<int>();
      layer = ItgmConv{Tensor(shape), make_tgm_params(tgm.at("L").get<int>(), m,
                                                      static_cast<int>(shape.at(3))),
                       Tensor({shape.at(3)}), stride};
      break;
    }
    case LayerKind::Conv1x1x1:
      layer = PointwiseConv{Tensor(shape), Tensor({shape.at(1)})};
      break;
    case LayerKind::MaxPool:
    case LayerKind::AvgPool:
      layer = Pool{*kind == LayerKind::MaxPool ? PoolKind::Max : PoolKind::Avg,
                   static_cast<int>(shape.at(0)), static_cast<int>(shape.at(1)),
                   static_cast<int>(shape.at(2)), stride};
      break;
  }

  const char* p = blob.data() + newline + 1;
  const char* end = blob.data() + blob.size();
  for (Tensor* t : parameters(layer)) {
    if (static_cast<std::size_t>(end - p) < t->size() * 8) {
      throw std::runtime_error("layer dump: truncated weight data");
    }
    for (double& v : t->values()) {
      v = read_le(p);
      p += 8;
    }
  }
  if (p != end) throw std::runtime_error("layer dump: trailing bytes");
  return layer;
}

}  // namespace evanet::kernels
