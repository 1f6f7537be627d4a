#include "potacc/qmm.hpp"

#include <algorithm>
#include <cmath>

#include "potacc/parallel.hpp"
#include "potacc/shift_pe.hpp"

namespace potacc {

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::Conv2D: return "conv2d";
    case LayerKind::FullyConnected: return "fully_connected";
    case LayerKind::CpuOther: return "cpu";
  }
  return "?";
}

std::string to_string(PaddingMode p) {
  return p == PaddingMode::Same ? "same" : "valid";
}

std::string to_string(WeightStage s) {
  return s == WeightStage::Int8 ? "int8" : "pot_int_e";
}

ConvGeometry conv_geometry(int in_h, int in_w, int kernel_h, int kernel_w,
                           int stride, PaddingMode padding) {
  ConvGeometry g{};
  if (padding == PaddingMode::Same) {
    g.out_h = (in_h + stride - 1) / stride;
    g.out_w = (in_w + stride - 1) / stride;
    int pad_h = std::max((g.out_h - 1) * stride + kernel_h - in_h, 0);
    int pad_w = std::max((g.out_w - 1) * stride + kernel_w - in_w, 0);
    g.pad_top = pad_h / 2;
    g.pad_left = pad_w / 2;
  } else {
    g.out_h = (in_h - kernel_h) / stride + 1;
    g.out_w = (in_w - kernel_w) / stride + 1;
    g.pad_top = 0;
    g.pad_left = 0;
  }
  return g;
}

Int8Tensor im2col(const Int8Tensor &activations, const LayerSpec &layer) {
  if (layer.kind != LayerKind::Conv2D)
    throw ShapeMismatch("im2col is only defined for conv2d layers");
  if (activations.shape.size() != 4)
    throw ShapeMismatch("conv activations must be NHWC, got rank " +
                        std::to_string(activations.shape.size()));
  const int n = activations.shape[0], h = activations.shape[1],
            w = activations.shape[2], c = activations.shape[3];
  if (c != layer.in_channels)
    throw ShapeMismatch("activation channels " + std::to_string(c) +
                        " != layer in_channels " +
                        std::to_string(layer.in_channels));
  const ConvGeometry g = conv_geometry(h, w, layer.kernel_h, layer.kernel_w,
                                       layer.stride, layer.padding);
  if (g.out_h <= 0 || g.out_w <= 0)
    throw ShapeMismatch("kernel does not fit the input under valid padding");
  const int k = layer.dot_length();
  const std::int8_t pad_value =
      static_cast<std::int8_t>(layer.quant.activation_zero_point);

  Int8Tensor out({n * g.out_h * g.out_w, k});
  std::int64_t row = 0;
  for (int img = 0; img < n; ++img)
    for (int oy = 0; oy < g.out_h; ++oy)
      for (int ox = 0; ox < g.out_w; ++ox, ++row) {
        std::int8_t *dst = &out[row * k];
        for (int ky = 0; ky < layer.kernel_h; ++ky) {
          const int iy = oy * layer.stride + ky - g.pad_top;
          for (int kx = 0; kx < layer.kernel_w; ++kx) {
            const int ix = ox * layer.stride + kx - g.pad_left;
            if (iy < 0 || iy >= h || ix < 0 || ix >= w) {
              for (int ch = 0; ch < c; ++ch) *dst++ = pad_value;
            } else {
              const std::int8_t *src =
                  &activations[((std::int64_t{img} * h + iy) * w + ix) * c];
              for (int ch = 0; ch < c; ++ch) *dst++ = src[ch];
            }
          }
        }
      }
  return out;
}

namespace {

std::int32_t checked_add(std::int32_t acc, std::int64_t v) {
  std::int64_t r = acc + v;
  if (r < INT32_MIN || r > INT32_MAX)
    throw AccumulatorOverflow("32-bit accumulator exceeded: " +
                              std::to_string(r));
  return static_cast<std::int32_t>(r);
}

std::int8_t requantize(double multiplier, std::int32_t acc, int zero_point) {
  long long q = std::llrint(multiplier * acc) + zero_point;
  q = std::clamp(q, -128LL, 127LL);
  return static_cast<std::int8_t>(q);
}

// Per-filter constants shared by both engines: the folded offset
// q_b - Z_A * rowsum and the requantization multiplier.
struct FilterFold {
  std::int32_t offset;
  double multiplier;
};

template <typename W>
std::vector<FilterFold> fold_filters(const W *weights, int filters, int dot,
                                     const QuantParams &params,
                                     const Int32Tensor &bias) {
  if (bias.size() != 0 && bias.size() != filters)
    throw ShapeMismatch("bias length " + std::to_string(bias.size()) +
                        " != filter count " + std::to_string(filters));
  for (double s : params.weight_scales)
    if (!(s > 0.0)) throw ConfigInvalid("weight scales must be positive");
  if (!(params.activation_scale > 0.0) || !(params.output_scale > 0.0))
    throw ConfigInvalid("activation/output scales must be positive");

  std::vector<FilterFold> folds(filters);
  for (int f = 0; f < filters; ++f) {
    std::int64_t rowsum = 0;
    for (int k = 0; k < dot; ++k) rowsum += weights[std::int64_t{f} * dot + k];
    std::int64_t offset =
        (bias.size() ? bias[f] : 0) -
        static_cast<std::int64_t>(params.activation_zero_point) * rowsum;
    if (offset < INT32_MIN || offset > INT32_MAX)
      throw AccumulatorOverflow("folded bias offset exceeds 32 bits");
    folds[f].offset = static_cast<std::int32_t>(offset);
    folds[f].multiplier = params.weight_scale(f) * params.activation_scale /
                          params.output_scale;
  }
  return folds;
}

// Both engines walk the dot dimension in the same 64-element chunks so
// accumulator overflow behavior is identical.
template <typename W>
Int8Tensor qmm_mult_impl(const Tensor<W> &q_weights, const Int8Tensor &q_acts,
                         const QuantParams &params, const Int32Tensor &bias) {
  if (q_acts.shape.size() != 2)
    throw ShapeMismatch("activation matrix must be rank 2");
  const int filters = q_weights.shape.empty() ? 0 : q_weights.shape[0];
  const int dot = filters ? static_cast<int>(q_weights.size() / filters) : 0;
  const std::int64_t pixels = q_acts.shape[0];
  if (q_acts.shape[1] != dot)
    throw ShapeMismatch("dot length mismatch: weights " + std::to_string(dot) +
                        " vs activations " + std::to_string(q_acts.shape[1]));
  if (!params.per_layer() &&
      static_cast<int>(params.weight_scales.size()) != filters)
    throw ShapeMismatch("per-filter scale count does not match filters");

  const auto folds = fold_filters(q_weights.data.data(), filters, dot, params, bias);
  const int zo = params.output_zero_point;

  Int8Tensor out({static_cast<int>(pixels), filters});
  parallel_for(pixels, [&](std::int64_t p) {
    const std::int8_t *arow = &q_acts[p * dot];
    for (int f = 0; f < filters; ++f) {
      const W *wrow = &q_weights[std::int64_t{f} * dot];
      std::int32_t acc = folds[f].offset;
      for (int k0 = 0; k0 < dot; k0 += 64) {
        const int k1 = std::min(dot, k0 + 64);
        std::int64_t partial = 0;
        for (int k = k0; k < k1; ++k)
          partial += static_cast<std::int64_t>(wrow[k]) * arow[k];
        acc = checked_add(acc, partial);
      }
      out[p * filters + f] = requantize(folds[f].multiplier, acc, zo);
    }
  });
  return out;
}

}  // namespace

Int8Tensor qmm_mult(const Int8Tensor &q_weights, const Int8Tensor &q_acts,
                    const QuantParams &params, const Int32Tensor &bias) {
  return qmm_mult_impl(q_weights, q_acts, params, bias);
}

Int8Tensor qmm_mult(const Int32Tensor &pot_weights, const Int8Tensor &q_acts,
                    const QuantParams &params, const Int32Tensor &bias) {
  return qmm_mult_impl(pot_weights, q_acts, params, bias);
}

Int32Tensor decode_packed(const PackedWeightTensor &packed) {
  const auto codes = unpack(packed.bytes, packed.element_count());
  Int32Tensor pot(packed.shape);
  for (std::int64_t i = 0; i < pot.size(); ++i)
    pot[i] = decode_pot_int(packed.scheme.kind, codes[i]);
  return pot;
}

Int8Tensor qmm_shift(const PackedWeightTensor &packed, const Int8Tensor &q_acts,
                     const QuantParams &params, const Int32Tensor &bias) {
  if (q_acts.shape.size() != 2)
    throw ShapeMismatch("activation matrix must be rank 2");
  const int filters = packed.shape.empty() ? 0 : packed.shape[0];
  const int dot =
      filters ? static_cast<int>(packed.element_count() / filters) : 0;
  const std::int64_t pixels = q_acts.shape[0];
  if (q_acts.shape[1] != dot)
    throw ShapeMismatch("dot length mismatch: weights " + std::to_string(dot) +
                        " vs activations " + std::to_string(q_acts.shape[1]));

  const SchemeKind kind = packed.scheme.kind;
  const auto codes = unpack(packed.bytes, packed.element_count());

  // Pad filter rows to whole 64-lane tiles. MSQ/APoT tails use the zero
  // level; QKeras has no zero level, so tails keep code 0 and rely on the
  // zero-padded activation lanes instead.
  const QuantLevelSet levels = generate_levels(packed.scheme);
  std::uint8_t pad_code = 0;
  if (const QuantLevel *zero = levels.find_pot_int(0)) pad_code = zero->code;
  const int tiles = (dot + 63) / 64;
  const int padded = tiles * 64;
  std::vector<std::uint8_t> lane_codes(std::size_t{1} * filters * padded,
                                       pad_code);
  for (int f = 0; f < filters; ++f)
    std::copy(codes.begin() + std::int64_t{f} * dot,
              codes.begin() + std::int64_t{f + 1} * dot,
              lane_codes.begin() + std::int64_t{f} * padded);

  // Decode once for the offset fold; the dot products themselves go
  // through the shift PEs.
  Int32Tensor pot = decode_packed(packed);
  const auto folds = fold_filters(pot.data.data(), filters, dot, params, bias);
  const int zo = params.output_zero_point;

  Int8Tensor out({static_cast<int>(pixels), filters});
  parallel_for(pixels, [&](std::int64_t p) {
    std::vector<std::int8_t> lanes(padded, 0);
    std::copy(&q_acts[p * dot], &q_acts[p * dot] + dot, lanes.begin());
    for (int f = 0; f < filters; ++f) {
      const std::uint8_t *crow = &lane_codes[std::int64_t{f} * padded];
      std::int32_t acc = folds[f].offset;
      for (int t = 0; t < tiles; ++t) {
        std::int32_t partial =
            dot64(std::span<const std::uint8_t, 64>(crow + t * 64, 64),
                  std::span<const std::int8_t, 64>(lanes.data() + t * 64, 64),
                  kind);
        acc = checked_add(acc, partial);
      }
      out[p * filters + f] = requantize(folds[f].multiplier, acc, zo);
    }
  });
  return out;
}

namespace {

Int8Tensor run_layer(const LayerSpec &layer, const Int8Tensor &input,
                     Engine engine, Shape *out_shape) {
  if (layer.kind == LayerKind::CpuOther)
    throw UnsupportedLayer("layer '" + layer.name +
                           "' runs on the CPU and cannot be executed here");
  if (engine == Engine::Shift && layer.stage != WeightStage::PotIntE)
    throw StageError("layer '" + layer.name +
                     "' is int8-stage; run weight preprocessing first");

  Int8Tensor matrix;
  Shape result_shape;
  if (layer.kind == LayerKind::Conv2D) {
    matrix = im2col(input, layer);
    const ConvGeometry g =
        conv_geometry(input.shape[1], input.shape[2], layer.kernel_h,
                      layer.kernel_w, layer.stride, layer.padding);
    result_shape = {input.shape[0], g.out_h, g.out_w, layer.filters};
  } else {
    // FC consumes [.., in_features]; leading dims flatten into rows, so a
    // conv output feeds an FC head as one row per spatial position.
    if (input.shape.empty() || input.shape.back() != layer.in_channels)
      throw ShapeMismatch("fully-connected layer '" + layer.name +
                          "' needs trailing dimension " +
                          std::to_string(layer.in_channels));
    const int rows =
        static_cast<int>(numel(input.shape) / input.shape.back());
    matrix = input;
    matrix.shape = {rows, layer.in_channels};
    result_shape = {rows, layer.filters};
  }

  Int8Tensor out;
  if (engine == Engine::Shift) {
    out = qmm_shift(layer.weights_packed, matrix, layer.quant, layer.bias);
  } else if (layer.stage == WeightStage::PotIntE) {
    out = qmm_mult(decode_packed(layer.weights_packed), matrix, layer.quant,
                   layer.bias);
  } else {
    Int8Tensor flat = layer.weights_int8;
    flat.shape = {layer.filters, layer.dot_length()};
    out = qmm_mult(flat, matrix, layer.quant, layer.bias);
  }
  *out_shape = result_shape;
  return out;
}

}  // namespace

std::vector<Int8Tensor> run_model_trace(const Model &model,
                                        const Int8Tensor &input,
                                        Engine engine) {
  std::vector<Int8Tensor> trace;
  Int8Tensor current = input;
  for (const LayerSpec &layer : model.layers) {
    Shape shape;
    Int8Tensor out = run_layer(layer, current, engine, &shape);
    out.shape = shape;
    trace.push_back(out);
    current = std::move(out);
  }
  return trace;
}

Int8Tensor run_model(const Model &model, const Int8Tensor &input,
                     Engine engine) {
  if (model.layers.empty()) return input;
  auto trace = run_model_trace(model, input, engine);
  return std::move(trace.back());
}

}  // namespace potacc
