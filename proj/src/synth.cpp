#include <cmath>
#include <random>
#include <sstream>

#include "potacc/model_io.hpp"

namespace potacc {

namespace {

// Conv shorthand used by the preset tables.
SynthLayer conv(int filters, int kernel, int stride = 1,
                PaddingMode padding = PaddingMode::Same) {
  return SynthLayer{LayerKind::Conv2D, filters, kernel, stride, padding};
}
SynthLayer fc(int features) {
  return SynthLayer{LayerKind::FullyConnected, features};
}

SynthSpec resnet18_spec() {
  SynthSpec s{"resnet18", {1, 224, 224, 3}, {}};
  s.layers.push_back(conv(64, 7, 2));
  // basic blocks; the stride-2 first conv of each stage stands in for the
  // downsampling the full network does with pooling/projection branches
  auto stage = [&s](int filters, int first_stride) {
    s.layers.push_back(conv(filters, 3, first_stride));
    s.layers.push_back(conv(filters, 3));
    s.layers.push_back(conv(filters, 3));
    s.layers.push_back(conv(filters, 3));
  };
  stage(64, 2);
  stage(128, 2);
  stage(256, 2);
  stage(512, 2);
  s.layers.push_back(fc(1000));
  return s;
}

SynthSpec mobilenetv2_spec() {
  SynthSpec s{"mobilenetv2", {1, 224, 224, 3}, {}};
  s.layers.push_back(conv(32, 3, 2));
  // inverted residual pointwise convs only (depthwise stages are not
  // accelerated); the block stride moves onto the projection conv
  struct Block { int t, c, n, stride; };
  const Block blocks[] = {{1, 16, 1, 1},  {6, 24, 2, 2},  {6, 32, 3, 2},
                          {6, 64, 4, 2},  {6, 96, 3, 1},  {6, 160, 3, 2},
                          {6, 320, 1, 1}};
  int in_c = 32;
  for (const Block &b : blocks) {
    for (int i = 0; i < b.n; ++i) {
      int stride = i == 0 ? b.stride : 1;
      if (b.t != 1) s.layers.push_back(conv(in_c * b.t, 1));
      s.layers.push_back(conv(b.c, 1, stride));
      in_c = b.c;
    }
  }
  s.layers.push_back(conv(1280, 1));
  s.layers.push_back(fc(1000));
  return s;
}

SynthSpec efficientnet_l_spec() {
  SynthSpec s{"efficientnet-l", {1, 224, 224, 3}, {}};
  s.layers.push_back(conv(32, 3, 2));
  struct Block { int t, c, n, stride; };
  const Block blocks[] = {{1, 16, 1, 1},  {6, 24, 2, 2},  {6, 40, 2, 2},
                          {6, 80, 3, 2},  {6, 112, 3, 1}, {6, 192, 4, 2},
                          {6, 320, 1, 1}};
  int in_c = 32;
  for (const Block &b : blocks) {
    for (int i = 0; i < b.n; ++i) {
      int stride = i == 0 ? b.stride : 1;
      if (b.t != 1) s.layers.push_back(conv(in_c * b.t, 1));
      s.layers.push_back(conv(b.c, 1, stride));
      in_c = b.c;
    }
  }
  s.layers.push_back(conv(1280, 1));
  s.layers.push_back(fc(1000));
  return s;
}

SynthSpec deit_spec() {
  SynthSpec s{"deit", {1, 224, 224, 3}, {}};
  s.layers.push_back(conv(192, 16, 16, PaddingMode::Valid));  // patch embed
  for (int block = 0; block < 12; ++block) {
    s.layers.push_back(fc(576));  // qkv
    s.layers.push_back(fc(192));  // attention output
    s.layers.push_back(fc(768));  // mlp expand
    s.layers.push_back(fc(192));  // mlp project
  }
  s.layers.push_back(fc(1000));
  return s;
}

// Inception branches run in parallel; the chain version lines the branch
// convs up sequentially per module (1x1 reductions before their 3x3/5x5
// convs), which keeps the list runnable at roughly the original sizes.
SynthSpec inceptionv1_spec() {
  SynthSpec s{"inceptionv1", {1, 224, 224, 3}, {}};
  s.layers.push_back(conv(64, 7, 2));
  s.layers.push_back(conv(64, 1, 2));  // stride stands in for the maxpool
  s.layers.push_back(conv(192, 3));
  struct Module { int b1, r3, b3, r5, b5, pool; int stride; };
  const Module mods[] = {
      {64, 96, 128, 16, 32, 32, 2},     // 3a (enter 28x28)
      {128, 128, 192, 32, 96, 64, 1},   // 3b
      {192, 96, 208, 16, 48, 64, 2},    // 4a (enter 14x14)
      {160, 112, 224, 24, 64, 64, 1},   // 4b
      {128, 128, 256, 24, 64, 64, 1},   // 4c
      {112, 144, 288, 32, 64, 64, 1},   // 4d
      {256, 160, 320, 32, 128, 128, 1}, // 4e
      {384, 192, 384, 48, 128, 128, 2}, // 5a (enter 7x7)
      {256, 160, 320, 32, 128, 128, 1}, // 5b
  };
  for (const Module &m : mods) {
    s.layers.push_back(conv(m.b1, 1, m.stride));
    s.layers.push_back(conv(m.r3, 1));
    s.layers.push_back(conv(m.b3, 3));
    s.layers.push_back(conv(m.r5, 1));
    s.layers.push_back(conv(m.b5, 5));
    s.layers.push_back(conv(m.pool, 1));
  }
  s.layers.push_back(fc(1000));
  return s;
}

}  // namespace

SynthSpec synth_preset(const std::string &name) {
  if (name == "resnet18") return resnet18_spec();
  if (name == "mobilenetv2") return mobilenetv2_spec();
  if (name == "inceptionv1") return inceptionv1_spec();
  if (name == "efficientnet-l") return efficientnet_l_spec();
  if (name == "deit") return deit_spec();
  std::string names;
  for (const auto &n : synth_preset_names()) names += " " + n;
  throw ConfigInvalid("unknown preset '" + name + "' (valid:" + names + ")");
}

std::vector<std::string> synth_preset_names() {
  return {"mobilenetv2", "resnet18", "inceptionv1", "efficientnet-l", "deit"};
}

std::vector<SynthLayer> parse_layer_spec(const std::string &spec) {
  std::vector<SynthLayer> layers;
  std::stringstream ss(spec);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (token.empty()) continue;
    std::stringstream ts(token);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ts, field, ':')) fields.push_back(field);
    if (fields.empty()) throw ConfigInvalid("empty layer token");
    if (fields[0] == "fc") {
      if (fields.size() != 2)
        throw ConfigInvalid("fc layer spec must be fc:<features>");
      layers.push_back(fc(std::stoi(fields[1])));
    } else if (fields[0] == "conv") {
      if (fields.size() < 2)
        throw ConfigInvalid("conv layer spec must be "
                            "conv:<filters>[:k<k>][:s<s>][:same|:valid]");
      SynthLayer l = conv(std::stoi(fields[1]), 3);
      for (std::size_t i = 2; i < fields.size(); ++i) {
        const std::string &f = fields[i];
        if (f == "same")
          l.padding = PaddingMode::Same;
        else if (f == "valid")
          l.padding = PaddingMode::Valid;
        else if (f.size() > 1 && f[0] == 'k')
          l.kernel = std::stoi(f.substr(1));
        else if (f.size() > 1 && f[0] == 's')
          l.stride = std::stoi(f.substr(1));
        else
          throw ConfigInvalid("bad conv field '" + f + "'");
      }
      layers.push_back(l);
    } else {
      throw ConfigInvalid("unknown layer kind '" + fields[0] + "'");
    }
  }
  if (layers.empty()) throw ConfigInvalid("layer spec is empty");
  return layers;
}

namespace {

// Deterministic helpers on top of the fixed mt19937_64 stream; std::
// distributions are implementation-defined, so files would not be
// byte-stable across standard libraries.
std::uint64_t rng_below(std::mt19937_64 &rng, std::uint64_t n) {
  return rng() % n;
}
int rng_range(std::mt19937_64 &rng, int lo, int hi) {  // inclusive
  return lo + static_cast<int>(rng_below(rng, std::uint64_t(hi - lo + 1)));
}

}  // namespace

Model synth_model(const SynthSpec &spec, const PoTScheme &scheme,
                  std::uint64_t seed) {
  if (spec.input_shape.size() != 4 && spec.input_shape.size() != 2)
    throw ConfigInvalid("synth input shape must be [N,H,W,C] or [N,K]");
  if (spec.layers.empty()) throw ConfigInvalid("synth spec has no layers");

  const QuantLevelSet levels = generate_levels(scheme);
  const int nlevels = static_cast<int>(levels.levels.size());
  std::mt19937_64 rng(seed);

  Model model;
  model.name = spec.name + "-" + to_string(scheme.kind) + "-seed" +
               std::to_string(seed);
  model.scheme = scheme;
  model.stage = WeightStage::Int8;
  model.input_shape = spec.input_shape;
  model.input_scale = 0.05;
  model.input_zero_point = -2;

  Shape current = spec.input_shape;
  int layer_idx = 0;
  for (const SynthLayer &sl : spec.layers) {
    LayerSpec layer;
    layer.kind = sl.kind;
    layer.filters = sl.filters;
    layer.name = (sl.kind == LayerKind::Conv2D ? "conv" : "fc") +
                 std::to_string(layer_idx++);

    Shape out_shape;
    if (sl.kind == LayerKind::Conv2D) {
      if (current.size() != 4)
        throw ShapeMismatch("conv layer '" + layer.name +
                            "' needs an NHWC input");
      layer.kernel_h = layer.kernel_w = sl.kernel;
      layer.stride = sl.stride;
      layer.padding = sl.padding;
      layer.in_channels = current[3];
      layer.input_shape = current;
      ConvGeometry g = conv_geometry(current[1], current[2], sl.kernel,
                                     sl.kernel, sl.stride, sl.padding);
      if (g.out_h <= 0 || g.out_w <= 0)
        throw ShapeMismatch("conv layer '" + layer.name +
                            "' does not fit its input");
      out_shape = {current[0], g.out_h, g.out_w, sl.filters};
    } else {
      // flatten leading dims, one row per position
      layer.in_channels = current.back();
      const int rows =
          static_cast<int>(numel(current) / current.back());
      layer.input_shape = {rows, layer.in_channels};
      out_shape = {rows, sl.filters};
    }

    const std::int64_t count =
        std::int64_t{layer.filters} * layer.dot_length();
    FloatTensor w(layer.kind == LayerKind::Conv2D
                      ? Shape{layer.filters, layer.kernel_h, layer.kernel_w,
                              layer.in_channels}
                      : Shape{layer.filters, layer.in_channels});
    for (std::int64_t i = 0; i < count; ++i)
      w[i] = levels.levels[rng_below(rng, nlevels)].pot_float.to_double();
    // quantize_weights needs one nonzero per scale group
    const std::int64_t group =
        layer.kind == LayerKind::Conv2D ? layer.dot_length() : count;
    for (std::int64_t g = 0; g * group < count; ++g) {
      bool nonzero = false;
      for (std::int64_t i = 0; i < group && !nonzero; ++i)
        nonzero = w[g * group + i] != 0.0;
      if (!nonzero) w[g * group] = levels.max_level().pot_float.to_double();
    }

    auto [q, params] = quantize_weights(
        w, layer.kind == LayerKind::Conv2D ? Granularity::PerFilter
                                           : Granularity::PerLayer);
    layer.weights_int8 = std::move(q);
    layer.stage = WeightStage::Int8;

    layer.bias = Int32Tensor({layer.filters});
    for (int f = 0; f < layer.filters; ++f)
      layer.bias[f] = rng_range(rng, -1024, 1024);

    layer.quant = params;
    double mean_scale = 0;
    for (double s : params.weight_scales) mean_scale += s;
    mean_scale /= static_cast<double>(params.weight_scales.size());
    // output scale sized so accumulators spread over the int8 range
    // without saturating everywhere
    layer.quant.output_scale =
        mean_scale * 0.05 * std::sqrt(double(layer.dot_length())) * 48.0;
    layer.quant.output_zero_point = rng_range(rng, -8, 8);

    model.layers.push_back(std::move(layer));
    current = out_shape;
  }

  // thread activation params through the chain
  double act_scale = model.input_scale;
  int act_zp = model.input_zero_point;
  for (LayerSpec &layer : model.layers) {
    layer.quant.activation_scale = act_scale;
    layer.quant.activation_zero_point = act_zp;
    act_scale = layer.quant.output_scale;
    act_zp = layer.quant.output_zero_point;
  }
  return model;
}

Model preprocess_model(const Model &model, bool qkeras_c1) {
  if (model.stage != WeightStage::Int8)
    throw StageError("model '" + model.name + "' is already pot_int_e stage");
  Model out = model;
  out.stage = WeightStage::PotIntE;
  ScaleCorrectOptions opts;
  opts.qkeras_c1 = qkeras_c1;
  for (LayerSpec &layer : out.layers) {
    if (layer.kind == LayerKind::CpuOther) continue;
    QuantParams params = layer.quant;
    if (params.per_layer() && layer.filters > 1)
      params = expand_per_layer_scale(params, layer.filters);
    Int8Tensor flat = layer.weights_int8;
    flat.shape = {layer.filters, layer.dot_length()};
    PrepResult prep = prep_layer(flat, params, layer.bias, model.scheme, opts);
    prep.packed.shape = layer.weights_int8.shape;
    layer.weights_packed = std::move(prep.packed);
    layer.quant = std::move(prep.params);
    layer.bias = std::move(prep.bias);
    layer.weights_int8 = Int8Tensor();
    layer.stage = WeightStage::PotIntE;
  }
  return out;
}

}  // namespace potacc
