#ifndef POTACC_MODEL_IO_HPP
#define POTACC_MODEL_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "potacc/qmm.hpp"

namespace potacc {

// Model files are a JSON manifest plus a sidecar binary blob. The manifest
// names the blob file and references tensor sections by offset/length with
// CRC32 checksums; all numeric blob encodings are little-endian. A model is
// either int8 stage (encoding "int8") or pot_int_e stage (encoding "pot4",
// two codes per byte) - never mixed.
Model load_model(const std::string &manifest_path);

// Writes <path> (manifest) and the blob next to it as <path>.bin. Returns
// the blob path.
std::string save_model(const Model &model, const std::string &manifest_path);

// Tensor files: "POTT" magic, u32 LE header length, JSON header
// {shape, scale, zero_point, dtype}, then raw int8 data.
struct TensorFile {
  Int8Tensor tensor;
  double scale = 1.0;
  int zero_point = 0;
};
TensorFile load_tensor(const std::string &path);
void save_tensor(const TensorFile &t, const std::string &path);

// One layer of a synthesis request. Conv kernels are square; fc layers
// only use `filters`.
struct SynthLayer {
  LayerKind kind;
  int filters;
  int kernel = 1;
  int stride = 1;
  PaddingMode padding = PaddingMode::Same;
};

struct SynthSpec {
  std::string name;
  Shape input_shape;  // [N,H,W,C] or [N,K]
  std::vector<SynthLayer> layers;
};

// Conv/FC layer lists shaped after well-known networks. Valid names:
// mobilenetv2, resnet18, inceptionv1, efficientnet-l, deit.
SynthSpec synth_preset(const std::string &name);
std::vector<std::string> synth_preset_names();

// Parses "conv:F:kK:sS:{same|valid},fc:F,..." into layers.
std::vector<SynthLayer> parse_layer_spec(const std::string &spec);

// Builds an int8-stage model whose weights are drawn uniformly from the
// scheme's pot_float levels (deterministic in the seed) and quantized
// per-filter (conv) / per-layer (fc).
Model synth_model(const SynthSpec &spec, const PoTScheme &scheme,
                  std::uint64_t seed);

// Runs weight preprocessing over every conv/FC layer of an int8-stage
// model: per-layer FC scales are expanded per-filter, weights are
// scale-corrected, encoded and packed. Throws StageError if the model is
// already preprocessed.
Model preprocess_model(const Model &model, bool qkeras_c1 = false);

}  // namespace potacc

#endif  // POTACC_MODEL_IO_HPP
