#ifndef POTACC_QMM_HPP
#define POTACC_QMM_HPP

#include <optional>
#include <string>
#include <vector>

#include "potacc/quantizer.hpp"
#include "potacc/schemes.hpp"
#include "potacc/tensor.hpp"
#include "potacc/weight_prep.hpp"

namespace potacc {

enum class LayerKind { Conv2D, FullyConnected, CpuOther };
enum class PaddingMode { Same, Valid };
enum class WeightStage { Int8, PotIntE };
enum class Engine { Mult, Shift };

std::string to_string(LayerKind kind);
std::string to_string(PaddingMode p);
std::string to_string(WeightStage s);

struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::Conv2D;
  Shape input_shape;    // declared input: [N,H,W,C] conv, [rows,K] fc
  int in_channels = 0;  // conv: C, fc: input features
  int filters = 0;      // conv: output channels, fc: output features
  int kernel_h = 1;
  int kernel_w = 1;
  int stride = 1;
  PaddingMode padding = PaddingMode::Valid;
  QuantParams quant;
  WeightStage stage = WeightStage::Int8;
  Int8Tensor weights_int8;          // int8 stage: [F,kh,kw,C] or [F,K]
  PackedWeightTensor weights_packed;  // pot_int_e stage
  Int32Tensor bias;                 // [F]
  double cpu_time_ms = -1.0;        // CpuOther layers only

  // inner dot length of the lowered matrix multiply
  int dot_length() const {
    return kind == LayerKind::FullyConnected ? in_channels
                                             : kernel_h * kernel_w * in_channels;
  }
};

struct Model {
  int version = 1;
  std::string name;
  PoTScheme scheme{SchemeKind::APoT, 4};
  WeightStage stage = WeightStage::Int8;
  Shape input_shape;  // [N,H,W,C] for conv chains, [N,K] for FC chains
  double input_scale = 1.0;
  int input_zero_point = 0;
  std::vector<LayerSpec> layers;
};

// Output spatial size under TFLite padding arithmetic.
struct ConvGeometry {
  int out_h, out_w;
  int pad_top, pad_left;
};
ConvGeometry conv_geometry(int in_h, int in_w, int kernel_h, int kernel_w,
                           int stride, PaddingMode padding);

// Lowers NHWC conv activations to the (output_pixels, kh*kw*C) matrix.
// Padding positions carry the activation zero point, so (q_A - Z_A)
// contributes nothing there.
Int8Tensor im2col(const Int8Tensor &activations, const LayerSpec &layer);

// Multiply-based reference QMM over an already-lowered activation matrix
// [P, K]. Weights are [F, K] (conv filter tensors flatten to that shape).
// Output is [P, F] int8. Both engines share the offset fold
//   acc = sum_k w[f,k] * a[p,k] + (q_b[f] - Z_A * sum_k w[f,k])
// and the requantizer q_o = clamp(round_half_even(M_f * acc) + Z_o).
Int8Tensor qmm_mult(const Int8Tensor &q_weights, const Int8Tensor &q_acts,
                    const QuantParams &params, const Int32Tensor &bias);
Int8Tensor qmm_mult(const Int32Tensor &pot_weights, const Int8Tensor &q_acts,
                    const QuantParams &params, const Int32Tensor &bias);

// Shift-based QMM: identical contract with weights decoded from packed
// 4-bit codes and all core dot products routed through shift_pe::dot64
// over 64-lane tiles.
Int8Tensor qmm_shift(const PackedWeightTensor &packed, const Int8Tensor &q_acts,
                     const QuantParams &params, const Int32Tensor &bias);

// Decode a packed tensor back to pot_int form ([F, K] flattened shape kept).
Int32Tensor decode_packed(const PackedWeightTensor &packed);

// Executes a linear chain of conv/FC layers. Conv inputs/outputs are NHWC.
// Layer activation params must already be threaded (model_io does this at
// load time). CpuOther layers are not executable.
Int8Tensor run_model(const Model &model, const Int8Tensor &input,
                     Engine engine);

// Same, but keeps every layer's output (used by verify).
std::vector<Int8Tensor> run_model_trace(const Model &model,
                                        const Int8Tensor &input,
                                        Engine engine);

}  // namespace potacc

#endif  // POTACC_QMM_HPP
