#ifndef POTACC_QUANTIZER_HPP
#define POTACC_QUANTIZER_HPP

#include <vector>

#include "potacc/tensor.hpp"

namespace potacc {

enum class Granularity { PerFilter, PerLayer };

// Scale/zero-point bundle for one layer. Weights are symmetric (zero point
// 0); activations and outputs are asymmetric int8. The bias scale is always
// derived as weight_scale * activation_scale, so it cannot drift from the
// weight scales after a correction.
struct QuantParams {
  std::vector<double> weight_scales;  // length = #filters, or 1 (per-layer)
  double activation_scale = 1.0;
  int activation_zero_point = 0;
  double output_scale = 1.0;
  int output_zero_point = 0;

  bool per_layer() const { return weight_scales.size() == 1; }
  double weight_scale(int filter) const {
    return weight_scales[per_layer() ? 0 : filter];
  }
  double bias_scale(int filter) const {
    return weight_scale(filter) * activation_scale;
  }
};

// Symmetric int8 weight quantization: per scale group,
// S_W = max|w| / 127 and q = round(w / S_W) with halves away from zero.
// The first tensor dimension indexes filters for per-filter granularity.
// Throws AllZeroGroup when a group has no nonzero element.
std::pair<Int8Tensor, QuantParams> quantize_weights(
    const FloatTensor &float_weights, Granularity granularity);

// Duplicates a single per-layer scale into a per-filter vector of the given
// length (FC layers are stored per-layer; the engines run per-filter).
QuantParams expand_per_layer_scale(const QuantParams &params, int num_filters);

// round-half-away-from-zero to an integer, as used for weight quantization.
int round_half_away(double v);

// round-half-to-even, as used by the output requantizer.
int round_half_even(double v);

}  // namespace potacc

#endif  // POTACC_QUANTIZER_HPP
