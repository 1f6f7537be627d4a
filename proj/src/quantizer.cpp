#include "potacc/quantizer.hpp"

#include <cmath>
#include <string>

namespace potacc {

int round_half_away(double v) { return static_cast<int>(std::round(v)); }

int round_half_even(double v) {
  return static_cast<int>(std::nearbyint(v));  // FE_TONEAREST default
}

std::pair<Int8Tensor, QuantParams> quantize_weights(
    const FloatTensor &float_weights, Granularity granularity) {
  if (float_weights.shape.empty() || float_weights.size() == 0)
    throw ShapeMismatch("cannot quantize an empty weight tensor");
  for (double w : float_weights.data)
    if (!std::isfinite(w))
      throw ConfigInvalid("weight tensor contains a non-finite value");

  const int num_filters = float_weights.shape[0];
  const std::int64_t per_filter = float_weights.size() / num_filters;
  const int groups = granularity == Granularity::PerFilter ? num_filters : 1;
  const std::int64_t group_len =
      granularity == Granularity::PerFilter ? per_filter
                                            : float_weights.size();

  QuantParams params;
  params.weight_scales.resize(groups);
  Int8Tensor q(float_weights.shape);
  for (int g = 0; g < groups; ++g) {
    double max_abs = 0.0;
    for (std::int64_t i = 0; i < group_len; ++i)
      max_abs = std::max(max_abs, std::abs(float_weights[g * group_len + i]));
    if (max_abs == 0.0)
      throw AllZeroGroup("scale group " + std::to_string(g) +
                         " is entirely zero");
    const double scale = max_abs / 127.0;
    params.weight_scales[g] = scale;
    for (std::int64_t i = 0; i < group_len; ++i) {
      int v = round_half_away(float_weights[g * group_len + i] / scale);
      q[g * group_len + i] = static_cast<std::int8_t>(v);
    }
  }
  return {std::move(q), std::move(params)};
}

QuantParams expand_per_layer_scale(const QuantParams &params,
                                   int num_filters) {
  if (!params.per_layer())
    throw ConfigInvalid("expand_per_layer_scale expects a single scale, got " +
                        std::to_string(params.weight_scales.size()));
  QuantParams out = params;
  out.weight_scales.assign(num_filters, params.weight_scales[0]);
  return out;
}

}  // namespace potacc
