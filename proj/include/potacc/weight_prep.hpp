#ifndef POTACC_WEIGHT_PREP_HPP
#define POTACC_WEIGHT_PREP_HPP

#include <cstdint>
#include <vector>

#include "potacc/quantizer.hpp"
#include "potacc/schemes.hpp"
#include "potacc/tensor.hpp"

namespace potacc {

// Packed 4-bit codes, two per byte: low nibble = even element index, high
// nibble = odd index. An odd element count leaves the final high nibble 0.
struct PackedWeightTensor {
  PoTScheme scheme;
  Shape shape;                      // original weight shape
  std::vector<std::uint8_t> bytes;  // ceil(numel/2)
  std::vector<double> corrected_scales;   // S_pi per filter
  std::vector<double> correction_factor;  // C per filter

  std::int64_t element_count() const { return numel(shape); }
};

struct ScaleCorrectResult {
  Int32Tensor pot_int;       // weights in pot_int form
  QuantParams params;        // weight_scales replaced by S_pi = S_W * C
  std::vector<double> correction;  // C per scale group
  Int32Tensor bias;          // q_b' = round(q_b / C)
};

struct ScaleCorrectOptions {
  // Reproduces the pipeline variant that skips scale correction for
  // QKeras (C forced to 1) instead of using the exact 127/128.
  bool qkeras_c1 = false;
};

// Maps int8 weights of a PoT-trained layer back to pot_int by nearest-level
// lookup, computes the per-group correction factor
//   C = max|q_W| / max-matching |pot_int|,
// replaces the weight scales by S_pi = S_W * C and requantizes the bias so
// S_b = S_pi * S_A still holds. A group whose largest weight is not the
// scheme's top level was quantized against a smaller anchor level, so the
// lookup probes anchor grids largest-first and uses the first grid that
// explains every value. Values farther than 1 from every grid raise
// NotAPoTWeight.
ScaleCorrectResult scale_correct(const Int8Tensor &q_weights,
                                 const QuantParams &params,
                                 const Int32Tensor &bias,
                                 const PoTScheme &scheme,
                                 const ScaleCorrectOptions &opts = {});

// pot_int -> canonical 4-bit sign-magnitude codes (NotALevel on a value
// that is not a level of the scheme).
std::vector<std::uint8_t> encode(const Int32Tensor &pot_int,
                                 const PoTScheme &scheme);

// Nibble packing and its inverse. unpack() needs the element count to drop
// the pad nibble of odd-length tensors.
std::vector<std::uint8_t> pack(const std::vector<std::uint8_t> &codes);
std::vector<std::uint8_t> unpack(const std::vector<std::uint8_t> &bytes,
                                 std::int64_t element_count);

// Full per-layer preprocessing: scale_correct + encode + pack.
struct PrepResult {
  PackedWeightTensor packed;
  QuantParams params;
  Int32Tensor bias;
};
PrepResult prep_layer(const Int8Tensor &q_weights, const QuantParams &params,
                      const Int32Tensor &bias, const PoTScheme &scheme,
                      const ScaleCorrectOptions &opts = {});

}  // namespace potacc

#endif  // POTACC_WEIGHT_PREP_HPP
