#ifndef POTACC_SHIFT_PE_HPP
#define POTACC_SHIFT_PE_HPP

#include <cstdint>
#include <span>

#include "potacc/schemes.hpp"

namespace potacc {

// Intermediate product width (two's-complement bits of the pre-sign
// product) and accumulator width per scheme. The accumulator is 32 bits
// for every scheme.
struct ShiftPEConfig {
  PoTScheme scheme;
  int activation_bits = 8;
  int ipw;
  int accuw = 32;
};

ShiftPEConfig shift_pe_config(SchemeKind kind);

// Decoded form of a 4-bit code: term shift amounts (-1 = eta, i.e. the
// term contributes nothing) plus the weight sign.
struct DecodedCode {
  int shift1;  // first term, -1 for eta
  int shift2;  // second term, -1 for eta
  bool negate;
};

// Field-level decode per the PE mux rules. Every 4-bit pattern is
// decodable; InvalidCode fires only for out-of-range inputs (> 0xF).
DecodedCode decode_code(SchemeKind kind, std::uint8_t code);

// pot_int value a code stands for (sign applied).
int decode_pot_int(SchemeKind kind, std::uint8_t code);

// Output of one shift-PE: the shifted (signed) activation sum, which still
// carries the activation's sign, plus the weight sign to apply during
// accumulation. |product| stays below 2^(ipw-1).
struct PEOutput {
  std::int32_t product;
  bool negate;
};

// product = (a << shift1) + (a << shift2), eta terms contributing 0.
// Shifts act on the two's-complement activation; the weight sign is
// deferred to accumulate(). Equivalent to pot_int * a.
PEOutput pe_multiply(std::uint8_t code, std::int8_t activation,
                     SchemeKind kind);

// acc +/- product per the negate flag, with 32-bit overflow detection.
std::int32_t accumulate(std::int32_t acc, const PEOutput &out);

// 64-lane dot product: sum of pe_multiply over all lanes, accumulated in
// order through accumulate(). Equals the integer dot product of the decoded
// pot_int values with the activations.
std::int32_t dot64(std::span<const std::uint8_t, 64> codes,
                   std::span<const std::int8_t, 64> acts, SchemeKind kind);

}  // namespace potacc

#endif  // POTACC_SHIFT_PE_HPP
