#include "potacc/shift_pe.hpp"

#include <string>

namespace potacc {

ShiftPEConfig shift_pe_config(SchemeKind kind) {
  // ipw = two's-complement bits of the widest intermediate product:
  //   QKeras  -128<<7            -> 15 bits
  //   MSQ     -128<<2 + -128<<2  -> 11 bits
  //   APoT    -128<<3 + -128<<1  -> 12 bits
  int ipw = kind == SchemeKind::QKeras ? 15
            : kind == SchemeKind::MSQ  ? 11
                                       : 12;
  return ShiftPEConfig{make_scheme(kind), 8, ipw, 32};
}

namespace {

// First-term mux tables: shift value per 2-bit field, -1 = eta.
constexpr int kMsqFirst[4] = {0, 1, 2, -1};
constexpr int kApotFirst[4] = {0, -1, 2, 3};
// Second-term shift when the LSB is 1 (LSB 0 = eta).
constexpr int kMsqSecondShift = 2;
constexpr int kApotSecondShift = 1;

}  // namespace

DecodedCode decode_code(SchemeKind kind, std::uint8_t code) {
  if (code > 0xF)
    throw InvalidCode("code nibble out of range: " + std::to_string(code));
  bool negate = (code & 0x8) != 0;
  if (kind == SchemeKind::QKeras) {
    return DecodedCode{code & 0x7, -1, negate};
  }
  int first_field = (code >> 1) & 0x3;
  int second_bit = code & 0x1;
  int shift1 =
      kind == SchemeKind::MSQ ? kMsqFirst[first_field] : kApotFirst[first_field];
  int shift2 = second_bit == 0 ? -1
               : kind == SchemeKind::MSQ ? kMsqSecondShift
                                         : kApotSecondShift;
  return DecodedCode{shift1, shift2, negate};
}

int decode_pot_int(SchemeKind kind, std::uint8_t code) {
  DecodedCode d = decode_code(kind, code);
  int mag = (d.shift1 >= 0 ? 1 << d.shift1 : 0) +
            (d.shift2 >= 0 ? 1 << d.shift2 : 0);
  return d.negate ? -mag : mag;
}

PEOutput pe_multiply(std::uint8_t code, std::int8_t activation,
                     SchemeKind kind) {
  DecodedCode d = decode_code(kind, code);
  std::int32_t a = activation;
  std::int32_t product = (d.shift1 >= 0 ? a << d.shift1 : 0) +
                         (d.shift2 >= 0 ? a << d.shift2 : 0);
  return PEOutput{product, d.negate};
}

std::int32_t accumulate(std::int32_t acc, const PEOutput &out) {
  std::int64_t r = static_cast<std::int64_t>(acc) +
                   (out.negate ? -static_cast<std::int64_t>(out.product)
                               : static_cast<std::int64_t>(out.product));
  if (r < INT32_MIN || r > INT32_MAX)
    throw AccumulatorOverflow("32-bit accumulator exceeded: " +
                              std::to_string(r));
  return static_cast<std::int32_t>(r);
}

std::int32_t dot64(std::span<const std::uint8_t, 64> codes,
                   std::span<const std::int8_t, 64> acts, SchemeKind kind) {
  std::int32_t acc = 0;
  for (int lane = 0; lane < 64; ++lane)
    acc = accumulate(acc, pe_multiply(codes[lane], acts[lane], kind));
  return acc;
}

}  // namespace potacc
