#ifndef POTACC_SCHEMES_HPP
#define POTACC_SCHEMES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "potacc/dyadic.hpp"
#include "potacc/error.hpp"

namespace potacc {

enum class SchemeKind { QKeras, MSQ, APoT };

std::string to_string(SchemeKind kind);
SchemeKind scheme_kind_from_string(const std::string &name);

struct PoTScheme {
  SchemeKind kind;
  int bitwidth;  // fixed at 4 in v1
};

// Validates the bitwidth; only 4-bit codes are supported.
PoTScheme make_scheme(SchemeKind kind, int bitwidth = 4);

// Per-scheme term sets in pot_int form. Every nonzero entry is a power of
// two; zero marks the term's "skip" value (eta). QKeras has a single term
// and no zero.
struct PoTTermSpec {
  std::vector<int> first_term_values;
  std::vector<int> second_term_values;  // empty for QKeras
  int max_pot_int;
  Dyadic smallest_pot_float;  // smallest nonzero pot_float among all terms
};

PoTTermSpec term_spec(SchemeKind kind);

// One quantization level in all four representations. q0/q1 hold the
// canonical pot_int term decomposition (magnitudes, larger term first;
// q1 = 0 for single-term schemes and for eta).
struct QuantLevel {
  Dyadic pot_float;
  int int8;     // round(pot_float * 127 / max|pot_float|)
  int pot_int;  // pot_float / smallest nonzero pot_float term
  std::uint8_t code;  // 4-bit sign-magnitude shift code (pot_int^e)
  int q0 = 0;
  int q1 = 0;
};

struct QuantLevelSet {
  PoTScheme scheme;
  std::vector<QuantLevel> levels;  // sorted ascending by pot_float

  const QuantLevel &max_level() const { return levels.back(); }
  int max_pot_int() const { return levels.back().pot_int; }
  // Level whose int8 value is nearest to v; preconditions of weight
  // preprocessing guarantee a hit within distance 1.
  const QuantLevel &nearest_int8(int v) const;
  const QuantLevel *find_pot_int(int pot_int) const;
};

// Enumerates all signed term sums, deduplicates, sorts, and fills the int8
// and code columns. Deterministic and pure.
QuantLevelSet generate_levels(const PoTScheme &scheme);

// Level minimizing |pot_float - value|. Ties break toward smaller
// |pot_float|, then toward the positive level.
const QuantLevel &nearest_level(const QuantLevelSet &levels, double value);

// Sign-magnitude rendering of a code nibble ("-0" for 0b1000).
std::string code_to_string(std::uint8_t code);

}  // namespace potacc

#endif  // POTACC_SCHEMES_HPP
