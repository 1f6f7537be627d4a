#include "potacc/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>

namespace potacc {

std::string to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::QKeras: return "qkeras";
    case SchemeKind::MSQ: return "msq";
    case SchemeKind::APoT: return "apot";
  }
  return "?";
}

SchemeKind scheme_kind_from_string(const std::string &name) {
  if (name == "qkeras") return SchemeKind::QKeras;
  if (name == "msq") return SchemeKind::MSQ;
  if (name == "apot") return SchemeKind::APoT;
  throw ConfigInvalid("unknown scheme '" + name +
                      "' (valid: qkeras, msq, apot)");
}

PoTScheme make_scheme(SchemeKind kind, int bitwidth) {
  if (bitwidth != 4)
    throw UnsupportedBitwidth("only 4-bit codes are supported, got " +
                              std::to_string(bitwidth));
  return PoTScheme{kind, bitwidth};
}

PoTTermSpec term_spec(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::QKeras:
      // single term 2^0..2^7, no zero; pot_float 2^-8..2^-1
      return {{1, 2, 4, 8, 16, 32, 64, 128}, {}, 128, Dyadic::pow2(8)};
    case SchemeKind::MSQ:
      // pot_float terms {0,1/8,1/4,1/2} + {0,1/2}
      return {{0, 1, 2, 4}, {0, 4}, 8, Dyadic::pow2(3)};
    case SchemeKind::APoT:
      // pot_float terms {0,1/16,1/4,1/2} + {0,1/8}
      return {{0, 1, 4, 8}, {0, 2}, 10, Dyadic::pow2(4)};
  }
  throw ConfigInvalid("bad scheme kind");
}

namespace {

// Encoding field tables. The MSB of a code is the sign; the next two bits
// select the first term, the LSB selects the second term. QKeras instead
// uses all three low bits as a plain shift value.
//
//   MSQ  first: 0->shift0  1->shift1  2->shift2  3->eta   second: 0->eta 1->shift2
//   APoT first: 0->shift0  1->eta     2->shift2  3->shift3 second: 0->eta 1->shift1
//
// Values below are term magnitudes (2^shift), 0 meaning eta.
constexpr int kMsqFirstField[4] = {1, 2, 4, 0};
constexpr int kMsqSecond = 4;
constexpr int kApotFirstField[4] = {1, 0, 4, 8};
constexpr int kApotSecond = 2;

int field_for_first_term(SchemeKind kind, int q0) {
  const int *table = kind == SchemeKind::MSQ ? kMsqFirstField : kApotFirstField;
  for (int f = 0; f < 4; ++f)
    if (table[f] == q0) return f;
  throw NotALevel("no first-term encoding for magnitude " +
                  std::to_string(q0));
}

std::uint8_t encode_magnitude(SchemeKind kind, int q0, int q1) {
  if (kind == SchemeKind::QKeras) {
    int shift = 0;
    while ((1 << shift) < q0) ++shift;
    return static_cast<std::uint8_t>(shift);
  }
  int second_bit = q1 == 0 ? 0 : 1;
  return static_cast<std::uint8_t>((field_for_first_term(kind, q0) << 1) |
                                   second_bit);
}

int round_half_away_ratio(std::int64_t num, std::int64_t den) {
  // round(num/den) with halves away from zero; den > 0
  std::int64_t n = num >= 0 ? num : -num;
  std::int64_t q = (2 * n + den) / (2 * den);
  return static_cast<int>(num >= 0 ? q : -q);
}

}  // namespace

QuantLevelSet generate_levels(const PoTScheme &scheme) {
  make_scheme(scheme.kind, scheme.bitwidth);  // revalidate
  const PoTTermSpec spec = term_spec(scheme.kind);

  // magnitude -> canonical decomposition with the larger first term
  std::map<int, std::pair<int, int>> sums;
  if (spec.second_term_values.empty()) {
    for (int q0 : spec.first_term_values) sums[q0] = {q0, 0};
  } else {
    for (int q0 : spec.first_term_values)
      for (int q1 : spec.second_term_values) {
        int m = q0 + q1;
        auto it = sums.find(m);
        if (it == sums.end() || q0 > it->second.first) sums[m] = {q0, q1};
      }
  }

  QuantLevelSet set;
  set.scheme = scheme;
  const int max_pot = spec.max_pot_int;
  for (auto &[mag, terms] : sums) {
    for (int sign : {-1, +1}) {
      if (mag == 0 && sign < 0) continue;  // zero appears once
      QuantLevel lv;
      lv.pot_int = sign * mag;
      lv.pot_float = spec.smallest_pot_float * lv.pot_int;
      lv.int8 = round_half_away_ratio(std::int64_t{lv.pot_int} * 127, max_pot);
      lv.q0 = terms.first;
      lv.q1 = terms.second;
      std::uint8_t mag_bits = encode_magnitude(scheme.kind, lv.q0, lv.q1);
      lv.code = static_cast<std::uint8_t>((sign < 0 ? 0x8 : 0x0) | mag_bits);
      set.levels.push_back(lv);
    }
  }
  std::sort(set.levels.begin(), set.levels.end(),
            [](const QuantLevel &a, const QuantLevel &b) {
              return a.pot_int < b.pot_int;
            });
  return set;
}

const QuantLevel &QuantLevelSet::nearest_int8(int v) const {
  const QuantLevel *best = nullptr;
  int best_dist = 0;
  for (const QuantLevel &lv : levels) {
    int dist = std::abs(lv.int8 - v);
    if (!best || dist < best_dist) {
      best = &lv;
      best_dist = dist;
    }
  }
  return *best;
}

const QuantLevel *QuantLevelSet::find_pot_int(int pot_int) const {
  for (const QuantLevel &lv : levels)
    if (lv.pot_int == pot_int) return &lv;
  return nullptr;
}

const QuantLevel &nearest_level(const QuantLevelSet &levels, double value) {
  const QuantLevel *best = nullptr;
  for (const QuantLevel &lv : levels.levels) {
    if (!best) {
      best = &lv;
      continue;
    }
    double d_new = std::abs(lv.pot_float.to_double() - value);
    double d_old = std::abs(best->pot_float.to_double() - value);
    if (d_new < d_old) {
      best = &lv;
    } else if (d_new == d_old) {
      // toward zero, then toward the positive level
      int m_new = std::abs(lv.pot_int), m_old = std::abs(best->pot_int);
      if (m_new < m_old || (m_new == m_old && lv.pot_int > best->pot_int))
        best = &lv;
    }
  }
  return *best;
}

std::string code_to_string(std::uint8_t code) {
  std::string s = (code & 0x8) ? "-" : "";
  return s + std::to_string(code & 0x7);
}

std::string Dyadic::to_decimal_string() const {
  if (num_ == 0) return "0";
  // num / 2^exp == num * 5^exp / 10^exp
  std::int64_t n = num_ < 0 ? -num_ : num_;
  for (int i = 0; i < exp_; ++i) n *= 5;
  std::string digits = std::to_string(n);
  std::string out = num_ < 0 ? "-" : "";
  if (exp_ == 0) return out + digits;
  if (static_cast<int>(digits.size()) <= exp_)
    digits.insert(0, exp_ + 1 - digits.size(), '0');
  digits.insert(digits.size() - exp_, ".");
  return out + digits;
}

}  // namespace potacc
