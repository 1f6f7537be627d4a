#include <doctest.h>

#include <cmath>
#include <random>

#include "potacc/shift_pe.hpp"
#include "potacc/weight_prep.hpp"

using namespace potacc;

namespace {

// One filter containing every level's int8 value (full-range group).
Int8Tensor full_range_filter(const QuantLevelSet &set) {
  Int8Tensor t({1, static_cast<int>(set.levels.size())});
  for (std::size_t i = 0; i < set.levels.size(); ++i)
    t[i] = static_cast<std::int8_t>(set.levels[i].int8);
  return t;
}

QuantParams unit_params(int groups) {
  QuantParams p;
  p.weight_scales.assign(groups, 1.0 / 127.0);
  return p;
}

}  // namespace

TEST_CASE("scale correction reproduces the APoT level mapping") {
  PoTScheme apot = make_scheme(SchemeKind::APoT);
  QuantLevelSet set = generate_levels(apot);
  Int8Tensor q = full_range_filter(set);
  auto result = scale_correct(q, unit_params(1), Int32Tensor({1}), apot);
  for (std::size_t i = 0; i < set.levels.size(); ++i)
    CHECK(result.pot_int[i] == set.levels[i].pot_int);  // -127 -> -10, 38 -> 3
  CHECK(result.correction[0] == 127.0 / 10.0);
  CHECK(result.params.weight_scales[0] ==
        doctest::Approx((1.0 / 127.0) * (127.0 / 10.0)));
}

TEST_CASE("QKeras correction factor is exactly 127/128 by default") {
  PoTScheme qk = make_scheme(SchemeKind::QKeras);
  QuantLevelSet set = generate_levels(qk);
  Int8Tensor q = full_range_filter(set);
  auto result = scale_correct(q, unit_params(1), Int32Tensor({1}), qk);
  CHECK(result.correction[0] == 127.0 / 128.0);
  const QuantLevel *top = set.find_pot_int(128);
  REQUIRE(top != nullptr);
  CHECK(top->int8 == 127);  // q_W = 127 -> pot_int = 128

  ScaleCorrectOptions opts;
  opts.qkeras_c1 = true;
  auto compat = scale_correct(q, unit_params(1), Int32Tensor({1}), qk, opts);
  CHECK(compat.correction[0] == 1.0);
  CHECK(compat.params.weight_scales[0] == 1.0 / 127.0);
  // the flag only affects QKeras
  auto apot_result =
      scale_correct(full_range_filter(generate_levels(make_scheme(SchemeKind::APoT))),
                    unit_params(1), Int32Tensor({1}),
                    make_scheme(SchemeKind::APoT), opts);
  CHECK(apot_result.correction[0] == 127.0 / 10.0);
}

TEST_CASE("groups anchored below the top level get their own grid") {
  // a filter whose largest level is pot_int 8 (APoT): int8 grid is
  // round(pot * 127 / 8)
  PoTScheme apot = make_scheme(SchemeKind::APoT);
  Int8Tensor q({1, 3});
  q.data = {16, 48, 127};  // pot_int 1, 3, 8 on the anchor-8 grid
  auto result = scale_correct(q, unit_params(1), Int32Tensor(), apot);
  CHECK(result.pot_int[0] == 1);
  CHECK(result.pot_int[1] == 3);
  CHECK(result.pot_int[2] == 8);
  CHECK(result.correction[0] == 127.0 / 8.0);
}

TEST_CASE("per-filter correction factors are independent") {
  PoTScheme apot = make_scheme(SchemeKind::APoT);
  Int8Tensor q({2, 2});
  q.data = {127, 51,   // full-range filter: pot 10, 4
            127, 64};  // anchor-8 filter: 64 = round(4*127/8)
  Int32Tensor bias({2});
  bias.data = {1000, 1000};
  auto result = scale_correct(q, unit_params(2), bias, apot);
  CHECK(result.pot_int[0] == 10);
  CHECK(result.pot_int[1] == 4);
  CHECK(result.pot_int[2] == 8);
  CHECK(result.pot_int[3] == 4);
  CHECK(result.correction[0] == 127.0 / 10.0);
  CHECK(result.correction[1] == 127.0 / 8.0);
  // q_b' = round(q_b / C), exact: 1000*10/127 = 78.74 -> 79
  CHECK(result.bias[0] == 79);
  CHECK(result.bias[1] == 63);  // 1000*8/127 = 62.99 -> 63
}

TEST_CASE("all-zero group falls back to the full-range factor") {
  PoTScheme apot = make_scheme(SchemeKind::APoT);
  Int8Tensor q({2, 2});
  q.data = {0, 0, 127, 51};
  auto result = scale_correct(q, unit_params(2), Int32Tensor(), apot);
  CHECK(result.pot_int[0] == 0);
  CHECK(result.correction[0] == 127.0 / 10.0);
  CHECK(result.correction[1] == 127.0 / 10.0);
}

TEST_CASE("non-PoT weights are rejected") {
  PoTScheme apot = make_scheme(SchemeKind::APoT);
  Int8Tensor q({1, 2});
  q.data = {127, 60};  // 60 is >1 away from every grid containing 127
  CHECK_THROWS_AS(scale_correct(q, unit_params(1), Int32Tensor(), apot),
                  NotAPoTWeight);
}

TEST_CASE("dequantization preservation across the correction") {
  // S_pi * pot_int must equal S_W * (exact unrounded int8 value) for every
  // level of a full-range group; exact in rationals, 2^-20 in doubles.
  for (auto kind : {SchemeKind::QKeras, SchemeKind::MSQ, SchemeKind::APoT}) {
    CAPTURE(to_string(kind));
    PoTScheme scheme = make_scheme(kind);
    QuantLevelSet set = generate_levels(scheme);
    Int8Tensor q = full_range_filter(set);
    const double s_w = 0.017;
    QuantParams p;
    p.weight_scales = {s_w};
    auto result = scale_correct(q, p, Int32Tensor(), scheme);
    const double s_pi = result.params.weight_scales[0];
    const int max_pot = set.max_pot_int();
    for (const QuantLevel &lv : set.levels) {
      const double exact_int8 = 127.0 * lv.pot_int / max_pot;
      const double a = s_pi * lv.pot_int;
      const double b = s_w * exact_int8;
      REQUIRE(std::abs(a - b) <= std::abs(b) / 1048576.0);  // 2^-20
    }
  }
}

TEST_CASE("encode: known code points") {
  PoTScheme apot = make_scheme(SchemeKind::APoT);
  Int32Tensor pot({3});
  pot.data = {0, -1, 10};
  auto codes = encode(pot, apot);
  CHECK(codes[0] == 0x2);  // eta,eta
  CHECK(codes[1] == 0x8);  // sign bit set, magnitude 000 ("-0")
  CHECK(codes[2] == 0x7);  // shift3 + shift1
  CHECK(code_to_string(codes[1]) == "-0");

  Int32Tensor bad({1});
  bad.data = {5};  // APoT cannot express 5
  CHECK_THROWS_AS(encode(bad, apot), NotALevel);
}

TEST_CASE("encode/decode identity over every level of every scheme") {
  for (auto kind : {SchemeKind::QKeras, SchemeKind::MSQ, SchemeKind::APoT}) {
    CAPTURE(to_string(kind));
    PoTScheme scheme = make_scheme(kind);
    QuantLevelSet set = generate_levels(scheme);
    for (const QuantLevel &lv : set.levels) {
      Int32Tensor t({1});
      t.data = {lv.pot_int};
      auto codes = encode(t, scheme);
      REQUIRE(decode_pot_int(kind, codes[0]) == lv.pot_int);
    }
  }
}

TEST_CASE("pack examples") {
  CHECK(pack({0x3, 0x7}) == std::vector<std::uint8_t>{0x73});
  CHECK(pack({}).empty());
  auto bytes = pack({0x1, 0x2, 0x3, 0x4, 0x5});
  REQUIRE(bytes.size() == 3);
  CHECK(bytes[0] == 0x21);
  CHECK(bytes[1] == 0x43);
  CHECK(bytes[2] == 0x05);  // trailing high nibble is zero
}

TEST_CASE("pack/unpack round-trips, odd lengths included") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = rng() % 257;
    std::vector<std::uint8_t> codes(n);
    for (auto &c : codes) c = static_cast<std::uint8_t>(rng() & 0xF);
    auto bytes = pack(codes);
    REQUIRE(bytes.size() == (n + 1) / 2);
    REQUIRE(unpack(bytes, static_cast<std::int64_t>(n)) == codes);
    REQUIRE(pack(unpack(bytes, static_cast<std::int64_t>(n))) == bytes);
  }
  CHECK_THROWS_AS(unpack({0x21}, 3), ShapeMismatch);
}

TEST_CASE("prep_layer bundles correction, encoding and packing") {
  PoTScheme apot = make_scheme(SchemeKind::APoT);
  QuantLevelSet set = generate_levels(apot);
  Int8Tensor q = full_range_filter(set);
  Int32Tensor bias({1});
  bias.data = {127};
  PrepResult prep = prep_layer(q, unit_params(1), bias, apot);
  CHECK(prep.packed.bytes.size() == (set.levels.size() + 1) / 2);
  CHECK(prep.packed.correction_factor[0] == 127.0 / 10.0);
  CHECK(prep.bias[0] == 10);  // 127 / (127/10)
  auto codes = unpack(prep.packed.bytes, prep.packed.element_count());
  for (std::size_t i = 0; i < set.levels.size(); ++i)
    CHECK(decode_pot_int(SchemeKind::APoT, codes[i]) == set.levels[i].pot_int);
}
