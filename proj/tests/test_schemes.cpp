#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "potacc/schemes.hpp"

using namespace potacc;

namespace {

QuantLevelSet levels_for(SchemeKind kind) {
  return generate_levels(make_scheme(kind));
}

// Independent enumeration of the signed term-sum magnitudes.
std::set<int> enumerate_magnitudes(const PoTTermSpec &spec) {
  std::set<int> mags;
  if (spec.second_term_values.empty()) {
    for (int q0 : spec.first_term_values) mags.insert(q0);
  } else {
    for (int q0 : spec.first_term_values)
      for (int q1 : spec.second_term_values) mags.insert(q0 + q1);
  }
  return mags;
}

}  // namespace

TEST_CASE("scheme names round-trip") {
  for (auto kind : {SchemeKind::QKeras, SchemeKind::MSQ, SchemeKind::APoT})
    CHECK(scheme_kind_from_string(to_string(kind)) == kind);
  CHECK_THROWS_AS(scheme_kind_from_string("int8"), ConfigInvalid);
}

TEST_CASE("only 4-bit schemes are accepted") {
  CHECK_THROWS_AS(make_scheme(SchemeKind::APoT, 3), UnsupportedBitwidth);
  CHECK_THROWS_AS(make_scheme(SchemeKind::QKeras, 8), UnsupportedBitwidth);
  CHECK(make_scheme(SchemeKind::MSQ).bitwidth == 4);
}

TEST_CASE("term sets are the expected ones") {
  PoTTermSpec qk = term_spec(SchemeKind::QKeras);
  CHECK(qk.first_term_values == std::vector<int>{1, 2, 4, 8, 16, 32, 64, 128});
  CHECK(qk.second_term_values.empty());
  CHECK(qk.max_pot_int == 128);
  CHECK(qk.smallest_pot_float == Dyadic::pow2(8));

  PoTTermSpec msq = term_spec(SchemeKind::MSQ);
  CHECK(msq.first_term_values == std::vector<int>{0, 1, 2, 4});
  CHECK(msq.second_term_values == std::vector<int>{0, 4});
  CHECK(msq.max_pot_int == 8);

  PoTTermSpec apot = term_spec(SchemeKind::APoT);
  CHECK(apot.first_term_values == std::vector<int>{0, 1, 4, 8});
  CHECK(apot.second_term_values == std::vector<int>{0, 2});
  CHECK(apot.max_pot_int == 10);
}

TEST_CASE("APoT level table is reproduced exactly") {
  QuantLevelSet set = levels_for(SchemeKind::APoT);
  REQUIRE(set.levels.size() == 15);

  const double pot_float[15] = {-0.625, -0.5,  -0.375, -0.25, -0.1875,
                                -0.125, -0.0625, 0,     0.0625, 0.125,
                                0.1875, 0.25,  0.375,  0.5,   0.625};
  const int int8[15] = {-127, -102, -76, -51, -38, -25, -13, 0,
                        13,   25,   38,  51,  76,  102, 127};
  const int pot_int[15] = {-10, -8, -6, -4, -3, -2, -1, 0, 1, 2, 3, 4, 6, 8, 10};
  const char *codes[15] = {"-7", "-6", "-5", "-4", "-1", "-3", "-0", "2",
                           "0",  "3",  "1",  "4",  "5",  "6",  "7"};
  const std::uint8_t raw[15] = {0xF, 0xE, 0xD, 0xC, 0x9, 0xB, 0x8, 0x2,
                                0x0, 0x3, 0x1, 0x4, 0x5, 0x6, 0x7};

  for (int i = 0; i < 15; ++i) {
    CAPTURE(i);
    CHECK(set.levels[i].pot_float.to_double() == pot_float[i]);
    CHECK(set.levels[i].int8 == int8[i]);
    CHECK(set.levels[i].pot_int == pot_int[i]);
    CHECK(code_to_string(set.levels[i].code) == codes[i]);
    CHECK(set.levels[i].code == raw[i]);
  }
}

TEST_CASE("APoT pot_floats equal the two-term sums with k=2, n=1") {
  // q0 in {0, 1/2, 1/4, 1/16}, q1 in {0, 1/8}, signed
  std::set<double> expected;
  for (double q0 : {0.0, 0.5, 0.25, 0.0625})
    for (double q1 : {0.0, 0.125}) {
      expected.insert(q0 + q1);
      expected.insert(-(q0 + q1));
    }
  std::set<double> got;
  for (const QuantLevel &lv : levels_for(SchemeKind::APoT).levels)
    got.insert(lv.pot_float.to_double());
  CHECK(got == expected);
}

TEST_CASE("QKeras level set: 16 levels, no zero") {
  QuantLevelSet set = levels_for(SchemeKind::QKeras);
  REQUIRE(set.levels.size() == 16);
  std::set<int> mags;
  for (const QuantLevel &lv : set.levels) {
    CHECK(lv.pot_int != 0);
    mags.insert(std::abs(lv.pot_int));
  }
  CHECK(mags == std::set<int>{1, 2, 4, 8, 16, 32, 64, 128});
  // shift codes are the plain 3-bit exponent
  for (const QuantLevel &lv : set.levels) {
    int shift = static_cast<int>(std::log2(std::abs(lv.pot_int)));
    CHECK((lv.code & 0x7) == shift);
    CHECK(((lv.code & 0x8) != 0) == (lv.pot_int < 0));
  }
}

TEST_CASE("MSQ magnitude set from brute-force enumeration") {
  // oracle: all q0+q1 sums over the term sets; the sign applies to the
  // sum, so 13 signed levels (3 and 7 unreachable)
  std::set<int> mags = enumerate_magnitudes(term_spec(SchemeKind::MSQ));
  CHECK(mags == std::set<int>{0, 1, 2, 4, 5, 6, 8});

  QuantLevelSet set = levels_for(SchemeKind::MSQ);
  REQUIRE(set.levels.size() == 13);
  std::set<int> got;
  for (const QuantLevel &lv : set.levels) got.insert(std::abs(lv.pot_int));
  CHECK(got == mags);
}

TEST_CASE("every nonzero term value is an exact power of two") {
  for (auto kind : {SchemeKind::QKeras, SchemeKind::MSQ, SchemeKind::APoT}) {
    PoTTermSpec spec = term_spec(kind);
    for (int v : spec.first_term_values)
      CHECK((v == 0 || (v & (v - 1)) == 0));
    for (int v : spec.second_term_values)
      CHECK((v == 0 || (v & (v - 1)) == 0));
  }
}

TEST_CASE("every scheme: orderings agree and extremes hit +/-127") {
  for (auto kind : {SchemeKind::QKeras, SchemeKind::MSQ, SchemeKind::APoT}) {
    CAPTURE(to_string(kind));
    QuantLevelSet set = levels_for(kind);
    const PoTTermSpec spec = term_spec(kind);
    CHECK(set.levels.front().int8 == -127);
    CHECK(set.levels.back().int8 == 127);
    for (std::size_t i = 1; i < set.levels.size(); ++i) {
      CHECK(set.levels[i - 1].pot_float < set.levels[i].pot_float);
      CHECK(set.levels[i - 1].int8 < set.levels[i].int8);
      CHECK(set.levels[i - 1].pot_int < set.levels[i].pot_int);
    }
    for (const QuantLevel &lv : set.levels) {
      CHECK(std::abs(lv.pot_int) <= spec.max_pot_int);
      // pot_float = pot_int * smallest nonzero pot_float term
      CHECK(lv.pot_float == spec.smallest_pot_float * lv.pot_int);
    }
  }
}

TEST_CASE("generate_levels is deterministic") {
  for (auto kind : {SchemeKind::QKeras, SchemeKind::MSQ, SchemeKind::APoT}) {
    QuantLevelSet a = generate_levels(make_scheme(kind));
    QuantLevelSet b = generate_levels(make_scheme(kind));
    REQUIRE(a.levels.size() == b.levels.size());
    for (std::size_t i = 0; i < a.levels.size(); ++i) {
      CHECK(a.levels[i].pot_int == b.levels[i].pot_int);
      CHECK(a.levels[i].int8 == b.levels[i].int8);
      CHECK(a.levels[i].code == b.levels[i].code);
    }
  }
}

TEST_CASE("nearest_level picks the closest pot_float") {
  QuantLevelSet apot = levels_for(SchemeKind::APoT);
  CHECK(nearest_level(apot, 0.625).pot_float.to_double() == 0.625);
  CHECK(nearest_level(apot, 0.0).pot_int == 0);
  // |0.22-0.1875| = 0.0325 > |0.22-0.25| = 0.03; oracle: scan all levels
  {
    double best = 1e9, best_lv = 0;
    for (const QuantLevel &lv : apot.levels) {
      double d = std::abs(lv.pot_float.to_double() - 0.22);
      if (d < best) best = d, best_lv = lv.pot_float.to_double();
    }
    CHECK(best_lv == 0.25);
    CHECK(nearest_level(apot, 0.22).pot_float.to_double() == 0.25);
  }
}

TEST_CASE("nearest_level tie-breaking: toward zero, then positive") {
  QuantLevelSet apot = levels_for(SchemeKind::APoT);
  // midpoint between 0.25 and 0.375 -> smaller magnitude wins
  CHECK(nearest_level(apot, 0.3125).pot_float.to_double() == 0.25);
  // exactly between -x and +x -> positive wins (query 0 is equidistant
  // from -0.0625 and 0.0625, but zero level is exact anyway)
  CHECK(nearest_level(apot, 0.03125).pot_int == 0);
  QuantLevelSet qk = levels_for(SchemeKind::QKeras);
  // zero is not a QKeras level; halfway between -2^-8 and 2^-8
  CHECK(qk.levels.size() == 16);
  CHECK(nearest_level(qk, 0.0).pot_int == 1);
}

TEST_CASE("dyadic decimal strings are exact") {
  CHECK(Dyadic(3, 4).to_decimal_string() == "0.1875");
  CHECK(Dyadic(-5, 3).to_decimal_string() == "-0.625");
  CHECK(Dyadic(0, 0).to_decimal_string() == "0");
  CHECK(Dyadic(128, 0).to_decimal_string() == "128");
  CHECK(Dyadic(1, 8).to_decimal_string() == "0.00390625");
}
