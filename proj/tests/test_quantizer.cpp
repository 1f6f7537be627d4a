#include <doctest.h>

#include <cmath>
#include <random>

#include "potacc/quantizer.hpp"
#include "potacc/schemes.hpp"

using namespace potacc;

TEST_CASE("rounding helpers") {
  CHECK(round_half_away(0.5) == 1);
  CHECK(round_half_away(-0.5) == -1);
  CHECK(round_half_away(2.5) == 3);
  CHECK(round_half_even(0.5) == 0);
  CHECK(round_half_even(1.5) == 2);
  CHECK(round_half_even(2.5) == 2);
  CHECK(round_half_even(-2.5) == -2);
}

TEST_CASE("APoT pot_float weights reproduce the int8 level row") {
  QuantLevelSet set = generate_levels(make_scheme(SchemeKind::APoT));
  FloatTensor w({1, static_cast<int>(set.levels.size())});
  for (std::size_t i = 0; i < set.levels.size(); ++i)
    w[i] = set.levels[i].pot_float.to_double();
  auto [q, params] = quantize_weights(w, Granularity::PerLayer);
  CHECK(params.weight_scales.size() == 1);
  CHECK(params.weight_scales[0] == doctest::Approx(0.625 / 127.0).epsilon(1e-15));
  for (std::size_t i = 0; i < set.levels.size(); ++i) {
    CAPTURE(i);
    CHECK(q[i] == set.levels[i].int8);  // e.g. 0.1875 -> 38
  }
}

TEST_CASE("single weight maps to 127, zeros map to zero") {
  FloatTensor w({1, 1});
  w[0] = 1.0;
  auto [q, params] = quantize_weights(w, Granularity::PerLayer);
  CHECK(params.weight_scales[0] == doctest::Approx(1.0 / 127.0));
  CHECK(q[0] == 127);

  FloatTensor w2({1, 3});
  w2.data = {0.5, 0.0, -0.5};
  auto [q2, p2] = quantize_weights(w2, Granularity::PerLayer);
  CHECK(q2[0] == 127);
  CHECK(q2[1] == 0);
  CHECK(q2[2] == -127);
}

TEST_CASE("per-filter groups scale independently") {
  FloatTensor w({2, 2});
  w.data = {1.0, 0.5, 0.25, 0.125};
  auto [q, params] = quantize_weights(w, Granularity::PerFilter);
  REQUIRE(params.weight_scales.size() == 2);
  CHECK(params.weight_scales[0] == doctest::Approx(1.0 / 127.0));
  CHECK(params.weight_scales[1] == doctest::Approx(0.25 / 127.0));
  CHECK(q[0] == 127);
  CHECK(q[1] == 64);  // 63.5 rounds away from zero
  CHECK(q[2] == 127);
  CHECK(q[3] == 64);
}

TEST_CASE("all-zero scale group is rejected") {
  FloatTensor w({2, 2});
  w.data = {1.0, 0.5, 0.0, 0.0};
  CHECK_THROWS_AS(quantize_weights(w, Granularity::PerFilter), AllZeroGroup);
  CHECK_NOTHROW(quantize_weights(w, Granularity::PerLayer));
}

TEST_CASE("dequantization error bound and range") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    FloatTensor w({4, 16});
    for (auto &v : w.data)
      v = (static_cast<double>(rng() % 20001) - 10000.0) / 3000.0;
    auto [q, params] = quantize_weights(w, Granularity::PerFilter);
    for (std::int64_t i = 0; i < w.size(); ++i) {
      double s = params.weight_scales[i / 16];
      REQUIRE(std::abs(s * q[i] - w[i]) <= s / 2 + 1e-12);
      REQUIRE(q[i] >= -127);
      REQUIRE(q[i] <= 127);
    }
  }
}

TEST_CASE("scaling a group by lambda scales S_W and keeps q_W") {
  std::mt19937_64 rng(21);
  FloatTensor w({1, 32});
  for (auto &v : w.data)
    v = (static_cast<double>(rng() % 2001) - 1000.0) / 500.0;
  auto [q1, p1] = quantize_weights(w, Granularity::PerLayer);
  const double lambda = 3.25;  // exact in binary
  FloatTensor scaled = w;
  for (auto &v : scaled.data) v *= lambda;
  auto [q2, p2] = quantize_weights(scaled, Granularity::PerLayer);
  CHECK(p2.weight_scales[0] == doctest::Approx(lambda * p1.weight_scales[0]));
  for (std::int64_t i = 0; i < w.size(); ++i) REQUIRE(q1[i] == q2[i]);
}

TEST_CASE("expand_per_layer_scale duplicates the scale") {
  QuantParams p;
  p.weight_scales = {0.01};
  p.activation_scale = 0.5;
  QuantParams e = expand_per_layer_scale(p, 3);
  CHECK(e.weight_scales == std::vector<double>{0.01, 0.01, 0.01});
  for (int f = 0; f < 3; ++f)
    CHECK(e.bias_scale(f) == doctest::Approx(0.01 * 0.5));

  QuantParams one = expand_per_layer_scale(p, 1);
  CHECK(one.weight_scales == std::vector<double>{0.01});

  CHECK_THROWS_AS(expand_per_layer_scale(e, 4), ConfigInvalid);
}
