#include "potacc/weight_prep.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <string>

namespace potacc {

namespace {

std::int32_t round_half_away_i64(std::int64_t num, std::int64_t den) {
  // round(num/den), halves away from zero; den > 0
  std::int64_t n = num >= 0 ? num : -num;
  std::int64_t q = (2 * n + den) / (2 * den);
  return static_cast<std::int32_t>(num >= 0 ? q : -q);
}

// int8 -> pot_int lookup for one grid anchor. A scale group quantized by
// max|w|/127 puts its values on the grid round(pot_int * 127 / anchor)
// where anchor is the group's own largest |pot_int| level, which is the
// scheme maximum only when the group uses its top level. Entries farther
// than 1 from every grid point are marked invalid.
struct AnchorGrid {
  int anchor;
  std::array<std::int16_t, 255> pot;  // index v+127; INT16_MIN = invalid
};

std::vector<AnchorGrid> build_grids(const QuantLevelSet &levels) {
  std::vector<int> anchors;
  for (const QuantLevel &lv : levels.levels)
    if (lv.pot_int > 0) anchors.push_back(lv.pot_int);
  std::sort(anchors.rbegin(), anchors.rend());

  std::vector<AnchorGrid> grids;
  for (int anchor : anchors) {
    AnchorGrid g;
    g.anchor = anchor;
    g.pot.fill(INT16_MIN);
    for (int v = -127; v <= 127; ++v) {
      int best_dist = 2, best_pot = 0;
      for (const QuantLevel &lv : levels.levels) {
        if (std::abs(lv.pot_int) > anchor) continue;
        int grid_v =
            round_half_away_i64(std::int64_t{lv.pot_int} * 127, anchor);
        int dist = std::abs(grid_v - v);
        if (dist > 1) continue;
        if (dist < best_dist ||
            (dist == best_dist && std::abs(lv.pot_int) < std::abs(best_pot)))
          best_dist = dist, best_pot = lv.pot_int;
      }
      if (best_dist <= 1) g.pot[v + 127] = static_cast<std::int16_t>(best_pot);
    }
    grids.push_back(g);
  }
  return grids;
}

}  // namespace

ScaleCorrectResult scale_correct(const Int8Tensor &q_weights,
                                 const QuantParams &params,
                                 const Int32Tensor &bias,
                                 const PoTScheme &scheme,
                                 const ScaleCorrectOptions &opts) {
  const QuantLevelSet levels = generate_levels(scheme);
  const std::vector<AnchorGrid> grids = build_grids(levels);
  const int num_filters = q_weights.shape.empty() ? 1 : q_weights.shape[0];
  const int groups = static_cast<int>(params.weight_scales.size());
  if (groups != 1 && groups != num_filters)
    throw ShapeMismatch("weight scale count " + std::to_string(groups) +
                        " does not match filter count " +
                        std::to_string(num_filters));
  const std::int64_t group_len = q_weights.size() / groups;
  if (bias.size() != 0 && bias.size() != num_filters)
    throw ShapeMismatch("bias length does not match filter count");

  ScaleCorrectResult out;
  out.pot_int = Int32Tensor(q_weights.shape);
  out.params = params;
  out.correction.resize(groups);
  out.bias = bias;

  const bool force_c1 = opts.qkeras_c1 && scheme.kind == SchemeKind::QKeras;

  std::vector<std::int64_t> c_nums(groups), c_dens(groups);
  for (int g = 0; g < groups; ++g) {
    const std::int8_t *vals = &q_weights[g * group_len];
    std::int32_t *pots = &out.pot_int[g * group_len];

    // Largest-anchor grid that explains every value in the group. Values
    // of any genuine PoT-quantized group lie on a single grid, so failing
    // all anchors signals a non-PoT layer.
    const AnchorGrid *grid = nullptr;
    for (const AnchorGrid &cand : grids) {
      bool ok = true;
      for (std::int64_t i = 0; i < group_len && ok; ++i) {
        int v = vals[i];
        ok = v >= -127 && v <= 127 && cand.pot[v + 127] != INT16_MIN;
      }
      if (ok) {
        grid = &cand;
        break;
      }
    }
    if (!grid)
      throw NotAPoTWeight("scale group " + std::to_string(g) +
                          " holds values farther than 1 from every " +
                          to_string(scheme.kind) + " int8 level");

    int max_abs_v = 0, max_abs_pot = 0;
    for (std::int64_t i = 0; i < group_len; ++i) {
      pots[i] = grid->pot[vals[i] + 127];
      if (std::abs(static_cast<int>(vals[i])) > max_abs_v) {
        max_abs_v = std::abs(static_cast<int>(vals[i]));
        max_abs_pot = std::abs(pots[i]);
      }
    }

    // C = max|q_W| / max-matching |pot_int|; all-zero groups fall back
    // to the scheme's full-range factor.
    std::int64_t c_num = 127, c_den = levels.max_pot_int();
    if (max_abs_pot != 0) {
      c_num = max_abs_v;
      c_den = max_abs_pot;
    }
    if (force_c1) c_num = c_den = 1;
    c_nums[g] = c_num;
    c_dens[g] = c_den;
    out.correction[g] = static_cast<double>(c_num) / static_cast<double>(c_den);
    out.params.weight_scales[g] = params.weight_scales[g] * out.correction[g];
  }

  // q_b' = round(q_b / C) = round(q_b * c_den / c_num), exact in integers
  for (std::int64_t f = 0; f < bias.size(); ++f) {
    const int g = groups == 1 ? 0 : static_cast<int>(f);
    out.bias[f] = round_half_away_i64(
        static_cast<std::int64_t>(bias[f]) * c_dens[g], c_nums[g]);
  }
  return out;
}

std::vector<std::uint8_t> encode(const Int32Tensor &pot_int,
                                 const PoTScheme &scheme) {
  const QuantLevelSet levels = generate_levels(scheme);
  std::vector<std::uint8_t> codes(pot_int.size());
  for (std::int64_t i = 0; i < pot_int.size(); ++i) {
    const QuantLevel *lv = levels.find_pot_int(pot_int[i]);
    if (!lv)
      throw NotALevel(std::to_string(pot_int[i]) + " is not a " +
                      to_string(scheme.kind) + " pot_int level");
    codes[i] = lv->code;
  }
  return codes;
}

std::vector<std::uint8_t> pack(const std::vector<std::uint8_t> &codes) {
  std::vector<std::uint8_t> bytes((codes.size() + 1) / 2, 0);
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (i % 2 == 0)
      bytes[i / 2] = codes[i] & 0xF;
    else
      bytes[i / 2] |= static_cast<std::uint8_t>((codes[i] & 0xF) << 4);
  }
  return bytes;
}

std::vector<std::uint8_t> unpack(const std::vector<std::uint8_t> &bytes,
                                 std::int64_t element_count) {
  if (static_cast<std::int64_t>(bytes.size()) != (element_count + 1) / 2)
    throw ShapeMismatch("packed byte count " + std::to_string(bytes.size()) +
                        " does not match element count " +
                        std::to_string(element_count));
  std::vector<std::uint8_t> codes(element_count);
  for (std::int64_t i = 0; i < element_count; ++i)
    codes[i] = (i % 2 == 0) ? (bytes[i / 2] & 0xF) : (bytes[i / 2] >> 4);
  return codes;
}

PrepResult prep_layer(const Int8Tensor &q_weights, const QuantParams &params,
                      const Int32Tensor &bias, const PoTScheme &scheme,
                      const ScaleCorrectOptions &opts) {
  ScaleCorrectResult corrected =
      scale_correct(q_weights, params, bias, scheme, opts);
  PrepResult out;
  out.packed.scheme = scheme;
  out.packed.shape = q_weights.shape;
  out.packed.bytes = pack(encode(corrected.pot_int, scheme));
  out.packed.corrected_scales = corrected.params.weight_scales;
  out.packed.correction_factor = corrected.correction;
  out.params = std::move(corrected.params);
  out.bias = std::move(corrected.bias);
  return out;
}

}  // namespace potacc
