#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "potacc/model_io.hpp"
#include "potacc/schemes.hpp"
#include "potacc/shift_pe.hpp"
#include "potacc/sim.hpp"

using namespace potacc;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------
// helpers

std::int64_t parse_size(const std::string &text) {
  if (text.empty()) throw ConfigInvalid("empty size value");
  std::size_t pos = 0;
  double v = std::stod(text, &pos);
  std::string suffix = text.substr(pos);
  if (suffix == "" || suffix == "B") return static_cast<std::int64_t>(v);
  if (suffix == "K" || suffix == "k" || suffix == "KB")
    return static_cast<std::int64_t>(v * 1024);
  if (suffix == "M" || suffix == "m" || suffix == "MB")
    return static_cast<std::int64_t>(v * 1024 * 1024);
  throw ConfigInvalid("bad size suffix in '" + text + "' (use K or M)");
}

std::vector<std::int64_t> parse_size_list(const std::string &text) {
  std::vector<std::int64_t> values;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) values.push_back(parse_size(tok));
  if (values.empty()) throw ConfigInvalid("no values in '" + text + "'");
  return values;
}

// Flat TOML subset for accelerator config files: key = value per line,
// '#' comments, bools, numbers, quoted strings. An optional `preset` key
// names the base config; other keys override its fields.
AccelConfig load_accel_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("cannot open accel config '" + path + "'");
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t\r"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
      return s;
    };
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigInvalid(path + ":" + std::to_string(lineno) +
                          ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    entries.emplace_back(key, value);
  }

  AccelConfig cfg;
  for (const auto &[key, value] : entries)
    if (key == "preset") cfg = accel_preset(value);
  for (const auto &[key, value] : entries) {
    auto as_bool = [&, k = key, v = value] {
      if (v == "true") return true;
      if (v == "false") return false;
      throw ConfigInvalid(path + ": " + k + " expects true/false");
    };
    if (key == "preset") continue;
    else if (key == "name") cfg.name = value;
    else if (key == "gemm_units") cfg.gemm_units = std::stoi(value);
    else if (key == "pes_per_unit") cfg.pes_per_unit = std::stoi(value);
    else if (key == "outputs_per_unit") cfg.outputs_per_unit = std::stoi(value);
    else if (key == "gact_bytes") cfg.gact_bytes = parse_size(value);
    else if (key == "lwgt_bytes_per_unit") cfg.lwgt_bytes_per_unit = parse_size(value);
    else if (key == "lact_bytes") cfg.lact_bytes = parse_size(value);
    else if (key == "weight_bits") cfg.weight_bits = std::stoi(value);
    else if (key == "freq_mhz") cfg.freq_mhz = std::stod(value);
    else if (key == "dma_channels") cfg.dma_channels = std::stoi(value);
    else if (key == "bw_cpu_dma") cfg.bw_cpu_dma = std::stod(value);
    else if (key == "bw_dma_acc") cfg.bw_dma_acc = std::stod(value);
    else if (key == "weight_copy_opt") cfg.weight_copy_opt = as_bool();
    else if (key == "dma_preload") cfg.dma_preload = as_bool();
    else if (key == "overlap_store") cfg.overlap_store = as_bool();
    else throw ConfigInvalid(path + ": unknown key '" + key + "'");
  }
  validate_config(cfg);
  return cfg;
}

AccelConfig resolve_accel(const std::string &spec) {
  for (const std::string &name : accel_preset_names())
    if (spec == name) return accel_preset(spec);
  return load_accel_file(spec);
}

void write_text(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigInvalid("cannot write '" + path + "'");
  out << text;
}

Int8Tensor random_input(const Shape &shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Int8Tensor t(shape);
  for (auto &v : t.data) v = static_cast<std::int8_t>(rng() % 256 - 128);
  return t;
}

// ---------------------------------------------------------------------
// subcommand bodies

int cmd_levels(SchemeKind kind, bool as_json) {
  QuantLevelSet set = generate_levels(make_scheme(kind));
  if (as_json) {
    json out = json::array();
    for (const QuantLevel &lv : set.levels)
      out.push_back({{"pot_float", lv.pot_float.to_double()},
                     {"int8", lv.int8},
                     {"pot_int", lv.pot_int},
                     {"pot_int_e", code_to_string(lv.code)},
                     {"code", lv.code}});
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << "pot_float,int8,pot_int,pot_int_e\n";
    for (const QuantLevel &lv : set.levels)
      std::cout << lv.pot_float.to_decimal_string() << ',' << lv.int8 << ','
                << lv.pot_int << ',' << code_to_string(lv.code) << "\n";
  }
  return 0;
}

int cmd_quantize(const std::string &values_text, const std::string &in_path,
                 bool as_json) {
  std::vector<double> values;
  if (!in_path.empty()) {
    std::ifstream in(in_path);
    if (!in) throw ConfigInvalid("cannot open '" + in_path + "'");
    json j;
    in >> j;
    if (!j.is_array()) throw ConfigInvalid("expected a JSON array of numbers");
    for (const json &v : j) values.push_back(v.get<double>());
  } else {
    std::stringstream ss(values_text);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) values.push_back(std::stod(tok));
  }
  if (values.empty()) throw ConfigInvalid("no values to quantize");
  FloatTensor w({1, static_cast<int>(values.size())});
  w.data = values;
  auto [q, params] = quantize_weights(w, Granularity::PerLayer);
  if (as_json) {
    json out;
    out["scale"] = params.weight_scales[0];
    out["values"] = json::array();
    for (auto v : q.data) out["values"].push_back(static_cast<int>(v));
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << "scale," << params.weight_scales[0] << "\n";
    for (auto v : q.data) std::cout << static_cast<int>(v) << "\n";
  }
  return 0;
}

int cmd_pe_check(const std::string &scheme_name, bool as_json) {
  std::vector<SchemeKind> kinds;
  if (scheme_name.empty())
    kinds = {SchemeKind::QKeras, SchemeKind::MSQ, SchemeKind::APoT};
  else
    kinds = {scheme_kind_from_string(scheme_name)};

  bool all_ok = true;
  json results = json::array();
  for (SchemeKind kind : kinds) {
    const ShiftPEConfig cfg = shift_pe_config(kind);
    QuantLevelSet set = generate_levels(make_scheme(kind));
    std::int64_t cases = 0, mismatches = 0;
    std::int64_t max_abs_product = 0;
    for (const QuantLevel &lv : set.levels)
      for (int a = -128; a <= 127; ++a) {
        PEOutput out = pe_multiply(lv.code, static_cast<std::int8_t>(a), kind);
        std::int32_t got = accumulate(0, out);
        if (got != lv.pot_int * a) ++mismatches;
        max_abs_product = std::max<std::int64_t>(
            max_abs_product, std::abs(std::int64_t{out.product}));
        ++cases;
      }
    const bool width_ok = max_abs_product < (std::int64_t{1} << cfg.ipw);
    const bool ok = mismatches == 0 && width_ok;
    all_ok = all_ok && ok;
    if (as_json) {
      results.push_back({{"scheme", to_string(kind)},
                         {"cases", cases},
                         {"mismatches", mismatches},
                         {"max_abs_product", max_abs_product},
                         {"ipw", cfg.ipw},
                         {"pass", ok}});
    } else {
      std::cout << "pe-check " << to_string(kind) << ": " << cases
                << " level x activation cases, " << mismatches
                << " mismatches, max |product| " << max_abs_product
                << " (ipw " << cfg.ipw << ", bound "
                << (std::int64_t{1} << cfg.ipw)
                << "): " << (ok ? "PASS" : "FAIL") << "\n";
    }
  }
  if (as_json) std::cout << results.dump(2) << "\n";
  return all_ok ? 0 : 1;
}

int cmd_synth(const std::string &preset, const std::string &input_dims,
              const std::string &layer_spec, SchemeKind kind,
              std::uint64_t seed, const std::string &out_path, bool as_json) {
  SynthSpec spec;
  if (!preset.empty()) {
    spec = synth_preset(preset);
  } else {
    if (input_dims.empty() || layer_spec.empty())
      throw ConfigInvalid("need --preset, or both --input-dims and --layers");
    spec.name = "custom";
    Shape shape;
    std::stringstream ss(input_dims);
    std::string tok;
    while (std::getline(ss, tok, 'x'))
      if (!tok.empty()) shape.push_back(std::stoi(tok));
    spec.input_shape = shape;
    spec.layers = parse_layer_spec(layer_spec);
  }
  Model model = synth_model(spec, make_scheme(kind), seed);
  std::string blob = save_model(model, out_path);
  if (as_json) {
    std::cout << json{{"manifest", out_path},
                      {"blob", blob},
                      {"name", model.name},
                      {"layers", model.layers.size()}}
                     .dump(2)
              << "\n";
  } else {
    std::cout << "wrote " << out_path << " + " << blob << " ("
              << model.layers.size() << " layers, scheme " << to_string(kind)
              << ", seed " << seed << ")\n";
  }
  return 0;
}

int cmd_prep(const std::string &in_path, const std::string &out_path,
             const std::string &scheme_name, bool qkeras_c1, bool as_json) {
  Model model = load_model(in_path);
  if (!scheme_name.empty() &&
      scheme_kind_from_string(scheme_name) != model.scheme.kind)
    throw ConfigInvalid("model scheme is " + to_string(model.scheme.kind) +
                        ", not " + scheme_name);
  Model prepped = preprocess_model(model, qkeras_c1);
  std::string blob = save_model(prepped, out_path);
  std::int64_t packed_bytes = 0, int8_bytes = 0;
  for (const LayerSpec &l : prepped.layers) {
    if (l.kind == LayerKind::CpuOther) continue;
    packed_bytes += static_cast<std::int64_t>(l.weights_packed.bytes.size());
    int8_bytes += l.weights_packed.element_count();
  }
  if (as_json) {
    std::cout << json{{"manifest", out_path},
                      {"blob", blob},
                      {"packed_weight_bytes", packed_bytes},
                      {"int8_weight_bytes", int8_bytes}}
                     .dump(2)
              << "\n";
  } else {
    std::cout << "wrote " << out_path << " (weights " << int8_bytes
              << " int8 bytes -> " << packed_bytes << " packed bytes)\n";
  }
  return 0;
}

int cmd_run(const std::string &model_path, const std::string &engine_name,
            const std::string &input_path, std::int64_t random_seed,
            const std::string &out_path, bool as_json) {
  Model model = load_model(model_path);
  Engine engine;
  if (engine_name == "mult")
    engine = Engine::Mult;
  else if (engine_name == "shift")
    engine = Engine::Shift;
  else
    throw ConfigInvalid("engine must be 'mult' or 'shift'");

  Int8Tensor input;
  if (!input_path.empty()) {
    TensorFile t = load_tensor(input_path);
    input = std::move(t.tensor);
  } else if (random_seed >= 0) {
    input = random_input(model.input_shape,
                         static_cast<std::uint64_t>(random_seed));
  } else {
    throw ConfigInvalid("need --input FILE or --random-input SEED");
  }

  Int8Tensor output = run_model(model, input, engine);
  TensorFile out;
  out.tensor = std::move(output);
  if (model.layers.empty()) {
    out.scale = model.input_scale;
    out.zero_point = model.input_zero_point;
  } else {
    const LayerSpec &last = model.layers.back();
    out.scale = last.quant.output_scale;
    out.zero_point = last.quant.output_zero_point;
  }
  save_tensor(out, out_path);
  if (as_json) {
    std::cout << json{{"output", out_path},
                      {"shape", out.tensor.shape},
                      {"scale", out.scale},
                      {"zero_point", out.zero_point}}
                     .dump(2)
              << "\n";
  } else {
    std::cout << "wrote " << out_path << " shape [";
    for (std::size_t i = 0; i < out.tensor.shape.size(); ++i)
      std::cout << (i ? "," : "") << out.tensor.shape[i];
    std::cout << "]\n";
  }
  return 0;
}

int cmd_verify(const std::string &model_path, std::uint64_t seed,
               bool as_json) {
  Model model = load_model(model_path);
  if (model.stage != WeightStage::PotIntE)
    throw StageError("model is int8-stage; run `potacc prep` first");
  Int8Tensor input = random_input(model.input_shape, seed);
  std::vector<Int8Tensor> mult = run_model_trace(model, input, Engine::Mult);
  std::vector<Int8Tensor> shift = run_model_trace(model, input, Engine::Shift);

  std::int64_t compared = 0;
  for (std::size_t li = 0; li < model.layers.size(); ++li) {
    const Int8Tensor &a = mult[li];
    const Int8Tensor &b = shift[li];
    for (std::int64_t i = 0; i < a.size(); ++i) {
      if (a[i] != b[i]) {
        std::cerr << "mismatch at layer '" << model.layers[li].name
                  << "' flat index " << i
                  << ": mult=" << static_cast<int>(a[i])
                  << " shift=" << static_cast<int>(b[i]) << "\n";
        return 1;
      }
    }
    compared += a.size();
  }
  if (as_json) {
    std::cout << json{{"status", "ok"},
                      {"layers", model.layers.size()},
                      {"elements_compared", compared},
                      {"seed", seed}}
                     .dump(2)
              << "\n";
  } else {
    std::cout << "engines agree bit-exactly: " << model.layers.size()
              << " layers, " << compared << " outputs compared (seed " << seed
              << ")\n";
  }
  return 0;
}

void print_report_summary(const SimReport &r) {
  std::cout << "model " << r.model_name << " on " << r.config.name << " ("
            << r.config.gemm_units << " GEMM units, " << r.config.weight_bits
            << "-bit weights, " << r.config.freq_mhz << " MHz)\n"
            << "  acc_cycles total: " << r.total_acc_cycles << "\n"
            << "  T_conv+T_fc: " << r.t_conv_fc_ms
            << " ms, T_other: " << r.t_other_ms
            << " ms, total: " << r.total_ms << " ms\n";
}

int cmd_sim(const std::string &model_path, const std::string &accel_spec,
            const std::string &sweep_spec, const std::string &report_path,
            const std::string &csv_path, bool overlap_store, bool as_json,
            const std::vector<std::string> &overrides) {
  Model model = load_model(model_path);
  AccelConfig cfg = resolve_accel(accel_spec);
  cfg.overlap_store = overlap_store || cfg.overlap_store;
  for (const std::string &ov : overrides) {
    auto eq = ov.find('=');
    if (eq == std::string::npos)
      throw ConfigInvalid("override must be key=value: '" + ov + "'");
    std::string key = ov.substr(0, eq), value = ov.substr(eq + 1);
    if (key == "lwgt") cfg.lwgt_bytes_per_unit = parse_size(value);
    else if (key == "gact") cfg.gact_bytes = parse_size(value);
    else if (key == "lact") cfg.lact_bytes = parse_size(value);
    else if (key == "gemm_units") cfg.gemm_units = std::stoi(value);
    else if (key == "weight_bits") cfg.weight_bits = std::stoi(value);
    else if (key == "freq_mhz") cfg.freq_mhz = std::stod(value);
    else if (key == "weight_copy_opt") cfg.weight_copy_opt = value == "true";
    else if (key == "dma_preload") cfg.dma_preload = value == "true";
    else throw ConfigInvalid("unknown override '" + key + "'");
  }

  if (!sweep_spec.empty()) {
    auto eq = sweep_spec.find('=');
    if (eq == std::string::npos)
      throw ConfigInvalid("--sweep expects axis=v1,v2,...");
    SweepAxis axis = sweep_axis_from_string(sweep_spec.substr(0, eq));
    std::vector<std::int64_t> values =
        parse_size_list(sweep_spec.substr(eq + 1));
    auto reports = sweep(model, cfg, axis, values);
    std::string csv = sweep_to_csv(axis, values, reports);
    if (!csv_path.empty()) write_text(csv_path, csv);
    if (!report_path.empty()) {
      json arr = json::array();
      for (const auto &r : reports)
        arr.push_back(json::parse(report_to_json(r)));
      write_text(report_path, arr.dump(2) + "\n");
    }
    if (as_json) {
      json arr = json::array();
      for (std::size_t i = 0; i < reports.size(); ++i)
        arr.push_back({{"value", values[i]},
                       {"acc_cycles", reports[i].total_acc_cycles},
                       {"total_ms", reports[i].total_ms}});
      std::cout << arr.dump(2) << "\n";
    } else {
      std::cout << csv;
    }
    return 0;
  }

  SimReport report = simulate_model(model, cfg);
  if (!report_path.empty()) write_text(report_path, report_to_json(report));
  if (!csv_path.empty()) write_text(csv_path, report_to_csv(report));
  if (as_json)
    std::cout << report_to_json(report);
  else
    print_report_summary(report);
  return 0;
}

int cmd_energy(double p_inference, double p_idle, double time_s,
               const std::string &report_path, std::int64_t images,
               bool as_json) {
  double seconds = time_s;
  if (!report_path.empty()) {
    std::ifstream in(report_path);
    if (!in) throw ConfigInvalid("cannot open report '" + report_path + "'");
    json j;
    in >> j;
    seconds = j.at("totals").at("total_ms").get<double>() / 1000.0;
  }
  if (seconds < 0) throw ConfigInvalid("need --time-s or --report");
  double e = energy_joules_per_image(p_inference, p_idle, seconds, images);
  if (as_json)
    std::cout << json{{"joules_per_image", e},
                      {"power_delta_w", p_inference - p_idle},
                      {"time_s", seconds},
                      {"images", images}}
                     .dump(2)
              << "\n";
  else
    std::cout << e << "\n";
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"power-of-two quantized inference toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML config file (flags > env > file)")
      ->envname("POTACC_CONFIG");
  bool as_json = false;
  app.add_flag("--json", as_json, "machine-readable stdout")
      ->envname("POTACC_JSON");

  std::string scheme_name, in_path, out_path, model_path, accel_spec,
      engine_name, input_path, values_text, preset, input_dims, layer_spec,
      sweep_spec, report_path, csv_path;
  std::uint64_t seed = 0;
  std::int64_t random_seed = -1, images = 1;
  bool qkeras_c1 = false, overlap_store = false;
  double p_inference = 0, p_idle = 0, time_s = -1;
  std::vector<std::string> overrides;

  auto *levels = app.add_subcommand("levels", "print a scheme's level table");
  levels->add_option("--scheme", scheme_name, "qkeras|msq|apot")
      ->required()
      ->envname("POTACC_SCHEME");

  auto *quantize = app.add_subcommand(
      "quantize", "int8-quantize a vector of float weights");
  quantize->add_option("--values", values_text, "comma-separated floats");
  quantize->add_option("--in", in_path, "JSON array file");

  auto *prep = app.add_subcommand(
      "prep", "preprocess an int8-stage model into packed 4-bit codes");
  prep->add_option("--in", in_path, "input manifest")->required();
  prep->add_option("--out", out_path, "output manifest")->required();
  prep->add_option("--scheme", scheme_name,
                   "expected scheme (checked against the model)")
      ->envname("POTACC_SCHEME");
  prep->add_flag("--qkeras-c1", qkeras_c1,
                 "force C=1 for QKeras instead of the exact 127/128");

  auto *pe_check =
      app.add_subcommand("pe-check", "exhaustive shift-PE equivalence sweep");
  pe_check->add_option("--scheme", scheme_name, "limit to one scheme")
      ->envname("POTACC_SCHEME");

  auto *run = app.add_subcommand("run", "execute a model on one engine");
  run->add_option("--engine", engine_name, "mult|shift")
      ->required()
      ->envname("POTACC_ENGINE");
  run->add_option("--model", model_path, "model manifest")->required();
  run->add_option("--input", input_path, "input tensor file");
  run->add_option("--random-input", random_seed,
                  "generate a random input from this seed");
  run->add_option("--out", out_path, "output tensor file")->required();

  auto *verify =
      app.add_subcommand("verify", "run both engines and compare bit-exactly");
  verify->add_option("--model", model_path, "preprocessed model manifest")
      ->required();
  verify->add_option("--seed", seed, "input seed")->envname("POTACC_SEED");

  auto *sim = app.add_subcommand("sim", "simulate a model on an accelerator");
  sim->add_option("--model", model_path, "model manifest")->required();
  sim->add_option("--accel", accel_spec, "preset name or TOML file")
      ->required()
      ->envname("POTACC_ACCEL");
  sim->add_option("--sweep", sweep_spec,
                  "axis=v1,v2,... (lwgt|gact|gemm_units)");
  sim->add_option("--report", report_path, "write JSON report");
  sim->add_option("--csv", csv_path, "write CSV");
  sim->add_option("--set", overrides, "config override key=value");
  sim->add_flag("--overlap-store", overlap_store, "hide the store stage");

  auto *sweep_cmd = app.add_subcommand("sweep", "buffer/geometry sweep");
  sweep_cmd->add_option("--model", model_path, "model manifest")->required();
  sweep_cmd->add_option("--accel", accel_spec, "preset name or TOML file")
      ->required()
      ->envname("POTACC_ACCEL");
  std::string axis_name, values_list;
  sweep_cmd->add_option("--axis", axis_name, "lwgt|gact|gemm_units")
      ->required();
  sweep_cmd
      ->add_option("--values", values_list, "ascending, e.g. 128K,256K,1M")
      ->required();
  sweep_cmd->add_option("--report", report_path, "write JSON reports");
  sweep_cmd->add_option("--csv", csv_path, "write CSV");
  sweep_cmd->add_option("--set", overrides, "config override key=value");

  auto *energy =
      app.add_subcommand("energy", "joules/image from power readings");
  energy
      ->add_option("--p-inference", p_inference, "average inference power, W")
      ->required();
  energy->add_option("--p-idle", p_idle, "idle power, W")->required();
  energy->add_option("--time-s", time_s, "total inference time, seconds");
  energy->add_option("--report", report_path,
                     "take the time from a sim report");
  energy->add_option("--images", images, "images processed");

  auto *synth =
      app.add_subcommand("synth", "generate a synthetic PoT-quantized model");
  synth->add_option("--preset", preset,
                    "mobilenetv2|resnet18|inceptionv1|efficientnet-l|deit");
  synth->add_option("--input-dims", input_dims, "e.g. 1x32x32x3");
  synth->add_option("--layers", layer_spec,
                    "conv:F[:kK][:sS][:same|:valid],fc:F,...");
  synth->add_option("--scheme", scheme_name, "qkeras|msq|apot")
      ->required()
      ->envname("POTACC_SCHEME");
  synth->add_option("--seed", seed, "RNG seed")->envname("POTACC_SEED");
  synth->add_option("--out", out_path, "output manifest")->required();

  // global flags (--json, --config) also parse after the subcommand name
  for (CLI::App *sc : app.get_subcommands(
           [](const CLI::App *) { return true; }))
    sc->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << e.what() << "\n";
    return 1;
  }

  try {
    if (*levels)
      return cmd_levels(scheme_kind_from_string(scheme_name), as_json);
    if (*quantize) return cmd_quantize(values_text, in_path, as_json);
    if (*prep)
      return cmd_prep(in_path, out_path, scheme_name, qkeras_c1, as_json);
    if (*pe_check) return cmd_pe_check(scheme_name, as_json);
    if (*run)
      return cmd_run(model_path, engine_name, input_path, random_seed,
                     out_path, as_json);
    if (*verify) return cmd_verify(model_path, seed, as_json);
    if (*sim)
      return cmd_sim(model_path, accel_spec, sweep_spec, report_path, csv_path,
                     overlap_store, as_json, overrides);
    if (*sweep_cmd)
      return cmd_sim(model_path, accel_spec, axis_name + "=" + values_list,
                     report_path, csv_path, overlap_store, as_json, overrides);
    if (*energy)
      return cmd_energy(p_inference, p_idle, time_s, report_path, images,
                        as_json);
    if (*synth)
      return cmd_synth(preset, input_dims, layer_spec,
                       scheme_kind_from_string(scheme_name), seed, out_path,
                       as_json);
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
