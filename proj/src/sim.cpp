#include "potacc/sim.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

namespace potacc {

using nlohmann::json;

AccelConfig accel_preset(const std::string &name) {
  AccelConfig cfg;
  cfg.name = name;
  if (name == "pynq-z2") {
    cfg.gemm_units = 4;
    cfg.freq_mhz = 200.0;
    cfg.weight_bits = 4;
    cfg.bw_cpu_dma = 1.0;
    cfg.bw_dma_acc = 16.0;
    cfg.weight_copy_opt = true;
    cfg.dma_preload = true;
  } else if (name == "kria") {
    cfg.gemm_units = 8;
    cfg.freq_mhz = 250.0;
    cfg.weight_bits = 4;
    cfg.bw_cpu_dma = 2.0;
    cfg.bw_dma_acc = 32.0;
    cfg.weight_copy_opt = true;
    cfg.dma_preload = true;
  } else if (name == "vmac-pynq-z2") {
    cfg.gemm_units = 4;
    cfg.freq_mhz = 200.0;
    cfg.weight_bits = 8;
    cfg.bw_cpu_dma = 1.0;
    cfg.bw_dma_acc = 16.0;
    cfg.weight_copy_opt = false;
    cfg.dma_preload = false;
  } else {
    std::string names;
    for (const auto &n : accel_preset_names()) names += " " + n;
    throw ConfigInvalid("unknown accelerator preset '" + name +
                        "' (valid:" + names + ")");
  }
  return cfg;
}

std::vector<std::string> accel_preset_names() {
  return {"pynq-z2", "kria", "vmac-pynq-z2"};
}

void validate_config(const AccelConfig &cfg) {
  if (cfg.gemm_units != 2 && cfg.gemm_units != 4 && cfg.gemm_units != 8 &&
      cfg.gemm_units != 16)
    throw ConfigInvalid("gemm_units must be 2, 4, 8 or 16");
  if (cfg.pes_per_unit != 64)
    throw ConfigInvalid("pes_per_unit is fixed at 64");
  if (cfg.outputs_per_unit != 16)
    throw ConfigInvalid("outputs_per_unit is fixed at 16");
  if (cfg.weight_bits != 4 && cfg.weight_bits != 8)
    throw ConfigInvalid("weight_bits must be 4 or 8");
  if (cfg.gact_bytes <= 0 || cfg.lwgt_bytes_per_unit <= 0 ||
      cfg.lact_bytes <= 0)
    throw ConfigInvalid("buffer capacities must be positive");
  if (!(cfg.freq_mhz > 0))
    throw ConfigInvalid("freq_mhz must be positive");
  if (cfg.dma_channels != 4)
    throw ConfigInvalid("dma_channels is fixed at 4");
  if (!(cfg.bw_cpu_dma > 0) || !(cfg.bw_dma_acc > 0))
    throw ConfigInvalid("bandwidths must be positive");
}

double cycles_to_ms(std::uint64_t cycles, const AccelConfig &cfg) {
  return static_cast<double>(cycles) / (cfg.freq_mhz * 1000.0);
}

namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) {
  return (a + b - 1) / b;
}

std::uint64_t transfer_cycles(std::int64_t bytes, double bw) {
  if (bytes <= 0) return 0;
  return static_cast<std::uint64_t>(
      std::ceil(static_cast<double>(bytes) / bw));
}

// Handshake costs of swapping double-buffered tiles.
constexpr std::uint64_t kGactSwapCycles = 64;
constexpr std::uint64_t kLactChunkCycles = 4;

}  // namespace

LayerSim simulate_layer(const LayerSpec &layer, const AccelConfig &cfg) {
  validate_config(cfg);
  LayerSim sim;
  sim.name = layer.name;
  sim.kind = layer.kind;
  if (layer.kind == LayerKind::CpuOther) {
    if (layer.cpu_time_ms < 0)
      throw MissingCpuTime("cpu layer '" + layer.name +
                           "' has no cpu_time_ms in the model file");
    sim.cpu_time_ms = layer.cpu_time_ms;
    return sim;
  }

  // Lowered MM dims: weights [F x K], activations [K x P].
  std::int64_t pixels;
  if (layer.kind == LayerKind::Conv2D) {
    if (layer.input_shape.size() != 4)
      throw UnsupportedLayer("conv layer '" + layer.name +
                             "' lacks an NHWC input shape");
    ConvGeometry g =
        conv_geometry(layer.input_shape[1], layer.input_shape[2],
                      layer.kernel_h, layer.kernel_w, layer.stride,
                      layer.padding);
    if (g.out_h <= 0 || g.out_w <= 0)
      throw UnsupportedLayer("conv layer '" + layer.name +
                             "' does not fit its input");
    pixels = std::int64_t{layer.input_shape[0]} * g.out_h * g.out_w;
  } else {
    if (layer.input_shape.size() != 2)
      throw UnsupportedLayer("fc layer '" + layer.name +
                             "' lacks a [rows,K] input shape");
    pixels = layer.input_shape[0];
  }
  const std::int64_t dot = layer.dot_length();
  const std::int64_t filters = layer.filters;
  sim.pixels = pixels;
  sim.dot = dot;
  sim.filters = filters;

  sim.act_bytes = pixels * dot;  // post-im2col int8 matrix
  sim.out_bytes = pixels * filters;
  const std::int64_t elems = filters * dot;
  sim.wgt_bytes = cfg.weight_bits == 4 ? ceil_div(elems, 2) : elems;

  // Weight distribution: without the copy optimization every unit receives
  // the full weight stream; with it each unit only gets its own blocks.
  sim.wgt_per_unit_bytes = cfg.weight_copy_opt
                               ? ceil_div(sim.wgt_bytes, cfg.gemm_units)
                               : sim.wgt_bytes;
  sim.send_wgt_bytes =
      cfg.weight_copy_opt ? sim.wgt_bytes
                          : sim.wgt_bytes * cfg.gemm_units;
  sim.lwgt_passes = static_cast<int>(
      std::max<std::int64_t>(1, ceil_div(sim.wgt_per_unit_bytes,
                                         cfg.lwgt_bytes_per_unit)));
  sim.lwgt_refetch_count = sim.lwgt_passes - 1;
  sim.wgt_streamed_bytes = sim.send_wgt_bytes * sim.lwgt_passes;

  // Compute: each unit retires one 64-lane dot chunk per cycle and walks
  // its outputs in groups of outputs_per_unit.
  const std::int64_t group_cycles =
      cfg.outputs_per_unit * ceil_div(dot, cfg.pes_per_unit);
  const std::int64_t groups = pixels * ceil_div(filters, cfg.outputs_per_unit);
  sim.compute_cycles = static_cast<std::uint64_t>(
      ceil_div(groups * group_cycles, cfg.gemm_units));

  // Refetch passes beyond the first stall the accelerator for a full
  // re-stream; the first delivery is the send_wgt stage.
  sim.stall_wgt_cycles =
      static_cast<std::uint64_t>(sim.lwgt_refetch_count) *
      transfer_cycles(sim.send_wgt_bytes, cfg.bw_dma_acc);

  sim.overhead_cycles =
      static_cast<std::uint64_t>(ceil_div(sim.act_bytes, cfg.gact_bytes)) *
          kGactSwapCycles +
      static_cast<std::uint64_t>(ceil_div(sim.act_bytes, cfg.lact_bytes)) *
          kLactChunkCycles;
  sim.acc_cycles =
      sim.compute_cycles + sim.stall_wgt_cycles + sim.overhead_cycles;

  sim.prep_act = layer.kind == LayerKind::Conv2D
                     ? transfer_cycles(sim.act_bytes, cfg.bw_cpu_dma)
                     : 0;  // FC skips im2col
  sim.load_act = transfer_cycles(sim.act_bytes, cfg.bw_cpu_dma);
  sim.load_wgt =
      cfg.dma_preload ? 0 : transfer_cycles(sim.wgt_bytes, cfg.bw_cpu_dma);
  sim.send_act = transfer_cycles(sim.act_bytes, cfg.bw_dma_acc);
  sim.send_wgt = transfer_cycles(sim.send_wgt_bytes, cfg.bw_dma_acc);
  sim.store = transfer_cycles(sim.out_bytes, cfg.bw_cpu_dma);

  const double macs = static_cast<double>(pixels) * dot * filters;
  sim.pe_utilization =
      macs / (static_cast<double>(sim.acc_cycles) * cfg.gemm_units *
              cfg.pes_per_unit);
  return sim;
}

SimReport simulate_model(const Model &model, const AccelConfig &cfg) {
  validate_config(cfg);
  SimReport report;
  report.config = cfg;
  report.model_name = model.name;
  for (const LayerSpec &layer : model.layers) {
    LayerSim sim = simulate_layer(layer, cfg);
    if (layer.kind == LayerKind::CpuOther) {
      report.t_other_ms += sim.cpu_time_ms;
    } else {
      report.total_acc_cycles += sim.acc_cycles;
      report.total_cycles += sim.total_cycles(cfg.overlap_store);
    }
    report.layers.push_back(std::move(sim));
  }
  report.t_conv_fc_ms = cycles_to_ms(report.total_cycles, cfg);
  report.total_ms = report.t_conv_fc_ms + report.t_other_ms;
  return report;
}

SweepAxis sweep_axis_from_string(const std::string &name) {
  if (name == "lwgt") return SweepAxis::Lwgt;
  if (name == "gact") return SweepAxis::Gact;
  if (name == "gemm_units") return SweepAxis::GemmUnits;
  throw ConfigInvalid("unknown sweep axis '" + name +
                      "' (valid: lwgt, gact, gemm_units)");
}

std::vector<SimReport> sweep(const Model &model, const AccelConfig &cfg,
                             SweepAxis axis,
                             const std::vector<std::int64_t> &values) {
  if (values.empty()) throw ConfigInvalid("sweep needs at least one value");
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] <= values[i - 1])
      throw ConfigInvalid("sweep values must be strictly ascending");

  constexpr std::int64_t kMinBuffer = 128 * 1024;
  std::vector<SimReport> reports;
  for (std::int64_t v : values) {
    AccelConfig c = cfg;
    switch (axis) {
      case SweepAxis::Lwgt:
        c.lwgt_bytes_per_unit = v;
        c.gact_bytes = kMinBuffer;
        break;
      case SweepAxis::Gact:
        c.gact_bytes = v;
        c.lwgt_bytes_per_unit = kMinBuffer;
        break;
      case SweepAxis::GemmUnits:
        c.gemm_units = static_cast<int>(v);
        break;
    }
    reports.push_back(simulate_model(model, c));
  }
  return reports;
}

double energy_joules_per_image(double p_inference_w, double p_idle_w,
                               double total_time_s, std::int64_t images) {
  if (p_idle_w < 0 || p_inference_w < p_idle_w)
    throw NegativePower("need p_inference >= p_idle >= 0, got " +
                        std::to_string(p_inference_w) + " / " +
                        std::to_string(p_idle_w));
  if (images < 1) throw ConfigInvalid("images must be >= 1");
  return (p_inference_w - p_idle_w) * total_time_s /
         static_cast<double>(images);
}

double energy_joules_per_image(const SimReport &report, double p_inference_w,
                               double p_idle_w, std::int64_t images) {
  return energy_joules_per_image(p_inference_w, p_idle_w,
                                 report.total_ms / 1000.0, images);
}

namespace {

json config_json(const AccelConfig &cfg) {
  return json{{"name", cfg.name},
              {"gemm_units", cfg.gemm_units},
              {"pes_per_unit", cfg.pes_per_unit},
              {"outputs_per_unit", cfg.outputs_per_unit},
              {"gact_bytes", cfg.gact_bytes},
              {"lwgt_bytes_per_unit", cfg.lwgt_bytes_per_unit},
              {"lact_bytes", cfg.lact_bytes},
              {"weight_bits", cfg.weight_bits},
              {"freq_mhz", cfg.freq_mhz},
              {"dma_channels", cfg.dma_channels},
              {"bw_cpu_dma", cfg.bw_cpu_dma},
              {"bw_dma_acc", cfg.bw_dma_acc},
              {"weight_copy_opt", cfg.weight_copy_opt},
              {"dma_preload", cfg.dma_preload},
              {"overlap_store", cfg.overlap_store}};
}

json layer_json(const LayerSim &l, const AccelConfig &cfg) {
  if (l.kind == LayerKind::CpuOther)
    return json{{"name", l.name},
                {"kind", to_string(l.kind)},
                {"cpu_time_ms", l.cpu_time_ms}};
  return json{{"name", l.name},
              {"kind", to_string(l.kind)},
              {"pixels", l.pixels},
              {"dot_length", l.dot},
              {"filters", l.filters},
              {"compute_cycles", l.compute_cycles},
              {"stall_wgt_cycles", l.stall_wgt_cycles},
              {"overhead_cycles", l.overhead_cycles},
              {"acc_cycles", l.acc_cycles},
              {"acc_ms", cycles_to_ms(l.acc_cycles, cfg)},
              {"prep_act", l.prep_act},
              {"load_act", l.load_act},
              {"load_wgt", l.load_wgt},
              {"send_act", l.send_act},
              {"send_wgt", l.send_wgt},
              {"store", l.store},
              {"act_bytes", l.act_bytes},
              {"out_bytes", l.out_bytes},
              {"wgt_bytes", l.wgt_bytes},
              {"wgt_per_unit_bytes", l.wgt_per_unit_bytes},
              {"send_wgt_bytes", l.send_wgt_bytes},
              {"wgt_streamed_bytes", l.wgt_streamed_bytes},
              {"lwgt_passes", l.lwgt_passes},
              {"lwgt_refetch_count", l.lwgt_refetch_count},
              {"pe_utilization", l.pe_utilization},
              {"total_cycles", l.total_cycles(cfg.overlap_store)},
              {"total_ms", cycles_to_ms(l.total_cycles(cfg.overlap_store), cfg)}};
}

}  // namespace

std::string report_to_json(const SimReport &report) {
  json j;
  j["report_version"] = 1;
  j["model"] = report.model_name;
  j["config"] = config_json(report.config);
  j["assumptions"] = {
      {"stage_overlap",
       report.config.overlap_store ? "store overlapped, other stages serial"
                                   : "all stages serial"},
      {"tiling",
       "output-stationary; 16 outputs per unit pass; 64-lane dot chunks; "
       "weights tiled to LWGT, refetch passes stall the accelerator"}};
  json layers = json::array();
  for (const LayerSim &l : report.layers)
    layers.push_back(layer_json(l, report.config));
  j["layers"] = std::move(layers);
  j["totals"] = {{"acc_cycles", report.total_acc_cycles},
                 {"total_cycles", report.total_cycles},
                 {"t_conv_fc_ms", report.t_conv_fc_ms},
                 {"t_other_ms", report.t_other_ms},
                 {"total_ms", report.total_ms}};
  return j.dump(2) + "\n";
}

std::string report_to_csv(const SimReport &report) {
  std::ostringstream out;
  out << "layer,kind,pixels,dot_length,filters,compute_cycles,"
         "stall_wgt_cycles,acc_cycles,prep_act,load_act,load_wgt,send_act,"
         "send_wgt,store,lwgt_passes,pe_utilization,total_cycles,total_ms,"
         "cpu_time_ms\n";
  for (const LayerSim &l : report.layers) {
    out << l.name << ',' << to_string(l.kind) << ',' << l.pixels << ','
        << l.dot << ',' << l.filters << ',' << l.compute_cycles << ','
        << l.stall_wgt_cycles << ',' << l.acc_cycles << ',' << l.prep_act
        << ',' << l.load_act << ',' << l.load_wgt << ',' << l.send_act << ','
        << l.send_wgt << ',' << l.store << ',' << l.lwgt_passes << ','
        << l.pe_utilization << ','
        << l.total_cycles(report.config.overlap_store) << ','
        << cycles_to_ms(l.total_cycles(report.config.overlap_store),
                        report.config)
        << ',' << l.cpu_time_ms << '\n';
  }
  return out.str();
}

std::string sweep_to_csv(SweepAxis axis,
                         const std::vector<std::int64_t> &values,
                         const std::vector<SimReport> &reports) {
  const char *axis_name = axis == SweepAxis::Lwgt    ? "lwgt"
                          : axis == SweepAxis::Gact  ? "gact"
                                                     : "gemm_units";
  std::ostringstream out;
  out << axis_name
      << ",acc_cycles,total_cycles,t_conv_fc_ms,t_other_ms,total_ms\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    out << values[i] << ',' << reports[i].total_acc_cycles << ','
        << reports[i].total_cycles << ',' << reports[i].t_conv_fc_ms << ','
        << reports[i].t_other_ms << ',' << reports[i].total_ms << '\n';
  }
  return out.str();
}

}  // namespace potacc
