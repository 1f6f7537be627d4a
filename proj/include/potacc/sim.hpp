#ifndef POTACC_SIM_HPP
#define POTACC_SIM_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "potacc/qmm.hpp"

namespace potacc {

// Accelerator geometry and bandwidth model. Bandwidths are bytes per
// accelerator clock cycle; bw_dma_acc is the aggregate of the DMA channels.
struct AccelConfig {
  std::string name = "custom";
  int gemm_units = 4;  // {2, 4, 8, 16}
  int pes_per_unit = 64;
  int outputs_per_unit = 16;
  std::int64_t gact_bytes = 128 * 1024;
  std::int64_t lwgt_bytes_per_unit = 128 * 1024;
  std::int64_t lact_bytes = 32 * 1024;
  int weight_bits = 4;  // 4 or 8
  double freq_mhz = 200.0;
  int dma_channels = 4;
  double bw_cpu_dma = 1.0;
  double bw_dma_acc = 16.0;
  bool weight_copy_opt = true;
  bool dma_preload = true;
  bool overlap_store = false;
};

// Built-in configurations: "pynq-z2" and "kria" are shift-accelerator
// setups (4-bit weights, both optimizations on); "vmac-pynq-z2" is the
// unoptimized 8-bit baseline the buffer-size observations were made on.
AccelConfig accel_preset(const std::string &name);
std::vector<std::string> accel_preset_names();
void validate_config(const AccelConfig &cfg);

// Per-layer timing/energy breakdown, all in accelerator clock cycles.
// Stages do not overlap in v1; store is dropped from the total when
// overlap_store is set. acc_cycles covers compute plus the stall cycles of
// weight refetch passes after the first delivery (which is send_wgt).
struct LayerSim {
  std::string name;
  LayerKind kind = LayerKind::Conv2D;
  std::int64_t pixels = 0, dot = 0, filters = 0;  // lowered MM dims
  std::uint64_t compute_cycles = 0;
  std::uint64_t stall_wgt_cycles = 0;
  std::uint64_t overhead_cycles = 0;
  std::uint64_t acc_cycles = 0;
  std::uint64_t prep_act = 0, load_act = 0, load_wgt = 0;
  std::uint64_t send_act = 0, send_wgt = 0, store = 0;
  std::int64_t act_bytes = 0, out_bytes = 0;
  std::int64_t wgt_bytes = 0;           // packed weight footprint
  std::int64_t wgt_per_unit_bytes = 0;  // traffic one unit receives per pass
  std::int64_t send_wgt_bytes = 0;      // first full distribution, all units
  std::int64_t wgt_streamed_bytes = 0;  // including refetch passes
  int lwgt_passes = 1;
  int lwgt_refetch_count = 0;  // passes beyond the first
  double pe_utilization = 0.0;
  double cpu_time_ms = 0.0;  // CpuOther layers only

  std::uint64_t total_cycles(bool overlap_store) const {
    return prep_act + load_act + load_wgt + send_act + send_wgt + acc_cycles +
           (overlap_store ? 0 : store);
  }
};

struct SimReport {
  AccelConfig config;
  std::string model_name;
  std::vector<LayerSim> layers;
  // totals (cycles for accelerated layers, ms once frequency is applied)
  std::uint64_t total_acc_cycles = 0;
  std::uint64_t total_cycles = 0;
  double t_conv_fc_ms = 0.0;
  double t_other_ms = 0.0;
  double total_ms = 0.0;
};

double cycles_to_ms(std::uint64_t cycles, const AccelConfig &cfg);

LayerSim simulate_layer(const LayerSpec &layer, const AccelConfig &cfg);
SimReport simulate_model(const Model &model, const AccelConfig &cfg);

enum class SweepAxis { Lwgt, Gact, GemmUnits };
SweepAxis sweep_axis_from_string(const std::string &name);

// One report per value, ascending; the non-swept buffer is pinned to the
// 128 KB minimum for buffer sweeps.
std::vector<SimReport> sweep(const Model &model, const AccelConfig &cfg,
                             SweepAxis axis,
                             const std::vector<std::int64_t> &values);

// Energy per image from user-supplied power readings:
// (p_inference - p_idle) * seconds / images.
double energy_joules_per_image(double p_inference_w, double p_idle_w,
                               double total_time_s, std::int64_t images);
double energy_joules_per_image(const SimReport &report, double p_inference_w,
                               double p_idle_w, std::int64_t images);

// Serialization of reports (schema version 1).
std::string report_to_json(const SimReport &report);
std::string report_to_csv(const SimReport &report);
std::string sweep_to_csv(SweepAxis axis, const std::vector<std::int64_t> &values,
                         const std::vector<SimReport> &reports);

}  // namespace potacc

#endif  // POTACC_SIM_HPP
