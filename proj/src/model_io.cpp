#include "potacc/model_io.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

namespace potacc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint32_t crc32_of(const std::uint8_t *data, std::size_t len) {
  return static_cast<std::uint32_t>(
      ::crc32(0L, reinterpret_cast<const Bytef *>(data),
              static_cast<uInt>(len)));
}

std::vector<std::uint8_t> read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open '" + path + "'");
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

void write_file(const std::string &path, const void *data, std::size_t len) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SchemaError("cannot write '" + path + "'");
  out.write(static_cast<const char *>(data), static_cast<std::streamsize>(len));
  if (!out) throw SchemaError("short write to '" + path + "'");
}

// --- manifest access with path-addressed diagnostics ---

const json &need(const json &j, const std::string &path, const char *key) {
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(path + "." + key + ": missing");
  return *it;
}

std::int64_t need_int(const json &j, const std::string &path, const char *key) {
  const json &v = need(j, path, key);
  if (!v.is_number_integer())
    throw SchemaError(path + "." + key + ": expected an integer");
  return v.get<std::int64_t>();
}

double need_num(const json &j, const std::string &path, const char *key) {
  const json &v = need(j, path, key);
  if (!v.is_number()) throw SchemaError(path + "." + key + ": expected a number");
  return v.get<double>();
}

std::string need_str(const json &j, const std::string &path, const char *key) {
  const json &v = need(j, path, key);
  if (!v.is_string()) throw SchemaError(path + "." + key + ": expected a string");
  return v.get<std::string>();
}

Shape need_shape(const json &j, const std::string &path, const char *key) {
  const json &v = need(j, path, key);
  if (!v.is_array() || v.empty())
    throw SchemaError(path + "." + key + ": expected a non-empty array");
  Shape s;
  for (const json &d : v) {
    if (!d.is_number_integer() || d.get<std::int64_t>() <= 0)
      throw SchemaError(path + "." + key + ": dimensions must be positive");
    s.push_back(d.get<int>());
  }
  return s;
}

struct Section {
  std::int64_t offset, length;
  std::uint32_t crc;
};

Section need_section(const json &j, const std::string &path, const char *key) {
  const json &v = need(j, path, key);
  std::string p = path + "." + key;
  Section s{need_int(v, p, "offset"), need_int(v, p, "length"),
            static_cast<std::uint32_t>(need_int(v, p, "crc32"))};
  if (s.offset < 0 || s.length < 0)
    throw SchemaError(p + ": offset/length must be non-negative");
  return s;
}

std::vector<std::uint8_t> slice_blob(const std::vector<std::uint8_t> &blob,
                                     const Section &s,
                                     const std::string &path) {
  if (s.offset + s.length > static_cast<std::int64_t>(blob.size()))
    throw ChecksumMismatch(path + ": section [" + std::to_string(s.offset) +
                           ", +" + std::to_string(s.length) +
                           ") exceeds blob size " +
                           std::to_string(blob.size()));
  std::vector<std::uint8_t> bytes(blob.begin() + s.offset,
                                  blob.begin() + s.offset + s.length);
  if (crc32_of(bytes.data(), bytes.size()) != s.crc)
    throw ChecksumMismatch(path + ": CRC32 mismatch");
  return bytes;
}

}  // namespace

Model load_model(const std::string &manifest_path) {
  json j;
  {
    std::ifstream in(manifest_path);
    if (!in) throw SchemaError("cannot open '" + manifest_path + "'");
    try {
      in >> j;
    } catch (const json::parse_error &e) {
      throw SchemaError(std::string("manifest is not valid JSON: ") + e.what());
    }
  }
  if (need_str(j, "$", "format") != "potacc-model")
    throw SchemaError("$.format: expected \"potacc-model\"");
  const std::int64_t version = need_int(j, "$", "version");
  if (version != 1)
    throw VersionUnsupported("manifest version " + std::to_string(version) +
                             " (supported: 1)");

  Model model;
  model.version = 1;
  model.name = need_str(j, "$", "name");
  model.scheme = make_scheme(scheme_kind_from_string(need_str(j, "$", "scheme")));
  const std::string stage = need_str(j, "$", "stage");
  if (stage == "int8")
    model.stage = WeightStage::Int8;
  else if (stage == "pot_int_e")
    model.stage = WeightStage::PotIntE;
  else
    throw SchemaError("$.stage: expected \"int8\" or \"pot_int_e\"");

  const json &input = need(j, "$", "input");
  model.input_shape = need_shape(input, "$.input", "shape");
  model.input_scale = need_num(input, "$.input", "scale");
  model.input_zero_point = static_cast<int>(need_int(input, "$.input", "zero_point"));
  if (!(model.input_scale > 0.0))
    throw SchemaError("$.input.scale: must be positive");

  const std::string blob_name = need_str(j, "$", "blob");
  const fs::path blob_path = fs::path(manifest_path).parent_path() / blob_name;
  std::vector<std::uint8_t> blob;
  {
    std::ifstream in(blob_path, std::ios::binary);
    if (!in)
      throw ChecksumMismatch("blob '" + blob_path.string() + "' is missing");
    blob.assign(std::istreambuf_iterator<char>(in),
                std::istreambuf_iterator<char>());
  }

  const json &layers = need(j, "$", "layers");
  if (!layers.is_array()) throw SchemaError("$.layers: expected an array");

  double act_scale = model.input_scale;
  int act_zp = model.input_zero_point;
  int idx = 0;
  for (const json &lj : layers) {
    const std::string path = "$.layers[" + std::to_string(idx++) + "]";
    LayerSpec layer;
    layer.name = need_str(lj, path, "name");
    const std::string kind = need_str(lj, path, "kind");
    if (kind == "cpu") {
      layer.kind = LayerKind::CpuOther;
      if (lj.contains("cpu_time_ms")) {
        layer.cpu_time_ms = need_num(lj, path, "cpu_time_ms");
        if (layer.cpu_time_ms < 0)
          throw SchemaError(path + ".cpu_time_ms: must be >= 0");
      }
      model.layers.push_back(std::move(layer));
      continue;
    }
    if (kind == "conv2d")
      layer.kind = LayerKind::Conv2D;
    else if (kind == "fully_connected")
      layer.kind = LayerKind::FullyConnected;
    else
      throw SchemaError(path + ".kind: unknown kind '" + kind + "'");

    layer.input_shape = need_shape(lj, path, "input_shape");
    layer.in_channels = static_cast<int>(need_int(lj, path, "in_channels"));
    layer.filters = static_cast<int>(need_int(lj, path, "filters"));
    if (layer.in_channels <= 0 || layer.filters <= 0)
      throw SchemaError(path + ": in_channels/filters must be positive");
    if (layer.kind == LayerKind::Conv2D) {
      const json &kernel = need(lj, path, "kernel");
      if (!kernel.is_array() || kernel.size() != 2)
        throw SchemaError(path + ".kernel: expected [kh, kw]");
      layer.kernel_h = kernel[0].get<int>();
      layer.kernel_w = kernel[1].get<int>();
      layer.stride = static_cast<int>(need_int(lj, path, "stride"));
      if (layer.kernel_h <= 0 || layer.kernel_w <= 0 || layer.stride <= 0)
        throw SchemaError(path + ": kernel/stride must be positive");
      const std::string pad = need_str(lj, path, "padding");
      if (pad == "same")
        layer.padding = PaddingMode::Same;
      else if (pad == "valid")
        layer.padding = PaddingMode::Valid;
      else
        throw SchemaError(path + ".padding: expected \"same\" or \"valid\"");
      if (layer.input_shape.size() != 4)
        throw SchemaError(path + ".input_shape: conv2d expects [N,H,W,C]");
    } else if (layer.input_shape.size() != 2) {
      throw SchemaError(path + ".input_shape: fully_connected expects [rows,K]");
    }

    const json &scales = need(lj, path, "weight_scales");
    if (!scales.is_array() || scales.empty())
      throw SchemaError(path + ".weight_scales: expected a non-empty array");
    for (const json &s : scales) {
      if (!s.is_number() || !(s.get<double>() > 0.0))
        throw SchemaError(path + ".weight_scales: scales must be positive");
      layer.quant.weight_scales.push_back(s.get<double>());
    }
    const int nscales = static_cast<int>(layer.quant.weight_scales.size());
    if (nscales != 1 && nscales != layer.filters)
      throw SchemaError(path + ".weight_scales: expected 1 or " +
                        std::to_string(layer.filters) + " entries");

    const json &output = need(lj, path, "output");
    layer.quant.output_scale = need_num(output, path + ".output", "scale");
    layer.quant.output_zero_point =
        static_cast<int>(need_int(output, path + ".output", "zero_point"));
    if (!(layer.quant.output_scale > 0.0))
      throw SchemaError(path + ".output.scale: must be positive");
    layer.quant.activation_scale = act_scale;
    layer.quant.activation_zero_point = act_zp;
    act_scale = layer.quant.output_scale;
    act_zp = layer.quant.output_zero_point;

    const std::int64_t elems =
        std::int64_t{layer.filters} * layer.dot_length();
    const Section wsec = need_section(lj, path, "weights");
    const std::string encoding =
        need_str(need(lj, path, "weights"), path + ".weights", "encoding");
    const Shape wshape =
        layer.kind == LayerKind::Conv2D
            ? Shape{layer.filters, layer.kernel_h, layer.kernel_w,
                    layer.in_channels}
            : Shape{layer.filters, layer.in_channels};

    if (encoding == "int8") {
      if (model.stage != WeightStage::Int8)
        throw SchemaError(path + ".weights.encoding: int8 section in a " +
                          "pot_int_e stage model");
      if (wsec.length != elems)
        throw SchemaError(path + ".weights.length: expected " +
                          std::to_string(elems));
      auto bytes = slice_blob(blob, wsec, path + ".weights");
      layer.stage = WeightStage::Int8;
      layer.weights_int8 = Int8Tensor(wshape);
      for (std::int64_t i = 0; i < elems; ++i) {
        auto v = static_cast<std::int8_t>(bytes[i]);
        if (v == -128)
          throw SchemaError(path + ".weights: int8 weight -128 out of the "
                            "symmetric range [-127,127]");
        layer.weights_int8[i] = v;
      }
    } else if (encoding == "pot4") {
      if (model.stage != WeightStage::PotIntE)
        throw SchemaError(path + ".weights.encoding: pot4 section in an "
                          "int8 stage model");
      if (wsec.length != (elems + 1) / 2)
        throw SchemaError(path + ".weights.length: expected " +
                          std::to_string((elems + 1) / 2));
      layer.stage = WeightStage::PotIntE;
      layer.weights_packed.scheme = model.scheme;
      layer.weights_packed.shape = wshape;
      layer.weights_packed.bytes = slice_blob(blob, wsec, path + ".weights");
      layer.weights_packed.corrected_scales = layer.quant.weight_scales;
      const json &corr = need(lj, path, "correction");
      if (!corr.is_array() ||
          static_cast<int>(corr.size()) != nscales)
        throw SchemaError(path + ".correction: expected " +
                          std::to_string(nscales) + " entries");
      for (const json &c : corr)
        layer.weights_packed.correction_factor.push_back(c.get<double>());
    } else {
      throw SchemaError(path + ".weights.encoding: expected \"int8\" or "
                        "\"pot4\"");
    }

    const Section bsec = need_section(lj, path, "bias");
    if (bsec.length != std::int64_t{4} * layer.filters)
      throw SchemaError(path + ".bias.length: expected " +
                        std::to_string(4 * layer.filters));
    auto bbytes = slice_blob(blob, bsec, path + ".bias");
    layer.bias = Int32Tensor({layer.filters});
    for (int f = 0; f < layer.filters; ++f) {
      std::uint32_t u = static_cast<std::uint32_t>(bbytes[4 * f]) |
                        static_cast<std::uint32_t>(bbytes[4 * f + 1]) << 8 |
                        static_cast<std::uint32_t>(bbytes[4 * f + 2]) << 16 |
                        static_cast<std::uint32_t>(bbytes[4 * f + 3]) << 24;
      layer.bias[f] = static_cast<std::int32_t>(u);
    }
    model.layers.push_back(std::move(layer));
  }
  return model;
}

std::string save_model(const Model &model, const std::string &manifest_path) {
  // blob sits next to the manifest as <manifest>.bin, so manifests with
  // different extensions never share a blob
  fs::path blob_path = fs::path(manifest_path);
  blob_path += ".bin";

  std::vector<std::uint8_t> blob;
  auto append_section = [&blob](const std::uint8_t *data, std::int64_t len) {
    Section s;
    s.offset = static_cast<std::int64_t>(blob.size());
    s.length = len;
    blob.insert(blob.end(), data, data + len);
    s.crc = crc32_of(blob.data() + s.offset, static_cast<std::size_t>(len));
    return s;
  };
  auto section_json = [](const Section &s) {
    return json{{"offset", s.offset}, {"length", s.length}, {"crc32", s.crc}};
  };

  json layers = json::array();
  for (const LayerSpec &layer : model.layers) {
    json lj;
    lj["name"] = layer.name;
    lj["kind"] = to_string(layer.kind);
    if (layer.kind == LayerKind::CpuOther) {
      if (layer.cpu_time_ms >= 0) lj["cpu_time_ms"] = layer.cpu_time_ms;
      layers.push_back(std::move(lj));
      continue;
    }
    lj["input_shape"] = layer.input_shape;
    lj["in_channels"] = layer.in_channels;
    lj["filters"] = layer.filters;
    if (layer.kind == LayerKind::Conv2D) {
      lj["kernel"] = {layer.kernel_h, layer.kernel_w};
      lj["stride"] = layer.stride;
      lj["padding"] = to_string(layer.padding);
    }
    lj["weight_scales"] = layer.quant.weight_scales;
    lj["output"] = {{"scale", layer.quant.output_scale},
                    {"zero_point", layer.quant.output_zero_point}};

    Section wsec;
    if (layer.stage == WeightStage::Int8) {
      wsec = append_section(
          reinterpret_cast<const std::uint8_t *>(layer.weights_int8.data.data()),
          layer.weights_int8.size());
      lj["weights"] = section_json(wsec);
      lj["weights"]["encoding"] = "int8";
    } else {
      wsec = append_section(layer.weights_packed.bytes.data(),
                            static_cast<std::int64_t>(layer.weights_packed.bytes.size()));
      lj["weights"] = section_json(wsec);
      lj["weights"]["encoding"] = "pot4";
      lj["correction"] = layer.weights_packed.correction_factor;
    }

    std::vector<std::uint8_t> bias_bytes(4 * layer.bias.size());
    for (std::int64_t f = 0; f < layer.bias.size(); ++f) {
      std::uint32_t u = static_cast<std::uint32_t>(layer.bias[f]);
      bias_bytes[4 * f] = u & 0xFF;
      bias_bytes[4 * f + 1] = (u >> 8) & 0xFF;
      bias_bytes[4 * f + 2] = (u >> 16) & 0xFF;
      bias_bytes[4 * f + 3] = (u >> 24) & 0xFF;
    }
    lj["bias"] = section_json(
        append_section(bias_bytes.data(), static_cast<std::int64_t>(bias_bytes.size())));
    layers.push_back(std::move(lj));
  }

  json j;
  j["format"] = "potacc-model";
  j["version"] = model.version;
  j["name"] = model.name;
  j["scheme"] = to_string(model.scheme.kind);
  j["stage"] = to_string(model.stage);
  j["input"] = {{"shape", model.input_shape},
                {"scale", model.input_scale},
                {"zero_point", model.input_zero_point}};
  j["blob"] = blob_path.filename().string();
  j["layers"] = std::move(layers);

  const std::string text = j.dump(2) + "\n";
  write_file(manifest_path, text.data(), text.size());
  write_file(blob_path.string(), blob.data(), blob.size());
  return blob_path.string();
}

TensorFile load_tensor(const std::string &path) {
  auto bytes = read_file(path);
  if (bytes.size() < 8 || std::memcmp(bytes.data(), "POTT", 4) != 0)
    throw SchemaError("'" + path + "' is not a tensor file (bad magic)");
  std::uint32_t hlen = bytes[4] | bytes[5] << 8 | bytes[6] << 16 |
                       static_cast<std::uint32_t>(bytes[7]) << 24;
  if (8 + hlen > bytes.size())
    throw SchemaError("'" + path + "' tensor header exceeds file size");
  json h;
  try {
    h = json::parse(bytes.begin() + 8, bytes.begin() + 8 + hlen);
  } catch (const json::parse_error &e) {
    throw SchemaError(std::string("tensor header is not valid JSON: ") +
                      e.what());
  }
  TensorFile t;
  Shape shape = need_shape(h, "header", "shape");
  t.scale = need_num(h, "header", "scale");
  t.zero_point = static_cast<int>(need_int(h, "header", "zero_point"));
  if (need_str(h, "header", "dtype") != "int8")
    throw SchemaError("header.dtype: only int8 tensors are supported");
  const std::int64_t n = numel(shape);
  if (static_cast<std::int64_t>(bytes.size()) != 8 + hlen + n)
    throw SchemaError("'" + path + "' data size does not match shape");
  t.tensor = Int8Tensor(shape);
  std::memcpy(t.tensor.data.data(), bytes.data() + 8 + hlen,
              static_cast<std::size_t>(n));
  return t;
}

void save_tensor(const TensorFile &t, const std::string &path) {
  json h;
  h["shape"] = t.tensor.shape;
  h["scale"] = t.scale;
  h["zero_point"] = t.zero_point;
  h["dtype"] = "int8";
  const std::string header = h.dump();
  std::vector<std::uint8_t> bytes;
  bytes.insert(bytes.end(), {'P', 'O', 'T', 'T'});
  std::uint32_t hlen = static_cast<std::uint32_t>(header.size());
  bytes.push_back(hlen & 0xFF);
  bytes.push_back((hlen >> 8) & 0xFF);
  bytes.push_back((hlen >> 16) & 0xFF);
  bytes.push_back((hlen >> 24) & 0xFF);
  bytes.insert(bytes.end(), header.begin(), header.end());
  bytes.insert(bytes.end(), t.tensor.data.begin(), t.tensor.data.end());
  write_file(path, bytes.data(), bytes.size());
}

}  // namespace potacc
