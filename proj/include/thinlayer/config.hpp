#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "thinlayer/device.hpp"

namespace thinlayer {

struct OutputControls {
  std::string dir = "out";
  bool svg = true;
};

struct DeviceConfig {
  Device device;
  std::vector<double> deltas;  // sweep list, strictly decreasing in (0,1)
  bool strict_compat = false;
  std::optional<FunctionDescriptor> recovery_field;
  OutputControls output;
  std::string hash;            // FNV-1a of the source text, 16 hex digits
  std::string source;          // path or label
  std::vector<std::string> warnings;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

/// Parse and validate a YAML device description.
///
///   domain:       {a, b, H}
///   deflection:   {terms: [...]}           u(x)
///   permittivity: {terms: [...]}           sigma(x, z)
///   boundary:     {form: affine, h: [...], frak_h: [...]}
///                 {form: explicit, h: [...], h_b: [...]}
///   mesh:         {nx, nz, layers, layer_base, coincidence_eps}
///   solver:       {tol, max_iter, dense_threshold, method: auto | cg | dense}
///   sweep:        {deltas: [...], strict_compat}
///   recovery:     {field: [...]}           theta(x, z, w), w = u(x)
///   output:       {dir, svg}
///
/// A term is [i, j, k, c] for c x^i z^j w^k, or a map with keys i, j, k, c and the
/// optional q ((z+H)^q), p ((w+H)^p), sin: m or cos: m (mode m pi (x-a)/(b-a)).
/// Throws ParseError for malformed input and ValidationError listing every violated
/// constraint, both with line numbers.
DeviceConfig parse_config(const std::string& path);
DeviceConfig parse_config_text(const std::string& text, const std::string& label = "<string>");

}  // namespace thinlayer
