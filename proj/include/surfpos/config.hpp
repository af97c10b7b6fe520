#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "surfpos/io.hpp"
#include "surfpos/pipeline.hpp"

namespace surfpos {

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Applies "key = value" lines to `cfg`. Blank lines and '#' comments are
/// skipped; unknown keys and malformed values throw Parse errors naming
/// `source` and the line.
inline void apply_config_text(PipelineConfig& cfg, const std::string& text, const std::string& source = "<config>") {
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  const std::filesystem::path src(source);
  while (std::getline(in, line)) {
    ++n;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw io::parse_error(src, n, "expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (value.empty()) throw io::parse_error(src, n, "missing value for '" + key + "'");

    const auto real = [&] { return io::parse_number(value, src, n); };
    const auto integer = [&] { return io::parse_integer(value, src, n); };
    const std::map<std::string, std::function<void()>> setters{
        {"icp_iterations", [&] { cfg.icp.iterations = static_cast<int>(integer()); }},
        {"r_min_m", [&] { cfg.icp.r_min = real(); }},
        {"r_max_m", [&] { cfg.icp.r_max = real(); }},
        {"subsample_radius_m", [&] { cfg.icp.subsample_radius = real(); }},
        {"icp_seed", [&] { cfg.icp.rng_seed = static_cast<std::uint64_t>(integer()); }},
        {"corner_window_px", [&] { cfg.corner_window = static_cast<int>(integer()); }},
        {"marker_side_m", [&] { cfg.heightmap.marker_side = real(); }},
        {"x_min_m", [&] { cfg.heightmap.x_min = real(); }},
        {"x_max_m", [&] { cfg.heightmap.x_max = real(); }},
        {"y_min_m", [&] { cfg.heightmap.y_min = real(); }},
        {"y_max_m", [&] { cfg.heightmap.y_max = real(); }},
        {"grid_step_m", [&] { cfg.heightmap.step = real(); }},
        {"top_thickness_m", [&] { cfg.heightmap.thickness = real(); }},
        {"reference_marker_id", [&] { cfg.reference_marker = static_cast<int>(integer()); }},
        {"segment_floor_m", [&] { cfg.segment_floor = real(); }},
    };
    auto it = setters.find(key);
    if (it == setters.end()) throw io::parse_error(src, n, "unknown config key '" + key + "'");
    it->second();
  }
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Parse, source + ": " + e.what());
  }
}

inline PipelineConfig read_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  PipelineConfig cfg;
  apply_config_text(cfg, ss.str(), file.string());
  return cfg;
}

/// Every key with its effective value; read back by apply_config_text.
inline std::string format_config(const PipelineConfig& cfg) {
  using io::format_double;
  std::ostringstream out;
  out << "icp_iterations = " << cfg.icp.iterations << '\n'
      << "r_min_m = " << format_double(cfg.icp.r_min) << '\n'
      << "r_max_m = " << format_double(cfg.icp.r_max) << '\n'
      << "subsample_radius_m = " << format_double(cfg.icp.subsample_radius) << '\n'
      << "icp_seed = " << cfg.icp.rng_seed << '\n'
      << "corner_window_px = " << cfg.corner_window << '\n'
      << "marker_side_m = " << format_double(cfg.heightmap.marker_side) << '\n'
      << "x_min_m = " << format_double(cfg.heightmap.x_min) << '\n'
      << "x_max_m = " << format_double(cfg.heightmap.x_max) << '\n'
      << "y_min_m = " << format_double(cfg.heightmap.y_min) << '\n'
      << "y_max_m = " << format_double(cfg.heightmap.y_max) << '\n'
      << "grid_step_m = " << format_double(cfg.heightmap.step) << '\n'
      << "top_thickness_m = " << format_double(cfg.heightmap.thickness) << '\n';
  if (cfg.reference_marker) out << "reference_marker_id = " << *cfg.reference_marker << '\n';
  if (cfg.segment_floor) out << "segment_floor_m = " << format_double(*cfg.segment_floor) << '\n';
  return out.str();
}

}  // namespace surfpos
