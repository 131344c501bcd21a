#pragma once

// Report emission: JSON envelopes with a config hash, CSV tables and small
// hand-written SVG line charts. Nothing here reads the clock, so identical
// inputs give identical bytes.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace orlicz::report {

std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t v);

/// {"command", "config", "config_hash", "tolerances", "result"}; the hash is
/// taken over the compact dump of `config`.
nlohmann::json envelope(const std::string& command, const nlohmann::json& config,
                        const nlohmann::json& tolerances, nlohmann::json result);

/// ORLICZ_LAB_OUT wins over `requested`; the directory is created.
std::filesystem::path output_dir(const std::string& requested);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& columns);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Polyline chart; non-positive points are dropped on log axes.
std::string svg_line_chart(const std::string& title, const std::vector<Series>& series,
                           bool log_x, bool log_y);

/// Shortest round-trip decimal for doubles in CSV cells.
std::string format_double(double v);

}  // namespace orlicz::report
