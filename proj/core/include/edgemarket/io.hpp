#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "edgemarket/analysis.hpp"
#include "edgemarket/eg_solver.hpp"
#include "edgemarket/model.hpp"
#include "edgemarket/result.hpp"
#include "edgemarket/scenario.hpp"

namespace edgemarket::io {

/// A file could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A document is not valid JSON or does not follow the expected layout.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Json = nlohmann::ordered_json;

/// Units every document declares; there is no conversion.
inline constexpr const char* units_note = "mec: cores and GB per resource column; ran: MHz";

// Instance documents keep full double precision so a written instance
// replays bit-identically. Layout:
//   { "units": ..., "resources": ["cpu", "ram"],
//     "nodes":     [{"name", "capacity": [per resource]}],
//     "cells":     [{"name", "bandwidth"}],
//     "providers": [{"name", "budget", "mec_demand": [per resource],
//                    "ran_demand": [per cell] or one number for all cells}] }
[[nodiscard]] Json to_json(const MarketInstance& instance);
[[nodiscard]] MarketInstance instance_from_json(const Json& doc);

// Results are written with 12 significant digits. Non-finite numbers
// (a log NSW of -inf) become null.
[[nodiscard]] Json to_json(const Allocation& allocation);
[[nodiscard]] Json to_json(const Prices& prices);
[[nodiscard]] Json to_json(const MechanismResult& result);
[[nodiscard]] Json to_json(const EquilibriumSolution& solution);
[[nodiscard]] Json to_json(const Certificate& certificate);
[[nodiscard]] Json to_json(const KktResiduals& residuals);
[[nodiscard]] Json to_json(const BangPerBuckReport& report);

/// Round to 12 significant digits; non-finite values pass through.
[[nodiscard]] double round12(double value) noexcept;
/// Shortest text of round12(value); "inf", "-inf" or "nan" otherwise.
[[nodiscard]] std::string format_number(double value);

// Deployment section of a config document. Every key is optional and
// falls back to the DeploymentTemplate defaults:
//   { "large_cells": {"count", "bandwidth_mhz"}, "small_cells": ...,
//     "cpu_nodes": {"count", "cores", "ram_gb"}, "ram_nodes": ...,
//     "providers", "noise_relative", "noise_floor", "per_cell_ran_noise",
//     "seed", "templates": [{"name", "cpu", "ram", "ran", "budget"}] }
[[nodiscard]] DeploymentTemplate deployment_from_json(const Json& doc);
[[nodiscard]] Json to_json(const DeploymentTemplate& deployment);
[[nodiscard]] Json to_json(const ServiceTemplate& service);

/// Looks a template up by name in `catalogue` (case-insensitive, '-' and
/// '_' ignored, so "cpu_intensive" finds "CPU-Intensive").
[[nodiscard]] ServiceTemplate find_template(const std::vector<ServiceTemplate>& catalogue,
                                            const std::string& name);

[[nodiscard]] Json read_json(const std::filesystem::path& path);
/// Writes `doc` indented by two spaces plus a trailing newline; creates
/// missing parent directories.
void write_json(const std::filesystem::path& path, const Json& doc);
void write_text(const std::filesystem::path& path, const std::string& text);

[[nodiscard]] MarketInstance read_instance(const std::filesystem::path& path);
void write_instance(const std::filesystem::path& path, const MarketInstance& instance);

/// Quotes a CSV field when it contains a comma, quote or newline.
[[nodiscard]] std::string csv_field(const std::string& text);

}  // namespace edgemarket::io
