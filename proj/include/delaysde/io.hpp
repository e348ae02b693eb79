#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "delaysde/inference.hpp"
#include "delaysde/mc_harness.hpp"
#include "delaysde/sdde_sim.hpp"
#include "delaysde/spectral.hpp"

namespace delaysde::io {

using nlohmann::json;

/// Shortest text that parses back to the same double ("%.17g" fallback).
std::string format_double(double x);

json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// {"r", "atoms": [{"u", "w"}], "density": [{"lo", "hi", "coeffs"}]}
SignedMeasure measure_from_json(const json& j);
json measure_to_json(const SignedMeasure& measure);

// Measure fields (flat or under "measure") plus "theta".
CharacteristicModel model_from_json(const json& j);
json model_to_json(const CharacteristicModel& model);

// A number, {"polynomial": [...]} or {"tabulated": [...]}.
InitialSegment initial_segment_from_json(const json& j);

SearchRegion region_from_json(const json& j);
json region_to_json(const SearchRegion& region);

/// The `analyze` report.
json summary_to_json(const SpectralSummary& summary, double theta);
/// Reads back m* and the dominant roots of a report; other fields are kept
/// only as far as SpectralSummary has room for them.
SpectralSummary summary_from_json(const json& j);

/// ExperimentConfig keys: model, alpha, horizons, dt, replications, seed,
/// limit_dt, x0, region, threads. Thresholds are read separately.
ExperimentConfig experiment_from_json(const json& j);

/// CSV with header t,X,Y,dW; history rows leave Y and dW empty.
std::string path_to_csv(const SamplePath& path, const SignedMeasure& measure);
/// Rebuilds the grid, the values and (when every step has one) the noise.
SamplePath path_from_csv(const std::string& text);

}  // namespace delaysde::io
