#pragma once

#include <string>

#include "sylrate/envelope.hpp"

namespace sylrate {

// The jointly optimized quantities: 7 band weights plus the peak prominence
// threshold.
struct PipelineParams {
    WeightVector weights;
    double prominence_threshold = 1.0;
};

// On-disk params file: optimized quantities plus the pipeline configuration
// they were trained with.
struct ParamsFile {
    PipelineParams params;
    PipelineConfig pipeline_config;
};

// JSON round-trip with the exact field names of PipelineConfig. Unknown keys
// are rejected with FormatError; missing keys keep their defaults.
PipelineConfig load_pipeline_config(const std::string& path);
void save_pipeline_config(const std::string& path, const PipelineConfig& config);

// Params file JSON: {"weights": [7 reals], "prominence_threshold": real,
// "pipeline_config": {...}}. Throws FormatError on schema violations and
// ValidationError on a non-positive threshold.
ParamsFile load_params_file(const std::string& path);
void save_params_file(const std::string& path, const ParamsFile& file);

} // namespace sylrate
