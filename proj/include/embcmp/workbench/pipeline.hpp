#pragma once

#include "embcmp/workbench/params.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace embcmp::workbench {

/// Scalars become booleans, integers or reals when they parse as such.
json yaml_to_json(const std::string& text);

struct PipelineConfig {
    /// Edge-list / spec path or a dataset id under `data_dir`; unused when
    /// `synthetic` is set.
    std::string dataset;
    std::optional<SyntheticSpec> synthetic;
    std::filesystem::path data_dir = "data";
    std::filesystem::path output = "pipeline-out";
    MetricsParams metrics;
    std::vector<EmbedRequest> models;
    RegressParams regression;
    std::optional<StructureParams> structure;
    /// Spaces to project ("graph" or space ids); params.space is ignored.
    std::vector<std::string> projection_spaces;
    ProjectParams projection;
};

/// Unknown keys anywhere in the document are rejected.
PipelineConfig pipeline_from_json(const json& config);

struct PipelineResult {
    std::vector<std::filesystem::path> files;
    /// importance-table CSV
    std::string table_csv;
};

/// Metrics, embeddings, regression and the optional structure and projection
/// stages, writing every artifact under `config.output`.
PipelineResult run_pipeline(const PipelineConfig& config, std::ostream& log);

} // namespace embcmp::workbench
