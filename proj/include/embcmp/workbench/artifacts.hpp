#pragma once

#include "embcmp/embedding.hpp"
#include "embcmp/metrics.hpp"
#include "embcmp/ranking.hpp"
#include "embcmp/regression.hpp"
#include "embcmp/structure.hpp"
#include "embcmp/tsne.hpp"
#include "embcmp/workbench/params.hpp"

#include <string>
#include <vector>

namespace embcmp::workbench {

// Producers shared by the command-line tool and the service. Each returns the
// bytes stored in the artifact cache; parsers read them back.

struct MetricsArtifacts {
    std::string metrics_csv;
    /// `label,community` per node
    std::string communities_csv;
};

MetricsArtifacts compute_metrics_artifacts(const Graph& g, const MetricsParams& p);

struct LoadedMetrics {
    MetricsTable table;
    Matrix normalized;
    std::vector<std::size_t> community_of;
};

/// Rows are matched to graph nodes by label.
LoadedMetrics parse_metrics(const Graph& g, const std::string& metrics_csv, const std::string& communities_csv);

json metrics_to_json(const Graph& g, const LoadedMetrics& m);

std::string embedding_text(const Graph& g, const EmbeddingMatrix& e);
EmbeddingMatrix parse_embedding(const Graph& g, const std::string& text, std::string model_id,
                                std::string config_hash = {});

/// Rows fed to t-SNE: normalized metrics for the graph space, embedding
/// vectors otherwise.
Matrix embedding_as_matrix(const EmbeddingVectors& v);

/// {space_id, iteration, kl, coords}
json snapshot_to_json(const std::string& space_id, const Projection2D& p);

struct ProjectionRun {
    std::vector<Projection2D> snapshots;
    Projection2D final;
};

/// Full projection artifact: final coordinates plus every snapshot.
std::string projection_json(const Graph& g, const std::string& space_id, const ProjectParams& p,
                            const ProjectionRun& run);

struct RegressionArtifacts {
    std::string report_json;
    /// importance-table layout
    std::string table_csv;
};

RegressionArtifacts compute_regression(const std::string& dataset, const LoadedMetrics& metrics,
                                       const std::vector<EmbeddingMatrix>& embeddings, const RegressParams& p);

/// Ranking of `space` ("graph" or an embedding model id) around `anchor`,
/// scored by NDCG against the graph-space list for `order`. `embeddings`
/// supplies the compared spaces (presence counts) and the presented one.
json ranking_view(const Graph& g, const LoadedMetrics& metrics, NodeId anchor, const std::string& space,
                  Measure measure, std::size_t k, const GraphOrder& order,
                  const std::vector<const EmbeddingMatrix*>& embeddings);

std::string compute_structure(const Graph& g, const EmbeddingMatrix& e, const StructureParams& p);

} // namespace embcmp::workbench
