#include "embcmp/workbench/artifacts.hpp"

#include "embcmp/error.hpp"

#include <sstream>

namespace embcmp::workbench {

MetricsArtifacts compute_metrics_artifacts(const Graph& g, const MetricsParams& p) {
    const CommunityAssignment communities = detect_communities(g, p.seed);
    const MetricsTable table = compute_metrics(g, communities);
    MetricsArtifacts out;
    std::ostringstream csv;
    write_metrics_csv(g, table, csv);
    out.metrics_csv = csv.str();
    std::ostringstream comm;
    comm << "label,community\n";
    for (NodeId u = 0; u < g.node_count(); ++u) comm << g.label(u) << ',' << communities.community_of[u] << '\n';
    out.communities_csv = comm.str();
    return out;
}

LoadedMetrics parse_metrics(const Graph& g, const std::string& metrics_csv, const std::string& communities_csv) {
    std::istringstream in(metrics_csv);
    std::vector<std::string> labels;
    MetricsTable raw;
    try {
        raw = read_metrics_csv(in, &labels);
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("metrics csv: bad number: ") + e.what());
    }
    if (labels.size() != g.node_count()) throw DataError("metrics csv: node count does not match the graph");
    LoadedMetrics m;
    m.table = MetricsTable(g.node_count());
    for (std::size_t row = 0; row < labels.size(); ++row) {
        const auto u = g.index_of(labels[row]);
        if (!u) throw DataError("metrics csv: unknown label " + labels[row]);
        for (Metric metric : kAllMetrics) m.table.column(metric)[*u] = raw.column(metric)[row];
    }
    m.normalized = normalize_metrics(m.table);
    m.community_of.assign(g.node_count(), 0);
    std::istringstream comm(communities_csv);
    std::string line;
    std::getline(comm, line);
    std::size_t seen = 0;
    while (std::getline(comm, line)) {
        if (line.empty()) continue;
        const auto comma = line.rfind(',');
        const auto u = comma == std::string::npos ? std::nullopt : g.index_of(line.substr(0, comma));
        if (!u) throw DataError("communities csv: bad row " + line);
        m.community_of[*u] = std::stoul(line.substr(comma + 1));
        ++seen;
    }
    if (seen != g.node_count()) throw DataError("communities csv: node count does not match the graph");
    return m;
}

json metrics_to_json(const Graph& g, const LoadedMetrics& m) {
    json columns = json::array();
    for (Metric metric : kAllMetrics) columns.push_back(std::string(metric_key(metric)));
    json nodes = json::array();
    for (NodeId u = 0; u < g.node_count(); ++u) {
        json raw = json::array(), norm = json::array();
        for (Metric metric : kAllMetrics) {
            raw.push_back(m.table(u, metric));
            norm.push_back(m.normalized(u, index(metric)));
        }
        nodes.push_back({{"node", u},
                         {"label", g.label(u)},
                         {"community", m.community_of[u]},
                         {"values", std::move(raw)},
                         {"normalized", std::move(norm)}});
    }
    return {{"columns", std::move(columns)}, {"nodes", std::move(nodes)}};
}

std::string embedding_text(const Graph& g, const EmbeddingMatrix& e) {
    std::ostringstream out;
    write_embedding(out, g, e);
    return out.str();
}

EmbeddingMatrix parse_embedding(const Graph& g, const std::string& text, std::string model_id,
                                std::string config_hash) {
    std::istringstream in(text);
    EmbeddingMatrix e = align_embedding(g, read_embedding(in), std::move(model_id));
    e.config_hash = std::move(config_hash);
    return e;
}

Matrix embedding_as_matrix(const EmbeddingVectors& v) {
    Matrix m(v.rows(), v.cols());
    for (std::size_t i = 0; i < v.data().size(); ++i) m.data()[i] = v.data()[i];
    return m;
}

namespace {

json coords_json(const Matrix& coords) {
    json out = json::array();
    for (std::size_t i = 0; i < coords.rows(); ++i) out.push_back({coords(i, 0), coords(i, 1)});
    return out;
}

} // namespace

json snapshot_to_json(const std::string& space_id, const Projection2D& p) {
    return {{"space_id", space_id}, {"iteration", p.iteration}, {"kl", p.kl}, {"coords", coords_json(p.coords)}};
}

std::string projection_json(const Graph& g, const std::string& space_id, const ProjectParams& p,
                            const ProjectionRun& run) {
    json snapshots = json::array();
    for (const auto& s : run.snapshots) snapshots.push_back(snapshot_to_json(space_id, s));
    json out = {{"space_id", space_id},
                {"labels", g.labels()},
                {"perplexity", effective_perplexity(p.tsne.perplexity, g.node_count())},
                {"iterations", p.tsne.iterations},
                {"snapshot_stride", p.tsne.snapshot_stride},
                {"iteration", run.final.iteration},
                {"kl", run.final.kl},
                {"coords", coords_json(run.final.coords)},
                {"snapshots", std::move(snapshots)}};
    return out.dump() + "\n";
}

RegressionArtifacts compute_regression(const std::string& dataset, const LoadedMetrics& metrics,
                                       const std::vector<EmbeddingMatrix>& embeddings, const RegressParams& p) {
    if (embeddings.empty()) throw InvalidArgument("regression needs at least one embedding");
    std::vector<RegressionReport> reports;
    for (const auto& e : embeddings) {
        const PairSampling sampling{p.max_pairs, p.options.seed};
        const PairwiseDataset d = build_pairwise_dataset(metrics.normalized, e.vectors, sampling);
        reports.push_back(run_regression(d, p.options, e.model_id, dataset));
    }
    const FeatureRanking ranking = rank_features(reports, p.options.r2_gate);
    return {reports_json(reports, ranking), ranking_csv(ranking)};
}

json ranking_view(const Graph& g, const LoadedMetrics& metrics, NodeId anchor, const std::string& space,
                  Measure measure, std::size_t k, const GraphOrder& order,
                  const std::vector<const EmbeddingMatrix*>& embeddings) {
    if (k == 0) throw InvalidArgument("k must be positive");
    if (measure == Measure::graph) throw InvalidArgument("measure must be cosine or euclidean");
    g.check_node(anchor);
    const RankingList ideal = rank_graph_space(g, metrics.normalized, anchor, order, k);
    std::vector<RankingList> lists;
    for (const EmbeddingMatrix* e : embeddings) lists.push_back(rank_embedding_space(*e, anchor, measure, k));
    const RankingList* presented = space == kGraphSpace ? &ideal : nullptr;
    for (const auto& list : lists) {
        if (list.space_id == space) presented = &list;
    }
    if (!presented) throw InvalidArgument("space " + space + " is not among the compared embeddings");
    json body = json::parse(ranking_json(g, metrics.normalized, *presented, ndcg(*presented, ideal, k), lists));
    body["order_by"] = order.name();
    json compared = json::array();
    for (const auto& list : lists) compared.push_back(list.space_id);
    body["compared"] = std::move(compared);
    return body;
}

std::string compute_structure(const Graph& g, const EmbeddingMatrix& e, const StructureParams& p) {
    if (p.k > g.node_count()) throw InvalidArgument("structure: k exceeds the node count");
    return structure_json(g, analyze_structure(g, e, p.k, p.seed));
}

} // namespace embcmp::workbench
