#include "embcmp/ranking.hpp"

#include "embcmp/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

namespace embcmp {

Measure parse_measure(const std::string& name) {
    if (name == "cosine") return Measure::cosine;
    if (name == "euclidean") return Measure::euclidean;
    if (name == "graph") return Measure::graph;
    throw InvalidArgument("unknown measure '" + name + "'");
}

std::string measure_name(Measure m) {
    switch (m) {
    case Measure::cosine: return "cosine";
    case Measure::euclidean: return "euclidean";
    case Measure::graph: return "graph";
    }
    return "graph";
}

std::vector<NodeId> RankingList::nodes() const {
    std::vector<NodeId> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.node);
    return out;
}

bool RankingList::contains(NodeId v) const {
    return std::any_of(entries.begin(), entries.end(), [&](const RankingEntry& e) { return e.node == v; });
}

std::vector<double> RankingList::deltas() const {
    std::vector<double> out;
    for (std::size_t i = 1; i < entries.size(); ++i) out.push_back(std::abs(entries[i].score - entries[i - 1].score));
    return out;
}

GraphOrder GraphOrder::parse(const std::string& text) {
    if (text == "shared_friends" || text == "adjacency_shared_friends") return {};
    const auto metric = parse_metric(text);
    if (!metric) throw InvalidArgument("unknown graph ordering '" + text + "'");
    GraphOrder o;
    o.kind = Kind::metric_distance;
    o.metric = *metric;
    return o;
}

std::string GraphOrder::name() const {
    return kind == Kind::shared_friends ? "shared_friends" : std::string(metric_key(metric));
}

namespace {

void check_k(std::size_t k) {
    if (k == 0) throw InvalidArgument("ranking length k must be positive");
}

} // namespace

RankingList rank_graph_space(const Graph& g, const Matrix& normalized, NodeId anchor,
                             const GraphOrder& order, std::size_t k) {
    g.check_node(anchor);
    check_k(k);
    RankingList list;
    list.anchor = anchor;
    list.space_id = "graph";
    list.measure = Measure::graph;
    list.k = k;
    if (order.kind == GraphOrder::Kind::shared_friends) {
        for (NodeId v : g.neighbors(anchor)) {
            list.entries.push_back({v, static_cast<double>(shared_neighbors(g, anchor, v))});
        }
        std::sort(list.entries.begin(), list.entries.end(), [&](const RankingEntry& a, const RankingEntry& b) {
            if (a.score != b.score) return a.score > b.score;
            if (g.degree(a.node) != g.degree(b.node)) return g.degree(a.node) > g.degree(b.node);
            return a.node < b.node;
        });
    } else {
        if (normalized.rows() != g.node_count() || normalized.cols() != kMetricCount) {
            throw InvalidArgument("normalized metrics do not match the graph");
        }
        const std::size_t m = index(order.metric);
        for (NodeId v = 0; v < g.node_count(); ++v) {
            if (v != anchor) list.entries.push_back({v, std::abs(normalized(anchor, m) - normalized(v, m))});
        }
        std::sort(list.entries.begin(), list.entries.end(), [](const RankingEntry& a, const RankingEntry& b) {
            return a.score != b.score ? a.score < b.score : a.node < b.node;
        });
    }
    if (list.entries.size() > k) list.entries.resize(k);
    return list;
}

RankingList rank_embedding_space(const EmbeddingMatrix& e, NodeId anchor, Measure measure, std::size_t k) {
    const std::size_t n = e.vectors.rows();
    if (anchor >= n) throw InvalidArgument("anchor out of range");
    if (measure == Measure::graph) throw InvalidArgument("embedding ranking needs cosine or euclidean");
    check_k(k);
    const auto a = e.vectors.row(anchor);
    double anchor_norm = 0;
    for (float x : a) anchor_norm += double(x) * x;
    anchor_norm = std::sqrt(anchor_norm);
    if (measure == Measure::cosine && anchor_norm == 0.0) {
        throw InvalidArgument("cosine ranking undefined for a zero anchor vector");
    }
    RankingList list;
    list.anchor = anchor;
    list.space_id = e.model_id;
    list.measure = measure;
    list.k = k;
    for (NodeId v = 0; v < n; ++v) {
        if (v == anchor) continue;
        const auto b = e.vectors.row(v);
        double dot = 0, nb = 0, sq = 0;
        for (std::size_t c = 0; c < a.size(); ++c) {
            dot += double(a[c]) * b[c];
            nb += double(b[c]) * b[c];
            const double d = double(a[c]) - double(b[c]);
            sq += d * d;
        }
        double score;
        if (measure == Measure::cosine) score = nb > 0 ? dot / (anchor_norm * std::sqrt(nb)) : 0.0;
        else score = std::sqrt(sq);
        list.entries.push_back({v, score});
    }
    const bool descending = measure == Measure::cosine;
    std::sort(list.entries.begin(), list.entries.end(), [&](const RankingEntry& x, const RankingEntry& y) {
        if (x.score != y.score) return descending ? x.score > y.score : x.score < y.score;
        return x.node < y.node;
    });
    if (list.entries.size() > k) list.entries.resize(k);
    return list;
}

double ndcg(std::span<const NodeId> presented, std::span<const NodeId> ideal, std::size_t k) {
    check_k(k);
    const std::size_t rel = std::min(k, ideal.size());
    auto grade = [&](NodeId v) -> double {
        for (std::size_t i = 0; i < rel; ++i) {
            if (ideal[i] == v) return static_cast<double>(rel - i);
        }
        return 0.0;
    };
    double dcg = 0, idcg = 0;
    for (std::size_t i = 0; i < std::min(k, presented.size()); ++i) {
        dcg += (std::exp2(grade(presented[i])) - 1.0) / std::log2(static_cast<double>(i) + 2.0);
    }
    for (std::size_t i = 0; i < rel; ++i) {
        idcg += (std::exp2(static_cast<double>(rel - i)) - 1.0) / std::log2(static_cast<double>(i) + 2.0);
    }
    return idcg > 0 ? dcg / idcg : 0.0;
}

double ndcg(const RankingList& presented, const RankingList& ideal, std::size_t k) {
    const auto p = presented.nodes();
    const auto i = ideal.nodes();
    return ndcg(p, i, k);
}

std::size_t cross_space_presence(std::span<const RankingList> lists, NodeId node) {
    return static_cast<std::size_t>(
        std::count_if(lists.begin(), lists.end(), [&](const RankingList& l) { return l.contains(node); }));
}

std::string ranking_json(const Graph& g, const Matrix& normalized, const RankingList& list,
                         double ndcg_value, std::span<const RankingList> embedding_lists) {
    nlohmann::json entries = nlohmann::json::array();
    const auto deltas = list.deltas();
    for (std::size_t i = 0; i < list.entries.size(); ++i) {
        const auto& e = list.entries[i];
        nlohmann::json bars = nlohmann::json::object();
        if (normalized.rows() == g.node_count()) {
            for (std::size_t m = 0; m < kMetricCount; ++m) bars[std::string(metric_key(kAllMetrics[m]))] = normalized(e.node, m);
        }
        entries.push_back({{"node", e.node},
                           {"label", g.label(e.node)},
                           {"score", e.score},
                           {"delta", i < deltas.size() ? deltas[i] : 0.0},
                           {"shared_friends", shared_neighbors(g, list.anchor, e.node)},
                           {"presence", cross_space_presence(embedding_lists, e.node)},
                           {"metric_bars", bars}});
    }
    return nlohmann::json{{"anchor", list.anchor},
                          {"anchor_label", g.label(list.anchor)},
                          {"space", list.space_id},
                          {"measure", measure_name(list.measure)},
                          {"k", list.k},
                          {"ndcg", ndcg_value},
                          {"entries", entries}}
        .dump(2);
}

} // namespace embcmp
