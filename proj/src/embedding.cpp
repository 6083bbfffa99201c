#include "embcmp/embedding.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace embcmp {

ModelKind parse_model(const std::string& name) {
    if (name == "deepwalk") return ModelKind::deepwalk;
    if (name == "node2vec") return ModelKind::node2vec;
    if (name == "struc2vec") return ModelKind::struc2vec;
    throw InvalidArgument("unknown model '" + name + "' (expected deepwalk, node2vec or struc2vec)");
}

std::string model_name(ModelKind kind) {
    switch (kind) {
    case ModelKind::deepwalk: return "deepwalk";
    case ModelKind::node2vec: return "node2vec";
    case ModelKind::struc2vec: return "struc2vec";
    }
    return "unknown";
}

void EmbedRequest::validate() const {
    walk.validate();
    if (model == ModelKind::node2vec) {
        if (!node2vec) {
            throw InvalidArgument("node2vec requires p and q");
        }
        node2vec->validate();
    } else if (node2vec) {
        throw InvalidArgument(model_name(model) + " does not take p/q parameters");
    }
    if (model == ModelKind::struc2vec) {
        struc2vec.validate();
    }
}

namespace {

std::string format_real(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string short_real(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", x);
    return buf;
}

} // namespace

std::string space_id(const EmbedRequest& request) {
    if (request.model == ModelKind::node2vec && request.node2vec) {
        return "node2vec_p" + short_real(request.node2vec->p) + "_q" + short_real(request.node2vec->q);
    }
    return model_name(request.model);
}

std::string config_hash(const Graph& g, const EmbedRequest& request) {
    std::ostringstream key;
    const auto& w = request.walk;
    key << "graph=" << g.fingerprint() << ";model=" << model_name(request.model)
        << ";walks=" << w.walks_per_node << ";length=" << w.walk_length << ";window=" << w.window
        << ";dim=" << w.dimension << ";epochs=" << w.epochs << ";neg=" << w.negatives
        << ";lr=" << format_real(w.initial_learning_rate) << ";seed=" << w.seed
        << ";workers=" << w.workers;
    if (request.node2vec) {
        key << ";p=" << format_real(request.node2vec->p) << ";q=" << format_real(request.node2vec->q);
    }
    if (request.model == ModelKind::struc2vec) {
        key << ";layers=" << request.struc2vec.layers
            << ";stay=" << format_real(request.struc2vec.stay_probability)
            << ";candidates=" << request.struc2vec.candidates;
    }
    const std::string s = key.str();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

WalkCorpus generate_walks(const Graph& g, const EmbedRequest& request) {
    request.validate();
    switch (request.model) {
    case ModelKind::deepwalk:
        return walks_uniform(g, request.walk);
    case ModelKind::node2vec:
        return walks_node2vec(g, request.walk, *request.node2vec);
    case ModelKind::struc2vec: {
        const auto layers = build_struc2vec_layers(g, request.struc2vec);
        return walks_struc2vec(layers, request.walk, request.struc2vec);
    }
    }
    throw InvalidArgument("unknown model");
}

EmbeddingMatrix embed(const Graph& g, const EmbedRequest& request) {
    const WalkCorpus corpus = generate_walks(g, request);
    EmbeddingMatrix out;
    out.model_id = space_id(request);
    out.config_hash = config_hash(g, request);
    out.vectors = train_skipgram(corpus, g.node_count(), request.walk).vectors;
    return out;
}

void write_embedding(std::ostream& out, const std::vector<std::string>& labels,
                     const EmbeddingVectors& vectors) {
    if (labels.size() != vectors.rows()) {
        throw InvalidArgument("write_embedding: label count does not match row count");
    }
    out << vectors.rows() << ' ' << vectors.cols() << '\n';
    char buf[32];
    for (std::size_t i = 0; i < vectors.rows(); ++i) {
        out << labels[i];
        for (float x : vectors.row(i)) {
            std::snprintf(buf, sizeof buf, " %.9g", static_cast<double>(x));
            out << buf;
        }
        out << '\n';
    }
}

void write_embedding(std::ostream& out, const Graph& g, const EmbeddingMatrix& e) {
    write_embedding(out, g.labels(), e.vectors);
}

void save_embedding(const std::string& path, const Graph& g, const EmbeddingMatrix& e) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write embedding '" + path + "'");
    }
    write_embedding(out, g, e);
}

LabeledEmbedding read_embedding(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        std::istringstream header(line);
        if (!(header >> rows >> cols) || cols == 0) {
            throw ParseError("embedding header must be '<N> <d>'", line_no);
        }
        break;
    }
    if (cols == 0) {
        throw DataError("embedding file is empty");
    }
    LabeledEmbedding e;
    std::vector<float> data;
    data.reserve(rows * cols);
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        std::istringstream ss(line);
        std::string label;
        ss >> label;
        std::size_t got = 0;
        std::string token;
        while (ss >> token) {
            char* end = nullptr;
            const float v = std::strtof(token.c_str(), &end);
            if (end == token.c_str() || *end != '\0' || !std::isfinite(v)) {
                throw ParseError("bad embedding value '" + token + "'", line_no);
            }
            data.push_back(v);
            ++got;
        }
        if (got != cols) {
            throw ParseError("expected " + std::to_string(cols) + " values, found " +
                                 std::to_string(got),
                             line_no);
        }
        e.labels.push_back(label);
    }
    if (e.labels.size() != rows) {
        throw DataError("embedding header declares " + std::to_string(rows) + " rows, found " +
                        std::to_string(e.labels.size()));
    }
    e.vectors = EmbeddingVectors(rows, cols, std::move(data));
    return e;
}

LabeledEmbedding load_embedding(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open embedding '" + path + "'");
    }
    return read_embedding(in);
}

namespace {

std::string describe_missing(const std::vector<std::string>& missing) {
    std::string msg = "embedding lacks " + std::to_string(missing.size()) + " graph label(s):";
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) {
        msg += ' ' + missing[i];
    }
    if (missing.size() > 20) {
        msg += " ...";
    }
    return msg;
}

} // namespace

LabelMismatch::LabelMismatch(std::vector<std::string> missing_labels)
    : DataError(describe_missing(missing_labels)), missing(std::move(missing_labels)) {}

EmbeddingMatrix align_embedding(const Graph& g, const LabeledEmbedding& e, std::string model_id) {
    std::unordered_map<std::string, std::size_t> row_of;
    for (std::size_t i = 0; i < e.labels.size(); ++i) {
        row_of.emplace(e.labels[i], i);
    }
    EmbeddingMatrix out;
    out.model_id = std::move(model_id);
    out.vectors = EmbeddingVectors(g.node_count(), e.vectors.cols());
    std::vector<std::string> missing;
    for (NodeId u = 0; u < g.node_count(); ++u) {
        const auto it = row_of.find(g.label(u));
        if (it == row_of.end()) {
            missing.push_back(g.label(u));
            continue;
        }
        const auto src = e.vectors.row(it->second);
        std::copy(src.begin(), src.end(), out.vectors.row(u).begin());
    }
    if (!missing.empty()) {
        throw LabelMismatch(std::move(missing));
    }
    return out;
}

} // namespace embcmp
