#include "embcmp/workbench/params.hpp"

#include "embcmp/error.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace embcmp::workbench {

ParamReader::ParamReader(const json& object, std::string context)
    : object_(object), context_(std::move(context)) {
    if (!object_.is_object() && !object_.is_null()) {
        throw InvalidArgument(context_ + ": expected an object");
    }
}

std::string ParamReader::where(const std::string& key) const {
    return context_.empty() ? key : context_ + "." + key;
}

const json* ParamReader::find(const std::string& key) {
    seen_.insert(key);
    if (!object_.is_object()) return nullptr;
    const auto it = object_.find(key);
    if (it == object_.end() || it->is_null()) return nullptr;
    return &*it;
}

bool ParamReader::has(const std::string& key) const {
    return object_.is_object() && object_.contains(key) && !object_.at(key).is_null();
}

std::optional<double> ParamReader::optional_real(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_number()) throw InvalidArgument(where(key) + ": expected a number");
    const double x = v->get<double>();
    if (!std::isfinite(x)) throw InvalidArgument(where(key) + ": must be finite");
    return x;
}

double ParamReader::real(const std::string& key, double fallback) {
    return optional_real(key).value_or(fallback);
}

std::optional<std::uint64_t> ParamReader::optional_integer(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (v->is_number_unsigned()) return v->get<std::uint64_t>();
    if (v->is_number_integer()) {
        if (v->get<std::int64_t>() < 0) throw InvalidArgument(where(key) + ": must be non-negative");
        return static_cast<std::uint64_t>(v->get<std::int64_t>());
    }
    throw InvalidArgument(where(key) + ": expected a non-negative integer");
}

std::uint64_t ParamReader::integer(const std::string& key, std::uint64_t fallback) {
    return optional_integer(key).value_or(fallback);
}

std::string ParamReader::text(const std::string& key, const std::string& fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_string()) throw InvalidArgument(where(key) + ": expected a string");
    return v->get<std::string>();
}

bool ParamReader::flag(const std::string& key, bool fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw InvalidArgument(where(key) + ": expected a boolean");
    return v->get<bool>();
}

std::vector<std::string> ParamReader::text_list(const std::string& key) {
    const json* v = find(key);
    if (!v) return {};
    if (v->is_string()) return {v->get<std::string>()};
    if (!v->is_array()) throw InvalidArgument(where(key) + ": expected a list of strings");
    std::vector<std::string> out;
    for (const auto& item : *v) {
        if (!item.is_string()) throw InvalidArgument(where(key) + ": expected a list of strings");
        out.push_back(item.get<std::string>());
    }
    return out;
}

json ParamReader::object(const std::string& key) {
    const json* v = find(key);
    if (!v) return json::object();
    if (!v->is_object()) throw InvalidArgument(where(key) + ": expected an object");
    return *v;
}

json ParamReader::raw(const std::string& key) {
    const json* v = find(key);
    return v ? *v : json(nullptr);
}

void ParamReader::finish() const {
    if (!object_.is_object()) return;
    std::string unknown;
    for (const auto& [key, value] : object_.items()) {
        if (!seen_.count(key)) unknown += (unknown.empty() ? "" : ", ") + where(key);
    }
    if (!unknown.empty()) throw InvalidArgument("unknown parameter(s): " + unknown);
}

std::string hash_text(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string canonical_real(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

EmbedRequest embed_request_from_json(const std::string& model, const json& params) {
    EmbedRequest r;
    r.model = parse_model(model);
    ParamReader in(params, "params");
    auto& w = r.walk;
    w.walks_per_node = in.integer("walks_per_node", w.walks_per_node);
    w.walk_length = in.integer("walk_length", w.walk_length);
    w.window = in.integer("window", w.window);
    w.dimension = in.integer("dimension", w.dimension);
    w.epochs = in.integer("epochs", w.epochs);
    w.negatives = in.integer("negatives", w.negatives);
    w.initial_learning_rate = in.real("initial_learning_rate", w.initial_learning_rate);
    w.seed = in.integer("seed", w.seed);
    w.workers = in.integer("workers", w.workers);
    const auto p = in.optional_real("p");
    const auto q = in.optional_real("q");
    if (r.model == ModelKind::node2vec && (!p || !q)) throw InvalidArgument("node2vec requires p and q");
    if (p || q) r.node2vec = Node2vecParams{p.value_or(1.0), q.value_or(1.0)};
    if (r.model == ModelKind::struc2vec) {
        r.struc2vec.layers = in.integer("layers", r.struc2vec.layers);
        r.struc2vec.stay_probability = in.real("stay_probability", r.struc2vec.stay_probability);
        r.struc2vec.candidates = in.integer("candidates", r.struc2vec.candidates);
    }
    in.finish();
    r.validate();
    return r;
}

json embed_request_to_json(const EmbedRequest& r) {
    const auto& w = r.walk;
    json out = {{"walks_per_node", w.walks_per_node},
                {"walk_length", w.walk_length},
                {"window", w.window},
                {"dimension", w.dimension},
                {"epochs", w.epochs},
                {"negatives", w.negatives},
                {"initial_learning_rate", w.initial_learning_rate},
                {"seed", w.seed},
                {"workers", w.workers}};
    if (r.node2vec) {
        out["p"] = r.node2vec->p;
        out["q"] = r.node2vec->q;
    }
    if (r.model == ModelKind::struc2vec) {
        out["layers"] = r.struc2vec.layers;
        out["stay_probability"] = r.struc2vec.stay_probability;
        out["candidates"] = r.struc2vec.candidates;
    }
    return out;
}

SyntheticSpec synthetic_from_json(const json& spec) {
    SyntheticSpec s;
    ParamReader in(spec, "spec");
    const std::string kind = in.text("kind", "barabasi_albert");
    if (kind == "barabasi_albert") {
        s.kind = SyntheticKind::barabasi_albert;
    } else if (kind == "planted_partition") {
        s.kind = SyntheticKind::planted_partition;
    } else {
        throw InvalidArgument("spec.kind: expected barabasi_albert or planted_partition");
    }
    s.n = in.integer("n", s.n);
    s.ba_m = in.integer("ba_m", s.ba_m);
    s.communities = in.integer("communities", s.communities);
    s.intra_p = in.real("intra_p", s.intra_p);
    s.inter_p = in.real("inter_p", s.inter_p);
    s.bridges_per_community = in.integer("bridges_per_community", s.bridges_per_community);
    s.seed = in.integer("seed", s.seed);
    s.require_connected = in.flag("require_connected", s.require_connected);
    in.finish();
    s.validate();
    return s;
}

json synthetic_to_json(const SyntheticSpec& s) {
    return {{"kind", s.kind == SyntheticKind::barabasi_albert ? "barabasi_albert" : "planted_partition"},
            {"n", s.n},
            {"ba_m", s.ba_m},
            {"communities", s.communities},
            {"intra_p", s.intra_p},
            {"inter_p", s.inter_p},
            {"bridges_per_community", s.bridges_per_community},
            {"seed", s.seed},
            {"require_connected", s.require_connected}};
}

MetricsParams metrics_params_from_json(const json& params) {
    MetricsParams p;
    ParamReader in(params, "params");
    p.seed = in.integer("seed", p.seed);
    in.finish();
    return p;
}

std::string metrics_hash(const std::string& graph_version, const MetricsParams& p) {
    return hash_text("metrics;graph=" + graph_version + ";seed=" + std::to_string(p.seed));
}

ProjectParams project_params_from_json(const json& params) {
    ProjectParams p;
    ParamReader in(params, "params");
    p.space = in.text("space", p.space);
    auto& t = p.tsne;
    t.perplexity = in.real("perplexity", t.perplexity);
    t.iterations = in.integer("iterations", t.iterations);
    t.learning_rate = in.real("learning_rate", t.learning_rate);
    t.early_exaggeration = in.real("early_exaggeration", t.early_exaggeration);
    t.exaggeration_iterations = in.integer("exaggeration_iterations", t.exaggeration_iterations);
    t.momentum_switch = in.integer("momentum_switch", t.momentum_switch);
    t.snapshot_stride = in.integer("snapshot_stride", t.snapshot_stride);
    t.seed = in.integer("seed", t.seed);
    p.metrics_seed = in.integer("metrics_seed", p.metrics_seed);
    in.finish();
    if (p.space.empty()) throw InvalidArgument("params.space must not be empty");
    t.validate();
    return p;
}

std::string project_hash(const std::string& input_hash, const ProjectParams& p) {
    const auto& t = p.tsne;
    std::ostringstream key;
    key << "project;input=" << input_hash << ";space=" << p.space << ";perplexity=" << canonical_real(t.perplexity)
        << ";iterations=" << t.iterations << ";lr=" << canonical_real(t.learning_rate)
        << ";exaggeration=" << canonical_real(t.early_exaggeration) << "x" << t.exaggeration_iterations
        << ";momentum=" << canonical_real(t.initial_momentum) << "/" << canonical_real(t.final_momentum) << "@"
        << t.momentum_switch << ";stride=" << t.snapshot_stride << ";seed=" << t.seed;
    return hash_text(key.str());
}

RegressParams regress_params_from_json(const json& params) {
    RegressParams p;
    ParamReader in(params, "params");
    p.models = in.text_list("models");
    auto& o = p.options;
    o.train_fraction = in.real("train_fraction", o.train_fraction);
    o.seed = in.integer("seed", o.seed);
    o.tree.max_depth = in.integer("max_depth", o.tree.max_depth);
    o.tree.min_leaf = in.integer("min_leaf", o.tree.min_leaf);
    o.lasso_lambda = in.real("lasso_lambda", o.lasso_lambda);
    o.r2_gate = in.real("r2_gate", o.r2_gate);
    if (const auto cap = in.optional_integer("max_pairs")) {
        p.max_pairs = *cap == 0 ? std::nullopt : std::optional<std::size_t>(*cap);
    }
    p.metrics_seed = in.integer("metrics_seed", p.metrics_seed);
    in.finish();
    if (!(o.train_fraction > 0.0 && o.train_fraction < 1.0)) {
        throw InvalidArgument("params.train_fraction must lie in (0, 1)");
    }
    if (o.tree.max_depth == 0 || o.tree.min_leaf == 0) {
        throw InvalidArgument("params.max_depth and params.min_leaf must be positive");
    }
    if (!(o.lasso_lambda >= 0.0)) throw InvalidArgument("params.lasso_lambda must be non-negative");
    return p;
}

std::string regress_hash(const std::string& metrics_hash, const std::vector<std::string>& embedding_hashes,
                         const RegressParams& p) {
    const auto& o = p.options;
    std::ostringstream key;
    key << "regress;metrics=" << metrics_hash << ";embeddings=";
    for (std::size_t i = 0; i < embedding_hashes.size(); ++i) {
        key << (i ? "," : "") << p.models.at(i) << ":" << embedding_hashes[i];
    }
    key << ";train=" << canonical_real(o.train_fraction) << ";seed=" << o.seed << ";depth=" << o.tree.max_depth
        << ";leaf=" << o.tree.min_leaf << ";lambda=" << canonical_real(o.lasso_lambda)
        << ";gate=" << canonical_real(o.r2_gate) << ";pairs=" << (p.max_pairs ? std::to_string(*p.max_pairs) : "all");
    return hash_text(key.str());
}

StructureParams structure_params_from_json(const json& params) {
    StructureParams p;
    ParamReader in(params, "params");
    p.model = in.text("model", p.model);
    p.k = in.integer("k", p.k);
    p.seed = in.integer("seed", p.seed);
    in.finish();
    if (p.k == 0) throw InvalidArgument("params.k must be positive");
    return p;
}

std::string structure_hash(const std::string& embedding_hash, const StructureParams& p) {
    return hash_text("structure;embedding=" + embedding_hash + ";model=" + p.model + ";k=" + std::to_string(p.k) +
                     ";seed=" + std::to_string(p.seed));
}

} // namespace embcmp::workbench
