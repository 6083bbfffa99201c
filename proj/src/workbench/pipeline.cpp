#include "embcmp/workbench/pipeline.hpp"

#include "embcmp/error.hpp"
#include "embcmp/generators.hpp"
#include "embcmp/workbench/artifacts.hpp"
#include "embcmp/workbench/datasets.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <ostream>

namespace fs = std::filesystem;

namespace embcmp::workbench {

namespace {

json scalar(const YAML::Node& node) {
    const std::string& s = node.Scalar();
    if (node.Tag() == "!") return s; // quoted
    if (s == "true" || s == "True") return true;
    if (s == "false" || s == "False") return false;
    if (s == "null" || s == "~" || s.empty()) return nullptr;
    if (s.find_first_not_of("0123456789") == std::string::npos && s.size() < 20) return std::stoull(s);
    if (s.size() > 1 && s[0] == '-' && s.find_first_not_of("0123456789", 1) == std::string::npos && s.size() < 20) {
        return std::stoll(s);
    }
    char* end = nullptr;
    const double x = std::strtod(s.c_str(), &end);
    if (end == s.c_str() + s.size()) return x;
    return s;
}

json convert(const YAML::Node& node) {
    switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
        return nullptr;
    case YAML::NodeType::Scalar:
        return scalar(node);
    case YAML::NodeType::Sequence: {
        json out = json::array();
        for (const auto& item : node) out.push_back(convert(item));
        return out;
    }
    case YAML::NodeType::Map: {
        json out = json::object();
        for (const auto& kv : node) {
            const std::string key = kv.first.as<std::string>();
            if (out.contains(key)) throw InvalidArgument("config: duplicate key " + key);
            out[key] = convert(kv.second);
        }
        return out;
    }
    }
    return nullptr;
}

void write_file(const fs::path& path, const std::string& bytes, PipelineResult& result) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << bytes;
    if (!out) throw DataError("cannot write " + path.string());
    result.files.push_back(path);
}

// Copies `seed` into `params` unless the section sets its own.
json seeded(json params, const char* key, std::uint64_t seed) {
    if (params.is_null()) params = json::object();
    if (!params.contains(key)) params[key] = seed;
    return params;
}

} // namespace

json yaml_to_json(const std::string& text) {
    try {
        return convert(YAML::Load(text));
    } catch (const YAML::Exception& e) {
        throw DataError(std::string("config: ") + e.what());
    }
}

PipelineConfig pipeline_from_json(const json& config) {
    if (!config.is_object()) throw InvalidArgument("config must be a mapping");
    PipelineConfig c;
    ParamReader in(config, "");
    c.dataset = in.text("dataset", "");
    const json synthetic = in.object("synthetic");
    c.data_dir = in.text("data_dir", c.data_dir.string());
    c.output = in.text("output", c.output.string());
    const std::uint64_t seed = in.integer("seed", 1);
    c.metrics = metrics_params_from_json(seeded(in.object("metrics"), "seed", seed));
    if (!synthetic.empty()) c.synthetic = synthetic_from_json(synthetic);
    if (c.dataset.empty() == !c.synthetic) throw InvalidArgument("config: give exactly one of dataset or synthetic");

    const json walk = seeded(in.object("walk"), "seed", seed);
    const json models = in.raw("models");
    if (!models.is_array() || models.empty()) throw InvalidArgument("config: models must be a non-empty list");
    for (std::size_t i = 0; i < models.size(); ++i) {
        const json& entry = models[i];
        if (!entry.is_object() || !entry.contains("model") || !entry["model"].is_string()) {
            throw InvalidArgument("config: models[" + std::to_string(i) + "] needs a model name");
        }
        json params = walk;
        for (const auto& [key, value] : entry.items()) {
            if (key != "model") params[key] = value;
        }
        c.models.push_back(embed_request_from_json(entry["model"].get<std::string>(), params));
    }

    json regression = seeded(in.object("regression"), "seed", seed);
    regression["metrics_seed"] = c.metrics.seed;
    if (regression.contains("models")) throw InvalidArgument("config: regression.models is implied by models");
    c.regression = regress_params_from_json(regression);
    for (const auto& m : c.models) c.regression.models.push_back(space_id(m));

    if (in.has("structure")) {
        c.structure = structure_params_from_json(seeded(in.object("structure"), "seed", seed));
        if (!c.structure->model.empty()) throw InvalidArgument("config: structure runs on every model");
    }
    if (in.has("projection")) {
        json projection = seeded(in.object("projection"), "seed", seed);
        ParamReader pr(projection, "projection");
        c.projection_spaces = pr.text_list("spaces");
        if (c.projection_spaces.empty()) c.projection_spaces = {std::string(kGraphSpace)};
        projection.erase("spaces");
        projection["metrics_seed"] = c.metrics.seed;
        c.projection = project_params_from_json(projection);
    }
    in.finish();
    return c;
}

PipelineResult run_pipeline(const PipelineConfig& c, std::ostream& log) {
    PipelineResult result;
    Dataset d;
    if (c.synthetic) {
        d = make_dataset("synthetic", "synthetic", generate(*c.synthetic));
    } else if (fs::is_regular_file(c.dataset)) {
        d = load_dataset_file(c.dataset);
    } else {
        DatasetStore store(c.data_dir);
        d = *store.load(c.dataset);
    }
    const Graph& g = d.graph;
    log << "dataset " << d.id << ": " << g.node_count() << " nodes, " << g.edge_count() << " edges\n";

    const MetricsArtifacts ma = compute_metrics_artifacts(g, c.metrics);
    write_file(c.output / "metrics.csv", ma.metrics_csv, result);
    write_file(c.output / "communities.csv", ma.communities_csv, result);
    const LoadedMetrics metrics = parse_metrics(g, ma.metrics_csv, ma.communities_csv);
    log << "metrics done\n";

    std::vector<EmbeddingMatrix> embeddings;
    for (const auto& request : c.models) {
        const std::string space = space_id(request);
        log << "embedding " << space << "\n";
        EmbeddingMatrix e = embed(g, request);
        const std::string text = embedding_text(g, e);
        write_file(c.output / "embeddings" / (space + ".txt"), text, result);
        // reload so every later stage reads exactly what was written
        embeddings.push_back(parse_embedding(g, text, space, e.config_hash));
    }

    log << "regression\n";
    const RegressionArtifacts ra = compute_regression(d.id, metrics, embeddings, c.regression);
    write_file(c.output / "regression.json", ra.report_json, result);
    write_file(c.output / "table1.csv", ra.table_csv, result);
    result.table_csv = ra.table_csv;

    if (c.structure) {
        for (const auto& e : embeddings) {
            log << "structure " << e.model_id << "\n";
            StructureParams p = *c.structure;
            p.model = e.model_id;
            write_file(c.output / "structure" / (e.model_id + ".json"), compute_structure(g, e, p), result);
        }
    }
    for (const auto& space : c.projection_spaces) {
        log << "projection " << space << "\n";
        ProjectParams p = c.projection;
        p.space = space;
        Matrix x;
        if (space == kGraphSpace) {
            x = metrics.normalized;
        } else {
            const auto it = std::find_if(embeddings.begin(), embeddings.end(),
                                         [&](const EmbeddingMatrix& e) { return e.model_id == space; });
            if (it == embeddings.end()) throw InvalidArgument("projection space " + space + " is not among the models");
            x = embedding_as_matrix(it->vectors);
        }
        ProjectionRun run;
        run.final = tsne(x, p.tsne, [&](const Projection2D& s) {
            run.snapshots.push_back(s);
            return true;
        });
        write_file(c.output / "projection" / (space + ".json"), projection_json(g, space, p, run), result);
    }
    return result;
}

} // namespace embcmp::workbench
