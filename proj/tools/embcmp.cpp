// embcmp: command-line driver for the embedding comparison pipeline.
// Results go to stdout or --out; diagnostics go to stderr.
// Exit codes: 0 ok, 2 bad arguments, 3 compute failure, 4 data problem.

#include "embcmp/diagnostics.hpp"
#include "embcmp/error.hpp"
#include "embcmp/generators.hpp"
#include "embcmp/workbench/artifacts.hpp"
#include "embcmp/workbench/datasets.hpp"
#include "embcmp/workbench/http.hpp"
#include "embcmp/workbench/pipeline.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace embcmp;
using namespace embcmp::workbench;

namespace {

std::string default_data_dir() {
    const char* dir = std::getenv("WORKBENCH_DATA_DIR");
    return dir && *dir ? dir : "data";
}

void write_output(const std::string& path, const std::string& bytes) {
    if (path.empty() || path == "-") {
        std::cout << bytes;
        std::cout.flush();
        return;
    }
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << bytes;
    if (!out) throw DataError("cannot write " + path);
}

// A file path, or a dataset id under <data-dir>/datasets.
Dataset resolve_dataset(const std::string& arg, const std::string& data_dir) {
    if (arg.empty()) throw InvalidArgument("--dataset is required");
    if (fs::is_regular_file(arg)) return load_dataset_file(arg);
    if (valid_dataset_id(arg)) {
        for (const char* ext : {".edges", ".txt", ".json"}) {
            const fs::path p = fs::path(data_dir) / "datasets" / (arg + ext);
            if (fs::is_regular_file(p)) return load_dataset_file(p, arg);
        }
    }
    throw NotFound("dataset not found: " + arg + " (not a file, and not under " + data_dir + "/datasets)");
}

// Embedding file aligned to the graph; the model id is the file stem.
EmbeddingMatrix load_space(const Graph& g, const std::string& path) {
    if (!fs::is_regular_file(path)) throw NotFound("embedding file not found: " + path);
    return align_embedding(g, load_embedding(path), fs::path(path).stem().string());
}

LoadedMetrics metrics_for(const Graph& g, std::uint64_t seed) {
    const MetricsArtifacts a = compute_metrics_artifacts(g, MetricsParams{seed});
    return parse_metrics(g, a.metrics_csv, a.communities_csv);
}

NodeId anchor_of(const Graph& g, const std::string& label) {
    const auto u = g.index_of(label);
    if (!u) throw NotFound("unknown anchor label: " + label);
    return *u;
}

struct Common {
    std::string data_dir = default_data_dir();
    std::string dataset;
    std::string out;
    std::uint64_t seed = 1;
};

void add_dataset(CLI::App* cmd, Common& c) {
    cmd->add_option("--dataset,-d", c.dataset, "Edge-list file, synthetic spec (.json), or dataset id in the data dir")
        ->required();
    cmd->add_option("--data-dir", c.data_dir, "Workbench data directory (default $WORKBENCH_DATA_DIR or ./data)");
}

void add_out(CLI::App* cmd, Common& c, const std::string& what) {
    cmd->add_option("--out,-o", c.out, "Output file for " + what + " (default stdout)");
}

int run_serve(const ServiceOptions& options) {
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    Workbench workbench({options.data_dir, options.workers});
    HttpService http(workbench);
    const int port = http.bind(options.host, options.port);
    std::thread waiter([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        std::cerr << "embcmp: signal " << sig << ", shutting down\n";
        http.stop();
    });
    waiter.detach();
    std::cerr << "embcmp: serving " << options.data_dir << " on http://" << options.host << ":" << port << " with "
              << workbench.worker_count() << " worker(s)\n";
    std::cout << "port=" << port << "\nready" << std::endl;
    http.listen();
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Compare network embedding spaces against graph-space node metrics."};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every command");

    // generate
    SyntheticSpec spec;
    std::string kind = "barabasi_albert";
    std::string gen_out, gen_truth;
    bool gen_as_spec = false;
    auto* gen = app.add_subcommand("generate", "Write a synthetic graph as an edge list (or its spec)");
    gen->add_option("--kind", kind, "barabasi_albert or planted_partition")
        ->check(CLI::IsMember({"barabasi_albert", "planted_partition"}));
    gen->add_option("--n", spec.n, "Node count");
    gen->add_option("--m", spec.ba_m, "Edges per new node (barabasi_albert)");
    gen->add_option("--communities", spec.communities, "Community count (planted_partition)");
    gen->add_option("--intra-p", spec.intra_p, "Intra-community edge probability");
    gen->add_option("--inter-p", spec.inter_p, "Inter-community edge probability");
    gen->add_option("--bridges", spec.bridges_per_community, "Bridge nodes per community");
    gen->add_option("--seed", spec.seed, "Random seed");
    gen->add_flag("--connected", spec.require_connected, "Fail when the graph is disconnected");
    gen->add_flag("--spec", gen_as_spec, "Write the JSON spec instead of the edge list");
    gen->add_option("--truth", gen_truth, "Also write label,community,bridge CSV (planted_partition)");
    gen->add_option("--out,-o", gen_out, "Output file (default stdout)");

    // metrics
    Common met;
    bool met_normalized = false;
    std::string met_communities;
    auto* metrics = app.add_subcommand("metrics", "Compute the eleven node metrics as CSV");
    add_dataset(metrics, met);
    metrics->add_option("--seed", met.seed, "Community detection seed");
    metrics->add_flag("--normalized", met_normalized, "Emit min-max normalized values");
    metrics->add_option("--communities", met_communities, "Also write label,community CSV to this file");
    add_out(metrics, met, "the metrics CSV");

    // embed
    Common emb;
    std::string model;
    WalkConfig walk;
    Struc2vecConfig s2v;
    double p = 1.0, q = 1.0;
    auto* embedc = app.add_subcommand("embed", "Train a DeepWalk, node2vec or struc2vec embedding");
    add_dataset(embedc, emb);
    embedc->add_option("--model,-m", model, "deepwalk, node2vec or struc2vec")
        ->required()
        ->check(CLI::IsMember({"deepwalk", "node2vec", "struc2vec"}));
    auto* p_opt = embedc->add_option("--p", p, "node2vec return parameter (required for node2vec)");
    auto* q_opt = embedc->add_option("--q", q, "node2vec in-out parameter (required for node2vec)");
    embedc->add_option("--dim", walk.dimension, "Embedding dimension");
    embedc->add_option("--walks", walk.walks_per_node, "Walks per node");
    embedc->add_option("--length", walk.walk_length, "Walk length in nodes");
    embedc->add_option("--window", walk.window, "Skip-gram window");
    embedc->add_option("--epochs", walk.epochs, "Training epochs");
    embedc->add_option("--negatives", walk.negatives, "Negative samples per positive pair");
    embedc->add_option("--lr", walk.initial_learning_rate, "Initial learning rate");
    embedc->add_option("--workers", walk.workers, "Training threads; 1 is deterministic");
    embedc->add_option("--layers", s2v.layers, "struc2vec hierarchy depth");
    embedc->add_option("--stay", s2v.stay_probability, "struc2vec probability of staying in a layer");
    embedc->add_option("--seed", walk.seed, "Random seed");
    embedc->add_option("--out,-o", emb.out, "Output embedding file (word2vec text format)")->required();

    // regress
    Common reg;
    std::vector<std::string> reg_embeddings;
    RegressionOptions ropt;
    std::uint64_t reg_metrics_seed = 1;
    std::size_t reg_max_pairs = kDefaultPairCap;
    std::string reg_table;
    auto* regress = app.add_subcommand("regress", "Explain embedding distances with node-metric differences");
    add_dataset(regress, reg);
    regress->add_option("--embeddings,-e", reg_embeddings, "Embedding files (comma separated); model id = file stem")
        ->required()
        ->delimiter(',');
    regress->add_option("--metrics-seed", reg_metrics_seed, "Community detection seed for the metrics");
    regress->add_option("--seed", ropt.seed, "Pair sampling and train/test split seed");
    regress->add_option("--train-fraction", ropt.train_fraction, "Training share of the pairs");
    regress->add_option("--max-depth", ropt.tree.max_depth, "Decision tree depth limit");
    regress->add_option("--min-leaf", ropt.tree.min_leaf, "Decision tree minimum samples per leaf");
    regress->add_option("--lambda", ropt.lasso_lambda, "Lasso penalty");
    regress->add_option("--r2-gate", ropt.r2_gate, "Minimum test R2 for a report to enter the ranking");
    regress->add_option("--max-pairs", reg_max_pairs, "Pair sample cap; 0 uses every pair");
    regress->add_option("--table", reg_table,
                        "Importance-table CSV file (default: stdout when --out is a file, otherwise not written)");
    add_out(regress, reg, "the report JSON");

    // project
    Common proj;
    std::string proj_space = "graph";
    TsneConfig tcfg;
    std::uint64_t proj_metrics_seed = 1;
    bool proj_snapshots = false;
    auto* project = app.add_subcommand("project", "t-SNE projection of the graph space or an embedding");
    add_dataset(project, proj);
    project->add_option("--space", proj_space, "\"graph\" for the metric space, or an embedding file");
    project->add_option("--perplexity", tcfg.perplexity, "Perplexity (clamped to (n-1)/3)");
    project->add_option("--iterations", tcfg.iterations, "Gradient steps");
    project->add_option("--learning-rate", tcfg.learning_rate, "Learning rate");
    project->add_option("--stride", tcfg.snapshot_stride, "Snapshot every this many iterations");
    project->add_option("--seed", tcfg.seed, "Initialisation seed");
    project->add_option("--metrics-seed", proj_metrics_seed, "Community detection seed for the graph space");
    project->add_flag("--snapshots", proj_snapshots, "Include every snapshot in the output");
    add_out(project, proj, "the projection JSON");

    // structure
    Common st;
    std::string st_embedding;
    std::size_t st_k = 3;
    auto* structure = app.add_subcommand("structure", "Cluster ego features and average distance vectors");
    add_dataset(structure, st);
    structure->add_option("--embedding,-e", st_embedding, "Embedding file; model id = file stem")->required();
    structure->add_option("--k", st_k, "Cluster count");
    structure->add_option("--seed", st.seed, "k-means seed");
    add_out(structure, st, "the structure JSON");

    // rank
    Common rk;
    std::string rk_anchor, rk_space = "graph", rk_measure = "euclidean", rk_order = "shared_friends";
    std::size_t rk_k = kDefaultRankingLength;
    std::vector<std::string> rk_compare;
    auto* rank = app.add_subcommand("rank", "Ranking list around an anchor node with NDCG");
    add_dataset(rank, rk);
    rank->add_option("--anchor", rk_anchor, "Anchor node label")->required();
    rank->add_option("--space", rk_space, "\"graph\" or an embedding file");
    rank->add_option("--measure", rk_measure, "cosine or euclidean")->check(CLI::IsMember({"cosine", "euclidean"}));
    rank->add_option("--k", rk_k, "List length");
    rank->add_option("--order-by", rk_order, "Graph-space order: shared_friends or a metric name");
    rank->add_option("--compare", rk_compare, "Further embedding files for presence counts (comma separated)")
        ->delimiter(',');
    rank->add_option("--seed", rk.seed, "Community detection seed for the metrics");
    add_out(rank, rk, "the ranking JSON");

    // serve
    ServiceOptions sopt;
    std::string serve_error;
    try {
        sopt = service_options_from_env();
    } catch (const std::exception& e) {
        serve_error = e.what();
    }
    std::string serve_dir = sopt.data_dir.string();
    auto* serve = app.add_subcommand("serve", "Run the HTTP workbench service");
    serve->add_option("--data-dir", serve_dir, "Data directory (default $WORKBENCH_DATA_DIR or ./data)");
    serve->add_option("--host", sopt.host, "Bind address");
    serve->add_option("--port", sopt.port, "Port; 0 picks a free one (default $WORKBENCH_PORT or 8789)")
        ->check(CLI::Range(0, 65535));
    serve->add_option("--workers", sopt.workers, "Job worker threads (default $WORKBENCH_WORKERS or cores - 1)")
        ->check(CLI::PositiveNumber);

    // pipeline run
    std::string pipeline_config, pipeline_output;
    auto* pipeline = app.add_subcommand("pipeline", "Run a declarative end-to-end analysis");
    pipeline->require_subcommand(1);
    auto* pipeline_run = pipeline->add_subcommand("run", "Run every stage listed in a YAML config");
    pipeline_run->add_option("config", pipeline_config, "YAML pipeline config")->required();
    pipeline_run->add_option("--output", pipeline_output, "Override the config's output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "embcmp: " << e.what() << "\n";
        return 2;
    }

    try {
        if (gen->parsed()) {
            spec.kind = kind == "barabasi_albert" ? SyntheticKind::barabasi_albert : SyntheticKind::planted_partition;
            spec.validate();
            if (gen_as_spec) {
                write_output(gen_out, synthetic_to_json(spec).dump(2) + "\n");
                return 0;
            }
            std::ostringstream edges;
            if (spec.kind == SyntheticKind::planted_partition) {
                const PlantedGraph pg = planted_partition(spec);
                if (spec.require_connected && !pg.graph.is_connected()) {
                    throw ComputeError("generated graph is disconnected");
                }
                write_edge_list(pg.graph, edges);
                if (!gen_truth.empty()) {
                    std::ostringstream truth;
                    truth << "label,community,bridge\n";
                    std::vector<bool> bridge(pg.graph.node_count(), false);
                    for (NodeId b : pg.bridges) bridge[b] = true;
                    for (NodeId u = 0; u < pg.graph.node_count(); ++u) {
                        truth << pg.graph.label(u) << ',' << pg.community_of[u] << ',' << (bridge[u] ? 1 : 0) << '\n';
                    }
                    write_output(gen_truth, truth.str());
                }
            } else {
                if (!gen_truth.empty()) throw InvalidArgument("--truth applies to planted_partition only");
                write_edge_list(generate(spec), edges);
            }
            write_output(gen_out, edges.str());
        } else if (metrics->parsed()) {
            const Dataset d = resolve_dataset(met.dataset, met.data_dir);
            const MetricsArtifacts a = compute_metrics_artifacts(d.graph, MetricsParams{met.seed});
            if (!met_communities.empty()) write_output(met_communities, a.communities_csv);
            if (met_normalized) {
                const LoadedMetrics m = parse_metrics(d.graph, a.metrics_csv, a.communities_csv);
                MetricsTable t(d.graph.node_count());
                for (Metric metric : kAllMetrics) {
                    for (NodeId u = 0; u < d.graph.node_count(); ++u) t.column(metric)[u] = m.normalized(u, index(metric));
                }
                std::ostringstream csv;
                write_metrics_csv(d.graph, t, csv);
                write_output(met.out, csv.str());
            } else {
                write_output(met.out, a.metrics_csv);
            }
        } else if (embedc->parsed()) {
            const Dataset d = resolve_dataset(emb.dataset, emb.data_dir);
            json params = embed_request_to_json(EmbedRequest{ModelKind::deepwalk, walk, std::nullopt, {}});
            if (p_opt->count()) params["p"] = p;
            if (q_opt->count()) params["q"] = q;
            if (model == "struc2vec") {
                params["layers"] = s2v.layers;
                params["stay_probability"] = s2v.stay_probability;
            }
            const EmbedRequest request = embed_request_from_json(model, params);
            std::cerr << "embcmp: embedding " << d.id << " with " << space_id(request) << "\n";
            const EmbeddingMatrix e = embed(d.graph, request);
            write_output(emb.out, embedding_text(d.graph, e));
            std::cerr << "embcmp: wrote " << e.vectors.rows() << " x " << e.vectors.cols() << " (" << e.config_hash
                      << ") to " << emb.out << "\n";
        } else if (regress->parsed()) {
            const Dataset d = resolve_dataset(reg.dataset, reg.data_dir);
            std::vector<EmbeddingMatrix> embeddings;
            for (const auto& path : reg_embeddings) embeddings.push_back(load_space(d.graph, path));
            RegressParams rp;
            rp.options = ropt;
            rp.max_pairs = reg_max_pairs == 0 ? std::nullopt : std::optional<std::size_t>(reg_max_pairs);
            const LoadedMetrics m = metrics_for(d.graph, reg_metrics_seed);
            const RegressionArtifacts a = compute_regression(d.id, m, embeddings, rp);
            write_output(reg.out, a.report_json + "\n");
            if (!reg_table.empty()) {
                write_output(reg_table, a.table_csv);
            } else if (!reg.out.empty() && reg.out != "-") {
                write_output("", a.table_csv);
            }
        } else if (project->parsed()) {
            const Dataset d = resolve_dataset(proj.dataset, proj.data_dir);
            ProjectParams pp;
            pp.tsne = tcfg;
            pp.tsne.validate();
            Matrix x;
            if (proj_space == kGraphSpace) {
                pp.space = std::string(kGraphSpace);
                x = metrics_for(d.graph, proj_metrics_seed).normalized;
            } else {
                const EmbeddingMatrix e = load_space(d.graph, proj_space);
                pp.space = e.model_id;
                x = embedding_as_matrix(e.vectors);
            }
            ProjectionRun run;
            run.final = tsne(x, pp.tsne, [&](const Projection2D& s) {
                if (proj_snapshots) run.snapshots.push_back(s);
                return true;
            });
            json out = json::parse(projection_json(d.graph, pp.space, pp, run));
            if (!proj_snapshots) out.erase("snapshots");
            write_output(proj.out, out.dump() + "\n");
        } else if (structure->parsed()) {
            const Dataset d = resolve_dataset(st.dataset, st.data_dir);
            const EmbeddingMatrix e = load_space(d.graph, st_embedding);
            StructureParams sp;
            sp.model = e.model_id;
            sp.k = st_k;
            sp.seed = st.seed;
            if (sp.k == 0) throw InvalidArgument("--k must be positive");
            write_output(st.out, compute_structure(d.graph, e, sp) + "\n");
        } else if (rank->parsed()) {
            const Dataset d = resolve_dataset(rk.dataset, rk.data_dir);
            const NodeId anchor = anchor_of(d.graph, rk_anchor);
            std::vector<EmbeddingMatrix> spaces;
            std::string presented = std::string(kGraphSpace);
            if (rk_space != kGraphSpace) {
                spaces.push_back(load_space(d.graph, rk_space));
                presented = spaces.back().model_id;
            }
            for (const auto& path : rk_compare) {
                if (path != rk_space) spaces.push_back(load_space(d.graph, path));
            }
            std::vector<const EmbeddingMatrix*> ptrs;
            for (const auto& e : spaces) ptrs.push_back(&e);
            const json body = ranking_view(d.graph, metrics_for(d.graph, rk.seed), anchor, presented,
                                           parse_measure(rk_measure), rk_k, GraphOrder::parse(rk_order), ptrs);
            write_output(rk.out, body.dump(2) + "\n");
        } else if (serve->parsed()) {
            if (!serve_error.empty()) throw InvalidArgument(serve_error);
            sopt.data_dir = serve_dir;
            return run_serve(sopt);
        } else if (pipeline_run->parsed()) {
            std::ifstream in(pipeline_config);
            if (!in) throw NotFound("config not found: " + pipeline_config);
            std::stringstream text;
            text << in.rdbuf();
            PipelineConfig config = pipeline_from_json(yaml_to_json(text.str()));
            if (!pipeline_output.empty()) config.output = pipeline_output;
            const PipelineResult r = run_pipeline(config, std::cerr);
            std::cerr << "embcmp: wrote " << r.files.size() << " files under " << config.output << "\n";
            write_output("", r.table_csv);
        }
    } catch (const InvalidArgument& e) {
        std::cerr << "embcmp: invalid argument: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "embcmp: data error: " << e.what() << "\n";
        return 4;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "embcmp: data error: " << e.what() << "\n";
        return 4;
    } catch (const MissingPrerequisite& e) {
        std::cerr << "embcmp: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "embcmp: compute error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
